// Pure view-state helpers: everything here is DOM-free and unit-testable.

import type { AnnotationDoc, FrameBox, Rect } from './types.js';

export type Mode = 'marking' | 'preview';

export interface ViewState {
  sequenceId: string;
  frame: number;
  frameCount: number;
  width: number;
  height: number;
  activeTrackId: string | null;
  version: number;
  mode: Mode;
  /** Drawn-but-unsaved rectangle, already normalized. */
  draft: Rect | null;
}

/** Normalize a drag in any direction so x1 < x2 and y1 < y2. */
export function normalizeRect(ax: number, ay: number, bx: number, by: number): Rect {
  return {
    x1: Math.min(ax, bx),
    y1: Math.min(ay, by),
    x2: Math.max(ax, bx),
    y2: Math.max(ay, by),
  };
}

export function clampFrame(frame: number, frameCount: number): number {
  return Math.max(0, Math.min(frameCount - 1, frame));
}

export type KeyAction = 'save' | 'prev' | 'next' | 'preview' | 'ignore';

/**
 * Keyboard map: S saves, R steps back, P toggles prediction preview, any
 * other non-modifier key steps forward.
 */
export function keyAction(key: string): KeyAction {
  switch (key) {
    case 's':
    case 'S':
      return 'save';
    case 'r':
    case 'R':
      return 'prev';
    case 'p':
    case 'P':
      return 'preview';
    case 'Shift':
    case 'Control':
    case 'Alt':
    case 'Meta':
      return 'ignore';
    default:
      return 'next';
  }
}

/**
 * Map display coordinates to frame pixels using the frame's intrinsic size,
 * so zoom stays a pure view transform. A zero-sized rect (detached or
 * headless DOM) maps 1:1.
 */
export function displayToPixel(
  clientX: number,
  clientY: number,
  rect: { left: number; top: number; width: number; height: number },
  frameWidth: number,
  frameHeight: number,
): { x: number; y: number } {
  const scaleX = rect.width > 0 ? frameWidth / rect.width : 1;
  const scaleY = rect.height > 0 ? frameHeight / rect.height : 1;
  const x = Math.round((clientX - rect.left) * scaleX);
  const y = Math.round((clientY - rect.top) * scaleY);
  return {
    x: Math.max(0, Math.min(frameWidth, x)),
    y: Math.max(0, Math.min(frameHeight, y)),
  };
}

/** All boxes sitting on one frame, across tracks. */
export function boxesOnFrame(doc: AnnotationDoc, frame: number): FrameBox[] {
  const out: FrameBox[] = [];
  for (const track of doc.tracks) {
    for (const box of track.boxes) {
      if (box.frame === frame) {
        out.push({ ...box, track_id: track.track_id });
      }
    }
  }
  return out;
}

function area(box: Rect): number {
  return (box.x2 - box.x1) * (box.y2 - box.y1);
}

export function contains(box: Rect, x: number, y: number): boolean {
  return x >= box.x1 && x < box.x2 && y >= box.y1 && y < box.y2;
}

/**
 * Box under the cursor; overlapping boxes resolve to the topmost, i.e. the
 * smallest-area hit, so nested boxes stay reachable.
 */
export function hitTest(boxes: FrameBox[], x: number, y: number): FrameBox | null {
  let best: FrameBox | null = null;
  for (const box of boxes) {
    if (contains(box, x, y) && (best === null || area(box) < area(best))) {
      best = box;
    }
  }
  return best;
}

/** Shift a rect by a drag delta, clamped inside the frame. */
export function moveRect(
  box: Rect,
  dx: number,
  dy: number,
  frameWidth: number,
  frameHeight: number,
): Rect {
  const w = box.x2 - box.x1;
  const h = box.y2 - box.y1;
  const x1 = Math.max(0, Math.min(frameWidth - w, box.x1 + dx));
  const y1 = Math.max(0, Math.min(frameHeight - h, box.y1 + dy));
  return { x1, y1, x2: x1 + w, y2: y1 + h };
}

export interface TrackSummary {
  track_id: string;
  total: number;
  manual: number;
  predicted: number;
  corrected: number;
}

export function summarizeTracks(doc: AnnotationDoc): TrackSummary[] {
  return doc.tracks.map((track) => {
    const counts = { manual: 0, predicted: 0, corrected: 0 };
    for (const box of track.boxes) {
      counts[box.source] += 1;
    }
    return { track_id: track.track_id, total: track.boxes.length, ...counts };
  });
}
