import { ApiClient } from './api.js';
import { renderPanel, renderTrackSummary } from './panel.js';
import {
  boxesOnFrame,
  clampFrame,
  displayToPixel,
  hitTest,
  keyAction,
  moveRect,
  normalizeRect,
  type ViewState,
} from './state.js';
import type { AnnotationDoc, FrameBox, Rect, SequenceInfo } from './types.js';

const VIEWS = ['original', 'forged', 'diff'] as const;

const SOURCE_COLORS: Record<string, string> = {
  manual: '#3fb950',
  predicted: '#d29922',
  corrected: '#58a6ff',
};

interface Gesture {
  kind: 'draw' | 'move';
  startX: number;
  startY: number;
  lastX: number;
  lastY: number;
  target: FrameBox | null; // set for 'move'
}

/**
 * Four synchronized panes (original / forged / diff images + box panel).
 * All mouse input is handled on the original pane; boxes are overlaid on
 * every pane for visual verification.
 */
export class AnnotatorApp {
  readonly state: ViewState;
  doc: AnnotationDoc;
  readonly root: HTMLElement;

  private readonly api: ApiClient;
  private readonly images = new Map<string, HTMLImageElement>();
  private readonly overlays = new Map<string, HTMLCanvasElement>();
  private panelBody!: HTMLTableSectionElement;
  private summaryEl!: HTMLElement;
  private statusEl!: HTMLElement;
  private frameEl!: HTMLElement;
  private modeEl!: HTMLElement;
  private endBadge!: HTMLElement;
  private gainInput!: HTMLInputElement;
  private gesture: Gesture | null = null;
  private gain = 1;
  private canvas2dSupported: boolean | null = null;

  private constructor(root: HTMLElement, api: ApiClient, sequence: SequenceInfo, doc: AnnotationDoc) {
    this.root = root;
    this.api = api;
    this.doc = doc;
    this.state = {
      sequenceId: sequence.sequence_id,
      frame: 0,
      frameCount: sequence.frame_count,
      width: sequence.width,
      height: sequence.height,
      activeTrackId: doc.tracks.length > 0 ? doc.tracks[0]!.track_id : null,
      version: doc.version,
      mode: 'marking',
      draft: null,
    };
    this.buildDom();
    this.bindEvents();
    this.setFrame(0, { quiet: true });
  }

  static async create(root: HTMLElement, api: ApiClient, sequence: SequenceInfo): Promise<AnnotatorApp> {
    const doc = await api.getDocument(sequence.sequence_id);
    return new AnnotatorApp(root, api, sequence, doc);
  }

  // ------------------------------------------------------------------ DOM

  private buildDom(): void {
    const d = this.root.ownerDocument;
    this.root.classList.add('annotator');
    this.root.innerHTML = `
      <header class="toolbar">
        <span class="seq-name">${this.state.sequenceId}</span>
        <span class="frame-indicator" data-test="frame"></span>
        <span class="mode-badge" data-test="mode"></span>
        <span class="end-badge" data-test="end" hidden>end of sequence</span>
        <label>diff gain <input class="gain" type="number" min="1" max="64" step="1" value="1"></label>
        <span class="status" data-test="status" role="status"></span>
      </header>
      <main class="panes"></main>
      <aside class="panel">
        <h2>boxes on this frame</h2>
        <table class="boxes">
          <thead><tr><th>track</th><th>x1</th><th>y1</th><th>x2</th><th>y2</th><th>source</th></tr></thead>
          <tbody data-test="panel-body"></tbody>
        </table>
        <h2>tracks</h2>
        <div class="track-summary" data-test="track-summary"></div>
      </aside>`;
    const panes = this.root.querySelector('.panes')!;
    for (const view of VIEWS) {
      const figure = d.createElement('figure');
      figure.className = 'pane';
      figure.dataset.view = view;
      const img = d.createElement('img');
      img.alt = view;
      img.draggable = false;
      const overlay = d.createElement('canvas');
      overlay.className = 'overlay';
      overlay.width = this.state.width;
      overlay.height = this.state.height;
      const caption = d.createElement('figcaption');
      caption.textContent = view;
      figure.append(img, overlay, caption);
      panes.appendChild(figure);
      this.images.set(view, img);
      this.overlays.set(view, overlay);
    }
    this.panelBody = this.root.querySelector('[data-test="panel-body"]')!;
    this.summaryEl = this.root.querySelector('[data-test="track-summary"]')!;
    this.statusEl = this.root.querySelector('[data-test="status"]')!;
    this.frameEl = this.root.querySelector('[data-test="frame"]')!;
    this.modeEl = this.root.querySelector('[data-test="mode"]')!;
    this.endBadge = this.root.querySelector('[data-test="end"]')!;
    this.gainInput = this.root.querySelector('input.gain')!;
  }

  private bindEvents(): void {
    const original = this.root.querySelector<HTMLElement>('figure[data-view="original"]')!;
    original.addEventListener('mousedown', (e) => this.onMouseDown(e as MouseEvent));
    original.addEventListener('mousemove', (e) => this.onMouseMove(e as MouseEvent));
    original.addEventListener('mouseup', (e) => {
      void this.onMouseUp(e as MouseEvent);
    });
    original.addEventListener('contextmenu', (e) => {
      e.preventDefault();
      void this.onRightClick(e as MouseEvent);
    });
    this.root.ownerDocument.addEventListener('keydown', (e) => {
      void this.handleKey(e as KeyboardEvent);
    });
    this.gainInput.addEventListener('change', () => {
      this.gain = Number(this.gainInput.value) || 1;
      this.refreshImages();
    });
  }

  // ---------------------------------------------------------------- input

  private pixelFromEvent(e: MouseEvent): { x: number; y: number } {
    const img = this.images.get('original')!;
    const rect = img.getBoundingClientRect();
    return displayToPixel(e.clientX, e.clientY, rect, this.state.width, this.state.height);
  }

  private onMouseDown(e: MouseEvent): void {
    if (e.button !== 0) return;
    const { x, y } = this.pixelFromEvent(e);
    if (this.state.mode === 'preview') {
      const hit = hitTest(this.currentBoxes(), x, y);
      if (hit && hit.source !== 'manual') {
        this.gesture = { kind: 'move', startX: x, startY: y, lastX: x, lastY: y, target: hit };
      }
      return;
    }
    this.gesture = { kind: 'draw', startX: x, startY: y, lastX: x, lastY: y, target: null };
  }

  private onMouseMove(e: MouseEvent): void {
    if (!this.gesture) return;
    const { x, y } = this.pixelFromEvent(e);
    this.gesture.lastX = x;
    this.gesture.lastY = y;
    this.renderOverlays();
  }

  private async onMouseUp(e: MouseEvent): Promise<void> {
    if (!this.gesture) return;
    const { x, y } = this.pixelFromEvent(e);
    const gesture = this.gesture;
    this.gesture = null;
    if (gesture.kind === 'draw') {
      const rect = normalizeRect(gesture.startX, gesture.startY, x, y);
      if (rect.x2 > rect.x1 && rect.y2 > rect.y1) {
        this.state.draft = rect;
        this.toast('unsaved box: press S to save');
      }
      this.renderOverlays();
      return;
    }
    // preview-mode correction: move the predicted box, persist as corrected
    const dx = x - gesture.startX;
    const dy = y - gesture.startY;
    const target = gesture.target!;
    const moved = moveRect(target, dx, dy, this.state.width, this.state.height);
    await this.correctBox(target, moved);
  }

  private async onRightClick(e: MouseEvent): Promise<void> {
    const { x, y } = this.pixelFromEvent(e);
    const hit = hitTest(this.currentBoxes(), x, y);
    if (!hit) return;
    const result = await this.api.deleteBox(
      this.state.sequenceId, this.state.frame, hit.box_id, this.state.version,
    );
    if (!result.ok && result.status === 409) {
      await this.sync();
      this.toast('document changed elsewhere; reloaded');
      return;
    }
    if (!result.ok) {
      this.toast(result.detail);
      return;
    }
    await this.sync();
    this.toast(`deleted box ${hit.box_id}`);
  }

  async handleKey(e: KeyboardEvent): Promise<void> {
    if (e.ctrlKey || e.metaKey || e.altKey) return;
    const target = e.target as HTMLElement | null;
    if (target && (target.tagName === 'INPUT' || target.tagName === 'SELECT')) return;
    switch (keyAction(e.key)) {
      case 'save':
        await this.saveDraft();
        break;
      case 'prev':
        this.setFrame(this.state.frame - 1);
        break;
      case 'next':
        this.setFrame(this.state.frame + 1);
        break;
      case 'preview':
        await this.togglePreview();
        break;
      case 'ignore':
        break;
    }
  }

  // -------------------------------------------------------------- actions

  setFrame(frame: number, opts: { quiet?: boolean } = {}): void {
    const clamped = clampFrame(frame, this.state.frameCount);
    if (this.state.draft) {
      this.state.draft = null;
      this.toast('unsaved box discarded');
    }
    this.state.frame = clamped;
    this.endBadge.hidden = clamped !== this.state.frameCount - 1;
    if (!opts.quiet && clamped === this.state.frameCount - 1 && frame > clamped) {
      this.toast('end of sequence');
    }
    this.refreshImages();
    this.prefetch(clamped + 1);
    this.render();
  }

  async saveDraft(): Promise<void> {
    if (!this.state.draft) {
      this.toast('nothing to save: draw a box first');
      return;
    }
    const rect = this.state.draft;
    const result = await this.api.putBoxes(this.state.sequenceId, this.state.frame, this.state.version, [
      { track_id: this.state.activeTrackId, ...rect, source: 'manual' },
    ]);
    if (!result.ok) {
      if (result.status === 409) {
        await this.sync();
        this.toast('document changed elsewhere; reloaded, box kept as draft');
      } else {
        this.toast(result.detail);
      }
      return;
    }
    this.state.draft = null;
    this.state.activeTrackId = result.boxes[0]?.track_id ?? this.state.activeTrackId;
    await this.sync();
    this.toast(`saved keypoint at frame ${this.state.frame}`);
  }

  async togglePreview(): Promise<void> {
    if (this.state.mode === 'preview') {
      this.state.mode = 'marking';
      this.render();
      return;
    }
    if (!this.state.activeTrackId) {
      this.toast('no track to preview yet');
      return;
    }
    const result = await this.api.interpolate(
      this.state.sequenceId, this.state.activeTrackId, this.state.version,
    );
    if (!result.ok) {
      if (result.status === 409) {
        await this.sync();
        this.toast('document changed elsewhere; reloaded');
      } else {
        this.toast(result.detail);
      }
      return;
    }
    this.state.mode = 'preview';
    await this.sync();
    this.toast('preview: predictions filled in');
  }

  async correctBox(box: FrameBox, moved: Rect): Promise<void> {
    const result = await this.api.putBoxes(this.state.sequenceId, this.state.frame, this.state.version, [
      { track_id: box.track_id, ...moved, source: 'corrected' },
    ]);
    if (!result.ok) {
      if (result.status === 409) {
        await this.sync();
        this.toast('document changed elsewhere; reloaded');
      } else {
        this.toast(result.detail);
      }
      return;
    }
    this.state.version = result.version;
    // corrections are new keypoints: re-derive the neighbours right away
    const redone = await this.api.interpolate(this.state.sequenceId, box.track_id, this.state.version);
    if (!redone.ok) {
      this.toast(redone.detail);
    }
    await this.sync();
    this.toast(`corrected box at frame ${this.state.frame}`);
  }

  async sync(): Promise<void> {
    this.doc = await this.api.getDocument(this.state.sequenceId);
    this.state.version = this.doc.version;
    if (
      this.state.activeTrackId &&
      !this.doc.tracks.some((t) => t.track_id === this.state.activeTrackId)
    ) {
      this.state.activeTrackId = this.doc.tracks.length > 0 ? this.doc.tracks[0]!.track_id : null;
    }
    this.render();
  }

  // ------------------------------------------------------------ rendering

  currentBoxes(): FrameBox[] {
    return boxesOnFrame(this.doc, this.state.frame);
  }

  private refreshImages(): void {
    for (const view of VIEWS) {
      const img = this.images.get(view)!;
      img.src = this.api.frameUrl(this.state.sequenceId, this.state.frame, view, this.gain);
    }
  }

  private prefetch(frame: number): void {
    if (frame >= this.state.frameCount) return;
    for (const view of VIEWS) {
      const img = new Image();
      img.src = this.api.frameUrl(this.state.sequenceId, frame, view, this.gain);
    }
  }

  private render(): void {
    this.frameEl.textContent = `frame ${this.state.frame} / ${this.state.frameCount - 1}`;
    this.modeEl.textContent = this.state.mode;
    renderPanel(this.panelBody, this.doc, this.state.frame);
    renderTrackSummary(this.summaryEl, this.doc);
    this.renderOverlays();
  }

  // Headless DOMs have no 2D context; probe once so overlays degrade to
  // no-ops instead of logging on every repaint.
  private context2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
    if (this.canvas2dSupported === false) return null;
    const ctx = canvas.getContext('2d');
    this.canvas2dSupported = ctx !== null;
    return ctx;
  }

  private renderOverlays(): void {
    for (const view of VIEWS) {
      const canvas = this.overlays.get(view)!;
      const ctx = this.context2d(canvas);
      if (!ctx) continue;
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      for (const box of this.currentBoxes()) {
        ctx.strokeStyle = SOURCE_COLORS[box.source] ?? '#fff';
        ctx.lineWidth = box.track_id === this.state.activeTrackId ? 2 : 1;
        ctx.strokeRect(box.x1, box.y1, box.x2 - box.x1, box.y2 - box.y1);
      }
      if (view === 'original') {
        if (this.gesture?.kind === 'draw') {
          const r = normalizeRect(
            this.gesture.startX, this.gesture.startY, this.gesture.lastX, this.gesture.lastY,
          );
          ctx.setLineDash([4, 2]);
          ctx.strokeStyle = '#fff';
          ctx.strokeRect(r.x1, r.y1, r.x2 - r.x1, r.y2 - r.y1);
          ctx.setLineDash([]);
        } else if (this.state.draft) {
          ctx.setLineDash([4, 2]);
          ctx.strokeStyle = SOURCE_COLORS['manual']!;
          ctx.strokeRect(
            this.state.draft.x1, this.state.draft.y1,
            this.state.draft.x2 - this.state.draft.x1,
            this.state.draft.y2 - this.state.draft.y1,
          );
          ctx.setLineDash([]);
        }
      }
    }
  }

  toast(message: string): void {
    this.statusEl.textContent = message;
  }
}
