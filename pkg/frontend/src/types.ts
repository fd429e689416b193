// Wire types matching the annotation service JSON.

export type BoxSource = 'manual' | 'predicted' | 'corrected';

export interface SequenceInfo {
  sequence_id: string;
  frame_count: number;
  width: number;
  height: number;
}

export interface BoxRow {
  frame: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  source: BoxSource;
  box_id: string;
}

export interface TrackEntry {
  track_id: string;
  label: string;
  boxes: BoxRow[];
}

export interface AnnotationDoc {
  schema_version: number;
  sequence_id: string;
  version: number;
  tracks: TrackEntry[];
}

export interface CorpusStats {
  tampered_frames: number;
  total_frames: number;
  manual_boxes: number;
  total_boxes: number;
  frame_ratio: string;
  box_ratio: string;
}

export interface Rect {
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

/** A box on the current frame together with the track it belongs to. */
export interface FrameBox extends BoxRow {
  track_id: string;
}
