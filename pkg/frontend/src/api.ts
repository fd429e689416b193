import type { AnnotationDoc, BoxSource, CorpusStats, SequenceInfo, TrackEntry } from './types.js';

export interface BoxUpsert {
  track_id?: string | null;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  source: BoxSource;
}

export type MutationResult =
  | { ok: true; version: number; boxes: Array<{ track_id: string; box_id: string }> }
  | { ok: false; status: number; detail: string; document?: AnnotationDoc };

export type InterpolateResult =
  | { ok: true; version: number; track: TrackEntry }
  | { ok: false; status: number; detail: string; document?: AnnotationDoc };

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the annotation service. The fetch implementation is
 * injectable so tests can record or stub traffic.
 */
export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  frameUrl(sequenceId: string, frame: number, view: string, gain = 1): string {
    const gainPart = view === 'diff' && gain !== 1 ? `&gain=${gain}` : '';
    return `${this.baseUrl}/api/sequences/${encodeURIComponent(sequenceId)}/frames/${frame}?view=${view}${gainPart}`;
  }

  async listSequences(): Promise<SequenceInfo[]> {
    return this.getJson(`/api/sequences`);
  }

  async getDocument(sequenceId: string): Promise<AnnotationDoc> {
    return this.getJson(`/api/sequences/${encodeURIComponent(sequenceId)}/annotations`);
  }

  async corpusStats(): Promise<CorpusStats> {
    return this.getJson(`/api/corpus/stats`);
  }

  async putBoxes(
    sequenceId: string,
    frame: number,
    version: number,
    boxes: BoxUpsert[],
  ): Promise<MutationResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sequences/${encodeURIComponent(sequenceId)}/annotations/${frame}`,
      {
        method: 'PUT',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ version, boxes }),
      },
    );
    const body = await response.json();
    if (response.ok) {
      return { ok: true, version: body.version, boxes: body.boxes };
    }
    return { ok: false, status: response.status, detail: body.detail, document: body.document };
  }

  async deleteBox(
    sequenceId: string,
    frame: number,
    boxId: string,
    version: number,
  ): Promise<MutationResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sequences/${encodeURIComponent(sequenceId)}/annotations/${frame}/${encodeURIComponent(boxId)}?version=${version}`,
      { method: 'DELETE' },
    );
    const body = await response.json();
    if (response.ok) {
      return { ok: true, version: body.version, boxes: [] };
    }
    return { ok: false, status: response.status, detail: body.detail, document: body.document };
  }

  async interpolate(
    sequenceId: string,
    trackId: string,
    version: number,
  ): Promise<InterpolateResult> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/sequences/${encodeURIComponent(sequenceId)}/tracks/${encodeURIComponent(trackId)}/interpolate`,
      {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ version }),
      },
    );
    const body = await response.json();
    if (response.ok) {
      return { ok: true, version: body.version, track: body.track };
    }
    return { ok: false, status: response.status, detail: body.detail, document: body.document };
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    if (!response.ok) {
      throw new Error(`GET ${path} failed: ${response.status}`);
    }
    return response.json() as Promise<T>;
  }
}
