// Side panel: a pure projection of the annotation document. Nothing in here
// mutates state; the panel always re-renders from the served document.

import { boxesOnFrame, summarizeTracks } from './state.js';
import type { AnnotationDoc } from './types.js';

export function renderPanel(
  tbody: HTMLTableSectionElement,
  doc: AnnotationDoc,
  frame: number,
): void {
  tbody.textContent = '';
  for (const box of boxesOnFrame(doc, frame)) {
    const row = tbody.ownerDocument.createElement('tr');
    row.dataset.boxId = box.box_id;
    row.dataset.trackId = box.track_id;
    row.dataset.source = box.source;
    for (const value of [
      box.track_id,
      String(box.x1),
      String(box.y1),
      String(box.x2),
      String(box.y2),
      box.source,
    ]) {
      const cell = tbody.ownerDocument.createElement('td');
      cell.textContent = value;
      row.appendChild(cell);
    }
    tbody.appendChild(row);
  }
}

export function renderTrackSummary(container: HTMLElement, doc: AnnotationDoc): void {
  container.textContent = '';
  for (const summary of summarizeTracks(doc)) {
    const line = container.ownerDocument.createElement('div');
    line.dataset.trackId = summary.track_id;
    line.dataset.predicted = String(summary.predicted);
    line.textContent =
      `${summary.track_id}: ${summary.total} boxes ` +
      `(${summary.manual} manual, ${summary.predicted} predicted, ` +
      `${summary.corrected} corrected)`;
    container.appendChild(line);
  }
}
