import { ApiClient } from './api.js';
import { AnnotatorApp } from './app.js';

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  const api = new ApiClient('');
  const sequences = await api.listSequences();
  if (sequences.length === 0) {
    root.textContent = 'no sequences in the corpus root';
    return;
  }
  const params = new URLSearchParams(window.location.search);
  const wanted = params.get('seq');
  const sequence = sequences.find((s) => s.sequence_id === wanted) ?? sequences[0]!;
  await AnnotatorApp.create(root, api, sequence);
}

void boot();
