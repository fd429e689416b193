import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';

const here = path.dirname(fileURLToPath(import.meta.url));
export const repoRoot = path.resolve(here, '..', '..');

export interface TestServer {
  url: string;
  proc: ChildProcess;
  corpusDir: string;
  stop(): Promise<void>;
}

/** Generate a 20-frame fixture pair without pre-made annotations. */
export function makeFixture(corpusDir: string, sequenceId: string, frames = 20): void {
  const out = path.join(corpusDir, sequenceId);
  const result = spawnSync(
    'python3',
    [path.join(repoRoot, 'scripts', 'make_fixture_pair.py'), '--out', out, '--frames', String(frames)],
    { encoding: 'utf-8' },
  );
  if (result.status !== 0) {
    throw new Error(`fixture generation failed: ${result.stderr}`);
  }
  rmSync(path.join(out, 'annotations.json')); // session starts from scratch
}

/** Spawn the annotation service on an OS-assigned port and wait until ready. */
export async function startServer(sequences: string[]): Promise<TestServer> {
  const corpusDir = mkdtempSync(path.join(tmpdir(), 'markbench-ui-'));
  for (const sequenceId of sequences) {
    makeFixture(corpusDir, sequenceId);
  }
  const proc = spawn(
    'python3',
    ['-m', 'markbench', 'serve', '--root', corpusDir, '--addr', '127.0.0.1:0'],
    { cwd: repoRoot, stdio: ['ignore', 'pipe', 'pipe'] },
  );
  const url = await new Promise<string>((resolve, reject) => {
    let buffer = '';
    const timer = setTimeout(() => reject(new Error(`server never announced: ${buffer}`)), 30_000);
    proc.stdout!.on('data', (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/serving on (http:\/\/[\d.]+:\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]!);
      }
    });
    proc.on('exit', (code) => reject(new Error(`server exited early (${code})`)));
  });
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(`${url}/api/sequences`);
      if (response.ok) break;
    } catch {
      await sleep(100);
    }
  }
  return {
    url,
    proc,
    corpusDir,
    stop: async () => {
      proc.kill('SIGINT');
      await new Promise<void>((resolve) => {
        const force = setTimeout(() => {
          proc.kill('SIGKILL');
          resolve();
        }, 5_000);
        proc.on('exit', () => {
          clearTimeout(force);
          resolve();
        });
      });
      rmSync(corpusDir, { recursive: true, force: true });
    },
  };
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export async function waitFor(
  condition: () => boolean,
  description: string,
  timeoutMs = 10_000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (condition()) return;
    await sleep(10);
  }
  throw new Error(`timed out waiting for ${description}`);
}

export interface RecordedRequest {
  method: string;
  url: string;
}

/** Fetch wrapper that records every request for instrumentation asserts. */
export function recordingFetch(log: RecordedRequest[]): typeof fetch {
  return ((input: string | URL | Request, init?: RequestInit) => {
    const url = typeof input === 'string' ? input : input instanceof URL ? input.href : input.url;
    log.push({ method: init?.method ?? 'GET', url });
    return fetch(input as never, init);
  }) as typeof fetch;
}

/** Mouse event helpers: jsdom rects are zero-sized, so client == pixel coords. */
export function mouse(
  element: Element,
  type: 'mousedown' | 'mousemove' | 'mouseup' | 'contextmenu',
  x: number,
  y: number,
  button = 0,
): void {
  element.dispatchEvent(
    new MouseEvent(type, { bubbles: true, cancelable: true, clientX: x, clientY: y, button }),
  );
}

export function drag(element: Element, x1: number, y1: number, x2: number, y2: number): void {
  mouse(element, 'mousedown', x1, y1);
  mouse(element, 'mousemove', Math.round((x1 + x2) / 2), Math.round((y1 + y2) / 2));
  mouse(element, 'mousemove', x2, y2);
  mouse(element, 'mouseup', x2, y2);
}

export function press(key: string): void {
  document.dispatchEvent(new KeyboardEvent('keydown', { key, bubbles: true }));
}
