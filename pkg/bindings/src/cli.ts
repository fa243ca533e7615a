/** Child-process plumbing for the engine CLI. */

import { execFile } from 'node:child_process';

import { errorFromExit } from './errors.js';

export interface EngineOptions {
  /** CLI executable; defaults to DEISM_CLI or "deism" on PATH */
  command?: string;
  /** worker threads passed through to the engine */
  workers?: number;
  /** hard timeout in milliseconds */
  timeoutMs?: number;
}

export function engineCommand(opts: EngineOptions = {}): string {
  return opts.command ?? process.env.DEISM_CLI ?? 'deism';
}

export function runEngine(
  args: string[],
  opts: EngineOptions = {},
): Promise<{ stdout: string; stderr: string }> {
  const command = engineCommand(opts);
  return new Promise((resolve, reject) => {
    execFile(
      command,
      args,
      { timeout: opts.timeoutMs ?? 0, maxBuffer: 64 * 1024 * 1024 },
      (err, stdout, stderr) => {
        if (err) {
          const code = typeof (err as { code?: unknown }).code === 'number'
            ? ((err as { code?: number }).code as number)
            : 1;
          reject(errorFromExit(code, stderr || err.message));
          return;
        }
        resolve({ stdout, stderr });
      },
    );
  });
}
