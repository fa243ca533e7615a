/** Typed errors mirroring the engine CLI's exit codes. */

export class DeismError extends Error {
  constructor(
    message: string,
    readonly exitCode: number,
    readonly stderr: string = '',
  ) {
    super(message);
    this.name = new.target.name;
  }
}

/** Exit code 2: invalid configuration or inconsistent request. */
export class ConfigError extends DeismError {
  constructor(message: string, stderr = '') {
    super(message, 2, stderr);
  }
}

/** Exit code 3: numeric failure (singularity, conditioning, resources). */
export class NumericError extends DeismError {
  constructor(message: string, stderr = '') {
    super(message, 3, stderr);
  }
}

/** Exit code 4: malformed input or output file. */
export class IoError extends DeismError {
  constructor(message: string, stderr = '') {
    super(message, 4, stderr);
  }
}

export function errorFromExit(code: number, stderr: string): DeismError {
  const message = stderr.trim().split('\n').pop() ?? `engine exited with code ${code}`;
  switch (code) {
    case 2:
      return new ConfigError(message, stderr);
    case 3:
      return new NumericError(message, stderr);
    case 4:
      return new IoError(message, stderr);
    default:
      return new DeismError(message, code, stderr);
  }
}
