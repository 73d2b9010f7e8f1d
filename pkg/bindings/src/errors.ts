/** Error classes mirroring the CLI exit-code contract (1/2/3). */

export class TrajvaultError extends Error {
  readonly exitCode: number;

  constructor(message: string, exitCode: number) {
    super(message);
    this.name = new.target.name;
    this.exitCode = exitCode;
  }
}

/** Bad arguments or misuse of the interface (exit code 1). */
export class UsageError extends TrajvaultError {
  constructor(message: string) {
    super(message, 1);
  }
}

/** Well-formed inputs describing impossible or absent data (exit code 2). */
export class DataError extends TrajvaultError {
  constructor(message: string) {
    super(message, 2);
  }
}

/** Unreadable, corrupt, or unwritable artifacts (exit code 3). */
export class IOFailure extends TrajvaultError {
  constructor(message: string) {
    super(message, 3);
  }
}

/** Wrap a CLI failure in the class matching its exit code. */
export function errorForExit(exitCode: number, message: string): TrajvaultError {
  switch (exitCode) {
    case 1:
      return new UsageError(message);
    case 2:
      return new DataError(message);
    default:
      return new IOFailure(message);
  }
}
