/**
 * Latest-wins request sequencing.
 *
 * Slider drags fire requests faster than the service answers; only the
 * response matching the most recent submission may reach the store, no
 * matter in which order the promises settle. Superseded in-flight requests
 * are also aborted so at most one request is outstanding.
 */

export const SUPERSEDED = Symbol("superseded");

export class LatestRequestGate {
  private sequence = 0;
  private controller: AbortController | null = null;

  /** Submission counter of the newest request (exposed for diagnostics). */
  get current(): number {
    return this.sequence;
  }

  get busy(): boolean {
    return this.controller !== null;
  }

  async run<T>(
    task: (signal: AbortSignal) => Promise<T>,
  ): Promise<T | typeof SUPERSEDED> {
    const ticket = ++this.sequence;
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      const value = await task(controller.signal);
      if (ticket !== this.sequence) {
        return SUPERSEDED;
      }
      return value;
    } finally {
      if (ticket === this.sequence) {
        this.controller = null;
      }
    }
  }
}

/** Trailing-edge debounce; the pending call is replaced by newer ones. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => {
      timer = undefined;
      fn(...args);
    }, waitMs);
  };
}
