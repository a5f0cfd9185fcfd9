import { describe, expect, it, vi } from "vitest";

import { LatestRequestGate, SUPERSEDED, debounce } from "../src/requests.js";

function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

describe("LatestRequestGate", () => {
  it("drops a response that resolves after a newer request", async () => {
    const gate = new LatestRequestGate();
    const slow = deferred<string>();
    const fast = deferred<string>();
    const first = gate.run(() => slow.promise);
    const second = gate.run(() => fast.promise);
    fast.resolve("new");
    await expect(second).resolves.toBe("new");
    slow.resolve("old");
    await expect(first).resolves.toBe(SUPERSEDED);
  });

  it("delivers in-order responses normally", async () => {
    const gate = new LatestRequestGate();
    await expect(gate.run(async () => 1)).resolves.toBe(1);
    await expect(gate.run(async () => 2)).resolves.toBe(2);
  });

  it("aborts the superseded request's signal", async () => {
    const gate = new LatestRequestGate();
    let captured: AbortSignal | null = null;
    const never = deferred<number>();
    void gate.run((signal) => {
      captured = signal;
      return never.promise;
    });
    expect(captured!.aborted).toBe(false);
    void gate.run(async () => 0);
    expect(captured!.aborted).toBe(true);
  });

  it("propagates rejections only for the current request", async () => {
    const gate = new LatestRequestGate();
    const failing = deferred<number>();
    const attempt = gate.run(() => failing.promise);
    failing.reject(new Error("boom"));
    await expect(attempt).rejects.toThrow("boom");
  });
});

describe("debounce", () => {
  it("fires only the trailing call", () => {
    vi.useFakeTimers();
    const seen: number[] = [];
    const tick = debounce((value: number) => seen.push(value), 100);
    tick(1);
    tick(2);
    vi.advanceTimersByTime(60);
    tick(3);
    vi.advanceTimersByTime(99);
    expect(seen).toEqual([]);
    vi.advanceTimersByTime(1);
    expect(seen).toEqual([3]);
    vi.useRealTimers();
  });
});
