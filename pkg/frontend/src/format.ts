/**
 * Number rendering with payload fidelity.
 *
 * `formatExact` shows every digit of the JSON number (shortest round-trip
 * decimal, the same digits the service sent); `formatFixed` rounds for
 * compact labels and is always derived from the payload value itself.
 */

export function formatExact(value: number): string {
  return String(value);
}

export function formatFixed(value: number, digits: number): string {
  if (!Number.isFinite(value)) {
    return String(value);
  }
  return value.toFixed(digits);
}

/** True when `shown` displays `payload` faithfully to all shown digits. */
export function displaysFaithfully(shown: string, payload: number): boolean {
  if (shown === String(payload)) {
    return true;
  }
  const decimals = shown.includes(".") ? shown.split(".")[1].length : 0;
  return Number.isFinite(payload) && shown === payload.toFixed(decimals);
}
