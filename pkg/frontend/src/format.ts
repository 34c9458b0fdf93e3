// The client never does rate arithmetic; its one numeric transform is
// formatting an API decimal as a percentage, rounded half-to-even to one
// decimal place.

const TIE_EPSILON = 1e-9;

export function roundHalfEven(value: number, decimals: number): number {
  const scale = Math.pow(10, decimals);
  const scaled = value * scale;
  const floor = Math.floor(scaled);
  const fraction = scaled - floor;
  let rounded: number;
  if (Math.abs(fraction - 0.5) < TIE_EPSILON) {
    rounded = floor % 2 === 0 ? floor : floor + 1;
  } else {
    rounded = Math.round(scaled);
  }
  return rounded / scale;
}

export function fmtPercent(rate: number): string {
  return `${roundHalfEven(rate * 100, 1).toFixed(1)}%`;
}

export function fmtCount(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(1);
}

/** A formatted number that still carries its raw value for inspection. */
export function numberSpan(rate: number, cssClass = "num"): string {
  return `<span class="${cssClass}" data-value="${rate}">${fmtPercent(rate)}</span>`;
}
