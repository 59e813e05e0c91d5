/** Server numbers are displayed to 3 decimals, nothing else. */

export function fmt3(value: number): string {
  const text = value.toFixed(3);
  return text === "-0.000" ? "0.000" : text;
}

/** Probabilities keep more precision so exact thirds stay recognisable. */
export function fmtP(p: number): string {
  const text = String(p);
  return text.length > 8 ? p.toFixed(6) : text;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
