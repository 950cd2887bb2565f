/** Display formatting. Values pass through unchanged except for rendering. */

export function money(value: number): string {
  return `${value.toFixed(2)} SAR`;
}

export function pct(value: number): string {
  return `${value.toFixed(1)}%`;
}

export function signedMoney(value: number): string {
  const sign = value > 0 ? '+' : '';
  return `${sign}${value.toFixed(2)} SAR`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}
