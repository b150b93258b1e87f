/** Display formatting. The raw numbers stay untouched elsewhere; this is
 * the single place a probability becomes text. */

export function percent(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}
