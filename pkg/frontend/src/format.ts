/** Shared display formatting helpers. */

/** Decimal degrees rendered the same way the project CSV renders them:
 * six decimals, trailing zeros and a bare point stripped.  Keeping the
 * on-screen number identical to the exported one avoids "the download
 * does not match the screen" reports.
 */
export function fmtDegrees(v: number): string {
  const s = v.toFixed(6).replace(/0+$/, "").replace(/\.$/, "");
  return s === "" || s === "-" ? "0" : s;
}

/** "lon, lat" pair for the map readout and point list. */
export function fmtLonLat(lon: number, lat: number): string {
  return `${fmtDegrees(lon)}, ${fmtDegrees(lat)}`;
}

/** RFC 3339 wire timestamps shown without the date when it is today. */
export function fmtTime(iso: string | null, now = new Date()): string {
  if (!iso) return "";
  const today = now.toISOString().slice(0, 10);
  return iso.startsWith(today) ? iso.slice(11, 19) : iso.slice(0, 10);
}

export function fmtAuthors(authors: string[]): string {
  if (authors.length === 0) return "";
  if (authors.length <= 2) return authors.join(" and ");
  return `${authors[0]} et al.`;
}
