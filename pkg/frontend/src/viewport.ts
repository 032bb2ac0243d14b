/** Affine page-to-screen mapping for the document viewer.
 *
 * Page coordinates are PDF points, origin bottom-left, y up.  Screen
 * coordinates are CSS pixels, origin top-left, y down.  The transform
 * is zoom-then-pan with an explicit y flip, and it is exactly
 * invertible up to floating point: round trips must stay within half a
 * pixel over the whole supported zoom range.
 */

export const MIN_ZOOM = 0.25;
export const MAX_ZOOM = 4.0;

export interface ScreenPoint {
  x: number;
  y: number;
}

export interface PagePoint {
  x: number;
  y: number;
}

export class ViewportTransform {
  zoom: number;
  panX: number;
  panY: number;
  pageHeight: number;

  constructor(pageHeight: number, zoom = 1.0, panX = 0, panY = 0) {
    this.pageHeight = pageHeight;
    this.zoom = clampZoom(zoom);
    this.panX = panX;
    this.panY = panY;
  }

  toScreen(p: PagePoint): ScreenPoint {
    return {
      x: p.x * this.zoom + this.panX,
      y: (this.pageHeight - p.y) * this.zoom + this.panY,
    };
  }

  toPage(s: ScreenPoint): PagePoint {
    return {
      x: (s.x - this.panX) / this.zoom,
      y: this.pageHeight - (s.y - this.panY) / this.zoom,
    };
  }

  panBy(dx: number, dy: number): void {
    this.panX += dx;
    this.panY += dy;
  }

  /** Rescales around a screen point so the page point under the cursor
   * stays put, the usual wheel-zoom behavior. */
  zoomAt(pivot: ScreenPoint, factor: number): void {
    const before = this.toPage(pivot);
    this.zoom = clampZoom(this.zoom * factor);
    const after = this.toScreen(before);
    this.panX += pivot.x - after.x;
    this.panY += pivot.y - after.y;
  }

  /** Centers the full page inside a viewport, zoom clamped to range. */
  static fit(pageWidth: number, pageHeight: number,
             viewWidth: number, viewHeight: number): ViewportTransform {
    const zoom = clampZoom(Math.min(viewWidth / pageWidth,
                                    viewHeight / pageHeight));
    const t = new ViewportTransform(pageHeight, zoom);
    t.panX = (viewWidth - pageWidth * zoom) / 2;
    t.panY = (viewHeight - pageHeight * zoom) / 2;
    return t;
  }
}

export function clampZoom(z: number): number {
  if (Number.isNaN(z)) return 1.0;
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, z));
}
