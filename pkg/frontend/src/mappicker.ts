/** Map tab controller: right-click drops a georeferenced point.
 *
 * Point placement is the one map interaction that is optimistic: the
 * coordinate is computed locally from the stored calibration and shown
 * at once, then reconciled with the server's answer.  If the server
 * refuses (lock lost, charge taken, bad pixel) the provisional point is
 * rolled back and the reason surfaces as a hint.
 */

import { ApiClient } from "./api.js";
import { fmtLonLat } from "./format.js";
import type { GeoPointWire, MapState } from "./types.js";
import type { ViewportTransform } from "./viewport.js";

/** Structural subset of MouseEvent so tests can pass plain objects. */
export interface ClickEvent {
  offsetX: number;
  offsetY: number;
  preventDefault(): void;
}

export interface PointView {
  pixel: [number, number];
  longitude: number;
  latitude: number;
  pending: boolean;
  outOfRange: boolean;
}

function view(p: GeoPointWire): PointView {
  return {
    pixel: p.pixel, longitude: p.longitude, latitude: p.latitude,
    pending: false, outOfRange: p.out_of_range,
  };
}

export class MapPicker {
  private api: ApiClient;
  private docId: string;
  private onChange: () => void;

  state: MapState = { calibration: null, points: [] };
  points: PointView[] = [];
  hint: string | null = null;

  constructor(api: ApiClient, docId: string, onChange: () => void = () => {}) {
    this.api = api;
    this.docId = docId;
    this.onChange = onChange;
  }

  async load(): Promise<void> {
    this.state = await this.api.getMap(this.docId);
    this.points = this.state.points.map(view);
    this.hint = null;
    this.onChange();
  }

  async calibrate(pageIndex: number, bbox: number[]): Promise<void> {
    this.state = await this.api.calibrateMap(this.docId, pageIndex, bbox);
    this.points = this.state.points.map(view);
    this.hint = null;
    this.onChange();
  }

  lonAt(px: number): number {
    const cal = this.state.calibration;
    if (cal === null) throw new Error("not calibrated");
    return cal.lon_map[0] * px + cal.lon_map[1];
  }

  latAt(py: number): number {
    const cal = this.state.calibration;
    if (cal === null) throw new Error("not calibrated");
    return cal.lat_map[0] * py + cal.lat_map[1];
  }

  /** The string shown next to a point: identical to the exported CSV. */
  display(p: PointView): string {
    return fmtLonLat(p.longitude, p.latitude);
  }

  private inRegion(x: number, y: number): boolean {
    const cal = this.state.calibration;
    if (cal === null) return false;
    const [x0, y0, x1, y1] = cal.region.bbox;
    return x0 <= x && x <= x1 && y0 <= y && y <= y1;
  }

  /** Right-click handler.  Returns the provisional point, or null when
   * the click was ignored (no calibration, or outside the map region).
   */
  async handleContextMenu(ev: ClickEvent,
                          viewport: ViewportTransform): Promise<PointView | null> {
    ev.preventDefault();
    const page = viewport.toPage({ x: ev.offsetX, y: ev.offsetY });
    if (this.state.calibration === null) {
      this.hint = "calibrate the map before placing points";
      this.onChange();
      return null;
    }
    if (!this.inRegion(page.x, page.y)) {
      this.hint = "click inside the map outline to place a point";
      this.onChange();
      return null;
    }
    const pixel: [number, number] = [page.x, page.y];
    const local: PointView = {
      pixel,
      longitude: this.lonAt(page.x),
      latitude: this.latAt(page.y),
      pending: true,
      outOfRange: false,
    };
    this.points.push(local);
    this.hint = null;
    this.onChange();
    try {
      const saved = await this.api.addMapPoint(this.docId, pixel);
      const at = this.points.indexOf(local);
      if (at >= 0) this.points[at] = view(saved);
      this.state.points.push(saved);
      this.onChange();
      return this.points[at >= 0 ? at : this.points.length - 1];
    } catch (err) {
      const at = this.points.indexOf(local);
      if (at >= 0) this.points.splice(at, 1);
      this.hint = err instanceof Error ? err.message : "point was refused";
      this.onChange();
      return null;
    }
  }
}
