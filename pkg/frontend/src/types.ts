/** Wire types for the extraction service HTTP API.
 *
 * Field names mirror the server's JSON exactly; renames here are
 * breaking changes.  Geometry is in PDF points with the origin at the
 * bottom-left of the page, so y grows upward.
 */

export type Role = "Owner" | "Manager" | "Member";

export type Stage = "located" | "structured" | "filled" | "confirmed";

/** x0, y0, x1, y1 */
export type Box = [number, number, number, number];

export interface SessionInfo {
  token: string;
  user_id: string;
  username: string;
}

export interface UserInfo {
  user_id: string;
  username: string;
}

export interface TeamMember {
  user_id: string;
  username: string;
  role: Role;
}

export interface Team {
  team_id: string;
  name: string;
  created_at: string;
  members: TeamMember[];
}

export interface LabelDef {
  label_id: string;
  display_name: string;
  color: string;
  visible: boolean;
  matchers: [string, unknown][];
}

export interface Schema {
  headers: string[];
  aliases: Record<string, string>;
  label_to_header: Record<string, string>;
  meta_to_header: Record<string, string>;
}

export interface ProjectSettings {
  description: string;
  labels: LabelDef[];
  schema: Schema | null;
}

export interface Project {
  project_id: string;
  team_id: string;
  name: string;
  settings: ProjectSettings;
  created_by: string;
  created_at: string;
  file_count: number;
}

export interface Meta {
  title: string;
  authors: string[];
  venue: string;
  year: number | null;
  abstract: string;
}

export interface LockInfo {
  holder: string;
  acquired_at: string;
  lease_expiry: string;
}

export interface DocSummary {
  doc_id: string;
  project_id: string;
  filename: string;
  status: string;
  page_count: number;
  meta: Meta;
  import_user: string;
  import_time: string;
  last_editor: string | null;
  last_edit_time: string | null;
  principal: string | null;
  principal_since: string | null;
}

/** GET /files/{id}/meta returns the summary plus live lock state. */
export interface DocDetail extends DocSummary {
  lock: LockInfo | null;
}

export interface SearchPage {
  items: DocSummary[];
  total: number;
  page: number;
  page_size: number;
}

export interface TextBoxWire {
  bbox: Box;
  text: string;
  font_size_pt: number;
}

export interface PageContent {
  page_index: number;
  width_pt: number;
  height_pt: number;
  text_boxes: TextBoxWire[];
  ruling_segments: Box[];
}

export interface RegionWire {
  page_index: number;
  bbox: Box;
  source: "detected" | "user_drawn";
}

export interface SpanWire {
  row0: number;
  col0: number;
  row_extent: number;
  col_extent: number;
  content: string;
}

export interface GridWire {
  region: RegionWire;
  row_bounds: number[];
  col_bounds: number[];
  spans: SpanWire[];
}

export interface TableWire {
  table_id: string;
  doc_id: string;
  region: RegionWire;
  stage: Stage;
  grid: GridWire | null;
  edit_log: Record<string, unknown>[];
  version: number;
  updated_at: string;
}

export interface AnnotationWire {
  doc_id: string;
  page_index: number;
  char_span: [number, number];
  surface_text: string;
  label_id: string;
  origin: string;
  author: string;
  created_at: string;
}

export interface TickWire {
  axis: "lon" | "lat";
  pixel: number;
  degrees: number;
  label_text: string;
}

/** slope, intercept: degrees = slope * coordinate + intercept */
export type AxisMap = [number, number];

export interface CalibrationWire {
  region: RegionWire;
  lon_map: AxisMap;
  lat_map: AxisMap;
  ticks: TickWire[];
  rms_residual_deg: Record<string, number>;
}

export interface GeoPointWire {
  pixel: [number, number];
  longitude: number;
  latitude: number;
  doc_id: string;
  table_row_hint: number | null;
  created_by: string;
  created_at: string;
  out_of_range: boolean;
}

export interface MapState {
  calibration: CalibrationWire | null;
  points: GeoPointWire[];
}

/** One provenance triple: doc_id, kind, source id within that kind. */
export type ProvRef = [string, string, string];

export interface SummaryTableWire {
  level: "file" | "project";
  headers: string[];
  rows: string[][];
  provenance: ProvRef[][];
}

export interface FileSummary {
  table: SummaryTableWire;
  warnings: string[];
}

export interface ProjectExport {
  csv: string;
  provenance_csv: string;
  table: SummaryTableWire;
  warnings: string[];
}

export interface LockLease {
  doc_id: string;
  holder: string;
  acquired_at: string;
  lease_expiry: string;
}

export interface ChargeInfo {
  doc_id: string;
  principal: string;
  since: string;
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
