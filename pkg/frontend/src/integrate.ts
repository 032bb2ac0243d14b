/** Integrate tab and project export panel.
 *
 * The download always reuses the exact CSV string the server returned
 * for the preview, never a re-serialization of the parsed rows, so the
 * saved file is byte-identical to what is on screen.
 */

import { ApiClient } from "./api.js";
import type { FileSummary, Project, ProjectExport, ProvRef,
              SummaryTableWire } from "./types.js";

export function schemaMissing(project: Project): boolean {
  const schema = project.settings.schema;
  return schema === null || schema.headers.length === 0;
}

export const SCHEMA_PROMPT =
  "this project has no output schema yet; define headers in project "
  + "settings before integrating";

/** Human text for one provenance triple, used as the cell tooltip. */
export function provText(ref: ProvRef): string {
  const [docId, kind, sourceId] = ref;
  switch (kind) {
    case "table": return `table ${sourceId} of ${docId}`;
    case "meta": return `meta fields of ${docId}`;
    case "map": return `map point ${sourceId} of ${docId}`;
    case "text": return `tag ${sourceId} of ${docId}`;
    default: return `${kind} ${sourceId} of ${docId}`;
  }
}

/** Tooltip for a preview cell: every triple backing the cell's row. */
export function cellTooltip(table: SummaryTableWire, rowIdx: number): string {
  const refs = table.provenance[rowIdx] ?? [];
  return refs.map(provText).join("; ");
}

export class IntegratePanel {
  private api: ApiClient;
  private onChange: () => void;

  fileResult: FileSummary | null = null;
  projectResult: ProjectExport | null = null;
  hint: string | null = null;

  constructor(api: ApiClient, onChange: () => void = () => {}) {
    this.api = api;
    this.onChange = onChange;
  }

  /** File-level summary; requires the edit lock since it stores the
   * result as an artifact of the document. */
  async runFile(docId: string): Promise<FileSummary> {
    this.fileResult = await this.api.integrateFile(docId);
    this.hint = this.fileResult.warnings.join("\n") || null;
    this.onChange();
    return this.fileResult;
  }

  /** Project-level stacked table; read-only, any member may run it. */
  async runProject(project: Project): Promise<ProjectExport | null> {
    if (schemaMissing(project)) {
      this.hint = SCHEMA_PROMPT;
      this.projectResult = null;
      this.onChange();
      return null;
    }
    this.projectResult = await this.api.exportProjectFull(project.project_id);
    this.hint = this.projectResult.warnings.join("\n") || null;
    this.onChange();
    return this.projectResult;
  }

  /** Name and exact bytes for the browser download. */
  download(): { filename: string; text: string } | null {
    if (this.projectResult === null) return null;
    return { filename: "project.csv", text: this.projectResult.csv };
  }

  downloadProvenance(): { filename: string; text: string } | null {
    if (this.projectResult === null) return null;
    return { filename: "project.provenance.csv",
             text: this.projectResult.provenance_csv };
  }
}
