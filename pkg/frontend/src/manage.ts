/** Management screens: which controls render for which role.
 *
 * This mirrors the server's permission matrix so the client can hide
 * controls that would only produce 403s.  The server remains the
 * authority; hiding is a courtesy, not enforcement.
 */

import type { DocSummary, Role } from "./types.js";
import type { ViewerRole } from "./gating.js";

export type ManagementAction =
  | "AddRemoveManager"
  | "AddRemoveMember"
  | "AddDeleteProject"
  | "ProjectSettings"
  | "ImportFile";

export const MANAGEMENT_ACTIONS: readonly ManagementAction[] = [
  "AddRemoveManager", "AddRemoveMember", "AddDeleteProject",
  "ProjectSettings", "ImportFile"];

const ALLOWED: Record<Role, readonly ManagementAction[]> = {
  Owner: ["AddRemoveManager", "AddRemoveMember", "AddDeleteProject",
          "ProjectSettings", "ImportFile"],
  Manager: ["AddRemoveMember", "AddDeleteProject", "ProjectSettings",
            "ImportFile"],
  Member: ["ImportFile"],
};

export function mayManage(role: ViewerRole, action: ManagementAction): boolean {
  if (role === "None") return false;
  return ALLOWED[role].includes(action);
}

/** Controls to render on the management screens for this role. */
export function visibleActions(role: ViewerRole): ManagementAction[] {
  return MANAGEMENT_ACTIONS.filter(a => mayManage(role, a));
}

/** The sort dropdown: value is the wire key the search endpoint takes. */
export const SORT_OPTIONS: readonly { value: string; label: string }[] = [
  { value: "title", label: "title" },
  { value: "import_time", label: "import time" },
  { value: "update_time", label: "latest update time" },
];

export function canTakeCharge(doc: DocSummary, me: string): boolean {
  return doc.principal === null || doc.principal === me;
}

/** The principal may step down; Owner and Manager may force it. */
export function canReleaseCharge(doc: DocSummary, me: string,
                                 role: ViewerRole): boolean {
  if (doc.principal === null) return false;
  if (doc.principal === me) return true;
  return role === "Owner" || role === "Manager";
}

export interface FileRowView {
  docId: string;
  filename: string;
  title: string;
  status: string;
  importUser: string;
  importTime: string;
  lastEditor: string;
  lastEditTime: string;
  principal: string;
}

export function fileRow(doc: DocSummary): FileRowView {
  return {
    docId: doc.doc_id,
    filename: doc.filename,
    title: doc.meta?.title || "",
    status: doc.status,
    importUser: doc.import_user,
    importTime: doc.import_time,
    lastEditor: doc.last_editor ?? "",
    lastEditTime: doc.last_edit_time ?? "",
    principal: doc.principal ?? "",
  };
}
