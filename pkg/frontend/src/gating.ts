/** Pure control gating for the table wizard.
 *
 * Which controls are live is a function of three inputs only: the
 * artifact's stage, the viewer's lock standing, and the viewer's team
 * role.  Rendering consults this and nothing else, so the rule "no
 * mutation control is enabled unless the viewer holds the lock" is
 * decided in exactly one place.
 */

import type { Role, Stage } from "./types.js";

/** The viewer's standing toward a document's edit lock.
 *
 * "mine" is the only state that enables anything.  "other" means a live
 * lease is held elsewhere, "not_principal" means another user has taken
 * charge so the viewer cannot even acquire, and "none" means the lock is
 * free but not held.
 */
export type LockStanding = "mine" | "none" | "other" | "not_principal";

/** Team role as seen by the client; "None" covers non-members. */
export type ViewerRole = Role | "None";

export type WizardControl =
  | "region"   // drag the table outline
  | "rows"     // add or delete row boundaries
  | "cols"     // add or delete column boundaries
  | "merge"    // merge the selected rectangle
  | "split"    // split the selected span
  | "cells"    // per-cell text editing
  | "advance"  // move one stage forward
  | "revert";  // move one stage back

export const STAGES: readonly Stage[] = [
  "located", "structured", "filled", "confirmed"];

export const LOCK_STANDINGS: readonly LockStanding[] = [
  "mine", "none", "other", "not_principal"];

export const VIEWER_ROLES: readonly ViewerRole[] = [
  "Owner", "Manager", "Member", "None"];

// Structure and content tools never appear together: each stage offers
// exactly one kind of decision plus the stage moves legal from it.
const BY_STAGE: Record<Stage, readonly WizardControl[]> = {
  located: ["region", "advance"],
  structured: ["rows", "cols", "merge", "split", "advance", "revert"],
  filled: ["cells", "advance", "revert"],
  confirmed: ["revert"],
};

/** Returns the controls enabled for a viewer, sorted for stable display.
 *
 * Anyone on the team may edit any document they can see, provided they
 * hold the lock; role never widens or narrows the wizard.  Non-members
 * cannot hold a lock at all, so they get nothing even if a stale "mine"
 * is passed in.
 */
export function enabledControls(stage: Stage, lock: LockStanding,
                                role: ViewerRole): WizardControl[] {
  if (role === "None") return [];
  if (lock !== "mine") return [];
  return [...BY_STAGE[stage]].sort();
}

/** Non-wizard mutation controls (meta form, tag button, map clicks,
 * file-level integrate) follow the same single rule. */
export function canMutate(lock: LockStanding, role: ViewerRole): boolean {
  return role !== "None" && lock === "mine";
}

/** Classifies the viewer's standing from a document's live state. */
export function lockStanding(holder: string | null, principal: string | null,
                             me: string): LockStanding {
  if (holder === me) return "mine";
  if (holder !== null) return "other";
  if (principal !== null && principal !== me) return "not_principal";
  return "none";
}
