// Curation session state and the pure helpers behind the UI. None of this
// recomputes the server-side majority/removal rules: kept counts arrive in
// /api/solids and the definitive filtering happens in /api/export. The UI
// only displays raw tallies and flags server numbers against the published
// removal threshold.

import { SolidSummary, ViewInfo } from "./api.js";

// a solid whose kept view count is at or below this is removed wholesale
export const REMOVAL_THRESHOLD = 3;
export const VOTERS_REQUIRED = 3;

export interface SessionState {
  roster: string[];
  voter: string | null;
  solids: SolidSummary[];
  currentSolid: number | null;
  views: ViewInfo[]; // views of the current solid
  viewIndex: number; // keyboard cursor into views
  pending: Record<string, boolean>; // optimistic vote per view_id (this voter)
}

export function initialState(): SessionState {
  return {
    roster: [],
    voter: null,
    solids: [],
    currentSolid: null,
    views: [],
    viewIndex: 0,
    pending: {},
  };
}

export function canVote(state: SessionState): boolean {
  return state.voter !== null && state.roster.includes(state.voter);
}

export function selectVoter(state: SessionState, voter: string): SessionState {
  if (!state.roster.includes(voter)) {
    return { ...state, voter: null };
  }
  return { ...state, voter };
}

export function openSolid(
  state: SessionState,
  solidId: number,
  views: ViewInfo[],
): SessionState {
  return { ...state, currentSolid: solidId, views, viewIndex: 0, pending: {} };
}

export function moveCursor(state: SessionState, delta: number): SessionState {
  if (state.views.length === 0) return state;
  const viewIndex = Math.min(Math.max(state.viewIndex + delta, 0), state.views.length - 1);
  return { ...state, viewIndex };
}

/** Optimistic vote: shown immediately, dropped again on server rejection. */
export function applyOptimistic(state: SessionState, viewId: string, keep: boolean): SessionState {
  return { ...state, pending: { ...state.pending, [viewId]: keep } };
}

export function revertOptimistic(state: SessionState, viewId: string): SessionState {
  const pending = { ...state.pending };
  delete pending[viewId];
  return { ...state, pending };
}

/** Server truth replaces whatever was pending for the refreshed views. */
export function refreshViews(state: SessionState, views: ViewInfo[]): SessionState {
  const pending = { ...state.pending };
  for (const view of views) {
    delete pending[view.view_id];
  }
  return { ...state, views, pending };
}

/** Votes as the UI should display them: server truth + this voter's pending. */
export function effectiveVotes(state: SessionState, view: ViewInfo): Record<string, boolean> {
  const votes = { ...view.votes };
  if (state.voter !== null && view.view_id in state.pending) {
    votes[state.voter] = state.pending[view.view_id];
  }
  return votes;
}

export function voteBadge(state: SessionState, view: ViewInfo): string {
  const cast = Object.keys(effectiveVotes(state, view)).length;
  return `${cast}/${VOTERS_REQUIRED}`;
}

export interface SolidReview {
  solid_id: number;
  view_count: number;
  kept_count: number; // server-computed under current votes
  discarded_count: number;
  flagged_for_removal: boolean; // kept_count at or below the threshold
  unvoted_views: string[];
}

export interface ReviewSummary {
  solids: SolidReview[];
  unvoted_total: number;
  export_enabled: boolean;
}

/**
 * Pre-export review from server data: per-solid kept/discarded tallies
 * (server-computed), which solids fall under the whole-solid removal rule,
 * and which views still miss votes (export stays disabled until none do).
 */
export function reviewSummary(
  solids: SolidSummary[],
  viewsBySolid: Map<number, ViewInfo[]>,
  roster: string[],
): ReviewSummary {
  const rows: SolidReview[] = [];
  let unvotedTotal = 0;
  for (const solid of solids) {
    const views = viewsBySolid.get(solid.solid_id) ?? [];
    const unvoted = views
      .filter((v) => roster.some((r) => !(r in v.votes)))
      .map((v) => v.view_id);
    unvotedTotal += unvoted.length;
    rows.push({
      solid_id: solid.solid_id,
      view_count: solid.view_count,
      kept_count: solid.kept_count,
      discarded_count: solid.view_count - solid.kept_count,
      flagged_for_removal: solid.kept_count <= REMOVAL_THRESHOLD,
      unvoted_views: unvoted,
    });
  }
  return {
    solids: rows,
    unvoted_total: unvotedTotal,
    export_enabled: unvotedTotal === 0,
  };
}
