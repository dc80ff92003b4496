/**
 * Job-table polling state and the append-only log follower.
 *
 * Pure reducers: the app layer owns timers and fetches; these track what
 * the latest successful poll said, whether it has gone stale, and log
 * byte offsets so each poll only fetches the suffix.
 */

import type { JobRecord } from "./api.js";

export interface JobsState {
  rows: JobRecord[];
  lastSuccessAt: number | null;
  stale: boolean;
  error: string | null;
}

export const POLL_INTERVAL_MS = 2000;

export function initialJobsState(): JobsState {
  return { rows: [], lastSuccessAt: null, stale: false, error: null };
}

export function applyPoll(state: JobsState, jobs: JobRecord[], now: number): JobsState {
  return { rows: jobs, lastSuccessAt: now, stale: false, error: null };
}

/** A failed poll keeps the old rows but flags them stale. */
export function applyPollFailure(state: JobsState, message: string, now: number): JobsState {
  const stale =
    state.lastSuccessAt === null ? true : now - state.lastSuccessAt > POLL_INTERVAL_MS;
  return { ...state, stale, error: message };
}

export interface LogState {
  offset: number;
  text: string;
}

export function initialLogState(): LogState {
  return { offset: 0, text: "" };
}

/**
 * Append a fetched suffix. The next fetch starts where this one ended;
 * already-rendered bytes are never re-rendered or reordered.
 */
export function appendLog(state: LogState, suffix: string, byteLength: number): LogState {
  if (byteLength === 0) return state;
  return { offset: state.offset + byteLength, text: state.text + suffix };
}

const STATE_ORDER = ["RUNNING", "QUEUED", "COMPLETED", "FAILED", "CANCELED"];

/** Active work first, then most recently started. */
export function sortRows(rows: JobRecord[]): JobRecord[] {
  return [...rows].sort((a, b) => {
    const rank = STATE_ORDER.indexOf(a.state) - STATE_ORDER.indexOf(b.state);
    if (rank !== 0) return rank;
    return (b.started_at ?? 0) - (a.started_at ?? 0) || a.job_id.localeCompare(b.job_id);
  });
}

/** Render one parameters cell: name=value pairs with schema descriptions. */
export function describeParameters(
  parameters: Record<string, unknown>,
  descriptions: Record<string, string>,
): { name: string; value: string; description: string }[] {
  return Object.entries(parameters).map(([name, value]) => ({
    name,
    value: typeof value === "string" ? value : JSON.stringify(value),
    description: descriptions[name] ?? "",
  }));
}
