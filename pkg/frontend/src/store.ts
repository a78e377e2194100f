import { ApiClient, ApiError } from "./api";
import type { MoveRejection, ReportDelta, ReportDoc, ScheduleDoc } from "./types";

export type DropOutcome = "noop" | "applied" | "rejected" | "failed";

export interface EditorState {
  scheduleId: string;
  doc: ScheduleDoc | null;
  // what the board currently shows; may briefly run ahead of the server
  // while a move is in flight, then reconciles to the response
  board: Record<string, number>;
  pending: boolean;
  violation: (MoveRejection & { group: string; attemptedSlot: number }) | null;
  lastDelta: ReportDelta | null;
  error: string | null;
}

type Listener = (state: EditorState) => void;

// Drag-and-drop editing session for one schedule.  The report shown in the
// panel is always the server's: this store never adds or subtracts metric
// values, it only swaps in whole response documents.
export class ScheduleEditor {
  private state: EditorState;
  private listeners: Listener[] = [];

  constructor(
    private readonly client: ApiClient,
    scheduleId: string,
  ) {
    this.state = {
      scheduleId,
      doc: null,
      board: {},
      pending: false,
      violation: null,
      lastDelta: null,
      error: null,
    };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  private patch(partial: Partial<EditorState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  getState(): EditorState {
    return this.state;
  }

  get report(): ReportDoc | null {
    return this.state.doc?.report ?? null;
  }

  async load(): Promise<void> {
    const doc = await this.client.schedule(this.state.scheduleId);
    this.patch({ doc, board: { ...doc.assignment }, violation: null, error: null });
  }

  private reconcile(doc: ScheduleDoc, delta: ReportDelta | null): void {
    this.patch({
      doc,
      board: { ...doc.assignment },
      pending: false,
      violation: null,
      lastDelta: delta,
      error: null,
    });
  }

  async dropOn(group: string, targetSlot: number): Promise<DropOutcome> {
    const current = this.state.board[group];
    if (current === undefined) {
      this.patch({ error: `unknown group ${group}` });
      return "failed";
    }
    if (current === targetSlot) {
      // dropping a chip on its own cell is not a move: no request
      return "noop";
    }
    const previousBoard = { ...this.state.board };
    this.patch({
      board: { ...previousBoard, [group]: targetSlot },
      pending: true,
      violation: null,
      error: null,
    });
    try {
      const response = await this.client.move(this.state.scheduleId, group, targetSlot);
      this.reconcile(response, response.delta);
      return "applied";
    } catch (err) {
      if (err instanceof ApiError) {
        const rejection = err.moveRejection;
        if (rejection) {
          // snap back and surface the violated rule
          this.patch({
            board: previousBoard,
            pending: false,
            violation: { ...rejection, group, attemptedSlot: targetSlot },
          });
          return "rejected";
        }
        this.patch({ board: previousBoard, pending: false, error: `move failed (${err.status})` });
        return "failed";
      }
      this.patch({ board: previousBoard, pending: false, error: String(err) });
      return "failed";
    }
  }

  async undo(): Promise<boolean> {
    try {
      const response = await this.client.undo(this.state.scheduleId);
      this.reconcile(response, response.delta);
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        return false; // nothing to undo
      }
      this.patch({ error: String(err) });
      return false;
    }
  }

  clearViolation(): void {
    this.patch({ violation: null });
  }
}

export interface PortfolioPoll {
  jobId: string;
  stop: () => void;
}

export function pollJob(
  client: ApiClient,
  jobId: string,
  onUpdate: (doc: Awaited<ReturnType<ApiClient["job"]>>) => void,
  intervalMs = 500,
): PortfolioPoll {
  let cancelled = false;
  const tick = async () => {
    if (cancelled) return;
    try {
      const doc = await client.job(jobId);
      onUpdate(doc);
      if (doc.status === "done" || doc.status === "failed") return;
    } catch {
      // transient polling failures just retry on the next tick
    }
    if (!cancelled) setTimeout(tick, intervalMs);
  };
  void tick();
  return { jobId, stop: () => (cancelled = true) };
}
