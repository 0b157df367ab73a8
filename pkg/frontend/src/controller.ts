import { ApiClient, ApiError, Label, Task } from './api.js';

export type Phase = 'login' | 'loading' | 'task' | 'submitting' | 'done';

export interface AppState {
  phase: Phase;
  annotatorId: string;
  task: Task | null;
  /** Judgments this annotator has recorded, from the progress endpoint. */
  done: number;
  total: number;
  /** Connectivity problem. The current task, if any, is kept as-is. */
  banner: string | null;
  /** Server rejected the last submission. The task stays on screen. */
  toast: string | null;
}

type Listener = (state: AppState) => void;

function describe(err: unknown): string {
  if (err instanceof Error) {
    return err.message;
  }
  return String(err);
}

export class Controller {
  private readonly api: ApiClient;
  private state: AppState = {
    phase: 'login',
    annotatorId: '',
    task: null,
    done: 0,
    total: 0,
    banner: null,
    toast: null,
  };
  private listeners: Listener[] = [];

  constructor(api: ApiClient) {
    this.api = api;
  }

  snapshot(): AppState {
    return { ...this.state };
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.snapshot());
  }

  private patch(changes: Partial<AppState>): void {
    this.state = { ...this.state, ...changes };
    for (const listener of this.listeners) {
      listener(this.snapshot());
    }
  }

  async login(annotatorId: string): Promise<void> {
    const id = annotatorId.trim();
    if (!id || this.state.phase !== 'login') {
      return;
    }
    this.patch({ annotatorId: id });
    await this.advance();
  }

  /**
   * Record a judgment for the task on screen. Calls made while a request
   * is in flight are dropped: the phase leaves 'task' synchronously, before
   * the first await, so a double keypress cannot produce two submissions.
   */
  async press(label: Label): Promise<void> {
    if (this.state.phase !== 'task' || this.state.task === null) {
      return;
    }
    const task = this.state.task;
    this.patch({ phase: 'submitting', toast: null, banner: null });
    try {
      // 'duplicate' means the server already has this judgment; either
      // way the pair is settled and the view moves on without comment.
      await this.api.submit(task.pair_id, this.state.annotatorId, label);
    } catch (err) {
      if (err instanceof ApiError) {
        this.patch({ phase: 'task', toast: `rejected (${err.status}): ${err.message}` });
      } else {
        this.patch({ phase: 'task', banner: describe(err) });
      }
      return;
    }
    await this.advance();
  }

  /** Re-poll the server after a connectivity failure. Manual, via the banner. */
  async retry(): Promise<void> {
    if (this.state.phase !== 'loading' && this.state.phase !== 'task') {
      return;
    }
    await this.advance();
  }

  private async advance(): Promise<void> {
    this.patch({ phase: 'loading', banner: null, toast: null });
    try {
      const [task, progress] = await Promise.all([
        this.api.nextTask(this.state.annotatorId),
        this.api.progress(),
      ]);
      const done = progress.per_annotator[this.state.annotatorId] ?? 0;
      this.patch({
        phase: task === null ? 'done' : 'task',
        task,
        done,
        total: progress.pairs_total,
      });
    } catch (err) {
      // Nothing is lost on failure: any recorded judgment is already on
      // the server, and the banner offers a retry.
      this.patch({ banner: describe(err) });
    }
  }
}
