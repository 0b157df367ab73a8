// Typed client for the judgment service. Every call goes through an
// injectable fetch so tests can stub the wire or count requests.

export type Label = 'paraphrase' | 'not_paraphrase' | 'skip';

export interface Task {
  pair_id: string;
  source: string;
  candidate: string;
}

export interface Progress {
  pairs_total: number;
  pairs_complete: number;
  judgments_total: number;
  per_annotator: Record<string, number>;
}

export type SubmitOutcome = 'accepted' | 'duplicate';

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function errorMessage(response: Response): Promise<string> {
  try {
    const body: unknown = await response.json();
    if (body && typeof body === 'object' && typeof (body as { error?: unknown }).error === 'string') {
      return (body as { error: string }).error;
    }
  } catch {
    // non-JSON error body, fall through to the status line
  }
  return response.statusText || `http ${response.status}`;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = '', fetchFn: FetchLike = (input, init) => fetch(input, init)) {
    this.base = base;
    this.fetchFn = fetchFn;
  }

  /** Next unjudged pair for this annotator, or null when none remain. */
  async nextTask(annotatorId: string): Promise<Task | null> {
    const url = `${this.base}/api/tasks/next?annotator=${encodeURIComponent(annotatorId)}`;
    const response = await this.fetchFn(url);
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, await errorMessage(response));
    }
    return (await response.json()) as Task;
  }

  /**
   * Record one judgment. A 409 is not an error: the judgment already
   * exists server-side, so callers treat it exactly like an accept.
   */
  async submit(pairId: string, annotatorId: string, label: Label): Promise<SubmitOutcome> {
    const response = await this.fetchFn(`${this.base}/api/judgments`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ pair_id: pairId, annotator_id: annotatorId, label }),
    });
    if (response.status === 201) {
      return 'accepted';
    }
    if (response.status === 409) {
      return 'duplicate';
    }
    throw new ApiError(response.status, await errorMessage(response));
  }

  async progress(): Promise<Progress> {
    const response = await this.fetchFn(`${this.base}/api/progress`);
    if (!response.ok) {
      throw new ApiError(response.status, await errorMessage(response));
    }
    return (await response.json()) as Progress;
  }
}
