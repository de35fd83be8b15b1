import {
  ErrorDetail,
  MethodRef,
  SessionSnapshot,
  StepCandidate,
  VerifyResult,
} from './types';

/** A non-2xx protocol response, carrying the server's detail verbatim. */
export class ProtocolError extends Error {
  constructor(
    readonly status: number,
    readonly detail: ErrorDetail,
  ) {
    super(detail.message ?? `HTTP ${status}`);
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function unwrap<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let detail: ErrorDetail;
  try {
    const body = await response.json();
    detail = (body.detail ?? body) as ErrorDetail;
  } catch {
    detail = { error: 'HttpError', message: `HTTP ${response.status}` };
  }
  throw new ProtocolError(response.status, detail);
}

export class SifoClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async get<T>(path: string): Promise<T> {
    return unwrap<T>(await this.fetchImpl(this.baseUrl + path));
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    return unwrap<T>(response);
  }

  async listMethods(): Promise<MethodRef[]> {
    const body = await this.get<{ methods: MethodRef[] }>('/methods');
    return body.methods;
  }

  createSession(
    className: string,
    method: string,
    options: { id?: string; allowDeclassify?: boolean } = {},
  ): Promise<SessionSnapshot> {
    return this.post('/session', {
      id: options.id,
      class: className,
      method,
      allowDeclassify: options.allowDeclassify ?? false,
    });
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.get(`/session/${id}`);
  }

  applyStep(id: string, revision: number, step: string): Promise<SessionSnapshot> {
    return this.post(`/session/${id}/step`, { revision, step });
  }

  undo(id: string, revision: number): Promise<SessionSnapshot> {
    return this.post(`/session/${id}/undo`, { revision });
  }

  async applicableRules(id: string, holeId: string): Promise<StepCandidate[]> {
    const body = await this.get<{ candidates: StepCandidate[] }>(
      `/session/${id}/rules/${holeId}`,
    );
    return body.candidates;
  }

  async exportMethod(id: string): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/session/${id}/export`);
    if (!response.ok) {
      await unwrap(response); // throws with the server detail
    }
    return response.text();
  }

  verify(id: string): Promise<VerifyResult> {
    return this.get(`/session/${id}/verify`);
  }

  check(source?: string): Promise<VerifyResult> {
    return this.post('/check', source === undefined ? {} : { source });
  }

  /**
   * Apply a step with the optimistic-concurrency contract: on a stale
   * revision, refetch the session and replay the intent exactly once.
   */
  async applyStepWithRetry(
    id: string,
    revision: number,
    step: string,
  ): Promise<SessionSnapshot> {
    try {
      return await this.applyStep(id, revision, step);
    } catch (err) {
      if (err instanceof ProtocolError && err.isConflict) {
        const fresh = await this.getSession(id);
        return this.applyStep(id, fresh.revision, step);
      }
      throw err;
    }
  }
}
