// Typed client for the advisor's /v1 HTTP API. All numbers flow through
// untouched: this module (and the rest of the UI) renders what the server
// sends and never recomputes scores, fronts, or posteriors.

export interface SessionConfigInput {
  alpha_c: number;
  alpha_s: number;
  budget: number;
  total_steps: number;
  initial_c: number;
  initial_s: number;
  m_count?: number;
  seed?: number;
  gp_learning_rate?: number;
  gp_iterations?: number;
  stride_c?: number;
  stride_s?: number;
}

export interface StrategyRef {
  c: number;
  s: number;
}

export interface Installment {
  delta_c: number;
  delta_s: number;
}

export interface EvaluationRequest {
  request_id: string;
  c: number;
  s: number;
  classification_ids: string[];
  segmentation_ids: string[];
}

export interface HistoryEntry {
  step: number;
  strategy: StrategyRef;
  spent: number;
  incumbent: number;
  best_ei: number;
  delta: StrategyRef;
  sample_count: number;
}

export type Phase =
  | "awaiting_annotation"
  | "awaiting_evaluations"
  | "recommendation_ready"
  | "finished";

export interface SessionSnapshot {
  id: string;
  phase: Phase;
  step: number;
  config: Record<string, number | boolean>;
  pool: StrategyRef;
  installment: Installment;
  strategy: StrategyRef;
  spent: number;
  budget: number;
  pending_requests: EvaluationRequest[];
  observations: Record<string, number>;
  sample_count: number;
  history: HistoryEntry[];
  created_at: string;
  updated_at: string;
}

export interface ParetoPoint {
  c: number;
  s: number;
  cost: number;
  ei: number;
}

export interface PosteriorGrid {
  c: number[];
  s: number[];
  means: number[][];
  variances: number[][];
}

export interface RecommendationPayload {
  step: number;
  delta: Installment;
  strategy: StrategyRef;
  remaining_budget: number;
  best_ei: number;
  threshold: number;
  pareto_front: ParetoPoint[];
  posterior: PosteriorGrid;
  final: boolean;
}

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(status: number, code: string, message: string, field?: string) {
    super(message);
    this.status = status;
    this.code = code;
    this.field = field;
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${resp.status} ${resp.statusText}`;
  let field: string | undefined;
  try {
    const body = await resp.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = body.message ?? message;
      field = body.field ?? undefined;
    }
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  return new ApiError(resp.status, code, message, field);
}

export class AdvisorClient {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      throw await parseError(resp);
    }
    return (await resp.json()) as T;
  }

  createSession(config: SessionConfigInput): Promise<SessionSnapshot> {
    return this.request("POST", "/v1/sessions", config);
  }

  listSessions(phase?: Phase): Promise<SessionSnapshot[]> {
    const query = phase ? `?phase=${encodeURIComponent(phase)}` : "";
    return this.request("GET", `/v1/sessions${query}`);
  }

  getSession(id: string): Promise<SessionSnapshot> {
    return this.request("GET", `/v1/sessions/${id}`);
  }

  confirmAnnotation(id: string): Promise<{ requests: EvaluationRequest[]; phase: Phase }> {
    return this.request("POST", `/v1/sessions/${id}/confirm-annotation`);
  }

  submitObservation(
    id: string,
    requestId: string,
    score: number,
  ): Promise<{ remaining: number; phase: Phase }> {
    return this.request("POST", `/v1/sessions/${id}/observations`, {
      request_id: requestId,
      score,
    });
  }

  getRecommendation(id: string): Promise<RecommendationPayload> {
    return this.request("GET", `/v1/sessions/${id}/recommendation`);
  }

  acceptRecommendation(id: string): Promise<SessionSnapshot> {
    return this.request("POST", `/v1/sessions/${id}/accept`);
  }
}
