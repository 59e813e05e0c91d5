/** Typed client for the /v1 what-if API.  Every number shown in the UI comes
 * from these payloads verbatim; the client never does CEU arithmetic. */

export interface OutcomeDoc {
  value: number;
  p: number;
}

export interface ProspectDoc {
  name: string;
  outcomes: OutcomeDoc[];
}

export interface ProblemDoc {
  prospects: ProspectDoc[];
}

export interface RowDoc {
  prospect: string;
  ex: number;
  best_alt: string;
  best_alt_ex: number;
  ccc_prob_mass: number;
  ccc: number;
  ceu: number;
  best_alt_tied: boolean;
}

export interface RankingDoc {
  order: { prospect: string; score: number }[];
  recommended: string;
  tie_breaks: string[];
}

export interface EvaluationDoc {
  mode: string;
  rows: RowDoc[];
  ranking: RankingDoc;
  recommended: string;
  warnings: string[];
}

export interface ProfileDoc {
  policy: string;
  tolerance_rel?: number;
  aspiration_gain?: number;
  loss_pain_threshold?: number;
}

export type MarkingDoc = Record<string, boolean[]>;

export interface SessionDoc {
  id: string;
  fixture: string | null;
  created: number;
  updated: number;
  problem: ProblemDoc;
  marking: MarkingDoc;
  profile: ProfileDoc | null;
}

export interface Envelope {
  session: SessionDoc;
  evaluation: EvaluationDoc;
}

export interface FrameEvidence {
  frame: string;
  offset: number;
  marking: MarkingDoc;
  rows: RowDoc[];
  order: string[];
  marking_source?: string;
}

export interface AuditReportDoc {
  axiom: string;
  verdict: "holds-on-input" | "violated-on-input";
  witness: Record<string, unknown> | null;
  evidence: Record<string, unknown>[];
}

export interface FixtureEntry {
  id: string;
  title: string;
  source: string;
  unit: string | null;
  decisions: number;
  prospects: string[];
  profile: ProfileDoc | null;
  invariance_offset: number | null;
  has_independence: boolean;
}

/** Minimal structural fetch so tests can fake the transport without DOM types. */
export interface FetchResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}) => Promise<FetchResponse>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

function detailMessage(payload: unknown, fallback: string): string {
  if (payload && typeof payload === "object" && "detail" in payload) {
    const detail = (payload as { detail: unknown }).detail;
    if (detail && typeof detail === "object" && "error" in detail) {
      const base = String((detail as { error: unknown }).error);
      const errors = (detail as { errors?: unknown }).errors;
      if (Array.isArray(errors) && errors.length > 0) {
        return `${base}: ${errors.join("; ")}`;
      }
      return base;
    }
    if (typeof detail === "string") return detail;
  }
  return fallback;
}

function assertEnvelope(doc: unknown): Envelope {
  if (
    !doc ||
    typeof doc !== "object" ||
    !("session" in doc) ||
    !("evaluation" in doc)
  ) {
    throw new ApiError(0, "malformed response: expected a session envelope");
  }
  return doc as Envelope;
}

export class Api {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly base: string = "",
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    let resp: FetchResponse;
    try {
      resp = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network error: ${String(err)}`);
    }
    let payload: unknown = null;
    try {
      payload = await resp.json();
    } catch {
      payload = null;
    }
    if (!resp.ok) {
      throw new ApiError(resp.status, detailMessage(payload, `HTTP ${resp.status}`));
    }
    return payload;
  }

  async createSession(problem: ProblemDoc): Promise<Envelope> {
    return assertEnvelope(await this.request("POST", "/v1/sessions", problem));
  }

  async getSession(sid: string): Promise<Envelope> {
    return assertEnvelope(await this.request("GET", `/v1/sessions/${sid}`));
  }

  async setMark(sid: string, prospect: string, index: number, flag: boolean): Promise<Envelope> {
    return assertEnvelope(
      await this.request(
        "PUT",
        `/v1/sessions/${sid}/marks/${encodeURIComponent(prospect)}/${index}`,
        { flag },
      ),
    );
  }

  async applyProfile(sid: string, profile: ProfileDoc): Promise<Envelope> {
    return assertEnvelope(
      await this.request("POST", `/v1/sessions/${sid}/profile`, profile),
    );
  }

  async audit(
    sid: string,
    axiom: string,
    params: Record<string, unknown>,
  ): Promise<AuditReportDoc> {
    const doc = await this.request("POST", `/v1/sessions/${sid}/audit/${axiom}`, params);
    if (!doc || typeof doc !== "object" || !("report" in doc)) {
      throw new ApiError(0, "malformed response: expected an audit report");
    }
    return (doc as { report: AuditReportDoc }).report;
  }

  async listFixtures(): Promise<FixtureEntry[]> {
    const doc = await this.request("GET", "/v1/fixtures");
    if (!doc || typeof doc !== "object" || !("fixtures" in doc)) {
      throw new ApiError(0, "malformed response: expected a fixture list");
    }
    return (doc as { fixtures: FixtureEntry[] }).fixtures;
  }

  async fixtureSession(fid: string, decision: number): Promise<Envelope> {
    return assertEnvelope(
      await this.request("POST", `/v1/fixtures/${fid}/session?decision=${decision}`),
    );
  }
}
