// Typed client for the dmnbot chat HTTP API.

export interface SessionStart {
  sessionId: string;
  greeting: string;
}

export interface BotResponse {
  replies: string[];
  status: string;
  decision: string | null;
}

export interface TranscriptEntry {
  speaker: string;
  text: string;
}

export interface SessionSummary {
  sessionId: string;
  status: string;
  transcript: TranscriptEntry[];
  collected: Record<string, string>;
  decision: string | null;
}

export interface DecisionInfo {
  slug: string;
  root: string;
  label: string;
  outputLabel: string;
}

export interface AgentInfo {
  decisions: DecisionInfo[];
  metadata: Record<string, unknown>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number, // 0 means the request never reached the server
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ChatApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(): Promise<SessionStart> {
    return this.request<SessionStart>("/sessions", { method: "POST" });
  }

  sendMessage(sessionId: string, text: string): Promise<BotResponse> {
    return this.request<BotResponse>(`/sessions/${encodeURIComponent(sessionId)}/messages`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  getSession(sessionId: string): Promise<SessionSummary> {
    return this.request<SessionSummary>(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  getAgent(): Promise<AgentInfo> {
    return this.request<AgentInfo>("/agent");
  }
}
