import type { DialogueTurn, MessageReply } from "./types.js";

let apiBase = "";

/** Point the client at a service origin; default is same-origin. */
export function setApiBase(url: string): void {
  apiBase = url.replace(/\/+$/, "");
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(apiBase + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!res.ok) {
    let detail = `HTTP ${res.status}`;
    try {
      const body = await res.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(res.status, detail);
  }
  return (await res.json()) as T;
}

export function createSession(
  profile: Record<string, unknown>,
  checkpointPath?: string,
): Promise<{ session_id: string }> {
  const body: Record<string, unknown> = { profile };
  if (checkpointPath) body.checkpoint_path = checkpointPath;
  return request("/api/sessions", {
    method: "POST",
    body: JSON.stringify(body),
  });
}

export function sendMessage(
  sessionId: string,
  text: string,
): Promise<MessageReply> {
  return request(`/api/sessions/${sessionId}/messages`, {
    method: "POST",
    body: JSON.stringify({ text }),
  });
}

export function getSession(
  sessionId: string,
): Promise<{ transcript: DialogueTurn[] }> {
  return request(`/api/sessions/${sessionId}`);
}
