// Thin fetch wrapper over the server's JSON mirror. Every mutation returns
// the caller's updated role-scoped view, which pages render wholesale.

import type { JoinResult, RoomViewPayload, StoryViewPayload } from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(method: string, url: string, body?: unknown): Promise<T> {
  const response = await fetch(url, {
    method,
    headers: {
      Accept: "application/json",
      ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
    },
    body: body !== undefined ? JSON.stringify(body) : undefined,
  });
  if (!response.ok) {
    throw new ApiError(response.status, await response.text());
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(public base: string) {}

  private url(path: string, token?: string): string {
    const suffix = token ? `?token=${encodeURIComponent(token)}` : "";
    return `${this.base}${path}${suffix}`;
  }

  health(): Promise<{ status: string; version: string; provider: string }> {
    return request("GET", this.url("/health"));
  }

  // -- design sessions -----------------------------------------------------

  createSession(body: {
    opening_story?: string;
    instructions?: string;
    story?: string;
    from_story?: string;
    version?: number;
  }): Promise<StoryViewPayload> {
    return request("POST", this.url("/design/sessions"), body);
  }

  getSession(sid: string): Promise<StoryViewPayload> {
    return request("GET", this.url(`/design/sessions/${sid}`));
  }

  editSession(
    sid: string,
    edit: { op: "append" | "replace" | "delete" | "truncate_after"; index?: number; turn?: string },
  ): Promise<StoryViewPayload> {
    return request("POST", this.url(`/design/sessions/${sid}/edit`), edit);
  }

  generateTurn(sid: string, kind?: "game" | "player", partial?: string): Promise<StoryViewPayload> {
    const body: Record<string, string> = {};
    if (kind) body.kind = kind;
    if (partial) body.partial = partial;
    return request("POST", this.url(`/design/sessions/${sid}/generate`), body);
  }

  generatePlot(sid: string): Promise<StoryViewPayload> {
    return request("POST", this.url(`/design/sessions/${sid}/plot/generate`), {});
  }

  setPlot(sid: string, plotText: string): Promise<StoryViewPayload> {
    return request("POST", this.url(`/design/sessions/${sid}/plot`), { plot: plotText });
  }

  saveSession(sid: string): Promise<{ saved: string; version: number }> {
    return request("POST", this.url(`/design/sessions/${sid}/save`), {});
  }

  // -- rooms ----------------------------------------------------------------

  createRoom(body: {
    room_id?: string;
    from_session?: string;
    opening_story?: string;
    instructions?: string;
    plot?: string;
    feedback_prompt?: string[];
  }): Promise<{ room: string }> {
    return request("POST", this.url("/rooms"), body);
  }

  join(roomId: string, name: string, role: "designer" | "player"): Promise<JoinResult> {
    return request("POST", this.url(`/rooms/${roomId}/join`), { name, role });
  }

  view(roomId: string, token: string): Promise<RoomViewPayload> {
    return request("GET", this.url(`/rooms/${roomId}/view`, token));
  }

  submitTurn(roomId: string, token: string, turnText: string): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/turns`), { token, turn: turnText });
  }

  advance(roomId: string, token: string): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/advance`), { token });
  }

  approvePending(roomId: string, token: string, editedTurn: string): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/pending`), {
      token,
      action: "approve",
      turn: editedTurn,
    });
  }

  regeneratePending(roomId: string, token: string): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/pending`), { token, action: "regenerate" });
  }

  toggleControl(roomId: string, token: string, npc: string): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/control`), { token, npc });
  }

  editPlotEvents(roomId: string, token: string, edits: string[]): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/plot/edits`), { token, edit: edits });
  }

  markPlayed(roomId: string, token: string, index: number): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/plot/played`), { token, index });
  }

  sendFeedback(
    roomId: string,
    token: string,
    turn: number,
    label: string,
    text?: string,
  ): Promise<RoomViewPayload> {
    const body: Record<string, unknown> = { token, turn, label };
    if (text) body.text = text;
    return request("POST", this.url(`/rooms/${roomId}/feedback`), body);
  }

  sendChat(roomId: string, token: string, text: string): Promise<RoomViewPayload> {
    return request("POST", this.url(`/rooms/${roomId}/chat`), { token, text });
  }

  saveRoom(roomId: string, token: string): Promise<{ saved: string; version: number }> {
    return request("POST", this.url(`/rooms/${roomId}/save`), { token });
  }

  eventsUrl(roomId: string, token: string, once = false): string {
    return this.url(`/rooms/${roomId}/events`, token) + (once ? "&once=1" : "");
  }
}
