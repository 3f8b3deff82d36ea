// View payloads as delivered by the server's JSON mirror and event stream.
// The client renders these verbatim; it never synthesizes content of its own.

export type RoleName = "designer" | "player";

export interface GameTurnPayload {
  kind: "game";
  scene: string | null;
  freeform: string[];
  blocks: { id: string; entries: [string, string][] }[];
}

export interface PlayerTurnPayload {
  kind: "player";
  author: string | null;
  freeform: string[];
  entries: [string, string][];
}

export type TurnPayload = GameTurnPayload | PlayerTurnPayload;

export interface NpcPayload {
  id: string;
  tags: Record<string, string>;
}

export interface KeyEventPayload {
  text: string;
  played: boolean;
}

export interface PlotPayload {
  title: string;
  summary: string;
  key_events: KeyEventPayload[];
  npcs: NpcPayload[];
  text: string;
}

export interface FeedbackPayload {
  turn: number;
  author: string;
  label: string;
  text: string | null;
}

export interface ChatPayload {
  author: string;
  text: string;
}

export interface ParticipantPayload {
  id: string;
  name: string;
  role: RoleName;
}

export interface RoomViewPayload {
  room: string;
  participant: string;
  role: RoleName;
  opening_story: string;
  accepting_player_turns: boolean;
  participants: ParticipantPayload[];
  transcript: TurnPayload[];
  transcript_text: string;
  feedback_prompts: string[];
  feedback: FeedbackPayload[];
  chat: ChatPayload[];
  // designer-only fields; absent from player payloads
  instructions?: string;
  plot?: PlotPayload | null;
  npc_states?: NpcPayload[];
  npc_control?: string[];
  pending_turn?: { turn: TurnPayload; text: string; controlled: string[] } | null;
  prose_mentions?: string[];
  archive_summary?: string | null;
}

export interface StoryViewPayload {
  session: string;
  opening_story: string;
  instructions: string;
  turns: TurnPayload[];
  transcript_text: string;
  archive_summary: string | null;
  archived_turn_count: number;
  story_text: string;
  plot: PlotPayload | null;
}

export interface JoinResult {
  token: string;
  participant: string;
  role: RoleName;
}
