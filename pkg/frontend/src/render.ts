// DOM builders. These are pure projections of server payloads: nothing is
// rendered that the view did not deliver, and nothing delivered is invented.

import type {
  ChatPayload,
  FeedbackPayload,
  NpcPayload,
  PlotPayload,
  RoomViewPayload,
  TurnPayload,
} from "./types";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function button(label: string, className: string, onClick: () => void): HTMLButtonElement {
  const b = el("button", className, label);
  b.addEventListener("click", onClick);
  return b;
}

// -- transcript ---------------------------------------------------------------

export function renderTurn(turn: TurnPayload, index: number): HTMLElement {
  const node = el("article", `turn ${turn.kind}`);
  node.dataset.index = String(index);
  node.append(el("header", "turn-header", turn.kind === "game" ? "Game" : "Player"));
  for (const line of turn.freeform) {
    node.append(el("p", "freeform", line));
  }
  if (turn.kind === "game") {
    if (turn.scene !== null) {
      node.append(el("p", "scene", turn.scene));
    }
    for (const block of turn.blocks) {
      const blockNode = el("section", "npc-block");
      blockNode.append(el("h4", "npc-id", block.id));
      for (const [name, value] of block.entries) {
        const entryNode = el("p", "tag-entry");
        entryNode.append(el("span", "tag-name", name), el("span", "tag-value", ` ${value}`));
        blockNode.append(entryNode);
      }
      node.append(blockNode);
    }
  } else {
    if (turn.author) node.dataset.author = turn.author;
    for (const [name, value] of turn.entries) {
      const entryNode = el("p", "tag-entry");
      entryNode.append(el("span", "tag-name", name), el("span", "tag-value", ` ${value}`));
      node.append(entryNode);
    }
  }
  return node;
}

export function renderTranscript(turns: TurnPayload[]): HTMLElement {
  const node = el("div", "transcript");
  turns.forEach((turn, i) => node.append(renderTurn(turn, i)));
  return node;
}

// -- designer control pane ------------------------------------------------------

export function renderNpcPane(
  npcs: NpcPayload[],
  controlled: string[],
  onToggle: (npcId: string) => void,
): HTMLElement {
  const pane = el("section", "npc-pane");
  pane.append(el("h3", "pane-title", "NPCs"));
  if (npcs.length === 0) {
    pane.append(el("p", "empty", "No NPCs have appeared yet."));
    return pane;
  }
  const controlledSet = new Set(controlled.map((c) => c.toLowerCase()));
  for (const npc of npcs) {
    const row = el("div", "npc-row");
    const ctl = button(
      "Ctl",
      controlledSet.has(npc.id.toLowerCase()) ? "ctl-button active" : "ctl-button",
      () => onToggle(npc.id),
    );
    ctl.dataset.npc = npc.id;
    row.append(ctl, el("span", "npc-name", npc.id));
    const states = el("dl", "npc-states");
    for (const [tag, value] of Object.entries(npc.tags)) {
      states.append(el("dt", "state-tag", tag), el("dd", "state-value", value));
    }
    row.append(states);
    pane.append(row);
  }
  return pane;
}

export function renderPendingPanel(
  pending: { text: string; controlled: string[] },
  onApprove: (edited: string) => void,
  onRegenerate: () => void,
): HTMLElement {
  const panel = el("section", "pending-panel");
  panel.append(el("h3", "pane-title", `Pending turn (controls: ${pending.controlled.join(", ")})`));
  panel.append(el("pre", "pending-text", pending.text));
  const editor = el("textarea", "pending-editor");
  editor.value = pending.text;
  panel.append(editor);
  panel.append(button("Approve", "approve-button", () => onApprove(editor.value)));
  panel.append(button("Regenerate", "regenerate-button", onRegenerate));
  return panel;
}

export function renderPlotEditor(
  plot: PlotPayload,
  handlers: {
    onEditEvent: (index: number, text: string) => void;
    onInsertEvent: (index: number, text: string) => void;
    onDeleteEvent: (index: number) => void;
    onMarkPlayed: (index: number) => void;
  },
): HTMLElement {
  const pane = el("section", "plot-editor");
  pane.append(el("h3", "pane-title", `Plot: ${plot.title}`));
  pane.append(el("p", "plot-summary", plot.summary));
  const list = el("ol", "key-events");
  plot.key_events.forEach((event, i) => {
    const item = el("li", event.played ? "key-event played" : "key-event");
    const input = el("input", "event-text") as HTMLInputElement;
    input.value = event.text;
    input.disabled = event.played;
    item.append(input);
    if (!event.played) {
      item.append(button("Save", "event-save", () => handlers.onEditEvent(i, input.value)));
      item.append(button("Delete", "event-delete", () => handlers.onDeleteEvent(i)));
      item.append(button("Mark played", "event-played", () => handlers.onMarkPlayed(i)));
    } else {
      item.append(el("span", "played-marker", "played"));
    }
    list.append(item);
  });
  pane.append(list);
  const newEvent = el("input", "new-event-text") as HTMLInputElement;
  pane.append(
    newEvent,
    button("Add event", "event-add", () => {
      if (newEvent.value.trim()) {
        handlers.onInsertEvent(plot.key_events.length, newEvent.value.trim());
        newEvent.value = "";
      }
    }),
  );
  return pane;
}

// -- feedback and chat ----------------------------------------------------------

export function renderFeedbackInbox(items: FeedbackPayload[]): HTMLElement {
  const pane = el("section", "feedback-inbox");
  pane.append(el("h3", "pane-title", "Player feedback"));
  for (const item of items) {
    const row = el("p", "feedback-item", `turn ${item.turn} — ${item.label}`);
    if (item.text) row.append(el("span", "feedback-text", `: ${item.text}`));
    row.dataset.author = item.author;
    pane.append(row);
  }
  return pane;
}

export function renderFeedbackButtons(
  prompts: string[],
  lastGameTurnIndex: number | null,
  onFeedback: (turn: number, label: string, text?: string) => void,
): HTMLElement {
  const pane = el("section", "feedback-buttons");
  pane.append(el("h3", "pane-title", "Feedback"));
  if (lastGameTurnIndex === null) {
    pane.append(el("p", "empty", "Feedback unlocks after the first game turn."));
    return pane;
  }
  for (const prompt of prompts) {
    pane.append(button(prompt, "feedback-button", () => onFeedback(lastGameTurnIndex, prompt)));
  }
  const free = el("input", "free-feedback-text") as HTMLInputElement;
  pane.append(
    free,
    button("Send feedback", "feedback-free", () => {
      if (free.value.trim()) {
        onFeedback(lastGameTurnIndex, "free", free.value.trim());
        free.value = "";
      }
    }),
  );
  return pane;
}

export function renderChatPanel(
  log: ChatPayload[],
  names: Map<string, string>,
  onSend: (text: string) => void,
): HTMLElement {
  // Deliberately a side panel: chat stays out of the game window.
  const pane = el("aside", "chat-panel");
  pane.append(el("h3", "pane-title", "Chat"));
  const logNode = el("div", "chat-log");
  for (const message of log) {
    logNode.append(
      el("p", "chat-message", `${names.get(message.author) ?? message.author}: ${message.text}`),
    );
  }
  pane.append(logNode);
  const input = el("input", "chat-input") as HTMLInputElement;
  pane.append(
    input,
    button("Send", "chat-send", () => {
      if (input.value.trim()) {
        onSend(input.value);
        input.value = "";
      }
    }),
  );
  return pane;
}

export function lastGameTurnIndex(view: RoomViewPayload): number | null {
  for (let i = view.transcript.length - 1; i >= 0; i--) {
    if (view.transcript[i].kind === "game") return i;
  }
  return null;
}

export function participantNames(view: RoomViewPayload): Map<string, string> {
  return new Map(view.participants.map((p) => [p.id, p.name]));
}
