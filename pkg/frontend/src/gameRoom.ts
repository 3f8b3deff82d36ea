// Game-room page: one class, two layouts. The server decides the role and
// ships a view scoped to it; every update replaces the whole page.

import { ApiClient } from "./api";
import {
  button,
  el,
  lastGameTurnIndex,
  participantNames,
  renderChatPanel,
  renderFeedbackButtons,
  renderFeedbackInbox,
  renderNpcPane,
  renderPendingPanel,
  renderPlotEditor,
  renderTranscript,
} from "./render";
import { subscribeViews, StreamHandle } from "./sse";
import type { RoomViewPayload } from "./types";

export class GameRoomPage {
  private stream: StreamHandle | null = null;
  lastView: RoomViewPayload | null = null;

  constructor(
    private api: ApiClient,
    private roomId: string,
    private token: string,
    private root: HTMLElement,
  ) {}

  async refresh(): Promise<void> {
    this.renderView(await this.api.view(this.roomId, this.token));
  }

  connect(): void {
    this.stream = subscribeViews(
      this.api.eventsUrl(this.roomId, this.token),
      (view) => this.renderView(view),
      (err) => this.showError(String(err)),
    );
  }

  disconnect(): void {
    this.stream?.close();
    this.stream = null;
  }

  private act(action: Promise<RoomViewPayload>): void {
    action.then(
      (view) => this.renderView(view),
      (err) => this.showError(String(err)),
    );
  }

  private showError(message: string): void {
    const banner = this.root.querySelector(".error-banner");
    if (banner) banner.textContent = message;
  }

  renderView(view: RoomViewPayload): void {
    this.lastView = view;
    this.root.replaceChildren();
    this.root.append(el("div", "error-banner"));

    const page = el("div", `game-room role-${view.role}`);
    page.append(this.renderLeftPane(view));
    page.append(this.renderGameWindow(view));
    page.append(
      renderChatPanel(view.chat, participantNames(view), (text) =>
        this.act(this.api.sendChat(this.roomId, this.token, text)),
      ),
    );
    this.root.append(page);
  }

  private renderGameWindow(view: RoomViewPayload): HTMLElement {
    const main = el("main", "game-window");
    main.append(el("p", "opening-story", view.opening_story));
    main.append(renderTranscript(view.transcript));

    const composer = el("div", "composer");
    const action = el("input", "action-input") as HTMLInputElement;
    action.placeholder = "[Action]";
    const words = el("input", "words-input") as HTMLInputElement;
    words.placeholder = "[Words]";
    const submit = button("Play turn", "submit-turn", () => {
      const lines = ["Player:"];
      if (action.value.trim()) lines.push(`[Action] ${action.value.trim()}`);
      if (words.value.trim()) lines.push(`[Words] ${words.value.trim()}`);
      if (lines.length === 1) return;
      this.act(
        this.api
          .submitTurn(this.roomId, this.token, lines.join("\n"))
          .then(() => this.api.advance(this.roomId, this.token)),
      );
      action.value = "";
      words.value = "";
    });
    submit.disabled = !view.accepting_player_turns;
    composer.append(action, words, submit);
    main.append(composer);
    return main;
  }

  private renderLeftPane(view: RoomViewPayload): HTMLElement {
    const pane = el("nav", "left-pane");
    const info = el("section", "room-info");
    info.append(el("h3", "pane-title", `Room ${view.room}`));
    const members = el("ul", "members");
    for (const member of view.participants) {
      members.append(el("li", `member ${member.role}`, `${member.name} (${member.role})`));
    }
    info.append(members);
    pane.append(info);

    if (view.role === "designer") {
      if (view.plot) {
        pane.append(
          renderPlotEditor(view.plot, {
            onEditEvent: (i, text) =>
              this.act(this.api.editPlotEvents(this.roomId, this.token, [`replace ${i} ${text}`])),
            onInsertEvent: (i, text) =>
              this.act(this.api.editPlotEvents(this.roomId, this.token, [`insert ${i} ${text}`])),
            onDeleteEvent: (i) =>
              this.act(this.api.editPlotEvents(this.roomId, this.token, [`delete ${i}`])),
            onMarkPlayed: (i) => this.act(this.api.markPlayed(this.roomId, this.token, i)),
          }),
        );
      }
      // Transcript NPCs carry the live hidden states; roster-only NPCs from
      // the plot still get a row so control can be taken before they appear.
      const seen = new Set((view.npc_states ?? []).map((npc) => npc.id.toLowerCase()));
      const rosterOnly = (view.plot?.npcs ?? []).filter((npc) => !seen.has(npc.id.toLowerCase()));
      pane.append(
        renderNpcPane([...(view.npc_states ?? []), ...rosterOnly], view.npc_control ?? [], (npc) =>
          this.act(this.api.toggleControl(this.roomId, this.token, npc)),
        ),
      );
      if (view.pending_turn) {
        pane.append(
          renderPendingPanel(
            view.pending_turn,
            (edited) => this.act(this.api.approvePending(this.roomId, this.token, edited)),
            () => this.act(this.api.regeneratePending(this.roomId, this.token)),
          ),
        );
      }
      if (view.prose_mentions && view.prose_mentions.length > 0) {
        pane.append(
          el("p", "prose-warning", `Prose mentions of controlled NPCs: ${view.prose_mentions.join(", ")}`),
        );
      }
      pane.append(renderFeedbackInbox(view.feedback));
    } else {
      const instructions = el("section", "gameplay-help");
      instructions.append(el("h3", "pane-title", "How to play"));
      instructions.append(
        el(
          "p",
          "help-text",
          "Write what you do and say, then play your turn. The game answers. " +
            "Use the chat panel to talk out of character.",
        ),
      );
      pane.append(instructions);
      pane.append(
        renderFeedbackButtons(view.feedback_prompts, lastGameTurnIndex(view), (turn, label, text) =>
          this.act(this.api.sendFeedback(this.roomId, this.token, turn, label, text)),
        ),
      );
      if (view.feedback.length > 0) {
        pane.append(renderFeedbackInbox(view.feedback)); // own feedback only
      }
    }
    return pane;
  }
}
