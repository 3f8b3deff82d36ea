// Design-room page: editable story on the right, generation / plot / save
// controls on the left. State lives server-side; every response re-renders.

import { ApiClient } from "./api";
import { button, el, renderTranscript } from "./render";
import type { StoryViewPayload, TurnPayload } from "./types";

function turnToText(turn: TurnPayload): string {
  const lines = [turn.kind === "game" ? "Game:" : "Player:"];
  lines.push(...turn.freeform);
  if (turn.kind === "game") {
    if (turn.scene !== null) lines.push(turn.scene ? `Scene: ${turn.scene}` : "Scene:");
    for (const block of turn.blocks) {
      lines.push(`[ID] ${block.id}:`);
      for (const [name, value] of block.entries) lines.push(value ? `${name} ${value}` : name);
    }
  } else {
    for (const [name, value] of turn.entries) lines.push(value ? `${name} ${value}` : name);
  }
  return lines.join("\n");
}

export class DesignRoomPage {
  lastView: StoryViewPayload | null = null;
  feedbackPrompts: string[] = [];

  constructor(
    private api: ApiClient,
    private sessionId: string,
    private root: HTMLElement,
  ) {}

  async refresh(): Promise<void> {
    this.renderView(await this.api.getSession(this.sessionId));
  }

  private act(action: Promise<StoryViewPayload>): void {
    action.then(
      (view) => this.renderView(view),
      (err) => this.showError(String(err)),
    );
  }

  private showError(message: string): void {
    const banner = this.root.querySelector(".error-banner");
    if (banner) banner.textContent = message;
  }

  renderView(view: StoryViewPayload): void {
    this.lastView = view;
    this.root.replaceChildren();
    this.root.append(el("div", "error-banner"));
    const page = el("div", "design-room");
    page.append(this.renderControls(view));
    page.append(this.renderStoryPane(view));
    this.root.append(page);
  }

  private renderStoryPane(view: StoryViewPayload): HTMLElement {
    const pane = el("main", "story-pane");

    const opening = el("section", "opening-block");
    opening.append(el("h3", "pane-title", "Opening story"), el("p", "opening-story", view.opening_story));
    pane.append(opening);

    const instructions = el("section", "instructions-block");
    instructions.append(
      el("h3", "pane-title", "Instructions"),
      el("p", "instructions", view.instructions),
    );
    pane.append(instructions);

    if (view.archive_summary) {
      const archived = el("section", "archive-block");
      archived.append(
        el("h3", "pane-title", `Summary of what happened before (${view.archived_turn_count} turns)`),
        el("p", "archive-summary", view.archive_summary),
      );
      pane.append(archived);
    }

    pane.append(renderTranscript(view.turns));

    const editors = el("section", "turn-editors");
    view.turns.forEach((turn, index) => {
      const editor = el("div", "turn-editor");
      editor.dataset.index = String(index);
      const area = el("textarea", "turn-text");
      area.value = turnToText(turn);
      editor.append(area);
      editor.append(
        button("Save turn", "turn-save", () =>
          this.act(this.api.editSession(this.sessionId, { op: "replace", index, turn: area.value })),
        ),
        button("Delete", "turn-delete", () =>
          this.act(this.api.editSession(this.sessionId, { op: "delete", index })),
        ),
      );
      editors.append(editor);
    });
    const fresh = el("textarea", "new-turn-text");
    fresh.placeholder = "Player:\n[Action] ...\n[Words] ...";
    editors.append(
      fresh,
      button("Append turn", "turn-append", () => {
        if (fresh.value.trim()) {
          this.act(this.api.editSession(this.sessionId, { op: "append", turn: fresh.value }));
        }
      }),
    );
    pane.append(editors);
    return pane;
  }

  private renderControls(view: StoryViewPayload): HTMLElement {
    const pane = el("nav", "control-pane");

    const generate = el("section", "generate-controls");
    generate.append(el("h3", "pane-title", "Generate"));
    generate.append(
      button("Next turn", "generate-turn", () => this.act(this.api.generateTurn(this.sessionId))),
      button("Game turn", "generate-game-turn", () =>
        this.act(this.api.generateTurn(this.sessionId, "game")),
      ),
      button("Player turn", "generate-player-turn", () =>
        this.act(this.api.generateTurn(this.sessionId, "player")),
      ),
      button("Generate plot", "generate-plot", () => this.act(this.api.generatePlot(this.sessionId))),
    );
    pane.append(generate);

    const persistence = el("section", "save-controls");
    persistence.append(el("h3", "pane-title", "Progress"));
    persistence.append(
      button("Save", "session-save", () => {
        this.api.saveSession(this.sessionId).then(
          (result) => this.showError(`saved version ${result.version}`),
          (err) => this.showError(String(err)),
        );
      }),
    );
    pane.append(persistence);

    const plotPane = el("section", "plot-pane");
    plotPane.append(el("h3", "pane-title", "Plot"));
    const plotText = el("textarea", "plot-text");
    plotText.value = view.plot?.text ?? "";
    plotPane.append(
      plotText,
      button("Apply plot edits", "plot-apply", () =>
        this.act(this.api.setPlot(this.sessionId, plotText.value)),
      ),
    );
    pane.append(plotPane);

    const feedbackPane = el("section", "feedback-prompts-editor");
    feedbackPane.append(el("h3", "pane-title", "Feedback prompts"));
    const promptsArea = el("textarea", "feedback-prompts-text");
    promptsArea.value = this.feedbackPrompts.join("\n");
    promptsArea.placeholder = "One prompt per line, offered to players as feedback buttons.";
    promptsArea.addEventListener("change", () => {
      this.feedbackPrompts = promptsArea.value.split("\n").filter((line) => line.trim());
    });
    feedbackPane.append(promptsArea);
    pane.append(feedbackPane);

    const roomPane = el("section", "room-controls");
    roomPane.append(el("h3", "pane-title", "Playtest"));
    roomPane.append(
      button("Create game room", "create-room", () => {
        this.api
          .createRoom({ from_session: this.sessionId, feedback_prompt: this.feedbackPrompts })
          .then(
            (result) => this.showError(`room ${result.room} created`),
            (err) => this.showError(String(err)),
          );
      }),
    );
    pane.append(roomPane);
    return pane;
  }
}
