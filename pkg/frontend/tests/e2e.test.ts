// Headless client against the real server running a scripted session:
// the player DOM must never show hidden tags, the designer DOM must expose
// the NPC pane, Ctl toggles, and the pending-turn approval panel.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { connect } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { GameRoomPage } from "../src/gameRoom";
import { subscribeViews } from "../src/sse";
import type { RoomViewPayload } from "../src/types";

const PORT = 18000 + Math.floor(Math.random() * 2000);
const BASE = `http://127.0.0.1:${PORT}`;

const HIDDEN_TAGS = ["[Backstory]", "[Persona]", "[Mood]", "[Thought]"];

const SCRIPT = `---
Scene: She steps out of the shadows.
[ID] Neighbor:
[Mood] SECRET-MOOD-TOKEN
[Thought] SECRET-THOUGHT-TOKEN
[Action] Reaches out a hand.
[Words] "Come with me."
---
Scene: A watcher lingers by the stairs.
[ID] Watcher:
[Action] Folds his newspaper.
[Words] "Evening."
`;

const PLOT = `title: Shadows of Betrayal

Plot summary:
A resident is pulled into a former spy's unfinished business.

Key Events:
1. A knock at the door interrupts a quiet evening.
2. The neighbor asks for trust she has not earned.

NPCs:
[ID] Neighbor
[Backstory] SECRET-ROSTER-TOKEN
[Persona] Determined, but also wounded.`;

let server: ChildProcess;
const api = new ApiClient(BASE);

function portOpen(): Promise<boolean> {
  return new Promise((resolve) => {
    const socket = connect(PORT, "127.0.0.1", () => {
      socket.destroy();
      resolve(true);
    });
    socket.on("error", () => resolve(false));
  });
}

async function waitForHealth(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    if (await portOpen()) {
      const health = await api.health();
      if (health.status === "ok") return;
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "plotroom-ui-"));
  const scriptPath = join(dir, "session.script");
  writeFileSync(scriptPath, SCRIPT);
  server = spawn(
    "python3",
    [
      "-m", "plotroom.cli",
      "--port", String(PORT),
      "--data-dir", join(dir, "data"),
      "--provider", "scripted",
      "--script", scriptPath,
    ],
    { stdio: "ignore" },
  );
  await waitForHealth();
});

afterAll(() => {
  server?.kill();
});

function mountPage(token: string): GameRoomPage {
  const root = document.createElement("div");
  document.body.append(root);
  return new GameRoomPage(api, "uiroom", token, root);
}

function domOf(page: GameRoomPage): string {
  return (page as unknown as { root: HTMLElement })["root"].innerHTML;
}

describe("scripted session through the real server", () => {
  let designerToken: string;
  let playerToken: string;

  it("creates and joins the room", async () => {
    const created = await api.createRoom({
      room_id: "uiroom",
      opening_story: "You live in an apartment in the city.",
      instructions: "Continue this game.",
      plot: PLOT,
      feedback_prompt: ["the response aligns with the NPC character"],
    });
    expect(created.room).toBe("uiroom");
    designerToken = (await api.join("uiroom", "Dana", "designer")).token;
    playerToken = (await api.join("uiroom", "Pat", "player")).token;
  });

  it("runs a covert-control round and keeps the player view clean", async () => {
    await api.toggleControl("uiroom", designerToken, "Neighbor");
    await api.submitTurn("uiroom", playerToken, "Player:\n[Action] Open the door.\n[Words] Hello?");
    await api.advance("uiroom", playerToken);

    const designerPage = mountPage(designerToken);
    await designerPage.refresh();
    const designerDom = domOf(designerPage);
    expect(designerDom).toContain("pending-panel");
    expect(designerDom).toContain("ctl-button");
    expect(designerDom).toContain("npc-pane");
    expect(designerDom).toContain("SECRET-MOOD-TOKEN"); // pending text visible to designers

    const playerPage = mountPage(playerToken);
    await playerPage.refresh();
    const playerDomPending = domOf(playerPage);
    for (const tag of HIDDEN_TAGS) expect(playerDomPending).not.toContain(tag);
    expect(playerDomPending).not.toContain("SECRET");
    expect(playerDomPending).not.toContain("pending-panel");
    expect(playerPage.lastView!.transcript.length).toBe(1); // nothing delivered yet

    // designer edits the words and approves
    const pending = designerPage.lastView!.pending_turn!;
    const edited = pending.text.replace('"Come with me."', '"Walk with me, quickly."');
    await api.approvePending("uiroom", designerToken, edited);

    await playerPage.refresh();
    const playerDom = domOf(playerPage);
    expect(playerPage.lastView!.transcript.length).toBe(2);
    expect(playerDom).toContain("Walk with me, quickly.");
    for (const tag of HIDDEN_TAGS) expect(playerDom).not.toContain(tag);
    expect(playerDom).not.toContain("SECRET");

    // designer pane now lists the NPC with its hidden states and Ctl toggle
    await designerPage.refresh();
    const designerAfter = domOf(designerPage);
    expect(designerAfter).toContain("npc-name");
    expect(designerAfter).toContain("SECRET-MOOD-TOKEN");
    const designerRoot = (designerPage as unknown as { root: HTMLElement })["root"];
    const ctl = designerRoot.querySelector(".ctl-button.active");
    expect(ctl).not.toBeNull();
  });

  it("plays an uncontrolled round, files feedback, chats", async () => {
    await api.submitTurn("uiroom", playerToken, "Player:\n[Words] Where are we going?");
    await api.advance("uiroom", playerToken);
    const view = await api.view("uiroom", playerToken);
    expect(view.transcript.length).toBe(4);

    const afterFeedback = await api.sendFeedback(
      "uiroom", playerToken, 3, "the response aligns with the NPC character", "spot on",
    );
    expect(afterFeedback.feedback.length).toBe(1);

    const afterChat = await api.sendChat("uiroom", playerToken, "/chat that was fun");
    expect(afterChat.chat[0].text).toBe("that was fun");

    const playerPage = mountPage(playerToken);
    playerPage.renderView(afterChat);
    const dom = domOf(playerPage);
    expect(dom).toContain("chat-panel");
    expect(dom).toContain("that was fun");
    expect(dom).toContain("feedback-button");
    for (const tag of HIDDEN_TAGS) expect(dom).not.toContain(tag);
    expect(dom).not.toContain("SECRET");
  });

  it("receives role-scoped views over the event stream", async () => {
    const received: RoomViewPayload[] = [];
    const handle = subscribeViews(api.eventsUrl("uiroom", playerToken, true), (v) => {
      received.push(v);
    });
    await handle.done;
    expect(received.length).toBe(1);
    expect(received[0].role).toBe("player");
    expect("plot" in received[0]).toBe(false);
    expect("pending_turn" in received[0]).toBe(false);

    const page = mountPage(playerToken);
    page.renderView(received[0]);
    const dom = domOf(page);
    for (const tag of HIDDEN_TAGS) expect(dom).not.toContain(tag);
    expect(dom).not.toContain("SECRET");
  });

  it("designer stream carries the designer view", async () => {
    const received: RoomViewPayload[] = [];
    const handle = subscribeViews(api.eventsUrl("uiroom", designerToken, true), (v) => {
      received.push(v);
    });
    await handle.done;
    expect(received[0].role).toBe("designer");
    expect(received[0].npc_states!.length).toBeGreaterThan(0);
  });
});
