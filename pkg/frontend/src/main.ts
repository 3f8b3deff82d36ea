// Entry point: pick a page from the query string.
//
//   ?page=design&session=s1
//   ?page=room&room=r1&token=...
//   (no params) — landing: create/join forms

import { ApiClient } from "./api";
import { DesignRoomPage } from "./designRoom";
import { GameRoomPage } from "./gameRoom";
import { button, el } from "./render";

function landing(api: ApiClient, root: HTMLElement): void {
  root.replaceChildren();
  const page = el("div", "landing");
  page.append(el("h2", "pane-title", "plotroom"));

  const design = el("section", "landing-design");
  design.append(el("h3", "pane-title", "Design a story"));
  const opening = el("textarea", "landing-opening") as HTMLTextAreaElement;
  opening.placeholder = "Opening story";
  const instructions = el("textarea", "landing-instructions") as HTMLTextAreaElement;
  instructions.placeholder = "Instructions to the narrator model";
  design.append(
    opening,
    instructions,
    button("Enter design room", "landing-create-session", () => {
      api
        .createSession({ opening_story: opening.value, instructions: instructions.value })
        .then((view) => {
          location.search = `?page=design&session=${encodeURIComponent(view.session)}`;
        });
    }),
  );
  page.append(design);

  const join = el("section", "landing-join");
  join.append(el("h3", "pane-title", "Join a game room"));
  const roomId = el("input", "landing-room") as HTMLInputElement;
  roomId.placeholder = "room id";
  const name = el("input", "landing-name") as HTMLInputElement;
  name.placeholder = "display name";
  const role = el("select", "landing-role") as HTMLSelectElement;
  for (const value of ["player", "designer"]) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    role.append(option);
  }
  join.append(
    roomId,
    name,
    role,
    button("Join", "landing-join-room", () => {
      api.join(roomId.value, name.value || "anonymous", role.value as "player" | "designer").then(
        (result) => {
          location.search =
            `?page=room&room=${encodeURIComponent(roomId.value)}` +
            `&token=${encodeURIComponent(result.token)}`;
        },
      );
    }),
  );
  page.append(join);
  root.append(page);
}

export function mount(root: HTMLElement, base = ""): void {
  const params = new URLSearchParams(location.search);
  const api = new ApiClient(base);
  const page = params.get("page");
  if (page === "design" && params.get("session")) {
    const designPage = new DesignRoomPage(api, params.get("session")!, root);
    void designPage.refresh();
  } else if (page === "room" && params.get("room") && params.get("token")) {
    const roomPage = new GameRoomPage(api, params.get("room")!, params.get("token")!, root);
    void roomPage.refresh();
    roomPage.connect();
  } else {
    landing(api, root);
  }
}

const rootNode = typeof document !== "undefined" ? document.getElementById("app") : null;
if (rootNode) {
  mount(rootNode);
}
