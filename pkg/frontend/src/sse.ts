// Event-stream consumption via fetch + ReadableStream so the same code runs
// in the browser and in headless tests. The server pushes one complete
// role-scoped view per event; consumers replace their whole UI with it.

import type { RoomViewPayload } from "./types";

export interface StreamHandle {
  close(): void;
  done: Promise<void>;
}

export function subscribeViews(
  url: string,
  onView: (view: RoomViewPayload) => void,
  onError?: (err: unknown) => void,
): StreamHandle {
  const controller = new AbortController();

  const done = (async () => {
    try {
      const response = await fetch(url, {
        signal: controller.signal,
        headers: { Accept: "text/event-stream" },
      });
      if (!response.ok || !response.body) {
        throw new Error(`event stream failed: ${response.status}`);
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done: finished, value } = await reader.read();
        if (finished) break;
        buffer += decoder.decode(value, { stream: true });
        let boundary: number;
        while ((boundary = buffer.indexOf("\n\n")) !== -1) {
          const frame = buffer.slice(0, boundary);
          buffer = buffer.slice(boundary + 2);
          const view = parseFrame(frame);
          if (view) onView(view);
        }
      }
    } catch (err) {
      if (!controller.signal.aborted && onError) onError(err);
    }
  })();

  return { close: () => controller.abort(), done };
}

function parseFrame(frame: string): RoomViewPayload | null {
  let event = "message";
  const data: string[] = [];
  for (const line of frame.split("\n")) {
    if (line.startsWith(":")) continue; // keepalive comment
    if (line.startsWith("event:")) event = line.slice(6).trim();
    if (line.startsWith("data:")) data.push(line.slice(5).trim());
  }
  if (event !== "view" || data.length === 0) return null;
  return JSON.parse(data.join("\n")) as RoomViewPayload;
}
