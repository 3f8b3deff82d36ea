"""Renderings of role-scoped views: diffable text for the wire format and
plain dict payloads for the machine-oriented mirror / event stream."""

from __future__ import annotations

from .plots import NpcSnapshot, Plot, serialize_plot
from .rooms import RoomView
from .story import StoryDocument, serialize_story
from .transcript import (
    GameTurn,
    PlayerTurn,
    Role,
    Turn,
    TurnKind,
    serialize_transcript,
    serialize_turn,
)
from .wire import WireItem, render_wire


def render_room_view(view: RoomView) -> str:
    items: list[WireItem] = [
        WireItem("room", view.room_id),
        WireItem("participant", view.participant_id),
        WireItem("role", view.role.value),
        WireItem("accepting_player_turns", "true" if view.accepting_player_turns else "false"),
    ]
    for p in view.participants:
        items.append(WireItem("member", f"{p.role.value} {p.id} {p.display_name}"))
    for prompt in view.feedback_prompts:
        items.append(WireItem("feedback_prompt", prompt))
    items.append(WireItem("opening_story", view.opening_story, True))
    if view.instructions is not None:
        items.append(WireItem("instructions", view.instructions, True))
    items.append(WireItem("transcript", serialize_transcript(view.transcript), True))
    if view.plot is not None:
        items.append(WireItem("plot", serialize_plot(view.plot), True))
        played = [str(i) for i, e in enumerate(view.plot.key_events) if e.played]
        if played:
            items.append(WireItem("played_events", ",".join(played)))
    if view.role is Role.DESIGNER:
        for snap in view.npc_states:
            lines = [f"[ID] {snap.npc_id}"]
            lines.extend(f"{name} {value}" if value else name for name, value in snap.latest.items())
            items.append(WireItem("npc", "\n".join(lines), True))
        for npc in sorted(view.npc_control):
            items.append(WireItem("control", npc))
        if view.pending_turn is not None:
            items.append(WireItem("pending_turn", serialize_turn(view.pending_turn.turn), True))
            for npc in sorted(view.pending_turn.controlled_ids):
                items.append(WireItem("pending_control", npc))
        for npc in sorted(view.prose_mention_warnings):
            items.append(WireItem("prose_mention", npc))
        if view.archive_summary:
            items.append(WireItem("summary", view.archive_summary, True))
    for fb in view.feedback_items:
        payload = [f"turn: {fb.turn_index}", f"author: {fb.author}", f"label: {fb.label}"]
        if fb.text:
            payload.append(f"text: {fb.text}")
        items.append(WireItem("feedback", "\n".join(payload), True))
    for msg in view.chat_log:
        items.append(WireItem("chat", f"author: {msg.author}\ntext: {msg.text}", True))
    return render_wire(items)


def turn_payload(turn: Turn) -> dict:
    if turn.kind is TurnKind.GAME:
        body = turn.body
        assert isinstance(body, GameTurn)
        return {
            "kind": "game",
            "scene": body.scene,
            "freeform": list(body.freeform),
            "blocks": [
                {
                    "id": b.npc_id,
                    "entries": [[e.name, e.value] for e in b.entries],
                }
                for b in body.npc_blocks
            ],
        }
    body = turn.body
    assert isinstance(body, PlayerTurn)
    return {
        "kind": "player",
        "author": body.author,
        "freeform": list(body.freeform),
        "entries": [[e.name, e.value] for e in body.entries],
    }


def npc_payload(snap: NpcSnapshot) -> dict:
    return {"id": snap.npc_id, "tags": dict(snap.latest)}


def plot_payload(plot: Plot) -> dict:
    return {
        "title": plot.title,
        "summary": plot.summary,
        "key_events": [{"text": e.text, "played": e.played} for e in plot.key_events],
        "npcs": [npc_payload(s) for s in plot.npc_roster],
        "text": serialize_plot(plot),
    }


def room_view_payload(view: RoomView) -> dict:
    payload: dict = {
        "room": view.room_id,
        "participant": view.participant_id,
        "role": view.role.value,
        "opening_story": view.opening_story,
        "accepting_player_turns": view.accepting_player_turns,
        "participants": [
            {"id": p.id, "name": p.display_name, "role": p.role.value}
            for p in view.participants
        ],
        "transcript": [turn_payload(t) for t in view.transcript],
        "transcript_text": serialize_transcript(view.transcript),
        "feedback_prompts": list(view.feedback_prompts),
        "feedback": [
            {"turn": f.turn_index, "author": f.author, "label": f.label, "text": f.text}
            for f in view.feedback_items
        ],
        "chat": [{"author": m.author, "text": m.text} for m in view.chat_log],
    }
    if view.role is Role.DESIGNER:
        payload["instructions"] = view.instructions
        payload["plot"] = plot_payload(view.plot) if view.plot is not None else None
        payload["npc_states"] = [npc_payload(s) for s in view.npc_states]
        payload["npc_control"] = sorted(view.npc_control)
        payload["pending_turn"] = (
            {
                "turn": turn_payload(view.pending_turn.turn),
                "text": serialize_turn(view.pending_turn.turn),
                "controlled": sorted(view.pending_turn.controlled_ids),
            }
            if view.pending_turn is not None
            else None
        )
        payload["prose_mentions"] = sorted(view.prose_mention_warnings)
        payload["archive_summary"] = view.archive_summary
    return payload


def story_payload(session_id: str, doc: StoryDocument, plot: Plot | None) -> dict:
    return {
        "session": session_id,
        "opening_story": doc.opening_story,
        "instructions": doc.instructions,
        "turns": [turn_payload(t) for t in doc.live_turns],
        "transcript_text": serialize_transcript(doc.live_turns),
        "archive_summary": doc.archive_summary,
        "archived_turn_count": doc.archived_turn_count,
        "story_text": serialize_story(doc),
        "plot": plot_payload(plot) if plot is not None else None,
    }


def render_story_view(session_id: str, doc: StoryDocument, plot: Plot | None) -> str:
    items = [
        WireItem("session", session_id),
        WireItem("archived_turns", str(doc.archived_turn_count)),
        WireItem("story", serialize_story(doc).rstrip("\n"), True),
    ]
    if plot is not None:
        items.append(WireItem("plot", serialize_plot(plot), True))
    return render_wire(items)
