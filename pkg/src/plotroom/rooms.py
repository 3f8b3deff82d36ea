"""Game-room session engine: plot-seeded play, role-scoped views, live plot
editing, covert NPC control, and feedback collection.

A ``Room`` is an immutable value and every operation is a pure transition,
so a host can serialize mutations per room (one logical executor) and any
failed provider call simply leaves the previous value in place.

Covert control works by interception: when a generated game turn contains
an ``[ID]`` block whose name matches a controlled NPC, the turn is parked
as ``pending_turn`` for designers to edit and approve instead of being
appended. Approved turns enter the transcript exactly like ordinary ones;
nothing in a player-facing view ever records that interception happened.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from . import prompts
from .plots import (
    KeyEvent,
    NpcSnapshot,
    Plot,
    extract_npcs,
    parse_plot,
    roster_ids,
    serialize_plot,
)
from .providers import EmptyCompletion
from .story import ContextBudget, DEFAULT_BUDGET, IndexOutOfRange, archive_turns
from .transcript import (
    GameTurn,
    Role,
    Turn,
    TurnKind,
    VisibilityMap,
    parse_transcript,
    redact_transcript,
    serialize_transcript,
    serialize_turn,
    with_author,
)
from .wire import WireItem, all_of, first, parse_wire, render_wire, require


class RoomError(Exception):
    pass


class InvalidPlot(RoomError):
    pass


class UnknownParticipant(RoomError):
    pass


class DuplicateParticipant(RoomError):
    pass


class NotDesigner(RoomError):
    pass


class NotPlayer(RoomError):
    pass


class NotYourTurnPhase(RoomError):
    pass


class NoPendingTurn(RoomError):
    pass


class UnknownNpc(RoomError):
    pass


class EventAlreadyPlayed(RoomError):
    pass


class InvalidTurnRef(RoomError):
    pass


class InvalidFeedbackLabel(RoomError):
    pass


class TurnParseFailure(RoomError):
    pass


FREE_FEEDBACK_LABEL = "free"


@dataclass(frozen=True)
class Participant:
    id: str
    display_name: str
    role: Role


@dataclass(frozen=True)
class FeedbackItem:
    turn_index: int
    author: str
    label: str
    text: str | None = None


@dataclass(frozen=True)
class ChatMessage:
    author: str
    text: str


@dataclass(frozen=True)
class PendingTurn:
    turn: Turn
    controlled_ids: frozenset[str]


@dataclass(frozen=True)
class Room:
    id: str
    opening_story: str
    instructions: str
    plot: Plot
    transcript: tuple[Turn, ...] = ()
    participants: tuple[Participant, ...] = ()
    npc_control: frozenset[str] = frozenset()  # lowercase npc ids
    pending_turn: PendingTurn | None = None
    feedback_prompts: tuple[str, ...] = ()
    feedback_items: tuple[FeedbackItem, ...] = ()
    chat_log: tuple[ChatMessage, ...] = ()
    archive_summary: str | None = None
    archived_turn_count: int = 0
    generation_in_flight: bool = False
    round_robin: bool = False
    next_player_index: int = 0
    visibility: VisibilityMap = field(default_factory=VisibilityMap.default)
    budget: ContextBudget = DEFAULT_BUDGET

    def participant(self, participant_id: str) -> Participant:
        for p in self.participants:
            if p.id == participant_id:
                return p
        raise UnknownParticipant(participant_id)


def create_room(
    plot: Plot,
    opening_story: str,
    instructions: str,
    feedback_prompts: Sequence[str] = (),
    *,
    room_id: str = "room",
    visibility: VisibilityMap | None = None,
    budget: ContextBudget = DEFAULT_BUDGET,
    round_robin: bool = False,
) -> Room:
    """Seed a session from a plot. All key events start unplayed."""
    if not plot.is_valid():
        raise InvalidPlot("plot needs a title and at least one key event")
    return Room(
        id=room_id,
        opening_story=opening_story,
        instructions=instructions,
        plot=plot.with_unplayed_events(),
        feedback_prompts=tuple(_one_line(p) for p in feedback_prompts if p.strip()),
        visibility=visibility or VisibilityMap.default(),
        budget=budget,
        round_robin=round_robin,
    )


def add_participant(room: Room, participant: Participant) -> Room:
    if any(p.id == participant.id for p in room.participants):
        raise DuplicateParticipant(participant.id)
    return replace(room, participants=room.participants + (participant,))


# ---------------------------------------------------------------------------
# Turn phases

def _require_designer(room: Room, participant_id: str) -> Participant:
    actor = room.participant(participant_id)
    if actor.role is not Role.DESIGNER:
        raise NotDesigner(participant_id)
    return actor


def submit_player_turn(room: Room, participant_id: str, turn: Turn) -> Room:
    """Append a player turn stamped with its author. Rejected while a
    generation is running or a pending turn awaits approval."""
    actor = room.participant(participant_id)
    if room.generation_in_flight or room.pending_turn is not None:
        raise NotYourTurnPhase("a game turn is being produced")
    if turn.kind is not TurnKind.PLAYER:
        raise TurnParseFailure("players submit player turns")
    next_index = room.next_player_index
    if room.round_robin and actor.role is Role.PLAYER:
        players = [p for p in room.participants if p.role is Role.PLAYER]
        if players:
            expected = players[room.next_player_index % len(players)]
            if expected.id != actor.id:
                raise NotYourTurnPhase(f"waiting for {expected.display_name}")
            next_index = (room.next_player_index + 1) % len(players)
    stamped = with_author(turn, actor.id)
    return replace(
        room,
        transcript=room.transcript + (stamped,),
        next_player_index=next_index,
    )


def known_npc_ids(room: Room) -> set[str]:
    ids = roster_ids(extract_npcs(room.transcript))
    ids |= roster_ids(room.plot.npc_roster)
    return ids


def controlled_ids_in(turn: Turn, control: frozenset[str]) -> frozenset[str]:
    """Structural interception rule: the ids of the turn's [ID] blocks that
    are under designer control (case-insensitive, trimmed)."""
    if turn.kind is not TurnKind.GAME or not control:
        return frozenset()
    body = turn.body
    assert isinstance(body, GameTurn)
    return frozenset(
        b.npc_id.strip().lower()
        for b in body.npc_blocks
        if b.npc_id.strip().lower() in control
    )


def prose_mentions(turn: Turn, control: frozenset[str]) -> frozenset[str]:
    """Controlled names mentioned only in prose (scene/values), surfaced as
    a designer-side warning; prose mentions never trigger interception."""
    if not control:
        return frozenset()
    text = serialize_turn(turn).lower()
    hits = set()
    for npc in control:
        if re.search(rf"\b{re.escape(npc)}\b", text):
            hits.add(npc)
    return frozenset(hits - controlled_ids_in(turn, control))


def begin_generation(room: Room) -> Room:
    if room.generation_in_flight:
        raise NotYourTurnPhase("a generation is already running")
    if room.pending_turn is not None:
        raise NotYourTurnPhase("a pending turn awaits approval")
    if not room.transcript or room.transcript[-1].kind is not TurnKind.PLAYER:
        raise NotYourTurnPhase("the game answers a player turn")
    return replace(room, generation_in_flight=True)


def apply_generation(
    room: Room, completion: str, control: frozenset[str] | None = None
) -> Room:
    """Fold a raw completion back into the room: either park it for
    approval (covert control) or append it outright."""
    if not completion.strip():
        raise EmptyCompletion("provider returned an empty completion")
    text = completion
    if not text.lstrip().lower().startswith(("game:", "player:")):
        text = "Game:\n" + text
    turns, _diags = parse_transcript(text)
    if not turns:
        raise TurnParseFailure("completion contained no turn content")
    turn = turns[0]
    if turn.kind is not TurnKind.GAME:
        raise TurnParseFailure("completion did not parse as a game turn")

    active = room.npc_control if control is None else control
    intercepted = controlled_ids_in(turn, active)
    if intercepted:
        return replace(
            room,
            generation_in_flight=False,
            pending_turn=PendingTurn(turn, intercepted),
        )
    return replace(
        room,
        generation_in_flight=False,
        transcript=room.transcript + (turn,),
    )


def apply_room_archive(room: Room, provider) -> Room:
    kept, summary, moved = archive_turns(
        room.transcript, room.archive_summary, room.opening_story,
        room.instructions, provider, room.budget,
    )
    if not moved:
        return room
    return replace(
        room,
        transcript=kept,
        archive_summary=summary,
        archived_turn_count=room.archived_turn_count + moved,
    )


def advance_game_turn(room: Room, provider) -> Room:
    """Generate the next game turn in response to the latest player turn.

    The context budget is applied before prompting so the request always
    fits; on provider failure the room value is simply not replaced.
    """
    staged = begin_generation(room)
    control = staged.npc_control
    staged = apply_room_archive(staged, provider)
    request = prompts.build_game_room_next_turn(staged)
    completion = provider.complete(request)
    return apply_generation(staged, completion, control)


@dataclass(frozen=True)
class Approve:
    edited: Turn


@dataclass(frozen=True)
class Regenerate:
    pass


def resolve_pending_turn(
    room: Room, designer_id: str, action: Approve | Regenerate, provider=None
) -> Room:
    """Approve (possibly edited) or regenerate the parked game turn.

    Approved turns are appended exactly like uncontrolled ones; player
    views carry no trace of the intervention.
    """
    _require_designer(room, designer_id)
    if room.pending_turn is None:
        raise NoPendingTurn(room.id)
    if isinstance(action, Approve):
        turn = action.edited
        if turn.kind is not TurnKind.GAME:
            raise TurnParseFailure("an approved turn must be a game turn")
        return replace(
            room,
            pending_turn=None,
            transcript=room.transcript + (turn,),
        )
    if isinstance(action, Regenerate):
        if provider is None:
            raise ValueError("regeneration needs a provider")
        cleared = replace(room, pending_turn=None)
        return advance_game_turn(cleared, provider)
    raise TypeError(f"unknown action {action!r}")


def clear_pending_turn(room: Room, designer_id: str) -> Room:
    """First half of a regeneration: drop the parked turn."""
    _require_designer(room, designer_id)
    if room.pending_turn is None:
        raise NoPendingTurn(room.id)
    return replace(room, pending_turn=None)


def toggle_npc_control(room: Room, designer_id: str, npc_id: str) -> Room:
    """Flip covert control of one NPC; effective from the next generation."""
    _require_designer(room, designer_id)
    key = npc_id.strip().lower()
    if key not in known_npc_ids(room):
        raise UnknownNpc(npc_id)
    control = set(room.npc_control)
    if key in control:
        control.remove(key)
    else:
        control.add(key)
    return replace(room, npc_control=frozenset(control))


# ---------------------------------------------------------------------------
# Live plot editing

@dataclass(frozen=True)
class ReplaceEvent:
    index: int
    new_text: str


@dataclass(frozen=True)
class InsertEvent:
    index: int
    text: str


@dataclass(frozen=True)
class DeleteEvent:
    index: int


PlotEdit = ReplaceEvent | InsertEvent | DeleteEvent


def edit_plot_events(room: Room, designer_id: str, edits: Iterable[PlotEdit]) -> Room:
    """Rewrite unplayed key events; events already played are immutable."""
    _require_designer(room, designer_id)
    events = list(room.plot.key_events)

    def check(index: int, inserting: bool = False) -> None:
        limit = len(events) + (1 if inserting else 0)
        if index < 0 or index >= limit:
            raise IndexOutOfRange(f"key event index {index} out of range")
        if not inserting and events[index].played:
            raise EventAlreadyPlayed(f"key event {index} was already played")

    for edit in edits:
        if isinstance(edit, ReplaceEvent):
            check(edit.index)
            events[edit.index] = KeyEvent(edit.new_text, False)
        elif isinstance(edit, InsertEvent):
            check(edit.index, inserting=True)
            events.insert(edit.index, KeyEvent(edit.text, False))
        elif isinstance(edit, DeleteEvent):
            check(edit.index)
            del events[edit.index]
        else:
            raise TypeError(f"unknown plot edit {edit!r}")
    plot = replace(room.plot, key_events=tuple(events))
    return replace(room, plot=plot)


def mark_event_played(room: Room, designer_id: str, index: int) -> Room:
    """Monotone: a played flag can be set, never unset."""
    _require_designer(room, designer_id)
    events = list(room.plot.key_events)
    if index < 0 or index >= len(events):
        raise IndexOutOfRange(f"key event index {index} out of range")
    events[index] = KeyEvent(events[index].text, True)
    plot = replace(room.plot, key_events=tuple(events))
    return replace(room, plot=plot)


# ---------------------------------------------------------------------------
# Feedback and chat

def _one_line(text: str) -> str:
    return re.sub(r"\s*\n\s*", " ", text).strip()


def submit_feedback(room: Room, participant_id: str, item: FeedbackItem) -> Room:
    actor = room.participant(participant_id)
    if actor.role is not Role.PLAYER:
        raise NotPlayer(participant_id)
    if item.turn_index < 0 or item.turn_index >= len(room.transcript):
        raise InvalidTurnRef(f"no turn {item.turn_index}")
    if room.transcript[item.turn_index].kind is not TurnKind.GAME:
        raise InvalidTurnRef("feedback targets game turns")
    if item.label != FREE_FEEDBACK_LABEL and item.label not in room.feedback_prompts:
        raise InvalidFeedbackLabel(item.label)
    stamped = replace(
        item,
        author=actor.id,
        label=_one_line(item.label),
        text=_one_line(item.text) if item.text else None,
    )
    return replace(room, feedback_items=room.feedback_items + (stamped,))


CHAT_COMMAND = "/chat"


def chat(room: Room, participant_id: str, text: str) -> Room:
    """Out-of-band chat; never enters the transcript or any prompt."""
    actor = room.participant(participant_id)
    if text.startswith(CHAT_COMMAND):
        text = text[len(CHAT_COMMAND):]
    text = _one_line(text)
    if not text:
        return room
    return replace(room, chat_log=room.chat_log + (ChatMessage(actor.id, text),))


# ---------------------------------------------------------------------------
# Role-scoped views

@dataclass(frozen=True)
class RoomView:
    room_id: str
    participant_id: str
    role: Role
    opening_story: str
    participants: tuple[Participant, ...]
    transcript: tuple[Turn, ...]
    feedback_prompts: tuple[str, ...]
    feedback_items: tuple[FeedbackItem, ...]
    chat_log: tuple[ChatMessage, ...]
    accepting_player_turns: bool
    # designer-only; always None/empty in player views
    instructions: str | None = None
    plot: Plot | None = None
    npc_states: tuple[NpcSnapshot, ...] = ()
    npc_control: frozenset[str] = frozenset()
    pending_turn: PendingTurn | None = None
    prose_mention_warnings: frozenset[str] = frozenset()
    archive_summary: str | None = None


def view_for(room: Room, participant_id: str) -> RoomView:
    """Project the room for one participant.

    Designers get the raw transcript plus the control pane (hidden NPC
    states, plot with played flags, pending turn, the full feedback
    inbox). Players get the redacted transcript, the feedback prompts,
    and their own feedback; no plot, no hidden state, no pending turn.
    """
    actor = room.participant(participant_id)
    accepting = room.pending_turn is None and not room.generation_in_flight
    if actor.role is Role.DESIGNER:
        warnings = frozenset()
        if room.pending_turn is not None:
            warnings = prose_mentions(room.pending_turn.turn, room.npc_control)
        return RoomView(
            room_id=room.id,
            participant_id=actor.id,
            role=actor.role,
            opening_story=room.opening_story,
            participants=room.participants,
            transcript=room.transcript,
            feedback_prompts=room.feedback_prompts,
            feedback_items=room.feedback_items,
            chat_log=room.chat_log,
            accepting_player_turns=accepting,
            instructions=room.instructions,
            plot=room.plot,
            npc_states=extract_npcs(room.transcript),
            npc_control=room.npc_control,
            pending_turn=room.pending_turn,
            prose_mention_warnings=warnings,
            archive_summary=room.archive_summary,
        )
    return RoomView(
        room_id=room.id,
        participant_id=actor.id,
        role=actor.role,
        opening_story=room.opening_story,
        participants=room.participants,
        transcript=redact_transcript(room.transcript, Role.PLAYER, room.visibility),
        feedback_prompts=room.feedback_prompts,
        feedback_items=tuple(f for f in room.feedback_items if f.author == actor.id),
        chat_log=room.chat_log,
        accepting_player_turns=accepting,
    )


# ---------------------------------------------------------------------------
# Snapshot codec (.room)

def serialize_room(room: Room) -> str:
    items: list[WireItem] = [WireItem("room", room.id)]
    items.append(WireItem("archived_turns", str(room.archived_turn_count)))
    items.append(WireItem("round_robin", "true" if room.round_robin else "false"))
    items.append(WireItem("next_player_index", str(room.next_player_index)))
    for p in room.participants:
        items.append(WireItem("participant", f"{p.role.value} {p.id} {p.display_name}"))
    for npc in sorted(room.npc_control):
        items.append(WireItem("control", npc))
    played = [str(i) for i, e in enumerate(room.plot.key_events) if e.played]
    if played:
        items.append(WireItem("played_events", ",".join(played)))
    for prompt in room.feedback_prompts:
        items.append(WireItem("feedback_prompt", prompt))
    items.append(WireItem("opening_story", room.opening_story, True))
    items.append(WireItem("instructions", room.instructions, True))
    if room.archive_summary is not None:
        items.append(WireItem("summary", room.archive_summary, True))
    items.append(WireItem("plot", serialize_plot(room.plot), True))
    if room.pending_turn is not None:
        items.append(WireItem("pending_turn", serialize_turn(room.pending_turn.turn), True))
        for npc in sorted(room.pending_turn.controlled_ids):
            items.append(WireItem("pending_control", npc))
    items.append(WireItem("transcript", serialize_transcript(room.transcript), True))
    authors = [
        f"{i}={t.body.author}"
        for i, t in enumerate(room.transcript)
        if t.kind is TurnKind.PLAYER and t.body.author  # type: ignore[union-attr]
    ]
    if authors:
        items.append(WireItem("turn_authors", " ".join(authors)))
    for fb in room.feedback_items:
        payload = [f"turn: {fb.turn_index}", f"author: {fb.author}", f"label: {fb.label}"]
        if fb.text:
            payload.append(f"text: {fb.text}")
        items.append(WireItem("feedback", "\n".join(payload), True))
    for msg in room.chat_log:
        items.append(WireItem("chat", f"author: {msg.author}\ntext: {msg.text}", True))
    return render_wire(items)


def parse_room(text: str) -> Room:
    items = parse_wire(text)
    participants = []
    for raw in all_of(items, "participant"):
        pieces = raw.split(" ", 2)
        role_raw, pid = pieces[0], pieces[1]
        name = pieces[2] if len(pieces) > 2 else pid
        participants.append(Participant(pid, name, Role(role_raw)))

    plot = parse_plot(require(items, "plot"))
    played_raw = first(items, "played_events", "")
    if played_raw:
        played = {int(x) for x in played_raw.split(",")}
        events = tuple(
            KeyEvent(e.text, i in played) for i, e in enumerate(plot.key_events)
        )
        plot = replace(plot, key_events=events)

    turns, _ = parse_transcript(require(items, "transcript"))
    authors_raw = first(items, "turn_authors", "")
    if authors_raw:
        for pair in authors_raw.split(" "):
            idx_raw, _, author = pair.partition("=")
            idx = int(idx_raw)
            if 0 <= idx < len(turns) and turns[idx].kind is TurnKind.PLAYER:
                turns[idx] = with_author(turns[idx], author)

    pending = None
    pending_raw = first(items, "pending_turn")
    if pending_raw is not None:
        pending_turns, _ = parse_transcript(pending_raw)
        if pending_turns:
            pending = PendingTurn(
                pending_turns[0],
                frozenset(all_of(items, "pending_control")),
            )

    feedback = []
    for raw in all_of(items, "feedback"):
        fields = parse_wire(raw)
        feedback.append(
            FeedbackItem(
                turn_index=int(require(fields, "turn")),
                author=require(fields, "author"),
                label=require(fields, "label"),
                text=first(fields, "text"),
            )
        )
    chat_log = []
    for raw in all_of(items, "chat"):
        fields = parse_wire(raw)
        chat_log.append(ChatMessage(require(fields, "author"), require(fields, "text")))

    return Room(
        id=require(items, "room"),
        opening_story=require(items, "opening_story"),
        instructions=require(items, "instructions"),
        plot=plot,
        transcript=tuple(turns),
        participants=tuple(participants),
        npc_control=frozenset(all_of(items, "control")),
        pending_turn=pending,
        feedback_prompts=tuple(all_of(items, "feedback_prompt")),
        feedback_items=tuple(feedback),
        chat_log=tuple(chat_log),
        archive_summary=first(items, "summary"),
        archived_turn_count=int(first(items, "archived_turns", "0") or 0),
        round_robin=first(items, "round_robin") == "true",
        next_player_index=int(first(items, "next_player_index", "0") or 0),
    )
