"""Deterministic assembly of the four completion-request shapes.

Every request that embeds story text goes through the canonical
transcript/plot serializers, so there is exactly one formatting path.
Optional sections (archive summary, prior plot, partial turn) are elided
entirely when absent; no placeholder text is ever emitted.

Next-turn requests carry the stop sequences ["Player:", "Game:"] and a
1,000-token cap; summarization and plot generation run uncapped by stops
with a 2,000-token cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .plots import Plot, serialize_plot
from .transcript import Turn, TurnKind, serialize_transcript

if TYPE_CHECKING:  # pragma: no cover
    from .story import StoryDocument
    from .rooms import Room

TURN_STOPS = ("Player:", "Game:")
NEXT_TURN_MAX_TOKENS = 1000
SUMMARY_MAX_TOKENS = 2000
PLOT_MAX_TOKENS = 2000

SUMMARY_LINE_LABEL = "Summary of what happened before:"
PLOT_GUIDE_LABEL = "Use the following plot to guide the game:"
PRIOR_PLOTS_LABEL = "Game plot from previous segments:"
WHAT_NEXT_LABEL = "What happened next:"
STORY_OPEN = "<story>"
STORY_CLOSE = "</story>"

PLOT_INSTRUCTION = (
    "Given the game plot from previous segments and this segment of the game story, "
    "Give me a detailed plot of the game that can be used for future when other "
    "players play this game."
    "Game plot must have the following sections: Title, Plot Summary, Key events in order.\n"
    "generate game plot grounded to the given story:"
)

SUMMARY_INSTRUCTION = (
    "Give me a detailed summary of what happened in the story from the beginning:"
)


@dataclass(frozen=True)
class CompletionRequest:
    system_message: str | None
    user_messages: tuple[str, ...]
    stop_sequences: tuple[str, ...] = ()
    max_tokens: int = NEXT_TURN_MAX_TOKENS


def _story_system(opening_story: str, instructions: str) -> str:
    return f"Opening story: {opening_story}\nInstructions: {instructions}"


def _blocks(*parts: str | None) -> str:
    return "\n\n".join(p for p in parts if p)


def _header_for(kind: TurnKind) -> str:
    return "Game:" if kind is TurnKind.GAME else "Player:"


def build_design_next_turn(
    doc: "StoryDocument", kind: TurnKind, partial: str | None = None
) -> CompletionRequest:
    """Next-turn request for the authoring window.

    The user message is the archive summary (when present), the live
    turns, and then either the in-progress turn text supplied by the
    designer or a bare header cueing which side speaks next.
    """
    summary = None
    if doc.archive_summary:
        summary = f"{SUMMARY_LINE_LABEL} {doc.archive_summary}"
    turns = serialize_transcript(doc.live_turns) if doc.live_turns else None
    tail = partial.rstrip() if partial else _header_for(kind)
    return CompletionRequest(
        system_message=_story_system(doc.opening_story, doc.instructions),
        user_messages=(_blocks(summary, turns, tail),),
        stop_sequences=TURN_STOPS,
        max_tokens=NEXT_TURN_MAX_TOKENS,
    )


def build_game_room_next_turn(room: "Room") -> CompletionRequest:
    """Next game-turn request for a live session; the plot rides in the
    system message and the user message ends with a bare ``Game:`` cue."""
    system = "\n".join(
        (
            _story_system(room.opening_story, room.instructions),
            PLOT_GUIDE_LABEL,
            serialize_plot(room.plot),
        )
    )
    summary = None
    if room.archive_summary:
        summary = f"{SUMMARY_LINE_LABEL} {room.archive_summary}"
    turns = serialize_transcript(room.transcript) if room.transcript else None
    return CompletionRequest(
        system_message=system,
        user_messages=(_blocks(summary, turns, "Game:"),),
        stop_sequences=TURN_STOPS,
        max_tokens=NEXT_TURN_MAX_TOKENS,
    )


def build_summary_prompt(
    prev_summary: str | None,
    segment: Sequence[Turn],
    opening_story: str,
    instructions: str,
) -> CompletionRequest:
    lines = [STORY_OPEN]
    lines.append(f"Opening story: {opening_story}")
    lines.append(f"Instructions: {instructions}")
    if prev_summary:
        lines.append(f"{SUMMARY_LINE_LABEL} {prev_summary}")
    lines.append(WHAT_NEXT_LABEL)
    lines.append(serialize_transcript(segment))
    lines.append(STORY_CLOSE)
    lines.append(SUMMARY_INSTRUCTION)
    return CompletionRequest(
        system_message=None,
        user_messages=("\n".join(lines),),
        stop_sequences=(),
        max_tokens=SUMMARY_MAX_TOKENS,
    )


def build_plot_prompt(prior_plot: Plot | None, segment: Sequence[Turn]) -> CompletionRequest:
    messages: list[str] = []
    if prior_plot is not None:
        messages.append(f"{PRIOR_PLOTS_LABEL}\n{serialize_plot(prior_plot)}")
    messages.append(serialize_transcript(segment))
    messages.append(PLOT_INSTRUCTION)
    return CompletionRequest(
        system_message=None,
        user_messages=tuple(messages),
        stop_sequences=(),
        max_tokens=PLOT_MAX_TOKENS,
    )


def render_request(request: CompletionRequest) -> str:
    """Stable plain-text rendering used by the golden-fixture tests and
    request logging."""
    parts: list[str] = ["== system =="]
    parts.append(request.system_message if request.system_message is not None else "(none)")
    for i, message in enumerate(request.user_messages, 1):
        parts.append(f"== user {i} ==")
        parts.append(message)
    parts.append("== stop ==")
    parts.append(", ".join(request.stop_sequences) if request.stop_sequences else "(none)")
    parts.append("== max_tokens ==")
    parts.append(str(request.max_tokens))
    return "\n".join(parts) + "\n"
