"""Design-room story state: free editing, turn generation, context budget.

A story document is an immutable value; every operation returns a new
document. Editing addresses the live window only: once turns are
archived into the rolling summary they are frozen.

The context budget matches the backbone model's limit: once the live
turns exceed ``max_chars`` (40,000 characters of canonical text), all but
the last ``keep_last`` (10) turns are folded into the archive summary via
one summarization call covering the previous summary plus the moved
turns. The whole fold is a single atomic step: if the summarizer fails,
the original document is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from . import prompts
from .providers import EmptyCompletion
from .summarize import summarize_history
from .transcript import (
    Diagnostic,
    Turn,
    TurnKind,
    parse_transcript,
    serialize_transcript,
)


class EditError(Exception):
    pass


class IndexOutOfRange(EditError):
    pass


class EditsArchivedContent(EditError):
    """Reserved for callers that map global turn numbers: turns folded into
    the archive are frozen and cannot be addressed by edits."""


class TurnParseFailure(Exception):
    """The completion could not be shaped into a turn of the requested kind."""


@dataclass(frozen=True)
class ContextBudget:
    max_chars: int = 40_000
    keep_last: int = 10


DEFAULT_BUDGET = ContextBudget()


@dataclass(frozen=True)
class StoryDocument:
    opening_story: str
    instructions: str
    live_turns: tuple[Turn, ...] = ()
    archive_summary: str | None = None
    archived_turn_count: int = 0


def live_char_len(doc: StoryDocument) -> int:
    return sum(t.raw_char_len for t in doc.live_turns)


# ---------------------------------------------------------------------------
# Edits

@dataclass(frozen=True)
class Append:
    turn: Turn


@dataclass(frozen=True)
class Replace:
    index: int
    turn: Turn


@dataclass(frozen=True)
class Delete:
    index: int


@dataclass(frozen=True)
class TruncateAfter:
    index: int


Edit = Append | Replace | Delete | TruncateAfter


def _check_index(doc: StoryDocument, index: int) -> None:
    if index < 0 or index >= len(doc.live_turns):
        raise IndexOutOfRange(
            f"turn index {index} outside live window of {len(doc.live_turns)}"
        )


def apply_edit(doc: StoryDocument, edit: Edit) -> StoryDocument:
    turns = list(doc.live_turns)
    if isinstance(edit, Append):
        turns.append(edit.turn)
    elif isinstance(edit, Replace):
        _check_index(doc, edit.index)
        turns[edit.index] = edit.turn
    elif isinstance(edit, Delete):
        _check_index(doc, edit.index)
        del turns[edit.index]
    elif isinstance(edit, TruncateAfter):
        _check_index(doc, edit.index)
        del turns[edit.index + 1:]
    else:
        raise TypeError(f"unknown edit {edit!r}")
    return replace(doc, live_turns=tuple(turns))


# ---------------------------------------------------------------------------
# Generation

def _shape_completion(kind: TurnKind, completion: str, partial: str | None) -> Turn:
    text = completion if partial is None else partial.rstrip() + completion
    header = "Game:" if kind is TurnKind.GAME else "Player:"
    probe = text.lstrip().lower()
    if not (probe.startswith("game:") or probe.startswith("player:")):
        text = header + "\n" + text
    turns, _diags = parse_transcript(text)
    if not turns:
        raise TurnParseFailure("completion contained no turn content")
    turn = turns[0]
    if turn.kind is not kind:
        raise TurnParseFailure(
            f"requested a {kind.value} turn but the completion parsed as {turn.kind.value}"
        )
    return turn


def generate_next_turn(
    doc: StoryDocument,
    kind: TurnKind,
    provider,
    partial: str | None = None,
) -> Turn:
    """Ask the provider for the next turn; the document is not mutated.

    ``partial`` is in-progress text for the requested turn (header plus
    some tag lines); the completion continues it. When the completion
    comes back headerless (the usual case after a bare header cue), the
    requested kind's header is prepended before parsing.
    """
    if not doc.opening_story.strip() or not doc.instructions.strip():
        raise ValueError("document needs an opening story and instructions before generating")
    request = prompts.build_design_next_turn(doc, kind, partial)
    completion = provider.complete(request)
    if not completion.strip():
        raise EmptyCompletion("provider returned an empty completion")
    return _shape_completion(kind, completion, partial)


# ---------------------------------------------------------------------------
# Archiving

def archive_turns(
    turns: Sequence[Turn],
    summary: str | None,
    opening_story: str,
    instructions: str,
    provider,
    budget: ContextBudget = DEFAULT_BUDGET,
) -> tuple[tuple[Turn, ...], str | None, int]:
    """Shared budget policy: returns (kept turns, summary, moved count)."""
    total = sum(t.raw_char_len for t in turns)
    if total <= budget.max_chars or len(turns) <= budget.keep_last:
        return tuple(turns), summary, 0
    moved = list(turns[:-budget.keep_last])
    kept = tuple(turns[-budget.keep_last:])
    new_summary = summarize_history(summary, moved, opening_story, instructions, provider)
    return kept, new_summary, len(moved)


def maybe_archive(
    doc: StoryDocument, provider, budget: ContextBudget = DEFAULT_BUDGET
) -> StoryDocument:
    """Fold old turns into the summary once the live window exceeds the
    character budget. No-op below the budget or at ``keep_last`` turns."""
    kept, summary, moved = archive_turns(
        doc.live_turns, doc.archive_summary, doc.opening_story, doc.instructions,
        provider, budget,
    )
    if not moved:
        return doc
    return replace(
        doc,
        live_turns=kept,
        archive_summary=summary,
        archived_turn_count=doc.archived_turn_count + moved,
    )


# ---------------------------------------------------------------------------
# Story file codec

OPENING_LABEL = "Opening story:"
INSTRUCTIONS_LABEL = "Instructions:"
ARCHIVED_LABEL = "Archived turns:"
SUMMARY_LABEL = "Summary of what happened before:"

_HEADER_LABELS = (OPENING_LABEL, INSTRUCTIONS_LABEL, ARCHIVED_LABEL, SUMMARY_LABEL)


def serialize_story(doc: StoryDocument) -> str:
    parts = [f"{OPENING_LABEL} {doc.opening_story}".rstrip()]
    parts.append("")
    parts.append(f"{INSTRUCTIONS_LABEL} {doc.instructions}".rstrip())
    if doc.archive_summary is not None:
        parts.append("")
        parts.append(f"{ARCHIVED_LABEL} {doc.archived_turn_count}")
        parts.append(f"{SUMMARY_LABEL} {doc.archive_summary}".rstrip())
    if doc.live_turns:
        parts.append("")
        parts.append(serialize_transcript(doc.live_turns))
    return "\n".join(parts) + "\n"


def parse_story(text: str) -> tuple[StoryDocument, list[Diagnostic]]:
    """Parse a ``.story`` file: labeled header blocks, then the transcript."""
    lines = text.replace("\r\n", "\n").split("\n")
    sections: dict[str, list[str]] = {}
    active: str | None = None
    transcript_start: int | None = None

    for i, line in enumerate(lines):
        low = line.lower()
        if low.startswith("game:") or low.startswith("player:"):
            transcript_start = i
            break
        matched = False
        for label in _HEADER_LABELS:
            if low.startswith(label.lower()):
                sections[label] = [line[len(label):].strip()]
                active = label
                matched = True
                break
        if matched:
            continue
        if active is not None:
            sections[active].append(line)

    def section(label: str) -> str | None:
        if label not in sections:
            return None
        return "\n".join(sections[label]).strip()

    turns: list[Turn] = []
    diags: list[Diagnostic] = []
    if transcript_start is not None:
        turns, diags = parse_transcript("\n".join(lines[transcript_start:]))

    summary = section(SUMMARY_LABEL) or None
    archived_raw = section(ARCHIVED_LABEL)
    archived = int(archived_raw) if archived_raw else (1 if summary else 0)
    doc = StoryDocument(
        opening_story=section(OPENING_LABEL) or "",
        instructions=section(INSTRUCTIONS_LABEL) or "",
        live_turns=tuple(turns),
        archive_summary=summary,
        archived_turn_count=archived if summary else 0,
    )
    return doc, diags
