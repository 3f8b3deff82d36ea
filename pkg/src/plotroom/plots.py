"""Plots: structured distillations of a story, plus the NPC roster logic.

A plot file looks like:

    title: Shadows of Betrayal

    Plot summary:
    In Shadows of Betrayal, players take on the role of ...

    Key Events:
    1. The player opens the door to their neighbor, ...
    2. The neighbor reveals her backstory ...

    NPCs:
    [ID] Neighbor
    [Backstory] She has been living a life of secrecy ...

Key events are stored unnumbered and re-numbered on serialization, so
inserting or deleting an event never perturbs its neighbours. Played
flags live only in a game room's working copy; serialized plots omit
them so a plot file can seed any number of sessions.

The NPC roster is never produced by the language model: it is a
deterministic fold over the transcript's ``[ID]`` blocks where, per NPC
and per tag, the value written last wins.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .transcript import GameTurn, Turn, TurnKind, canonical_tag, tag_key


class PlotParseFailure(ValueError):
    pass


@dataclass(frozen=True)
class KeyEvent:
    text: str
    played: bool = False


@dataclass(frozen=True)
class NpcSnapshot:
    npc_id: str
    latest: dict[str, str] = field(default_factory=dict)  # canonical tag -> value


@dataclass(frozen=True)
class Plot:
    title: str
    summary: str
    key_events: tuple[KeyEvent, ...]
    npc_roster: tuple[NpcSnapshot, ...] = ()

    def is_valid(self) -> bool:
        return bool(self.title.strip()) and bool(self.key_events)

    def with_unplayed_events(self) -> "Plot":
        return replace(
            self, key_events=tuple(KeyEvent(e.text, False) for e in self.key_events)
        )


# ---------------------------------------------------------------------------
# NPC roster extraction

def extend_roster(base: Sequence[NpcSnapshot], turns: Iterable[Turn]) -> tuple[NpcSnapshot, ...]:
    """Fold a segment of turns onto an existing roster, last write wins."""
    order: list[str] = []  # lookup keys in first-appearance order
    names: dict[str, str] = {}  # lookup key -> first-seen display casing
    latest: dict[str, dict[str, tuple[str, str]]] = {}  # npc key -> tag key -> (name, value)

    def fold(npc_id: str, entries: Iterable[tuple[str, str]]) -> None:
        npc_key = npc_id.strip().lower()
        if not npc_key:
            return
        if npc_key not in names:
            names[npc_key] = npc_id.strip()
            order.append(npc_key)
            latest[npc_key] = {}
        for name, value in entries:
            latest[npc_key][tag_key(name)] = (canonical_tag(name), value)

    for snap in base:
        fold(snap.npc_id, list(snap.latest.items()))
    for turn in turns:
        if turn.kind is not TurnKind.GAME:
            continue
        body = turn.body
        assert isinstance(body, GameTurn)
        for block in body.npc_blocks:
            fold(block.npc_id, ((e.name, e.value) for e in block.entries))

    return tuple(
        NpcSnapshot(names[k], {name: value for name, value in latest[k].values()})
        for k in order
    )


def extract_npcs(turns: Iterable[Turn]) -> tuple[NpcSnapshot, ...]:
    """One snapshot per NPC that appeared, ordered by first appearance."""
    return extend_roster((), turns)


def roster_ids(roster: Iterable[NpcSnapshot]) -> set[str]:
    return {snap.npc_id.strip().lower() for snap in roster}


# ---------------------------------------------------------------------------
# Plot codec

TITLE_LABEL = "title:"
SUMMARY_LABEL = "Plot summary:"
EVENTS_LABEL = "Key Events:"
NPCS_LABEL = "NPCs:"

_EVENT_RE = re.compile(r"^\s*\d+[.)]\s*(.*)$")
_ID_RE = re.compile(r"^\[ID\]\s*(.*?)\s*:?\s*$", re.IGNORECASE)
_TAG_RE = re.compile(r"^\[([^\[\]]+)\](?: ?)(.*)$")


def serialize_plot(plot: Plot) -> str:
    parts = [f"{TITLE_LABEL} {plot.title}".rstrip()]
    parts.append("")
    parts.append(SUMMARY_LABEL)
    parts.append(plot.summary)
    parts.append("")
    parts.append(EVENTS_LABEL)
    for i, event in enumerate(plot.key_events, 1):
        parts.append(f"{i}. {event.text}")
    parts.append("")
    parts.append(NPCS_LABEL)
    for j, snap in enumerate(plot.npc_roster):
        if j:
            parts.append("")
        parts.append(f"[ID] {snap.npc_id}")
        for name, value in snap.latest.items():
            parts.append(f"{name} {value}" if value else name)
    return "\n".join(parts).rstrip("\n")


def _label_at(line: str, label: str) -> str | None:
    """Case-insensitive label match; returns the rest of the line."""
    if line.lower().startswith(label.lower()):
        return line[len(label):].strip()
    return None


def parse_plot(text: str) -> Plot:
    """Parse plot text. Section headers are matched case-insensitively; the
    NPCs section is optional (completions usually lack it)."""
    lines = text.replace("\r\n", "\n").split("\n")

    title: str | None = None
    summary_lines: list[str] = []
    events: list[str] = []
    roster: list[tuple[str, dict[str, str]]] = []
    section = "preamble"

    for line in lines:
        rest = _label_at(line, TITLE_LABEL)
        if rest is not None and title is None and section in ("preamble",):
            title = rest
            section = "title"
            continue
        rest = _label_at(line, SUMMARY_LABEL)
        if rest is None:
            rest = _label_at(line, "Summary:")
        if rest is not None and section in ("preamble", "title"):
            section = "summary"
            if rest:
                summary_lines.append(rest)
            continue
        rest = _label_at(line, EVENTS_LABEL)
        if rest is None:
            rest = _label_at(line, "Key events in order:")
        if rest is not None and section in ("preamble", "title", "summary"):
            section = "events"
            continue
        if _label_at(line, NPCS_LABEL) is not None and section != "npcs":
            section = "npcs"
            continue

        if section == "summary":
            summary_lines.append(line)
        elif section == "events":
            m = _EVENT_RE.match(line)
            if m:
                events.append(m.group(1).strip())
            elif line.strip() and events:
                # wrapped continuation of the previous event
                events[-1] = events[-1] + "\n" + line.strip()
        elif section == "npcs":
            m = _ID_RE.match(line)
            if m:
                npc_id = m.group(1)
                if npc_id:
                    roster.append((npc_id, {}))
                continue
            m = _TAG_RE.match(line)
            if m and roster:
                roster[-1][1][canonical_tag(m.group(1))] = m.group(2).strip()

    if title is None or not title.strip():
        raise PlotParseFailure("missing title section")
    if section == "preamble" or (not summary_lines and not events):
        raise PlotParseFailure("missing plot sections")
    if not events:
        raise PlotParseFailure("missing Key Events section")

    summary = "\n".join(summary_lines).strip()
    if not summary:
        raise PlotParseFailure("missing Plot summary section")

    return Plot(
        title=title.strip(),
        summary=summary,
        key_events=tuple(KeyEvent(e) for e in events if e),
        npc_roster=tuple(NpcSnapshot(npc_id, tags) for npc_id, tags in roster),
    )
