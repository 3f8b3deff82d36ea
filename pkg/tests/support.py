"""Seeded random builders shared by the property-style tests.

Generated content stays inside the well-formed subset of the grammar:
values never contain blank lines, and continuation lines never start
with a reserved prefix, so parse/serialize roundtrips are exact.
"""

from __future__ import annotations

import random

from plotroom.plots import KeyEvent, NpcSnapshot, Plot
from plotroom.transcript import (
    NpcBlock,
    TagEntry,
    Turn,
    canonical_tag,
    game_turn,
    player_turn,
)

WORDS = (
    "the quick brown fox jumps over a lazy dog while stone river night "
    "whisper shadow door trust danger neighbor city rain corridor lantern "
    "key letter promise"
).split()

NPC_NAMES = ["Neighbor", "Watcher", "Old Sam", "Courier", "Brother Aldric"]
HIDDEN_TAGS = ["Backstory", "Persona", "Mood", "Thought", "Facial Expression", "Voice Emotion"]
CUSTOM_TAGS = ["Stance", "Scent", "Secret Goal"]


def rand_text(rng: random.Random, lo: int = 2, hi: int = 9, mark: str = "") -> str:
    words = [rng.choice(WORDS) for _ in range(rng.randint(lo, hi))]
    if mark:
        words.insert(0, mark)
    return " ".join(words)


def rand_value(rng: random.Random, mark: str = "", multiline: bool = True) -> str:
    value = rand_text(rng, mark=mark)
    if multiline and rng.random() < 0.15:
        value += "\n" + rand_text(rng)
    return value


def rand_block(rng: random.Random, hidden_mark: str = "") -> NpcBlock:
    pool = list(HIDDEN_TAGS)
    chosen = rng.sample(pool, k=rng.randint(0, 3))
    if rng.random() < 0.85:
        chosen += ["Action", "Words"]
    if rng.random() < 0.2:
        chosen.append(rng.choice(CUSTOM_TAGS))
    entries = []
    seen = set()
    for tag in chosen:
        if tag.lower() in seen:
            continue
        seen.add(tag.lower())
        mark = hidden_mark if tag not in ("Action", "Words") else ""
        entries.append(TagEntry(canonical_tag(tag), rand_value(rng, mark=mark)))
    return NpcBlock(rng.choice(NPC_NAMES), tuple(entries))


def rand_game_turn(rng: random.Random, hidden_mark: str = "") -> Turn:
    scene = rand_value(rng) if rng.random() < 0.85 else None
    blocks = tuple(rand_block(rng, hidden_mark) for _ in range(rng.randint(0, 2)))
    freeform = tuple(rand_text(rng) for _ in range(1 if rng.random() < 0.1 else 0))
    return game_turn(scene, blocks, freeform)


def rand_player_turn(rng: random.Random, hidden_mark: str = "") -> Turn:
    entries: list[tuple[str, str]] = []
    if rng.random() < 0.7:
        entries.append(("Action", rand_value(rng)))
    if rng.random() < 0.9:
        entries.append(("Words", rand_value(rng)))
    if rng.random() < 0.1:
        entries.append((rng.choice(CUSTOM_TAGS), rand_value(rng, mark=hidden_mark)))
    return player_turn(entries)


def rand_turn(rng: random.Random, hidden_mark: str = "") -> Turn:
    if rng.random() < 0.5:
        return rand_game_turn(rng, hidden_mark)
    return rand_player_turn(rng, hidden_mark)


def rand_transcript(rng: random.Random, max_turns: int = 8, hidden_mark: str = "") -> list[Turn]:
    turns = [rand_turn(rng, hidden_mark) for _ in range(rng.randint(0, max_turns))]
    while turns and turns[-1].is_empty():
        turns[-1] = rand_game_turn(rng, hidden_mark)
        if turns[-1].is_empty():
            turns.pop()
    return turns


def rand_plot(rng: random.Random) -> Plot:
    events = tuple(KeyEvent(rand_text(rng, 4, 12)) for _ in range(rng.randint(1, 6)))
    roster = []
    for name in rng.sample(NPC_NAMES, k=rng.randint(0, 3)):
        tags = {
            canonical_tag(t): rand_text(rng)
            for t in rng.sample(HIDDEN_TAGS, k=rng.randint(1, 3))
        }
        roster.append(NpcSnapshot(name, tags))
    return Plot(
        title=rand_text(rng, 2, 5).title(),
        summary=rand_text(rng, 10, 30),
        key_events=events,
        npc_roster=tuple(roster),
    )
