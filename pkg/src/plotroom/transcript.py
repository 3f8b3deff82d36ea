"""Tag-structured transcript grammar: parser, canonical serializer, redaction.

A transcript is a sequence of turns delimited by ``Game:`` / ``Player:``
header lines. Inside a game turn:

    Game:
    Scene: You are sitting in your living room.
    [ID] Neighbor:
    [Mood] Urgent and a little bit scared.
    [Words] "Please, ..."

Inside a player turn only tag lines appear ([Action] and [Words] by
default). A line that does not start with ``[``, ``Scene:``, ``Game:`` or
``Player:`` continues the previous value, so tag values may span lines.
Lines that cannot be attributed to any field are kept verbatim in the
turn's ``freeform`` list so lenient parsing never drops content.

Canonical form (what :func:`serialize_turn` emits): one line per element,
a single blank line between turns, tag names in canonical casing, values
trimmed. ``parse -> serialize`` is the identity on canonical text.

A trailing header with no content (``Player:`` at the very end of a
document) is a cue for whose turn comes next, not a turn; the parser
drops it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Union


class TurnKind(Enum):
    GAME = "game"
    PLAYER = "player"


class Role(Enum):
    DESIGNER = "designer"
    PLAYER = "player"


class Visibility(Enum):
    PLAYER_VISIBLE = "player_visible"
    HIDDEN = "hidden"


class Severity(Enum):
    WARNING = "warning"
    ERROR = "error"


# Diagnostic codes
ORPHAN_CONTENT = "orphan-content"
UNTERMINATED_TAG = "unterminated-tag"
DUPLICATE_TAG = "duplicate-tag-in-block"
EMPTY_NPC_ID = "empty-npc-id"
MALFORMED_TAG = "malformed-tag"
TAG_OUTSIDE_BLOCK = "tag-outside-block"
DUPLICATE_SCENE = "duplicate-scene"
SCENE_IN_PLAYER_TURN = "scene-in-player-turn"
PLAYER_TAG = "unexpected-player-tag"
UNSAFE_VALUE = "value-breaks-roundtrip"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: int  # 1-based; 0 when not tied to source text
    severity: Severity = Severity.ERROR

    def is_error(self) -> bool:
        return self.severity is Severity.ERROR


class TranscriptError(ValueError):
    """Strict parse failed; carries the full diagnostic list."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0]
        super().__init__(f"line {first.line}: {first.message}")


class UnknownTagVisibility(LookupError):
    """A tag has no visibility mapping and the default rule is disabled."""


# Canonical casing for the built-in tag set. Custom tags keep the casing
# they were written with; all comparisons are case-insensitive.
_BUILTIN_TAGS = {
    "id": "[ID]",
    "action": "[Action]",
    "words": "[Words]",
    "backstory": "[Backstory]",
    "persona": "[Persona]",
    "mood": "[Mood]",
    "thought": "[Thought]",
    "facial expression": "[Facial Expression]",
    "voice emotion": "[Voice Emotion]",
}

SCENE_KEY = "scene"
ID_KEY = "id"

PLAYER_TAG_KEYS = frozenset({"action", "words"})

_HIDDEN_BUILTINS = frozenset(
    {"backstory", "persona", "mood", "thought", "facial expression", "voice emotion"}
)
_VISIBLE_BUILTINS = frozenset({SCENE_KEY, ID_KEY, "action", "words"})


def tag_key(name: str) -> str:
    """Case-insensitive lookup key for a tag name, brackets stripped."""
    return name.strip().strip("[]").strip().lower()


def canonical_tag(name: str) -> str:
    """Bracketed canonical form: built-ins get canonical casing."""
    key = tag_key(name)
    builtin = _BUILTIN_TAGS.get(key)
    if builtin is not None:
        return builtin
    return "[" + name.strip().strip("[]").strip() + "]"


@dataclass(frozen=True)
class VisibilityMap:
    """Per-room tag visibility. Unknown tags fall back to Hidden unless the
    default rule is disabled, in which case lookups raise."""

    overrides: Mapping[str, Visibility] = field(default_factory=dict)
    default_to_hidden: bool = True

    @classmethod
    def default(cls) -> "VisibilityMap":
        return cls()

    def lookup(self, name: str) -> Visibility:
        key = tag_key(name)
        normalized = {tag_key(k): v for k, v in self.overrides.items()}
        if key in normalized:
            return normalized[key]
        if key in _VISIBLE_BUILTINS:
            return Visibility.PLAYER_VISIBLE
        if key in _HIDDEN_BUILTINS:
            return Visibility.HIDDEN
        if self.default_to_hidden:
            return Visibility.HIDDEN
        raise UnknownTagVisibility(name)

    def is_visible(self, name: str) -> bool:
        return self.lookup(name) is Visibility.PLAYER_VISIBLE


@dataclass(frozen=True)
class TagEntry:
    name: str  # bracketed, canonical casing for built-ins, e.g. "[Mood]"
    value: str  # trimmed; may contain interior newlines

    @property
    def key(self) -> str:
        return tag_key(self.name)


@dataclass(frozen=True)
class NpcBlock:
    npc_id: str
    entries: tuple[TagEntry, ...] = ()

    def get(self, name: str) -> str | None:
        key = tag_key(name)
        for entry in self.entries:
            if entry.key == key:
                return entry.value
        return None


@dataclass(frozen=True)
class GameTurn:
    scene: str | None = None
    npc_blocks: tuple[NpcBlock, ...] = ()
    freeform: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlayerTurn:
    author: str | None = None
    entries: tuple[TagEntry, ...] = ()
    # Not part of the happy-path grammar, but lenient parsing must keep
    # unattributable lines somewhere.
    freeform: tuple[str, ...] = ()

    def get(self, name: str) -> str | None:
        key = tag_key(name)
        for entry in self.entries:
            if entry.key == key:
                return entry.value
        return None


@dataclass(frozen=True)
class Turn:
    kind: TurnKind
    body: Union[GameTurn, PlayerTurn]

    def __post_init__(self):
        expected = GameTurn if self.kind is TurnKind.GAME else PlayerTurn
        if not isinstance(self.body, expected):
            raise TypeError(f"{self.kind.value} turn with {type(self.body).__name__} body")

    @cached_property
    def raw_char_len(self) -> int:
        return len(serialize_turn(self))

    def is_empty(self) -> bool:
        b = self.body
        if isinstance(b, GameTurn):
            return b.scene is None and not b.npc_blocks and not b.freeform
        return not b.entries and not b.freeform


def game_turn(
    scene: str | None = None,
    blocks: Iterable[NpcBlock] = (),
    freeform: Iterable[str] = (),
) -> Turn:
    return Turn(TurnKind.GAME, GameTurn(scene, tuple(blocks), tuple(freeform)))


def player_turn(
    entries: Iterable[tuple[str, str]] = (),
    author: str | None = None,
    freeform: Iterable[str] = (),
) -> Turn:
    built = tuple(TagEntry(canonical_tag(n), v) for n, v in entries)
    return Turn(TurnKind.PLAYER, PlayerTurn(author, built, tuple(freeform)))


def entry(name: str, value: str) -> TagEntry:
    return TagEntry(canonical_tag(name), value)


# ---------------------------------------------------------------------------
# Serialization

GAME_HEADER = "Game:"
PLAYER_HEADER = "Player:"
TURN_SEPARATOR = "\n\n"


def _entry_line(e: TagEntry) -> str:
    return f"{e.name} {e.value}" if e.value else e.name


def serialize_turn(turn: Turn) -> str:
    lines: list[str] = []
    if turn.kind is TurnKind.GAME:
        body = turn.body
        assert isinstance(body, GameTurn)
        lines.append(GAME_HEADER)
        lines.extend(body.freeform)
        if body.scene is not None:
            lines.append(f"Scene: {body.scene}" if body.scene else "Scene:")
        for block in body.npc_blocks:
            lines.append(f"[ID] {block.npc_id}:")
            lines.extend(_entry_line(e) for e in block.entries)
    else:
        body = turn.body
        assert isinstance(body, PlayerTurn)
        lines.append(PLAYER_HEADER)
        lines.extend(body.freeform)
        lines.extend(_entry_line(e) for e in body.entries)
    return "\n".join(lines)


def serialize_transcript(turns: Iterable[Turn]) -> str:
    return TURN_SEPARATOR.join(serialize_turn(t) for t in turns)


# ---------------------------------------------------------------------------
# Parsing

_HEADER_RE = re.compile(r"^(game|player):\s*(.*)$", re.IGNORECASE)
_SCENE_RE = re.compile(r"^scene:(?: ?)(.*)$", re.IGNORECASE)
_TAG_RE = re.compile(r"^\[([^\[\]]+)\](?: ?)(.*)$")


class _EntryBuilder:
    __slots__ = ("name", "parts", "line", "continued")

    def __init__(self, name: str, first: str, line: int):
        self.name = name
        self.parts = [first]
        self.line = line
        self.continued = False

    def add(self, text: str) -> None:
        self.parts.append(text)
        self.continued = True

    def value(self) -> str:
        return "\n".join(self.parts).strip()


class _TurnBuilder:
    def __init__(self, kind: TurnKind, line: int):
        self.kind = kind
        self.line = line
        self.scene_parts: list[str] | None = None
        self.blocks: list[tuple[str, list[_EntryBuilder]]] = []
        self.entries: list[_EntryBuilder] = []  # player turns
        self.freeform: list[str] = []
        self.sink: object = None  # None | "scene" | _EntryBuilder

    def finish(self, diags: list[Diagnostic]) -> Turn:
        for builder in self._all_entries():
            if not builder.value() and not builder.continued:
                diags.append(
                    Diagnostic(
                        UNTERMINATED_TAG,
                        f"tag {builder.name} has no value",
                        builder.line,
                    )
                )
        if self.kind is TurnKind.GAME:
            scene = "\n".join(self.scene_parts).strip() if self.scene_parts is not None else None
            blocks = tuple(
                NpcBlock(npc_id, tuple(TagEntry(b.name, b.value()) for b in entries))
                for npc_id, entries in self.blocks
            )
            return Turn(TurnKind.GAME, GameTurn(scene, blocks, tuple(self.freeform)))
        built = tuple(TagEntry(b.name, b.value()) for b in self.entries)
        return Turn(TurnKind.PLAYER, PlayerTurn(None, built, tuple(self.freeform)))

    def _all_entries(self) -> list[_EntryBuilder]:
        out = list(self.entries)
        for _, entries in self.blocks:
            out.extend(entries)
        return out


def parse_transcript(text: str, strict: bool = False) -> tuple[list[Turn], list[Diagnostic]]:
    """Parse transcript text into turns.

    Lenient mode (default) recovers from malformed lines by keeping them in
    the enclosing turn's freeform list and reports what happened through
    diagnostics. Strict mode raises :class:`TranscriptError` if any
    diagnostic of severity ERROR was produced.
    """
    diags: list[Diagnostic] = []
    turns: list[Turn] = []
    current: _TurnBuilder | None = None

    def finish_current() -> None:
        nonlocal current
        if current is not None:
            turns.append(current.finish(diags))
            current = None

    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    queue: list[tuple[int, str]] = [(i + 1, line) for i, line in enumerate(lines)]

    for lineno, line in queue:
        if not line.strip():
            if current is not None:
                current.sink = None
            continue

        header = _HEADER_RE.match(line)
        if header:
            finish_current()
            kind = TurnKind.GAME if header.group(1).lower() == "game" else TurnKind.PLAYER
            current = _TurnBuilder(kind, lineno)
            rest = header.group(2)
            if rest.strip():
                _consume_content_line(current, rest, lineno, diags)
            continue

        if current is None:
            diags.append(
                Diagnostic(ORPHAN_CONTENT, f"content before first turn header: {line!r}", lineno)
            )
            continue

        _consume_content_line(current, line, lineno, diags)

    finish_current()

    # A bare trailing header is a next-turn cue, not a turn.
    if turns and turns[-1].is_empty():
        turns.pop()

    if strict:
        errors = [d for d in diags if d.is_error()]
        if errors:
            raise TranscriptError(diags)
    return turns, diags


def _consume_content_line(
    turn: _TurnBuilder, line: str, lineno: int, diags: list[Diagnostic]
) -> None:
    scene = _SCENE_RE.match(line)
    if scene:
        if turn.kind is TurnKind.PLAYER:
            diags.append(
                Diagnostic(SCENE_IN_PLAYER_TURN, "scene line in player turn", lineno, Severity.WARNING)
            )
            turn.freeform.append(line)
            turn.sink = None
        elif turn.scene_parts is not None:
            diags.append(
                Diagnostic(DUPLICATE_SCENE, "second scene line in one turn", lineno, Severity.WARNING)
            )
            turn.freeform.append(line)
            turn.sink = None
        else:
            turn.scene_parts = [scene.group(1)]
            turn.sink = "scene"
        return

    if line.startswith("["):
        tag = _TAG_RE.match(line)
        if not tag:
            diags.append(
                Diagnostic(MALFORMED_TAG, f"unparseable tag line: {line!r}", lineno, Severity.WARNING)
            )
            turn.freeform.append(line)
            turn.sink = None
            return
        name = canonical_tag(tag.group(1))
        value = tag.group(2)

        if tag_key(name) == ID_KEY and turn.kind is TurnKind.GAME:
            npc_id = value.strip()
            if npc_id.endswith(":"):
                npc_id = npc_id[:-1].strip()
            if not npc_id:
                diags.append(Diagnostic(EMPTY_NPC_ID, "[ID] line with empty name", lineno))
                turn.freeform.append(line)
                turn.sink = None
                return
            turn.blocks.append((npc_id, []))
            turn.sink = None
            return

        builder = _EntryBuilder(name, value, lineno)
        if turn.kind is TurnKind.GAME:
            if not turn.blocks:
                diags.append(
                    Diagnostic(
                        TAG_OUTSIDE_BLOCK,
                        f"tag {name} before any [ID] block",
                        lineno,
                        Severity.WARNING,
                    )
                )
                turn.freeform.append(line)
                turn.sink = None
                return
            _, entries = turn.blocks[-1]
            if any(e.name == name or tag_key(e.name) == tag_key(name) for e in entries):
                diags.append(
                    Diagnostic(DUPLICATE_TAG, f"duplicate tag {name} in one block", lineno)
                )
                turn.freeform.append(line)
                turn.sink = None
                return
            entries.append(builder)
        else:
            if any(tag_key(e.name) == tag_key(name) for e in turn.entries):
                diags.append(
                    Diagnostic(
                        DUPLICATE_TAG,
                        f"duplicate tag {name} in player turn",
                        lineno,
                        Severity.WARNING,
                    )
                )
            turn.entries.append(builder)
        turn.sink = builder
        return

    # Continuation of the previous value, or freeform if there is none.
    if turn.sink == "scene":
        assert turn.scene_parts is not None
        turn.scene_parts.append(line)
    elif isinstance(turn.sink, _EntryBuilder):
        turn.sink.add(line)
    else:
        turn.freeform.append(line)


# ---------------------------------------------------------------------------
# Validation

_RESERVED_PREFIXES = ("[", "Scene:", "Game:", "Player:")


def _value_is_unsafe(value: str) -> bool:
    lines = value.split("\n")
    if any(not line.strip() for line in lines):
        return True
    for line in lines[1:]:
        if any(line.startswith(p) for p in _RESERVED_PREFIXES):
            return True
        low = line.lower()
        if low.startswith("scene:") or low.startswith("game:") or low.startswith("player:"):
            return True
    return False


def validate_turn(turn: Turn) -> list[Diagnostic]:
    """Structural checks over an in-memory turn.

    Line numbers refer to the turn's canonical serialization (1-based).
    """
    diags: list[Diagnostic] = []
    lineno = 1  # header

    def check_value(name: str, value: str, at: int) -> None:
        if _value_is_unsafe(value):
            diags.append(
                Diagnostic(
                    UNSAFE_VALUE,
                    f"value of {name} contains blank lines or reserved line prefixes",
                    at,
                    Severity.WARNING,
                )
            )

    if turn.kind is TurnKind.GAME:
        body = turn.body
        assert isinstance(body, GameTurn)
        lineno += len(body.freeform)
        if body.scene is not None:
            lineno += 1
            check_value("Scene", body.scene, lineno)
            lineno += body.scene.count("\n")
        for block in body.npc_blocks:
            lineno += 1
            if not block.npc_id.strip():
                diags.append(Diagnostic(EMPTY_NPC_ID, "NPC block with empty id", lineno))
            seen: set[str] = set()
            for e in block.entries:
                lineno += 1
                if e.key in seen:
                    diags.append(
                        Diagnostic(DUPLICATE_TAG, f"duplicate tag {e.name} in one block", lineno)
                    )
                seen.add(e.key)
                check_value(e.name, e.value, lineno)
                lineno += e.value.count("\n")
    else:
        body = turn.body
        assert isinstance(body, PlayerTurn)
        lineno += len(body.freeform)
        seen = set()
        for e in body.entries:
            lineno += 1
            if e.key not in PLAYER_TAG_KEYS:
                diags.append(
                    Diagnostic(
                        PLAYER_TAG,
                        f"tag {e.name} is not a player tag",
                        lineno,
                        Severity.WARNING,
                    )
                )
            if e.key in seen:
                diags.append(
                    Diagnostic(
                        DUPLICATE_TAG,
                        f"duplicate tag {e.name} in player turn",
                        lineno,
                        Severity.WARNING,
                    )
                )
            seen.add(e.key)
            check_value(e.name, e.value, lineno)
            lineno += e.value.count("\n")
    return diags


def validate_transcript(turns: Iterable[Turn]) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for turn in turns:
        out.extend(validate_turn(turn))
    return out


# ---------------------------------------------------------------------------
# Redaction

def redact_turn(turn: Turn, role: Role, vis: VisibilityMap | None = None) -> Turn:
    """Project a turn down to what the given role may see.

    Designers see everything. Players keep the scene, block headers,
    freeform lines and player-visible tag entries; hidden entries are
    removed outright.
    """
    if role is Role.DESIGNER:
        return turn
    if vis is None:
        vis = VisibilityMap.default()

    if turn.kind is TurnKind.GAME:
        body = turn.body
        assert isinstance(body, GameTurn)
        scene = body.scene if (body.scene is None or vis.is_visible(SCENE_KEY)) else None
        if not vis.is_visible(ID_KEY):
            blocks: tuple[NpcBlock, ...] = ()
        else:
            blocks = tuple(
                NpcBlock(b.npc_id, tuple(e for e in b.entries if vis.is_visible(e.name)))
                for b in body.npc_blocks
            )
        return Turn(TurnKind.GAME, GameTurn(scene, blocks, body.freeform))

    body = turn.body
    assert isinstance(body, PlayerTurn)
    kept = tuple(e for e in body.entries if vis.is_visible(e.name))
    return Turn(TurnKind.PLAYER, PlayerTurn(body.author, kept, body.freeform))


def redact_transcript(
    turns: Iterable[Turn], role: Role, vis: VisibilityMap | None = None
) -> tuple[Turn, ...]:
    return tuple(redact_turn(t, role, vis) for t in turns)


def with_author(turn: Turn, author: str) -> Turn:
    if turn.kind is not TurnKind.PLAYER:
        raise ValueError("only player turns carry an author")
    body = turn.body
    assert isinstance(body, PlayerTurn)
    return Turn(TurnKind.PLAYER, replace(body, author=author))
