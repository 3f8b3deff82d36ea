"""Append-only versioned snapshot files; no database.

Layout under the data directory:

    stories/<object id>/000001.story
    plots/<object id>/000001.plot
    rooms/<object id>/000001.room

Versions strictly increase per object and existing files are never
rewritten, so a snapshot that fails to parse later is still on disk for
inspection.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable

from .plots import PlotParseFailure, parse_plot, serialize_plot
from .rooms import parse_room, serialize_room
from .story import parse_story, serialize_story
from .wire import WireError


class NotFound(LookupError):
    pass


class CorruptSnapshot(ValueError):
    def __init__(self, path: Path, cause: Exception):
        self.path = path
        super().__init__(f"{path} failed to parse: {cause}")


class SnapshotKind(Enum):
    STORY = "story"
    PLOT = "plot"
    ROOM = "room"


_DIRS = {SnapshotKind.STORY: "stories", SnapshotKind.PLOT: "plots", SnapshotKind.ROOM: "rooms"}
_SAFE_ID = re.compile(r"[^A-Za-z0-9._-]+")


@dataclass(frozen=True)
class Snapshot:
    kind: SnapshotKind
    object_id: str
    version: int
    payload: str
    created_at: float


def _serialize(kind: SnapshotKind, obj) -> str:
    if kind is SnapshotKind.STORY:
        return serialize_story(obj)
    if kind is SnapshotKind.PLOT:
        return serialize_plot(obj)
    return serialize_room(obj)


def _parse(kind: SnapshotKind, payload: str):
    if kind is SnapshotKind.STORY:
        doc, _diags = parse_story(payload)
        return doc
    if kind is SnapshotKind.PLOT:
        return parse_plot(payload)
    return parse_room(payload)


class SnapshotStore:
    def __init__(self, data_dir: str | Path, clock: Callable[[], float] = time.time):
        self.root = Path(data_dir)
        self._clock = clock

    def _dir(self, kind: SnapshotKind, object_id: str) -> Path:
        safe = _SAFE_ID.sub("_", object_id) or "_"
        return self.root / _DIRS[kind] / safe

    def _versions(self, kind: SnapshotKind, object_id: str) -> list[int]:
        folder = self._dir(kind, object_id)
        if not folder.is_dir():
            return []
        out = []
        for path in folder.glob(f"*.{kind.value}"):
            try:
                out.append(int(path.stem))
            except ValueError:
                continue
        return sorted(out)

    def save(self, kind: SnapshotKind, object_id: str, obj: object) -> Snapshot:
        payload = _serialize(kind, obj)
        folder = self._dir(kind, object_id)
        folder.mkdir(parents=True, exist_ok=True)
        versions = self._versions(kind, object_id)
        version = (versions[-1] + 1) if versions else 1
        path = folder / f"{version:06d}.{kind.value}"
        path.write_text(payload, encoding="utf-8")
        return Snapshot(kind, object_id, version, payload, self._clock())

    def load(self, kind: SnapshotKind, object_id: str, version: int | None = None):
        snapshot = self.load_snapshot(kind, object_id, version)
        path = self._dir(kind, object_id) / f"{snapshot.version:06d}.{kind.value}"
        try:
            return _parse(kind, snapshot.payload)
        except (ValueError, WireError, PlotParseFailure) as exc:
            raise CorruptSnapshot(path, exc) from exc

    def load_snapshot(self, kind: SnapshotKind, object_id: str, version: int | None = None) -> Snapshot:
        versions = self._versions(kind, object_id)
        if not versions:
            raise NotFound(f"{kind.value} {object_id!r} has no snapshots")
        if version is None:
            version = versions[-1]
        elif version not in versions:
            raise NotFound(f"{kind.value} {object_id!r} has no version {version}")
        path = self._dir(kind, object_id) / f"{version:06d}.{kind.value}"
        payload = path.read_text(encoding="utf-8")
        return Snapshot(kind, object_id, version, payload, path.stat().st_mtime)

    def list_versions(self, kind: SnapshotKind, object_id: str) -> list[int]:
        return self._versions(kind, object_id)

    def list_objects(self, kind: SnapshotKind) -> list[str]:
        folder = self.root / _DIRS[kind]
        if not folder.is_dir():
            return []
        return sorted(p.name for p in folder.iterdir() if p.is_dir())
