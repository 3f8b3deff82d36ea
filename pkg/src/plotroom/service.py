"""HTTP boundary: design sessions, game rooms, event streams, snapshots.

Bodies are UTF-8 structured text (the wire format) by default; sending
``Content-Type: application/json`` or ``Accept: application/json`` flips a
request or response to the JSON mirror of the same fields. The API adds
no game semantics of its own: every command is one pure room/story
transition, applied under a per-room lock so commands serialize in
arrival order while distinct rooms stay fully concurrent. Provider calls
run outside the lock and their results re-enter as one more transition.
"""

from __future__ import annotations

import contextlib
import json
import queue
import secrets
import socket
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from . import __version__
from .plots import Plot, PlotParseFailure, parse_plot
from .prompts import build_game_room_next_turn
from .providers import (
    CompletionProvider,
    EmptyCompletion,
    HttpProvider,
    ProviderConfig,
    ProviderError,
    ScriptedProvider,
    load_script,
)
from .rooms import (
    Approve,
    DeleteEvent,
    FeedbackItem,
    InsertEvent,
    Participant,
    ReplaceEvent,
    Room,
    RoomError,
    UnknownParticipant,
    add_participant,
    apply_generation,
    apply_room_archive,
    begin_generation,
    chat,
    clear_pending_turn,
    create_room,
    edit_plot_events,
    mark_event_played,
    resolve_pending_turn,
    serialize_room,
    submit_feedback,
    submit_player_turn,
    toggle_npc_control,
    view_for,
)
from .story import (
    Append,
    Delete,
    EditError,
    Replace,
    StoryDocument,
    TruncateAfter,
    TurnParseFailure,
    apply_edit,
    generate_next_turn,
    maybe_archive,
    parse_story,
)
from .storage import NotFound, SnapshotKind, SnapshotStore
from .summarize import generate_plot
from .transcript import Role, TranscriptError, TurnKind, parse_transcript
from .views import (
    render_room_view,
    render_story_view,
    room_view_payload,
    story_payload,
)
from .wire import WireError, parse_wire


class ConfigError(ValueError):
    pass


class BindFailure(OSError):
    pass


TOKEN_TTL_S = 12 * 3600


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8023
    data_dir: str = "./data"
    provider_mode: str = "scripted"  # "scripted" | "http"
    script_path: str | None = None
    provider_config_path: str | None = None


def build_provider(config: ServiceConfig) -> CompletionProvider:
    if config.provider_mode == "scripted":
        steps = load_script(config.script_path) if config.script_path else []
        return ScriptedProvider(steps)
    if config.provider_mode == "http":
        if config.provider_config_path:
            return HttpProvider(ProviderConfig.from_file(config.provider_config_path))
        return HttpProvider(ProviderConfig())
    raise ConfigError(f"unknown provider mode {config.provider_mode!r}")


# ---------------------------------------------------------------------------
# Request/response helpers

class ApiError(Exception):
    def __init__(self, status: int, message: str):
        self.status = status
        self.message = message
        super().__init__(message)


class Body:
    """One accessor over both body encodings."""

    def __init__(self, scalars: dict[str, list[str]], blocks: dict[str, list[str]]):
        self._scalars = scalars
        self._blocks = blocks

    @classmethod
    def from_request_bytes(cls, raw: bytes, content_type: str) -> "Body":
        if not raw:
            return cls({}, {})
        text = raw.decode("utf-8")
        scalars: dict[str, list[str]] = {}
        blocks: dict[str, list[str]] = {}
        if "application/json" in content_type:
            try:
                data = json.loads(text)
            except ValueError as exc:
                raise ApiError(400, f"bad JSON body: {exc}")
            if not isinstance(data, dict):
                raise ApiError(400, "JSON body must be an object")
            for key, value in data.items():
                bucket = scalars
                values = value if isinstance(value, list) else [value]
                for v in values:
                    if isinstance(v, bool):
                        v = "true" if v else "false"
                    elif v is None:
                        continue
                    v = str(v)
                    target = blocks if "\n" in v else bucket
                    target.setdefault(key, []).append(v)
        else:
            try:
                items = parse_wire(text)
            except WireError as exc:
                raise ApiError(400, f"bad body: {exc}")
            for item in items:
                target = blocks if item.is_block else scalars
                target.setdefault(item.key, []).append(item.value)
        return cls(scalars, blocks)

    def get(self, key: str, default: str | None = None) -> str | None:
        if key in self._scalars:
            return self._scalars[key][0]
        if key in self._blocks:
            return self._blocks[key][0]
        return default

    def require(self, key: str) -> str:
        value = self.get(key)
        if value is None or value == "":
            raise ApiError(400, f"missing field {key!r}")
        return value

    def get_int(self, key: str, default: int | None = None) -> int | None:
        raw = self.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ApiError(400, f"field {key!r} must be an integer")

    def all(self, key: str) -> list[str]:
        return self._scalars.get(key, []) + self._blocks.get(key, [])


async def read_body(request: Request) -> Body:
    raw = await request.body()
    return Body.from_request_bytes(raw, request.headers.get("content-type", ""))


def wants_json(request: Request) -> bool:
    return "application/json" in request.headers.get("accept", "")


def respond(request: Request, text: str, payload: dict, status: int = 200):
    if wants_json(request):
        return JSONResponse(payload, status_code=status)
    return PlainTextResponse(text, status_code=status)


# ---------------------------------------------------------------------------
# Hosts

@dataclass
class DesignSession:
    id: str
    doc: StoryDocument
    plot: Plot | None = None
    lock: threading.RLock = field(default_factory=threading.RLock)


class RoomHost:
    """Owns the live value of one room plus its event-stream subscribers.

    ``apply`` serializes mutations (arrival order decides transcript
    order); subscribers get a fresh role-scoped view after every change.
    """

    def __init__(self, room: Room):
        self.lock = threading.RLock()
        self.room = room
        self.subscribers: list[tuple[str, queue.Queue]] = []
        self.applied: list[str] = []  # mutation labels, for linearization checks

    def apply(self, label: str, fn: Callable[[Room], Room]) -> Room:
        with self.lock:
            self.room = fn(self.room)
            self.applied.append(label)
            current = self.room
        self.broadcast(current)
        return current

    def snapshot(self) -> Room:
        with self.lock:
            return self.room

    def subscribe(self, participant_id: str) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self.lock:
            self.subscribers.append((participant_id, q))
            current = self.room
        with contextlib.suppress(UnknownParticipant):
            q.put(room_view_payload(view_for(current, participant_id)))
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self.lock:
            self.subscribers = [(pid, sq) for pid, sq in self.subscribers if sq is not q]

    def broadcast(self, room: Room) -> None:
        with self.lock:
            targets = list(self.subscribers)
        for pid, q in targets:
            with contextlib.suppress(UnknownParticipant):
                q.put(room_view_payload(view_for(room, pid)))

    def advance(self, provider: CompletionProvider) -> Room:
        """Generate off-lock; begin/complete re-enter as ordinary events."""
        staged = self.apply("begin_generation", begin_generation)
        control = staged.npc_control
        try:
            archived = apply_room_archive(staged, provider)
            request = build_game_room_next_turn(archived)
            completion = provider.complete(request)
        except Exception:
            self.apply("generation_failed", lambda r: replace(r, generation_in_flight=False))
            raise

        def fold(current: Room) -> Room:
            merged = replace(
                current,
                transcript=archived.transcript,
                archive_summary=archived.archive_summary,
                archived_turn_count=archived.archived_turn_count,
            )
            return apply_generation(merged, completion, control)

        return self.apply("apply_generation", fold)


@dataclass(frozen=True)
class SessionToken:
    token: str
    room_id: str
    participant_id: str
    expires_at: float


# ---------------------------------------------------------------------------
# Application

def create_app(
    config: ServiceConfig | None = None,
    provider: CompletionProvider | None = None,
    clock: Callable[[], float] = time.time,
    token_source: Callable[[], str] | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    provider = provider or build_provider(config)
    store = SnapshotStore(config.data_dir, clock=clock)
    mint_token = token_source or (lambda: secrets.token_urlsafe(16))

    sessions: dict[str, DesignSession] = {}
    rooms: dict[str, RoomHost] = {}
    tokens: dict[str, SessionToken] = {}
    counters = {"session": 0, "room": 0, "participant": 0}
    registry_lock = threading.Lock()

    def next_id(kind: str) -> str:
        with registry_lock:
            counters[kind] += 1
            return f"{kind[0]}{counters[kind]}"

    @contextlib.asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        flush_all()

    def flush_all() -> None:
        for session in list(sessions.values()):
            with session.lock:
                store.save(SnapshotKind.STORY, session.id, session.doc)
                if session.plot is not None:
                    store.save(SnapshotKind.PLOT, session.id, session.plot)
        for host in list(rooms.values()):
            store.save(SnapshotKind.ROOM, host.snapshot().id, host.snapshot())

    app = FastAPI(title="plotroom", lifespan=lifespan)
    # the browser client may be served from another origin (e.g. a dev server)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.provider = provider
    app.state.store = store
    app.state.rooms = rooms
    app.state.sessions = sessions
    app.state.flush_all = flush_all

    @app.exception_handler(ApiError)
    async def handle_api_error(_req, exc: ApiError):
        return PlainTextResponse(f"error: {exc.message}\n", status_code=exc.status)

    def fail(exc: Exception) -> ApiError:
        if isinstance(exc, (NotFound,)):
            return ApiError(404, str(exc))
        if isinstance(exc, UnknownParticipant):
            return ApiError(404, f"unknown participant: {exc}")
        if isinstance(exc, RoomError):
            from .rooms import NotDesigner, NotPlayer, NotYourTurnPhase

            if isinstance(exc, (NotDesigner, NotPlayer)):
                return ApiError(403, f"{type(exc).__name__}: {exc}")
            if isinstance(exc, NotYourTurnPhase):
                return ApiError(409, f"not your turn phase: {exc}")
            return ApiError(400, f"{type(exc).__name__}: {exc}")
        if isinstance(exc, (EditError, PlotParseFailure, TranscriptError, WireError,
                            TurnParseFailure, EmptyCompletion, ValueError)):
            return ApiError(400, f"{type(exc).__name__}: {exc}")
        if isinstance(exc, ProviderError):
            return ApiError(502, f"provider failure: {exc}")
        return ApiError(500, f"{type(exc).__name__}: {exc}")

    def guard(fn: Callable):
        try:
            return fn()
        except ApiError:
            raise
        except Exception as exc:  # noqa: BLE001 - boundary translation
            raise fail(exc)

    def session_or_404(sid: str) -> DesignSession:
        session = sessions.get(sid)
        if session is None:
            raise ApiError(404, f"no design session {sid!r}")
        return session

    def room_or_404(rid: str) -> RoomHost:
        host = rooms.get(rid)
        if host is None:
            raise ApiError(404, f"no room {rid!r}")
        return host

    def authenticate(rid: str, request: Request, body: Body | None) -> str:
        raw = request.query_params.get("token") or request.headers.get("x-session-token")
        if raw is None and body is not None:
            raw = body.get("token")
        if not raw:
            raise ApiError(401, "missing session token")
        token = tokens.get(raw)
        if token is None or token.room_id != rid:
            raise ApiError(401, "unknown session token")
        if token.expires_at < clock():
            raise ApiError(401, "expired session token")
        return token.participant_id

    def parse_turn_block(text: str, expected: TurnKind | None = None):
        turns, _diags = parse_transcript(text)
        if not turns:
            raise ApiError(400, "turn block is empty")
        turn = turns[0]
        if expected is not None and turn.kind is not expected:
            raise ApiError(400, f"expected a {expected.value} turn")
        return turn

    # -- health ------------------------------------------------------------

    @app.get("/health")
    def health(request: Request):
        payload = {
            "status": "ok",
            "version": __version__,
            "provider": type(provider).__name__,
        }
        text = "".join(f"{k}: {v}\n" for k, v in payload.items())
        return respond(request, text, payload)

    # -- design room ---------------------------------------------------------

    def session_response(request: Request, session: DesignSession, status: int = 200):
        with session.lock:
            text = render_story_view(session.id, session.doc, session.plot)
            payload = story_payload(session.id, session.doc, session.plot)
        return respond(request, text, payload, status)

    @app.post("/design/sessions")
    async def create_session(request: Request):
        body = await read_body(request)

        def run():
            from_story = body.get("from_story")
            if from_story:
                version = body.get_int("version")
                doc = store.load(SnapshotKind.STORY, from_story, version)
            elif body.get("story") is not None:
                doc, _diags = parse_story(body.require("story"))
            else:
                transcript_text = body.get("transcript") or ""
                turns, _diags = (
                    parse_transcript(transcript_text) if transcript_text else ([], [])
                )
                doc = StoryDocument(
                    opening_story=body.require("opening_story"),
                    instructions=body.require("instructions"),
                    live_turns=tuple(turns),
                )
            session = DesignSession(id=body.get("session_id") or next_id("session"), doc=doc)
            sessions[session.id] = session
            return session

        session = guard(run)
        return session_response(request, session, status=201)

    @app.get("/design/sessions/{sid}")
    def get_session(sid: str, request: Request):
        return session_response(request, session_or_404(sid))

    @app.post("/design/sessions/{sid}/edit")
    async def edit_session(sid: str, request: Request):
        session = session_or_404(sid)
        body = await read_body(request)

        def run():
            op = body.require("op")
            if op == "append":
                edit = Append(parse_turn_block(body.require("turn")))
            elif op == "replace":
                edit = Replace(body.get_int("index") or 0, parse_turn_block(body.require("turn")))
            elif op == "delete":
                edit = Delete(body.get_int("index") or 0)
            elif op == "truncate_after":
                edit = TruncateAfter(body.get_int("index") or 0)
            else:
                raise ApiError(400, f"unknown edit op {op!r}")
            with session.lock:
                session.doc = apply_edit(session.doc, edit)

        guard(run)
        return session_response(request, session)

    @app.post("/design/sessions/{sid}/generate")
    async def generate_session_turn(sid: str, request: Request):
        session = session_or_404(sid)
        body = await read_body(request)

        def run():
            kind_raw = body.get("kind")
            partial = body.get("partial")
            with session.lock:
                doc = maybe_archive(session.doc, provider)
                if kind_raw:
                    kind = TurnKind(kind_raw)
                elif partial:
                    probe = partial.lstrip().lower()
                    kind = TurnKind.GAME if probe.startswith("game:") else TurnKind.PLAYER
                elif doc.live_turns and doc.live_turns[-1].kind is TurnKind.GAME:
                    kind = TurnKind.PLAYER
                else:
                    kind = TurnKind.GAME
                turn = generate_next_turn(doc, kind, provider, partial)
                session.doc = apply_edit(doc, Append(turn))

        guard(run)
        return session_response(request, session)

    @app.post("/design/sessions/{sid}/plot/generate")
    async def generate_session_plot(sid: str, request: Request):
        session = session_or_404(sid)

        def run():
            with session.lock:
                if not session.doc.live_turns:
                    raise ApiError(400, "no turns to distill")
                session.plot = generate_plot(session.plot, session.doc.live_turns, provider)

        guard(run)
        return session_response(request, session)

    @app.post("/design/sessions/{sid}/plot")
    async def set_session_plot(sid: str, request: Request):
        session = session_or_404(sid)
        body = await read_body(request)

        def run():
            plot = parse_plot(body.require("plot"))
            with session.lock:
                session.plot = plot

        guard(run)
        return session_response(request, session)

    @app.post("/design/sessions/{sid}/save")
    def save_session(sid: str, request: Request):
        session = session_or_404(sid)

        def run():
            with session.lock:
                snapshot = store.save(SnapshotKind.STORY, session.id, session.doc)
                plot_version = None
                if session.plot is not None:
                    plot_version = store.save(SnapshotKind.PLOT, session.id, session.plot).version
            return snapshot, plot_version

        snapshot, plot_version = guard(run)
        payload = {"saved": sid, "version": snapshot.version, "plot_version": plot_version}
        text = f"saved: {sid}\nversion: {snapshot.version}\n"
        if plot_version is not None:
            text += f"plot_version: {plot_version}\n"
        return respond(request, text, payload)

    # -- game rooms ----------------------------------------------------------

    def room_view_response(request: Request, host: RoomHost, participant_id: str):
        room = host.snapshot()
        view = guard(lambda: view_for(room, participant_id))
        return respond(request, render_room_view(view), room_view_payload(view))

    @app.post("/rooms")
    async def create_room_endpoint(request: Request):
        body = await read_body(request)

        def run():
            from_session = body.get("from_session")
            if from_session:
                session = session_or_404(from_session)
                with session.lock:
                    if session.plot is None:
                        raise ApiError(400, "design session has no plot yet")
                    plot = session.plot
                    opening = session.doc.opening_story
                    instructions = session.doc.instructions
            else:
                plot = parse_plot(body.require("plot"))
                opening = body.require("opening_story")
                instructions = body.require("instructions")
            room = create_room(
                plot,
                opening,
                instructions,
                feedback_prompts=body.all("feedback_prompt"),
                room_id=body.get("room_id") or next_id("room"),
                round_robin=body.get("round_robin") == "true",
            )
            if room.id in rooms:
                raise ApiError(409, f"room {room.id!r} already exists")
            host = RoomHost(room)
            rooms[room.id] = host
            return host

        host = guard(run)
        room = host.snapshot()
        payload = {"room": room.id}
        return respond(request, f"room: {room.id}\n", payload, status=201)

    @app.post("/rooms/load")
    async def load_room_endpoint(request: Request):
        body = await read_body(request)

        def run():
            rid = body.require("room_id")
            version = body.get_int("version")
            room = store.load(SnapshotKind.ROOM, rid, version)
            host = RoomHost(room)
            rooms[room.id] = host
            return host

        host = guard(run)
        return respond(request, f"room: {host.snapshot().id}\n", {"room": host.snapshot().id})

    @app.post("/rooms/{rid}/join")
    async def join_room(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)

        def run():
            role = Role(body.get("role") or "player")
            pid = body.get("participant_id")
            if not pid:
                taken = {p.id for p in host.snapshot().participants}
                pid = next_id("participant")
                while pid in taken:  # counter restarts; loaded rooms keep old ids
                    pid = next_id("participant")
            participant = Participant(
                id=pid,
                display_name=body.get("name") or "anonymous",
                role=role,
            )
            host.apply("join", lambda room: add_participant(room, participant))
            token = SessionToken(
                token=mint_token(),
                room_id=rid,
                participant_id=participant.id,
                expires_at=clock() + TOKEN_TTL_S,
            )
            tokens[token.token] = token
            return participant, token

        participant, token = guard(run)
        payload = {
            "token": token.token,
            "participant": participant.id,
            "role": participant.role.value,
        }
        text = (
            f"token: {token.token}\nparticipant: {participant.id}\n"
            f"role: {participant.role.value}\n"
        )
        return respond(request, text, payload, status=201)

    @app.get("/rooms/{rid}/view")
    def get_room_view(rid: str, request: Request):
        host = room_or_404(rid)
        pid = authenticate(rid, request, None)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/turns")
    async def post_player_turn(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            turn = parse_turn_block(body.require("turn"), TurnKind.PLAYER)
            host.apply(f"submit:{pid}", lambda room: submit_player_turn(room, pid, turn))

        guard(run)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/advance")
    async def advance_room(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)
        guard(lambda: host.snapshot().participant(pid))
        guard(lambda: host.advance(provider))
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/pending")
    async def resolve_pending(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            action_raw = body.require("action")
            if action_raw == "approve":
                turn_text = body.get("turn")
                if turn_text:
                    turn = parse_turn_block(turn_text, TurnKind.GAME)
                else:
                    pending = host.snapshot().pending_turn
                    if pending is None:
                        raise ApiError(409, "no pending turn")
                    turn = pending.turn
                host.apply(
                    "approve", lambda room: resolve_pending_turn(room, pid, Approve(turn))
                )
            elif action_raw == "regenerate":
                host.apply(
                    "regenerate:clear", lambda room: clear_pending_turn(room, pid)
                )
                host.advance(provider)
            else:
                raise ApiError(400, f"unknown action {action_raw!r}")

        guard(run)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/control")
    async def toggle_control(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            npc = body.require("npc")
            host.apply(f"toggle:{npc}", lambda room: toggle_npc_control(room, pid, npc))

        guard(run)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/plot/edits")
    async def edit_room_plot(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            edits = []
            for raw in body.all("edit"):
                op, _, rest = raw.partition(" ")
                if op == "replace":
                    idx_raw, _, text = rest.partition(" ")
                    edits.append(ReplaceEvent(int(idx_raw), text))
                elif op == "insert":
                    idx_raw, _, text = rest.partition(" ")
                    edits.append(InsertEvent(int(idx_raw), text))
                elif op == "delete":
                    edits.append(DeleteEvent(int(rest.strip() or "-1")))
                else:
                    raise ApiError(400, f"unknown plot edit {raw!r}")
            if not edits:
                raise ApiError(400, "no edits given")
            host.apply("plot_edit", lambda room: edit_plot_events(room, pid, edits))

        guard(run)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/plot/played")
    async def mark_played(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            index = body.get_int("index")
            if index is None:
                raise ApiError(400, "missing field 'index'")
            host.apply(
                f"played:{index}", lambda room: mark_event_played(room, pid, index)
            )

        guard(run)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/feedback")
    async def post_feedback(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            turn_index = body.get_int("turn")
            if turn_index is None:
                raise ApiError(400, "missing field 'turn'")
            item = FeedbackItem(
                turn_index=turn_index,
                author=pid,
                label=body.get("label") or "free",
                text=body.get("text"),
            )
            host.apply("feedback", lambda room: submit_feedback(room, pid, item))

        guard(run)
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/chat")
    async def post_chat(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)
        guard(lambda: host.apply("chat", lambda room: chat(room, pid, body.get("text") or "")))
        return room_view_response(request, host, pid)

    @app.post("/rooms/{rid}/save")
    async def save_room(rid: str, request: Request):
        host = room_or_404(rid)
        body = await read_body(request)
        pid = authenticate(rid, request, body)

        def run():
            room = host.snapshot()
            actor = room.participant(pid)
            if actor.role is not Role.DESIGNER:
                raise ApiError(403, "only designers save rooms")
            return store.save(SnapshotKind.ROOM, rid, room)

        snapshot = guard(run)
        payload = {"saved": rid, "version": snapshot.version}
        return respond(request, f"saved: {rid}\nversion: {snapshot.version}\n", payload)

    @app.get("/rooms/{rid}/snapshot")
    def get_room_snapshot(rid: str, request: Request):
        host = room_or_404(rid)
        pid = authenticate(rid, request, None)
        room = host.snapshot()
        actor = guard(lambda: room.participant(pid))
        if actor.role is not Role.DESIGNER:
            raise ApiError(403, "only designers read raw snapshots")
        return PlainTextResponse(serialize_room(room))

    @app.get("/rooms/{rid}/events")
    def room_events(rid: str, request: Request):
        host = room_or_404(rid)
        pid = authenticate(rid, request, None)
        guard(lambda: host.snapshot().participant(pid))
        once = request.query_params.get("once") == "1"

        def stream() -> Iterator[str]:
            q = host.subscribe(pid)
            try:
                while True:
                    try:
                        payload = q.get(timeout=15.0)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"event: view\ndata: {json.dumps(payload)}\n\n"
                    if once:
                        return
            finally:
                host.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def serve(config: ServiceConfig, provider: CompletionProvider | None = None) -> None:
    """Run the service until interrupted; flushes snapshots on shutdown."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as exc:
        raise BindFailure(f"cannot bind {config.host}:{config.port}: {exc}") from exc
    finally:
        probe.close()

    app = create_app(config, provider)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
