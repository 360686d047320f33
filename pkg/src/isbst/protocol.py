"""Wire protocol: JSON commands in, JSON responses + pushed events out.

The handler is transport-agnostic; the WebSocket server (server.py) and
the test suite drive it the same way. Message set: start, set_weights,
run_segment, candidate_detail, export_candidate, stop, list_versions,
status. Every message carries a session id (once a session exists) and a
monotonically increasing per-connection sequence number; pushed events
carry their own per-session push_seq.
"""

from __future__ import annotations

import threading
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from .mutation import SutVersion
from .session import Session, SessionConfig, SessionError

PushFn = Callable[[dict], None]


class ProtocolError(ValueError):
    pass


class ProtocolService:
    """Owns the sessions and serves protocol commands."""

    def __init__(self, versions: list[SutVersion], export_dir: str | Path | None = None,
                 labels: dict[int, str] | None = None):
        self._versions = {v.version_id: v for v in versions}
        self._labels = labels or {}
        self._export_dir = Path(export_dir) if export_dir else None
        self._sessions: dict[str, Session] = {}
        self._subscribers: dict[str, list[PushFn]] = {}
        self._push_seq: dict[str, int] = {}
        self._counter = 0
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=4, thread_name_prefix="segment")

    # -- plumbing --------------------------------------------------------

    def subscribe(self, session_id: str, push: PushFn) -> None:
        with self._lock:
            self._subscribers.setdefault(session_id, []).append(push)

    def unsubscribe(self, push: PushFn) -> None:
        with self._lock:
            for subs in self._subscribers.values():
                if push in subs:
                    subs.remove(push)

    def _emit(self, session_id: str, event_payload: dict) -> None:
        with self._lock:
            seq = self._push_seq.get(session_id, 0) + 1
            self._push_seq[session_id] = seq
            subs = list(self._subscribers.get(session_id, ()))
        message = {
            "type": "event",
            "session_id": session_id,
            "push_seq": seq,
            "event": event_payload,
        }
        for push in subs:
            push(message)

    def _session(self, msg: dict) -> Session:
        sid = msg.get("session_id")
        session = self._sessions.get(sid)
        if session is None:
            raise ProtocolError(f"unknown session {sid!r}")
        return session

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)

    # -- commands ----------------------------------------------------------

    def handle(self, msg: dict, push: PushFn | None = None) -> dict:
        """Serve one command; returns the response message."""
        cmd = msg.get("type")
        seq = msg.get("seq")
        base = {"type": "response", "cmd": cmd, "seq": seq}
        if "session_id" in msg:
            base["session_id"] = msg["session_id"]
        try:
            handler = getattr(self, f"_cmd_{cmd}", None)
            if handler is None:
                raise ProtocolError(f"unknown command {cmd!r}")
            body = handler(msg, push)
            return {**base, "ok": True, **body}
        except (ProtocolError, SessionError, KeyError, ValueError) as exc:
            return {**base, "ok": False, "error": str(exc)}
        except Exception as exc:  # pragma: no cover - defensive
            traceback.print_exc()
            return {**base, "ok": False, "error": f"internal error: {exc}"}

    def _cmd_list_versions(self, msg: dict, push: PushFn | None) -> dict:
        return {
            "versions": [
                {
                    "version_id": v.version_id,
                    "label": self._labels.get(v.version_id, v.label),
                }
                for v in sorted(self._versions.values(), key=lambda v: v.version_id)
            ]
        }

    def _cmd_start(self, msg: dict, push: PushFn | None) -> dict:
        config = SessionConfig.from_dict(msg.get("config", {}))
        version = self._versions.get(config.version_id)
        if version is None:
            raise ProtocolError(f"unknown version {config.version_id}")
        with self._lock:
            self._counter += 1
            session_id = f"s{self._counter}"
        session = Session(session_id, config, version)
        self._sessions[session_id] = session
        if push is not None:
            self.subscribe(session_id, push)
        return {"session_id": session_id, "event": session.last_event.payload()}

    def _cmd_set_weights(self, msg: dict, push: PushFn | None) -> dict:
        session = self._session(msg)
        applied = session.set_weights(msg.get("weights", {}))
        return {"weights": applied}

    def _cmd_run_segment(self, msg: dict, push: PushFn | None) -> dict:
        session = self._session(msg)
        if msg.get("wait"):
            event = session.run_segment()
            self._emit(session.session_id, event.payload())
            return {"event": event.payload()}
        session._require_paused("run_segment")

        def work():
            try:
                event = session.run_segment()
            except SessionError:
                return
            self._emit(session.session_id, event.payload())

        self._pool.submit(work)
        return {"running": True}

    def _cmd_candidate_detail(self, msg: dict, push: PushFn | None) -> dict:
        session = self._session(msg)
        return {"detail": session.candidate_detail(int(msg["cid"]))}

    def _cmd_export_candidate(self, msg: dict, push: PushFn | None) -> dict:
        session = self._session(msg)
        cid = int(msg["cid"])
        if "path" in msg:
            path = Path(msg["path"])
        else:
            root = self._export_dir or Path.cwd()
            path = root / f"{session.session_id}_c{cid}.csv"
        written = session.export_candidate(cid, path)
        sidecar = written.with_suffix(written.suffix + ".meta.json")
        return {
            "path": str(written),
            "csv": written.read_text(),
            "sidecar": sidecar.read_text(),
        }

    def _cmd_status(self, msg: dict, push: PushFn | None) -> dict:
        return {"status": self._session(msg).status()}

    def _cmd_stop(self, msg: dict, push: PushFn | None) -> dict:
        session = self._session(msg)
        return {"log": session.stop()}
