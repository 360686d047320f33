"""WebSocket server exposing the session protocol to the browser UI."""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .mutation import SutVersion
from .protocol import ProtocolService


def create_app(versions: list[SutVersion], export_dir: str | Path | None = None,
               ui_dir: str | Path | None = None,
               labels: dict[int, str] | None = None) -> FastAPI:
    app = FastAPI(title="isbst")
    service = ProtocolService(versions, export_dir=export_dir, labels=labels)
    app.state.service = service

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        loop = asyncio.get_running_loop()
        queue: asyncio.Queue = asyncio.Queue()

        def push(message: dict) -> None:
            loop.call_soon_threadsafe(queue.put_nowait, message)

        async def pump():
            while True:
                message = await queue.get()
                await ws.send_text(json.dumps(message))

        pump_task = asyncio.create_task(pump())
        last_seq = 0
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_text(json.dumps({"ok": False, "error": "invalid JSON"}))
                    continue
                seq = msg.get("seq")
                if not isinstance(seq, int) or seq <= last_seq:
                    await ws.send_text(json.dumps({
                        "type": "response", "cmd": msg.get("type"), "seq": seq,
                        "ok": False, "error": "sequence number must increase",
                    }))
                    continue
                last_seq = seq
                response = await loop.run_in_executor(None, service.handle, msg, push)
                await ws.send_text(json.dumps(response))
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            service.unsubscribe(push)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app


def serve(versions: list[SutVersion], port: int = 8741,
          export_dir: str | Path | None = None, ui_dir: str | Path | None = None,
          labels: dict[int, str] | None = None, host: str = "127.0.0.1") -> None:
    import uvicorn

    app = create_app(versions, export_dir=export_dir, ui_dir=ui_dir, labels=labels)
    uvicorn.run(app, host=host, port=port, log_level="warning")
