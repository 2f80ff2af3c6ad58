"""WebSocket shell around the session core.

One connection = one session = one virtual robot.  JSON text frames carry
the protocol messages; a 30 Hz ticker drives qualification pings and trial
state broadcasts.  Session logs stream to one JSONL file per session in
the log directory (TELEFRAME_LOG_DIR or --log-dir).
"""

from __future__ import annotations

import asyncio
import itertools
import json
import logging
import time

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .logs import dumps, log_dir
from .scene import Scene
from .session import TICK_HZ, SessionCore

logger = logging.getLogger("teleframe.server")

_session_counter = itertools.count()


class SessionConnection:
    def __init__(self, websocket, scene: Scene, logs_path):
        n = next(_session_counter)
        self.websocket = websocket
        self.core = SessionCore(scene, session_id=f"session-{n:04d}")
        self.log_path = logs_path / f"{self.core.session_id}.jsonl"
        self._log_file = None
        self._written = 0
        self._t0 = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._t0) * 1000)

    async def send_all(self, messages) -> None:
        for msg in messages:
            await self.websocket.send(dumps(msg))
        self._flush_log()

    def _flush_log(self) -> None:
        lines = self.core.log_lines()
        if len(lines) <= self._written:
            return
        if self._log_file is None:
            self._log_file = open(self.log_path, "w", encoding="utf-8")
        for line in lines[self._written:]:
            self._log_file.write(dumps(line) + "\n")
        self._log_file.flush()
        self._written = len(lines)

    async def ticker(self) -> None:
        period = 1.0 / TICK_HZ
        next_at = time.monotonic()
        while True:
            next_at += period
            delay = next_at - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            try:
                await self.send_all(self.core.tick(self.now_ms()))
            except ConnectionClosed:
                return

    async def run(self) -> None:
        tick_task = asyncio.create_task(self.ticker())
        try:
            async for raw in self.websocket:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await self.send_all([{"type": "error",
                                          "message": "payload is not valid JSON"}])
                    continue
                await self.send_all(self.core.handle_message(msg, self.now_ms()))
        except ConnectionClosed:
            pass
        finally:
            tick_task.cancel()
            self._flush_log()
            if self._log_file is not None:
                self._log_file.close()
            logger.info("session %s closed (phase %s)",
                        self.core.session_id, self.core.phase)


async def start_server(scene: Scene, host: str = "127.0.0.1", port: int = 8765,
                       logs_override=None):
    """Bind and return the websocket server (caller manages its lifetime).
    Use port=0 to bind an ephemeral port."""
    logs_path = log_dir(logs_override)

    async def handler(websocket):
        await SessionConnection(websocket, scene, logs_path).run()

    server = await serve(handler, host, port)
    bound = server.sockets[0].getsockname()[1] if server.sockets else port
    logger.info("serving on ws://%s:%d, logs in %s", host, bound, logs_path)
    return server


async def serve_sessions(scene: Scene, host: str = "127.0.0.1",
                         port: int = 8765, logs_override=None):
    server = await start_server(scene, host, port, logs_override)
    async with server:
        await server.serve_forever()


def run_server(scene: Scene, host: str = "127.0.0.1", port: int = 8765,
               logs_override=None) -> None:
    asyncio.run(serve_sessions(scene, host, port, logs_override))
