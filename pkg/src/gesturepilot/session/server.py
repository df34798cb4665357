"""Live session server: landmark frames over a websocket, telemetry back.

One session per process.  Clients send ingest messages (one JSON text
frame each); the newest lands in a single-slot mailbox.  A fixed-rate
tick task drains the slot, runs the shared pipeline, and broadcasts one
telemetry message per tick to every connected client.  Ingest-to-apply
latency is measured on a monotonic clock and summarized at shutdown.
"""

from __future__ import annotations

import asyncio
import logging
import time
from typing import Callable

from websockets.asyncio.server import broadcast, serve
from websockets.exceptions import ConnectionClosed

from ..drone_sim import RunRecord
from ..errors import FormatError
from .messages import decode_ingest, encode_ingest, encode_telemetry
from .pipeline import SessionConfig, SessionPipeline
from .slot import LatestSlot

log = logging.getLogger(__name__)


async def serve_session(config: SessionConfig, host: str = "127.0.0.1",
                        port: int = 8765, *,
                        on_ready: Callable[[int], None] | None = None) -> RunRecord:
    """Run one live session until it finishes or the time budget expires.

    ``on_ready`` is called with the bound port once the server accepts
    connections (pass port=0 to let the OS pick one).  Returns the run
    record; the caller decides where to write it.
    """
    pipeline = SessionPipeline(config)
    slot: LatestSlot = LatestSlot()
    recorder = open(config.record_path, "w", encoding="ascii") \
        if config.record_path else None
    clients: set = set()
    latency_total = 0.0
    latency_max = 0.0
    latency_count = 0

    async def handler(connection):
        clients.add(connection)
        log.info("client connected (%d active)", len(clients))
        try:
            async for raw in connection:
                text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
                try:
                    message = decode_ingest(text)
                except FormatError as exc:
                    log.warning("dropping bad ingest frame: %s", exc)
                    continue
                slot.put((message, time.monotonic()))
        except ConnectionClosed:
            pass
        finally:
            clients.discard(connection)
            log.info("client disconnected (%d active)", len(clients))

    period = 1.0 / config.input_hz
    max_ticks = int(config.max_time * config.input_hz)
    async with serve(handler, host, port) as server:
        bound_port = next(iter(server.sockets)).getsockname()[1]
        log.info("serving on %s:%d", host, bound_port)
        if on_ready is not None:
            on_ready(bound_port)
        deadline = time.monotonic() + period
        try:
            for _ in range(max_ticks):
                item = slot.take()
                frame = None
                arrived = None
                if item is not None:
                    frame, arrived = item
                    if recorder is not None:
                        recorder.write(encode_ingest(frame) + "\n")
                telemetry = pipeline.tick(frame)
                if arrived is not None:
                    lag = time.monotonic() - arrived
                    latency_total += lag
                    latency_max = max(latency_max, lag)
                    latency_count += 1
                if clients:
                    broadcast(clients, encode_telemetry(telemetry))
                if pipeline.finished:
                    log.info("session finished at tick %d", pipeline.tick_index)
                    break
                delay = deadline - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                elif delay < -1.0:
                    deadline = time.monotonic()  # fell badly behind; resync
                deadline += period
            else:
                log.warning("session hit its %.0f s budget", config.max_time)
        finally:
            if recorder is not None:
                recorder.close()
            if latency_count:
                log.info("ingest-to-apply latency: mean %.1f ms, max %.1f ms "
                         "over %d frames (budget %.1f ms)",
                         1e3 * latency_total / latency_count, 1e3 * latency_max,
                         latency_count, 1e3 * period)
    return pipeline.finish_record()
