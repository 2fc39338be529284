"""Real-time simulation service speaking the live WebSocket protocol.

One asyncio loop owns everything: a paced ticker task steps the simulation at
tick_ms intervals and fans the per-tick state message out to connected
clients; connection handlers only parse inbound control messages into shared
variables that the ticker reads at the next tick boundary.  The simulation
never waits on a socket: slow clients just lose old frames from their
bounded queues.

Protocol (JSON text messages):
  server -> client on connect:  {"type":"hello","config_digest":...,"tick_ms":...}
  server -> client every tick:  {"type":"state","tick":...,"vehicle":{...},
                                 "advisory":{...},"events":[...]}
  client -> server:             {"type":"control","accel_mps2":...} (applied
                                next tick, last writer wins) and {"type":"reset"}
"""

from __future__ import annotations

import asyncio
import contextlib
import hashlib
import json
import threading
from typing import Callable, Optional

from websockets.asyncio.server import serve as ws_serve

from .sim import (
    ADVISORY_ACTIVATED,
    ADVISORY_DEACTIVATED,
    PHASE_CHANGED,
    VEHICLE_STATE,
    SimEvent,
    Simulation,
    _recommendation_payload,
)

_ADVISORY_KINDS = (ADVISORY_ACTIVATED, ADVISORY_DEACTIVATED, PHASE_CHANGED)
_CLIENT_QUEUE_SIZE = 64


def config_digest(document: str) -> str:
    """Digest of the exact config document bytes, for the hello handshake."""
    return hashlib.sha256(document.encode("utf-8")).hexdigest()


def build_state_message(sim: Simulation, new_events: list[SimEvent]) -> dict:
    """Project one just-completed tick into the wire state message."""
    vehicle = sim.vehicle
    advisory = sim.advisory
    distance = None
    for event in reversed(new_events):
        if event.kind == VEHICLE_STATE:
            distance = event.payload["distance_m"]
            break
    return {
        "type": "state",
        "tick": sim.tick - 1,
        "vehicle": {
            "speed_mps": vehicle.speed_mps,
            "distance_m": distance,
            "lat": vehicle.pos.lat_deg,
            "lon": vehicle.pos.lon_deg,
        },
        "advisory": {
            "active": advisory.active,
            "phase_id": advisory.phase_id,
            "color": advisory.current_color.value if advisory.current_color is not None else None,
            "countdown_ds": advisory.countdown_ds,
            "recommendation": _recommendation_payload(advisory.recommendation),
        },
        "events": [
            {"kind": e.kind, **e.payload} for e in new_events if e.kind in _ADVISORY_KINDS
        ],
    }


class LiveServer:
    """Wall-clock-paced simulation behind a WebSocket endpoint.

    ``make_sim`` builds a fresh Simulation; it runs once at startup and again
    on every reset request.  With no client connected the driver input is
    zero acceleration.
    """

    def __init__(
        self,
        make_sim: Callable[[], Simulation],
        config_digest: str,
        tick_ms: int = 100,
        host: str = "127.0.0.1",
        port: int = 8765,
    ):
        self._make_sim = make_sim
        self._digest = config_digest
        self._tick_ms = tick_ms
        self._host = host
        self.port = port
        self._accel = 0.0
        self._reset_requested = False
        self._clients: set[asyncio.Queue] = set()
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._stop_event: Optional[asyncio.Event] = None
        self.ready = threading.Event()
        self.sim: Optional[Simulation] = None

    def run_forever(self) -> None:
        asyncio.run(self.run())

    def stop(self) -> None:
        """Request shutdown; safe to call from any thread."""
        if self._loop is not None and self._stop_event is not None:
            self._loop.call_soon_threadsafe(self._stop_event.set)

    async def run(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop_event = asyncio.Event()
        self.sim = self._make_sim()
        async with ws_serve(self._handler, self._host, self.port) as server:
            self.port = server.sockets[0].getsockname()[1]
            ticker = asyncio.create_task(self._tick_loop())
            self.ready.set()
            try:
                await self._stop_event.wait()
            finally:
                ticker.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await ticker

    async def _tick_loop(self) -> None:
        tick_s = self._tick_ms / 1000.0
        deadline = self._loop.time()
        final_state: Optional[dict] = None
        while True:
            deadline += tick_s
            if self._reset_requested:
                self.sim = self._make_sim()
                self._reset_requested = False
                final_state = None
            if not self.sim.finished:
                self.sim.set_external_accel(self._accel)
                new_events = self.sim.step()
                message = build_state_message(self.sim, new_events)
                self._broadcast(message)
                # Once the run ends, keep the stream alive by repeating the
                # final state (without its events, so nothing re-beeps);
                # the console stays rendered and reset stays usable.
                if self.sim.finished:
                    final_state = {**message, "events": []}
            elif final_state is not None:
                self._broadcast(final_state)
            delay = deadline - self._loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                deadline = self._loop.time()  # fell behind; do not spiral

    def _broadcast(self, message: dict) -> None:
        data = json.dumps(message, separators=(",", ":"))
        for queue in self._clients:
            if queue.full():
                with contextlib.suppress(asyncio.QueueEmpty):
                    queue.get_nowait()
            queue.put_nowait(data)

    async def _handler(self, ws) -> None:
        await ws.send(json.dumps(
            {"type": "hello", "config_digest": self._digest, "tick_ms": self._tick_ms},
            separators=(",", ":"),
        ))
        queue: asyncio.Queue = asyncio.Queue(maxsize=_CLIENT_QUEUE_SIZE)
        self._clients.add(queue)
        sender = asyncio.create_task(self._sender(ws, queue))
        try:
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                if not isinstance(msg, dict):
                    continue
                if msg.get("type") == "control":
                    try:
                        self._accel = float(msg["accel_mps2"])
                    except (KeyError, TypeError, ValueError):
                        pass
                elif msg.get("type") == "reset":
                    # Clear the pedal here, not at the tick boundary, so a
                    # control sent after the reset is never wiped by it.
                    self._accel = 0.0
                    self._reset_requested = True
        finally:
            self._clients.discard(queue)
            if not self._clients:
                self._accel = 0.0
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender

    @staticmethod
    async def _sender(ws, queue: asyncio.Queue) -> None:
        with contextlib.suppress(Exception):
            while True:
                await ws.send(await queue.get())
