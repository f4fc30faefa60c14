"""Live zone-editing service.

Hosts one zone registry plus one scenario. Clients connect over a websocket
(``/ws``, text frames) or a plain TCP stream (newline-delimited JSON, on the
listen port + 1); both speak the same message schema. All edits from all
connections are funneled through a single ordered queue, so the final
composite equals sequential application in arrival order. The store file is
rewritten atomically *before* each broadcast, which makes a crash lose at
most the edit that was never acknowledged.
"""

from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path as FilePath

from aiohttp import WSMsgType, web

from . import navsim, planner, protocol
from .grid import world_to_grid
from .navsim import RobotMotion, Scenario
from .zones import ZoneRegistry, load_store_file, save_store_file

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8750
    store_path: str = "zones.json"
    scenario: str = "stage1"  # built-in name or manifest path
    speed: float = 0.25
    tick_hz: float = 20.0

    def __post_init__(self) -> None:
        if self.tick_hz <= 0:
            raise ValueError("tick rate must be > 0")
        if self.speed <= 0:
            raise ValueError("robot speed must be > 0")


def _load_scenario(spec: str) -> Scenario:
    path = FilePath(spec)
    if path.exists():
        return navsim.load_scenario(path)
    return navsim.builtin_scenario(spec)


class _Client:
    """One connected editing client; transport-specific send."""

    def __init__(self, name: str, send) -> None:
        self.name = name
        self._send = send

    async def send(self, frame: str) -> None:
        await self._send(frame)


class ZoneService:
    """Owns registry, robot marker, and broadcast fan-out on one event loop."""

    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self.scenario = _load_scenario(config.scenario)
        store = FilePath(config.store_path)
        if store.exists():
            # A corrupt store must abort startup rather than silently dropping zones.
            self.registry = load_store_file(store, self.scenario.base)
            log.info("restored %d zones from %s", len(self.registry), store)
        else:
            self.registry = ZoneRegistry(self.scenario.base)
        self.seq = 0
        self.clients: set[_Client] = set()
        self.queue: asyncio.Queue[tuple[_Client, str]] = asyncio.Queue()
        self.robot: RobotMotion | None = None
        self._replan()

    # -- state ------------------------------------------------------------

    def _replan(self) -> None:
        """Plan from the robot's current position (or the scenario start) to the goal."""
        grid = self.registry.composite
        if self.robot is not None:
            start_world = (self.robot.pose.x, self.robot.pose.y)
        else:
            start_world = (self.scenario.start.x, self.scenario.start.y)
        try:
            start = world_to_grid(grid, start_world)
            goal = world_to_grid(grid, (self.scenario.goal.x, self.scenario.goal.y))
            path = planner.plan(grid, start, goal)
        except planner.PlanningError as exc:
            log.info("no path after edit: %s", exc)
            hold = self.robot.pose if self.robot else self.scenario.start
            self.robot = RobotMotion(((hold.x, hold.y),), self.config.speed)
            return
        except Exception as exc:  # start outside grid etc.
            log.warning("replan failed: %s", exc)
            return
        self.robot = RobotMotion(path.world_points(grid), self.config.speed)

    def snapshot(self) -> tuple[protocol.MapState, protocol.RobotState]:
        """Current composite and robot state as broadcast frames; idempotent."""
        map_state = protocol.map_state_of(self.registry.composite, self.seq)
        if self.robot is not None:
            pose = self.robot.pose
            robot_state = protocol.RobotState(
                (pose.x, pose.y, pose.theta), self.robot.points, self.seq
            )
        else:
            s = self.scenario.start
            robot_state = protocol.RobotState((s.x, s.y, s.theta), (), self.seq)
        return map_state, robot_state

    # -- wiring -----------------------------------------------------------

    async def broadcast(self, frames: list[str]) -> None:
        for client in list(self.clients):
            for frame in frames:
                try:
                    await client.send(frame)
                except Exception:
                    log.info("dropping unreachable client %s", client.name)
                    self.clients.discard(client)
                    break

    async def on_connect(self, client: _Client) -> None:
        self.clients.add(client)
        map_state, robot_state = self.snapshot()
        await client.send(protocol.encode(map_state))
        await client.send(protocol.encode(robot_state))

    def on_disconnect(self, client: _Client) -> None:
        self.clients.discard(client)

    async def edit_loop(self) -> None:
        """Apply queued edits one at a time: mutate, persist, then broadcast."""
        while True:
            client, raw = await self.queue.get()
            try:
                await self._handle_edit(client, raw)
            except asyncio.CancelledError:
                raise
            except Exception:
                # one bad message must never take the service down
                log.exception("failed handling a frame from %s", client.name)
                await self._reply(client, protocol.ErrorReply("bad_message", "internal error"))

    async def _handle_edit(self, client: _Client, raw: str) -> None:
        try:
            msg = protocol.decode(raw)
        except protocol.ProtocolError as exc:
            await self._reply(client, protocol.ErrorReply("bad_message", str(exc)))
            return
        if not isinstance(msg, (protocol.AddZone, protocol.RemoveZone)):
            await self._reply(
                client,
                protocol.ErrorReply("bad_message", f"clients may not send {type(msg).__name__}"),
            )
            return
        result = protocol.apply_message(self.registry, msg, self.seq + 1)
        if not result.applied:
            await self._reply(client, result.error)
            return
        self.seq += 1
        save_store_file(self.registry, self.config.store_path)
        self._replan()
        _, robot_state = self.snapshot()
        await self.broadcast(
            [protocol.encode(result.map_state), protocol.encode(robot_state)]
        )

    async def _reply(self, client: _Client, error: protocol.ErrorReply) -> None:
        try:
            await client.send(protocol.encode(error))
        except Exception:
            self.clients.discard(client)

    async def tick_loop(self) -> None:
        dt = 1.0 / self.config.tick_hz
        while True:
            await asyncio.sleep(dt)
            if self.robot is None or self.robot.at_goal:
                continue
            self.robot.step(dt)
            self.seq += 1
            _, robot_state = self.snapshot()
            await self.broadcast([protocol.encode(robot_state)])


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------


_SERVICE_KEY: web.AppKey["ZoneService"] = web.AppKey("service")


async def _ws_handler(request: web.Request) -> web.WebSocketResponse:
    service = request.app[_SERVICE_KEY]
    ws = web.WebSocketResponse(heartbeat=30)
    await ws.prepare(request)
    client = _Client(f"ws:{request.remote}", ws.send_str)
    await service.on_connect(client)
    try:
        async for msg in ws:
            if msg.type == WSMsgType.TEXT:
                await service.queue.put((client, msg.data))
            elif msg.type == WSMsgType.ERROR:
                break
    finally:
        service.on_disconnect(client)
    return ws


async def _healthz(_request: web.Request) -> web.Response:
    return web.Response(text="ok")


async def _handle_tcp(service: ZoneService, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
    peer = writer.get_extra_info("peername")

    async def send(frame: str) -> None:
        writer.write(frame.encode("utf-8") + b"\n")
        await writer.drain()

    client = _Client(f"tcp:{peer}", send)
    await service.on_connect(client)
    try:
        while True:
            line = await reader.readline()
            if not line:
                break
            text = line.decode("utf-8").strip()
            if text:
                await service.queue.put((client, text))
    except (ConnectionResetError, asyncio.IncompleteReadError):
        pass
    finally:
        service.on_disconnect(client)
        writer.close()


async def serve(config: ServiceConfig) -> None:
    """Run until cancelled; binds HTTP/WS on the listen port, TCP lines on port + 1."""
    service = ZoneService(config)

    app = web.Application()
    app[_SERVICE_KEY] = service
    app.router.add_get("/healthz", _healthz)
    app.router.add_get("/ws", _ws_handler)
    runner = web.AppRunner(app)
    await runner.setup()
    site = web.TCPSite(runner, config.host, config.port)
    await site.start()

    tcp_server = await asyncio.start_server(
        lambda r, w: _handle_tcp(service, r, w), config.host, config.port + 1
    )
    log.info(
        "serving ws://%s:%d/ws and tcp %s:%d (scenario %s, store %s)",
        config.host,
        config.port,
        config.host,
        config.port + 1,
        service.scenario.name,
        config.store_path,
    )
    tasks = [
        asyncio.create_task(service.edit_loop()),
        asyncio.create_task(service.tick_loop()),
    ]
    try:
        await asyncio.gather(*tasks)
    except asyncio.CancelledError:
        pass
    finally:
        for task in tasks:
            task.cancel()
        tcp_server.close()
        await tcp_server.wait_closed()
        await runner.cleanup()


def run_service(config: ServiceConfig) -> None:
    try:
        asyncio.run(serve(config))
    except KeyboardInterrupt:
        pass
