"""RF link budget, achievable data rates, and multi-hop relay routing.

Links are free-space line-of-sight: received power is transmit power
plus antenna gain minus fixed system losses minus free-space path loss.
A link closes when the received power clears the receiver sensitivity.
Data moves store-and-forward, so a route's transfer time is the sum of
per-link packet transmission times at each link's Shannon-capacity rate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

Point = tuple[float, float]

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K


class LinkBudgetError(ValueError):
    """Raised when the configured link budget cannot close at any range."""


class DisconnectedError(RuntimeError):
    """Raised when no relay route exists between the requested endpoints."""


@dataclass(frozen=True)
class CommParams:
    """Radio and framing parameters shared by every robot."""

    tx_power_dbm: float = 25.0
    antenna_gain_db: float = 1.0
    rx_sensitivity_dbm: float = -80.0
    frequency_hz: float = 2.4e9
    fixed_losses_db: float = 12.0
    bandwidth_hz: float = 20e3
    noise_temperature_k: float = 200.0
    pointing_loss_db: float = 18.0
    min_ebn0_db: float = 10.0
    packet_size_bits: int = 1024
    data_size_bits: int = 8_000_000

    def __post_init__(self):
        if self.frequency_hz <= 0.0:
            raise ValueError(f"frequency must be positive, got {self.frequency_hz}")
        if self.bandwidth_hz <= 0.0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_hz}")
        if self.noise_temperature_k <= 0.0:
            raise ValueError("noise temperature must be positive")
        if self.packet_size_bits < 1:
            raise ValueError("packet size must be at least 1 bit")
        if self.data_size_bits < 1:
            raise ValueError("data size must be at least 1 bit")
        if self.fixed_losses_db < 0.0 or self.pointing_loss_db < 0.0:
            raise ValueError("losses must be >= 0 dB")


def free_space_path_loss_db(distance_m: float, frequency_hz: float) -> float:
    """Free-space path loss 20*log10(4 pi d f / c) in dB; distance must be > 0."""
    if distance_m <= 0.0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    if frequency_hz <= 0.0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    return 20.0 * math.log10(
        4.0 * math.pi * distance_m * frequency_hz / SPEED_OF_LIGHT
    )


def received_power_dbm(params: CommParams, distance_m: float) -> float:
    """Received signal power over a clear line-of-sight link."""
    return (
        params.tx_power_dbm
        + params.antenna_gain_db
        - params.fixed_losses_db
        - free_space_path_loss_db(distance_m, params.frequency_hz)
    )


def max_range_m(params: CommParams) -> float:
    """Largest distance at which received power still meets sensitivity.

    Closed-form inversion of the path-loss law.  Raises LinkBudgetError
    when the budget cannot close even at zero range (non-positive margin).
    """
    margin = (
        params.tx_power_dbm
        + params.antenna_gain_db
        - params.fixed_losses_db
        - params.rx_sensitivity_dbm
    )
    if margin <= 0.0:
        raise LinkBudgetError(
            f"link budget never closes: margin {margin:.2f} dB at zero range"
        )
    return (
        SPEED_OF_LIGHT / (4.0 * math.pi * params.frequency_hz)
    ) * 10.0 ** (margin / 20.0)


def noise_floor_dbm(params: CommParams) -> float:
    """Thermal noise power k*T*B over the receiver bandwidth, in dBm."""
    watts = BOLTZMANN * params.noise_temperature_k * params.bandwidth_hz
    return 10.0 * math.log10(watts * 1000.0)


def snr_db(params: CommParams, distance_m: float) -> float:
    """Link SNR after pointing loss, against the thermal noise floor."""
    return (
        received_power_dbm(params, distance_m)
        - params.pointing_loss_db
        - noise_floor_dbm(params)
    )


def shannon_rate_bps(params: CommParams, distance_m: float) -> float:
    """Shannon-capacity data rate B*log2(1 + SNR) for the link."""
    snr_linear = 10.0 ** (snr_db(params, distance_m) / 10.0)
    return params.bandwidth_hz * math.log2(1.0 + snr_linear)


def ebn0_db(params: CommParams, distance_m: float) -> float:
    """Energy-per-bit to noise density at the link's Shannon rate."""
    rate = shannon_rate_bps(params, distance_m)
    if rate <= 0.0:
        return -math.inf
    return snr_db(params, distance_m) + 10.0 * math.log10(
        params.bandwidth_hz / rate
    )


def link_closes(params: CommParams, distance_m: float) -> bool:
    """Connectivity test: received power meets the receiver sensitivity.

    Pointing loss and Eb/N0 affect the achievable rate, not whether the
    link exists.
    """
    return received_power_dbm(params, distance_m) >= params.rx_sensitivity_dbm


def link_time_s(params: CommParams, distance_m: float) -> float:
    """Time to push the full data unit across one link, whole packets only."""
    rate = shannon_rate_bps(params, distance_m)
    if rate <= 0.0:
        raise LinkBudgetError(
            f"zero achievable rate at {distance_m} m; cannot transfer data"
        )
    packets = math.ceil(params.data_size_bits / params.packet_size_bits)
    return packets * params.packet_size_bits / rate


def link_budget_report(params: CommParams, distance_m: float) -> list[tuple[str, float, str]]:
    """Itemized budget at one range: (label, value, unit) rows, gains then losses.

    The rows sum top to bottom: transmit power, antenna gain, fixed
    losses, path loss, received power, then the rate chain entries.
    """
    fspl = free_space_path_loss_db(distance_m, params.frequency_hz)
    rx = received_power_dbm(params, distance_m)
    floor = noise_floor_dbm(params)
    snr = snr_db(params, distance_m)
    rate = shannon_rate_bps(params, distance_m)
    return [
        ("transmit power", params.tx_power_dbm, "dBm"),
        ("antenna gain", params.antenna_gain_db, "dB"),
        ("fixed losses", -params.fixed_losses_db, "dB"),
        ("free-space path loss", -fspl, "dB"),
        ("received power", rx, "dBm"),
        ("receiver sensitivity", params.rx_sensitivity_dbm, "dBm"),
        ("link margin", rx - params.rx_sensitivity_dbm, "dB"),
        ("noise floor", floor, "dBm"),
        ("pointing loss", -params.pointing_loss_db, "dB"),
        ("SNR", snr, "dB"),
        ("achievable rate", rate, "bit/s"),
        ("Eb/N0", ebn0_db(params, distance_m), "dB"),
    ]


@dataclass(frozen=True)
class CommGraph:
    """Undirected relay graph over fixed node positions.

    Edges exist between nodes whose link closes; each edge is weighted by
    the time to push the full data unit across that single link.
    """

    positions: tuple[Point, ...]
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        out = []
        for (a, b), w in self.edges.items():
            if a == i:
                out.append((b, w))
            elif b == i:
                out.append((a, w))
        return out


def build_comm_graph(positions: list[Point], params: CommParams) -> CommGraph:
    """Disk-style graph from the link budget: O(n^2) pairwise check."""
    edges: dict[tuple[int, int], float] = {}
    n = len(positions)
    for i in range(n):
        xi, yi = positions[i]
        for j in range(i + 1, n):
            d = math.hypot(positions[j][0] - xi, positions[j][1] - yi)
            if d == 0.0:
                # Co-located nodes: treat as an ideal link at negligible cost.
                edges[(i, j)] = 0.0
            elif link_closes(params, d):
                edges[(i, j)] = link_time_s(params, d)
    return CommGraph(tuple(positions), edges)


def shortest_path(graph: CommGraph, src: int, dst: int) -> list[int] | None:
    """Minimum-total-time route between two nodes (Dijkstra).

    Returns the ordered node list including both endpoints, or None when
    the endpoints lie in different components.  Unknown node ids raise.
    """
    n = len(graph.positions)
    if not (0 <= src < n and 0 <= dst < n):
        raise ValueError(f"node ids must be in [0, {n}), got {src} and {dst}")
    if src == dst:
        return [src]

    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
    for (a, b), w in graph.edges.items():
        adj[a].append((b, w))
        adj[b].append((a, w))

    dist = {src: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            break
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if dst not in dist:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def path_time_s(graph: CommGraph, path: list[int]) -> float:
    """Total store-and-forward time along an explicit route."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        key = (a, b) if a < b else (b, a)
        if key not in graph.edges:
            raise ValueError(f"route uses missing link {a}-{b}")
        total += graph.edges[key]
    return total


def transmission_time_s(
    positions: list[Point], params: CommParams, src: int, dst: int
) -> float:
    """End-to-end transfer time for the full data unit over the best route.

    Raises DisconnectedError when src cannot reach dst through closed
    links.
    """
    graph = build_comm_graph(positions, params)
    path = shortest_path(graph, src, dst)
    if path is None:
        raise DisconnectedError(f"no relay route from node {src} to node {dst}")
    return path_time_s(graph, path)


def chain_times_s(
    params: CommParams, span_m: float, hop_counts: list[int]
) -> list[tuple[int, float]]:
    """Transfer time over an equally spaced relay chain, per relay count.

    For each n the span is split into n equal links and every link is
    traversed in turn (the data is regenerated at each relay, so no
    shortcutting).  Raises when a link in some configuration cannot
    close.
    """
    if span_m <= 0.0:
        raise ValueError(f"span must be positive, got {span_m}")
    out = []
    for n in hop_counts:
        if n < 1:
            raise ValueError(f"hop counts must be >= 1, got {n}")
        link = span_m / n
        if not link_closes(params, link):
            raise LinkBudgetError(
                f"a {link:.1f} m link ({n} hops over {span_m} m) does not close"
            )
        out.append((n, n * link_time_s(params, link)))
    return out
