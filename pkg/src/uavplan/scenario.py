"""Problem instances: service area, ground users, obstacles, radio and system parameters.

A scenario file is TOML with four sections::

    [area]            width / height in metres
    [channel]         carrier_frequency [Hz], path_loss_exponent, shadowing_stddev [dB],
                      reference_distance [m], excess-loss coefficients A C D E G,
                      noise_power [dBm], optional small_scale_fading ("none" | "rayleigh")
    [system]          uav_bandwidth [Hz], uav_max_power [dBm], flight_height [m],
                      max_velocity [m/s], control_period [s], attraction_factor,
                      repulsion_factor, uav_safety_distance [m], obstacle_safety_distance [m],
                      convergence_threshold, max_iterations, and a few optional knobs
    [[ues]]           one block per ground user: id, x, y, snr_threshold [dB]
    [[obstacles]]     optional discs: id, x, y, radius [m]

Everything is metres, Hz, dB/dBm and seconds at this layer; conversions to linear
units happen in the channel code.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

SPEED_OF_LIGHT = 299792458.0  # m/s

# Fallback demand threshold used by the generators, dB.
DEFAULT_SNR_THRESHOLD = -5.0

# Obstacle discs sampled by generate_random_scenario, radius range in metres.
OBSTACLE_RADIUS_RANGE = (100.0, 500.0)

# Sub-stream tags so different random quantities never share a seed sequence.
_UE_STREAM = 101
_OBSTACLE_STREAM = 102
_CLUSTER_STREAM = 103


class ScenarioError(Exception):
    """Base class for scenario file problems."""


class ScenarioParseError(ScenarioError):
    """File is not valid TOML or is missing required keys."""


class ScenarioValidationError(ScenarioError):
    """File parsed fine but violates a structural constraint."""


@dataclass(frozen=True)
class AreaSpec:
    width: float  # m
    height: float  # m


@dataclass(frozen=True)
class UePoint:
    id: int
    x: float  # m
    y: float  # m
    snr_threshold: float  # dB


@dataclass(frozen=True)
class Obstacle:
    """No-fly disc. UAVs keep a safety margin from its boundary."""

    id: int
    x: float  # m, centre
    y: float  # m, centre
    radius: float  # m


@dataclass(frozen=True)
class ChannelParams:
    carrier_frequency: float  # Hz
    path_loss_exponent: float
    shadowing_stddev: float  # dB
    reference_distance: float  # m
    # Empirical excess-loss fit A * f^C * d^D * (theta + E)^G with f in MHz,
    # d in m and theta in degrees. Single-letter names match the usual fit tables.
    A: float
    C: float
    D: float
    E: float
    G: float
    noise_power: float  # dBm
    small_scale_fading: str = "none"  # "none" -> |g|^2 = 1, "rayleigh" -> unit-mean
    speed_of_light: float = SPEED_OF_LIGHT  # m/s


@dataclass(frozen=True)
class SystemParams:
    uav_bandwidth: float  # Hz, shared equally inside a coalition
    uav_max_power: float  # dBm, per-UAV transmit budget
    flight_height: float  # m, common to the whole fleet
    max_velocity: float  # m/s, open bound on commanded speed
    control_period: float  # s
    attraction_factor: float
    repulsion_factor: float
    uav_safety_distance: float  # m, UAV-UAV spacing below which repulsion acts
    obstacle_safety_distance: float  # m, margin from discs and area edges
    convergence_threshold: float  # rate / speed stillness epsilon
    max_iterations: int
    initial_cluster_count: int = 1
    virtual_mass: float = 1.0  # normalised
    # Gate for the attraction term, dB. None means each UE's own demand threshold.
    attraction_snr_threshold: float | None = None
    power_step: float = 0.01  # W of extra link power per m/s of commanded speed


@dataclass(frozen=True)
class Scenario:
    area: AreaSpec
    channel: ChannelParams
    system: SystemParams
    ues: tuple[UePoint, ...]
    obstacles: tuple[Obstacle, ...] = ()

    @property
    def ue_count(self) -> int:
        return len(self.ues)

    def ue_positions(self) -> np.ndarray:
        """(M, 2) array of ground positions in metres."""
        return np.array([[u.x, u.y] for u in self.ues], dtype=float)

    def ue_thresholds_db(self) -> np.ndarray:
        return np.array([u.snr_threshold for u in self.ues], dtype=float)

    def obstacle_centers(self) -> np.ndarray:
        return np.array([[o.x, o.y] for o in self.obstacles], dtype=float).reshape(-1, 2)

    def obstacle_radii(self) -> np.ndarray:
        return np.array([o.radius for o in self.obstacles], dtype=float)


def default_area() -> AreaSpec:
    return AreaSpec(width=10_000.0, height=10_000.0)


def default_channel_params() -> ChannelParams:
    """1.4 GHz forest link: exponent 3.5, 6 dB shadowing, noise floor -130 dBm."""
    return ChannelParams(
        carrier_frequency=1.4e9,
        path_loss_exponent=3.5,
        shadowing_stddev=6.0,
        reference_distance=1.0,
        A=0.25,
        C=0.39,
        D=0.25,
        E=0.0,
        G=0.05,
        noise_power=-130.0,
    )


def default_system_params() -> SystemParams:
    return SystemParams(
        uav_bandwidth=2e6,
        uav_max_power=38.0,
        flight_height=200.0,
        max_velocity=20.0,
        control_period=1.0,
        attraction_factor=1000.0,
        repulsion_factor=300.0,
        uav_safety_distance=500.0,
        obstacle_safety_distance=100.0,
        convergence_threshold=1e-4,
        max_iterations=500,
    )


def validate(scenario: Scenario) -> None:
    """Raise ScenarioValidationError naming the first violated constraint."""
    a = scenario.area
    if a.width <= 0 or a.height <= 0:
        raise ScenarioValidationError("area dimensions must be positive")
    ch = scenario.channel
    if ch.carrier_frequency <= 0:
        raise ScenarioValidationError("carrier_frequency must be positive")
    if ch.reference_distance <= 0:
        raise ScenarioValidationError("reference_distance must be positive")
    if ch.shadowing_stddev < 0:
        raise ScenarioValidationError("shadowing_stddev must be non-negative")
    if ch.small_scale_fading not in ("none", "rayleigh"):
        raise ScenarioValidationError(
            f"small_scale_fading must be 'none' or 'rayleigh', got {ch.small_scale_fading!r}"
        )
    sy = scenario.system
    if sy.uav_bandwidth <= 0:
        raise ScenarioValidationError("uav_bandwidth must be positive")
    if sy.flight_height <= 0:
        raise ScenarioValidationError("flight_height must be positive")
    if sy.flight_height < ch.reference_distance:
        raise ScenarioValidationError("flight_height below the channel reference distance")
    if sy.max_velocity <= 0:
        raise ScenarioValidationError("max_velocity must be positive")
    if sy.control_period <= 0:
        raise ScenarioValidationError("control_period must be positive")
    if sy.virtual_mass <= 0:
        raise ScenarioValidationError("virtual_mass must be positive")
    if sy.convergence_threshold <= 0:
        raise ScenarioValidationError("convergence_threshold must be positive")
    if sy.max_iterations < 0:
        raise ScenarioValidationError("max_iterations must be non-negative")
    if sy.initial_cluster_count < 1:
        raise ScenarioValidationError("initial_cluster_count must be at least 1")
    if sy.power_step < 0:
        raise ScenarioValidationError("power_step must be non-negative")
    if not scenario.ues:
        raise ScenarioValidationError("scenario has no UEs")
    seen: set[int] = set()
    for u in scenario.ues:
        if u.id in seen:
            raise ScenarioValidationError(f"duplicate UE id {u.id}")
        seen.add(u.id)
        if not (0.0 <= u.x <= a.width and 0.0 <= u.y <= a.height):
            raise ScenarioValidationError(f"UE {u.id} outside area")
    seen_obs: set[int] = set()
    for o in scenario.obstacles:
        if o.id in seen_obs:
            raise ScenarioValidationError(f"duplicate obstacle id {o.id}")
        seen_obs.add(o.id)
        if o.radius <= 0:
            raise ScenarioValidationError(f"obstacle {o.id} radius must be positive")
        if not (
            o.radius <= o.x <= a.width - o.radius
            and o.radius <= o.y <= a.height - o.radius
        ):
            raise ScenarioValidationError(f"obstacle {o.id} not fully inside area")


# --- TOML I/O ---------------------------------------------------------------

_CHANNEL_REQUIRED = (
    "carrier_frequency",
    "path_loss_exponent",
    "shadowing_stddev",
    "reference_distance",
    "A",
    "C",
    "D",
    "E",
    "G",
    "noise_power",
)
_SYSTEM_REQUIRED = (
    "uav_bandwidth",
    "uav_max_power",
    "flight_height",
    "max_velocity",
    "control_period",
    "attraction_factor",
    "repulsion_factor",
    "uav_safety_distance",
    "obstacle_safety_distance",
    "convergence_threshold",
    "max_iterations",
)


def _build_section(cls, table: dict, section: str, required: tuple[str, ...]):
    fields = {f.name for f in dataclasses.fields(cls)}
    for key in required:
        if key not in table:
            raise ScenarioParseError(f"[{section}] missing key {key!r}")
    unknown = set(table) - fields
    if unknown:
        raise ScenarioParseError(f"[{section}] unknown key {sorted(unknown)[0]!r}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in table:
            value = table[f.name]
            if f.name in ("max_iterations", "initial_cluster_count"):
                kwargs[f.name] = int(value)
            elif isinstance(value, bool):
                raise ScenarioParseError(f"[{section}] key {f.name!r} must be a number")
            elif isinstance(value, (int, float)):
                kwargs[f.name] = float(value)
            else:
                kwargs[f.name] = value
    return cls(**kwargs)


def loads(text: str) -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioParseError(f"not valid TOML: {exc}") from exc
    for section in ("area", "channel", "system", "ues"):
        if section not in data:
            raise ScenarioParseError(f"missing [{section}] section")
    area_tab = data["area"]
    for key in ("width", "height"):
        if key not in area_tab:
            raise ScenarioParseError(f"[area] missing key {key!r}")
    area = AreaSpec(width=float(area_tab["width"]), height=float(area_tab["height"]))
    channel = _build_section(ChannelParams, data["channel"], "channel", _CHANNEL_REQUIRED)
    system = _build_section(SystemParams, data["system"], "system", _SYSTEM_REQUIRED)
    ues = []
    for i, tab in enumerate(data["ues"]):
        for key in ("id", "x", "y", "snr_threshold"):
            if key not in tab:
                raise ScenarioParseError(f"[[ues]] entry {i} missing key {key!r}")
        ues.append(
            UePoint(
                id=int(tab["id"]),
                x=float(tab["x"]),
                y=float(tab["y"]),
                snr_threshold=float(tab["snr_threshold"]),
            )
        )
    obstacles = []
    for i, tab in enumerate(data.get("obstacles", [])):
        for key in ("id", "x", "y", "radius"):
            if key not in tab:
                raise ScenarioParseError(f"[[obstacles]] entry {i} missing key {key!r}")
        obstacles.append(
            Obstacle(
                id=int(tab["id"]),
                x=float(tab["x"]),
                y=float(tab["y"]),
                radius=float(tab["radius"]),
            )
        )
    scenario = Scenario(
        area=area,
        channel=channel,
        system=system,
        ues=tuple(ues),
        obstacles=tuple(obstacles),
    )
    validate(scenario)
    return scenario


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def _toml_value(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def dumps(scenario: Scenario) -> str:
    """Serialise so that loads(dumps(s)) == s, floats included."""
    validate(scenario)
    lines: list[str] = []

    def emit(section: str, pairs):
        lines.append(f"[{section}]")
        for key, value in pairs:
            lines.append(f"{key} = {_toml_value(value)}")
        lines.append("")

    emit("area", [("width", scenario.area.width), ("height", scenario.area.height)])

    ch_pairs = [(f.name, getattr(scenario.channel, f.name)) for f in dataclasses.fields(ChannelParams)]
    emit("channel", ch_pairs)

    sy_pairs = []
    for f in dataclasses.fields(SystemParams):
        value = getattr(scenario.system, f.name)
        if f.name == "attraction_snr_threshold" and value is None:
            continue  # no TOML null; absent key means "use each UE's demand"
        if f.name in ("max_iterations", "initial_cluster_count"):
            value = int(value)
        sy_pairs.append((f.name, value))
    emit("system", sy_pairs)

    for u in scenario.ues:
        lines.append("[[ues]]")
        lines.append(f"id = {u.id}")
        lines.append(f"x = {_toml_value(u.x)}")
        lines.append(f"y = {_toml_value(u.y)}")
        lines.append(f"snr_threshold = {_toml_value(u.snr_threshold)}")
        lines.append("")
    for o in scenario.obstacles:
        lines.append("[[obstacles]]")
        lines.append(f"id = {o.id}")
        lines.append(f"x = {_toml_value(o.x)}")
        lines.append(f"y = {_toml_value(o.y)}")
        lines.append(f"radius = {_toml_value(o.radius)}")
        lines.append("")
    return "\n".join(lines)


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(scenario))


# --- generators -------------------------------------------------------------


def _sample_obstacles(
    rng: np.random.Generator,
    count: int,
    area: AreaSpec,
    ue_xy: np.ndarray,
) -> tuple[Obstacle, ...]:
    # Discs must fit inside the area and must not cover any UE, so rejection
    # sample. 10k attempts per disc is far more than ever needed in practice.
    obstacles: list[Obstacle] = []
    for oid in range(count):
        for _ in range(10_000):
            radius = rng.uniform(*OBSTACLE_RADIUS_RANGE)
            if 2 * radius > min(area.width, area.height):
                continue
            x = rng.uniform(radius, area.width - radius)
            y = rng.uniform(radius, area.height - radius)
            d2 = (ue_xy[:, 0] - x) ** 2 + (ue_xy[:, 1] - y) ** 2
            if np.all(d2 > radius**2):
                obstacles.append(Obstacle(id=oid, x=float(x), y=float(y), radius=float(radius)))
                break
        else:
            raise ScenarioValidationError(
                f"could not place obstacle {oid} without covering a UE"
            )
    return tuple(obstacles)


def generate_random_scenario(
    seed: int,
    ue_count: int,
    obstacle_count: int = 0,
    *,
    area: AreaSpec | None = None,
    channel: ChannelParams | None = None,
    system: SystemParams | None = None,
    snr_threshold: float = DEFAULT_SNR_THRESHOLD,
) -> Scenario:
    """Uniformly scattered UEs plus non-covering obstacle discs, fully seeded."""
    if ue_count < 1:
        raise ScenarioValidationError("ue_count must be at least 1")
    if obstacle_count < 0:
        raise ScenarioValidationError("obstacle_count must be non-negative")
    area = area or default_area()
    channel = channel or default_channel_params()
    system = system or default_system_params()
    ue_rng = np.random.default_rng([_UE_STREAM, seed])
    xs = ue_rng.uniform(0.0, area.width, ue_count)
    ys = ue_rng.uniform(0.0, area.height, ue_count)
    ues = tuple(
        UePoint(id=k, x=float(xs[k]), y=float(ys[k]), snr_threshold=snr_threshold)
        for k in range(ue_count)
    )
    obs_rng = np.random.default_rng([_OBSTACLE_STREAM, seed])
    obstacles = _sample_obstacles(obs_rng, obstacle_count, area, np.column_stack([xs, ys]))
    scenario = Scenario(area=area, channel=channel, system=system, ues=ues, obstacles=obstacles)
    validate(scenario)
    return scenario


def generate_clustered_scenario(
    seed: int,
    ue_count: int,
    cluster_count: int,
    cluster_sigma: float = 150.0,
    obstacle_count: int = 0,
    *,
    area: AreaSpec | None = None,
    channel: ChannelParams | None = None,
    system: SystemParams | None = None,
    snr_threshold: float = DEFAULT_SNR_THRESHOLD,
) -> Scenario:
    """UEs in Gaussian blobs around well separated centres.

    Victim groups bunch up in practice, and blobby instances keep the minimal
    covering fleet small, so most experiment drivers use this generator.
    """
    if ue_count < 1:
        raise ScenarioValidationError("ue_count must be at least 1")
    if cluster_count < 1 or cluster_count > ue_count:
        raise ScenarioValidationError("cluster_count must be in 1..ue_count")
    area = area or default_area()
    channel = channel or default_channel_params()
    system = system or default_system_params()
    rng = np.random.default_rng([_CLUSTER_STREAM, seed])
    margin = min(3.0 * cluster_sigma, 0.25 * min(area.width, area.height))
    min_sep = 0.25 * min(area.width, area.height)
    centers = np.empty((cluster_count, 2))
    placed = 0
    attempts = 0
    while placed < cluster_count:
        attempts += 1
        cand = np.array(
            [
                rng.uniform(margin, area.width - margin),
                rng.uniform(margin, area.height - margin),
            ]
        )
        if placed and np.min(np.linalg.norm(centers[:placed] - cand, axis=1)) < min_sep:
            if attempts < 10_000:
                continue
            # Crowded request; accept whatever still fits rather than spin.
        centers[placed] = cand
        placed += 1
    ues = []
    for k in range(ue_count):
        c = centers[k % cluster_count]
        xy = rng.normal(c, cluster_sigma, size=2)
        xy[0] = min(max(xy[0], 0.0), area.width)
        xy[1] = min(max(xy[1], 0.0), area.height)
        ues.append(UePoint(id=k, x=float(xy[0]), y=float(xy[1]), snr_threshold=snr_threshold))
    ue_xy = np.array([[u.x, u.y] for u in ues])
    obs_rng = np.random.default_rng([_OBSTACLE_STREAM, seed, 1])
    obstacles = _sample_obstacles(obs_rng, obstacle_count, area, ue_xy)
    scenario = Scenario(
        area=area, channel=channel, system=system, ues=tuple(ues), obstacles=obstacles
    )
    validate(scenario)
    return scenario
