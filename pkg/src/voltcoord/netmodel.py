"""Feeder data model: parsing, validation, per-unit conversion, admittance assembly.

The in-memory model is per-unit throughout.  The feeder document (JSON) carries
physical units -- ohms for impedances, kW/kVAr/kVA for powers -- and the parser
converts them on the declared bases.  Conversion uses a single-phase power base
``bases.power_kva`` and per-level line-to-neutral voltage bases
``bases.voltages_kv``, so ``z_base = (v_kv*1e3)**2 / (power_kva*1e3)`` ohms.

Buses, lines and regulators form a radial (tree) graph with exactly one source
bus whose per-phase complex voltage is held fixed.  Regulators are series
elements with an off-nominal turns ratio ``a``; their admittance stamp on the
(primary i, secondary j) node pair of each phase is::

    (1/z_t) * [[a^2, -a],
               [-a,   1]]

so a regulator at ``a = 1`` is a plain series impedance.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from jsonschema import Draft202012Validator

PHASES = (1, 2, 3)


class FeederError(ValueError):
    """Base class for feeder document / model problems."""


class SchemaError(FeederError):
    """The document violates the feeder file schema."""


class TopologyError(FeederError):
    """Dangling references, cycles, islands or missing/duplicate source."""


class SingularNetworkError(FeederError):
    """A line impedance block or the reduced admittance matrix is singular."""


FEEDER_SCHEMA = {
    "type": "object",
    "required": ["bases", "buses", "lines", "source"],
    "properties": {
        "bases": {
            "type": "object",
            "required": ["power_kva", "voltages_kv"],
            "properties": {
                "power_kva": {"type": "number", "exclusiveMinimum": 0},
                "voltages_kv": {
                    "type": "object",
                    "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "buses": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "phases"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "phases": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"enum": [1, 2, 3]},
                        "uniqueItems": True,
                    },
                    "level": {"type": "string"},
                },
            },
        },
        "lines": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "phases", "z_ohm"],
                "properties": {
                    "name": {"type": "string"},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "phases": {"type": "array", "minItems": 1, "items": {"enum": [1, 2, 3]}},
                    "z_ohm": {"type": "array"},
                },
            },
        },
        "regulators": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["primary", "secondary", "phases", "z_t_ohm",
                             "tap_min", "tap_max", "a_max"],
                "properties": {
                    "name": {"type": "string"},
                    "primary": {"type": "string"},
                    "secondary": {"type": "string"},
                    "phases": {"type": "array", "minItems": 1, "items": {"enum": [1, 2, 3]}},
                    "z_t_ohm": {"type": "array", "minItems": 2, "maxItems": 2,
                                "items": {"type": "number"}},
                    "tap_min": {"type": "integer"},
                    "tap_max": {"type": "integer"},
                    "a_max": {"type": "number"},
                    "ganged": {"type": "boolean"},
                },
            },
        },
        "loads": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["bus", "phase", "p_kw", "q_kvar"],
                "properties": {
                    "name": {"type": "string"},
                    "bus": {"type": "string"},
                    "phase": {"enum": [1, 2, 3]},
                    "p_kw": {"type": "number"},
                    "q_kvar": {"type": "number"},
                },
            },
        },
        "pvs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["bus", "phase", "p_dc_kw", "s_inv_kva"],
                "properties": {
                    "name": {"type": "string"},
                    "bus": {"type": "string"},
                    "phase": {"enum": [1, 2, 3]},
                    "p_dc_kw": {"type": "number", "minimum": 0},
                    "s_inv_kva": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "source": {
            "type": "object",
            "required": ["bus", "voltage_pu"],
            "properties": {
                "bus": {"type": "string"},
                "voltage_pu": {
                    "type": "array",
                    "items": {"type": "array", "minItems": 2, "maxItems": 2,
                              "items": {"type": "number"}},
                },
            },
        },
    },
}

_VALIDATOR = Draft202012Validator(FEEDER_SCHEMA)


@dataclass(frozen=True)
class Bases:
    power_kva: float                      # single-phase power base
    voltages_kv: tuple[tuple[str, float], ...]  # (level, line-to-neutral kV)

    def v_kv(self, level: str) -> float:
        for name, kv in self.voltages_kv:
            if name == level:
                return kv
        raise SchemaError(f"undeclared voltage level {level!r}")

    def z_base_ohm(self, level: str) -> float:
        v = self.v_kv(level) * 1e3
        return v * v / (self.power_kva * 1e3)


@dataclass(frozen=True)
class BusSpec:
    id: str
    phases: tuple[int, ...]
    level: str = "default"


@dataclass(frozen=True)
class LineSpec:
    name: str
    from_bus: str
    to_bus: str
    phases: tuple[int, ...]
    z_ohm: tuple[tuple[complex, ...], ...]  # |phases| x |phases| series impedance

    def z_pu(self, z_base: float) -> np.ndarray:
        return np.array(self.z_ohm, dtype=complex) / z_base


@dataclass(frozen=True)
class RegulatorSpec:
    name: str
    primary: str
    secondary: str
    phases: tuple[int, ...]
    z_t_ohm: complex          # per-phase series impedance, primary side
    tap_min: int
    tap_max: int
    a_max: float
    ganged: bool = True

    def z_t_pu(self, z_base: float) -> complex:
        return self.z_t_ohm / z_base

    @property
    def ratio_slope(self) -> float:
        """d(ratio)/d(tap)."""
        return (self.a_max - 1.0) / self.tap_max


@dataclass(frozen=True)
class LoadSpec:
    name: str
    bus: str
    phase: int
    p_kw: float
    q_kvar: float


@dataclass(frozen=True)
class PvSpec:
    name: str
    bus: str
    phase: int
    p_dc_kw: float
    s_inv_kva: float


@dataclass(frozen=True)
class SourceSpec:
    bus: str
    voltage_pu: tuple[complex, ...]  # aligned with the source bus's phase list


@dataclass(frozen=True)
class TapChannel:
    """One independently movable tap: a ganged regulator has one channel,
    a per-phase regulator one channel per phase."""
    reg_index: int
    phase: int | None  # None for ganged
    name: str


class NodePhaseIndex:
    """Bijection between (bus, phase) pairs and matrix row indices.

    Rows are ordered by bus id (lexicographic) then phase, so the ordering is a
    pure function of the model.
    """

    def __init__(self, buses: tuple[BusSpec, ...], source_bus: str):
        pairs = []
        for bus in sorted(buses, key=lambda b: b.id):
            for ph in sorted(bus.phases):
                pairs.append((bus.id, ph))
        self.pairs: tuple[tuple[str, int], ...] = tuple(pairs)
        self._row = {pair: k for k, pair in enumerate(pairs)}
        self.n = len(pairs)
        src = [k for k, (b, _) in enumerate(pairs) if b == source_bus]
        non = [k for k, (b, _) in enumerate(pairs) if b != source_bus]
        self.source_rows = np.array(src, dtype=int)
        self.nonsource_rows = np.array(non, dtype=int)
        self._nonsource_pos = {row: i for i, row in enumerate(non)}

    def row(self, bus: str, phase: int) -> int:
        try:
            return self._row[(bus, phase)]
        except KeyError:
            raise TopologyError(f"no node-phase ({bus!r}, phase {phase})") from None

    def nonsource_pos(self, bus: str, phase: int) -> int:
        """Position of (bus, phase) within the non-source subvector."""
        row = self.row(bus, phase)
        try:
            return self._nonsource_pos[row]
        except KeyError:
            raise TopologyError(f"({bus!r}, phase {phase}) is a source row") from None

    @property
    def nonsource_pairs(self) -> tuple[tuple[str, int], ...]:
        return tuple(self.pairs[r] for r in self.nonsource_rows)


@dataclass(frozen=True)
class FeederModel:
    bases: Bases
    buses: tuple[BusSpec, ...]
    lines: tuple[LineSpec, ...]
    regulators: tuple[RegulatorSpec, ...]
    loads: tuple[LoadSpec, ...]
    pvs: tuple[PvSpec, ...]
    source: SourceSpec

    @cached_property
    def index(self) -> NodePhaseIndex:
        return NodePhaseIndex(self.buses, self.source.bus)

    @cached_property
    def bus_map(self) -> dict[str, BusSpec]:
        return {b.id: b for b in self.buses}

    @cached_property
    def tap_channels(self) -> tuple[TapChannel, ...]:
        chans = []
        for i, reg in enumerate(self.regulators):
            if reg.ganged:
                chans.append(TapChannel(i, None, reg.name))
            else:
                for ph in reg.phases:
                    chans.append(TapChannel(i, ph, f"{reg.name}.{ph}"))
        return tuple(chans)

    @property
    def s_base_kva(self) -> float:
        return self.bases.power_kva

    def neutral_taps(self) -> tuple[int, ...]:
        return (0,) * len(self.tap_channels)

    def source_voltage(self) -> np.ndarray:
        """Full-length complex vector, zero at non-source rows."""
        v = np.zeros(self.index.n, dtype=complex)
        bus = self.bus_map[self.source.bus]
        for ph, val in zip(sorted(bus.phases), self.source.voltage_pu):
            v[self.index.row(bus.id, ph)] = val
        return v

    def load_s_pu(self, load: LoadSpec) -> complex:
        """Consumed apparent power in per-unit (positive for consumption)."""
        return (load.p_kw + 1j * load.q_kvar) / self.s_base_kva


def tap_to_ratio(tap: int, tap_max: int, a_max: float, tap_min: int | None = None) -> float:
    """Turns ratio for an integer tap position: 1 + (tap/tap_max)(a_max - 1)."""
    if tap_min is None:
        tap_min = -tap_max
    if not tap_min <= tap <= tap_max:
        raise ValueError(f"tap {tap} outside [{tap_min}, {tap_max}]")
    return 1.0 + (tap / tap_max) * (a_max - 1.0)


def regulator_stamp(z_t: complex, a: float) -> np.ndarray:
    """2x2 admittance block of a series regulator, ordered (primary, secondary)."""
    if z_t == 0:
        raise SingularNetworkError("regulator impedance must be nonzero")
    y = 1.0 / z_t
    return np.array([[a * a * y, -a * y], [-a * y, y]], dtype=complex)


def channel_ratios(model: FeederModel, taps) -> tuple[float, ...]:
    """Turns ratio per tap channel for integer taps (validates ranges)."""
    taps = tuple(int(t) for t in taps)
    if len(taps) != len(model.tap_channels):
        raise ValueError(f"expected {len(model.tap_channels)} taps, got {len(taps)}")
    out = []
    for chan, tap in zip(model.tap_channels, taps):
        reg = model.regulators[chan.reg_index]
        out.append(tap_to_ratio(tap, reg.tap_max, reg.a_max, reg.tap_min))
    return tuple(out)


def admittance_from_ratios(model: FeederModel, ratios) -> np.ndarray:
    """Full node-phase admittance matrix for explicit (possibly fractional) ratios.

    Per-unit.  Superposition of the inverted line impedance blocks in the usual
    [[+Y, -Y], [-Y, +Y]] pattern and one single-phase regulator stamp per
    (channel, phase).
    """
    idx = model.index
    y = np.zeros((idx.n, idx.n), dtype=complex)
    for line in model.lines:
        zb = model.bases.z_base_ohm(model.bus_map[line.from_bus].level)
        z = line.z_pu(zb)
        try:
            yblk = np.linalg.inv(z)
        except np.linalg.LinAlgError:
            raise SingularNetworkError(f"line {line.name!r} impedance block is singular")
        rows_f = [idx.row(line.from_bus, ph) for ph in line.phases]
        rows_t = [idx.row(line.to_bus, ph) for ph in line.phases]
        y[np.ix_(rows_f, rows_f)] += yblk
        y[np.ix_(rows_t, rows_t)] += yblk
        y[np.ix_(rows_f, rows_t)] -= yblk
        y[np.ix_(rows_t, rows_f)] -= yblk
    for chan, a in zip(model.tap_channels, ratios):
        reg = model.regulators[chan.reg_index]
        zb = model.bases.z_base_ohm(model.bus_map[reg.primary].level)
        stamp = regulator_stamp(reg.z_t_pu(zb), a)
        phases = reg.phases if chan.phase is None else (chan.phase,)
        for ph in phases:
            i = idx.row(reg.primary, ph)
            j = idx.row(reg.secondary, ph)
            y[np.ix_([i, j], [i, j])] += stamp
    return y


def build_admittance(model: FeederModel, taps) -> np.ndarray:
    """Admittance matrix at integer tap positions (validates tap ranges)."""
    return admittance_from_ratios(model, channel_ratios(model, taps))


@dataclass(frozen=True)
class SourceReduction:
    """Reduced network with the source bus voltages held fixed:
    V_nonsource = v_noload + zbus @ I_nonsource."""
    zbus: np.ndarray      # inverse of the non-source admittance block
    v_noload: np.ndarray  # non-source voltages at zero injection


def reduce_source(model: FeederModel, y: np.ndarray) -> SourceReduction:
    idx = model.index
    ns, src = idx.nonsource_rows, idx.source_rows
    y_nn = y[np.ix_(ns, ns)]
    y_ns = y[np.ix_(ns, src)]
    v_src = model.source_voltage()[src]
    try:
        zbus = np.linalg.inv(y_nn)
    except np.linalg.LinAlgError:
        raise SingularNetworkError("non-source admittance block is singular (island?)")
    v_noload = -zbus @ (y_ns @ v_src)
    return SourceReduction(zbus=zbus, v_noload=v_noload)


def delta_admittance(model: FeederModel, channel: TapChannel, a: float, a0: float) -> np.ndarray:
    """Linearized admittance change for one tap channel moving a0 -> a.

    Entries over the full node-phase index; linear in (a - a0):
    dY_ii = (2*a*a0 - 2*a0^2)/z_t, dY_ij = dY_ji = -(a - a0)/z_t.
    """
    return (a - a0) * tap_coefficient_matrix(model, channel, a0)


def tap_coefficient_matrix(model: FeederModel, channel: TapChannel, a0: float) -> np.ndarray:
    """d(dY)/da of the linearized stamp: M_ii = 2*a0/z_t, M_ij = M_ji = -1/z_t."""
    idx = model.index
    reg = model.regulators[channel.reg_index]
    zb = model.bases.z_base_ohm(model.bus_map[reg.primary].level)
    z_t = reg.z_t_pu(zb)
    m = np.zeros((idx.n, idx.n), dtype=complex)
    phases = reg.phases if channel.phase is None else (channel.phase,)
    for ph in phases:
        i = idx.row(reg.primary, ph)
        j = idx.row(reg.secondary, ph)
        m[i, i] += 2.0 * a0 / z_t
        m[i, j] -= 1.0 / z_t
        m[j, i] -= 1.0 / z_t
    return m


def _pairs_to_complex(rows) -> tuple[tuple[complex, ...], ...]:
    return tuple(tuple(complex(re, im) for re, im in row) for row in rows)


def _check_z_shape(z, n: int, what: str):
    if len(z) != n or any(len(row) != n for row in z):
        raise SchemaError(f"{what}: impedance must be {n}x{n} [re, im] pairs")
    for row in z:
        for entry in row:
            if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
                raise SchemaError(f"{what}: impedance entries must be [re, im] pairs")
            if entry[0] < 0:
                raise SchemaError(f"{what}: negative resistance {entry[0]}")


def parse_feeder(text) -> FeederModel:
    """Parse and validate a feeder document (JSON text, file content, or dict)."""
    doc = json.loads(text) if isinstance(text, (str, bytes)) else text
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SchemaError(f"feeder document: {'/'.join(str(p) for p in e.absolute_path)}: {e.message}")

    bases = Bases(
        power_kva=float(doc["bases"]["power_kva"]),
        voltages_kv=tuple(sorted((k, float(v)) for k, v in doc["bases"]["voltages_kv"].items())),
    )

    buses = []
    seen = set()
    for b in doc["buses"]:
        if b["id"] in seen:
            raise SchemaError(f"duplicate bus id {b['id']!r}")
        seen.add(b["id"])
        level = b.get("level", "default")
        bases.v_kv(level)  # raises on undeclared level
        buses.append(BusSpec(id=b["id"], phases=tuple(sorted(b["phases"])), level=level))
    buses = tuple(buses)
    bus_map = {b.id: b for b in buses}

    def check_bus_phases(bus_id: str, phases, what: str):
        if bus_id not in bus_map:
            raise TopologyError(f"{what} references undefined bus {bus_id!r}")
        missing = [p for p in phases if p not in bus_map[bus_id].phases]
        if missing:
            raise TopologyError(f"{what}: phases {missing} absent at bus {bus_id!r}")

    lines = []
    for k, ln in enumerate(doc["lines"]):
        name = ln.get("name", f"line{k}")
        phases = tuple(sorted(ln["phases"]))
        if len(set(phases)) != len(phases):
            raise SchemaError(f"line {name!r}: duplicate phases")
        check_bus_phases(ln["from"], phases, f"line {name!r}")
        check_bus_phases(ln["to"], phases, f"line {name!r}")
        if bus_map[ln["from"]].level != bus_map[ln["to"]].level:
            raise SchemaError(f"line {name!r} spans voltage levels")
        _check_z_shape(ln["z_ohm"], len(phases), f"line {name!r}")
        lines.append(LineSpec(name=name, from_bus=ln["from"], to_bus=ln["to"],
                              phases=phases, z_ohm=_pairs_to_complex(ln["z_ohm"])))

    regulators = []
    for k, rg in enumerate(doc.get("regulators", [])):
        name = rg.get("name", f"reg{k}")
        phases = tuple(sorted(set(rg["phases"])))
        check_bus_phases(rg["primary"], phases, f"regulator {name!r}")
        check_bus_phases(rg["secondary"], phases, f"regulator {name!r}")
        if rg["primary"] == rg["secondary"]:
            raise TopologyError(f"regulator {name!r} connects a bus to itself")
        if bus_map[rg["primary"]].level != bus_map[rg["secondary"]].level:
            raise SchemaError(f"regulator {name!r} spans voltage levels")
        z_t = complex(rg["z_t_ohm"][0], rg["z_t_ohm"][1])
        if abs(z_t) == 0:
            raise SchemaError(f"regulator {name!r}: zero impedance")
        if z_t.real < 0:
            raise SchemaError(f"regulator {name!r}: negative resistance")
        if not rg["tap_min"] < 0 < rg["tap_max"]:
            raise SchemaError(f"regulator {name!r}: need tap_min < 0 < tap_max")
        if not rg["a_max"] > 1.0:
            raise SchemaError(f"regulator {name!r}: a_max must exceed 1")
        regulators.append(RegulatorSpec(
            name=name, primary=rg["primary"], secondary=rg["secondary"], phases=phases,
            z_t_ohm=z_t, tap_min=int(rg["tap_min"]), tap_max=int(rg["tap_max"]),
            a_max=float(rg["a_max"]), ganged=bool(rg.get("ganged", True))))

    loads = []
    for k, ld in enumerate(doc.get("loads", [])):
        name = ld.get("name", f"load_{ld['bus']}_{ld['phase']}")
        check_bus_phases(ld["bus"], [ld["phase"]], f"load {name!r}")
        loads.append(LoadSpec(name=name, bus=ld["bus"], phase=int(ld["phase"]),
                              p_kw=float(ld["p_kw"]), q_kvar=float(ld["q_kvar"])))
    if len({l.name for l in loads}) != len(loads):
        raise SchemaError("duplicate load names")

    pvs = []
    for k, pv in enumerate(doc.get("pvs", [])):
        name = pv.get("name", f"pv_{pv['bus']}_{pv['phase']}")
        check_bus_phases(pv["bus"], [pv["phase"]], f"pv {name!r}")
        if pv["s_inv_kva"] < pv["p_dc_kw"]:
            raise SchemaError(f"pv {name!r}: inverter rating below DC rating")
        pvs.append(PvSpec(name=name, bus=pv["bus"], phase=int(pv["phase"]),
                          p_dc_kw=float(pv["p_dc_kw"]), s_inv_kva=float(pv["s_inv_kva"])))
    if len({p.name for p in pvs}) != len(pvs):
        raise SchemaError("duplicate pv names")

    src = doc["source"]
    if src["bus"] not in bus_map:
        raise TopologyError(f"source references undefined bus {src['bus']!r}")
    src_phases = bus_map[src["bus"]].phases
    if len(src["voltage_pu"]) != len(src_phases):
        raise SchemaError(f"source voltage needs {len(src_phases)} phase entries")
    source = SourceSpec(bus=src["bus"],
                        voltage_pu=tuple(complex(re, im) for re, im in src["voltage_pu"]))

    model = FeederModel(bases=bases, buses=buses, lines=lines and tuple(lines) or (),
                        regulators=tuple(regulators), loads=tuple(loads), pvs=tuple(pvs),
                        source=source)
    _validate_topology(model)
    return model


def _validate_topology(model: FeederModel):
    """Connected radial graph; every node-phase reaches the source on its phase."""
    edges = [(ln.from_bus, ln.to_bus, ln.phases) for ln in model.lines]
    edges += [(rg.primary, rg.secondary, rg.phases) for rg in model.regulators]
    n_bus = len(model.buses)
    if len(edges) != n_bus - 1:
        raise TopologyError(f"{n_bus} buses with {len(edges)} edges: not a tree")
    # bus-level connectivity (tree check: connected + |E| = |V|-1 implies acyclic)
    adj: dict[str, list[tuple[str, tuple[int, ...]]]] = {b.id: [] for b in model.buses}
    for f, t, ph in edges:
        adj[f].append((t, ph))
        adj[t].append((f, ph))
    seen = {model.source.bus}
    stack = [model.source.bus]
    while stack:
        here = stack.pop()
        for nxt, _ in adj[here]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if len(seen) != n_bus:
        missing = sorted(set(adj) - seen)
        raise TopologyError(f"buses not connected to the source: {missing}")
    # per-phase reachability (otherwise the reduced admittance block is singular)
    for phase in PHASES:
        targets = {b.id for b in model.buses if phase in b.phases}
        if not targets:
            continue
        if model.source.bus not in targets:
            raise TopologyError(f"phase {phase} exists but not at the source bus")
        reach = {model.source.bus}
        stack = [model.source.bus]
        while stack:
            here = stack.pop()
            for nxt, phs in adj[here]:
                if phase in phs and nxt not in reach:
                    reach.add(nxt)
                    stack.append(nxt)
        dangling = sorted(targets - reach)
        if dangling:
            raise TopologyError(f"phase {phase} at buses {dangling} has no path to the source")


def serialize_feeder(model: FeederModel) -> dict:
    """Inverse of parse_feeder: a document that parses back to an equal model."""
    return {
        "bases": {
            "power_kva": model.bases.power_kva,
            "voltages_kv": {k: v for k, v in model.bases.voltages_kv},
        },
        "buses": [{"id": b.id, "phases": list(b.phases), "level": b.level}
                  for b in model.buses],
        "lines": [{
            "name": ln.name, "from": ln.from_bus, "to": ln.to_bus,
            "phases": list(ln.phases),
            "z_ohm": [[[z.real, z.imag] for z in row] for row in ln.z_ohm],
        } for ln in model.lines],
        "regulators": [{
            "name": rg.name, "primary": rg.primary, "secondary": rg.secondary,
            "phases": list(rg.phases),
            "z_t_ohm": [rg.z_t_ohm.real, rg.z_t_ohm.imag],
            "tap_min": rg.tap_min, "tap_max": rg.tap_max, "a_max": rg.a_max,
            "ganged": rg.ganged,
        } for rg in model.regulators],
        "loads": [{"name": ld.name, "bus": ld.bus, "phase": ld.phase,
                   "p_kw": ld.p_kw, "q_kvar": ld.q_kvar} for ld in model.loads],
        "pvs": [{"name": pv.name, "bus": pv.bus, "phase": pv.phase,
                 "p_dc_kw": pv.p_dc_kw, "s_inv_kva": pv.s_inv_kva} for pv in model.pvs],
        "source": {"bus": model.source.bus,
                   "voltage_pu": [[v.real, v.imag] for v in model.source.voltage_pu]},
    }
