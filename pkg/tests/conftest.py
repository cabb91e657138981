import numpy as np
import pytest

from voltcoord import four_bus, parse_feeder
from voltcoord.powerflow import NetworkMatrices


def two_bus_doc(z=(0.01, 0.02), p_kw=50.0, q_kvar=20.0):
    """Single-phase 2-bus feeder; impedance given in p.u. on a 100 kVA / 1 kV base
    (z_base = 10 ohm)."""
    return {
        "bases": {"power_kva": 100.0, "voltages_kv": {"default": 1.0}},
        "buses": [{"id": "s", "phases": [1]}, {"id": "m", "phases": [1]}],
        "lines": [{"name": "l1", "from": "s", "to": "m", "phases": [1],
                   "z_ohm": [[[z[0] * 10.0, z[1] * 10.0]]]}],
        "loads": [{"name": "ld", "bus": "m", "phase": 1, "p_kw": p_kw, "q_kvar": q_kvar}],
        "source": {"bus": "s", "voltage_pu": [[1.0, 0.0]]},
    }


def reg_feeder_doc(ganged=True, z_t_pu=(0.001, 0.008), tap_max=16, a_max=1.1):
    """3-bus three-phase feeder with one regulator between b2 and b3."""
    zb = 57.6  # 2.4 kV, 100 kVA single-phase base
    self_z = [0.004 * zb, 0.010 * zb]
    mut_z = [0.001 * zb, 0.004 * zb]
    zmat = [[self_z, mut_z, mut_z], [mut_z, self_z, mut_z], [mut_z, mut_z, self_z]]
    return {
        "bases": {"power_kva": 100.0, "voltages_kv": {"default": 2.4}},
        "buses": [{"id": "s", "phases": [1, 2, 3]},
                  {"id": "b2", "phases": [1, 2, 3]},
                  {"id": "b3", "phases": [1, 2, 3]}],
        "lines": [{"name": "l1", "from": "s", "to": "b2", "phases": [1, 2, 3],
                   "z_ohm": zmat}],
        "regulators": [{"name": "vr", "primary": "b2", "secondary": "b3",
                        "phases": [1, 2, 3],
                        "z_t_ohm": [z_t_pu[0] * zb, z_t_pu[1] * zb],
                        "tap_min": -tap_max, "tap_max": tap_max, "a_max": a_max,
                        "ganged": ganged}],
        "loads": [{"name": "ld1", "bus": "b3", "phase": 1, "p_kw": 60.0, "q_kvar": 20.0},
                  {"name": "ld2", "bus": "b3", "phase": 2, "p_kw": 30.0, "q_kvar": 10.0},
                  {"name": "ld3", "bus": "b3", "phase": 3, "p_kw": 45.0, "q_kvar": 15.0}],
        "pvs": [{"name": "pv1", "bus": "b3", "phase": 2, "p_dc_kw": 50.0,
                 "s_inv_kva": 55.0}],
        "source": {"bus": "s", "voltage_pu": [
            [1.0, 0.0], [-0.5, -0.8660254037844386], [-0.5, 0.8660254037844386]]},
    }


def load_injections(model, scale=1.0):
    """Net p.u. injection vector from the model's nominal loads (PVs off)."""
    s = np.zeros(len(model.index.nonsource_rows), dtype=complex)
    for ld in model.loads:
        s[model.index.nonsource_pos(ld.bus, ld.phase)] -= scale * model.load_s_pu(ld)
    return s


@pytest.fixture(scope="session")
def feeder4():
    return four_bus()


@pytest.fixture(scope="session")
def feeder4_matrices(feeder4):
    return NetworkMatrices(feeder4)


@pytest.fixture()
def two_bus():
    return parse_feeder(two_bus_doc())


@pytest.fixture()
def reg3():
    return parse_feeder(reg_feeder_doc())
