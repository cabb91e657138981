"""First-order voltage model around a solved operating point.

Everything downstream of the MILP is affine in the decision quantities:

* tap effects enter through per-channel sensitivity vectors ``K`` such that a
  ratio move (a - a0) shifts the non-source voltages by (a - a0) * K,
* injection-current changes enter through the reduced impedance matrix,
* voltage magnitudes are linearized along the operating-point phasor,
* nodal P/Q changes are the bilinear expansion of S = V conj(I) with the
  second-order (delta*delta) products dropped.

The sensitivity is K = -zbus @ (M @ V0_full)|non-source where M is the
admittance slope of the linearized regulator stamp.  Using the full operating
voltage (source rows included) folds in both the tap's effect on the no-load
voltage and on the impedance seen by the injections; with the source's Norton
current absorbed into the injection vector this is exactly -Y^-1 dY Y^-1 I0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import FeederModel, TapChannel, channel_ratios, tap_coefficient_matrix
from .powerflow import NetworkMatrices, PowerFlowSolution

CONSISTENCY_TOL = 1e-8


class LinearizationError(ValueError):
    pass


@dataclass(frozen=True)
class LinearizationPoint:
    """Operating point (V0, I0, zbus, a0, taps0) all per-unit, non-source rows."""
    v0: np.ndarray          # complex voltages
    i0: np.ndarray          # complex physical injection currents
    zbus: np.ndarray
    v_noload: np.ndarray
    taps0: tuple[int, ...]
    a0: tuple[float, ...]   # ratio per tap channel

    @property
    def n(self) -> int:
        return len(self.v0)


def linearize(model: FeederModel, solution: PowerFlowSolution, taps0,
              matrices: NetworkMatrices | None = None) -> LinearizationPoint:
    """Extract a linearization point from a converged exact solution at taps0."""
    idx = model.index
    taps0 = tuple(int(t) for t in taps0)
    _, red = (matrices or NetworkMatrices(model)).at(taps0)
    v0 = solution.v[idx.nonsource_rows]
    i0 = solution.i[idx.nonsource_rows]
    gap = np.abs(v0 - red.v_noload - red.zbus @ i0).max()
    if gap > CONSISTENCY_TOL:
        raise LinearizationError(
            f"solution inconsistent with the network at taps {taps0} "
            f"(|V0 - v_noload - zbus@I0| = {gap:.3e})")
    return LinearizationPoint(v0=v0, i0=i0, zbus=red.zbus, v_noload=red.v_noload,
                              taps0=taps0, a0=channel_ratios(model, taps0))


def tap_sensitivity(model: FeederModel, lp: LinearizationPoint,
                    channel: TapChannel) -> np.ndarray:
    """dV/da for one tap channel at the linearization point (complex, non-source)."""
    idx = model.index
    chan_pos = model.tap_channels.index(channel)
    m = tap_coefficient_matrix(model, channel, lp.a0[chan_pos])
    v_full = model.source_voltage()
    v_full[idx.nonsource_rows] = lp.v0
    return -lp.zbus @ (m @ v_full)[idx.nonsource_rows]


def all_tap_sensitivities(model: FeederModel, lp: LinearizationPoint) -> np.ndarray:
    """Stacked sensitivities, shape (n_channels, n_nonsource)."""
    return np.array([tap_sensitivity(model, lp, c) for c in model.tap_channels])


def delta_v(lp: LinearizationPoint, sens: np.ndarray, ratios, di: np.ndarray) -> np.ndarray:
    """Voltage perturbation for ratio moves and injection-current changes."""
    ratios = np.asarray(ratios, dtype=float)
    dv = lp.zbus @ np.asarray(di, dtype=complex)
    for k, a0 in enumerate(lp.a0):
        dv = dv + (ratios[k] - a0) * sens[k]
    return dv


def linear_magnitude(v0: complex | np.ndarray, dv_re, dv_im):
    """|v0| + (Re(v0)*dv_re + Im(v0)*dv_im)/|v0| -- first order in the perturbation."""
    v0 = np.asarray(v0, dtype=complex)
    mag = np.abs(v0)
    if np.any(mag == 0):
        raise LinearizationError("zero linearization voltage")
    return mag + (v0.real * np.asarray(dv_re) + v0.imag * np.asarray(dv_im)) / mag


def delta_pq(lp: LinearizationPoint, dv_re, dv_im, di_re, di_im, k: int) -> tuple[float, float]:
    """Linearized (dP, dQ) at non-source node-phase k.

    dP = V_re0*dI_re + dV_re*I_re0 + V_im0*dI_im + dV_im*I_im0
    dQ = V_im0*dI_re + dV_im*I_re0 - V_re0*dI_im - dV_re*I_im0
    """
    vr, vi = lp.v0[k].real, lp.v0[k].imag
    ir, ii = lp.i0[k].real, lp.i0[k].imag
    dp = vr * di_re + dv_re * ir + vi * di_im + dv_im * ii
    dq = vi * di_re + dv_im * ir - vr * di_im - dv_re * ii
    return float(dp), float(dq)


def recover_q(v: complex, i: complex) -> float:
    """Exact net reactive injection Q = Im(V conj(I)) at a node-phase, per-unit.

    Evaluated at the optimizer's perturbed (V0+dV, I0+dI); this is the exact
    product, not its linearization.
    """
    return float(np.imag(v * np.conj(i)))
