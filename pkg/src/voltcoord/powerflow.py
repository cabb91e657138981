"""Exact unbalanced AC power flow by Z-bus fixed-point current injection.

Constant-power injections only.  Iterates

    I_k = conj(S_k / V_k)          (non-source node-phases)
    V   = v_noload + zbus @ I

from a flat start at the no-load voltage until the largest apparent-power
mismatch |V_k * conj(I_k) - S_k| drops below tolerance.  This solver is the
ground-truth oracle everywhere else in the package: the linearized models are
judged against it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import FeederModel, SourceReduction, build_admittance, reduce_source

COLLAPSE_GUARD_PU = 0.5


class PowerFlowError(RuntimeError):
    pass


class ConvergenceError(PowerFlowError):
    def __init__(self, iterations: int, mismatch: float):
        super().__init__(f"no convergence in {iterations} iterations "
                         f"(last mismatch {mismatch:.3e} p.u.)")
        self.iterations = iterations
        self.mismatch = mismatch


class VoltageCollapseError(PowerFlowError):
    def __init__(self, vmin: float):
        super().__init__(f"voltage collapsed below {COLLAPSE_GUARD_PU} p.u. "
                         f"(min |V| = {vmin:.4f})")
        self.vmin = vmin


@dataclass(frozen=True)
class PowerFlowCase:
    """Integer taps plus net complex power injection per non-source node-phase
    (loads negative, generation positive), per-unit."""
    taps: tuple[int, ...]
    s_injection: np.ndarray


@dataclass(frozen=True)
class PowerFlowSolution:
    v: np.ndarray           # complex voltage, full node-phase index
    i: np.ndarray           # complex net injection current, full index
    iterations: int
    max_mismatch: float


class NetworkMatrices:
    """Per-model cache of (Y, source reduction) keyed by the tap vector."""

    def __init__(self, model: FeederModel):
        self.model = model
        self._cache: dict[tuple[int, ...], tuple[np.ndarray, SourceReduction]] = {}

    def at(self, taps) -> tuple[np.ndarray, SourceReduction]:
        key = tuple(int(t) for t in taps)
        hit = self._cache.get(key)
        if hit is None:
            y = build_admittance(self.model, key)
            hit = (y, reduce_source(self.model, y))
            self._cache[key] = hit
        return hit


def solve_zbus(model: FeederModel, case: PowerFlowCase, tol: float = 1e-9,
               max_iter: int = 50, matrices: NetworkMatrices | None = None) -> PowerFlowSolution:
    if tol <= 0:
        raise ValueError("tol must be positive")
    idx = model.index
    s = np.asarray(case.s_injection, dtype=complex)
    if s.shape != (len(idx.nonsource_rows),):
        raise ValueError(f"expected {len(idx.nonsource_rows)} injections, got {s.shape}")
    y, red = (matrices or NetworkMatrices(model)).at(case.taps)

    v = red.v_noload.copy()
    i = np.zeros_like(v)
    mismatch = np.inf
    for it in range(1, max_iter + 1):
        vmin = np.abs(v).min()
        if vmin < COLLAPSE_GUARD_PU:
            raise VoltageCollapseError(vmin)
        i = np.conj(s / v)
        v = red.v_noload + red.zbus @ i
        mismatch = np.abs(v * np.conj(i) - s).max()
        if mismatch <= tol:
            v_full = model.source_voltage()
            v_full[idx.nonsource_rows] = v
            i_full = np.zeros(idx.n, dtype=complex)
            i_full[idx.nonsource_rows] = i
            # source rows carry the current the source injects into the feeder
            i_full[idx.source_rows] = (y @ v_full)[idx.source_rows]
            return PowerFlowSolution(v=v_full, i=i_full, iterations=it, max_mismatch=mismatch)
    raise ConvergenceError(max_iter, float(mismatch))


def residual(model: FeederModel, solution: PowerFlowSolution, case: PowerFlowCase,
             matrices: NetworkMatrices | None = None) -> float:
    """Max apparent-power mismatch with currents recomputed from the voltages.

    Independent of the solution's own current iterate: I = Y @ V at non-source
    rows, then max |V_k conj(I_k) - S_k|.
    """
    idx = model.index
    y, _ = (matrices or NetworkMatrices(model)).at(case.taps)
    i = (y @ solution.v)[idx.nonsource_rows]
    v = solution.v[idx.nonsource_rows]
    return float(np.abs(v * np.conj(i) - case.s_injection).max())


def voltage_magnitudes(solution: PowerFlowSolution) -> np.ndarray:
    return np.abs(solution.v)
