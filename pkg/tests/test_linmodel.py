import numpy as np
import pytest

from voltcoord.linmodel import (
    LinearizationError,
    all_tap_sensitivities,
    delta_pq,
    delta_v,
    linear_magnitude,
    linearize,
    recover_q,
    tap_sensitivity,
)
from voltcoord.netmodel import admittance_from_ratios, parse_feeder, reduce_source
from voltcoord.powerflow import NetworkMatrices, PowerFlowCase, solve_zbus
from conftest import load_injections, reg_feeder_doc


def solve_and_linearize(model, taps, scale=1.0, matrices=None):
    matrices = matrices or NetworkMatrices(model)
    s = load_injections(model, scale=scale)
    sol = solve_zbus(model, PowerFlowCase(taps=taps, s_injection=s),
                     tol=1e-12, matrices=matrices)
    return s, sol, linearize(model, sol, taps, matrices=matrices)


def exact_dv_at_ratios(model, lp, ratios, di):
    """Oracle: rebuild the network at explicit ratios, hold currents at I0 + dI."""
    y = admittance_from_ratios(model, ratios)
    red = reduce_source(model, y)
    return red.v_noload + red.zbus @ (lp.i0 + di) - lp.v0


class TestLinearize:
    def test_zero_load_point(self, feeder4, feeder4_matrices):
        sol = solve_zbus(feeder4, PowerFlowCase(taps=(0,), s_injection=np.zeros(8, complex)),
                         matrices=feeder4_matrices)
        lp = linearize(feeder4, sol, (0,), matrices=feeder4_matrices)
        assert np.abs(lp.i0).max() == 0.0
        assert np.allclose(lp.v0, lp.v_noload)
        assert lp.a0 == (1.0,)

    def test_consistency_residual_small(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (4,), scale=1.3, matrices=feeder4_matrices)
        gap = np.abs(lp.v0 - lp.v_noload - lp.zbus @ lp.i0).max()
        assert gap < 1e-8

    def test_inconsistent_solution_rejected(self, feeder4, feeder4_matrices):
        s = load_injections(feeder4)
        sol = solve_zbus(feeder4, PowerFlowCase(taps=(0,), s_injection=s),
                         matrices=feeder4_matrices)
        with pytest.raises(LinearizationError):
            linearize(feeder4, sol, (6,), matrices=feeder4_matrices)  # wrong taps


class TestTapSensitivity:
    def test_dead_network_gives_zero(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        dead = type(lp)(v0=np.zeros_like(lp.v0), i0=np.zeros_like(lp.i0), zbus=lp.zbus,
                        v_noload=np.zeros_like(lp.v_noload), taps0=lp.taps0, a0=lp.a0)
        k = tap_sensitivity(feeder4, dead, feeder4.tap_channels[0])
        # with no voltage anywhere a ratio change moves nothing
        assert np.abs(k).max() == 0.0

    def test_finite_difference_oracle(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (0,), scale=1.0, matrices=feeder4_matrices)
        k = tap_sensitivity(feeder4, lp, feeder4.tap_channels[0])
        reg = feeder4.regulators[0]
        slope = reg.ratio_slope
        rel = {}
        for frac in (1.0, 0.5):
            a = 1.0 + slope * frac
            dv_exact = exact_dv_at_ratios(feeder4, lp, (a,), np.zeros(8, complex))
            dv_lin = (a - 1.0) * k
            rel[frac] = (np.abs(dv_lin - dv_exact).max() / np.abs(dv_exact).max())
        assert rel[1.0] <= 0.02
        assert rel[0.5] <= rel[1.0] / 2.0 + 1e-9

    def test_two_regulator_superposition(self):
        doc = reg_feeder_doc()
        # append a second regulator feeding a fourth bus
        doc["buses"].append({"id": "b4", "phases": [1, 2, 3]})
        doc["regulators"].append({
            "name": "vr2", "primary": "b3", "secondary": "b4", "phases": [1, 2, 3],
            "z_t_ohm": doc["regulators"][0]["z_t_ohm"],
            "tap_min": -16, "tap_max": 16, "a_max": 1.1, "ganged": True})
        doc["loads"].append({"name": "ld4", "bus": "b4", "phase": 1,
                             "p_kw": 40.0, "q_kvar": 12.0})
        m = parse_feeder(doc)
        mats = NetworkMatrices(m)
        _, _, lp = solve_and_linearize(m, (0, 0), matrices=mats)
        sens = all_tap_sensitivities(m, lp)
        da = (0.3, -0.45)  # in units of one tap step each
        slope = m.regulators[0].ratio_slope
        ratios_both = (1 + slope * da[0], 1 + slope * da[1])
        combined = delta_v(lp, sens, ratios_both, np.zeros(lp.n, complex))
        single_0 = delta_v(lp, sens, (ratios_both[0], 1.0), np.zeros(lp.n, complex))
        single_1 = delta_v(lp, sens, (1.0, ratios_both[1]), np.zeros(lp.n, complex))
        assert np.abs(combined - single_0 - single_1).max() < 1e-12


class TestDeltaV:
    def test_zero_arguments(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        sens = all_tap_sensitivities(feeder4, lp)
        dv = delta_v(lp, sens, lp.a0, np.zeros(lp.n, complex))
        assert np.abs(dv).max() == 0.0

    def test_unit_current_reads_zbus_column(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        sens = all_tap_sensitivities(feeder4, lp)
        di = np.zeros(lp.n, complex)
        di[3] = 1.0
        dv = delta_v(lp, sens, lp.a0, di)
        assert np.allclose(dv, lp.zbus[:, 3])

    def test_against_exact_power_flow(self, feeder4, feeder4_matrices):
        """Tap moves up to 4 steps and 20% injection changes stay within 0.01 p.u."""
        s, sol, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        sens = all_tap_sensitivities(feeder4, lp)
        rng = np.random.default_rng(11)
        slope = feeder4.regulators[0].ratio_slope
        for _ in range(10):
            dtap = rng.integers(-4, 5)
            a = (1.0 + slope * dtap,)
            s_new = s * (1.0 + rng.uniform(-0.2, 0.2, size=8))
            sol2 = solve_zbus(feeder4, PowerFlowCase(taps=(int(dtap),), s_injection=s_new),
                              tol=1e-12, matrices=feeder4_matrices)
            ns = feeder4.index.nonsource_rows
            dv_exact = sol2.v[ns] - lp.v0
            di_exact = sol2.i[ns] - lp.i0
            dv_lin = delta_v(lp, sens, a, di_exact)
            assert np.abs(dv_lin - dv_exact).max() <= 0.01

    def test_first_order_error_ratio(self, feeder4, feeder4_matrices):
        """Halving the (ratio, current) perturbation shrinks the error 4x-ish."""
        _, _, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        sens = all_tap_sensitivities(feeder4, lp)
        rng = np.random.default_rng(3)
        slope = feeder4.regulators[0].ratio_slope
        ratios_ok = 0
        for _ in range(20):
            da = rng.uniform(-4, 4) * slope
            di = 0.3 * (rng.normal(size=8) + 1j * rng.normal(size=8))
            errs = []
            for eps in (1.0, 0.5):
                a = (1.0 + eps * da,)
                dv_lin = delta_v(lp, sens, a, eps * di)
                dv_exact = exact_dv_at_ratios(feeder4, lp, a, eps * di)
                errs.append(np.abs(dv_lin - dv_exact).max())
            if errs[1] == 0.0:
                continue
            if errs[0] / errs[1] >= 3.5:
                ratios_ok += 1
        assert ratios_ok >= 18  # quadratic decay in nearly every direction


class TestLinearMagnitude:
    def test_zero_perturbation(self):
        assert linear_magnitude(0.98 - 0.05j, 0.0, 0.0) == pytest.approx(abs(0.98 - 0.05j))

    def test_collinear_perturbation_exact(self):
        v0 = 0.8 + 0.6j
        eps = 1e-3
        dv = eps * v0 / abs(v0)
        got = linear_magnitude(v0, dv.real, dv.imag)
        assert got == pytest.approx(abs(v0) + eps, abs=1e-15)

    def test_perpendicular_perturbation_first_order_invariant(self):
        v0 = 0.8 + 0.6j
        eps = 1e-3
        dv = eps * 1j * v0 / abs(v0)
        got = linear_magnitude(v0, dv.real, dv.imag)
        assert got == pytest.approx(abs(v0), abs=1e-15)
        exact = abs(v0 + dv)
        assert abs(exact - got) < 2 * eps ** 2

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            v0 = complex(rng.uniform(0.8, 1.2), rng.uniform(-0.4, 0.4))
            h = 1e-6
            g_re = (abs(v0 + h) - abs(v0 - h)) / (2 * h)
            g_im = (abs(v0 + 1j * h) - abs(v0 - 1j * h)) / (2 * h)
            lin_re = linear_magnitude(v0, 1.0, 0.0) - abs(v0)
            lin_im = linear_magnitude(v0, 0.0, 1.0) - abs(v0)
            assert lin_re == pytest.approx(g_re, abs=1e-6)
            assert lin_im == pytest.approx(g_im, abs=1e-6)

    def test_error_ratio_quadratic(self):
        rng = np.random.default_rng(13)
        ok = 0
        for _ in range(25):
            v0 = complex(rng.uniform(0.9, 1.1), rng.uniform(-0.3, 0.3))
            d = complex(rng.normal(), rng.normal()) * 0.02
            errs = [abs(abs(v0 + eps * d) - linear_magnitude(v0, eps * d.real, eps * d.imag))
                    for eps in (1.0, 0.5)]
            if errs[1] > 0 and errs[0] / errs[1] >= 3.5:
                ok += 1
        assert ok >= 23

    def test_zero_voltage_rejected(self):
        with pytest.raises(LinearizationError):
            linear_magnitude(0j, 0.1, 0.0)


class TestDeltaPq:
    def test_all_zero(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        assert delta_pq(lp, 0.0, 0.0, 0.0, 0.0, 2) == (0.0, 0.0)

    def test_dropped_terms_identity(self, feeder4, feeder4_matrices):
        """Exact S change minus the linear part equals the bilinear products:
        P_err = dVre*dIre + dVim*dIim, Q_err = dVim*dIre - dVre*dIim."""
        _, _, lp = solve_and_linearize(feeder4, (0,), scale=1.2, matrices=feeder4_matrices)
        rng = np.random.default_rng(23)
        for k in range(lp.n):
            dv = complex(rng.normal(), rng.normal()) * 0.05
            di = complex(rng.normal(), rng.normal()) * 0.2
            s0 = lp.v0[k] * np.conj(lp.i0[k])
            s1 = (lp.v0[k] + dv) * np.conj(lp.i0[k] + di)
            dp_lin, dq_lin = delta_pq(lp, dv.real, dv.imag, di.real, di.imag, k)
            p_err = dv.real * di.real + dv.imag * di.imag
            q_err = dv.imag * di.real - dv.real * di.imag
            assert (s1 - s0).real - dp_lin == pytest.approx(p_err, abs=1e-12)
            assert (s1 - s0).imag - dq_lin == pytest.approx(q_err, abs=1e-12)

    def test_error_scales_quadratically(self, feeder4, feeder4_matrices):
        _, _, lp = solve_and_linearize(feeder4, (0,), scale=1.2, matrices=feeder4_matrices)
        rng = np.random.default_rng(29)
        ok = 0
        for _ in range(20):
            di = (rng.normal(size=lp.n) + 1j * rng.normal(size=lp.n)) * 0.2
            k = int(rng.integers(0, lp.n))
            errs = []
            for eps in (1.0, 0.5):
                dv = lp.zbus @ (eps * di)
                s0 = lp.v0[k] * np.conj(lp.i0[k])
                s1 = (lp.v0[k] + dv[k]) * np.conj(lp.i0[k] + eps * di[k])
                dp, dq = delta_pq(lp, dv[k].real, dv[k].imag,
                                  eps * di[k].real, eps * di[k].imag, k)
                errs.append(abs((s1 - s0) - complex(dp, dq)))
            if errs[1] > 0 and errs[0] / errs[1] >= 3.5:
                ok += 1
        assert ok >= 18


class TestRecoverQ:
    def test_no_perturbation_unity_pf(self):
        # a pure PV node at unity power factor injects no reactive power
        v0, i0 = 1.0 + 0.02j, 0.3 * np.exp(1j * np.angle(1.0 + 0.02j))
        q0 = recover_q(v0, i0)
        assert q0 == pytest.approx(0.0, abs=1e-12)

    def test_purely_real_phasors(self):
        assert recover_q(1.0 + 0j, 0.4 + 0j) == 0.0

    def test_exact_vs_linear_within_slack(self, feeder4, feeder4_matrices):
        """Exact recovered Q stays within the linear dQ plus a small slack."""
        _, _, lp = solve_and_linearize(feeder4, (0,), matrices=feeder4_matrices)
        rng = np.random.default_rng(31)
        for _ in range(50):
            k = int(rng.integers(0, lp.n))
            di = complex(rng.normal(), rng.normal()) * 0.3
            dv = (lp.zbus @ np.eye(lp.n, dtype=complex)[k] * di)[k]
            q_exact = recover_q(lp.v0[k] + dv, lp.i0[k] + di)
            q0 = recover_q(lp.v0[k], lp.i0[k])
            _, dq_lin = delta_pq(lp, dv.real, dv.imag, di.real, di.imag, k)
            assert abs(q_exact - (q0 + dq_lin)) <= 0.02
