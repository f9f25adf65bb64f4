import math

import numpy as np
import pytest

from acclab.ode import SolverSettings
from acclab.vacuum import (Chamber, ConductanceLink, EquilibriumError,
                           NetworkError, Pump, VacuumNetwork, build_ode,
                           effective_speed, pumpdown, steady_state)


def single_chamber(volume=100.0, p0=1000.0, outgassing=0.0,
                   speed=10.0, p_ult=1e-12):
    return VacuumNetwork(
        chambers=[Chamber("c", volume, p0, outgassing)],
        pumps=[Pump("pump", "c", speed, p_ult)],
    )


class TestEffectiveSpeed:
    def test_infinite_conductance_identity(self):
        assert effective_speed(10.0, math.inf) == 10.0

    def test_symmetric_reciprocal_sum(self):
        assert effective_speed(10.0, 10.0) == pytest.approx(5.0, abs=1e-15)

    def test_series_formula(self):
        # 1/(1/20 + 1/5) = 4
        assert effective_speed(20.0, 5.0) == pytest.approx(4.0, abs=1e-15)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            effective_speed(0.0, 5.0)
        with pytest.raises(ValueError):
            effective_speed(5.0, -1.0)


class TestTypes:
    def test_chamber_invariants(self):
        with pytest.raises(NetworkError):
            Chamber("c", -1.0, 100.0)
        with pytest.raises(NetworkError):
            Chamber("c", 1.0, 0.0)
        with pytest.raises(NetworkError):
            Chamber("c", 1.0, 100.0, outgassing_rate=-0.1)

    def test_link_invariants(self):
        with pytest.raises(NetworkError):
            ConductanceLink("v", ("a", "a"), 5.0)
        with pytest.raises(NetworkError):
            ConductanceLink("v", ("a", "b"), 0.0)

    def test_network_reference_checks(self):
        with pytest.raises(NetworkError):
            VacuumNetwork(chambers=[Chamber("a", 1, 1)],
                          pumps=[Pump("p", "ghost", 1.0, 1e-6)])
        with pytest.raises(NetworkError):
            VacuumNetwork(chambers=[Chamber("a", 1, 1)],
                          links=[ConductanceLink("v", ("a", "ghost"), 1.0)])
        with pytest.raises(NetworkError):
            VacuumNetwork(chambers=[])


class TestBuildOde:
    def test_isolated_chamber_is_static(self):
        net = VacuumNetwork(chambers=[Chamber("c", 50.0, 200.0)])
        system = build_ode(net)
        for p in (1.0, 100.0, 1e5):
            assert system.rhs(0.0, np.log([p]))[0] == 0.0

    def test_single_pumped_chamber_rate(self):
        # V=100, S=10, p_ult -> 0: dp/dt = -0.1 p, so d(ln p)/dt = -0.1
        net = single_chamber(p_ult=1e-300)
        system = build_ode(net)
        for p in (1000.0, 10.0, 0.5):
            assert system.rhs(0.0, np.log([p]))[0] == pytest.approx(-0.1,
                                                                    rel=1e-12)

    def test_closed_valve_decouples_chambers(self):
        joint = VacuumNetwork(
            chambers=[Chamber("a", 100.0, 1000.0), Chamber("b", 20.0, 10.0)],
            pumps=[Pump("p", "a", 10.0, 1e-12)],
            links=[ConductanceLink("v", ("a", "b"), 50.0, valve_open=False)],
        )
        alone_a = build_ode(VacuumNetwork(
            chambers=[Chamber("a", 100.0, 1000.0)],
            pumps=[Pump("p", "a", 10.0, 1e-12)]))
        alone_b = build_ode(VacuumNetwork(chambers=[Chamber("b", 20.0, 10.0)]))
        both = build_ode(joint)
        state = np.log([700.0, 9.0])
        du = both.rhs(0.0, state)
        assert du[0] == alone_a.rhs(0.0, state[:1])[0]
        assert du[1] == alone_b.rhs(0.0, state[1:])[0]

    def test_labels_are_chamber_ids(self):
        net = VacuumNetwork(chambers=[Chamber("x", 1, 1), Chamber("y", 1, 1)])
        assert build_ode(net).state_labels == ["x", "y"]


class TestPumpdown:
    def test_matches_analytic_exponential(self):
        # p(t) = p0 exp(-S t / V); p(30) = 1000 exp(-3) = 49.787068367863945
        out = pumpdown(single_chamber(), 30.0, 61)
        assert out.channel("c")[-1] == pytest.approx(49.787068367863945,
                                                     rel=1e-3)
        assert out.units["c"] == "Pa"

    def test_zero_speed_holds_pressure(self):
        out = pumpdown(single_chamber(speed=0.0), 100.0, 21)
        assert np.allclose(out.channel("c"), 1000.0, rtol=1e-9)

    def test_approaches_ultimate_from_above(self):
        p_ult = 1e-2
        out = pumpdown(single_chamber(p_ult=p_ult), 300.0, 301)
        p = out.channel("c")
        assert np.all(p > p_ult)
        assert np.all(np.diff(p) <= 1e-12)  # monotone within solver noise
        expected = p_ult + (1000.0 - p_ult) * math.exp(-30.0)
        assert p[-1] == pytest.approx(expected, rel=1e-3)

    def test_positivity_everywhere(self):
        net = VacuumNetwork(
            chambers=[Chamber("a", 10.0, 1e5), Chamber("b", 500.0, 1.0)],
            pumps=[Pump("p", "b", 200.0, 1e-9)],
            links=[ConductanceLink("v", ("a", "b"), 80.0)],
        )
        out = pumpdown(net, 600.0, 200)
        for label in out.labels:
            assert np.all(out.channel(label) > 0.0)

    def test_gas_conservation_with_pumps_off(self):
        # no pumps, open valve: total gas V1 p1 + V2 p2 is conserved
        settings = SolverSettings(rel_tol=1e-8, abs_tol=1e-10)
        net = VacuumNetwork(
            chambers=[Chamber("a", 100.0, 1000.0), Chamber("b", 25.0, 10.0)],
            links=[ConductanceLink("v", ("a", "b"), 5.0)],
        )
        out = pumpdown(net, 1000.0, 101, settings=settings)
        total = 100.0 * out.channel("a") + 25.0 * out.channel("b")
        drift = np.max(np.abs(total - total[0])) / total[0]
        assert drift < 10 * settings.rel_tol

    def test_duration_must_be_positive(self):
        with pytest.raises(ValueError):
            pumpdown(single_chamber(), 0.0, 10)


class TestSteadyState:
    def test_single_chamber_balance(self):
        # Q = S (p - p_ult): p = 1/10 + 1e-6
        net = VacuumNetwork(
            chambers=[Chamber("c", 40.0, 500.0, outgassing_rate=1.0)],
            pumps=[Pump("p", "c", 10.0, 1e-6)],
        )
        assert steady_state(net)["c"] == pytest.approx(0.100001, rel=1e-12)

    def test_no_load_reaches_ultimate_exactly(self):
        net = single_chamber(p_ult=1e-4)
        assert steady_state(net)["c"] == pytest.approx(1e-4, rel=1e-12)

    def test_conductance_limited_chamber(self):
        # hand-solved two-node balance: pc = p_ult + Q/S_eff, pm = p_ult + Q/S
        Q, C, S, p_ult = 2.0, 5.0, 20.0, 1e-4
        net = VacuumNetwork(
            chambers=[Chamber("c", 30.0, 900.0, outgassing_rate=Q),
                      Chamber("m", 5.0, 900.0)],
            pumps=[Pump("p", "m", S, p_ult)],
            links=[ConductanceLink("v", ("c", "m"), C)],
        )
        result = steady_state(net)
        s_eff = effective_speed(S, C)
        assert result["c"] == pytest.approx(p_ult + Q / s_eff, rel=1e-12)
        assert result["c"] == pytest.approx(0.5001, rel=1e-12)
        assert result["m"] == pytest.approx(p_ult + Q / S, rel=1e-12)

    def test_unpumped_gas_load_has_no_equilibrium(self):
        net = VacuumNetwork(
            chambers=[Chamber("c", 10.0, 100.0, outgassing_rate=0.5)])
        with pytest.raises(EquilibriumError):
            steady_state(net)

    def test_long_time_limit_agrees_with_pumpdown(self):
        net = VacuumNetwork(
            chambers=[Chamber("a", 50.0, 2000.0, outgassing_rate=0.2),
                      Chamber("b", 10.0, 2000.0)],
            pumps=[Pump("p", "b", 25.0, 1e-5)],
            links=[ConductanceLink("v", ("a", "b"), 12.0)],
        )
        eq = steady_state(net)
        out = pumpdown(net, 200.0, 51)
        for label in ("a", "b"):
            assert out.channel(label)[-1] == pytest.approx(eq[label], rel=5e-3)
