import numpy as np
import pytest

from segsolve.benchmarks import example1, example2, example3, summed_error
from segsolve.core import MultiPhaseState, scheme_residual
from segsolve.dynamics import Dynamics, builtin
from segsolve.errors import InternalConsistencyError, NumericalError, ProblemDefinitionError, ValidationError
from segsolve.problem import NodeTable, ProblemSpec
from segsolve.solver import SolveConfig, initialize, iterate_step, resolve_threads, solve, successive_delta
from segsolve.twophase import TwoPhaseProblem, solve_twophase


def _toy(f0=None, n=2):
    dyn = (f0 or builtin("zero"), builtin("zero"))
    return ProblemSpec("toy", 2, (NodeTable([1.0, 0.0], 1, n), NodeTable([0.0, 0.0], 1, n)), dyn, dim=1, n=n)


def test_toy_single_step():
    p = _toy()
    s = iterate_step(initialize(p), p.dynamics)
    np.testing.assert_array_equal(s.values, [[1.0, 0.5, 0.0], [0.0, 0.0, 0.0]])
    p = _toy(builtin("constant", 4.0))
    s = iterate_step(initialize(p), p.dynamics)
    assert s.values[0, 1] == 0.0


def test_zero_boundary_converges_immediately():
    p = ProblemSpec("zero", 3, tuple(NodeTable(np.zeros(40), 2, 10) for _ in range(3)),
                    (builtin("constant", 1.0),) * 3, n=10)
    state, rep = solve(p, SolveConfig(max_iterations=50, residual_tol=1e-12))
    assert rep.converged and rep.iterations == 1 and rep.residual == 0.0
    assert not state.values.any()


def test_example2_modest_budget():
    p = example2(40)
    state, rep = solve(p, SolveConfig(max_iterations=1600))
    assert rep.iterations == 1600 and not rep.converged
    assert summed_error(p, state.values) <= 2e-3


def test_initial_corner_values():
    p = example2(8)
    s = initialize(p)
    np.testing.assert_array_equal(s.values[:, 8, 8], [0.0, 4.0, 0.0])
    assert not s.values[(slice(None),) + p.grid.interior].any()


def test_overlapping_boundary_names_node():
    p = ProblemSpec("clash", 2, (NodeTable([1.0, 0.0], 1, 4), NodeTable([1.0, 0.0], 1, 4)),
                    (builtin("zero"),) * 2, dim=1, n=4)
    with pytest.raises(ProblemDefinitionError, match=r"overlap at boundary node \(0,\)"):
        solve(p)


def test_negative_boundary_rejected():
    p = ProblemSpec("neg", 2, (NodeTable([-1.0, 0.0], 1, 4), NodeTable([0.0, 0.0], 1, 4)),
                    (builtin("zero"),) * 2, dim=1, n=4)
    with pytest.raises(ProblemDefinitionError, match="< 0"):
        initialize(p)


def test_successive_delta():
    p = _toy()
    a = initialize(p)
    b = iterate_step(a, p.dynamics)
    assert successive_delta(a, b) == 0.5
    assert successive_delta(b, b) == 0.0
    other = initialize(_toy(n=4))
    with pytest.raises(ValidationError):
        successive_delta(a, other)


def test_unique_limit_from_perturbed_start():
    p = example1(10)
    cfg = SolveConfig(max_iterations=20_000, residual_tol=1e-13)
    ref, rep = solve(p, cfg)
    assert rep.converged
    rng = np.random.default_rng(7)
    g = p.grid
    owner = rng.integers(-1, 2, size=g.shape)
    mag = rng.uniform(0, 1, size=g.shape)
    phi = p.boundary_values()
    values = np.where(g.interior_mask, np.stack([np.where(owner == l, mag, 0.0) for l in range(2)]), phi)
    other, rep2 = solve(p, cfg, initial=MultiPhaseState(g, values, phi))
    assert rep2.converged
    assert np.max(np.abs(other.values - ref.values)) <= 1e-10


def test_initial_state_must_match_boundary():
    p = example1(6)
    s = initialize(example1(6))
    bad = MultiPhaseState(p.grid, s.values, s.boundary * 2)
    with pytest.raises(ValidationError):
        solve(p, initial=bad)


def test_two_phase_equivalence():
    p = example1(12)
    cfg = SolveConfig(max_iterations=500)
    state, _ = solve(p, cfg)
    w, _ = solve_twophase(TwoPhaseProblem.from_spec(p), cfg)
    np.testing.assert_array_equal(w.values, state.signed())


@pytest.mark.parametrize("factory", [example1, example2])
def test_residual_does_not_grow(factory):
    p = factory(12)
    s0 = initialize(p)
    r0 = scheme_residual(s0, p.dynamics).value
    state, rep = solve(p, SolveConfig(max_iterations=300))
    assert rep.residual <= r0
    assert rep.residual == pytest.approx(scheme_residual(state, p.dynamics).value, abs=1e-15)


def test_nonfinite_iterate_raises():
    bad = Dynamics(f=lambda p, s: np.full(np.shape(s), -np.inf), F=lambda p, s: np.zeros(np.shape(s)), name="inf")
    with pytest.raises(NumericalError):
        solve(_toy(bad, n=4), SolveConfig(max_iterations=5))


def test_mislabelled_dynamics_trips_audit():
    bad = Dynamics(f=lambda p, s: np.full(np.shape(s), -50.0), F=lambda p, s: -50.0 * np.abs(s), name="neg")
    with pytest.raises(InternalConsistencyError) as info:
        solve(_toy(bad, n=4), SolveConfig(max_iterations=5, audit_every=1))
    assert info.value.iteration == 1


def test_undeclared_nonnegativity_rejected():
    bad = Dynamics(f=lambda p, s: -np.asarray(s), F=lambda p, s: -np.asarray(s) ** 2 / 2, nonneg=False)
    with pytest.raises(ProblemDefinitionError):
        solve(_toy(bad))


@pytest.mark.parametrize("kwargs", [
    {"max_iterations": 0}, {"max_iterations": 2.5}, {"residual_tol": -1.0}, {"residual_tol": float("nan")},
    {"audit_every": -1}, {"sweep": "sor"}, {"reaction": "semi"}, {"threads": -2},
])
def test_config_validation(kwargs):
    with pytest.raises(ValidationError):
        SolveConfig(**kwargs)


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv("SEGSOLVE_THREADS", "3")
    assert resolve_threads(None) == 3
    monkeypatch.setenv("SEGSOLVE_THREADS", "x")
    with pytest.raises(ValidationError):
        resolve_threads(None)
    assert resolve_threads(2) == 2


def test_budget_exhaustion_returns_last_iterate():
    p = example2(10)
    s1, r1 = solve(p, SolveConfig(max_iterations=7))
    s2, _ = solve(p, SolveConfig(max_iterations=8))
    assert r1.iterations == 7 and r1.delta_trace.size == 7
    assert r1.residual == pytest.approx(successive_delta(s1, s2), abs=0)


@pytest.mark.parametrize("sweep,reaction", [("gauss_seidel", "explicit"), ("jacobi", "implicit"),
                                            ("gauss_seidel", "implicit")])
def test_alternative_sweeps_reach_same_fixed_point(sweep, reaction):
    p = example1(16)
    ref, _ = solve(p, SolveConfig(max_iterations=40_000, residual_tol=1e-13))
    state, rep = solve(p, SolveConfig(max_iterations=40_000, residual_tol=1e-13, sweep=sweep, reaction=reaction))
    assert rep.converged and rep.sweep == sweep and rep.reaction == reaction
    assert np.max(np.abs(state.values - ref.values)) <= 1e-10


def test_gauss_seidel_needs_fewer_sweeps():
    p = example2(20)
    _, jac = solve(p, SolveConfig(max_iterations=20_000, residual_tol=1e-10))
    _, gs = solve(p, SolveConfig(max_iterations=20_000, residual_tol=1e-10, sweep="gauss_seidel"))
    assert gs.iterations < jac.iterations


def test_implicit_reaction_settles_weighted_sqrt():
    p = example3(20)
    _, explicit = solve(p, SolveConfig(max_iterations=3000, residual_tol=1e-12))
    _, implicit = solve(p, SolveConfig(max_iterations=3000, residual_tol=1e-12, reaction="implicit"))
    assert implicit.converged
    assert not explicit.converged


def test_energy_trace_and_report():
    p = example1(8)
    _, rep = solve(p, SolveConfig(max_iterations=50, record_energy=True))
    assert len(rep.energy_trace) == 50
    assert all(b <= a + 1e-12 for a, b in zip(rep.energy_trace, rep.energy_trace[1:]))
    d = rep.to_dict(max_trace=10)
    assert "wall_time" not in d
    assert d["delta_trace"]["iteration"][-1] == 50
    assert len(d["delta_trace"]["value"]) <= 11
