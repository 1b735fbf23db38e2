import json
import math

import numpy as np
import pytest

import dpsens


def test_benchmark_gamma():
    assert dpsens.reduced_hessian_gamma(dpsens.benchmark_qdp(40, 10.0, 1.0)) == pytest.approx(9.0, abs=1e-9)
    assert dpsens.reduced_hessian_gamma(dpsens.benchmark_qdp(40, 50.0, 10.0, "exp")) == pytest.approx(40.0, abs=1e-9)


def test_hand_problem_from_arrays():
    one = np.ones((1, 1))
    zero = np.zeros((1, 1))
    stage = dict(Q=one, R=one, S=zero, D1=zero, D2=zero, A=one, B=one, C=zero)
    qdp = dpsens.QdpProblem(1, 1, 1, 1, [stage], one)
    l = dpsens.unit_direction(qdp, -1)
    w = dpsens.riccati_solve(qdp, l)["w"]
    np.testing.assert_allclose(w, [1.0, -0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(dpsens.dense_kkt_solve(qdp, l)["w"], w, atol=1e-14)


def test_json_round_trip():
    qdp = dpsens.random_instance(6, 2, 2, 2, seed=3)
    back = dpsens.QdpProblem.from_json(qdp.to_json())
    for k in range(qdp.N):
        for name, block in qdp.stage(k).items():
            np.testing.assert_array_equal(back.stage(k)[name], block)
    with pytest.raises(dpsens.ParseError):
        dpsens.QdpProblem.from_json(json.dumps({"dims": {"N": 1}}))


def test_equivalence_on_random_instance():
    qdp = dpsens.random_instance(12, 3, 2, 2, seed=1)
    rng = np.random.default_rng(0)
    l = rng.standard_normal(qdp.nx + qdp.N * qdp.nd)
    rep = dpsens.verify_equivalence(qdp, l)
    assert rep["primal_gap"] <= 1e-8
    assert rep["offset_error"] <= 1e-8


def test_convexify_errors_and_output():
    qdp = dpsens.benchmark_qdp(10)
    out = dpsens.convexify(qdp, 4.5)
    assert len(out["Qbar"]) == 11
    np.testing.assert_allclose(out["problem"].terminal_Q, [[4.5]])
    with pytest.raises(dpsens.StageError):
        dpsens.convexify(qdp, 19.0)


def test_sensitivity_and_bounds():
    qdp = dpsens.benchmark_qdp(30)
    r = dpsens.solve_sensitivity(qdp, 15)
    assert r["gamma"] == pytest.approx(9.0)
    assert r["norm_p"][16] == pytest.approx(20.0 / 9.0)
    b = dpsens.theoretical_constants(qdp, r["delta"], lambda_C=1.0)
    assert 0.0 < b["rho"] < 1.0
    for k, (np_, nq) in enumerate(zip(r["norm_p"], r["norm_q"])):
        assert max(np_, nq) <= b["upsilon_pq"] * b["rho"] ** abs(k - 15) + 1e-9


def test_sosc_failure():
    m = np.array([[-5.0]])
    one = np.ones((1, 1))
    zero = np.zeros((1, 1))
    stage = dict(Q=m, R=-one, S=zero, D1=zero, D2=zero, A=one, B=one, C=zero)
    qdp = dpsens.QdpProblem(3, 1, 1, 1, [stage] * 3, -one)
    with pytest.raises(dpsens.SoscFailed):
        dpsens.solve_sensitivity(qdp, 0)


def test_experiment_curves():
    res = dpsens.run_experiment(N=20, dynamics="exp", eps=[0.01])
    curve = res["curves"][0.01]
    assert len(curve) == 21
    assert abs(curve[11] - res["reference"][11]) < 0.05
    assert curve[0] == -500.0
    assert math.isfinite(res["reference"][10])
