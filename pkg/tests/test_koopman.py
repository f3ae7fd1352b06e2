import math

import numpy as np
import pytest

from koopman_mpc.drive.params import OperatingCondition, omega_el_from_rpm
from koopman_mpc.errors import InsufficientData, MissingModel, ModelFormatError, RankDeficientWarning
from koopman_mpc.koopman.bank_store import MAGIC, load_bank, save_bank
from koopman_mpc.koopman.dictionary import Dictionary, Observation, lift
from koopman_mpc.koopman.rom import (
    N_VECTORS,
    SnapshotSet,
    assemble,
    evaluate_bank,
    fit,
    fit_normal_equations,
    holdout_split,
    predict,
    project,
    train_bank,
)
from koopman_mpc.sim.engine import ScenarioConfig, build_controller, run_closed_loop
from koopman_mpc.sim.trajectory import BOUNDARY

EXACT = Dictionary(include_constant=True)


def _random_snapshots(k=4, m=500, seed=0):
    rng = np.random.default_rng(seed)
    k_true = rng.normal(scale=0.3, size=(k, k)) + 0.5 * np.eye(k)
    Y = rng.normal(size=(k, m))
    return k_true, SnapshotSet(1, Y, k_true @ Y)


def test_fit_recovers_an_exact_linear_map():
    k_true, s = _random_snapshots()
    result = fit(s)
    np.testing.assert_allclose(result.matrix, k_true, atol=1e-8)
    assert result.residual < 1e-10
    assert result.rank == 4


def test_normal_equations_agree_with_svd():
    _, s = _random_snapshots(m=300, seed=4)
    np.testing.assert_allclose(fit_normal_equations(s).matrix, fit(s).matrix, atol=1e-8)


def test_fit_rejects_bad_tolerance():
    _, s = _random_snapshots()
    with pytest.raises(ValueError):
        fit(s, tol=1.5)


def test_fixed_point_data_is_rank_deficient():
    y = np.array([3.0, -2.0, 0.5, 0.8])
    Y = np.tile(y[:, None], (1, 50))
    with pytest.warns(RankDeficientWarning):
        result = fit(SnapshotSet(0, Y, Y.copy()))
    assert result.rank == 1
    np.testing.assert_allclose(result.matrix @ y, y, atol=1e-10)


def test_dictionary_sizes():
    assert Dictionary().k == 4
    assert Dictionary(kind="monomial", degree=2).k == 14
    assert Dictionary(kind="monomial", degree=2, include_constant=True).k == 15
    assert Dictionary(include_constant=True).names[-1] == "1"
    with pytest.raises(ValueError):
        Dictionary(kind="monomial", degree=3)


def test_dictionary_description_round_trip():
    for d in (Dictionary(), EXACT, Dictionary(kind="monomial", degree=1)):
        assert Dictionary.parse(d.describe()) == d


def test_lifted_state_leads_with_observation():
    y = Observation.from_angle(12.0, -30.0, 0.4)
    for d in (Dictionary(), Dictionary(kind="monomial"), EXACT):
        z = lift(y, d)
        assert z.z.shape == (d.k,)
        np.testing.assert_allclose(z.z[:4], y)
    z = lift(y, Dictionary(kind="monomial"))
    assert z.z[Dictionary(kind="monomial").names.index("i_d*i_q")] == pytest.approx(-360.0)


def test_assemble_collects_pairs_of_one_vector(make_log):
    log = make_log([2] * 10 + [0] * 5, i_d=np.arange(16.0))
    s = assemble(log, 2, Dictionary(), min_pairs=10)
    assert s.m == 10
    np.testing.assert_allclose(s.Y[0], np.arange(10.0))
    np.testing.assert_allclose(s.Y_hat[0], np.arange(1.0, 11.0))

    with pytest.raises(InsufficientData) as err:
        assemble(log, 2, Dictionary(), min_pairs=11)
    assert err.value.count == 10

    with pytest.raises(InsufficientData) as err:
        assemble(log, 5, Dictionary(), min_pairs=1)
    assert err.value.count == 0


def test_assemble_empty_log(make_log):
    with pytest.raises(InsufficientData):
        assemble(make_log([]), 0, Dictionary(), min_pairs=1)


def test_train_bank_on_euler_data_is_exact(euler_log):
    bank = train_bank(euler_log, EXACT, min_pairs=50)
    assert bank.matrices.shape == (N_VECTORS, 5, 5)
    assert max(bank.training_metadata.residuals) < 1e-8
    assert sum(bank.training_metadata.sample_counts) == len(euler_log) - 1
    for v, (rms_d, rms_q, count) in evaluate_bank(bank, euler_log).items():
        assert count > 0
        assert rms_d < 1e-5 and rms_q < 1e-5


def test_train_bank_methods_and_workers_agree(euler_log):
    reference = train_bank(euler_log, EXACT, min_pairs=50)
    threaded = train_bank(euler_log, EXACT, min_pairs=50, workers=3)
    normal = train_bank(euler_log, EXACT, min_pairs=50, method="normal")
    np.testing.assert_array_equal(threaded.matrices, reference.matrices)
    np.testing.assert_allclose(normal.matrices, reference.matrices, atol=1e-5)


def test_plain_dmd_leaves_a_residual(euler_log):
    bank = train_bank(euler_log, Dictionary(), min_pairs=50)
    assert bank.k == 4
    assert all(0.0 < r < 1.0 for r in bank.training_metadata.residuals)


def test_predict_is_linear_and_projection_reads_back(euler_log):
    bank = train_bank(euler_log, EXACT, min_pairs=50)
    rng = np.random.default_rng(7)
    z1, z2 = lift(rng.normal(size=4), EXACT), lift(rng.normal(size=4), EXACT)
    mixed = predict(type(z1)(2.0 * z1.z - 0.5 * z2.z), bank, 3)
    np.testing.assert_allclose(
        mixed.z, 2.0 * predict(z1, bank, 3).z - 0.5 * predict(z2, bank, 3).z, atol=1e-9
    )
    y = Observation.from_angle(5.0, 6.0, 1.0)
    np.testing.assert_allclose(project(lift(y, EXACT), bank), y)


def test_holdout_split_keeps_order_and_boundary(euler_log):
    train, held = holdout_split(euler_log, 0.8)
    assert len(train) + len(held) == len(euler_log) + 1
    assert train.periods["vector_index"].iloc[-1] == BOUNDARY
    assert held.periods["vector_index"].iloc[-1] == BOUNDARY
    assert train.periods["time"].iloc[-1] == held.periods["time"].iloc[0]


def test_save_and_load_reproduce_the_bank(tmp_path, euler_log):
    bank = train_bank(euler_log, EXACT, min_pairs=50)
    path = save_bank(bank, tmp_path / "bank.txt")
    assert path.read_text().startswith(MAGIC)
    loaded = load_bank(path)
    np.testing.assert_array_equal(loaded.matrices, bank.matrices)
    np.testing.assert_array_equal(loaded.projection, bank.projection)
    assert loaded.dictionary == bank.dictionary
    assert loaded.training_metadata == bank.training_metadata


def test_load_bank_errors(tmp_path, euler_log):
    with pytest.raises(MissingModel):
        load_bank(tmp_path / "absent.txt")

    bad = tmp_path / "bad.txt"
    bad.write_text("not a bank\n")
    with pytest.raises(ModelFormatError):
        load_bank(bad)

    path = save_bank(train_bank(euler_log, EXACT, min_pairs=50), tmp_path / "bank.txt")
    text = path.read_text()
    truncated = tmp_path / "truncated.txt"
    truncated.write_text(text[: text.index("[K6]")])
    with pytest.raises(ModelFormatError):
        load_bank(truncated)


@pytest.mark.slow
def test_affine_bank_is_exact_on_closed_loop_data(training_log, affine_bank):
    assert affine_bank.k == 5
    assert max(affine_bank.training_metadata.residuals) < 1e-8
    _, held_out = holdout_split(training_log)
    for rms_d, rms_q, count in evaluate_bank(affine_bank, held_out).values():
        if count:
            assert rms_d < 1e-6 and rms_q < 1e-6


@pytest.mark.slow
def test_plain_dmd_keeps_the_one_percent_holdout_bound(training_log, trained_bank):
    _, held_out = holdout_split(training_log)
    # 1 % of the 340 A current span
    for rms_d, rms_q, count in evaluate_bank(trained_bank, held_out).values():
        if count:
            assert rms_d <= 3.4 and rms_q <= 3.4


@pytest.mark.slow
def test_every_vector_advances_the_angle_by_one_period(trained_bank):
    expected = omega_el_from_rpm(1000.0, 3) * 50e-6
    z = lift(Observation.from_angle(-50.0, 60.0, 0.7), trained_bank.dictionary)
    for v in range(N_VECTORS):
        nxt = project(predict(z, trained_bank, v), trained_bank)
        assert math.atan2(nxt.sin_eps, nxt.cos_eps) - 0.7 == pytest.approx(expected, abs=1e-6)
        assert math.hypot(nxt.sin_eps, nxt.cos_eps) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.slow
def test_prediction_error_grows_away_from_the_training_speed(params, trained_bank):
    errors = {}
    for speed in (1000.0, 2500.0):
        scenario = ScenarioConfig(speed_rpm=speed, duration=0.02, record_fine=False)
        cond = OperatingCondition.from_rpm(speed, params)
        log = run_closed_loop(scenario, params, build_controller("whitebox-mpc", params, cond))
        per_vector = evaluate_bank(trained_bank, log).values()
        errors[speed] = np.mean([rms_q for _, rms_q, count in per_vector if count > 0])
    assert errors[2500.0] > errors[1000.0]
