import numpy as np
import pytest

from subreg.experiments import (
    CSV_COLUMNS,
    SweepConfig,
    cell_seed,
    counterexample_demo,
    emit_csv,
    in_Lm,
    noise_sweep,
    quantile_sweep,
    size_sweep,
    unary_power_predicates,
)
from subreg.learners import LinearModel, normalized_margin
from subreg.predicates import Kind, Predicate, PredicateSet
from subreg.experiments import UNARY


def small(tag, **kw):
    kw.setdefault("n_train", 200)
    kw.setdefault("n_test", 200)
    kw.setdefault("trials", 2)
    kw.setdefault("epochs", 1500)
    return SweepConfig(tag, **kw)


def test_noise_sweep_rows_and_order():
    rows = noise_sweep(small("SL", grid=(0.2, 0.0)))
    assert len(rows) == 4
    assert [(r.grid_value, r.trial) for r in rows] == [(0.0, 0), (0.0, 1), (0.2, 0), (0.2, 1)]
    assert all(r.accuracy >= 0.99 for r in rows if r.noise == 0.0)


def test_size_sweep_degenerate_and_monotone():
    rows = size_sweep(small("SL", grid=(2, 50, 1000), trials=2))
    by = {v: np.mean([r.accuracy for r in rows if r.grid_value == v]) for v in (2, 50, 1000)}
    assert 0.0 <= by[2] <= 1.0
    assert by[1000] >= by[50]
    assert {r.train_size for r in rows} == {2, 50, 1000}


def test_quantile_sweep_positive_for_sl():
    rows = quantile_sweep(small("SL", grid=(0.0,), n_train=600, n_test=400))
    assert all(r.q01 > 0 for r in rows)


def test_cell_seeds_are_independent():
    seeds = {cell_seed(0, v, t) for v in (0.0, 0.1, 0.2) for t in range(5)}
    assert len(seeds) == 15
    assert cell_seed(3, 0.1, 2) == cell_seed(3, 0.1, 2)


def test_parallel_matches_serial():
    cfg = small("SP", grid=(0.0, 0.1))
    serial = noise_sweep(cfg)
    cfg.jobs = 2
    assert noise_sweep(cfg) == serial


def test_emit_csv(tmp_path):
    emit_csv([], tmp_path / "empty.csv")
    assert (tmp_path / "empty.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
    cfg = small("LTT", grid=(0.0, 0.1))
    emit_csv(noise_sweep(cfg), tmp_path / "a.csv")
    emit_csv(noise_sweep(cfg), tmp_path / "b.csv")
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert len(a.decode().splitlines()) == 1 + 2 * 2
    with pytest.raises(OSError, match="nope"):
        emit_csv([], tmp_path / "nope" / "x.csv")


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig("SL", grid=())
    with pytest.raises(ValueError):
        SweepConfig("SL", n_test=0)


def test_counterexample_example():
    P = PredicateSet((Predicate(Kind.SUBSTRING, ("a",) * 2), Predicate(Kind.SUBSTRING, ("a",) * 4)), "SL", UNARY)
    w = counterexample_demo(P, 5)
    assert (len(w.x), len(w.y)) == (4, 5)
    assert w.truth_vector == (1, 1) and w.memberships == (False, True)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_counterexample_power_family(n):
    w = counterexample_demo(unary_power_predicates(n), 2 ** n + 1)
    assert in_Lm(w.x, w.m) != in_Lm(w.y, w.m)


def test_counterexample_precondition():
    with pytest.raises(ValueError):
        counterexample_demo(unary_power_predicates(2), 4)


def test_saved_model_margins_match(tmp_path):
    rng = np.random.default_rng(0)
    m = LinearModel(rng.normal(size=4), 0.1)
    X = rng.integers(0, 2, (30, 4)).astype(float)
    y = rng.choice([-1, 1], 30)
    m.save(tmp_path / "m.json")
    assert np.array_equal(normalized_margin(LinearModel.load(tmp_path / "m.json"), X, y), normalized_margin(m, X, y))
