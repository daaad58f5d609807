"""Acceptance criteria, one test each.

Every test carries ``@pytest.mark.acceptance(number, title)``; the terminal
summary prints one PASS/FAIL line per criterion. Run only these with
``pytest -m acceptance``.
"""

import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bandsel.cli import main
from bandsel.dataset import band_spec, select_binary, synthesize
from bandsel.energy_select import ZoneConfig, cumulative_groups, energy_ratios, rank_variables
from bandsel.experiment import run_pairwise_suite, trend_fit
from bandsel.neuralnet import NetworkConfig, NetworkState, jacobian, predict_class, train
from bandsel.window_stats import build_dim, lambda_ratio, sweep_windows

from conftest import BACKENDS
from oracles import lambda_direct, net_extended, spearman_direct

BAND = (200, 250)


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def random_groups(rng):
    w = int(rng.integers(1, 7))
    n, m_y = int(rng.integers(1, 9)), int(rng.integers(1, 9))
    scale = 10.0 ** rng.uniform(-2, 2)
    X = rng.normal(rng.normal(0, 2), scale, size=(n, w))
    Y = rng.normal(rng.normal(0, 2), scale, size=(m_y, w))
    return X, Y


@pytest.mark.acceptance(1, "lambda matches the direct oracle on 1000 random windows")
def test_lambda_oracle(record):
    rng = np.random.default_rng(1)
    cases = [random_groups(rng) for _ in range(1000)]
    t0 = time.perf_counter()
    worst = 0.0
    for X, Y in cases:
        got = lambda_ratio(X, Y)
        want = lambda_direct(X.tolist(), Y.tolist())
        worst = max(worst, rel_err(got, want))
    elapsed = time.perf_counter() - t0
    record(f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert worst < 1e-10
    assert elapsed < 5.0


@pytest.mark.acceptance(2, "lambda is scale, translation and swap invariant")
def test_lambda_invariances(record):
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(100):
        X, Y = random_groups(rng)
        base = lambda_ratio(X, Y)
        for c in (1e-3, 1.0, 1e3):
            worst = max(worst, rel_err(lambda_ratio(c * X, c * Y), base))
        shift = rng.normal(0, 5, size=X.shape[1])
        worst = max(worst, rel_err(lambda_ratio(X + shift, Y + shift), base))
        assert lambda_ratio(Y, X) == base
    record(f"max rel err {worst:.2e}")
    assert worst < 1e-9


@pytest.mark.acceptance(3, "DIM at m=64: cell count, w=1 row, parallel equals sequential")
def test_dim_structure(record):
    ds = synthesize(band_spec([10, 10], (30, 40), noise_sigma=0.2, seed=3, m=64))
    bd = select_binary(ds, "a2", "a3")
    t0 = time.perf_counter()
    for backend in BACKENDS:
        seq = build_dim(bd, jobs=1, backend=backend)
        par = build_dim(bd, jobs=4, backend=backend)
        assert sum(1 for _ in seq.cells()) == 2080
        assert seq.values.size == 2080
        assert np.array_equal(seq.row(1), sweep_windows(bd, 1, backend=backend))
        assert seq.values.tobytes() == par.values.tobytes()
    elapsed = time.perf_counter() - t0
    record(f"backends {','.join(BACKENDS)}, {elapsed:.2f} s")
    assert elapsed < 10.0


@pytest.mark.acceptance(4, "w=1 argmax falls inside the separating band")
def test_band_localization(record):
    hits = 0
    for seed in range(100):
        ds = synthesize(band_spec([20, 20], BAND, [0.0, 1.0], noise_sigma=0.2, seed=seed))
        lam = sweep_windows(select_binary(ds, "a2", "a3"), 1)
        hits += BAND[0] <= int(np.argmax(lam)) < BAND[1]
    record(f"{hits}/100")
    assert hits >= 95


@pytest.mark.acceptance(5, "metabolite-zone energy stands out; identical classes do not")
def test_zone_contrast(record):
    zc = ZoneConfig.default(512)
    assert zc.z1_end <= BAND[0] and BAND[1] <= zc.z2_end
    ds = synthesize(band_spec([30, 30], BAND, [0.0, 1.0], noise_sigma=0.2, seed=0))
    rep = energy_ratios(sweep_windows(select_binary(ds, "a2", "a3"), 1), zc)
    ctl_ds = synthesize(band_spec([30, 30], BAND, [0.0, 0.0], noise_sigma=0.2, seed=0))
    ctl = energy_ratios(sweep_windows(select_binary(ctl_ds, "a2", "a3"), 1), zc)
    record(f"r1={rep.r1:.2f} r2={rep.r2:.2f}; control r1={ctl.r1:.2f} r2={ctl.r2:.2f}")
    assert rep.r2 / rep.r1 > 5
    assert rep.r2 > 5
    assert 0.5 <= ctl.r1 <= 2 and 0.5 <= ctl.r2 <= 2


def fd_jacobian(state, X, h=1e-6):
    """Central differences of ``t - y`` in extended precision.

    In float64 the difference quotient carries ~eps/h = 1e-10 of rounding,
    which swamps columns whose entries are ~1e-5; longdouble keeps that
    floor well below the tolerance while ``h`` stays at 1e-6.
    """
    theta = state.theta.astype(np.longdouble)
    step = np.longdouble(h)
    cols = []
    for j in range(state.n_params):
        tp, tm = theta.copy(), theta.copy()
        tp[j] += step
        tm[j] -= step
        yp = net_extended(tp, state.n_inputs, state.n_hidden, X)
        ym = net_extended(tm, state.n_inputs, state.n_hidden, X)
        cols.append(-(yp - ym) / (2 * step))
    return np.column_stack(cols)


@pytest.mark.acceptance(6, "analytic Jacobian agrees with central differences")
def test_gradient_check(record):
    assert np.finfo(np.longdouble).eps < 1e-18, "reference needs an extended long double"
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n_in, n_hid = int(rng.integers(1, 11)), int(rng.integers(1, 9))
        N = (n_in + 1) * n_hid + n_hid + 1
        state = NetworkState(n_in, n_hid, rng.normal(size=N))
        X = rng.normal(size=(5, n_in))
        J, F = jacobian(state, X), fd_jacobian(state, X)
        # error relative to each parameter's column scale
        num = np.max(np.abs(J - F), axis=0)
        den = np.maximum(np.max(np.abs(J), axis=0), np.max(np.abs(F), axis=0))
        err = np.where(den > 0, num / np.where(den > 0, den, 1.0), num)
        worst = max(worst, float(err.max()))
    elapsed = time.perf_counter() - t0
    record(f"max rel err {worst:.2e}, {elapsed:.2f} s")
    assert worst < 1e-6
    assert elapsed < 10.0


@pytest.mark.acceptance(7, "regularized LM separates 2-D blobs with monotone F")
def test_training_sanity(record):
    perfect = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = np.vstack([rng.normal([-2, -2], 0.6, (20, 2)), rng.normal([2, 2], 0.6, (20, 2))])
        t = np.r_[-np.ones(20), np.ones(20)]
        state, trace = train(NetworkConfig(2, max_epochs=150), X, t, seed=seed)
        assert trace.epochs <= 150
        N = state.n_params
        for e in trace.entries:
            assert e.f_after <= e.f_before
            assert 0 <= e.gamma <= N
        perfect += bool(np.all(predict_class(state, X) == t))
    record(f"{perfect}/10 at 100%")
    assert perfect >= 9


@pytest.mark.acceptance(8, "end-to-end: 2x30 synthetic spectra reach >= 90% CV at E'10")
def test_end_to_end(record):
    t0 = time.perf_counter()
    ds = synthesize(band_spec([30, 30], BAND, noise_sigma=0.2, seed=8))
    assert ds.m == 512
    (row,) = run_pairwise_suite(ds, [("a2", "a3")], [10], seed=8)
    elapsed = time.perf_counter() - t0
    res = row.result_at_10
    record(f"{res.mean:.2f}% over {len(res.fold_accuracies)} folds, {res.n_vars} vars, {elapsed:.1f} s")
    assert len(res.fold_accuracies) == 5
    assert res.mean >= 90
    assert elapsed < 120


def _exact_polynomial_recovered():
    coef = np.array([41.0, 9.5, -2.25, 0.6, -0.04])
    ratios = np.geomspace(1.5, 40.0, 9)
    u = np.log(ratios)
    acc = sum(c * u ** j for j, c in enumerate(coef))
    return float(np.max(np.abs(trend_fit(ratios, acc).coefficients - coef)))


@pytest.mark.acceptance(9, "ratio and accuracy rise with separation; exact trend recovery")
def test_separation_trend(record):
    # band line amplitude grows geometrically across the family
    amps = [0.0, 0.1, 0.17, 0.29, 0.49, 0.83, 1.4]
    ds = synthesize(band_spec([30] * 7, BAND, amps, noise_sigma=0.2, seed=0))
    codes = list(dict.fromkeys(ds.labels))
    pairs = [(codes[0], c) for c in codes[1:]]
    rows = run_pairwise_suite(ds, pairs, [10], seed=0)
    rows.sort(key=lambda r: codes.index(r.pair[1]))
    ratios = [r.ratio_e10_e3 for r in rows]
    accs = [r.result_at_10.mean for r in rows]
    rho = trend_fit(rows).spearman
    coef_err = _exact_polynomial_recovered()
    record(f"ratios {', '.join(f'{r:.1f}' for r in ratios)}; spearman {rho:.3f}; coef err {coef_err:.1e}")
    assert len(rows) == 6
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert rho == pytest.approx(spearman_direct(ratios, accs), abs=1e-12)
    assert rho >= 0.8
    assert coef_err < 1e-6


lams = arrays(np.float64, st.integers(8, 200), elements=st.floats(0.0, 100.0))


@settings(max_examples=100, deadline=None)
@given(lam=lams, include_z1=st.booleans())
def _nesting_property(lam, include_z1):
    m = lam.size
    zc = ZoneConfig(m // 4, m // 4 + max(1, m // 2))
    lam = lam.copy()
    lam[zc.z2_end:] += 1.0  # keep the noise reference nonzero
    lam[zc.z1_end] += 1.0
    groups = cumulative_groups(lam, zc, list(range(1, 101)), include_z1)
    ranking = tuple(rank_variables(lam, zc, include_z1))
    for small, big in zip(groups, groups[1:]):
        assert set(small.indices) <= set(big.indices)
        assert big.indices[: small.n_vars] == small.indices
    assert all(g.indices == ranking[: g.n_vars] for g in groups)


@pytest.mark.acceptance(10, "feature groups nest for 1..100; repeated suite runs identical")
def test_nesting_and_determinism(tmp_path, record):
    _nesting_property()
    data = tmp_path / "data.csv"
    assert main(["synth", "--classes", "10,10,10", "--seed", "10", "-o", str(data)]) == 0
    outputs = []
    for run in ("a", "b"):
        out = tmp_path / run
        argv = ["suite", "--data", str(data), "--seed", "10", "--percents", "2,5,10",
                "--hidden", "8", "--epochs", "40", "--out", str(out)]
        assert main(argv) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    record(f"files {', '.join(outputs[0])}")
    assert set(outputs[0]) == {"suite.csv", "suite.json"}
    assert outputs[0] == outputs[1]
