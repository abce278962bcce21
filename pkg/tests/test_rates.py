import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ifoutage as io
from ifoutage import lattice as lat
from ifoutage.errors import DomainError
from ifoutage.rates import all_rates, channel_lattice, inverse_gram, lattice_rates, r1_if, sic_stream_rates

from conftest import WORST, random_complex
from oracles import brute_minima


def iso(g, n_t=2):
    return io.ComplexChannel(g * np.eye(n_t))


def random_unimodular(rng, k, steps=6):
    a = np.eye(k, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(k, 2, replace=False)
        a[i] += int(rng.integers(-2, 3)) * a[j]
    return a[rng.permutation(k)]


def test_mmse_equalizer_zero_channel():
    eq = io.mmse_equalizer(io.RealChannel(np.zeros((4, 4))), np.eye(4, dtype=int))
    assert np.allclose(eq.b_matrix, 0) and np.allclose(eq.l_matrix, np.eye(4))
    assert np.allclose(eq.s_matrix, np.eye(4)) and np.allclose(eq.b_tilde, 0)


def test_mmse_equalizer_identity_channel():
    eq = io.mmse_equalizer(io.realify(io.ComplexChannel([[1.0]])), np.eye(2, dtype=int))
    assert np.allclose(eq.b_matrix, 0.5 * np.eye(2))
    assert np.allclose(eq.l_matrix, np.eye(2) / math.sqrt(2))


def test_mmse_equalizer_reconstruction(rng):
    for _ in range(10):
        h = io.realify(random_complex(rng, 3, 2, 4.0))
        _, u = io.lll_reduce(channel_lattice(h))
        a = u.entries.T
        eq = io.mmse_equalizer(h, a)
        assert np.allclose(eq.l_matrix @ eq.l_matrix.T, a @ inverse_gram(h) @ a.T, atol=1e-9)
        assert np.allclose(np.triu(eq.l_matrix, 1), 0)
        assert np.allclose(np.triu(eq.s_matrix, 1), 0)
        assert np.allclose(np.diagonal(eq.s_matrix), 1.0)
        assert np.allclose(eq.b_tilde, eq.s_matrix @ eq.b_matrix, atol=1e-9)


def test_mmse_equalizer_rejects_singular_a():
    h = io.realify(io.ComplexChannel(np.eye(2)))
    with pytest.raises(DomainError):
        io.mmse_equalizer(h, np.array([[1, 0, 0, 0], [2, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))


def test_effective_snr_examples(rng):
    e1 = np.array([1, 0, 0, 0])
    assert io.effective_snr(io.RealChannel(np.zeros((4, 4))), e1) == pytest.approx(1.0)
    assert io.effective_snr(io.realify(iso(3.0)), e1) == pytest.approx(10.0)
    h = io.realify(random_complex(rng, 2, 2))
    a = np.array([1, -2, 0, 3])
    q = np.linalg.inv(np.eye(4) + h.entries.T @ h.entries)
    assert io.effective_snr(h, a) == pytest.approx(1 / (a @ q @ a), rel=1e-12)
    with pytest.raises(DomainError):
        io.effective_snr(h, np.zeros(4))


def test_rate_per_equation(rng):
    assert io.rate_per_equation(io.RealChannel(np.zeros((4, 4))), [1, 1, 0, 0]) == 0.0
    assert io.rate_per_equation(io.realify(iso(3.0)), [1, 0, 0, 0]) == pytest.approx(0.5 * math.log2(10))
    h = io.realify(random_complex(rng, 2, 2, 5.0))
    e1 = np.array([1, 0, 0, 0])
    assert io.rate_per_equation(h, 2 * e1) < io.rate_per_equation(h, e1)


def test_isotropic_channel_all_schemes():
    g = 3.0
    c = 2 * math.log2(1 + g * g)
    h = iso(g)
    for name, rep in all_rates(h).items():
        assert rep.total_rate_bits == pytest.approx(c, abs=1e-9), name
    a = np.abs(io.if_sic_rate(io.realify(h)).integer_matrix.entries)
    # any signed permutation of the unit vectors is optimal here
    assert np.array_equal(a.sum(axis=0), np.ones(4)) and np.array_equal(a.sum(axis=1), np.ones(4))


def test_worst_channel_without_preprocessing():
    hr = io.realify(WORST)
    assert io.mmse_rate(hr).total_rate_bits == 0.0
    assert io.if_rate(hr).total_rate_bits == 0.0
    assert io.joint_ml_rate(WORST).total_rate_bits == 0.0


def test_if_rate_matches_minimax_box(rng):
    for _ in range(20):
        h = io.realify(random_complex(rng, 2, 2, 3.0))
        g = channel_lattice(h).generator
        lam, _ = brute_minima(g)
        want = max(0.0, -4 * math.log2(lam[-1]))
        assert io.if_rate(h).total_rate_bits == pytest.approx(want, abs=1e-9)


def test_if_report_invariants(rng):
    h = io.realify(random_complex(rng, 2, 2, 6.0))
    rep = io.if_rate(h)
    per = np.array(rep.per_stream_bits)
    assert rep.total_rate_bits == pytest.approx(4 * per.min())
    assert sorted(np.round(per, 9))[0::2] == sorted(np.round(per, 9))[1::2]


def test_heuristic_modes_are_lower(rng):
    for _ in range(10):
        h = io.realify(random_complex(rng, 2, 2, 8.0))
        assert io.if_rate(h, exact=False).total_rate_bits <= io.if_rate(h).total_rate_bits + 1e-9
        assert io.if_sic_rate(h, exact=False).total_rate_bits <= io.if_sic_rate(h).total_rate_bits + 1e-9


def test_dimension_cap():
    h = io.realify(io.ComplexChannel(np.eye(5)))
    with pytest.raises(DomainError):
        io.if_rate(h)
    assert io.if_rate(h, exact=False).total_rate_bits == pytest.approx(5.0)


def test_sum_identity_for_unimodular(rng):
    for _ in range(10):
        hc = random_complex(rng, 2, 2, 4.0)
        h = io.realify(hc)
        c = io.wi_mutual_information(hc)
        a = random_unimodular(rng, 4)
        assert np.sum(sic_stream_rates(h, a, clip=False)) == pytest.approx(c, abs=1e-9)


def test_if_sic_closed_form_matches_branch_and_bound(rng):
    for _ in range(10):
        h = io.realify(random_complex(rng, 2, 2, 5.0))
        g = channel_lattice(h).generator
        _, ell = lat.min_max_gs_basis(io.LatticeBasis(g))
        want = max(0.0, -4 * math.log2(ell.max()))
        rep = io.if_sic_rate(h)
        assert rep.total_rate_bits == pytest.approx(want, abs=1e-9)
        assert rep.integer_matrix.unimodular


def test_if_sic_beats_small_box_search(rng):
    """No unimodular matrix from a small integer box gives a better equal-rate IF-SIC."""
    import itertools

    h = io.realify(random_complex(rng, 2, 2, 3.0))
    g = channel_lattice(h).generator
    best = io.if_sic_rate(h).total_rate_bits
    cand = [v for v in itertools.product(range(-1, 2), repeat=4) if any(v)]
    cand = sorted(cand, key=lambda v: np.linalg.norm(g @ np.array(v)))[:24]
    for rows in itertools.permutations(cand, 4):
        a = np.array(rows)
        if abs(round(np.linalg.det(a))) != 1:
            continue
        val = 4 * float(sic_stream_rates(h, a).min())
        assert val <= best + 1e-9


def test_if_sic_lower_bound_via_r1(rng):
    for _ in range(20):
        hc = random_complex(rng, 2, 2, float(rng.uniform(1, 30)))
        h = io.realify(hc)
        c = io.wi_mutual_information(hc)
        r1 = r1_if(h)
        assert r1 >= (c - 4) / 4 - 1e-9
        assert io.if_sic_rate(h).total_rate_bits >= min(c - 1, 2 * c - 4 * r1) - 1e-9


def test_joint_ml_against_subsets(rng):
    assert io.joint_ml_rate(iso(3.0)).total_rate_bits == pytest.approx(2 * math.log2(10))
    for _ in range(5):
        h = random_complex(rng, 2, 2, 3.0).entries
        vals = []
        for cols, w in (((0,), 2), ((1,), 2), ((0, 1), 1)):
            hs = h[:, cols]
            vals.append(w * np.log2(np.linalg.det(np.eye(len(cols)) + hs.conj().T @ hs).real))
        assert io.joint_ml_rate(io.ComplexChannel(h)).total_rate_bits == pytest.approx(max(0, min(vals)), abs=1e-9)


def test_lattice_rates_agree_with_reports(rng):
    for _ in range(20):
        hc = random_complex(rng, 2, 2, float(rng.uniform(0.5, 20)))
        h = io.realify(hc)
        fast = lattice_rates(channel_lattice(h).generator, ("mmse", "if", "if_sic"))
        assert fast["mmse"] == pytest.approx(io.mmse_rate(h).total_rate_bits, abs=1e-9)
        assert fast["if"] == pytest.approx(io.if_rate(h).total_rate_bits, abs=1e-9)
        assert fast["if_sic"] == pytest.approx(io.if_sic_rate(h).total_rate_bits, abs=1e-9)


def test_three_antenna_ordering(rng):
    for _ in range(3):
        hc = random_complex(rng, 3, 3, 4.0)
        r = {k: v.total_rate_bits for k, v in all_rates(hc).items()}
        c = io.wi_mutual_information(hc)
        assert r["mmse"] <= r["if"] + 1e-9 <= r["if_sic"] + 2e-9 <= c + 3e-9
        assert r["if"] <= r["joint_ml"] + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.2, 40.0))
def test_ordering_property(seed, scale):
    rng = np.random.default_rng(seed)
    hc = random_complex(rng, 2, 2, scale)
    r = {k: v.total_rate_bits for k, v in all_rates(hc).items()}
    c = io.wi_mutual_information(hc)
    assert r["mmse"] <= r["if"] + 1e-9
    assert r["if"] <= r["if_sic"] + 1e-9
    assert r["if_sic"] <= c + 1e-9
    assert r["if"] <= r["joint_ml"] + 1e-9


def test_rate_report_validation():
    with pytest.raises(DomainError):
        io.RateReport("zf", 1.0)
    with pytest.raises(DomainError):
        io.RateReport("if", -1.0)
