import math
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smalldev.bounds import (
    CHAIN_LABELS,
    feige_bound,
    implication_margin,
    proof_chain,
    samuels_bound,
    samuels_term,
    samuels_terms,
)
from smalldev.model import RATIONAL, make_delta, make_weight_vector
from smalldev.phi import phi

INV_E = math.exp(-1)


def wv(*xs, mode="float"):
    return make_weight_vector(list(xs), mode=mode)


def prefix_product(weights, delta, i):
    """Oracle straight from the conjecture: T minus the tail sum, in Fractions."""
    t = 1 + delta
    tail = sum(weights[i:], Fr(0))
    out = Fr(1)
    for mu in weights[:i]:
        out *= 1 - mu / (t - tail)
    return out


class TestSamuelsTerm:
    def test_single_weight(self):
        assert samuels_term(wv(1.0), make_delta(1.0), 1) == 0.5

    def test_two_weights(self):
        w, d = wv(0.6, 0.4), make_delta(0.5)
        assert samuels_term(w, d, 2) == pytest.approx(0.44, abs=1e-15)
        assert samuels_term(w, d, 1) == pytest.approx(5 / 11, abs=1e-15)

    def test_rational_exact(self):
        w = wv("3/5", "2/5", mode=RATIONAL)
        d = make_delta("1/2", RATIONAL)
        assert samuels_term(w, d, 2) == Fr(11, 25)
        assert samuels_term(w, d, 1) == Fr(5, 11)

    def test_index_range(self):
        w, d = wv(0.6, 0.4), make_delta(0.5)
        for i in (0, 3):
            with pytest.raises(IndexError):
                samuels_term(w, d, i)

    def test_mode_mismatch(self):
        with pytest.raises(ValueError):
            samuels_term(wv(1.0), make_delta(1, RATIONAL), 1)

    def test_long_vector_log_path(self):
        raw = [Fr(1, 2 ** k) for k in range(1, 40)] + [Fr(1, 2 ** 39)]
        wr = make_weight_vector(raw, mode=RATIONAL)
        dr = make_delta("1/7", RATIONAL)
        wf = make_weight_vector([float(x) for x in raw])
        df = make_delta(1 / 7)
        got = samuels_terms(wf, df)
        for i in range(1, wr.n + 1):
            assert got[i - 1] == pytest.approx(float(prefix_product(wr.weights, dr.delta, i)), rel=1e-13)


class TestSamuelsBound:
    def test_equal_weights(self):
        value, i = samuels_bound(wv(0.5, 0.5), make_delta(0.1))
        assert i == 1
        assert value == pytest.approx(1 / 6, abs=1e-15)
        assert samuels_term(wv(0.5, 0.5), make_delta(0.1), 2) == pytest.approx((6 / 11) ** 2, abs=1e-15)

    def test_argmin_two(self):
        value, i = samuels_bound(wv(0.6, 0.4), make_delta(0.5))
        assert (i, value) == (2, pytest.approx(0.44, abs=1e-15))

    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_uniform_last_term_is_iid_value(self, n):
        w = make_weight_vector([1] * n, normalize=True, mode=RATIONAL)
        d = make_delta("3/10", RATIONAL)
        assert samuels_term(w, d, n) == (1 - 1 / (n * (1 + d.delta))) ** n

    def test_ties_break_to_smallest_index(self):
        from smalldev.bounds import _argmin

        assert _argmin([Fr(1, 3), Fr(1, 3), Fr(1, 2)]) == 1
        assert _argmin([Fr(1, 2), Fr(1, 3), Fr(1, 3)]) == 2


class TestFeige:
    def test_values(self):
        assert feige_bound(0.5, make_delta(0.1)) == pytest.approx(1 / 6, abs=1e-15)
        assert feige_bound(0.1, make_delta(1.0)) == INV_E
        assert feige_bound(1.0, make_delta(0.5)) == pytest.approx(1 / 3, abs=1e-15)

    def test_rational_branch_stays_exact(self):
        assert feige_bound(Fr(1, 2), make_delta("1/10", RATIONAL)) == Fr(1, 6)

    @pytest.mark.parametrize("m", [0.0, -0.1, 1.5])
    def test_range(self, m):
        with pytest.raises(ValueError):
            feige_bound(m, make_delta(0.1))


class TestImplicationMargin:
    def test_coincide(self):
        rep = implication_margin(wv(0.5, 0.5), make_delta(0.1))
        assert abs(rep.implication_margin) <= 1e-15

    def test_two_weights(self):
        rep = implication_margin(wv(0.6, 0.4), make_delta(0.5))
        # delta/(delta+M) = 5/11 > 1/e, so Feige's bound is 1/e here
        assert rep.feige == INV_E
        assert rep.implication_margin == pytest.approx(0.44 - INV_E, abs=1e-15)
        assert rep.argmin_index == 2
        assert rep.per_index_terms[rep.argmin_index - 1] == rep.samuels

    def test_single_large_delta(self):
        rep = implication_margin(wv(1.0), make_delta(10.0))
        assert rep.samuels == pytest.approx(10 / 11, abs=1e-15)
        assert rep.feige == INV_E
        assert rep.implication_margin == pytest.approx(10 / 11 - INV_E, abs=1e-15)

    def test_rational_report(self):
        rep = implication_margin(wv("1/2", "1/2", mode=RATIONAL), make_delta("1/10", RATIONAL))
        assert rep.samuels == Fr(1, 6) and rep.feige == Fr(1, 6)
        assert rep.implication_margin == 0.0
        assert rep.to_dict()["samuels"] == "1/6"


class TestProofChain:
    def test_worked_example(self):
        ch = proof_chain(wv(0.6, 0.4), make_delta(0.5))
        assert [s.label for s in ch.steps] == list(CHAIN_LABELS)
        assert ch.index == 2 and ch.sigma_star == 1.0
        s1, s2, s3, s4 = ch.steps
        assert s1.lhs == pytest.approx(math.log(0.44), abs=1e-15)
        want_sum = 0.6 * (math.log(0.6) / 0.6) + 0.4 * (math.log(1 - 0.4 / 1.5) / 0.4)
        assert s1.rhs == pytest.approx(want_sum, abs=1e-15)
        assert abs(s1.margin) <= 1e-12
        assert s2.rhs == pytest.approx(math.log(0.6) / 0.6, abs=1e-15)
        assert s3.rhs == pytest.approx(min(math.log(5 / 11), math.log(0.6) / 0.6), abs=1e-15)
        assert s4.rhs == -1.0
        assert all(s.margin >= -1e-10 for s in ch.steps)

    def test_single_weight(self):
        ch = proof_chain(wv(1.0), make_delta(1.0))
        assert ch.index == 1 and ch.sigma_star == 1.0
        assert abs(ch.steps[0].margin) <= 1e-15
        assert all(s.margin >= 0 for s in ch.steps[1:])

    def test_equal_weights_hits_endpoint(self):
        ch = proof_chain(wv(0.5, 0.5), make_delta(0.1))
        assert ch.steps[3].rhs == pytest.approx(math.log(1 / 6), abs=1e-14)
        assert ch.steps[2].rhs == pytest.approx(phi(1.0, 0.2), abs=1e-15)
        assert abs(ch.steps[2].margin) <= 1e-14

    def test_all_indices(self):
        chains = proof_chain(wv(0.5, 0.3, 0.2), make_delta(0.05), all_indices=True)
        assert [c.index for c in chains] == [1, 2, 3]
        for c in chains:
            assert abs(c.steps[0].margin) <= 1e-10
            assert all(s.margin >= -1e-12 for s in c.steps[1:])


weights_st = st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=16)
delta_st = st.floats(1e-4, 10.0)


@given(weights_st, delta_st)
@settings(max_examples=300, deadline=None)
def test_implication_holds(raw, delta):
    w = make_weight_vector(raw, normalize=True)
    d = make_delta(delta)
    rep = implication_margin(w, d)
    assert rep.implication_margin >= -1e-12
    ch = proof_chain(w, d)
    assert abs(ch.steps[0].margin) <= 1e-10
    # chain consistency: each rhs bounded by the log of the Samuels value
    log_sam = math.log(rep.samuels)
    for s in ch.steps:
        assert log_sam >= s.rhs - 1e-10
        assert s.lhs - s.rhs == s.margin
    assert ch.steps[-1].rhs == pytest.approx(math.log(rep.feige), abs=1e-12)


@given(st.lists(st.integers(1, 30), min_size=2, max_size=8), st.integers(1, 50), st.data())
@settings(max_examples=100, deadline=None)
def test_term_depends_only_on_prefix_and_tail_total(raw, dnum, data):
    w = make_weight_vector(raw, normalize=True, mode=RATIONAL)
    d = make_delta(Fr(dnum, 10), RATIONAL)
    i = data.draw(st.integers(1, w.n - 1))
    tail_total = 1 - w.prefix[i - 1]
    k = data.draw(st.integers(1, 5))
    piece = tail_total / k
    while piece > w.weights[i - 1]:
        k += 1
        piece = tail_total / k
    w2 = make_weight_vector(list(w.weights[:i]) + [piece] * k, mode=RATIONAL)
    assert samuels_term(w, d, i) == samuels_term(w2, d, i)
    assert samuels_term(w, d, i) == prefix_product(w.weights, d.delta, i)


@given(weights_st, delta_st, st.floats(1.01, 3.0))
@settings(max_examples=200, deadline=None)
def test_monotone_in_delta(raw, delta, factor):
    w = make_weight_vector(raw, normalize=True)
    lo, hi = make_delta(delta), make_delta(delta * factor)
    assert samuels_bound(w, hi)[0] > samuels_bound(w, lo)[0]
    f_lo, f_hi = feige_bound(w.max_weight, lo), feige_bound(w.max_weight, hi)
    # Feige's bound is capped at 1/e, so it is only strictly increasing below the cap
    assert f_hi >= f_lo
    if f_lo < INV_E:
        assert f_hi > f_lo


@given(st.lists(st.integers(1, 20), min_size=1, max_size=6), st.integers(1, 100))
@settings(max_examples=100, deadline=None)
def test_float_matches_rational(raw, dnum):
    wr = make_weight_vector(raw, normalize=True, mode=RATIONAL)
    dr = make_delta(Fr(dnum, 20), RATIONAL)
    wf = make_weight_vector([float(x) for x in wr.weights])
    df = make_delta(float(dr.delta))
    for a, b in zip(samuels_terms(wr, dr), samuels_terms(wf, df)):
        assert float(a) == pytest.approx(b, rel=1e-13)
