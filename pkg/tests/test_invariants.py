import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gonlat.enumeration import FiberQuery, box_oracle, budget_cap, fiber_classes
from gonlat.errors import CapBelowHodgeFloor, NoIsotropicSeed, WrongLattice
from gonlat.invariants import (
    Achiever,
    Cone,
    InvariantReport,
    cone_position,
    dm_min,
    full_report,
    gengon_report,
    hodge_floor,
    is_big_and_nef,
    k3_report,
    mu,
    phi,
    seed_bound,
)
from gonlat.lattice import make_lattice, polarize, preset, pullback

ENR = preset("enriques_num")
U = preset("U")
Z8 = (0,) * 8


def enr(*ab, e8=Z8):
    return polarize(ENR, tuple(ab) + tuple(e8))


def brute_phi_u(a, b):
    # isotropic vectors of U are multiples of e and f
    return min(v for v in (a, b) if v > 0)


def test_hodge_floor():
    assert hodge_floor(4, 12) == 7
    assert hodge_floor(4, 4) == 4
    assert hodge_floor(0, 9) == 0


@given(st.integers(1, 20), st.integers(1, 20))
def test_phi_on_u_closed_form(a, b):
    assert phi(polarize(U, (a, b)))[0] == brute_phi_u(a, b) == min(a, b)


def test_phi_examples():
    v, w = phi(enr(2, 3))
    assert v == 2 and w.coords == (0, 1) + Z8
    v, w = phi(enr(1, 1))
    assert v == 1 and w.coords == (0, 1) + Z8


def test_mu_examples():
    m = mu(enr(2, 3), "paper_literal", 6)
    assert m.value == 5 and m.witness.coords == (1, 2) + Z8
    m = mu(enr(1, 1), "paper_literal")
    assert m.value == 1 and m.witness.coords == (1, 2) + Z8
    with pytest.raises(CapBelowHodgeFloor):
        mu(enr(2, 3), "kl1_full", 4)
    with pytest.raises(ValueError):
        mu(enr(2, 3), "other")


def test_mu_kl1_excludes_phi_one_witnesses():
    m = mu(enr(1, 1), "kl1_full", 4)
    assert m.witness is None or m.witness.coords != (1, 2) + Z8
    if m.witness is not None:
        B = polarize(ENR, m.witness.coords)
        assert phi(B)[0] == 2


def test_mu_unbounded_marker():
    m = mu(enr(2, 3), "kl1_full", 6)
    assert m.value is None and m.to_json() == {"unbounded_above": 6}


def test_gengon_examples():
    r = gengon_report(enr(2, 3))
    assert (r.genus, r.gengon, r.achiever) == (7, 4, ["TwoPhi"])
    assert r.quarter_term == 5 and r.mu_cap == 6
    r = gengon_report(enr(1, 1))
    assert r.genus == 2 and r.gengon == 2
    assert set(r.achiever) >= {"TwoPhi", "Quarter"}


def test_c2_four_phi_two_instance():
    P = enr(2, 2, e8=(1, 1, 0, 0, 0, 0, 0, 0))
    r = full_report(P)
    assert (r.self_int, r.phi, r.gengon) == (4, 2, 3)
    assert "Quarter" in r.achiever
    assert (r.k3_self_int, r.k3_genus, r.k3_gonality, r.k3_max_gonality) == (8, 5, 4, 4)


def test_k3_examples():
    r = full_report(enr(1, 1))
    assert r.k3_genus == 3 and r.k3_gonality == 2
    E = pullback(ENR.vector(r.k3_witness))
    assert E.dot(pullback(ENR.vector((1, 1) + Z8))) == 2
    with pytest.raises(WrongLattice):
        k3_report(polarize(U, (1, 1)))


def test_dm_examples():
    dm = dm_min(enr(2, 3), 6)
    assert dm.value == 2 and dm.square == 0
    assert dm.witness.coords == (0, 1) + Z8
    assert dm.witness.lattice == preset("k3_invariant")
    with pytest.raises(ValueError):
        dm_min(enr(2, 3), -1)


def test_dm_equality_clause_for_c2_four():
    # 2 M^2 = M.L is only allowed for L = 2M; nothing else may tie
    P = enr(2, 2, e8=(1, 1, 0, 0, 0, 0, 0, 0))
    dm = dm_min(P, 2)
    assert dm.value == 2 and dm.square == 0 and dm.positive_square_ties == ()


def test_seeds_required_without_isotropic_basis():
    L = make_lattice([[2, 1], [1, -2]])
    P = polarize(L, (1, 0))
    with pytest.raises(NoIsotropicSeed):
        seed_bound(P)


def test_cone_helpers():
    P = enr(2, 3)
    assert cone_position(ENR.vector((1, 0) + Z8), P) is Cone.POSITIVE_SIDE
    assert cone_position(ENR.vector((-1, 0) + Z8), P) is Cone.NEGATIVE_SIDE
    assert cone_position(ENR.vector((1, -1) + Z8), P) is Cone.ORTHOGONAL
    assert is_big_and_nef(ENR.vector((1, 1) + Z8), P)
    assert Achiever("Mu") is Achiever.MU


def test_report_json_roundtrip():
    r = full_report(enr(2, 3))
    d = json.loads(json.dumps(r.to_json()))
    assert d["mu"] == {"unbounded_above": 6}
    assert InvariantReport.from_json(d) == r


def classes_a1_like():
    out = []
    for a, b in itertools.product(range(1, 4), repeat=2):
        for i, j in itertools.combinations(range(8), 2):
            for x, y in itertools.product(range(-1, 2), repeat=2):
                v = [0] * 8
                v[i], v[j] = x, y
                c = (a, b, *v)
                if math.gcd(*c) == 1 and 0 < ENR.vector(c).norm <= 20:
                    out.append(c)
    return sorted(set(out))


CLASSES = classes_a1_like()


@given(st.sampled_from(CLASSES))
@settings(max_examples=40, deadline=None)
def test_report_relations(c):
    P = polarize(ENR, c)
    r = full_report(P)
    c2 = r.self_int
    terms = [2 * r.phi, r.quarter_term] + ([r.mu] if r.mu is not None else [])
    assert r.gengon == min(terms)
    assert 2 * r.phi <= r.gengon + 2
    assert r.gengon <= r.k3_gonality == 2 * r.phi <= 2 * r.gengon
    assert r.k3_gonality % 2 == 0 and r.k3_clifford == r.k3_gonality - 2
    assert r.k3_gonality <= (r.k3_genus + 3) // 2
    assert r.phi ** 2 <= c2
    assert r.genus == c2 // 2 + 1 and r.k3_genus == 2 * r.genus - 1
    if r.gengon < 2 * r.phi:
        assert c2 >= 10 or (c2, r.phi) in {(6, 2), (4, 2)}
    if r.mu_witness is not None:
        B = ENR.vector(r.mu_witness)
        assert B.dot(P.vector) ** 2 >= 4 * c2 and B.norm == 4
    assert r.dm_value == 2 * r.phi - 2 and r.dm_square == 0


@given(st.sampled_from(CLASSES))
@settings(max_examples=25, deadline=None)
def test_phi_against_oracle(c):
    P = polarize(ENR, c)
    v, w = phi(P)
    T, box = budget_cap(P, 0, 200_000, v)
    orc = box_oracle(P, 0, box, T, primitive_only=True, positive_side=True,
                     coordinates="pairing")
    # nothing below phi inside the certified range
    assert all(t >= v for t in orc)
    if T == v:
        assert orc[v].vectors[0] == w


def test_paper_literal_mu_matches_oracle():
    P = enr(2, 3)
    T, box = budget_cap(P, 4, 2_000_000, 7)
    assert T == 7
    orc = box_oracle(P, 4, box, T, positive_side=True, coordinates="pairing")
    t = min(orc)
    assert t - 2 == 5 and orc[t].vectors[0].coords == (1, 2) + Z8
    assert fiber_classes(FiberQuery(P, 7, 4, positive_side=True)).vectors == orc[7].vectors
