from fractions import Fraction

import pytest

from asepdual import verify as V
from asepdual.evolution import DrivingSpec


def _all_pass(reports):
    bad = [r.summary() + " " + "; ".join(r.notes) for r in reports if not r.passed]
    assert not bad, bad


def test_report_schema():
    r = V.check_proposition1(4, 1, 1, "+")
    d = r.to_dict()
    assert set(d) == {"check", "params", "mode", "residual", "pass", "runtime_ms", "notes"}
    assert d["pass"] is True and d["mode"] == "exact"
    assert r.to_dict(timing=False)["runtime_ms"] is None


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("mode", ["exact", "numeric"])
def test_algebra(L, mode):
    _all_pass(V.check_algebra(L, mode))


def test_self_duality_and_mu_independence():
    base = V.check_duality_theorem1(6, [2, 5], "110101", 0.7, q=1.7)
    assert base.passed
    # value from a dense 2**L Kronecker reference
    assert float(base.notes[0].split("=")[1]) == pytest.approx(0.0002461585258232246, rel=1e-12)
    for mu in (-7, 3):
        r = V.check_duality_theorem1(6, [2, 5], "110101", 0.7, q=1.7, mu=mu)
        assert r.passed


@pytest.mark.parametrize("sign", ["+", "-"])
@pytest.mark.parametrize("alpha_exp", [0, Fraction(1, 4), Fraction(-3, 8)])
def test_twisted_intertwiner_l4(sign, alpha_exp):
    _all_pass([V.check_proposition1(4, K, n, sign, alpha_exp)
               for K in range(5) for n in range(0, min(2, 4 - K) + 1)])


def test_twisted_intertwiner_witness_is_nonzero():
    r = V.check_proposition1(6, 2, 1, "+")
    assert r.passed
    assert any("nonzero as expected" in n for n in r.notes)


def test_twisted_intertwiner_numeric_mode():
    assert V.check_proposition1(5, 2, 2, "-", Fraction(1, 3), mode="numeric").passed


@pytest.mark.parametrize("LNK", [(4, 2, 1), (6, 3, 1), (6, 4, 2)])
def test_proof_chains(LNK):
    _all_pass(V.check_theorem2_chain(*LNK) + V.check_theorem3_chain(*LNK))


def test_shock_walk_examples():
    assert V.check_theorem2(6, 2, 1, [2], z=1.0, q=2.0, t=0.4).passed
    assert V.check_theorem3(8, 3, 2, [2, 6], z=0.5, q=1.3, t=1.0).passed
    r = V.check_theorem2(6, 2, 1, [4], t=0.0)
    assert r.passed and r.residual < 1e-14


def test_shock_walk_check_is_not_vacuous():
    # swapping the roles of N and K in the driving breaks the identity
    bad = V._theorem_core("swapped", 6, 2, 1, [3], 1.0, 1.5, 0.5, 1e-9, 1e-10, "dense",
                          DrivingSpec("global", 2), DrivingSpec("global", 1), "II")
    assert not bad.passed
    wrong_kind = V._theorem_core("wrong-kind", 6, 2, 1, [3], 1.0, 1.5, 0.5, 1e-9, 1e-10, "dense",
                                 DrivingSpec("global", 1), DrivingSpec("global", 2), "I")
    assert not wrong_kind.passed


@pytest.mark.parametrize("L", [3, 4])
def test_appendix_boundary(L):
    _all_pass([V.check_appendix_boundary_relations(L),
               V.check_appendix_boundary_relations(L, alpha_exp=0, beta_exp=0),
               V.check_appendix_boundary_relations(L, mode="numeric")])


def test_vanishing_conditions():
    # q^(4 - 2N + 2) = beta alpha^4 with alpha = 1, beta = q^2 holds at N = 2, not at N = 1
    assert V.vanishing_holds(4, 2, "+", 0, 2)
    assert not V.vanishing_holds(4, 1, "+", 0, 2)
    zero = V.check_pseudocommutator(4, 2, "+", 0, 2)
    witness = V.check_pseudocommutator(4, 1, "+", 0, 2)
    assert zero.passed and zero.params["condition_holds"]
    assert witness.passed and not witness.params["condition_holds"]
    assert any("nonzero as expected" in n for n in witness.notes)
    # sign -: q^(-5 + 6 + 2) = beta alpha^5 with alpha = q^(1/5) needs beta = q^2
    r = V.check_pseudocommutator(5, 3, "-", Fraction(1, 5), 2)
    assert r.passed and r.params["condition_holds"]


def test_factorisation_identities():
    r = V.check_lemmas(4)
    assert r.passed and r.params["n_sets"] == 16
    assert V.check_lemmas(6, "numeric", max_sets=10).passed


def test_collector_detects_errors():
    from asepdual.operators import GeneratorSpec, build_generator
    from asepdual.scalar import ExactField

    F = ExactField(3)
    c = V._Collector("probe", {}, F, 1e-12, 1.5)
    H = build_generator(GeneratorSpec(3, F))
    c.add("same", H, H)
    c.add("different", H, H * F.q_pow(2))
    rep = c.report()
    assert not rep.passed and rep.residual > 0


def test_run_suite_unknown_name_runs_nothing(monkeypatch):
    calls = []
    monkeypatch.setitem(V.SUITES, "algebra", lambda cfg: calls.append(cfg) or [])
    with pytest.raises(ValueError):
        V.run_suite("everything")
    with pytest.raises(ValueError):
        V.run_suite("algebra", {"bogus": 1})
    assert calls == []


def test_suite_is_deterministic():
    a = [r.to_dict(timing=False) for r in V.run_suite("appendix", {"appendix_L": [3]})]
    b = [r.to_dict(timing=False) for r in V.run_suite("appendix", {"appendix_L": [3]})]
    assert a == b and all(d["pass"] for d in a)


def test_make_field_refines_when_needed():
    F = V.make_field("exact", 4, 1.5, [Fraction(1, 16)])
    assert F.refine == 2
    with pytest.raises(ValueError):
        V.make_field("exact", 4, 1.5, [Fraction(1, 7)])
    with pytest.raises(ValueError):
        V.make_field("fuzzy", 4, 1.5)
