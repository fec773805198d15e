"""Acceptance gate: ten criteria, one test line apiece.

Each criterion pins its tolerance and asserts its wall-clock budget;
run with -s to see the per-criterion timing lines.  Everything here is
self-contained except the randomized exhaustion generator, which is
shared with the module tests so both suites sample the same space.
"""

import random
import time
from contextlib import contextmanager
from fractions import Fraction as F
from pathlib import Path

from algebroidlab.algebroid import (LieAlgebroidPatch, adjoint_representation,
                                    validate_algebroid)
from algebroidlab.cli import main
from algebroidlab.cohomology import cohomology
from algebroidlab.covers import (ChartData, CoverDatum, LocalSystemFamily,
                                 build_double_complex, localization_check,
                                 ss_pages)
from algebroidlab.exhaustion import (ExhaustionProblem, MonotoneOracle,
                                     subexhaust, verify_interleaving)
from algebroidlab.library import (abelian_patch, heisenberg_patch,
                                  product_with_tangent, sl2_patch,
                                  tangent_patch)
from algebroidlab.linalg import QMatrix
from algebroidlab.pullback import (euler_homotopy_verify, rescaling_family,
                                   transversal_iso_check)
from algebroidlab.ratpoly import TruncatedPoly, WeightAssignment, parse_poly
from algebroidlab.transport import (PathFamily, monodromy_check,
                                    parallel_transport, reverse_path)

from test_exhaustion import _random_problem

MODELS = Path(__file__).resolve().parent.parent / "models"


@contextmanager
def budget(criterion: int, seconds: float, label: str):
    t0 = time.perf_counter()
    yield
    dt = time.perf_counter() - t0
    print(f"criterion {criterion:2d} ({label}): PASS in {dt:.2f}s "
          f"(budget {seconds:g}s)")
    assert dt < seconds, f"criterion {criterion} over budget: {dt:.2f}s"


# ---------------------------------------------------------------- 1


def test_criterion_01_axiom_suite():
    with budget(1, 1.0, "axiom suite"):
        assert validate_algebroid(abelian_patch(2)).ok
        assert validate_algebroid(sl2_patch()).ok
        assert validate_algebroid(tangent_patch(("x", "y"), 3)).ok

        rng = random.Random(8281)
        for _ in range(20):
            g = sl2_patch()
            i = rng.randrange(3)
            j = rng.randrange(3)
            k = rng.randrange(3)
            delta = F(rng.choice([1, -1, 2, -3]), rng.choice([1, 2]))
            g.structure[i][j][k] = g.structure[i][j][k] + TruncatedPoly.const(
                0, delta, 0)
            vr = validate_algebroid(g)
            assert not vr.ok
            bad = vr.failing()[0]
            assert bad.name == "antisymmetry"
            wi, wj, wk = bad.witness["indices"]
            # witness names the (sorted) perturbed slot and the exact residual
            assert (wi - 1, wj - 1, wk - 1) == (min(i, j), max(i, j), k)
            s = (g.structure[wi - 1][wj - 1][wk - 1]
                 + g.structure[wj - 1][wi - 1][wk - 1])
            assert bad.witness["coefficient"] == s.constant_term() != 0

        # a paired perturbation keeps antisymmetry and must fall to Jacobi
        g = sl2_patch()
        bump = TruncatedPoly.const(0, F(1, 2), 0)
        g.structure[0][1][1] = g.structure[0][1][1] + bump
        g.structure[1][0][1] = g.structure[1][0][1] - bump
        vr = validate_algebroid(g)
        assert not vr.ok
        assert vr.failing()[0].name == "jacobi"


# ---------------------------------------------------------------- 2


def test_criterion_02_rank_three_simple_fibre_betti():
    with budget(2, 1.0, "trivial and adjoint betti"):
        g = sl2_patch()
        triv = [row.betti for row in cohomology(g).rows]
        assert triv == [1, 0, 0, 1]
        adj = [row.betti
               for row in cohomology(g, adjoint_representation(g)).rows]
        assert adj == [0, 0, 0, 0]


# ---------------------------------------------------------------- 3


def test_criterion_03_formal_poincare_windows():
    with budget(3, 5.0, "jet windows 4:8:3"):
        a = tangent_patch(("x", "y"), 8)
        rep = cohomology(a, mode="jet", window=(4, 8, 3))
        by_deg = {row.degree: row for row in rep.rows}
        assert [by_deg[q].betti for q in (0, 1, 2)] == [1, 0, 0]
        assert all(by_deg[q].stabilized for q in (0, 1, 2))


# ---------------------------------------------------------------- 4


def test_criterion_04_transversal_restriction_iso():
    with budget(4, 5.0, "transversal slice isomorphisms"):
        fixtures = [
            (product_with_tangent(sl2_patch(), ("y",), 5, (1,)), (), (2, 4, 2)),
            (product_with_tangent(heisenberg_patch(), ("y",), 5, (1,)), (),
             (2, 4, 2)),
            (tangent_patch(("x", "y"), 6, weights=(1, 1)), (), (2, 4, 2)),
        ]
        for a, keep, window in fixtures:
            rep = transversal_iso_check(a, None, keep=keep, window=window)
            assert rep.ok
            for row in rep.rows:
                assert row.equal and row.restriction_surjective
            # independent route: the weighted contraction homotopy
            ev = euler_homotopy_verify(a, None, max_deg=3, degrees=(0, 1, 2))
            assert ev.anchor_is_euler_field
            assert ev.identity_ok
            assert ev.vanishing_weights_ok

        # fourth fixture with a weight-zero direction, slice along it
        curved = _curved_split_patch()
        rep = transversal_iso_check(curved, None, keep=(0,), window=(3, 5, 3))
        assert rep.ok


def _curved_split_patch(jet_order=6):
    def p(text):
        return parse_poly(text, ("x", "y"), jet_order)

    anchor = [[p("1"), p("y")], [p("0"), p("1")]]
    c = [[[p("0"), p("0")], [p("0"), p("-1")]],
         [[p("0"), p("1")], [p("0"), p("0")]]]
    return LieAlgebroidPatch(("x", "y"), jet_order, 2, anchor, c,
                             weights=WeightAssignment((0, 1)),
                             frame_weights=(0, -1), name="curved_split")


# ---------------------------------------------------------------- 5


def test_criterion_05_rescaling_tri_equivalence():
    with budget(5, 5.0, "rescaling verdicts coincide"):
        rng = random.Random(515151)
        jet = 5
        zero = TruncatedPoly.zero(2, jet)
        one = TruncatedPoly.const(2, 1, jet)
        flat = [[[zero, zero]] * 2, [[zero, zero]] * 2]
        for case in range(20):
            if case % 2 == 0:
                # frame (d/dx, p(y) d/dy) with a random low-degree p
                coeffs = [F(rng.randint(-3, 3)) for _ in range(3)]
                if rng.random() < 0.5:
                    coeffs[0] = F(0)
                if all(v == 0 for v in coeffs):
                    coeffs[1] = F(1)
                p = TruncatedPoly.zero(2, jet)
                for d, v in enumerate(coeffs):
                    if v:
                        p = p + TruncatedPoly.monomial(2, (0, d), v, jet)
                a = LieAlgebroidPatch(("x", "y"), jet, 2,
                                      [[one, zero], [zero, p]], flat,
                                      weights=WeightAssignment((0, 1)))
                expect = coeffs[0] != 0
            else:
                # constant anchor block, possibly rank deficient
                b = [[F(rng.randint(-2, 2)) for _ in range(2)]
                     for _ in range(2)]
                if rng.random() < 0.4:
                    lam = F(rng.randint(-2, 2))
                    b[1] = [lam * v for v in b[0]]
                anchor = [[TruncatedPoly.const(2, b[i][l], jet)
                           for l in range(2)] for i in range(2)]
                a = LieAlgebroidPatch(("y", "z"), jet, 2, anchor, flat,
                                      weights=WeightAssignment((1, 1)))
                expect = QMatrix(b).rank() == 2
            assert validate_algebroid(a).ok
            rep = rescaling_family(a)
            assert rep.agree
            assert rep.zero_section_transverse == expect
            assert rep.all_scales_transverse == expect
            assert rep.family_fibrewise_transverse == expect


# ---------------------------------------------------------------- 6


def _interval_cover(n):
    return CoverDatum(tuple(f"U{i}" for i in range(n)),
                      tuple((i, i + 1) for i in range(n - 1)))


def _circle_cover(n):
    pairs = sorted(tuple(sorted((i, (i + 1) % n))) for i in range(n))
    return CoverDatum(tuple(f"U{i}" for i in range(n)), tuple(pairs))


def _constant_family(cover, fibre, rep=None, transitions=None):
    return LocalSystemFamily(cover, [ChartData(fibre, rep)
                                     for _ in cover.charts], transitions or {})


def _random_cover_family(rng):
    shape = rng.choice(["interval", "circle", "tree", "triangle"])
    if shape == "interval":
        cover = _interval_cover(rng.randint(2, 4))
    elif shape == "circle":
        cover = _circle_cover(rng.randint(3, 5))
    elif shape == "tree":
        n = rng.randint(3, 5)
        overlaps = tuple(sorted((rng.randint(0, i - 1), i)
                                for i in range(1, n)))
        cover = CoverDatum(tuple(f"U{i}" for i in range(n)), overlaps)
    else:
        cover = CoverDatum(("A", "B", "C"), ((0, 1), (0, 2), (1, 2)),
                           ((0, 1, 2),))
    kind = rng.choice(["abelian", "sl2", "heisenberg"])
    if kind == "abelian":
        fib = abelian_patch(rng.randint(1, 3))
    elif kind == "sl2":
        fib = sl2_patch()
    else:
        fib = heisenberg_patch()

    def rand_aut():
        if kind == "abelian":
            while True:
                m = [[F(rng.randint(-2, 2)) for _ in range(fib.rank)]
                     for _ in range(fib.rank)]
                q = QMatrix(m)
                if q.rank() == fib.rank:
                    return q
        if kind == "sl2":
            lam = F(rng.choice([1, 2, 3, -1]))
            return QMatrix([[1, 0, 0], [0, lam, 0], [0, 0, 1 / lam]])
        aa, bb = F(rng.choice([1, 2, -1])), F(rng.choice([1, 3]))
        return QMatrix([[aa, 0, 0], [0, bb, 0], [0, 0, aa * bb]])

    trans = {}
    if cover.triples:
        # gauge a cocycle so the triple condition holds by construction
        gauges = [rand_aut() for _ in cover.charts]
        qg = [F(rng.choice([1, 2, 3])) for _ in cover.charts]
        for (i, j) in cover.overlaps:
            trans[(i, j)] = (gauges[i] @ gauges[j].inverse(),
                             QMatrix([[qg[i] / qg[j]]]))
    else:
        for (i, j) in cover.overlaps:
            if rng.random() < 0.7:
                trans[(i, j)] = (rand_aut(),
                                 QMatrix([[F(rng.choice([1, 2]))]]))
    return cover, _constant_family(cover, fib, transitions=trans)


def test_criterion_06_double_complex_certificates():
    with budget(6, 30.0, "pages vs brute force and oracle"):
        rng = random.Random(626262)
        for _ in range(25):
            cover, fam = _random_cover_family(rng)
            dc = build_double_complex(fam, cover)
            total = sum(len(base) for base in dc.bases.values())
            assert total <= 200
            rep = ss_pages(dc, r_max=3)
            assert rep.convergence_ok        # terminal page == total betti
            assert rep.e2_ok                 # second page == simplicial oracle


# ---------------------------------------------------------------- 7


def _unipotent_circle():
    twist = QMatrix([[1, 1], [0, 1]])
    charts = [ChartData(abelian_patch(2), None) for _ in range(3)]
    fam = LocalSystemFamily(_circle_cover(3), charts,
                            {(0, 2): (twist, QMatrix.identity(1))})
    pf = PathFamily.from_brackets(2, {}, [[0, 1], [0, 0]], name="nilshift")
    return pf, fam


def test_criterion_07_monodromy_two_routes():
    with budget(7, 5.0, "holonomy equals induced transport"):
        pf, fam = _unipotent_circle()
        rep = monodromy_check(pf, fam, tol=1e-8)
        assert rep.exact_transport           # rationalization certified
        assert rep.match and rep.matched_exactly
        cech, induced = rep.by_degree[1]
        assert cech.rows == induced.rows == [[F(1), F(0)], [F(-1), F(1)]]

        fwd = parallel_transport(pf, tol=1e-8)
        rev = parallel_transport(reverse_path(pf), tol=1e-8)
        prod = rev.phi @ fwd.phi
        worst = max(abs(float(prod.rows[i][j]) - (1.0 if i == j else 0.0))
                    for i in range(2) for j in range(2))
        assert worst <= 2e-8


# ---------------------------------------------------------------- 8


def _random_tree_cover(rng, n):
    overlaps = tuple(sorted((rng.randint(0, i - 1), i) for i in range(1, n)))
    return CoverDatum(tuple(f"U{i}" for i in range(n)), overlaps)


def test_criterion_08_localization_kernel_and_hypotheses():
    with budget(8, 10.0, "restriction has zero kernel"):
        rng = random.Random(888111)
        met = 0
        while met < 20:
            style = rng.choice(["tree_ab", "tree_sl2", "circle_adjoint"])
            if style == "tree_ab":
                cover = _random_tree_cover(rng, rng.randint(2, 5))
                fib = abelian_patch(rng.randint(1, 2))
                trans = {}
                for (i, j) in cover.overlaps:
                    if rng.random() < 0.7:
                        while True:
                            m = [[F(rng.randint(-2, 2))
                                  for _ in range(fib.rank)]
                                 for _ in range(fib.rank)]
                            q = QMatrix(m)
                            if q.rank() == fib.rank:
                                break
                        trans[(i, j)] = (q, QMatrix.identity(1))
                fam = _constant_family(cover, fib, transitions=trans)
                n = rng.choice([0, 1])
            elif style == "tree_sl2":
                cover = _random_tree_cover(rng, rng.randint(2, 4))
                fam = _constant_family(cover, sl2_patch())
                n = rng.choice([0, 1])
            else:
                cover = _circle_cover(rng.randint(3, 4))
                g = sl2_patch()
                fam = _constant_family(cover, g, rep=adjoint_representation(g))
                n = rng.choice([1, 2, 3])
            chart = rng.randrange(len(cover.charts))
            rep = localization_check(fam, cover, chart=chart, n=n)
            assert rep.verdict != "hypotheses unmet", (style, n)
            assert rep.verdict == "injective"
            assert rep.kernel_dim == 0
            met += 1

        # constructed violations: the tool must withhold a verdict
        circle = _circle_cover(3)
        unmet = localization_check(_constant_family(circle, abelian_patch(1)),
                                   circle, chart=0, n=1)
        assert unmet.verdict == "hypotheses unmet"
        assert unmet.kernel_dim is None
        assert not unmet.hypotheses["simply_connected"]
        assert not unmet.hypotheses["top_minus_one_vanishes"]

        split = CoverDatum(("U", "V"), ())          # disconnected base
        unmet = localization_check(_constant_family(split, sl2_patch()),
                                   split, chart=0, n=1)
        assert unmet.verdict == "hypotheses unmet"
        assert not unmet.hypotheses["connected"]

        heis = _constant_family(_circle_cover(3), heisenberg_patch())
        unmet = localization_check(heis, _circle_cover(3), chart=0, n=2)
        assert unmet.verdict == "hypotheses unmet"
        assert unmet.kernel_dim is None


# ---------------------------------------------------------------- 9


def test_criterion_09_subexhaustion():
    with budget(9, 1.0, "interleaved stage selections"):
        ep = ExhaustionProblem(("A", "B"), ((0, 1),),
                               {(1, 0): MonotoneOracle(slope=1, offset=1),
                                (0, 1): MonotoneOracle(slope=1, offset=2)})
        res = subexhaust(ep, steps=6)
        assert res.alphas[0] == (1, 4, 7, 10, 13, 16)
        assert res.alphas[1] == (2, 5, 8, 11, 14, 17)
        assert res.verified

        rng = random.Random(424243)
        for _ in range(50):
            ep = _random_problem(rng)
            assert ep.n_charts <= 6
            res = subexhaust(ep, steps=8)
            assert res.verified
            ok, witnesses = verify_interleaving(ep, res.alphas)
            assert ok and not witnesses


# ---------------------------------------------------------------- 10


def test_criterion_10_byte_identical_reports(capsysbinary):
    matrix = [
        ["check", "sl2_demo.alab"],
        ["check", "plane_jet.alab"],
        ["check", "sl2_line.alab"],
        ["check", "circle_family.alab"],
        ["check", "pair_family.alab"],
        ["check", "exhaustion_pair.alab"],
        ["cohomology", "sl2_demo.alab", "--name", "sl2"],
        ["cohomology", "sl2_demo.alab", "--name", "sl2", "--rep", "adjoint"],
        ["cohomology", "plane_jet.alab", "--mode", "jet", "--window", "4:8:3"],
        ["cohomology", "sl2_line.alab"],
        ["pullback", "sl2_line.alab", "--map", "point", "--point", "1/2"],
        ["pullback", "sl2_line.alab", "--map", "rescale", "--t", "1/3"],
        ["transversal", "sl2_line.alab"],
        ["ss", "circle_family.alab"],
        ["ss", "pair_family.alab"],
        ["localize", "circle_family.alab", "--at", "0", "--deg", "1"],
        ["localize", "pair_family.alab", "--at", "0", "--deg", "0"],
        ["transport", "circle_family.alab"],
        ["monodromy", "circle_family.alab"],
        ["subexhaust", "exhaustion_pair.alab", "--steps", "6"],
    ]
    for argv in matrix:
        cmd, fixture, *rest = argv
        full = [cmd, str(MODELS / fixture), *rest]
        for fmt in ("text", "csv", "structured"):
            runs = []
            codes = []
            for _ in range(2):
                codes.append(main(full + ["--format", fmt]))
                runs.append(capsysbinary.readouterr().out)
            assert runs[0] == runs[1], (argv, fmt)
            assert codes[0] == codes[1]
            assert runs[0]                       # something was emitted
    print("criterion 10 (byte-identical reports): PASS "
          f"({len(matrix)} command lines x 3 formats x 2 runs)")
