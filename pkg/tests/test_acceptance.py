"""Acceptance criteria 1 to 10, each printing one pass/fail line."""
import math
import time
from fractions import Fraction

import pytest

from sumprod.dist import Dist
from sumprod.extractor import condense_exact
from sumprod.field import FieldSpec
from sumprod.verifier import Corpus, cauchy_davenport_exhaustive, check_mo_upper, report_digest, run_suite

SEED = 42
EXACT_CORPUS = Corpus(trials=1000, seed=SEED, fields=("p=13", "p=101", "p=4099", "Q"))
FLAT_CORPUS = Corpus(trials=500, seed=SEED)
EXTRACTOR_CORPUS = Corpus(trials=100, seed=SEED)


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def line(n, ok, detail, secs, limit):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail} ({secs:.1f}s, limit {limit}s)"


@pytest.fixture(scope="module")
def exact_report():
    return timed(run_suite, "exact-inequalities", EXACT_CORPUS)


@pytest.fixture(scope="module")
def flat_report():
    return timed(run_suite, "flat", FLAT_CORPUS)


@pytest.fixture(scope="module")
def extractor_report():
    return timed(run_suite, "extractor", EXTRACTOR_CORPUS)


def test_criterion_01_exact_inequalities(exact_report, criterion_line):
    rep, secs = exact_report
    s = rep["summary"]
    checks = sorted({t["check"] for t in rep["trials"]})
    ok = s["violations"] == 0 and secs < 120
    criterion_line(line(1, ok, f"{s['trials']} records over {len(EXACT_CORPUS.fields)} fields, "
                               f"{s['violations']} violations, {s['skipped']} precondition skips, "
                               f"checks {','.join(checks)}", secs, 120))
    assert s["violations"] == 0
    assert s["trials"] > 0 and not any(t["pass"] is False for t in rep["trials"])
    assert secs < 120


@pytest.mark.xfail(strict=True, reason="the stated max-over-two bound fails when X has an atom at 0")
def test_criterion_01b_stated_mo_bound_without_zero_precondition(exact_report, criterion_line):
    rep, _ = exact_report
    n = rep["summary"]["mo_stated_counterexamples"]
    zero = Dist.point(FieldSpec.rationals(), 0)
    y = Dist.uniform(FieldSpec.rationals(), range(4))
    slack = check_mo_upper(zero, y, y)["values"]["stated_slack"]
    criterion_line(f"criterion 1b: FAIL stated bound without P(X=0)=0: {n} counterexamples in the corpus, "
                   f"X=0 and Y,Z uniform on 0..3 gives slack {slack:.4f} (expected failure)")
    assert n == 0 and slack >= 0


def test_criterion_02_cauchy_davenport(criterion_line):
    res, secs = timed(cauchy_davenport_exhaustive, 7)
    ok = res["pairs"] == 127 * 127 and res["violations"] == 0 and secs < 1
    criterion_line(line(2, ok, f"{res['pairs']} pairs in F_7, {res['violations']} violations", secs, 1))
    assert res["pairs"] == 127 * 127 and res["violations"] == 0
    assert secs < 1


def test_criterion_03_binomial(criterion_line):
    rep, secs = timed(run_suite, "binomial", Corpus(trials=0, seed=SEED))
    recs = {t["check"]: t for t in rep["trials"]}
    dbl = recs["binomial_doubling"]["values"]["doubling"]
    gaps = recs["binomial_gap_monotone"]["values"]["abs_gaps"]
    mono = all(b <= a for a, b in zip(gaps, gaps[1:]))
    ok = 0.48 <= dbl <= 0.52 and mono and gaps[-1] <= 0.02 and rep["summary"]["violations"] == 0 and secs < 10
    criterion_line(line(3, ok, f"doubling at n=1024 {dbl:.5f}, |gap| at n=4096 {gaps[-1]:.2e}, "
                               f"monotone {mono}", secs, 10))
    assert 0.48 <= dbl <= 0.52
    assert mono and gaps[-1] <= 0.02
    assert rep["summary"]["violations"] == 0
    assert secs < 10


def test_criterion_04_flat(flat_report, criterion_line):
    rep, secs = flat_report
    ex = rep["trials"][0]
    flats = [t for t in rep["trials"] if t["check"] == "flat"]
    fails = sum(1 for t in flats if not t["pass"])
    ok = ex["pass"] and len(flats) == 500 and fails == 0 and secs < 30
    criterion_line(line(4, ok, f"{len(flats)} decompositions, {fails} validator failures, "
                               f"worked example {ex['values']['parts']} parts", secs, 30))
    assert ex["check"] == "flat_example" and ex["pass"] and ex["values"]["parts"] == 2
    assert len(flats) == 500 and fails == 0
    assert secs < 30


def test_criterion_05_energy(criterion_line):
    rep, secs = timed(run_suite, "energy", Corpus(trials=200, seed=SEED))
    recs = rep["trials"]
    fields = sorted({t["field"] for t in recs})
    fails = sum(1 for t in recs if not t["pass"])
    ok = len(recs) == 200 and fails == 0 and secs < 60
    criterion_line(line(5, ok, f"{len(recs)} trials over {','.join(fields)}, {fails} mismatches", secs, 60))
    assert len(recs) == 200 and fails == 0
    for t in recs:
        v = t["values"]
        assert max(v["sizes"]) <= 6
        assert v["N"] == v["N_naive"] == v["incidences"] and v["rnr"] == v["rnr_naive"]
    assert secs < 60


def test_criterion_06_collision_growth(criterion_line):
    rep, secs = timed(run_suite, "collision-growth", Corpus(trials=100, seed=SEED))
    recs = rep["trials"]
    deficits = [t["values"]["deficit"] for t in recs]
    finite = all(math.isfinite(d) for d in deficits)
    guard_fails = sum(1 for t in recs if not t["pass"])
    ks = sorted({t["values"]["k"] for t in recs})
    ok = finite and guard_fails == 0 and ks == [8, 16, 32, 64] and secs < 120
    criterion_line(line(6, ok, f"k in {ks}, deficit max {max(deficits):.4f}, guard "
                               f"{rep['summary']['guard_constant']}*k^1.5 failures {guard_fails}", secs, 120))
    assert finite and rep["summary"]["deficit_max"] == max(deficits)
    assert guard_fails == 0 and ks == [8, 16, 32, 64]
    assert secs < 120


def test_criterion_07_extractor(extractor_report, criterion_line):
    rep, secs = extractor_report
    ex = rep["trials"][0]
    exact = [t for t in rep["trials"] if t["check"] == "extractor_exact"]
    fails = sum(1 for t in exact if not t["pass"])
    s = rep["summary"]
    ok = ex["pass"] and len(exact) == 100 and fails == 0 and secs < 120
    criterion_line(line(7, ok, f"F_5 example {'ok' if ex['pass'] else 'wrong'}, {len(exact)} trials over F_257, "
                               f"{fails} pushforward mismatches, Hmin gains {s['gain_min']:.3f}..{s['gain_max']:.3f}",
                        secs, 120))
    tr = condense_exact(Dist.uniform(FieldSpec(5), [1, 2]), 1)
    assert tr.laws[1].as_dict() == {1: Fraction(1, 4), 2: Fraction(1, 8), 3: Fraction(3, 8), 4: Fraction(1, 4)}
    assert ex["pass"]
    assert all(len(t["values"]["gains"]) == 2 for t in exact)
    assert len(exact) == 100 and fails == 0
    assert secs < 120


def test_criterion_08_gradient(criterion_line):
    rep, secs = timed(run_suite, "gradient", Corpus(trials=100, seed=SEED))
    recs = rep["trials"]
    worst = max(max(t["values"].values()) for t in recs)
    fails = sum(1 for t in recs if not t["pass"])
    ok = len(recs) == 200 and fails == 0 and worst <= 1e-5 and secs < 30
    criterion_line(line(8, ok, f"{len(recs)} points over F_101 and Q, max abs deviation {worst:.2e}", secs, 30))
    assert len(recs) == 200 and fails == 0 and worst <= 1e-5
    assert secs < 30


def test_criterion_09_freiman(criterion_line):
    rep, secs = timed(run_suite, "freiman", Corpus(seed=SEED))
    recs = rep["trials"]
    reject = recs[0]
    gaps = [t for t in recs if t["check"] == "freiman"]
    fails = sum(1 for t in gaps if not t["pass"])
    worst = max(t["values"]["max_entropy_gap"] for t in gaps)
    ok = reject["pass"] and fails == 0 and secs < 60
    criterion_line(line(9, ok, f"{len(gaps)} progressions, {fails} failures, max entropy gap {worst:.1e}, "
                               f"F_11 example rejected {reject['values']['rejected']}", secs, 60))
    assert reject["check"] == "freiman_reject" and reject["pass"]
    for t in gaps:
        q = t["values"]
        assert q["size"] <= 200 and q["isomorphism"]
        assert len(q["progression"]["r"]) <= 2
    assert fails == 0 and worst <= 1e-9
    assert secs < 60


def test_criterion_10_reproducibility(exact_report, flat_report, extractor_report, criterion_line):
    first = {"exact-inequalities": (exact_report[0], EXACT_CORPUS), "flat": (flat_report[0], FLAT_CORPUS),
             "extractor": (extractor_report[0], EXTRACTOR_CORPUS)}
    same = {name: report_digest(rep) == report_digest(run_suite(name, corpus))
            for name, (rep, corpus) in first.items()}
    ok = all(same.values())
    criterion_line(f"criterion 10: {'PASS' if ok else 'FAIL'} dual-run digests equal for "
                   + ", ".join(f"{k}={v}" for k, v in same.items()))
    assert ok
