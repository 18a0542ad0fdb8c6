"""Acceptance suite: one test per release criterion.

Each criterion prints a PASS/FAIL line (run pytest with -s to watch them).
Sub-checks whose reduced dimension exceeds the configured cap are excluded
up front and reported with the dimension they would need; raise the cap and
opt in to them with TRAPCODES_ACCEPT_BIG=1 (roughly 2^23-sized points, well
over an hour of extra compute).
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from trapcodes import f2
from trapcodes import logicals as lg
from trapcodes import penalty as pen
from trapcodes.codes import build_trapezoid_matrix, permutation_preserves_gauge_span, trapezoid_code
from trapcodes.f2 import Pauli, symplectic_product
from trapcodes.mapping import anneal_map, brute_force_map, build_induced_graph, hardware_graph, score

BIG = os.environ.get("TRAPCODES_ACCEPT_BIG", "") not in ("", "0")
CAP = 2**23 if BIG else pen.REDUCED_DIM_CAP


def _check(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def _exclude(name: str, detail: str) -> None:
    print(f"[EXCLUDED] {name}  ({detail})")


def _gap(args):
    m, l = args
    return (m, pen.penalty_gap(m, l, cross_check=False).gap)


def _series(pairs) -> list[tuple[int, float]]:
    with ThreadPoolExecutor(max_workers=2) as pool:
        return sorted(pool.map(_gap, pairs))


def _reachable(m: int, l: int) -> bool:
    return 2 ** (m + 2 * l - 3) <= CAP


def test_criterion_1_code_family_table():
    t0 = time.time()
    table = {
        (7, 1): (14, 6, 6, 2), (7, 2): (16, 6, 8, 2), (7, 3): (18, 6, 10, 2),
        (6, 1): (12, 5, 5, 2), (6, 2): (14, 5, 7, 2), (6, 3): (16, 5, 9, 2),
    }
    for (m, l), want in table.items():
        got = trapezoid_code(m, l).params.as_tuple()
        assert got == want, ((m, l), got, want)
    dt = time.time() - t0
    _check("criterion 1: code-family table", dt < 1.0, f"6 codes exact in {dt:.2f}s")


def test_criterion_2_logical_golden():
    # operator/gauge matrices for the three m = 7 codes, bit for bit
    want_ops = {
        (7, 1): (["0101010", "0010101", "0001010", "0000101", "0000010", "0000001"],
                 ["1000000", "0100000", "1010000", "0101000", "1010100", "0101010"]),
        (7, 2): (["0100010", "0010001", "0001000", "0000100", "0000010", "0000001"],
                 ["1000000", "0100000", "0010000", "0001000", "1000100", "0100010"]),
        (7, 3): (["0100000", "0010000", "0001000", "0000100", "0000010", "0000001"],
                 ["1000000", "0100000", "0010000", "0001000", "0000100", "0000010"]),
    }
    want_bars = {
        (7, 1): (["0010100", "0001010", "0000100", "0000010", "0000000", "0000000"],
                 ["0000000", "0000000", "0100000", "0010000", "0101000", "0010100"]),
        (7, 2): (["0000100", "0000010", "0000000", "0000000", "0000000", "0000000"],
                 ["0000000", "0000000", "0000000", "0000000", "0100000", "0010000"]),
        (7, 3): (["0000000"] * 6, ["0000000"] * 6),
    }
    for (m, l), (wx, wz) in want_ops.items():
        X, Z = lg.operator_matrices(m, l)
        assert [f2.bits_to_str(r) for r in X] == wx
        assert [f2.bits_to_str(r) for r in Z] == wz
        Xb, Zb = lg.gauge_matrices(trapezoid_code(m, l))
        assert [f2.bits_to_str(r) for r in Xb] == want_bars[(m, l)][0]
        assert [f2.bits_to_str(r) for r in Zb] == want_bars[(m, l)][1]

    c71 = trapezoid_code(7, 1)
    listed = {("X", 1): (2, 13), ("X", 2): (4, 14), ("X", 3): (6, 13), ("X", 4): (8, 14),
              ("X", 5): (10, 13), ("X", 6): (12, 14), ("Z", 1): (1, 2), ("Z", 2): (3, 4),
              ("Z", 3): (1, 6), ("Z", 4): (3, 8), ("Z", 5): (1, 10), ("Z", 6): (3, 12)}
    for (kind, i), want in listed.items():
        assert lg.dressed_logical(c71, i, kind).support() == want
    c52 = trapezoid_code(5, 2)
    for i, want in enumerate([(2, 9), (4, 10), (6, 11), (8, 12)], start=1):
        assert lg.dressed_logical(c52, i, "X").support() == want
    for i, want in enumerate([(1, 2), (3, 4), (5, 6), (7, 8)], start=1):
        assert lg.dressed_logical(c52, i, "Z").support() == want

    checked = 0
    for m in range(3, 14):
        for l in range(1, (m + 1) // 2):
            code = trapezoid_code(m, l)
            report = lg.validate_logical_set(code, lg.dressed_logical_set(code))
            assert report.passed, ((m, l), report.failures)
            checked += 1
    _check("criterion 2: logical-set goldens", True, f"matrices + section-6 lists + {checked} validated sets")


def test_criterion_3_search_space_oracle():
    t0 = time.time()
    table_7_2 = {
        "1000000", "0100000", "0010000", "0001000", "0000100", "0000010",
        "1100000", "1010000", "1001000", "0110000", "0101000", "0011000",
        "1000100", "0100010",
        "1100100", "1100010", "1100110", "1010100", "1001100", "0110010", "0101010",
    }
    assert lg.two_local_strings(7, 2, "Z") == table_7_2
    for m in (3, 5, 7, 9, 11):
        for l in range(1, (m - 1) // 2 + 1):
            code = trapezoid_code(m, l)
            for kind in ("Z", "X"):
                rules = lg.two_local_strings(m, l, kind)
                assert rules == lg.two_local_strings_bruteforce(code, kind), (m, l, kind)
                assert len(rules) == m * (m - 1) // 2
    dt = time.time() - t0
    _check("criterion 3: search-space oracle equivalence", dt < 60.0, f"odd m<=11, all l, in {dt:.1f}s")


def test_criterion_4_spectral_cross_check():
    small = [(3, 1), (4, 1), (4, 2), (5, 1), (5, 2), (6, 1), (6, 2), (7, 1)]
    for m, l in small:
        res = pen.penalty_gap(m, l, cross_check=False)
        code = trapezoid_code(m, l)
        full_gap, full_e0 = pen.penalty_gap_full(code)
        assert abs(res.gap - full_gap) <= 1e-7, ((m, l), res.gap, full_gap)
        assert abs(res.e0 - full_e0) <= 1e-7

    # dense versus Lanczos on the largest dense-solvable full space (2^12)
    H = pen.build_penalty_full(trapezoid_code(5, 2))
    dense = np.sort(np.linalg.eigvalsh(H.dense()))[:8]
    lanc = pen._lanczos_lowest(H, 8, seed=3)
    assert np.max(np.abs(dense - lanc)) <= 1e-8
    _check("criterion 4: spectral cross-checks", True,
           f"{len(small)} codes reduced==full to 1e-7; dense==Lanczos to 1e-8")


def test_criterion_5_gap_scaling():
    t0 = time.time()

    pts_l1 = _series((m, 1) for m in range(3, 16))
    f_l1 = pen.fit_gap_scaling(pts_l1, "power")
    _check("criterion 5a: l=1 power exponent", 0.93 <= f_l1.nu <= 1.13,
           f"nu={f_l1.nu:.4f} on m=3..15")

    lk_pairs = [(m, (m - 1) // 2) for m in (3, 5, 7, 9, 11, 13) if _reachable(m, (m - 1) // 2)]
    pts_lk = _series(lk_pairs)
    f_lk = pen.fit_gap_scaling(pts_lk, "expo")
    _check("criterion 5b: l=k exponential rate", 0.35 <= f_lk.nu <= 0.55,
           f"nu={f_lk.nu:.4f} on odd m up to {pts_lk[-1][0]}")

    # AIC model selection per l, on the odd-m series the published fit
    # parameters correspond to.  The comparison only stabilizes once the
    # series reaches the m recorded below (measured: shorter prefixes agree
    # on the fitted parameters but can prefer the power model); series that
    # cannot reach it under the dimension cap are excluded per criterion 8.
    expectation = {1: "power", 2: "power", 3: "expo", 4: "expo", 5: "expo", 6: "expo"}
    required_m = {1: 15, 2: 15, 3: 17, 4: 17, 5: 17, 6: 17}
    cache = {(m, 1): g for m, g in pts_l1}
    for l, want in expectation.items():
        first = 2 * l + 1 if l > 1 else 3
        if not _reachable(required_m[l], l):
            need = required_m[l] + 2 * l - 3
            _exclude(f"criterion 5c: AIC selection l={l}",
                     f"series needs odd m up to {required_m[l]} (dimension 2^{need}) "
                     f"above cap 2^{CAP.bit_length()-1}; set TRAPCODES_ACCEPT_BIG=1"
                     if 2**need <= 2**23 else
                     f"series needs odd m up to {required_m[l]} (dimension 2^{need}); "
                     "not reproducible at desk scale")
            continue
        pairs = [(m, l) for m in range(first, 18, 2) if _reachable(m, l)]
        pts = [(m, cache[(m, l)]) for m, _ in pairs if (m, l) in cache]
        missing = [p for p in pairs if p not in cache]
        pts += _series(missing)
        pts.sort()
        fp, fe, best = pen.preferred_model(pts)
        _check(f"criterion 5c: AIC selection l={l}", best == want,
               f"power AIC={fp.aic:.1f}, expo AIC={fe.aic:.1f}, want {want}, "
               f"odd m up to {pts[-1][0]}")

    dt = time.time() - t0
    budget = 3600 if BIG else 1800
    _check("criterion 5: runtime budget", dt < budget, f"{dt:.0f}s for cap 2^{CAP.bit_length()-1}")


PLACEMENT_TABLE = {
    ("union_jack", (4, 1)): ([1, 3, 5, 7, 0, 4, 10, 6], 13),
    ("union_jack", (4, 2)): ([0, 3, 1, 4, 2, 6, 5, 7, 8, 10], 16),
    ("union_jack", (5, 1)): ([1, 3, 5, 7, 0, 4, 11, 8, 6, 10], 21),
    ("union_jack", (5, 2)): ([0, 3, 1, 4, 2, 6, 5, 7, 11, 8, 10, 9], 22),
    ("square", (4, 1)): ([1, 3, 2, 5, 0, 4, 8, 7], 17),
    ("square", (4, 2)): ([0, 1, 3, 4, 6, 5, 9, 10, 7, 8], 20),
    ("square", (5, 1)): ([0, 1, 3, 6, 2, 4, 10, 7, 5, 8], 30),
    ("square", (5, 2)): ([0, 1, 3, 4, 6, 7, 9, 10, 2, 5, 8, 11], 24),
    ("heavy_hex", (4, 1)): ([0, 1, 8, 3, 10, 2, 5, 4], 23),
    ("heavy_hex", (4, 2)): ([4, 0, 3, 1, 2, 8, 10, 9, 7, 6], 30),
    ("heavy_hex", (5, 1)): ([0, 1, 6, 7, 3, 2, 12, 8, 10, 9], 41),
    ("heavy_hex", (5, 2)): ([3, 0, 4, 1, 5, 2, 11, 10, 6, 7, 8, 9], 44),
    ("triangular", (4, 1)): ([0, 1, 4, 5, 2, 6, 9, 10], 15),
    ("triangular", (4, 2)): ([0, 1, 4, 5, 7, 6, 3, 2, 10, 11], 18),
    ("triangular", (5, 1)): ([0, 1, 4, 5, 2, 6, 8, 9, 11, 10], 25),
    ("triangular", (5, 2)): ([0, 4, 1, 5, 2, 6, 3, 7, 8, 9, 10, 11], 24),
    ("hexagonal", (4, 1)): ([0, 1, 4, 3, 7, 2, 9, 8], 20),
    ("hexagonal", (4, 2)): ([6, 0, 7, 1, 8, 2, 4, 5, 3, 9], 25),
    ("hexagonal", (5, 1)): ([0, 1, 5, 3, 7, 2, 10, 4, 8, 9], 32),
    ("hexagonal", (5, 2)): ([6, 0, 7, 1, 8, 2, 9, 3, 11, 5, 4, 10], 34),
    ("kagome", (4, 1)): ([0, 1, 4, 3, 6, 2, 8, 7], 18),
    ("kagome", (4, 2)): ([6, 0, 1, 5, 2, 11, 3, 9, 4, 10], 21),
    ("kagome", (5, 1)): ([0, 1, 5, 3, 6, 2, 9, 4, 7, 8], 29),
    ("kagome", (5, 2)): ([0, 1, 11, 2, 5, 3, 10, 4, 6, 7, 8, 9], 30),
    ("rigetti_aspen", (4, 1)): ([1, 3, 0, 2, 5, 4, 11, 10], 20),
    ("rigetti_aspen", (4, 2)): ([0, 1, 2, 3, 5, 4, 8, 11, 10, 12], 24),
    ("rigetti_aspen", (5, 1)): ([1, 3, 6, 5, 2, 4, 9, 8, 10, 11], 34),
    ("rigetti_aspen", (5, 2)): ([0, 1, 2, 3, 10, 4, 11, 5, 6, 7, 9, 8], 36),
}

BRUTE_TOTALS = {"union_jack": 13, "triangular": 15, "square": 17, "kagome": 18,
                "hexagonal": 20, "rigetti_aspen": 20, "heavy_hex": 23}


def test_criterion_6_mapping_goldens():
    t0 = time.time()
    induced = {(m, l): build_induced_graph(trapezoid_code(m, l))
               for (m, l) in {(4, 1), (4, 2), (5, 1), (5, 2)}}
    layouts = {name: hardware_graph(name) for name in BRUTE_TOTALS}
    for (layout, code), (vec, total) in PLACEMENT_TABLE.items():
        s = score(vec, induced[code], layouts[layout])
        assert s.total == total, (layout, code, s.total, total)
        assert s.average * len(induced[code].edges) == total
    for layout, want in BRUTE_TOTALS.items():
        _, s = brute_force_map(induced[(4, 1)], layouts[layout])
        assert s.total == want, (layout, s.total, want)
    dt = time.time() - t0
    _check("criterion 6: mapping goldens", dt < 600.0,
           f"28 published cells + 7 brute-force optima in {dt:.0f}s")


def test_criterion_7_property_suites():
    rng = np.random.default_rng(42)

    # rank-nullity on random matrices
    for _ in range(40):
        r, c = rng.integers(1, 10, size=2)
        M = rng.integers(0, 2, (r, c), dtype=np.uint8)
        assert f2.rank(M) + len(f2.kernel(M)) == c

    # symplectic bilinearity
    for _ in range(100):
        p, q, s = (Pauli(rng.integers(0, 2, 6, dtype=np.uint8),
                         rng.integers(0, 2, 6, dtype=np.uint8)) for _ in range(3))
        assert symplectic_product(p, q * s) == symplectic_product(p, q) ^ symplectic_product(p, s)

    # permutation invariance of the gauge span
    A = build_trapezoid_matrix(7, 2)
    for _ in range(5):
        rp = [int(v) + 1 for v in rng.permutation(7)]
        cp = [int(v) + 1 for v in rng.permutation(7)]
        assert permutation_preserves_gauge_span(A, rp, cp)

    # stabilizers: membership and commutation; dressed weights
    for m, l in [(3, 1), (5, 2), (7, 1), (8, 3), (9, 2)]:
        code = trapezoid_code(m, l)
        span = code.gauge_span()
        for s in (code.stabilizer_x, code.stabilizer_z):
            assert span.contains(s)
            assert all(s.commutes_with(g) for g in code.xgauges + code.zgauges)
        for i in range(1, m):
            assert lg.dressed_logical(code, i, "X").weight == 2
            assert lg.dressed_logical(code, i, "Z").weight == 2
            for j in range(i + 1, m):
                assert lg.dressed_pair(code, i, j, "X").weight == 2
                assert lg.dressed_pair(code, i, j, "Z").weight == 2

    # score identity and the exact <= anneal <= published order
    induced = build_induced_graph(trapezoid_code(4, 1))
    for layout in ("union_jack", "kagome", "heavy_hex"):
        hw = hardware_graph(layout)
        vec, published = PLACEMENT_TABLE[(layout, (4, 1))]
        s_pub = score(vec, induced, hw)
        assert s_pub.average * len(induced.edges) == s_pub.total
        _, s_exact = brute_force_map(induced, hw)
        _, s_anneal = anneal_map(induced, hw, seed=0)
        assert s_exact.total <= s_anneal.total <= s_pub.total
    _check("criterion 7: property suites", True)


def test_criterion_8_caps_reported_and_trend_on_prefix():
    # far beyond desk scale: must refuse loudly, naming the cap
    with pytest.raises(pen.DimensionCapError, match="cap"):
        pen.penalty_gap(20, 7)
    rows = pen.sweep_gaps([20], 7, seed=7)
    assert rows[0].gap is None and "cap" in rows[0].error

    # the reachable prefix still shows the trend: gap decreasing in m
    gaps = [pen.penalty_gap(m, 1, cross_check=False).gap for m in range(3, 10)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert all(g > 0 for g in gaps)
    _check("criterion 8: caps reported, trend verified on reachable prefix", True,
           f"cap dimension 2^{pen.REDUCED_DIM_CAP.bit_length()-1}")
