"""Dressed 2-local logical operators for trapezoid codes.

Bare logical operators are parameterized by rows of two (m-1) x m operator
matrices (one bitstring per logical, selecting column operators for X and
row operators for Z).  Multiplying by gauge operators cancels all but two
physical factors, leaving the weight-2 dressed operators; the gauge factors
themselves are recorded in two companion gauge matrices.  This module also
enumerates the complete space of bitstrings that admit a weight-2 reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import f2
from .codes import SubsystemCode, TrapezoidParams
from .f2 import Pauli, SymplecticSpan, symplectic_product

__all__ = [
    "operator_matrices",
    "gauge_matrices",
    "dressed_logical",
    "dressed_logical_set",
    "dressed_pair",
    "DressedLogicalSet",
    "ValidationReport",
    "validate_logical_set",
    "commutation_sign",
    "q_operator",
    "two_local_strings",
    "reduce_to_two_local",
    "two_local_strings_bruteforce",
    "bare_two_locality_obstruction",
]


def _progression_bounds(m: int, l: int, i: int) -> int:
    """Largest j with i + 2*l*j <= m - 1 (number of extra progression steps)."""
    return (m - 1 - i) // (2 * l)


def operator_matrices(m: int, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (m-1) x m operator matrices (X, Z).

    Row i of X has 1-entries at columns i+1, i+1+2l, ... (up while <= m);
    row i of Z at columns i, i-2l, ... (down while >= 1).
    """
    TrapezoidParams(m, l)
    X = np.zeros((m - 1, m), dtype=np.uint8)
    Z = np.zeros((m - 1, m), dtype=np.uint8)
    for i in range(1, m):
        for j in range(0, (m - i - 1) // (2 * l) + 1):
            X[i - 1, i + 2 * l * j] = 1  # column i+1+2lj, 0-based
        for j in range(0, (i - 1) // (2 * l) + 1):
            Z[i - 1, i - 2 * l * j - 1] = 1
    return X, Z


def _dressed_positions(m: int, l: int, i: int, kind: str) -> tuple[tuple[int, int], tuple[int, int]]:
    """Matrix positions (row, col) of the two physical factors of a dressed
    logical: the superdiagonal qubit of row i plus a last-row (X) or
    first-column (Z) qubit."""
    if not 1 <= i <= m - 1:
        raise IndexError(f"logical index {i} outside [1, {m - 1}]")
    if kind == "X":
        q_i = i + 1 + 2 * l * ((m - i - 1) // (2 * l))
        return (i, i + 1), (m, q_i)
    if kind == "Z":
        qbar_i = i - 2 * l * ((i - 1) // (2 * l))
        return (i, i + 1), (qbar_i, 1)
    raise ValueError("kind must be 'X' or 'Z'")


def dressed_logical(code: SubsystemCode, i: int, kind: str) -> Pauli:
    """Weight-2 dressed logical operator for logical qubit i."""
    if code.trapezoid is None:
        raise ValueError("dressed logicals are defined for trapezoid codes")
    m, l = code.trapezoid.m, code.trapezoid.l
    a, b = _dressed_positions(m, l, i, kind)
    return Pauli.from_support(code.n, kind, [code.layout.qubit(*a), code.layout.qubit(*b)])


def gauge_matrices(code: SubsystemCode) -> tuple[np.ndarray, np.ndarray]:
    """(m-1) x m gauge matrices (Xbar, Zbar) that dress the bare logicals.

    Row i of Xbar selects the reversed row operators whose product with the
    bare X logical gives the weight-2 dressed operator; Zbar selects
    reversed column operators.  Derived by decomposing the support
    difference into full rows / columns; raises if that fails.
    """
    if code.trapezoid is None:
        raise ValueError("gauge matrices are defined for trapezoid codes")
    m, l = code.trapezoid.m, code.trapezoid.l
    X, Z = operator_matrices(m, l)
    Xbar = np.zeros((m - 1, m), dtype=np.uint8)
    Zbar = np.zeros((m - 1, m), dtype=np.uint8)
    for i in range(1, m):
        bare = code.x_type(X[i - 1])
        diff = bare * dressed_logical(code, i, "X")
        rows = {code.layout.positions[q][0] for q in diff.support()}
        for r in sorted(rows):
            Xbar[i - 1, r - 1] = 1
            diff = diff * code.reversed_row_operator(r)
        if not diff.is_identity():
            raise ValueError(f"X dressing of logical {i} is not a union of full rows")

        bare = code.z_type(Z[i - 1])
        diff = bare * dressed_logical(code, i, "Z")
        cols = {code.layout.positions[q][1] for q in diff.support()}
        for c in sorted(cols):
            Zbar[i - 1, c - 1] = 1
            diff = diff * code.reversed_column_operator(c)
        if not diff.is_identity():
            raise ValueError(f"Z dressing of logical {i} is not a union of full columns")
    return Xbar, Zbar


@dataclass(frozen=True)
class DressedLogicalSet:
    """The canonical weight-2 logical operators X^_i, Z^_i, i = 1..m-1."""

    code: SubsystemCode
    xhat: tuple[Pauli, ...]
    zhat: tuple[Pauli, ...]

    @property
    def k(self) -> int:
        return len(self.xhat)

    def to_json(self) -> dict:
        return {
            "xhat": [p.to_json() for p in self.xhat],
            "zhat": [p.to_json() for p in self.zhat],
        }


def dressed_logical_set(code: SubsystemCode) -> DressedLogicalSet:
    m = code.matrix.shape[0]
    return DressedLogicalSet(
        code=code,
        xhat=tuple(dressed_logical(code, i, "X") for i in range(1, m)),
        zhat=tuple(dressed_logical(code, i, "Z") for i in range(1, m)),
    )


def dressed_pair(code: SubsystemCode, i: int, j: int, kind: str) -> Pauli:
    """Weight-2 representative of X^_i X^_j (or Z^_i Z^_j) modulo gauge.

    The product of two dressed singles either is already weight-2 (their
    last-row / first-column factors coincide) or has weight 4 with the two
    extra factors in the same row / column, i.e. removable by one gauge
    element.  Either way the representative is the superdiagonal pair.
    """
    if i == j:
        raise ValueError("indices must differ")
    m = code.matrix.shape[0]
    a = code.layout.qubit(i, i + 1)
    b = code.layout.qubit(j, j + 1)
    rep = Pauli.from_support(code.n, kind, [a, b])
    prod = dressed_logical(code, i, kind) * dressed_logical(code, j, kind)
    residue = prod * rep
    if not residue.is_identity():
        line = {code.layout.positions[q][0 if kind == "X" else 1] for q in residue.support()}
        if len(line) != 1:
            raise AssertionError("pair residue is not a single same-row/column gauge element")
    return rep


@dataclass
class ValidationReport:
    """Outcome of the three dressed-logical checks, with failure details."""

    stabilizer_commutation: bool
    pairwise_symplectic: bool
    centralizer_not_gauge: bool
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.stabilizer_commutation and self.pairwise_symplectic and self.centralizer_not_gauge


def validate_logical_set(code: SubsystemCode, logicals: DressedLogicalSet) -> ValidationReport:
    """Check (a) commutation with both stabilizers, (b) the pairwise
    delta_ij anticommutation pattern, (c) membership in the centralizer of
    the stabilizer span but not in the gauge span."""
    fails: list[str] = []
    ops = list(logicals.xhat) + list(logicals.zhat)

    ok_a = True
    for name, p in _named(logicals):
        for sname, s in (("S_X", code.stabilizer_x), ("S_Z", code.stabilizer_z)):
            if not p.commutes_with(s):
                ok_a = False
                fails.append(f"{name} anticommutes with {sname}")

    ok_b = True
    k = logicals.k
    for i in range(k):
        for j in range(k):
            want = 1 if i == j else 0
            got = symplectic_product(logicals.xhat[i], logicals.zhat[j])
            if got != want:
                ok_b = False
                fails.append(f"sympl(X^_{i+1}, Z^_{j+1}) = {got}, want {want}")
        for j in range(i + 1, k):
            for fam, name in ((logicals.xhat, "X^"), (logicals.zhat, "Z^")):
                if symplectic_product(fam[i], fam[j]) != 0:
                    ok_b = False
                    fails.append(f"{name}_{i+1} and {name}_{j+1} anticommute")

    ok_c = True
    gauge = code.gauge_span()
    for name, p in _named(logicals):
        if gauge.contains(p):
            ok_c = False
            fails.append(f"{name} lies in the gauge span")
    stab = SymplecticSpan([code.stabilizer_x, code.stabilizer_z])
    for name, p in _named(logicals):
        if any(symplectic_product(p, Pauli(r[: code.n], r[code.n :])) for r in stab.basis):
            ok_c = False
            fails.append(f"{name} is outside the centralizer of the stabilizer span")

    return ValidationReport(ok_a, ok_b, ok_c, fails)


def _named(logicals: DressedLogicalSet):
    for i, p in enumerate(logicals.xhat, start=1):
        yield f"X^_{i}", p
    for i, p in enumerate(logicals.zhat, start=1):
        yield f"Z^_{i}", p


def q_operator(code: SubsystemCode, kind: str, bits, barbits) -> Pauli:
    """Gauge-multiplied X-type or Z-type operator.

    For kind 'X': product of column operators selected by ``bits`` times
    reversed row operators selected by ``barbits``; for kind 'Z': row
    operators times reversed column operators.
    """
    bits = f2.asbits(bits)
    barbits = f2.asbits(barbits)
    p = code.x_type(bits) if kind == "X" else code.z_type(bits)
    for idx, b in enumerate(barbits, start=1):
        if b:
            p = p * (code.reversed_row_operator(idx) if kind == "X" else code.reversed_column_operator(idx))
    return p


def commutation_sign(x, xbar, z, zbar, A) -> int:
    """Commutation parity of gauge-multiplied X- and Z-type operators:
    z^T A x + zbar^T A^T xbar over F2."""
    A = f2.asbits(A)
    x, xbar, z, zbar = (f2.asbits(v) for v in (x, xbar, z, zbar))
    m = A.shape[0]
    if any(v.size != m for v in (x, xbar, z, zbar)):
        raise ValueError("bitstring length must equal the matrix dimension")
    t1 = int(z @ (A @ x % 2) % 2)
    t2 = int(zbar @ (A.T @ xbar % 2) % 2)
    return t1 ^ t2


def two_local_strings(m: int, l: int, kind: str) -> set[str]:
    """All length-m bitstrings that parameterize weight-2 reducible logicals.

    Z-type strings come in two shapes: a single arithmetic progression with
    step 2l starting at any position <= m-1, or two interleaved progressions
    starting at distinct positions within the first 2l.  X-type strings are
    the index reversals of the Z-type strings.  The last (first) position is
    always 0 for Z (X), fixing the stabilizer-multiplication freedom.
    """
    TrapezoidParams(m, l)
    if kind not in ("X", "Z"):
        raise ValueError("kind must be 'X' or 'Z'")
    out: set[str] = set()
    step = 2 * l
    for i in range(1, m):
        for n_steps in range(_progression_bounds(m, l, i) + 1):
            v = np.zeros(m, dtype=np.uint8)
            v[[i - 1 + step * t for t in range(n_steps + 1)]] = 1
            out.add(f2.bits_to_str(v))
    for i, j in combinations(range(1, 2 * l + 1), 2):
        for ni in range(_progression_bounds(m, l, i) + 1):
            for nj in range(_progression_bounds(m, l, j) + 1):
                v = np.zeros(m, dtype=np.uint8)
                v[[i - 1 + step * t for t in range(ni + 1)]] = 1
                v[[j - 1 + step * t for t in range(nj + 1)]] = 1
                out.add(f2.bits_to_str(v))
    if kind == "X":
        out = {s[::-1] for s in out}
    return out


def _gauge_support_basis(code: SubsystemCode, kind: str) -> tuple[np.ndarray, list[int]]:
    gens = code.xgauges if kind == "X" else code.zgauges
    rows = np.array([(g.x if kind == "X" else g.z) for g in gens], dtype=np.uint8)
    return f2.row_reduce(rows)


def _coset_form(basis: np.ndarray, pivots: list[int], v: np.ndarray) -> np.ndarray:
    """Canonical representative of v modulo the row space of basis."""
    v = v.copy()
    for r, c in enumerate(pivots):
        if v[c]:
            v ^= basis[r]
    return v


def reduce_to_two_local(code: SubsystemCode, bitstring, kind: str) -> Pauli | None:
    """Gauge-reduce the operator of a bitstring to weight <= 2 if possible.

    Returns a weight-2 operator (or the identity for gauge-trivial input)
    whose support differs from the bare operator by an element of the gauge
    span; returns None when no such representative exists.  The search is
    exact: a support pair {a, b} works iff the coset forms of e_a and e_b
    XOR to the coset form of the bare support, found by hashing.
    """
    bitstring = f2.asbits(bitstring)
    if bitstring.size != code.matrix.shape[0]:
        raise ValueError("bitstring length must equal the matrix dimension")
    bare = code.x_type(bitstring) if kind == "X" else code.z_type(bitstring)
    supp = bare.x if kind == "X" else bare.z
    basis, pivots = _gauge_support_basis(code, kind)
    target = _coset_form(basis, pivots, supp)
    if not target.any():
        return Pauli.identity(code.n)
    unit = np.zeros(code.n, dtype=np.uint8)
    forms = []
    by_form: dict[bytes, list[int]] = {}
    for q in range(code.n):
        unit[:] = 0
        unit[q] = 1
        form = _coset_form(basis, pivots, unit)
        forms.append(form)
        by_form.setdefault(form.tobytes(), []).append(q)
    for a in range(code.n):
        need = (target ^ forms[a]).tobytes()
        for b in by_form.get(need, ()):
            if b != a:
                pair = (a + 1, b + 1) if a < b else (b + 1, a + 1)
                return Pauli.from_support(code.n, kind, pair)
    return None


def two_local_strings_bruteforce(code: SubsystemCode, kind: str) -> set[str]:
    """Oracle for ``two_local_strings``: scan all stabilizer-reduced
    bitstrings and keep those with an exact weight-2 gauge reduction."""
    m = code.matrix.shape[0]
    fixed = 0 if kind == "X" else m - 1  # stabilizer gauge-fixing position
    out = set()
    for r in range(1 << (m - 1)):
        v = np.zeros(m, dtype=np.uint8)
        free = [p for p in range(m) if p != fixed]
        for t, p in enumerate(free):
            v[p] = (r >> t) & 1
        if not v.any():
            continue
        red = reduce_to_two_local(code, v, kind)
        if red is not None and red.weight == 2:
            out.add(f2.bits_to_str(v))
    return out


def bare_two_locality_obstruction(m: int, l: int) -> bool:
    """True iff no fully 2-local bare logical set exists (the l < k case).

    A 2-local bare set would need weight-1 operator-matrix rows, i.e. an
    (m-1) x (m-1) submatrix of A that is a permutation matrix; test all
    single row/column deletions.
    """
    from .codes import build_trapezoid_matrix

    A = build_trapezoid_matrix(m, l)
    for r in range(m):
        rows = [i for i in range(m) if i != r]
        for c in range(m):
            cols = [j for j in range(m) if j != c]
            sub = A[np.ix_(rows, cols)]
            if (sub.sum(axis=0) == 1).all() and (sub.sum(axis=1) == 1).all():
                return False
    return True
