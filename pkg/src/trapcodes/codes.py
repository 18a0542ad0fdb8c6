"""Trapezoid-family subsystem codes built from square binary matrices.

A square binary matrix defines a subsystem code: 1-entries are physical
qubits, same-row pairs contribute XX gauge generators, same-column pairs
contribute ZZ gauge generators.  The trapezoid family is the two-parameter
(m, l) sub-family whose matrices have a full first-column leg, a full
last-row leg (both of length 2l), a superdiagonal, and a lower diagonal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil
from typing import Sequence

import numpy as np

from . import f2
from .f2 import Pauli, SymplecticSpan

__all__ = [
    "TrapezoidParams",
    "QubitLayout",
    "CodeParams",
    "SubsystemCode",
    "build_trapezoid_matrix",
    "code_params",
    "trapezoid_code",
    "generic_code",
    "permute_matrix",
    "permutation_preserves_gauge_span",
]


@dataclass(frozen=True)
class TrapezoidParams:
    """Matrix size m >= 3 and leg parameter 1 <= l <= ceil((m-1)/2)."""

    m: int
    l: int

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"m must be >= 3, got {self.m}")
        lmax = ceil((self.m - 1) / 2)
        if not 1 <= self.l <= lmax:
            raise ValueError(f"l must be in [1, {lmax}] for m={self.m}, got {self.l}")

    @property
    def k(self) -> int:
        """Family index: m = 2k+1 (odd m) or m = 2k (even m)."""
        return self.m // 2

    @property
    def odd(self) -> bool:
        return self.m % 2 == 1

    def expected_params(self) -> "CodeParams":
        """Closed-form [[n, k, g, d]] labels for the family."""
        k, l = self.k, self.l
        if self.odd:
            return CodeParams(4 * k + 2 * l, 2 * k, 2 * k + 2 * l - 2, 2)
        return CodeParams(4 * k + 2 * l - 2, 2 * k - 1, 2 * k + 2 * l - 3, 2)


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    g: int
    d: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n, self.k, self.g, self.d)

    def __str__(self) -> str:
        return f"[[{self.n},{self.k},{self.g},{self.d}]]"


class QubitLayout:
    """Row-major numbering of the 1-entries of a square binary matrix.

    Qubit q sits at ``positions[q]`` = (row, col), all 1-based; qubits are
    numbered 1..n scanning left-to-right, top-to-bottom.
    """

    def __init__(self, A: np.ndarray):
        A = f2.asbits(A)
        self.shape = A.shape
        self.positions: dict[int, tuple[int, int]] = {}
        self.index_of: dict[tuple[int, int], int] = {}
        q = 0
        for r in range(A.shape[0]):
            for c in range(A.shape[1]):
                if A[r, c]:
                    q += 1
                    self.positions[q] = (r + 1, c + 1)
                    self.index_of[(r + 1, c + 1)] = q
        self.n = q

    def qubit(self, row: int, col: int) -> int:
        try:
            return self.index_of[(row, col)]
        except KeyError:
            raise KeyError(f"no qubit at matrix position ({row}, {col})") from None

    def row_qubits(self, row: int) -> list[int]:
        return [q for q, (r, _) in self.positions.items() if r == row]

    def col_qubits(self, col: int) -> list[int]:
        return [q for q, (_, c) in self.positions.items() if c == col]


def build_trapezoid_matrix(m: int, l: int) -> np.ndarray:
    """The m x m trapezoid matrix: first column and last row carry legs of
    length 2l, plus the superdiagonal and the lower diagonal."""
    p = TrapezoidParams(m, l)
    A = np.zeros((m, m), dtype=np.uint8)
    A[: 2 * l, 0] = 1
    A[m - 1, m - 2 * l :] = 1
    for i in range(1, m):
        A[i - 1, i] = 1
    for i in range(2 * l + 1, m):
        A[i - 1, i - 2 * l] = 1
    return A


def code_params(A) -> CodeParams:
    """[[n, k, g, d]] of the subsystem code defined by a square binary matrix.

    n = number of 1-entries, k = rank(A), d = min over row/column space
    weights, and g = n - k - s where s is the number of independent
    stabilizers (nullity(A) + nullity(A^T)).
    """
    A = f2.asbits(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("the code matrix must be square")
    n = int(A.sum())
    k = f2.rank(A)
    s = (A.shape[1] - k) + (A.shape[0] - k)
    d = min(f2.min_rowspace_weight(A), f2.min_colspace_weight(A))
    return CodeParams(n, k, n - k - s, d)


def _adjacent_pairs(qubits: Sequence[int]) -> list[tuple[int, int]]:
    return [(qubits[i], qubits[i + 1]) for i in range(len(qubits) - 1)]


@dataclass(frozen=True)
class SubsystemCode:
    """A code matrix together with its layout, parameters, canonical gauge
    generators, and the two stabilizers.

    The canonical gauge selection is nearest-neighbor: adjacent qubit pairs
    within each row (XX) and within each column (ZZ), scanning left-to-right
    and top-to-bottom.  This yields n - m generators of each type, which for
    a trapezoid matrix equals n_g = m - 2 + 2l.
    """

    matrix: np.ndarray
    layout: QubitLayout
    params: CodeParams
    xgauges: tuple[Pauli, ...]
    zgauges: tuple[Pauli, ...]
    stabilizer_x: Pauli
    stabilizer_z: Pauli
    trapezoid: TrapezoidParams | None = None

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def n_gauge_generators(self) -> int:
        """Canonical generator count per type (n_g = m - 2 + 2l for trapezoids)."""
        return len(self.xgauges)

    def gauge_span(self) -> SymplecticSpan:
        return SymplecticSpan(list(self.xgauges) + list(self.zgauges))

    def all_gauge_pairs(self) -> tuple[list[Pauli], list[Pauli]]:
        """Every same-row XX pair and same-column ZZ pair (not just the
        canonical nearest-neighbor generators)."""
        m = self.matrix.shape[0]
        xs, zs = [], []
        for r in range(1, m + 1):
            row = self.layout.row_qubits(r)
            xs += [Pauli.from_support(self.n, "X", (a, b)) for i, a in enumerate(row) for b in row[i + 1 :]]
        for c in range(1, m + 1):
            col = self.layout.col_qubits(c)
            zs += [Pauli.from_support(self.n, "Z", (a, b)) for i, a in enumerate(col) for b in col[i + 1 :]]
        return xs, zs

    def row_operator(self, i: int) -> Pauli:
        """Z on every qubit of row i."""
        return Pauli.from_support(self.n, "Z", self._line_qubits("row", i))

    def column_operator(self, j: int) -> Pauli:
        """X on every qubit of column j."""
        return Pauli.from_support(self.n, "X", self._line_qubits("col", j))

    def reversed_row_operator(self, i: int) -> Pauli:
        """X on every qubit of row i (row operator with X and Z exchanged)."""
        return Pauli.from_support(self.n, "X", self._line_qubits("row", i))

    def reversed_column_operator(self, j: int) -> Pauli:
        """Z on every qubit of column j."""
        return Pauli.from_support(self.n, "Z", self._line_qubits("col", j))

    def _line_qubits(self, kind: str, idx: int) -> list[int]:
        m = self.matrix.shape[0]
        if not 1 <= idx <= m:
            raise IndexError(f"index {idx} outside [1, {m}]")
        return self.layout.row_qubits(idx) if kind == "row" else self.layout.col_qubits(idx)

    def x_type(self, colbits) -> Pauli:
        """Product of column operators selected by a length-m bitstring."""
        p = Pauli.identity(self.n)
        for j, b in enumerate(f2.asbits(colbits), start=1):
            if b:
                p = p * self.column_operator(j)
        return p

    def z_type(self, rowbits) -> Pauli:
        """Product of row operators selected by a length-m bitstring."""
        p = Pauli.identity(self.n)
        for i, b in enumerate(f2.asbits(rowbits), start=1):
            if b:
                p = p * self.row_operator(i)
        return p

    def validate(self) -> None:
        """Construction-time invariants; raises ValueError on any failure."""
        A, p = self.matrix, self.params
        if p.n != self.layout.n:
            raise ValueError("layout and parameter qubit counts disagree")
        for g in self.xgauges + self.zgauges:
            if g.weight != 2:
                raise ValueError(f"gauge generator {g} is not weight-2")
        span = self.gauge_span()
        for s in (self.stabilizer_x, self.stabilizer_z):
            if not span.contains(s):
                raise ValueError("stabilizer outside the gauge span")
            if any(not s.commutes_with(g) for g in self.xgauges + self.zgauges):
                raise ValueError("stabilizer fails to commute with a gauge generator")
        xs, zs = self.all_gauge_pairs()
        if not span.span_equal(SymplecticSpan(xs + zs)):
            raise ValueError("canonical generators do not span all same-row/column pairs")
        if self.trapezoid is not None:
            tp = self.trapezoid
            if p != tp.expected_params():
                raise ValueError(
                    f"computed {p} disagrees with closed form {tp.expected_params()}"
                )
            if self.n_gauge_generators != tp.m - 2 + 2 * tp.l:
                raise ValueError("canonical gauge generator count is not m - 2 + 2l")

    def to_json(self) -> dict:
        d: dict = {}
        if self.trapezoid is not None:
            d["m"] = self.trapezoid.m
            d["l"] = self.trapezoid.l
        d["A"] = [f2.bits_to_str(row) for row in self.matrix]
        d["layout"] = {str(q): list(pos) for q, pos in self.layout.positions.items()}
        d["params"] = list(self.params.as_tuple())
        d["xgauges"] = [g.to_json() for g in self.xgauges]
        d["zgauges"] = [g.to_json() for g in self.zgauges]
        d["stabilizers"] = {
            "sx": self.stabilizer_x.to_json(),
            "sz": self.stabilizer_z.to_json(),
        }
        return d

    @classmethod
    def from_json(cls, d: dict) -> "SubsystemCode":
        A = np.array([f2.bits_from_str(row) for row in d["A"]], dtype=np.uint8)
        if "m" in d:
            return trapezoid_code(d["m"], d["l"])
        return generic_code(A)

    def dump_json(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)


def _build_code(A: np.ndarray, trapezoid: TrapezoidParams | None) -> SubsystemCode:
    layout = QubitLayout(A)
    params = code_params(A)
    n = params.n
    xg, zg = [], []
    for r in range(1, A.shape[0] + 1):
        for a, b in _adjacent_pairs(layout.row_qubits(r)):
            xg.append(Pauli.from_support(n, "X", (a, b)))
    for c in range(1, A.shape[1] + 1):
        for a, b in _adjacent_pairs(layout.col_qubits(c)):
            zg.append(Pauli.from_support(n, "Z", (a, b)))
    code = SubsystemCode(
        matrix=A,
        layout=layout,
        params=params,
        xgauges=tuple(xg),
        zgauges=tuple(zg),
        stabilizer_x=Pauli.from_support(n, "X", range(1, n + 1)),
        stabilizer_z=Pauli.from_support(n, "Z", range(1, n + 1)),
        trapezoid=trapezoid,
    )
    code.matrix.flags.writeable = False
    return code


def trapezoid_code(m: int, l: int, validate: bool = True) -> SubsystemCode:
    """Construct the (m, l) trapezoid code with canonical gauges and stabilizers."""
    tp = TrapezoidParams(m, l)
    code = _build_code(build_trapezoid_matrix(m, l), tp)
    if validate:
        code.validate()
    return code


def generic_code(A, validate: bool = True) -> SubsystemCode:
    """Construct the subsystem code of an arbitrary square binary matrix.

    The all-X / all-Z stabilizer pair requires every row and column weight to
    be even; matrices violating that are rejected (the trapezoid family and
    its permutations always qualify).
    """
    A = f2.asbits(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("the code matrix must be square")
    if any(int(w) % 2 for w in A.sum(axis=1)) or any(int(w) % 2 for w in A.sum(axis=0)):
        raise ValueError("all-X/all-Z stabilizers need even row and column weights")
    code = _build_code(A, None)
    if validate:
        code.validate()
    return code


def permute_matrix(A, rowperm: Sequence[int], colperm: Sequence[int]) -> np.ndarray:
    """Apply row and column permutations to a square matrix.

    ``rowperm[i] = j`` sends row i+1 of A to row j of the result (1-based),
    matching the 'permuting rows (1,..,m) into (j1,..,jm)' convention.
    """
    A = f2.asbits(A)
    m = A.shape[0]
    for perm in (rowperm, colperm):
        if sorted(perm) != list(range(1, m + 1)):
            raise ValueError(f"not a permutation of 1..{m}: {perm}")
    out = np.zeros_like(A)
    for i in range(m):
        for j in range(m):
            out[rowperm[i] - 1, colperm[j] - 1] = A[i, j]
    return out


def permutation_preserves_gauge_span(A, rowperm: Sequence[int], colperm: Sequence[int]) -> bool:
    """Check that permuting rows/columns leaves the gauge span invariant.

    Qubits are tracked through the permutation: the qubit at matrix position
    (r, c) becomes the qubit at (rowperm[r], colperm[c]).  The canonical
    generators of the permuted matrix, relabeled back to the original qubit
    numbering, must span the same group.
    """
    code = generic_code(A, validate=False)
    B = permute_matrix(A, rowperm, colperm)
    permuted = generic_code(B, validate=False)
    back = {
        permuted.layout.qubit(rowperm[r - 1], colperm[c - 1]): q
        for q, (r, c) in code.layout.positions.items()
    }

    def relabel(p: Pauli) -> Pauli:
        out = Pauli.identity(code.n)
        for q in p.support():
            kind = "X" if p.x[q - 1] else "Z"
            out = out * Pauli.from_support(code.n, kind, [back[q]])
        return out

    relabeled = [relabel(g) for g in permuted.xgauges + permuted.zgauges]
    return code.gauge_span().span_equal(SymplecticSpan(relabeled))
