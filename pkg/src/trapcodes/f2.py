"""Exact linear algebra over F2 and phase-free Pauli arithmetic.

Binary vectors and matrices are plain numpy ``uint8`` arrays with entries in
{0, 1}.  Pauli operators are stored in symplectic form as a pair of binary
vectors (x | z); global phases are dropped throughout, which is sufficient
for everything built on top (commutation parities and supports never depend
on signs).  Qubit indices in the public interface are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "asbits",
    "bits_from_str",
    "bits_to_str",
    "row_reduce",
    "rank",
    "kernel",
    "left_kernel",
    "solve",
    "min_rowspace_weight",
    "min_colspace_weight",
    "Pauli",
    "symplectic_product",
    "SymplecticSpan",
]

# Exhaustive weight enumeration walks 2^rows combinations; refuse above this.
ENUMERATION_CAP = 24


class EnumerationCapError(ValueError):
    """Raised when an exhaustive weight enumeration would exceed 2^24 steps."""


def asbits(a) -> np.ndarray:
    """Coerce to a uint8 array and check entries are bits."""
    arr = np.asarray(a, dtype=np.uint8)
    if arr.size and arr.max() > 1:
        raise ValueError("entries must be 0 or 1")
    return arr


def bits_from_str(s: str) -> np.ndarray:
    """Parse a bitstring like '0101' into a binary vector."""
    if set(s) - {"0", "1"}:
        raise ValueError(f"not a bitstring: {s!r}")
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")


def bits_to_str(v: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(v).ravel())


def row_reduce(M) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F2.

    Returns the reduced matrix with zero rows dropped and the list of pivot
    columns (0-based), so rank(M) == len(pivots).
    """
    R = asbits(M).copy()
    if R.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.nonzero(R[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            R[[r, p]] = R[[p, r]]
        elim = np.nonzero(R[:, c])[0]
        elim = elim[elim != r]
        R[elim] ^= R[r]
        pivots.append(c)
        r += 1
    return R[: len(pivots)], pivots


def rank(M) -> int:
    """F2 rank via Gaussian elimination."""
    return len(row_reduce(M)[1])


def kernel(M) -> list[np.ndarray]:
    """Basis of the right null space {v : M v = 0} over F2."""
    R, pivots = row_reduce(M)
    cols = asbits(M).shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for r, p in enumerate(pivots):
            v[p] = R[r, f]
        basis.append(v)
    return basis


def left_kernel(M) -> list[np.ndarray]:
    """Basis of {v : v M = 0} over F2."""
    return kernel(asbits(M).T)


def solve(M, b) -> np.ndarray | None:
    """One solution x of M x = b over F2, or None if inconsistent."""
    M = asbits(M)
    b = asbits(b).ravel()
    if M.shape[0] != b.size:
        raise ValueError("shape mismatch")
    aug = np.concatenate([M, b[:, None]], axis=1)
    R, pivots = row_reduce(aug)
    if M.shape[1] in pivots:
        return None
    x = np.zeros(M.shape[1], dtype=np.uint8)
    for r, p in enumerate(pivots):
        x[p] = R[r, -1]
    return x


def _min_span_weight(rows: np.ndarray) -> int:
    """Minimum Hamming weight over nonzero combinations of the given rows.

    Uses the row-reduced basis (so 2^rank, not 2^rows, combinations) and a
    Gray-code walk with arbitrary-precision integer bitmasks.
    """
    basis, _ = row_reduce(rows)
    r = basis.shape[0]
    if r == 0:
        raise ValueError("matrix has empty row space")
    if r > ENUMERATION_CAP:
        raise EnumerationCapError(
            f"enumeration over 2^{r} combinations exceeds the 2^{ENUMERATION_CAP} cap"
        )
    masks = [int("".join(map(str, row)), 2) for row in basis]
    best = min(m.bit_count() for m in masks)
    acc = 0
    prev = 0
    for i in range(1, 1 << r):
        g = i ^ (i >> 1)
        acc ^= masks[(g ^ prev).bit_length() - 1]
        prev = g
        w = acc.bit_count()
        if 0 < w < best:
            best = w
    return best


def min_rowspace_weight(M) -> int:
    """Minimum Hamming weight of a nonzero vector in the F2 row space of M."""
    return _min_span_weight(asbits(M))


def min_colspace_weight(M) -> int:
    """Minimum Hamming weight of a nonzero vector in the F2 column space of M."""
    return _min_span_weight(asbits(M).T)


@dataclass(frozen=True)
class Pauli:
    """Phase-free n-qubit Pauli operator in symplectic (x | z) form.

    ``x[i] = 1`` means the operator acts as X on qubit i+1, ``z[i] = 1`` as
    Z, both set means Y support.  Products are componentwise XOR, so every
    operator squares to the identity.
    """

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = asbits(self.x)
        z = asbits(self.z)
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z parts must be 1-D and of equal length")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def identity(cls, n: int) -> "Pauli":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_support(cls, n: int, kind: str, qubits: Iterable[int]) -> "Pauli":
        """Build an all-X or all-Z operator supported on 1-based qubits."""
        v = np.zeros(n, dtype=np.uint8)
        for q in qubits:
            if not 1 <= q <= n:
                raise ValueError(f"qubit index {q} outside [1, {n}]")
            v[q - 1] ^= 1
        zero = np.zeros(n, dtype=np.uint8)
        if kind == "X":
            return cls(v, zero)
        if kind == "Z":
            return cls(zero, v)
        raise ValueError("kind must be 'X' or 'Z'")

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def support(self) -> tuple[int, ...]:
        """1-based qubit indices the operator acts on."""
        return tuple(int(i) + 1 for i in np.nonzero(self.x | self.z)[0])

    def is_identity(self) -> bool:
        return self.weight == 0

    def __mul__(self, other: "Pauli") -> "Pauli":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        return Pauli(self.x ^ other.x, self.z ^ other.z)

    def commutes_with(self, other: "Pauli") -> bool:
        return symplectic_product(self, other) == 0

    def symplectic(self) -> np.ndarray:
        """Concatenated (x | z) row vector of length 2n."""
        return np.concatenate([self.x, self.z])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Pauli)
            and self.n == other.n
            and bool(np.array_equal(self.x, other.x))
            and bool(np.array_equal(self.z, other.z))
        )

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes()))

    def __str__(self) -> str:
        if self.is_identity():
            return "I"
        parts = []
        for i in range(self.n):
            xi, zi = self.x[i], self.z[i]
            if xi or zi:
                parts.append(("Y" if xi and zi else "X" if xi else "Z") + str(i + 1))
        return "*".join(parts)

    def to_json(self) -> dict:
        return {"x": bits_to_str(self.x), "z": bits_to_str(self.z)}

    @classmethod
    def from_json(cls, d: dict) -> "Pauli":
        return cls(bits_from_str(d["x"]), bits_from_str(d["z"]))


def symplectic_product(p: Pauli, q: Pauli) -> int:
    """0 if p and q commute, 1 if they anticommute."""
    if p.n != q.n:
        raise ValueError("qubit count mismatch")
    return int(np.bitwise_xor.reduce(p.x & q.z) ^ np.bitwise_xor.reduce(p.z & q.x))


class SymplecticSpan:
    """F2 span of a set of Pauli operators (modulo phases).

    Membership and equality are computed on the row-reduced (x | z)
    encoding, so they do not depend on the order or redundancy of the
    generating set.
    """

    def __init__(self, generators: Sequence[Pauli]):
        if not generators:
            raise ValueError("need at least one generator")
        n = generators[0].n
        if any(g.n != n for g in generators):
            raise ValueError("generators act on different qubit counts")
        self.n = n
        self.generators = list(generators)
        rows = np.array([g.symplectic() for g in generators], dtype=np.uint8)
        self.basis, self._pivots = row_reduce(rows)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def contains(self, p: Pauli) -> bool:
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        v = p.symplectic().copy()
        for r, c in enumerate(self._pivots):
            if v[c]:
                v ^= self.basis[r]
        return not v.any()

    def __contains__(self, p: Pauli) -> bool:
        return self.contains(p)

    def coordinates(self, p: Pauli) -> np.ndarray | None:
        """Expansion of p over the original generators, or None if outside."""
        rows = np.array([g.symplectic() for g in self.generators], dtype=np.uint8)
        return solve(rows.T, p.symplectic())

    def span_equal(self, other: "SymplecticSpan") -> bool:
        if self.n != other.n or self.dim != other.dim:
            return False
        return all(other.contains(Pauli(r[: self.n], r[self.n :])) for r in self.basis)
