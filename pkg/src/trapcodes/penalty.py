"""Penalty Hamiltonians, reduced-basis spectra, and gap-scaling fits.

The penalty Hamiltonian is minus the sum of the canonical 2-local gauge
generators.  Its spectrum is computed two ways: directly on the n physical
qubits (matrix-free), and on n_g - 1 effective qubits after re-expressing
every gauge generator over an independent set of reduced operators.  The
stabilizers map to scalar sector labels (+/-1, +/-1) in the reduced picture,
so the union of the four sector spectra reproduces the full spectrum.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from math import ceil, log

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

try:
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    import numba

    @numba.njit("void(f8[:], f8[:], f8[:], f8[:], i8[:])", parallel=True, cache=True)
    def _fused_apply(diag, v, out, coeffs, xmasks):  # pragma: no cover - jitted
        for i in numba.prange(v.size):
            acc = diag[i] * v[i]
            for t in range(coeffs.size):
                acc += coeffs[t] * v[i ^ xmasks[t]]
            out[i] = acc

except Exception:  # numba unavailable: the numpy path below is used
    _fused_apply = None

from . import f2
from .codes import SubsystemCode, TrapezoidParams, trapezoid_code
from .f2 import Pauli, symplectic_product

__all__ = [
    "PauliSum",
    "SpectrumResult",
    "SolverError",
    "DimensionCapError",
    "lowest_eigenvalues",
    "build_penalty_full",
    "ReducedBasis",
    "build_penalty_reduced",
    "GapResult",
    "penalty_gap",
    "sweep_gaps",
    "sweep_to_csv",
    "alpha_coefficients",
    "ground_space",
    "LogicalTerm",
    "EncodedTerm",
    "encode_hamiltonian",
    "FitResult",
    "fit_gap_scaling",
    "DEGENERACY_TOL",
]

DEGENERACY_TOL = 1e-8

# Dimension above which dense diagonalization switches to Lanczos, and the
# default ceiling for any reduced-space diagonalization.  Both can be raised
# or lowered through environment variables.
DENSE_DIM_CAP = int(os.environ.get("TRAPCODES_DENSE_DIM_CAP", 4096))
REDUCED_DIM_CAP = int(os.environ.get("TRAPCODES_REDUCED_DIM_CAP", 2**20))
FULL_QUBIT_CAP = int(os.environ.get("TRAPCODES_FULL_QUBIT_CAP", 24))


class SolverError(RuntimeError):
    """Eigensolver failed to converge or to resolve the requested levels."""


class DimensionCapError(ValueError):
    """A requested diagonalization exceeds the configured dimension cap."""


class PauliSum:
    """Real linear combination of phase-free Pauli strings on n qubits.

    Terms are (coefficient, xmask, zmask) with integer bitmasks; qubit q
    (0-based) is bit q of the mask.  Strings with an odd number of Y factors
    would be anti-Hermitian with a real coefficient and are rejected.
    Matrix-vector products never materialize the matrix: Z-only terms are
    folded into a cached diagonal and X-type terms act as index-XOR
    gathers (fused into one jitted pass when numba is available).
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.terms: list[tuple[float, int, int]] = []
        self._diag: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return 1 << self.n

    def add(self, coeff: float, xmask: int = 0, zmask: int = 0) -> "PauliSum":
        if xmask >> self.n or zmask >> self.n:
            raise ValueError("mask exceeds qubit count")
        if (xmask & zmask).bit_count() % 2:
            raise ValueError("odd-Y Pauli strings are not supported")
        self.terms.append((float(coeff), int(xmask), int(zmask)))
        self._diag = None
        self._flips = None
        return self

    def add_pauli(self, coeff: float, p: Pauli) -> "PauliSum":
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        xm = int("".join(map(str, p.x[::-1])), 2) if p.x.any() else 0
        zm = int("".join(map(str, p.z[::-1])), 2) if p.z.any() else 0
        return self.add(coeff, xm, zm)

    # -- matrix-free application ------------------------------------------

    def _signs(self, zmask: int) -> np.ndarray:
        idx = np.arange(self.dim, dtype=np.uint64)
        par = np.bitwise_count(idx & np.uint64(zmask)).astype(np.int8) & 1
        return (1.0 - 2.0 * par).astype(np.float64)

    def diagonal(self) -> np.ndarray:
        """Sum of all X-free terms as a diagonal vector."""
        if self._diag is None:
            d = np.zeros(self.dim)
            for c, x, z in self.terms:
                if x == 0:
                    d += c * (self._signs(z) if z else np.full(self.dim, 1.0))
            self._diag = d
        return self._diag

    def _perm(self, xmask: int) -> np.ndarray:
        """Index permutation i -> i ^ xmask (cached per mask)."""
        cache = getattr(self, "_perm_cache", None)
        if cache is None:
            cache = self._perm_cache = {}
        if xmask not in cache:
            cache[xmask] = np.arange(self.dim, dtype=np.intp) ^ xmask
        return cache[xmask]

    def _flip_terms(self) -> tuple[np.ndarray, np.ndarray]:
        if getattr(self, "_flips", None) is None:
            plain = [(c, x) for c, x, z in self.terms if x and not z]
            self._flips = (
                np.array([c for c, _ in plain], dtype=np.float64),
                np.array([x for _, x in plain], dtype=np.int64),
            )
        return self._flips

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if v.size != self.dim:
            raise ValueError("vector length mismatch")
        if _fused_apply is not None:
            coeffs, xmasks = self._flip_terms()
            out = np.empty_like(v)
            _fused_apply(self.diagonal(), v, out, coeffs, xmasks)
            for c, x, z in self.terms:
                if x and z:
                    rp = -1.0 if (x & z).bit_count() % 4 else 1.0
                    out += (c * rp) * self._signs(z) * v[self._perm(x)]
            return out
        out = self.diagonal() * v
        for c, x, z in self.terms:
            if x == 0:
                continue
            if z == 0 and x.bit_count() == 1:
                # single bit flip: two contiguous block adds
                q = x.bit_length() - 1
                ov = out.reshape(-1, 2, 1 << q)
                vv = v.reshape(-1, 2, 1 << q)
                if c == 1.0:
                    ov[:, 0, :] += vv[:, 1, :]
                    ov[:, 1, :] += vv[:, 0, :]
                else:
                    ov[:, 0, :] += c * vv[:, 1, :]
                    ov[:, 1, :] += c * vv[:, 0, :]
                continue
            fv = v[self._perm(x)]
            if z == 0:
                if c == 1.0:
                    out += fv
                elif c == -1.0:
                    out -= fv
                else:
                    out += c * fv
            else:
                # phase of i^{|x&z|} with even overlap, times Z signs
                rp = -1.0 if (x & z).bit_count() % 4 else 1.0
                out += (c * rp) * self._signs(z) * fv
        return out

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=np.float64)

    def dense(self) -> np.ndarray:
        """Explicit matrix; refuses above the dense dimension cap."""
        if self.dim > DENSE_DIM_CAP:
            raise DimensionCapError(f"dense matrix of dimension {self.dim} exceeds cap {DENSE_DIM_CAP}")
        H = np.zeros((self.dim, self.dim))
        idx = np.arange(self.dim)
        for c, x, z in self.terms:
            signs = self._signs(z) if z else np.full(self.dim, 1.0)
            rp = -1.0 if (x & z).bit_count() % 4 else 1.0
            H[idx ^ x, idx] += c * rp * signs
        return H


@dataclass
class SpectrumResult:
    """Low-lying eigenvalues (ascending) and the first resolved gap."""

    eigenvalues: np.ndarray
    gap: float
    degeneracy_tolerance: float = DEGENERACY_TOL
    method: str = "dense"
    complete: bool = False


def _resolved_gap(values: np.ndarray, tol: float) -> float | None:
    e0 = values[0]
    above = values[values > e0 + tol]
    return float(above[0] - e0) if above.size else None


def _lanczos_lowest(H: PauliSum, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(H.dim)
    k = min(k, H.dim - 1)
    ncv = min(H.dim, max(2 * k + 1, 32))
    try:
        vals = eigsh(
            H.as_linear_operator(), k=k, which="SA", v0=v0, ncv=ncv, return_eigenvectors=False
        )
    except ArpackNoConvergence as exc:
        raise SolverError(f"Lanczos failed to converge for k={k}, dim={H.dim}") from exc
    return np.sort(vals)


def lowest_eigenvalues(H: PauliSum, r: int = 2, seed: int = 7) -> SpectrumResult:
    """The r lowest eigenvalues of H, growing r as needed to resolve the gap.

    Dense diagonalization below the dense cap, implicitly restarted Lanczos
    (ARPACK, deterministic seeded start) above it.
    """
    if r < 2:
        raise ValueError("need at least two eigenvalues")
    if H.dim <= DENSE_DIM_CAP:
        vals = np.linalg.eigvalsh(H.dense())
        gap = _resolved_gap(vals, DEGENERACY_TOL)
        if gap is None:
            raise SolverError("entire spectrum is degenerate within tolerance")
        return SpectrumResult(vals[:r] if r < vals.size else vals, gap, method="dense", complete=True)
    k = r
    while True:
        vals = _lanczos_lowest(H, k, seed)
        gap = _resolved_gap(vals, DEGENERACY_TOL)
        if gap is not None and k >= r:
            return SpectrumResult(vals[:r], gap, method="lanczos", complete=False)
        if k >= min(H.dim - 1, 1024):
            raise SolverError(f"could not resolve a gap within the lowest {k} eigenvalues")
        k = min(H.dim - 1, 2 * k)


# -- gauge selections and the full-space penalty Hamiltonian ----------------


def anchored_gauge_generators(code: SubsystemCode) -> tuple[tuple[Pauli, ...], tuple[Pauli, ...]]:
    """The anchored generating set used by the penalty Hamiltonian.

    Rows and columns holding exactly two qubits contribute the same pairs as
    the nearest-neighbor selection.  The long last row pairs its first qubit
    with every other (X side), and the long first column pairs the qubit in
    row (m-2 mod 2l)+1 with every other (Z side).  Spans agree with the
    nearest-neighbor selection but the penalty spectrum does not, and the
    anchored set is the one whose gaps follow the published scaling.
    """
    if code.trapezoid is None:
        raise ValueError("the anchored selection is defined for trapezoid codes")
    m, l = code.trapezoid.m, code.trapezoid.l
    lay, n = code.layout, code.n
    xg = []
    for r in range(1, m):
        xg.append(Pauli.from_support(n, "X", lay.row_qubits(r)))
    last = lay.row_qubits(m)
    xg += [Pauli.from_support(n, "X", (last[0], q)) for q in last[1:]]
    zg = []
    first = lay.col_qubits(1)
    anchor = first[((m - 2) % (2 * l))]
    zg += [Pauli.from_support(n, "Z", (anchor, q)) for q in first if q != anchor]
    for c in range(2, m + 1):
        col = lay.col_qubits(c)
        zg += [Pauli.from_support(n, "Z", (a, b)) for a, b in zip(col, col[1:])]
    return tuple(xg), tuple(zg)


def penalty_generators(
    code: SubsystemCode, selection: str = "anchored"
) -> tuple[tuple[Pauli, ...], tuple[Pauli, ...]]:
    """Gauge generating set entering H_P: 'anchored' (default) or 'nearest'."""
    if selection == "anchored":
        if code.trapezoid is None:
            return code.xgauges, code.zgauges
        return anchored_gauge_generators(code)
    if selection == "nearest":
        return code.xgauges, code.zgauges
    raise ValueError("selection must be 'anchored' or 'nearest'")


def build_penalty_full(code: SubsystemCode, selection: str = "anchored") -> PauliSum:
    """H_P = minus the sum of the selected gauge generators, on n qubits."""
    if code.n > FULL_QUBIT_CAP:
        raise DimensionCapError(f"{code.n} qubits exceeds the full-space cap {FULL_QUBIT_CAP}")
    xg, zg = penalty_generators(code, selection)
    H = PauliSum(code.n)
    for g in xg + zg:
        H.add_pauli(-1.0, g)
    return H


# -- reduced operator basis ------------------------------------------------


@dataclass
class ReducedBasis:
    """Re-expression of the gauge algebra on n_eff = n_g - 1 effective qubits.

    ``x_images[i]`` / ``z_images[i]`` give, for the i-th canonical X/Z gauge
    generator, its effective operator as (mask over effective qubits,
    stabilizer_flag); a set flag means the image is multiplied by the X or Z
    stabilizer, which acts as the scalar sector label.  ``xhat_gauge[j]``
    records which physical gauge realizes effective X_j, and
    ``zhat_combo[j]`` the gauge product realizing effective Z_j.
    """

    code: SubsystemCode
    n_eff: int
    xgauges: tuple[Pauli, ...]
    zgauges: tuple[Pauli, ...]
    x_images: list[tuple[int, bool]]
    z_images: list[tuple[int, bool]]
    xhat_gauge: list[int]
    zhat_combo: list[np.ndarray]
    dependent_x: int
    dependent_z: int
    selection: str = "anchored"

    @classmethod
    def from_code(cls, code: SubsystemCode, selection: str = "anchored") -> "ReducedBasis":
        xg, zg = (list(t) for t in penalty_generators(code, selection))
        n_g = len(xg)
        if len(zg) != n_g:
            raise ValueError("expected equally many X and Z gauge generators")
        n_eff = n_g - 1

        Gx = np.array([g.x for g in xg], dtype=np.uint8)  # supports, row per gauge
        Gz = np.array([g.z for g in zg], dtype=np.uint8)
        ones = np.ones(code.n, dtype=np.uint8)
        tx = f2.solve(Gx.T, ones)
        tz = f2.solve(Gz.T, ones)
        if tx is None or tz is None:
            raise ValueError("stabilizers are not products of the gauge generators")
        dep_x = int(np.nonzero(tx)[0][-1])
        dep_z = int(np.nonzero(tz)[0][-1])

        xhat_gauge = [i for i in range(n_g) if i != dep_x]
        pos_of = {g: j for j, g in enumerate(xhat_gauge)}

        # X images: independent generators act as single effective X's; the
        # dependent one is the stabilizer times the rest of its expansion.
        x_images: list[tuple[int, bool]] = [(0, False)] * n_g
        for i in xhat_gauge:
            x_images[i] = (1 << pos_of[i], False)
        dep_mask = 0
        for t in np.nonzero(tx)[0]:
            if t != dep_x:
                dep_mask ^= 1 << pos_of[int(t)]
        x_images[dep_x] = (dep_mask, True)

        # Effective Z_j: a product of Z gauges that anticommutes with the
        # j-th effective X and commutes with the others.  Excluding the
        # dependent Z gauge makes the solution unique.
        P = np.zeros((n_g, n_g), dtype=np.uint8)
        for i in range(n_g):
            for t in range(n_g):
                P[i, t] = symplectic_product(xg[i], zg[t])
        keep = [t for t in range(n_g) if t != dep_z]
        zhat_combo: list[np.ndarray] = []
        for j, i_j in enumerate(xhat_gauge):
            b = np.zeros(n_g, dtype=np.uint8)
            b[i_j] = 1
            b[dep_x] = tx[i_j]  # consistency with the dependent X expansion
            u = f2.solve(P[:, keep], b)
            if u is None:
                raise ValueError("reduced Z basis solve failed")
            full = np.zeros(n_g, dtype=np.uint8)
            full[keep] = u
            zhat_combo.append(full)

        # Expand each Z gauge over {Z^_1..Z^_neff, S_Z}.
        B = np.array(zhat_combo + [tz], dtype=np.uint8).T  # n_g x n_g
        z_images: list[tuple[int, bool]] = []
        for t in range(n_g):
            e = np.zeros(n_g, dtype=np.uint8)
            e[t] = 1
            c = f2.solve(B, e)
            if c is None:
                raise ValueError("Z gauge does not decompose over the reduced basis")
            mask = 0
            for j in np.nonzero(c[:n_eff])[0]:
                mask ^= 1 << int(j)
            z_images.append((mask, bool(c[n_eff])))

        rb = cls(
            code=code,
            n_eff=n_eff,
            xgauges=tuple(xg),
            zgauges=tuple(zg),
            x_images=x_images,
            z_images=z_images,
            xhat_gauge=xhat_gauge,
            zhat_combo=zhat_combo,
            dependent_x=dep_x,
            dependent_z=dep_z,
            selection=selection,
        )
        rb._verify()
        return rb

    def _verify(self) -> None:
        """Commutation parities of all images must match the physical gauges,
        and expanding the Z^ defining combos over the images must round-trip
        to single effective Z's."""
        xg, zg = self.xgauges, self.zgauges
        for i in range(len(xg)):
            for t in range(len(zg)):
                phys = symplectic_product(xg[i], zg[t])
                eff = (self.x_images[i][0] & self.z_images[t][0]).bit_count() & 1
                if phys != eff:
                    raise AssertionError(f"image commutation mismatch at x[{i}], z[{t}]")
        for j, combo in enumerate(self.zhat_combo):
            mask, flag = 0, False
            for t in np.nonzero(combo)[0]:
                m, fl = self.z_images[int(t)]
                mask ^= m
                flag ^= fl
            if mask != (1 << j) or flag:
                raise AssertionError(f"round-trip failed for effective Z_{j + 1}")

    def x_image_of(self, p: Pauli) -> tuple[int, bool]:
        """Effective image of an X-type element of the gauge span."""
        Gx = np.array([g.x for g in self.xgauges], dtype=np.uint8)
        c = f2.solve(Gx.T, p.x)
        if p.z.any() or c is None:
            raise ValueError("operator is not in the X-type gauge span")
        mask, flag = 0, False
        for t in np.nonzero(c)[0]:
            m, fl = self.x_images[int(t)]
            mask ^= m
            flag ^= fl
        return mask, flag

    def z_image_of(self, p: Pauli) -> tuple[int, bool]:
        """Effective image of a Z-type element of the gauge span."""
        Gz = np.array([g.z for g in self.zgauges], dtype=np.uint8)
        c = f2.solve(Gz.T, p.z)
        if p.x.any() or c is None:
            raise ValueError("operator is not in the Z-type gauge span")
        mask, flag = 0, False
        for t in np.nonzero(c)[0]:
            m, fl = self.z_images[int(t)]
            mask ^= m
            flag ^= fl
        return mask, flag


def build_penalty_reduced(
    code_or_params,
    sector: tuple[int, int] = (1, 1),
    basis: ReducedBasis | None = None,
    selection: str = "anchored",
) -> PauliSum:
    """Penalty Hamiltonian on n_g - 1 effective qubits for one stabilizer
    sector (s_x, s_z), each label +1 or -1."""
    code = _as_code(code_or_params)
    sx, sz = sector
    if sx not in (1, -1) or sz not in (1, -1):
        raise ValueError("sector labels must be +1 or -1")
    rb = basis or ReducedBasis.from_code(code, selection)
    H = PauliSum(rb.n_eff)
    for mask, flag in rb.x_images:
        H.add(-1.0 * (sx if flag else 1), xmask=mask)
    for mask, flag in rb.z_images:
        H.add(-1.0 * (sz if flag else 1), zmask=mask)
    return H


def _as_code(code_or_params) -> SubsystemCode:
    if isinstance(code_or_params, SubsystemCode):
        return code_or_params
    if isinstance(code_or_params, TrapezoidParams):
        return trapezoid_code(code_or_params.m, code_or_params.l)
    m, l = code_or_params
    return trapezoid_code(m, l)


# -- the penalty gap --------------------------------------------------------


@dataclass
class GapResult:
    gap: float
    e0: float
    n: int
    n_g: int
    dim_reduced: int
    method: str
    mode: str
    cross_checked: bool = False


SECTORS = ((1, 1), (1, -1), (-1, 1), (-1, -1))

# Below this dimension a full dense solve is cheaper than Lanczos; above it
# the gap search asks for a few lowest levels only.
_GAP_DENSE_DIM = 1024


def _union_gap(hams: list[PauliSum], seed: int) -> tuple[float, float, str]:
    """Ground energy and first resolved gap of the union of several spectra."""
    methods = set()
    lows: list[np.ndarray] = []
    complete: list[bool] = []
    for s, H in enumerate(hams):
        if H.dim <= _GAP_DENSE_DIM:
            lows.append(np.linalg.eigvalsh(H.dense()))
            complete.append(True)
            methods.add("dense")
        else:
            lows.append(_lanczos_lowest(H, 8, seed + s))
            complete.append(False)
            methods.add("lanczos")
    while True:
        merged = np.sort(np.concatenate(lows))
        gap = _resolved_gap(merged, DEGENERACY_TOL)
        e0 = float(merged[0])
        if gap is not None:
            e1 = e0 + gap
            # A truncated sector can only hide levels above its largest
            # returned value; grow any sector that might conceal a smaller gap.
            unsafe = [
                s
                for s in range(len(hams))
                if not complete[s] and lows[s][-1] < e1 - DEGENERACY_TOL
            ]
            if not unsafe:
                return gap, e0, "+".join(sorted(methods))
        else:
            unsafe = [s for s in range(len(hams)) if not complete[s]]
            if not unsafe:
                raise SolverError("all sector spectra are degenerate within tolerance")
        for s in unsafe:
            k = min(hams[s].dim - 1, max(2 * lows[s].size, 16))
            if lows[s].size >= min(hams[s].dim - 1, 1024):
                raise SolverError("gap resolution required too many eigenvalues")
            lows[s] = _lanczos_lowest(hams[s], k, seed + s)


def penalty_gap(
    m: int,
    l: int,
    mode: str = "full_spectrum",
    seed: int = 7,
    cross_check: bool = True,
    basis: ReducedBasis | None = None,
    selection: str = "anchored",
) -> GapResult:
    """Penalty gap of the (m, l) trapezoid code via the reduced basis.

    ``full_spectrum`` (default) resolves the gap over the union of all four
    stabilizer sectors, which reproduces the spectrum on the physical
    qubits; ``ground_sector`` restricts to the (+1, +1) sector.  When the
    code is small (n <= 14) and cross_check is set, the full-space spectrum
    is computed as well and must agree to 1e-7.
    """
    code = _as_code((m, l))
    rb = basis or ReducedBasis.from_code(code, selection)
    dim_red = 1 << rb.n_eff
    if dim_red > REDUCED_DIM_CAP:
        raise DimensionCapError(
            f"reduced dimension 2^{rb.n_eff} exceeds cap {REDUCED_DIM_CAP}"
        )
    if mode == "full_spectrum":
        hams = [build_penalty_reduced(code, s, rb) for s in SECTORS]
        gap, e0, method = _union_gap(hams, seed)
    elif mode == "ground_sector":
        gap, e0, method = _union_gap([build_penalty_reduced(code, (1, 1), rb)], seed)
    else:
        raise ValueError("mode must be 'full_spectrum' or 'ground_sector'")

    checked = False
    if cross_check and code.n <= 14 and mode == "full_spectrum":
        full_gap, full_e0 = penalty_gap_full(code, seed=seed, selection=rb.selection)
        if abs(full_gap - gap) > 1e-7 or abs(full_e0 - e0) > 1e-7:
            raise AssertionError(
                f"reduced gap {gap} (E0 {e0}) disagrees with full-space "
                f"gap {full_gap} (E0 {full_e0}) for (m={m}, l={l})"
            )
        checked = True
    return GapResult(
        gap=gap,
        e0=e0,
        n=code.n,
        n_g=code.n_gauge_generators,
        dim_reduced=dim_red,
        method=f"reduced-{method}",
        mode=mode,
        cross_checked=checked,
    )


def penalty_gap_full(code: SubsystemCode, seed: int = 7, selection: str = "anchored") -> tuple[float, float]:
    """Ground energy and gap straight from the n-qubit penalty Hamiltonian."""
    H = build_penalty_full(code, selection)
    gap, e0, _ = _union_gap([H], seed)
    return gap, e0


# -- gap sweeps -------------------------------------------------------------


@dataclass
class SweepRow:
    m: int
    l: int
    n: int
    n_g: int
    dim_reduced: int
    gap: float | None
    method: str
    error: str = ""


def sweep_gaps(
    m_values, l_rule, mode: str = "full_spectrum", seed: int = 7, selection: str = "anchored"
) -> list[SweepRow]:
    """Penalty gaps over a range of m.

    ``l_rule`` is an integer (fixed l), the string 'k' (l = k), or a string
    'k-<d>' for l = k - d; m values where the rule gives an invalid l are
    skipped.  Per-point failures are recorded in the row's error column.
    """
    rows: list[SweepRow] = []
    for m in m_values:
        l = _apply_l_rule(l_rule, m)
        if l is None or not 1 <= l <= ceil((m - 1) / 2):
            continue
        tp = TrapezoidParams(m, l)
        n = tp.expected_params().n
        n_g = m - 2 + 2 * l
        try:
            res = penalty_gap(m, l, mode=mode, seed=seed, selection=selection)
            rows.append(SweepRow(m, l, n, n_g, res.dim_reduced, res.gap, res.method))
        except (DimensionCapError, SolverError) as exc:
            rows.append(SweepRow(m, l, n, n_g, 1 << (n_g - 1), None, "", str(exc)))
    rows.sort(key=lambda r: (r.l, r.m))
    return rows


def _apply_l_rule(l_rule, m: int) -> int | None:
    if isinstance(l_rule, int):
        return l_rule
    if l_rule == "k":
        return m // 2
    if isinstance(l_rule, str) and l_rule.startswith("k-"):
        return m // 2 - int(l_rule[2:])
    raise ValueError(f"unknown l rule: {l_rule!r}")


def sweep_to_csv(rows: list[SweepRow], meta: dict | None = None) -> str:
    """Deterministic CSV with a metadata comment header."""
    lines = []
    for key, val in (meta or {}).items():
        lines.append(f"# {key}={val}")
    lines.append("m,l,n,n_g,dim_reduced,gap,method,error")
    for r in rows:
        gap = "" if r.gap is None else f"{r.gap:.12g}"
        lines.append(f"{r.m},{r.l},{r.n},{r.n_g},{r.dim_reduced},{gap},{r.method},{r.error}")
    return "\n".join(lines) + "\n"


# -- ground space and alpha coefficients ------------------------------------


def ground_space(H: PauliSum, seed: int = 7) -> np.ndarray:
    """Orthonormal basis (columns) of the ground eigenspace of H."""
    if H.dim <= DENSE_DIM_CAP:
        vals, vecs = np.linalg.eigh(H.dense())
    else:
        rng = np.random.default_rng(seed)
        k = 8
        while True:
            try:
                vals, vecs = eigsh(
                    H.as_linear_operator(), k=k, which="SA", v0=rng.standard_normal(H.dim)
                )
            except ArpackNoConvergence as exc:
                raise SolverError("ground space Lanczos did not converge") from exc
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
            if vals[-1] > vals[0] + DEGENERACY_TOL:
                break
            if k >= min(H.dim - 1, 256):
                raise SolverError("ground degeneracy exceeds solver limit")
            k *= 2
    keep = vals <= vals[0] + DEGENERACY_TOL
    return vecs[:, keep]


def _masked_pauli_matrix_on(V: np.ndarray, H_n: int, xmask: int, zmask: int) -> np.ndarray:
    """V^dagger P V for a single effective Pauli string."""
    P = PauliSum(H_n)
    P.add(1.0, xmask, zmask)
    PV = np.column_stack([P.matvec(V[:, j]) for j in range(V.shape[1])])
    return V.T @ PV


def alpha_coefficients(
    code: SubsystemCode,
    operators: dict[str, Pauli] | None = None,
    seed: int = 7,
    tol: float = 1e-7,
) -> dict[str, float]:
    """Ground-space expectation alpha with Pi_0 P Pi_0 = alpha Pi_0.

    Operators must be elements of the gauge span (X-type or Z-type); the
    default set is every canonical gauge generator.  A proportionality
    violation beyond tolerance signals an eigensolver or basis bug and
    raises.
    """
    rb = ReducedBasis.from_code(code)
    H = build_penalty_reduced(code, (1, 1), rb)
    V = ground_space(H, seed=seed)
    if operators is None:
        operators = {f"gx{i + 1}": g for i, g in enumerate(code.xgauges)}
        operators.update({f"gz{i + 1}": g for i, g in enumerate(code.zgauges)})
    out: dict[str, float] = {}
    for name, p in operators.items():
        if p.is_identity():
            out[name] = 1.0
            continue
        if not p.z.any():
            mask, _flag = rb.x_image_of(p)
            xm, zm = mask, 0
        elif not p.x.any():
            mask, _flag = rb.z_image_of(p)
            xm, zm = 0, mask
        else:
            raise ValueError(f"{name}: mixed-type operators are outside the gauge span")
        A = _masked_pauli_matrix_on(V, rb.n_eff, xm, zm)
        alpha = float(np.trace(A)) / A.shape[0]
        if np.max(np.abs(A - alpha * np.eye(A.shape[0]))) > tol:
            raise SolverError(f"{name}: ground projection is not proportional to the identity")
        out[name] = alpha
    return out


# -- encoding a logical Hamiltonian -----------------------------------------


@dataclass(frozen=True)
class LogicalTerm:
    """One term of a logical Hamiltonian: family 'x', 'z', 'xx' or 'zz',
    logical qubit indices, and a real coefficient."""

    family: str
    indices: tuple[int, ...]
    coefficient: float


@dataclass
class EncodedTerm:
    family: str
    indices: tuple[int, ...]
    qubits: tuple[int, int]
    coefficient: float
    alpha: float | None
    rescaled: float | None
    error: str = ""


def encode_hamiltonian(code: SubsystemCode, terms: list[LogicalTerm], seed: int = 7) -> list[EncodedTerm]:
    """Map logical X/Z/XX/ZZ terms to weight-2 physical terms with rescaled
    coefficients.

    Each logical term becomes its dressed 2-local representative; the
    coefficient is divided by the ground-space alpha of the gauge factor
    relating the bare operator to that representative.  Terms whose alpha
    vanishes are flagged rather than raised.
    """
    from .logicals import dressed_logical, dressed_pair, operator_matrices

    if code.trapezoid is None:
        raise ValueError("encoding is defined for trapezoid codes")
    if not terms:
        return []
    m, l = code.trapezoid.m, code.trapezoid.l
    X, Z = operator_matrices(m, l)
    rb = ReducedBasis.from_code(code)
    H = build_penalty_reduced(code, (1, 1), rb)
    V = ground_space(H, seed=seed)

    out: list[EncodedTerm] = []
    for t in terms:
        fam = t.family.lower()
        kind = "X" if fam in ("x", "xx") else "Z"
        mat = X if kind == "X" else Z
        idx = t.indices
        if any(not 1 <= i <= m - 1 for i in idx):
            raise ValueError(f"logical index outside [1, {m - 1}]: {idx}")
        if fam in ("x", "z"):
            (i,) = idx
            rep = dressed_logical(code, i, kind)
            bare = code.x_type(mat[i - 1]) if kind == "X" else code.z_type(mat[i - 1])
        elif fam in ("xx", "zz"):
            i, j = idx
            rep = dressed_pair(code, i, j, kind)
            bits = mat[i - 1] ^ mat[j - 1]
            bare = code.x_type(bits) if kind == "X" else code.z_type(bits)
        else:
            raise ValueError(f"unknown term family {t.family!r}")
        factor = bare * rep
        if factor.is_identity():
            alpha = 1.0
        else:
            mask, _ = rb.x_image_of(factor) if kind == "X" else rb.z_image_of(factor)
            A = _masked_pauli_matrix_on(V, rb.n_eff, mask if kind == "X" else 0, 0 if kind == "X" else mask)
            alpha = float(np.trace(A)) / A.shape[0]
            if np.max(np.abs(A - alpha * np.eye(A.shape[0]))) > 1e-7:
                raise SolverError("gauge factor projection is not proportional to the identity")
        qubits = rep.support()
        if abs(alpha) < 1e-12:
            out.append(EncodedTerm(fam, idx, qubits, t.coefficient, 0.0, None, "alpha is zero"))
        else:
            out.append(EncodedTerm(fam, idx, qubits, t.coefficient, alpha, t.coefficient / alpha))
    return out


# -- scaling fits ------------------------------------------------------------


@dataclass
class FitResult:
    model: str
    a: float
    nu: float
    se_a: float
    se_nu: float
    aic: float
    r2: float
    n_points: int

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "a": self.a,
            "nu": self.nu,
            "se_a": self.se_a,
            "se_nu": self.se_nu,
            "AIC": self.aic,
            "R2": self.r2,
            "n_points": self.n_points,
        }


def _log_space_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Closed-form regression of log y on t; returns (a, nu, se_a, se_nu)."""
    w = np.log(y)
    N = y.size
    M = np.column_stack([np.ones(N), -t])
    coef, *_ = np.linalg.lstsq(M, w, rcond=None)
    ln_a, nu = coef
    resid = w - M @ coef
    s2 = float(resid @ resid) / max(N - 2, 1)
    cov = s2 * np.linalg.inv(M.T @ M)
    se_ln_a, se_nu = np.sqrt(np.diag(cov))
    a = float(np.exp(ln_a))
    return a, float(nu), a * float(se_ln_a), float(se_nu)


def fit_gap_scaling(points: list[tuple[float, float]], model: str, method: str = "nls") -> FitResult:
    """Fit y = a x^-nu ('power') or y = a e^-nu*x ('expo') to gap data.

    The default 'nls' method minimizes original-scale squared residuals
    (Levenberg-Marquardt seeded by the closed-form log-space line, so it is
    deterministic); 'log' keeps the plain log-space line.  AIC
    (N ln(RSS/N) + 2p with p = 2) and R^2 always use original-scale
    residuals, so model comparisons are on a common footing.
    """
    if model not in ("power", "expo"):
        raise ValueError("model must be 'power' or 'expo'")
    if method not in ("nls", "log"):
        raise ValueError("method must be 'nls' or 'log'")
    if len(points) < 3:
        raise ValueError("need at least three points")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.any(y <= 0):
        raise ValueError("gaps must be positive")
    t = np.log(x) if model == "power" else x
    if np.ptp(t) == 0:
        raise ValueError("degenerate x values")
    a, nu, se_a, se_nu = _log_space_fit(t, y)
    if method == "nls":
        from scipy.optimize import curve_fit

        f = (lambda x, a, nu: a * x ** (-nu)) if model == "power" else (
            lambda x, a, nu: a * np.exp(-nu * x)
        )
        pars, cov = curve_fit(f, x, y, p0=[a, nu], maxfev=20000)
        a, nu = float(pars[0]), float(pars[1])
        se_a, se_nu = (float(v) for v in np.sqrt(np.diag(cov)))
    N = len(points)
    yhat = a * np.exp(-nu * t)
    rss = float(np.sum((y - yhat) ** 2))
    tss = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    aic = N * log(max(rss, 1e-300) / N) + 2 * 2
    return FitResult(model, a, nu, se_a, se_nu, aic, r2, N)


def preferred_model(points: list[tuple[float, float]], method: str = "nls") -> tuple[FitResult, FitResult, str]:
    """Fit both models; the lower AIC wins."""
    fp = fit_gap_scaling(points, "power", method)
    fe = fit_gap_scaling(points, "expo", method)
    return fp, fe, ("power" if fp.aic <= fe.aic else "expo")
