"""Dense complex linear algebra over composite Hilbert spaces.

States and operators carry a :class:`HilbertSpace` describing the subsystem
structure.  Basis ordering is row-major in label order: the first subsystem is
most significant, so ``|a,b,c>`` in dims ``(d1,d2,d3)`` sits at index
``(a*d2 + b)*d3 + c``.

Units: energies in GHz, times in ns, phases in radians.  Propagators are
``exp(-i 2 pi H t)`` so that a 1 GHz splitting completes a phase cycle in 1 ns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

HERMITICITY_ATOL = 1e-9
TRACE_ATOL = 1e-9
NORM_ATOL = 1e-9
EIGENVALUE_FLOOR = -1e-7
UNITARITY_ATOL = 1e-8


class NumericsError(ValueError):
    """A numerical invariant (hermiticity, trace, norm, unitarity) was violated."""


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor factorization of a composite space.

    dims: per-subsystem dimension (each >= 2); labels: unique subsystem names.
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must have equal length")
        if any(d < 2 for d in self.dims):
            raise ValueError("every subsystem dimension must be >= 2")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate subsystem labels: {self.labels}")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}") from None

    def basis_index(self, levels) -> int:
        """Row-major basis index of the product state with the given levels."""
        if len(levels) != len(self.dims):
            raise ValueError("need one level per subsystem")
        idx = 0
        for lev, d in zip(levels, self.dims):
            if not 0 <= lev < d:
                raise ValueError(f"level {lev} out of range for dimension {d}")
            idx = idx * d + lev
        return idx

    def basis_levels(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`basis_index`."""
        levels = []
        for d in reversed(self.dims):
            levels.append(index % d)
            index //= d
        return tuple(reversed(levels))


def qubit_space(n: int, prefix: str = "Q") -> HilbertSpace:
    return HilbertSpace((2,) * n, tuple(f"{prefix}{i + 1}" for i in range(n)))


@dataclass(frozen=True)
class Ket:
    """Normalized pure state on ``space``."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape[0] != self.space.dim:
            raise ValueError(
                f"amplitude length {amp.shape[0]} != space dimension {self.space.dim}"
            )
        norm = np.linalg.norm(amp)
        if norm < 1e-12:
            raise ValueError("cannot normalize a zero vector")
        if abs(norm - 1.0) > NORM_ATOL:
            amp = amp / norm
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def basis(cls, space: HilbertSpace, levels) -> "Ket":
        amp = np.zeros(space.dim, dtype=complex)
        amp[space.basis_index(levels)] = 1.0
        return cls(space, amp)

    def overlap(self, other: "Ket") -> complex:
        _check_same_space(self.space, other.space)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class Operator:
    """Matrix on ``space``; ``hermitian_flag`` is a validated hint."""

    space: HilbertSpace
    matrix: np.ndarray
    hermitian_flag: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        if self.hermitian_flag:
            dev = np.max(np.abs(mat - mat.conj().T))
            if dev > HERMITICITY_ATOL:
                raise NumericsError(f"hermitian_flag set but |M - M^dag|_max = {dev:.3e}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, space: HilbertSpace) -> "Operator":
        return cls(space, np.eye(space.dim), hermitian_flag=True)

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _check_same_space(self.space, other.space)
            return Operator(self.space, self.matrix @ other.matrix)
        if isinstance(other, Ket):
            _check_same_space(self.space, other.space)
            return Ket(self.space, self.matrix @ other.amplitudes)
        return NotImplemented


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, (numerically) positive matrix on ``space``."""

    space: HilbertSpace
    matrix: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != ({d}, {d})")
        if self.validate:
            herm = np.max(np.abs(mat - mat.conj().T))
            if herm > HERMITICITY_ATOL:
                raise NumericsError(f"density matrix not Hermitian: {herm:.3e}")
            tr = mat.trace()
            if abs(tr - 1.0) > TRACE_ATOL:
                raise NumericsError(f"density matrix trace {tr:.12f} != 1")
            lo = np.linalg.eigvalsh(mat).min()
            if lo < EIGENVALUE_FLOOR:
                raise NumericsError(f"density matrix eigenvalue {lo:.3e} below floor")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def _check_same_space(a: HilbertSpace, b: HilbertSpace):
    if a.dims != b.dims or a.labels != b.labels:
        raise ValueError(f"space mismatch: {a.labels}{a.dims} vs {b.labels}{b.dims}")


def _single_qubit_factor_space(space: HilbertSpace, label: str) -> int:
    return space.index(label)


def tensor(space: HilbertSpace, factors: dict):
    """Embed single-subsystem factors into ``space`` in label order.

    ``factors`` maps a subsystem label to either a 1-D amplitude vector (kets)
    or a square matrix (operators) of that subsystem's dimension.  All factors
    must be of one kind.  Operators get identity filled on omitted subsystems
    and return an :class:`Operator`; kets must cover every subsystem and
    return a :class:`Ket`.
    """
    if not factors:
        raise ValueError("no factors given")
    seen = set()
    for label in factors:
        if label in seen:
            raise ValueError(f"duplicate subsystem {label!r}")
        seen.add(label)
        space.index(label)

    arrays = {lab: np.asarray(f, dtype=complex) for lab, f in factors.items()}
    kinds = {arr.ndim for arr in arrays.values()}
    if kinds == {1}:
        if set(factors) != set(space.labels):
            missing = set(space.labels) - set(factors)
            raise ValueError(f"ket tensor must cover all subsystems; missing {missing}")
        parts = []
        for lab, d in zip(space.labels, space.dims):
            vec = arrays[lab]
            if vec.shape != (d,):
                raise ValueError(f"factor on {lab!r} has length {vec.shape[0]}, expected {d}")
            parts.append(vec)
        return Ket(space, reduce(np.kron, parts))
    if kinds == {2}:
        parts = []
        for lab, d in zip(space.labels, space.dims):
            if lab in arrays:
                mat = arrays[lab]
                if mat.shape != (d, d):
                    raise ValueError(f"factor on {lab!r} has shape {mat.shape}, expected ({d},{d})")
                parts.append(mat)
            else:
                parts.append(np.eye(d))
        return Operator(space, reduce(np.kron, parts))
    raise ValueError("factors must be all vectors or all matrices")


def embed(space: HilbertSpace, label: str, mat: np.ndarray) -> np.ndarray:
    """Raw-ndarray embedding of a single-subsystem matrix (identity elsewhere)."""
    k = space.index(label)
    parts = [
        np.asarray(mat, dtype=complex) if i == k else np.eye(d)
        for i, d in enumerate(space.dims)
    ]
    return reduce(np.kron, parts)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every subsystem not in ``keep`` (labels keep their original order)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must be nonempty")
    keep_idx = sorted(rho.space.index(lab) for lab in keep)

    n = len(rho.space.dims)
    dims = rho.space.dims
    tensor_form = rho.matrix.reshape(dims + dims)
    # contract row/column indices of each traced subsystem
    traced = tensor_form
    removed = 0
    for i in range(n):
        if i in keep_idx:
            continue
        ax = i - removed
        traced = np.trace(traced, axis1=ax, axis2=ax + (n - removed))
        removed += 1
    d_keep = int(np.prod([dims[i] for i in keep_idx]))
    out = traced.reshape(d_keep, d_keep)
    sub_space = HilbertSpace(
        tuple(dims[i] for i in keep_idx), tuple(rho.space.labels[i] for i in keep_idx)
    )
    out = 0.5 * (out + out.conj().T)  # scrub rounding-level asymmetry
    return DensityMatrix(sub_space, out)


def propagator(h: Operator, t_ns: float) -> Operator:
    """Unitary ``exp(-i 2 pi H t)`` for Hermitian ``H`` (GHz), via eigendecomposition."""
    if t_ns < 0:
        raise ValueError("t must be >= 0")
    herm = np.max(np.abs(h.matrix - h.matrix.conj().T))
    if herm > HERMITICITY_ATOL:
        raise NumericsError(f"propagator needs Hermitian H; |H - H^dag|_max = {herm:.3e}")
    evals, vecs = np.linalg.eigh(h.matrix)
    u = (vecs * np.exp(-2j * np.pi * evals * t_ns)) @ vecs.conj().T
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > UNITARITY_ATOL:
        raise NumericsError(f"propagator not unitary to tolerance: {dev:.3e}")
    return Operator(h.space, u)


def state_fidelity(rho: DensityMatrix, target: Ket) -> float:
    """``<psi|rho|psi>`` for a pure target."""
    _check_same_space(rho.space, target.space)
    val = np.vdot(target.amplitudes, rho.matrix @ target.amplitudes)
    if abs(val.imag) > 1e-10:
        raise NumericsError(f"fidelity has imaginary part {val.imag:.3e}")
    return float(val.real)


def expectation(rho: DensityMatrix, a: Operator) -> float:
    """``Tr(rho A)`` for Hermitian ``A``; the sub-1e-9 imaginary part is discarded."""
    _check_same_space(rho.space, a.space)
    herm = np.max(np.abs(a.matrix - a.matrix.conj().T))
    if herm > HERMITICITY_ATOL:
        raise NumericsError(f"expectation needs Hermitian A; deviation {herm:.3e}")
    val = np.trace(rho.matrix @ a.matrix)
    if abs(val.imag) > 1e-9:
        raise NumericsError(f"expectation imaginary part {val.imag:.3e} too large")
    return float(val.real)
