"""Plain and feature-masked kernels, Q(beta) matrices and polynomial homogenization."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .dataset import Dataset
from .errors import DomainError

POLY = "poly"
GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    gamma: float = 0.1
    c: float = 0.0
    degree: int = 2

    def __post_init__(self):
        if self.kind not in (POLY, GAUSSIAN):
            raise DomainError(f"kernel kind must be {POLY!r} or {GAUSSIAN!r}, got {self.kind!r}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        if self.kind == POLY:
            if not self.c >= 0:
                raise DomainError(f"c must be nonnegative, got {self.c}")
            if int(self.degree) != self.degree or self.degree < 1:
                raise DomainError(f"degree must be an integer >= 1, got {self.degree}")
            object.__setattr__(self, "degree", int(self.degree))

    @classmethod
    def polynomial(cls, degree: int, gamma: float = 0.1, c: float = 0.0) -> "KernelSpec":
        return cls(POLY, gamma, c, degree)

    @classmethod
    def gaussian(cls, gamma: float = 0.1) -> "KernelSpec":
        return cls(GAUSSIAN, gamma)

    @property
    def is_polynomial(self) -> bool:
        return self.kind == POLY

    def describe(self) -> str:
        if self.is_polynomial:
            return f"poly(d={self.degree},gamma={self.gamma:g},c={self.c:g})"
        return f"gaussian(gamma={self.gamma:g})"


@dataclass(frozen=True, order=False)
class FeatureMask:
    """Binary selection over ``n`` features, stored as its sorted support."""

    n: int
    support: tuple[int, ...]

    def __post_init__(self):
        sup = tuple(sorted(int(j) for j in self.support))
        if len(set(sup)) != len(sup):
            raise DomainError("duplicate index in mask support")
        if sup and (sup[0] < 0 or sup[-1] >= self.n):
            raise DomainError(f"mask index out of range for n={self.n}")
        object.__setattr__(self, "support", sup)

    @classmethod
    def from_bits(cls, bits: Iterable) -> "FeatureMask":
        bits = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if not np.all((bits == 0) | (bits == 1)):
            raise DomainError("mask bits must be 0 or 1")
        return cls(bits.size, tuple(np.flatnonzero(bits).tolist()))

    @classmethod
    def full(cls, n: int) -> "FeatureMask":
        return cls(n, tuple(range(n)))

    @classmethod
    def random(cls, n: int, cardinality: int, rng: np.random.Generator) -> "FeatureMask":
        if not 0 <= cardinality <= n:
            raise DomainError(f"cardinality {cardinality} outside [0, {n}]")
        return cls(n, tuple(rng.choice(n, cardinality, replace=False).tolist()))

    @property
    def cardinality(self) -> int:
        return len(self.support)

    @property
    def bits(self) -> np.ndarray:
        b = np.zeros(self.n, dtype=np.int8)
        b[list(self.support)] = 1
        return b

    @property
    def complement(self) -> tuple[int, ...]:
        chosen = set(self.support)
        return tuple(j for j in range(self.n) if j not in chosen)

    @property
    def fingerprint(self) -> int:
        """Stable 64-bit hash of (n, sorted support)."""
        payload = f"{self.n}:" + ",".join(map(str, self.support))
        return int.from_bytes(hashlib.blake2b(payload.encode(), digest_size=8).digest(), "little")

    def sort_key(self) -> tuple[int, ...]:
        """Lexicographic key on the bit vector, used for deterministic tie-breaks."""
        return tuple(self.bits.tolist())

    def swap(self, drop: Iterable[int], add: Iterable[int]) -> "FeatureMask":
        s = set(self.support)
        s.difference_update(drop)
        s.update(add)
        return FeatureMask(self.n, tuple(s))

    def swap_distance(self, other: "FeatureMask") -> int:
        return len(set(self.support) - set(other.support))

    def __str__(self) -> str:
        return "".join(map(str, self.bits.tolist()))


@dataclass(frozen=True)
class QMatrix:
    entries: np.ndarray
    mask_fingerprint: int


def _check_pair(x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape or x.ndim != 1:
        raise DomainError(f"dimension mismatch: {x.shape} vs {z.shape}")
    return x, z


def _kernel_from_parts(spec: KernelSpec, inner: float, sqdist: float) -> float:
    if spec.is_polynomial:
        return (spec.gamma * inner + spec.c) ** spec.degree
    return math.exp(-spec.gamma * sqdist)


def kernel_eval(spec: KernelSpec, x, z) -> float:
    x, z = _check_pair(x, z)
    if spec.is_polynomial:
        return _kernel_from_parts(spec, float(np.dot(x, z)), 0.0)
    diff = x - z
    return _kernel_from_parts(spec, 0.0, float(np.dot(diff, diff)))


def masked_kernel_eval(spec: KernelSpec, mask: FeatureMask, x, z) -> float:
    x, z = _check_pair(x, z)
    if mask.n != x.size:
        raise DomainError(f"mask length {mask.n} does not match vector length {x.size}")
    idx = list(mask.support)
    xs, zs = x[idx], z[idx]
    if spec.is_polynomial:
        return _kernel_from_parts(spec, float(np.dot(xs, zs)), 0.0)
    diff = xs - zs
    return _kernel_from_parts(spec, 0.0, float(np.dot(diff, diff)))


def _symmetrize(k: np.ndarray) -> np.ndarray:
    upper = np.triu(k)
    return upper + np.triu(k, 1).T


def gram_on_columns(x: np.ndarray, spec: KernelSpec, cols) -> np.ndarray:
    """Kernel matrix of the rows of ``x`` restricted to ``cols``; exactly symmetric."""
    xs = x[:, list(cols)]
    if spec.is_polynomial:
        k = (spec.gamma * (xs @ xs.T) + spec.c) ** spec.degree
    else:
        sq = np.einsum("ij,ij->i", xs, xs)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (xs @ xs.T)
        np.maximum(d2, 0.0, out=d2)
        np.fill_diagonal(d2, 0.0)
        k = np.exp(-spec.gamma * d2)
    return _symmetrize(k)


def cross_kernel(xa: np.ndarray, xb: np.ndarray, spec: KernelSpec, cols) -> np.ndarray:
    """Kernel values between rows of ``xa`` and rows of ``xb`` on ``cols``."""
    a = xa[:, list(cols)]
    b = xb[:, list(cols)]
    if spec.is_polynomial:
        return (spec.gamma * (a @ b.T) + spec.c) ** spec.degree
    d2 = (np.einsum("ij,ij->i", a, a)[:, None] + np.einsum("ij,ij->i", b, b)[None, :]
          - 2.0 * (a @ b.T))
    return np.exp(-spec.gamma * np.maximum(d2, 0.0))


def build_q(d: Dataset, spec: KernelSpec, mask: FeatureMask) -> QMatrix:
    if mask.n != d.n:
        raise DomainError(f"mask length {mask.n} does not match n={d.n}")
    k = gram_on_columns(d.features, spec, mask.support)
    y = d.labels
    q = _symmetrize(k * np.outer(y, y))
    q.setflags(write=False)
    return QMatrix(q, mask.fingerprint)


def homogenize(d: Dataset, spec: KernelSpec) -> tuple[Dataset, KernelSpec]:
    """Fold the polynomial offset ``c`` into a constant leading feature sqrt(c/gamma).

    Feature ``j`` of ``d`` becomes feature ``j + 1`` of the returned dataset.
    """
    if not spec.is_polynomial:
        raise DomainError("homogenization applies to polynomial kernels only")
    if not spec.c > 0:
        raise DomainError("homogenization needs c > 0")
    const = math.sqrt(spec.c / spec.gamma)
    x = np.hstack([np.full((d.m, 1), const), d.features])
    out = replace(d, features=x, feature_names=("const",) + d.feature_names)
    return out, replace(spec, c=0.0)
