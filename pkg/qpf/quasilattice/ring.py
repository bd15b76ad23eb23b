# Copyright 2025 qpf authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Exact arithmetic in the cyclotomic integers behind a 2q-fold quasilattice.

Wave vectors are stored by their coordinates in the power basis
``{ζ^i : 0 <= i < φ(2q)}`` of ``Q(ζ)``, ``ζ = exp(iπ/q)``. Squared norms live in
``Z[ω]`` with ``ω = 2cos(π/q)`` and are represented by :class:`RingElement`,
coefficient vectors in the basis ``{ω^i : 0 <= i < d}`` where ``d`` is the
degree of the minimal polynomial of ``ω``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols, totient

from qpf.exceptions import InvalidOrderError

_X = symbols("x")
_Y = symbols("y")


def _check_order(q) -> int:
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise InvalidOrderError(f"Rotation order must be an integer, got {q!r}.")
    if q < 4:
        raise InvalidOrderError(f"Rotation order q must be at least 4, got {q}.")
    return int(q)


def _chebyshev_sums(count: int) -> List[Poly]:
    """``C_k(y)`` with ``C_k(x + 1/x) = x^k + x^-k`` for ``k < count``."""
    sums = [Poly(2, _Y), Poly(_Y, _Y)]
    while len(sums) < count:
        sums.append(Poly(_Y, _Y) * sums[-1] - sums[-2])
    return sums[:count]


@lru_cache(maxsize=None)
def minimal_polynomial(q: int) -> Tuple[int, ...]:
    """
    Minimal polynomial of ``ω = 2cos(π/q)`` over the integers.

    Derived from the palindromic cyclotomic polynomial ``Φ_{2q}``: with
    ``Φ_{2q}(x) = x^D P(x + 1/x)`` the polynomial ``P`` is monic of degree
    ``D = φ(2q)/2``. Coefficients are returned highest degree first, so
    ``q = 4`` gives ``(1, 0, -2)``.
    """
    q = _check_order(q)
    phi = Poly(cyclotomic_poly(2 * q, _X), _X).all_coeffs()[::-1]
    half = (len(phi) - 1) // 2
    sums = _chebyshev_sums(half + 1)
    result = Poly(int(phi[half]), _Y)
    for k in range(1, half + 1):
        result = result + int(phi[half + k]) * sums[k]
    return tuple(int(c) for c in result.all_coeffs())


def _reduce_mod(coeffs: Sequence[int], modulus_low: Sequence[int]) -> List[int]:
    """Remainder of an integer polynomial (low degree first) by a monic one."""
    degree = len(modulus_low) - 1
    work = [int(c) for c in coeffs]
    for top in range(len(work) - 1, degree - 1, -1):
        lead = work[top]
        if lead:
            shift = top - degree
            for i, m in enumerate(modulus_low):
                work[shift + i] -= lead * int(m)
    work = work[:degree] + [0] * max(0, degree - len(work))
    return work


@dataclass(frozen=True)
class CyclotomicData:
    """Per-q tables shared by every atlas of that order."""

    q: int
    dim: int
    degree: int
    omega: float
    min_poly: Tuple[int, ...]
    generators: np.ndarray
    generator_words: np.ndarray
    rotation: np.ndarray
    basis_embed: np.ndarray
    chebyshev: np.ndarray
    conjugate_points: np.ndarray = field(repr=False)


@lru_cache(maxsize=None)
def cyclotomic_data(q: int) -> CyclotomicData:
    """Build (and cache) the power-basis tables for order ``q``."""
    q = _check_order(q)
    dim = int(totient(2 * q))
    degree = dim // 2
    phi = Poly(cyclotomic_poly(2 * q, _X), _X)

    def power_coords(n: int) -> List[int]:
        rem = Poly(_X**n, _X).rem(phi).all_coeffs()[::-1]
        return [int(c) for c in rem] + [0] * (dim - len(rem))

    generators = np.array([power_coords(j) for j in range(2 * q)], dtype=np.int64)
    words = np.zeros((2 * q, q), dtype=np.int64)
    for j in range(q):
        words[j, j] = 1
        words[j + q, j] = -1
    rotation = np.array([power_coords(i + 1) for i in range(dim)], dtype=np.int64)
    angles = np.arange(dim) * math.pi / q
    basis_embed = np.column_stack([np.cos(angles), np.sin(angles)])

    min_poly = minimal_polynomial(q)
    modulus_low = list(min_poly[::-1])
    chebyshev = np.zeros((dim, degree), dtype=np.int64)
    chebyshev[0, 0] = 1
    for d, poly in enumerate(_chebyshev_sums(dim)[1:], start=1):
        low = [int(c) for c in poly.all_coeffs()[::-1]]
        chebyshev[d] = _reduce_mod(low, modulus_low)

    coprime = [m for m in range(1, q) if math.gcd(m, 2 * q) == 1]
    conjugate_points = np.array([2.0 * math.cos(m * math.pi / q) for m in coprime])
    return CyclotomicData(
        q=q,
        dim=dim,
        degree=degree,
        omega=2.0 * math.cos(math.pi / q),
        min_poly=min_poly,
        generators=generators,
        generator_words=words,
        rotation=rotation,
        basis_embed=basis_embed,
        chebyshev=chebyshev,
        conjugate_points=conjugate_points,
    )


def norm2_coefficients(canon: np.ndarray, q: int) -> np.ndarray:
    """
    Exact ``|k|^2`` in ``Z[ω]`` for a stack of power-basis rows.

    ``|k|^2 = Σ_d c_d C_d(ω)`` with ``c_d = Σ_i a_i a_{i+d}`` (``C_0`` counted
    once), and each ``C_d(ω)`` is already reduced in the tables.
    """
    data = cyclotomic_data(q)
    rows = np.atleast_2d(np.asarray(canon, dtype=np.int64))
    lags = np.empty((rows.shape[0], data.dim), dtype=np.int64)
    for d in range(data.dim):
        lags[:, d] = (rows[:, : data.dim - d] * rows[:, d:]).sum(axis=1)
    return lags @ data.chebyshev


def evaluate(coeffs: np.ndarray, q: int, at: Union[float, np.ndarray, None] = None):
    """Float value of ``Z[ω]`` coefficient rows at ``ω`` (or at given points)."""
    data = cyclotomic_data(q)
    points = np.atleast_1d(data.omega if at is None else np.asarray(at, dtype=float))
    powers = np.power.outer(points, np.arange(data.degree))
    values = np.asarray(coeffs, dtype=float) @ powers.T
    return values[..., 0] if at is None else values


@dataclass(frozen=True)
class RingElement:
    """
    Element ``coeffs · (1, ω, ..., ω^{d-1}) / denominator`` of ``(1/2^e) Z[ω]``.

    Instances are normalized: the denominator is the smallest power of two
    that keeps the numerator integral.
    """

    coeffs: Tuple[int, ...]
    q: int
    denominator: int = 1

    def __post_init__(self):
        degree = cyclotomic_data(self.q).degree
        coeffs = tuple(int(c) for c in self.coeffs)
        if len(coeffs) != degree:
            raise ValueError(
                f"Expected {degree} coefficients for q={self.q}, got {len(coeffs)}."
            )
        den = int(self.denominator)
        if den < 1 or den & (den - 1):
            raise ValueError(f"Denominator must be a power of two, got {den}.")
        while den > 1 and all(c % 2 == 0 for c in coeffs):
            coeffs = tuple(c // 2 for c in coeffs)
            den //= 2
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def from_int(cls, value: int, q: int) -> "RingElement":
        degree = cyclotomic_data(q).degree
        return cls((int(value),) + (0,) * (degree - 1), q)

    @classmethod
    def omega(cls, q: int) -> "RingElement":
        degree = cyclotomic_data(q).degree
        coeffs = [0] * degree
        coeffs[1] = 1
        return cls(tuple(coeffs), q)

    def _coerce(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.q != self.q:
                raise ValueError("Ring elements of different orders do not mix.")
            return other
        if isinstance(other, (int, np.integer)):
            return RingElement.from_int(int(other), self.q)
        return NotImplemented

    def _aligned(self, other: "RingElement"):
        den = max(self.denominator, other.denominator)
        a = [c * (den // self.denominator) for c in self.coeffs]
        b = [c * (den // other.denominator) for c in other.coeffs]
        return a, b, den

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, den = self._aligned(other)
        return RingElement(tuple(x + y for x, y in zip(a, b)), self.q, den)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(tuple(-c for c in self.coeffs), self.q, self.denominator)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        product = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    product[i + j] += x * y
        reduced = _reduce_mod(product, minimal_polynomial(self.q)[::-1])
        return RingElement(
            tuple(reduced), self.q, self.denominator * other.denominator
        )

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        """Exact zero test on the coefficients."""
        return not any(self.coeffs)

    def __float__(self) -> float:
        return float(evaluate(np.array(self.coeffs), self.q)) / self.denominator

    def conjugates(self) -> np.ndarray:
        """Values under every real embedding of ``Q(ω)``; the first is ``float(self)``."""
        data = cyclotomic_data(self.q)
        return evaluate(np.array(self.coeffs), self.q, data.conjugate_points) / (
            self.denominator
        )

    def field_norm(self) -> Fraction:
        """Product of the conjugates, an integer over ``denominator^d``."""
        numerator = float(np.prod(evaluate(
            np.array(self.coeffs), self.q, cyclotomic_data(self.q).conjugate_points
        )))
        return Fraction(round(numerator), self.denominator ** len(self.coeffs))

    def __repr__(self):
        terms = " + ".join(f"{c}·ω^{i}" for i, c in enumerate(self.coeffs) if c)
        body = terms or "0"
        if self.denominator != 1:
            body = f"({body})/{self.denominator}"
        return f"RingElement[q={self.q}]({body})"
