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


"""Formal small-amplitude expansion of the 2q-fold quasipattern.

With ``U = εu_0 + ε^3 u_1 + ε^5 u_2`` and ``λ = ε^2 λ_2 + ε^4 λ_4`` the steady
equation ``λU - (1+Δ)^2 U - U^3 = 0`` is solved order by order:

* ``u_0`` is the sum of the ``2q`` plane waves ``e^{ik_j·x}``;
* ``λ_2`` removes the unit-circle part of ``u_0^3``;
* ``u_1`` inverts ``(1+Δ)^2`` on the rest, ``λ_4`` is fixed at the next order.

All products are exact quasilattice convolutions on an atlas large enough
for the support involved.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from qpf.exceptions import OutOfRangeError, ParameterError, SolvabilityError
from qpf.logger import Logger
from qpf.quasilattice import (
    LatticeAtlas,
    build_atlas,
    linear_symbol,
    on_unit_circle,
    resonant_count,
)
from qpf.quasilattice.ring import _check_order, cyclotomic_data
from qpf.spectral_field import SpectralField, cube, hs_norm, multiply, transfer

EXPANSION_N_MAX = 5
PREPARE_N_MAX = 15
SOLVABILITY_TOL = 1e-12
AGREEMENT_TOL = 1e-13
EPSILON_MAX = 0.5


@lru_cache(maxsize=None)
def expansion_atlas(q: int) -> LatticeAtlas:
    """Atlas ``N_k <= 5`` holding the support of ``u_0, u_1, u_2, a, b``."""
    return build_atlas(_check_order(q), EXPANSION_N_MAX)


@lru_cache(maxsize=None)
def square_atlas(q: int) -> LatticeAtlas:
    """Atlas ``N_k <= 10`` holding ``U_ε^2`` exactly."""
    return build_atlas(_check_order(q), 2 * EXPANSION_N_MAX)


@lru_cache(maxsize=None)
def prepare_atlas(q: int) -> LatticeAtlas:
    """Atlas ``N_k <= 15`` holding ``U_ε^3`` exactly."""
    return build_atlas(_check_order(q), PREPARE_N_MAX)


def _invert_symbol(rhs: SpectralField, what: str) -> SpectralField:
    """Solve ``(1+Δ)^2 v = rhs`` off the unit circle after the solvability test."""
    atlas = rhs.atlas
    circle = on_unit_circle(atlas)
    leftover = float(np.abs(rhs.coeffs[circle]).max(initial=0.0))
    if leftover > SOLVABILITY_TOL:
        raise SolvabilityError(
            f"{what}: unit-circle coefficient {leftover:.3e} does not vanish."
        )
    symbol = linear_symbol(atlas)
    coeffs = np.where(circle, 0.0, rhs.coeffs / np.where(circle, 1.0, symbol))
    return SpectralField(atlas, coeffs, symmetric=rhs.symmetric)


def base_pattern(q: int, atlas: Optional[LatticeAtlas] = None) -> SpectralField:
    """``u_0``: coefficient 1 on each of the ``2q`` unit vectors."""
    atlas = expansion_atlas(q) if atlas is None else atlas
    coeffs = np.zeros(len(atlas))
    coeffs[atlas.unit_indices] = 1.0
    return SpectralField(atlas, coeffs, symmetric=True)


def lambda_2(q: int) -> float:
    """
    ``λ_2 = 3(2q-1)``, cross-checked against the ``k_1`` coefficient of
    ``u_0^3`` and against the resonant quadruple count.
    """
    q = _check_order(q)
    value = 3 * (2 * q - 1)
    atlas = expansion_atlas(q)
    convolved = cube(base_pattern(q), strict=True).coefficient(atlas.unit_index(1))
    counted = resonant_count(q)
    if convolved != value or counted != value:
        raise SolvabilityError(
            f"λ₂ mismatch for q={q}: formula {value}, u₀³ {convolved}, "
            f"quadruples {counted}."
        )
    return float(value)


def _closed_form_u1(q: int, atlas: LatticeAtlas) -> np.ndarray:
    """
    ``u_1^{(k)} = -m_k / (1-|k|^2)^2`` where ``m_k`` counts ordered triples of
    unit vectors without an opposite pair summing to ``k``.
    """
    gens = cyclotomic_data(q).generators
    n = 2 * q
    idx = np.arange(n)
    j, l, r = np.meshgrid(idx, idx, idx, indexing="ij")
    j, l, r = j.ravel(), l.ravel(), r.ravel()

    def opposite(a, b):
        return (a - b) % n == q

    keep = ~(opposite(j, l) | opposite(j, r) | opposite(l, r))
    sites = atlas.lookup(gens[j[keep]] + gens[l[keep]] + gens[r[keep]])
    counts = np.bincount(sites, minlength=len(atlas)).astype(float)
    symbol = linear_symbol(atlas)
    return np.where(counts > 0, -counts / np.where(symbol > 0, symbol, 1.0), 0.0)


def first_correction(q: int) -> SpectralField:
    """
    ``u_1`` from ``(1+Δ)^2 u_1 = λ_2 u_0 - u_0^3``, checked against the
    closed formula over unit-vector triples.
    """
    q = _check_order(q)
    atlas = expansion_atlas(q)
    u0 = base_pattern(q)
    rhs = lambda_2(q) * u0 - cube(u0, strict=True)
    u1 = _invert_symbol(rhs, "order ε³")
    closed = _closed_form_u1(q, atlas)
    gap = np.abs(closed - u1.coeffs)
    if np.any(gap > AGREEMENT_TOL * np.maximum(1.0, np.abs(closed))):
        raise SolvabilityError(
            f"Closed-form and solved u₁ disagree by {gap.max():.3e} for q={q}."
        )
    return u1


def _lambda_4_parts(q: int, u1: SpectralField) -> Tuple[float, float]:
    atlas = expansion_atlas(q)
    u0 = base_pattern(q)
    k1 = atlas.unit_index(1)
    convolution = 3.0 * multiply(multiply(u0, u0, strict=True), u1, strict=True).coefficient(k1)

    gens = cyclotomic_data(q).generators
    target = atlas.canon[k1]
    literal = 0.0
    for a in range(2 * q):
        for b in range(2 * q):
            site = int(atlas.lookup(target - gens[a] - gens[b])[0])
            if site >= 0 and atlas.n_word[site] == 3:
                literal += u1.coefficient(site)
    return convolution, literal


def lambda_4(q: int, u1: Optional[SpectralField] = None) -> float:
    """``λ_4``: the ``k_1`` coefficient of ``3 u_0^2 u_1``, strictly negative."""
    q = _check_order(q)
    u1 = first_correction(q) if u1 is None else u1
    value, _ = _lambda_4_parts(q, u1)
    if not value < 0.0:
        raise SolvabilityError(f"λ₄ = {value} is not negative for q={q}.")
    return float(value)


def lambda_4_report(q: int) -> Dict[str, float]:
    """
    ``λ_4`` from the convolution next to the literal sum of ``u_1``
    coefficients over ``k_j + k_l + k = k_1`` with ``N_k = 3``.
    """
    convolution, literal = _lambda_4_parts(q, first_correction(q))
    return {
        "convolution": convolution,
        "literal_sum": literal,
        "ratio": literal / convolution if convolution else float("nan"),
    }


def second_correction(
    q: int, u1: Optional[SpectralField] = None, lambda4: Optional[float] = None
) -> SpectralField:
    """``u_2`` from ``(1+Δ)^2 u_2 = λ_4 u_0 + λ_2 u_1 - 3 u_0^2 u_1``."""
    q = _check_order(q)
    u1 = first_correction(q) if u1 is None else u1
    lambda4 = lambda_4(q, u1) if lambda4 is None else lambda4
    u0 = base_pattern(q)
    u0u0u1 = multiply(multiply(u0, u0, strict=True), u1, strict=True)
    rhs = lambda4 * u0 + lambda_2(q) * u1 - 3.0 * u0u0u1
    return _invert_symbol(rhs, "order ε⁵")


def coefficient_fields(
    q: int, u1: Optional[SpectralField] = None, lambda4: Optional[float] = None
) -> Tuple[SpectralField, SpectralField]:
    """``a = 3u_0^2 - λ_2`` and ``b = 6u_0u_1 - λ_4``."""
    q = _check_order(q)
    u1 = first_correction(q) if u1 is None else u1
    lambda4 = lambda_4(q, u1) if lambda4 is None else lambda4
    u0 = base_pattern(q)
    a = (3.0 * multiply(u0, u0, strict=True)).add_constant(-lambda_2(q))
    b = (6.0 * multiply(u0, u1, strict=True)).add_constant(-lambda4)
    return a, b


@dataclass(frozen=True)
class ExpansionBundle:
    """Every order of the expansion for one ``q``."""

    q: int
    u0: SpectralField
    u1: SpectralField
    u2: SpectralField
    lambda2: float
    lambda4: float
    a_field: SpectralField
    b_field: SpectralField
    a0: float
    b0: float

    def __post_init__(self):
        if self.lambda2 != 3 * (2 * self.q - 1):
            raise SolvabilityError("λ₂ differs from 3(2q-1).")
        if not self.lambda4 < 0.0:
            raise SolvabilityError("λ₄ must be negative.")
        if np.any(self.u1.coeffs > 0.0):
            raise SolvabilityError("u₁ has a positive coefficient.")
        if abs(self.a0 - 3.0) > SOLVABILITY_TOL * self.lambda2:
            raise SolvabilityError(f"Mean of a is {self.a0}, expected 3.")
        if abs(self.b0 + self.lambda4) > SOLVABILITY_TOL * max(1.0, abs(self.lambda4)):
            raise SolvabilityError(f"Mean of b is {self.b0}, expected -λ₄.")

    @property
    def atlas(self) -> LatticeAtlas:
        return self.u0.atlas

    def lambda_eps(self, epsilon: float) -> float:
        return epsilon**2 * self.lambda2 + epsilon**4 * self.lambda4

    def U_eps(self, epsilon: float, atlas: Optional[LatticeAtlas] = None) -> SpectralField:
        """``εu_0 + ε^3 u_1 + ε^5 u_2`` transferred to ``atlas`` if given."""
        field = epsilon * self.u0 + epsilon**3 * self.u1 + epsilon**5 * self.u2
        return field if atlas is None else transfer(field, atlas, strict=False)


@lru_cache(maxsize=None)
def expansion_bundle(q: int) -> ExpansionBundle:
    """Compute (once per ``q``) the full expansion bundle."""
    q = _check_order(q)
    u1 = first_correction(q)
    lambda4 = lambda_4(q, u1)
    u2 = second_correction(q, u1, lambda4)
    a, b = coefficient_fields(q, u1, lambda4)
    bundle = ExpansionBundle(
        q=q,
        u0=base_pattern(q),
        u1=u1,
        u2=u2,
        lambda2=lambda_2(q),
        lambda4=lambda4,
        a_field=a,
        b_field=b,
        a0=a.mean(),
        b0=b.mean(),
    )
    expansion_atlas(q).logger.info(
        "Expansion q=%d: λ₂ = %.0f, λ₄ = %.15g", q, bundle.lambda2, lambda4
    )
    return bundle


@dataclass(frozen=True)
class PreparedState:
    """``U_ε``, ``λ_ε`` and the residual ``f_ε`` at one ``ε``."""

    epsilon: float
    U_eps: SpectralField
    lambda_eps: float
    f_eps: SpectralField
    residual_norm: float


def steady_residual(u: SpectralField, lam: float) -> SpectralField:
    """``λu - (1+Δ)^2 u - u^3`` on the atlas of ``u`` (strict cube)."""
    symbol = linear_symbol(u.atlas)
    linear = SpectralField(
        u.atlas, (lam - symbol) * u.coeffs, symmetric=u.symmetric
    )
    return linear - cube(u, strict=True)


def prepare(
    q: int,
    epsilon: float,
    atlas: Optional[LatticeAtlas] = None,
    logger: Optional[Logger] = None,
) -> PreparedState:
    """
    Assemble ``U_ε``, ``λ_ε`` and ``f_ε = -ε^{-7}[λ_ε U_ε - (1+Δ)^2 U_ε - U_ε^3]``.

    The default atlas (``N_k <= 15``) holds ``U_ε^3`` without truncation; a
    custom atlas must do the same or a :class:`TruncationError` is raised.
    """
    if not 0.0 < epsilon <= EPSILON_MAX:
        raise ParameterError(f"ε must lie in (0, {EPSILON_MAX}], got {epsilon}.")
    bundle = expansion_bundle(q)
    atlas = prepare_atlas(q) if atlas is None else atlas
    log = logger if logger is not None else atlas.logger
    U = transfer(bundle.U_eps(epsilon), atlas, strict=True)
    lam = bundle.lambda_eps(epsilon)
    residual = steady_residual(U, lam)
    f_eps = (-(epsilon**-7)) * residual
    norm = hs_norm(residual, 0.0)
    log.debug("prepare q=%d ε=%.4g: residual %.3e", q, epsilon, norm)
    return PreparedState(
        epsilon=float(epsilon),
        U_eps=U,
        lambda_eps=lam,
        f_eps=f_eps,
        residual_norm=norm,
    )


def residual_order(q: int, epsilon: float) -> Dict[str, float]:
    """Residual norms at ``ε`` and ``ε/2`` and their ratio (ideally ``2^7``)."""
    coarse = prepare(q, epsilon).residual_norm
    fine = prepare(q, epsilon / 2.0).residual_norm
    return {"coarse": coarse, "fine": fine, "ratio": coarse / fine}


def epsilon_from_lambda(q: int, lam: float) -> float:
    """
    Positive ``ε`` with ``λ = ε^2 λ_2 + ε^4 λ_4`` on the small-amplitude root.

    ``ε^2 = 2λ / (λ_2 + sqrt(λ_2^2 + 4 λ_4 λ))``; requires ``λ > 0`` and a
    positive discriminant.
    """
    bundle = expansion_bundle(q)
    if not lam > 0.0:
        raise OutOfRangeError(f"λ must be positive for the quasipattern branch, got {lam}.")
    disc = bundle.lambda2**2 + 4.0 * bundle.lambda4 * lam
    if not disc > 0.0:
        limit = bundle.lambda2**2 / (4 * -bundle.lambda4)
        raise OutOfRangeError(f"λ = {lam} exceeds λ₂²/(4|λ₄|) = {limit:.6g}.")
    eps2 = 2.0 * lam / (bundle.lambda2 + np.sqrt(disc))
    return float(np.sqrt(eps2))


def amplitude_law(q: int, epsilon: float) -> Dict[str, float]:
    """Leading-order unit-orbit coefficient ``ε`` and ``H_0`` norm ``ε sqrt(2q)``."""
    return {
        "unit_coefficient": float(epsilon),
        "h0_norm": float(epsilon * np.sqrt(2 * _check_order(q))),
    }


def potential(bundle: ExpansionBundle, epsilon: float) -> SpectralField:
    """``U_ε^2``, exactly, on the ``N_k <= 10`` atlas."""
    U = transfer(bundle.U_eps(epsilon), square_atlas(bundle.q), strict=True)
    return multiply(U, U, strict=True)
