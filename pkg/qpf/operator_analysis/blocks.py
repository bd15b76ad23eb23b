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

"""The reduced block family on the disc region.

For a sector offset ``k'`` the sites ``k' + k_j`` span a ``2q``-dimensional
space invariant under ``P_2(a ·)``. On it the reduced operator is the
symmetric matrix ``diag(β_j(k')) + ε^2 Λ_1`` with
``β_j(k') = (2 k_j·k' + |k'|^2)^2`` and the constant coupling ``Λ_1``, which
is read off ``P_2(a ·)`` on the block at ``k' = 0``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from qpf.asymptotics import base_pattern, expansion_atlas, lambda_2
from qpf.exceptions import ConvergenceError, ParameterError, SolvabilityError, SupportError
from qpf.execution import QpfExecutor, map_ordered
from qpf.fitting import BoundConstantModel
from qpf.logger import Logger
from qpf.quasilattice.ring import _check_order, cyclotomic_data
from qpf.spectral_field import SpectralField, multiply, project

from .splitting import DEFAULT_C, SplitLabels, classify_spectrum, unit_vectors

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
DEFAULT_GAP_FLOOR = 1.0
DEFAULT_SECTOR_POINTS = 64
K_SPREAD_LIMIT = 2.0
# discs this small hold only the generators on the expansion atlas
LAMBDA1_EPSILON = 1e-10


@lru_cache(maxsize=None)
def coupling_field(q: int) -> SpectralField:
    """``a = 3u_0^2 - λ_2`` on the expansion atlas."""
    u0 = base_pattern(q)
    return (3.0 * multiply(u0, u0, strict=True)).add_constant(-lambda_2(q))


def block_sites(labels: SplitLabels, site: int) -> np.ndarray:
    """
    Atlas indices of ``k' + k_j``, ``j = 1..2q``, for the disc-1 site ``k_1 + k'``.

    Raises:
        ParameterError: ``site`` is not in the disc around ``k_1``.
        SupportError: a block site is missing from the atlas or lies outside S2.
    """
    atlas = labels.atlas
    if labels.disc[site] != 1:
        raise ParameterError(f"Site {site} is not in the disc around k_1.")
    gens = cyclotomic_data(atlas.q).generators
    kprime = atlas.canon[site] - gens[0]
    sites = atlas.lookup(kprime[None, :] + gens)
    if np.any(sites < 0) or np.any(labels.region[np.maximum(sites, 0)] != 2):
        raise SupportError(f"The block of site {site} is not contained in S2 of the atlas.")
    return sites


def coupling_block(
    labels: SplitLabels, site: int, a: Optional[SpectralField] = None
) -> Tuple[np.ndarray, float]:
    """
    Matrix of ``U -> P_2(a U)`` on the block of ``site`` and its leakage.

    Column ``c`` holds ``P_2(a e_{k'+k_c})`` read at the ``2q`` block sites; the
    leakage is the largest coefficient the same products leave on S2 sites
    outside the block.
    """
    atlas = labels.atlas
    a = coupling_field(atlas.q) if a is None else a
    sites = block_sites(labels, site)
    outside = labels.mask("S2").copy()
    outside[sites] = False
    matrix = np.zeros((sites.size, sites.size))
    leakage = 0.0
    for c, column in enumerate(sites):
        product = multiply(a, SpectralField.indicator(atlas, int(column)), target=atlas)
        image = project(product, labels, "S2")
        matrix[:, c] = image.coeffs[sites]
        leakage = max(leakage, float(np.abs(image.coeffs[outside]).max(initial=0.0)))
    return matrix, leakage


@lru_cache(maxsize=None)
def _lambda1(q: int) -> np.ndarray:
    atlas = expansion_atlas(q)
    labels = classify_spectrum(atlas, LAMBDA1_EPSILON)
    matrix, leakage = coupling_block(labels, atlas.unit_index(1))
    integral = np.rint(matrix)
    if leakage != 0.0 or np.any(integral != matrix):
        raise SolvabilityError(
            f"P₂(a·) on the k' = 0 block of q={q} is not an integer block "
            f"(leakage {leakage:.3e})."
        )
    return integral.astype(np.int64)


def lambda1_matrix(q: int) -> np.ndarray:
    """``Λ_1``, integer and circulant: ``Λ_1[r, c]`` couples ``k_c`` into ``k_r``."""
    return _lambda1(_check_order(q)).copy()


def apply_P2a(u: SpectralField, labels: SplitLabels) -> SpectralField:
    """
    ``P_2(a u)`` for ``u`` supported in ``S2`` by the block coupling.

    The output at a disc site ``k = k' + k_r`` is
    ``Σ_c Λ_1[r, c] u^{(k' + k_c)}``; neighbours outside the atlas count as
    zero.
    """
    atlas = labels.atlas
    if u.atlas is not atlas:
        raise ParameterError("Field and labels live on different atlases.")
    disc_sites = labels.indices("S2")
    outside = np.ones(len(atlas), dtype=bool)
    outside[disc_sites] = False
    if np.any(u.coeffs[outside] != 0.0):
        raise SupportError("apply_P2a needs a field supported in S2.")
    gens = cyclotomic_data(atlas.q).generators
    r = labels.disc[disc_sites] - 1
    kprime = atlas.canon[disc_sites] - gens[r]
    neighbours = atlas.lookup(
        (kprime[:, None, :] + gens[None]).reshape(-1, gens.shape[1])
    ).reshape(disc_sites.size, 2 * atlas.q)
    values = np.where(neighbours >= 0, u.coeffs[np.maximum(neighbours, 0)], 0.0)
    coupling = lambda1_matrix(atlas.q)[r]
    out = np.zeros(len(atlas))
    out[disc_sites] = (coupling * values).sum(axis=1)
    return SpectralField(atlas, out, symmetric=u.symmetric)


@dataclass(frozen=True)
class SectorPoint:
    """Offset ``k'`` in the first sector, optionally tied to an atlas site."""

    kprime: tuple
    source_site: Optional[int] = None


@dataclass
class BlockMatrix:
    """``Λ_0^{(k')} + ε^2 Λ_1`` for one offset."""

    q: int
    kprime: SectorPoint
    epsilon: float
    beta: np.ndarray
    mat: np.ndarray


def beta_values(q: int, kprime: Sequence[float]) -> np.ndarray:
    """``β_j(k') = (2 k_j·k' + |k'|^2)^2`` for ``j = 1..2q``."""
    k = np.asarray(kprime, dtype=float)
    return (2.0 * unit_vectors(q) @ k + k @ k) ** 2


def assemble_block(
    q: int,
    kprime,
    epsilon: float,
    delta1: Optional[float] = None,
) -> BlockMatrix:
    """Block for ``k'`` (a :class:`SectorPoint` or a 2-vector)."""
    q = _check_order(q)
    point = kprime if isinstance(kprime, SectorPoint) else SectorPoint(tuple(map(float, kprime)))
    k = np.asarray(point.kprime, dtype=float)
    if delta1 is not None and np.hypot(*k) > delta1 * (1.0 + 1e-12):
        raise ParameterError(f"|k'| = {np.hypot(*k):.4g} exceeds δ₁ = {delta1:.4g}.")
    beta = beta_values(q, k)
    mat = np.diag(beta) + epsilon**2 * lambda1_matrix(q)
    return BlockMatrix(q=q, kprime=point, epsilon=float(epsilon), beta=beta, mat=mat)


def jacobi_eigenvalues(
    matrix: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> np.ndarray:
    """
    Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.

    Sweeps stop once the off-diagonal Frobenius mass is below ``tol`` times
    the Frobenius norm of the matrix.
    """
    a = np.array(matrix, dtype=float, copy=True)
    n = a.shape[0]
    scale = max(float(np.linalg.norm(a)), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for r in range(p + 1, n):
                if a[p, r] == 0.0:
                    continue
                tau = (a[r, r] - a[p, p]) / (2.0 * a[p, r])
                t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, r]
                rot_r = s * a[:, p] + c * a[:, r]
                a[:, p], a[:, r] = rot_p, rot_r
                rot_p = c * a[p, :] - s * a[r, :]
                rot_r = s * a[p, :] + c * a[r, :]
                a[p, :], a[r, :] = rot_p, rot_r
    raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps.")


def block_eigenvalues(block: BlockMatrix) -> np.ndarray:
    """Sorted eigenvalues ``μ_j`` of the block."""
    return jacobi_eigenvalues(block.mat)


def sector_radius(epsilon: float, C: float = DEFAULT_C) -> float:
    """``δ_1 = sqrt(3 C ε^{1/2})``."""
    return float(np.sqrt(3.0 * C * np.sqrt(epsilon)))


def sector_points(
    q: int,
    epsilon: float,
    C: float = DEFAULT_C,
    n_points: int = DEFAULT_SECTOR_POINTS,
) -> List[SectorPoint]:
    """
    Deterministic Halton sample of the sector ``|k'| <= δ_1``,
    ``arg k' ∈ [-π/2q, π/2q)``; the degenerate first Halton point is skipped.
    """
    q = _check_order(q)
    delta1 = sector_radius(epsilon, C)
    unit = qmc.Halton(d=2, scramble=False).random(int(n_points) + 1)[1:]
    radius = delta1 * np.sqrt(unit[:, 0])
    theta = -np.pi / (2 * q) + unit[:, 1] * np.pi / q
    return [
        SectorPoint((float(r * np.cos(t)), float(r * np.sin(t))))
        for r, t in zip(radius, theta)
    ]


def sector_points_from_atlas(labels: SplitLabels) -> List[SectorPoint]:
    """Lattice offsets ``k - k_1`` of disc-1 sites lying in the first sector."""
    atlas = labels.atlas
    q = atlas.q
    sites = labels.indices(("S2", 1))
    offsets = atlas.embed[sites] - np.array([1.0, 0.0])
    angle = np.arctan2(offsets[:, 1], offsets[:, 0])
    zero = np.hypot(offsets[:, 0], offsets[:, 1]) == 0.0
    keep = zero | ((angle >= -np.pi / (2 * q)) & (angle < np.pi / (2 * q)))
    return [
        SectorPoint((float(x), float(y)), int(site))
        for (x, y), site in zip(offsets[keep], sites[keep])
    ]


def isolated_eigenvalues(beta: np.ndarray, gap_floor: float = DEFAULT_GAP_FLOOR) -> np.ndarray:
    """Mask over the sorted ``β`` of values farther than ``gap_floor`` from every other one."""
    ordered = np.sort(np.asarray(beta, dtype=float))
    gaps = np.diff(ordered)
    below = np.concatenate([[np.inf], gaps])
    above = np.concatenate([gaps, [np.inf]])
    return (below > gap_floor) & (above > gap_floor)


@dataclass
class BlockSweep:
    """Rows of the eigenvalue sweep and its summary."""

    rows: List[Dict[str, float]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def lower_bound_holds(self) -> bool:
        """``|μ| >= 2ε^2`` on every isolated eigenvalue."""
        return bool(self.summary.get("lower_bound_isolated", True))

    @property
    def single_constant(self) -> bool:
        """Per-ε defect constants agree within ``K_SPREAD_LIMIT``."""
        return bool(self.summary.get("single_constant", False))


def _sweep_point(args) -> Dict[str, Any]:
    q, point, epsilon, gap_floor = args
    block = assemble_block(q, point, epsilon)
    mu = block_eigenvalues(block)
    beta = np.sort(block.beta)
    return {
        "point": point,
        "beta": beta,
        "mu": mu,
        "defect": mu - beta - 3.0 * epsilon**2,
        "isolated": isolated_eigenvalues(beta, gap_floor),
    }


def block_sweep(
    q: int,
    eps_list: Sequence[float],
    n_points: int = DEFAULT_SECTOR_POINTS,
    C: float = DEFAULT_C,
    gap_floor: float = DEFAULT_GAP_FLOOR,
    kprimes: Optional[Sequence[Sequence[float]]] = None,
    executor: Optional[QpfExecutor] = None,
    logger: Optional[Logger] = None,
) -> BlockSweep:
    """
    Eigenvalues of the blocks over one set of sector points for each ``ε``.

    The sample is drawn in the sector of the smallest ``ε``, which lies inside
    the sector of every other ``ε``. Each row compares the sorted ``μ_j`` with
    the sorted ``β_j`` through ``μ_j - β_j - 3ε^2``. An eigenvalue is isolated
    when its ``β_j`` is more than ``gap_floor`` away from the others; the
    perturbation constant ``K`` (per ``ε`` and jointly) and the lower bound
    ``|μ| >= 2ε^2`` are taken over isolated eigenvalues. Minima over all
    eigenvalues are reported alongside.
    """
    q = _check_order(q)
    eps_list = [float(e) for e in eps_list]
    if not eps_list or min(eps_list) <= 0.0:
        raise ParameterError(f"Block sweeps need positive ε values, got {eps_list}.")
    if not gap_floor > 0.0:
        raise ParameterError(f"gap_floor must be positive, got {gap_floor}.")
    log = logger if logger is not None else Logger()
    points = (
        sector_points(q, min(eps_list), C, n_points)
        if kprimes is None
        else [SectorPoint(tuple(map(float, k))) for k in kprimes]
    )
    sweep = BlockSweep()
    per_eps: Dict[str, Any] = {}
    all_eps: List[float] = []
    all_defects: List[float] = []
    lower_ok = True
    for epsilon in eps_list:
        results = map_ordered(
            _sweep_point, [(q, p, epsilon, gap_floor) for p in points], executor
        )
        defects: List[float] = []
        min_all, min_abs, min_isolated, below = np.inf, np.inf, np.inf, 0
        for res in results:
            kx, ky = res["point"].kprime
            for j in range(2 * q):
                sweep.rows.append(
                    {
                        "eps": epsilon,
                        "kprime_x": kx,
                        "kprime_y": ky,
                        "j": j + 1,
                        "beta_j": float(res["beta"][j]),
                        "mu_j": float(res["mu"][j]),
                        "mu_j_minus_beta_minus_3eps2": float(res["defect"][j]),
                    }
                )
            abs_mu = np.abs(res["mu"])
            min_all = min(min_all, float(res["mu"][0]))
            min_abs = min(min_abs, float(abs_mu.min()))
            below += int(abs_mu.min() < 2.0 * epsilon**2)
            isolated = res["isolated"]
            if isolated.any():
                min_isolated = min(min_isolated, float(abs_mu[isolated].min()))
                defects.extend(np.abs(res["defect"][isolated]).tolist())
        k_eps = (
            BoundConstantModel(exponent=4, side="upper").fit([epsilon] * len(defects), defects)[
                "constant"
            ]
            if defects
            else float("nan")
        )
        all_eps.extend([epsilon] * len(defects))
        all_defects.extend(defects)
        bound_ok = bool(min_isolated >= 2.0 * epsilon**2) if defects else True
        lower_ok &= bound_ok
        per_eps[repr(epsilon)] = {
            "points": len(points),
            "isolated": len(defects),
            "K": k_eps,
            "min_mu_over_eps2": min_all / epsilon**2,
            "min_abs_mu_over_eps2": min_abs / epsilon**2,
            "points_below_bound": below,
            "min_abs_mu_over_eps2_isolated": (
                min_isolated / epsilon**2 if defects else float("nan")
            ),
            "lower_bound_isolated": bound_ok,
        }
        if not bound_ok:
            log.warning("Block lower bound 2ε² fails on isolated eigenvalues at ε=%.4g", epsilon)
        log.info(
            "Blocks ε=%.4g: %d isolated, K=%.4g, min μ/ε²=%.4g, %d/%d points below 2ε²",
            epsilon,
            len(defects),
            k_eps,
            min_all / epsilon**2,
            below,
            len(points),
        )
    constants = [data["K"] for data in per_eps.values()]
    finite = all(np.isfinite(constants)) and min(constants) > 0.0
    spread = max(constants) / min(constants) if finite else float("nan")
    sweep.summary = {
        "q": q,
        "C": float(C),
        "gap_floor": float(gap_floor),
        "sector_radius": sector_radius(min(eps_list), C),
        "per_epsilon": per_eps,
        "K_fitted": (
            BoundConstantModel(exponent=4, side="upper").fit(all_eps, all_defects)["constant"]
            if all_defects
            else float("nan")
        ),
        "K_spread": spread,
        "single_constant": bool(finite and spread <= K_SPREAD_LIMIT),
        "lower_bound_isolated": lower_ok,
    }
    if finite and not spread <= K_SPREAD_LIMIT:
        log.warning("Block defect constants spread by %.3g across ε", spread)
    return sweep
