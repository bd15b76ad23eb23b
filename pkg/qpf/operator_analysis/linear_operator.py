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


"""The linearized operator ``L_ε = (1+Δ)^2 - λ_ε + 3U_ε^2`` on a truncation.

On a finite atlas ``L_ε`` is a sparse symmetric matrix: the symbol
``(1 - |k|^2)^2 - λ_ε`` on the diagonal plus ``3 (U_ε^2)^{(k_i - k_j)}`` at
``(i, j)``. Rotation-invariant fields are handled through the orbit-weighted
reduction ``W^{-1/2} P^T L P W^{-1/2}``, which removes the translation modes.
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from qpf.asymptotics import ExpansionBundle, expansion_bundle, potential
from qpf.exceptions import CapacityError, FactorizationError, ParameterError
from qpf.execution import QpfExecutor, map_ordered
from qpf.logger import Logger
from qpf.quasilattice import LatticeAtlas, linear_symbol
from qpf.spectral_field import SpectralField

MAX_OPERATOR_SITES = 200_000
MAX_OPERATOR_ENTRIES = 50_000_000
DENSE_EIG_LIMIT = 2500
PAIR_CHUNK = 4_000_000


def convolution_matrix(w: SpectralField, atlas: LatticeAtlas) -> sp.csr_matrix:
    """Sparse matrix of ``v -> w·v`` on ``atlas``: entry ``(i, j) = w^{(k_i - k_j)}``."""
    n = len(atlas)
    if n > MAX_OPERATOR_SITES:
        raise CapacityError(f"Operator on {n} sites exceeds {MAX_OPERATOR_SITES}.")
    reach = 2.0 * float(np.sqrt(atlas.norm2.max())) + 1e-9
    support = w.support
    support = support[np.hypot(*w.atlas.embed[support].T) <= reach]
    canon, values = w.atlas.canon[support], w.coeffs[support]
    rows, cols, vals = [], [], []
    entries = 0
    step = max(1, PAIR_CHUNK // max(n, 1))
    columns = np.arange(n)
    for start in range(0, support.size, step):
        chunk = slice(start, start + step)
        targets = (canon[chunk][:, None, :] + atlas.canon[None]).reshape(-1, canon.shape[1])
        where = atlas.lookup(targets)
        hit = where >= 0
        count = canon[chunk].shape[0]
        rows.append(where[hit])
        cols.append(np.tile(columns, count)[hit])
        vals.append(np.repeat(values[chunk], n)[hit])
        entries += int(hit.sum())
        if entries > MAX_OPERATOR_ENTRIES:
            raise CapacityError(f"Operator exceeds {MAX_OPERATOR_ENTRIES} entries.")
    if not rows:
        return sp.csr_matrix((n, n))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def assemble_L_eps(
    atlas: LatticeAtlas,
    epsilon: float,
    bundle: Optional[ExpansionBundle] = None,
    logger: Optional[Logger] = None,
) -> sp.csr_matrix:
    """``L_ε`` restricted to ``atlas``; ``ε = 0`` gives the diagonal ``L_0``."""
    if epsilon < 0.0:
        raise ParameterError(f"ε must be non-negative, got {epsilon}.")
    log = logger if logger is not None else atlas.logger
    symbol = linear_symbol(atlas)
    if epsilon == 0.0:
        return sp.diags(symbol).tocsr()
    bundle = expansion_bundle(atlas.q) if bundle is None else bundle
    lam = bundle.lambda_eps(epsilon)
    operator = sp.diags(symbol - lam) + 3.0 * convolution_matrix(
        potential(bundle, epsilon), atlas
    )
    operator = operator.tocsr()
    log.debug("L_ε at ε=%.4g: %d sites, %d entries", epsilon, len(atlas), operator.nnz)
    return operator


def orbit_projector(atlas: LatticeAtlas) -> sp.csr_matrix:
    """Indicator matrix ``P`` mapping orbit values to site coefficients."""
    n = len(atlas)
    return sp.csr_matrix(
        (np.ones(n), (np.arange(n), atlas.orbit_id)), shape=(n, atlas.orbit_reps.size)
    )


def symmetric_reduction(operator: sp.spmatrix, atlas: LatticeAtlas) -> sp.csr_matrix:
    """``W^{-1/2} P^T L P W^{-1/2}`` with ``W`` the orbit sizes."""
    P = orbit_projector(atlas)
    scale = sp.diags(1.0 / np.sqrt(atlas.orbit_sizes))
    return (scale @ (P.T @ operator @ P) @ scale).tocsr()


def smallest_abs_eigenvalue(matrix: sp.spmatrix) -> float:
    """Eigenvalue of smallest modulus of a symmetric matrix."""
    n = matrix.shape[0]
    try:
        if n <= DENSE_EIG_LIMIT:
            values = scipy.linalg.eigvalsh(matrix.toarray())
            return float(np.abs(values).min())
        values = eigsh(matrix.tocsc(), k=1, sigma=0.0, which="LM", return_eigenvectors=False)
        return float(np.abs(values).min())
    except (ArpackError, ArpackNoConvergence, RuntimeError, scipy.linalg.LinAlgError) as exc:
        raise FactorizationError(f"Eigenvalue solve failed: {exc}") from exc


def inverse_bound_sweep(
    atlas: LatticeAtlas,
    eps_list: Sequence[float],
    bundle: Optional[ExpansionBundle] = None,
    symmetric: bool = True,
    executor: Optional[QpfExecutor] = None,
    logger: Optional[Logger] = None,
) -> Dict[str, Any]:
    """
    Smallest ``|eig(L_ε)|`` and its ratio to ``ε^2`` over ``eps_list``.

    With ``symmetric=True`` the rotation-invariant reduction is used. The
    ``band`` entry is the spread (max/min) of the ratio over positive ``ε``.
    """
    log = logger if logger is not None else atlas.logger
    bundle = expansion_bundle(atlas.q) if bundle is None else bundle

    def one(epsilon: float) -> Dict[str, float]:
        operator = assemble_L_eps(atlas, float(epsilon), bundle)
        if symmetric:
            operator = symmetric_reduction(operator, atlas)
        if epsilon == 0.0:
            diagonal = np.abs(operator.diagonal())
            off_kernel = diagonal[diagonal > 0.0]
            return {
                "eps": 0.0,
                "min_abs_eig": float(diagonal.min()),
                "min_off_kernel": float(off_kernel.min()) if off_kernel.size else float("nan"),
                "ratio": float("nan"),
            }
        value = smallest_abs_eigenvalue(operator)
        return {"eps": float(epsilon), "min_abs_eig": value, "ratio": value / epsilon**2}

    rows: List[Dict[str, float]] = map_ordered(one, list(eps_list), executor)
    ratios = [r["ratio"] for r in rows if r["eps"] > 0.0]
    band = max(ratios) / min(ratios) if ratios and min(ratios) > 0 else float("nan")
    for row in rows:
        log.info("L_ε inverse bound: ε=%.4g min|eig|=%.4g", row["eps"], row["min_abs_eig"])
    return {"rows": rows, "band": band, "symmetric": symmetric, "sites": len(atlas)}


def negative_lambda_check(atlas: LatticeAtlas, lam: float) -> Dict[str, Any]:
    """``||((1+Δ)^2 - λ)^{-1}||_0 <= 1/|λ|`` for ``λ < 0`` on the truncation."""
    if not lam < 0.0:
        raise ParameterError(f"The isolation check needs λ < 0, got {lam}.")
    norm = 1.0 / float((linear_symbol(atlas) - lam).min())
    bound = 1.0 / abs(lam)
    return {"lambda": lam, "norm": norm, "bound": bound, "ok": norm <= bound * (1 + 1e-12)}
