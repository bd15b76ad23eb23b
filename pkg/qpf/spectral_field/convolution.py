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


"""Quasilattice convolution: the Fourier side of pointwise products."""

from typing import Optional

import numpy as np

from qpf.exceptions import ParameterError, TruncationError
from qpf.logger import Logger
from qpf.quasilattice import LatticeAtlas

from .field import SpectralField

PAIR_CHUNK = 2_000_000
DEFAULT_LOSS_THRESHOLD = 1e-12


def multiply(
    f: SpectralField,
    g: SpectralField,
    target: Optional[LatticeAtlas] = None,
    strict: bool = False,
    threshold: float = DEFAULT_LOSS_THRESHOLD,
    logger: Optional[Logger] = None,
) -> SpectralField:
    """
    Coefficients of ``f·g`` on ``target`` (default: the atlas of ``f``).

    ``(fg)^{(k)} = Σ_{m} f^{(m)} g^{(k-m)}`` over all pairs of non-zero
    coefficients. Sums landing outside ``target`` are aggregated per lost
    point; the ``H_0`` norm of that aggregate is the result's
    ``truncation_loss``. In strict mode a loss above ``threshold`` raises
    :class:`TruncationError`.
    """
    if f.atlas.q != g.atlas.q:
        raise ParameterError("Cannot multiply fields of different q.")
    target = f.atlas if target is None else target
    if target.q != f.atlas.q:
        raise ParameterError("Target atlas has a different q.")
    log = logger if logger is not None else target.logger

    fi, gi = f.support, g.support
    out = np.zeros(len(target))
    lost_rows, lost_vals = [], []
    if fi.size and gi.size:
        fc, fv = f.atlas.canon[fi], f.coeffs[fi]
        gc, gv = g.atlas.canon[gi], g.coeffs[gi]
        step = max(1, PAIR_CHUNK // gi.size)
        for start in range(0, fi.size, step):
            sums = (fc[start : start + step, None, :] + gc[None, :, :]).reshape(
                -1, fc.shape[1]
            )
            vals = np.outer(fv[start : start + step], gv).ravel()
            where = target.lookup(sums)
            hit = where >= 0
            out += np.bincount(where[hit], weights=vals[hit], minlength=len(target))
            if not hit.all():
                lost_rows.append(sums[~hit])
                lost_vals.append(vals[~hit])
        log.debug(
            "multiply: %d x %d modes in %d chunks",
            fi.size,
            gi.size,
            -(-fi.size // step),
        )

    loss = 0.0
    if lost_rows:
        rows = np.concatenate(lost_rows)
        _, inverse = np.unique(rows, axis=0, return_inverse=True)
        aggregated = np.bincount(inverse.ravel(), weights=np.concatenate(lost_vals))
        loss = float(np.sqrt(np.sum(aggregated**2)))
    if strict and loss > threshold:
        raise TruncationError(
            f"Product loses mass {loss:.3e} outside the target atlas.", loss
        )
    return SpectralField(
        target,
        out,
        symmetric=f.symmetric and g.symmetric,
        truncation_loss=loss,
    )


def cube(
    f: SpectralField,
    target: Optional[LatticeAtlas] = None,
    strict: bool = False,
    threshold: float = DEFAULT_LOSS_THRESHOLD,
) -> SpectralField:
    """``f^3`` through ``target``; in strict mode ``f^2`` must fit as well."""
    target = f.atlas if target is None else target
    square = multiply(f, f, target=target, strict=strict, threshold=threshold)
    return multiply(square, f, target=target, strict=strict, threshold=threshold)
