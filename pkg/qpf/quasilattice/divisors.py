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


"""Small divisors ``|k|^2 - 1`` on the quasilattice.

The zero test is always exact (coefficients in ``Z[ω]``); floats are only used
for magnitudes and fits.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from qpf.exceptions import ParameterError
from qpf.fitting import BoundConstantModel, PowerLawFittingModel
from qpf.logger import Logger

from .atlas import LatticeAtlas, LatticeSite
from .ring import RingElement, cyclotomic_data, evaluate


def small_divisor(
    site: Union[LatticeSite, int], atlas: Optional[LatticeAtlas] = None
) -> Tuple[RingElement, float]:
    """``|k|^2 - 1`` exactly and as a float, for a site or an atlas index."""
    if not isinstance(site, LatticeSite):
        if atlas is None:
            raise ParameterError("An atlas is required to resolve a site index.")
        site = atlas.site(int(site))
    exact = site.norm2 - 1
    return exact, float(exact)


def divisor_coefficients(atlas: LatticeAtlas) -> np.ndarray:
    """Exact ``|k|^2 - 1`` for every site as ``Z[ω]`` coefficient rows."""
    coeffs = atlas.norm2_coeffs.copy()
    coeffs[:, 0] -= 1
    return coeffs


def on_unit_circle(atlas: LatticeAtlas) -> np.ndarray:
    """Exact mask of sites with ``|k| = 1``."""
    return ~np.any(divisor_coefficients(atlas), axis=1)


@dataclass
class DivisorSpectrum:
    """Per-shell minima of ``||k|^2 - 1|`` and the fitted decay."""

    q: int
    l0: int
    shells: List[int]
    minima: List[float]
    argmin: List[int]
    canon: List[Tuple[int, ...]]
    exponent: float
    prefactor: float
    constant: float
    extra_circle_sites: List[int] = field(default_factory=list)

    def rows(self):
        return list(zip(self.shells, self.minima, self.canon))


def divisor_spectrum(
    atlas: LatticeAtlas, logger: Optional[Logger] = None
) -> DivisorSpectrum:
    """
    Minimum of ``||k|^2 - 1|`` over each shell ``N_k = N``, circle sites excluded.

    The log-log slope of the minima is fitted by least squares; ``constant``
    is the largest ``c`` with ``min >= c / N^{2 l0}`` on every tabulated shell.
    Sites exactly on the unit circle other than the ``k_j`` are reported in
    ``extra_circle_sites``.
    """
    if atlas.n_max < 4:
        raise ParameterError("divisor_spectrum needs an atlas with n_max >= 4.")
    log = logger if logger is not None else atlas.logger
    l0 = cyclotomic_data(atlas.q).degree - 1
    circle = on_unit_circle(atlas)
    units = set(int(i) for i in atlas.unit_indices if i >= 0)
    extra = [int(i) for i in np.flatnonzero(circle) if int(i) not in units]
    if extra:
        log.warning("Found %d non-generator sites on the unit circle", len(extra))

    values = np.abs(evaluate(divisor_coefficients(atlas), atlas.q))
    shells, minima, argmin, canon = [], [], [], []
    for n in range(1, int(atlas.n_word.max()) + 1):
        members = np.flatnonzero((atlas.n_word == n) & ~circle)
        if members.size == 0:
            continue
        best = int(members[np.argmin(values[members])])
        shells.append(n)
        minima.append(float(values[best]))
        argmin.append(best)
        canon.append(tuple(int(a) for a in atlas.canon[best]))

    power = PowerLawFittingModel().fit(shells, minima)
    bound = BoundConstantModel(exponent=-2 * l0, side="lower").fit(shells, minima)
    log.info(
        "Small divisors q=%d: exponent %.3f, c = %.4g over %d shells",
        atlas.q,
        power["exponent"],
        bound["constant"],
        len(shells),
    )
    return DivisorSpectrum(
        q=atlas.q,
        l0=l0,
        shells=shells,
        minima=minima,
        argmin=argmin,
        canon=canon,
        exponent=power["exponent"],
        prefactor=power["prefactor"],
        constant=bound["constant"],
        extra_circle_sites=extra,
    )


@dataclass
class NormCertificate:
    """Integrality of the field norm of ``|k|^2 - 1`` across the atlas."""

    sites: int
    min_abs_norm: int
    max_integrality_error: float


def conjugate_norm_certificate(atlas: LatticeAtlas) -> NormCertificate:
    """
    Field norm of ``|k|^2 - 1`` for every site off the unit circle.

    The norm is the product over all real embeddings of ``Z[ω]``; it is a
    non-zero rational integer, hence at least 1 in absolute value. Dividing by
    the other conjugates, which grow at most like ``N_k^2``, yields the lower
    bound ``c / N_k^{2 l0}`` on the divisor itself.
    """
    data = cyclotomic_data(atlas.q)
    off = ~on_unit_circle(atlas)
    conj = evaluate(divisor_coefficients(atlas)[off], atlas.q, data.conjugate_points)
    norms = np.prod(conj, axis=1)
    rounded = np.rint(norms)
    return NormCertificate(
        sites=int(off.sum()),
        min_abs_norm=int(np.abs(rounded).min()) if off.any() else 0,
        max_integrality_error=float(np.abs(norms - rounded).max(initial=0.0)),
    )


def linear_symbol(atlas: LatticeAtlas) -> np.ndarray:
    """``(1 - |k|^2)^2`` per site, exactly zero on the unit circle."""
    values = evaluate(divisor_coefficients(atlas), atlas.q)
    return np.where(on_unit_circle(atlas), 0.0, values**2)
