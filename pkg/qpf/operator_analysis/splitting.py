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


"""Splitting of the quasilattice into far, annulus and disc regions.

For ``δ = C ε^{1/2}`` and ``δ_1 = sqrt(3δ)``:

* ``S2`` (disc ``j``): ``|k - k_j| <= δ_1``, the nearest ``k_j`` wins, ties go
  to the smallest ``j``;
* ``S1``: ``||k|^2 - 1| < δ`` and not in a disc;
* ``S0``: everything else.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from qpf.exceptions import ParameterError
from qpf.logger import Logger
from qpf.quasilattice import LatticeAtlas
from qpf.quasilattice.ring import cyclotomic_data

DEFAULT_C = 2.0
REGION_CODES = {"S0": 0, "S1": 1, "S2": 2}
MAX_REPORTED = 20

Region = Union[str, Tuple[str, int]]


def unit_vectors(q: int) -> np.ndarray:
    """Embeddings of ``k_1..k_{2q}`` as rows."""
    angles = np.arange(2 * q) * np.pi / q
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _classify_points(
    points: np.ndarray, q: int, delta: float, delta1: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Region code and disc number (1-based, 0 outside discs) of embedded points."""
    dist = np.linalg.norm(points[:, None, :] - unit_vectors(q)[None], axis=2)
    nearest = np.argmin(dist, axis=1)
    in_disc = dist[np.arange(points.shape[0]), nearest] <= delta1
    near_circle = np.abs((points**2).sum(axis=1) - 1.0) < delta
    region = np.where(in_disc, 2, np.where(near_circle, 1, 0)).astype(np.int8)
    disc = np.where(in_disc, nearest + 1, 0)
    return region, disc


@dataclass
class SplitLabels:
    """Region of every atlas site for one ``(ε, C)``."""

    atlas: LatticeAtlas
    epsilon: float
    C: float
    delta: float
    delta1: float
    region: np.ndarray
    disc: np.ndarray

    def mask(self, region: Region) -> np.ndarray:
        if isinstance(region, tuple):
            name, j = region
            if name != "S2" or not 1 <= int(j) <= 2 * self.atlas.q:
                raise ParameterError(f"Unknown spectral region {region!r}.")
            return self.disc == int(j)
        if region not in REGION_CODES:
            raise ParameterError(f"Unknown spectral region {region!r}.")
        return self.region == REGION_CODES[region]

    def indices(self, region: Region) -> np.ndarray:
        return np.flatnonzero(self.mask(region))

    @staticmethod
    def rotation_invariant(region: Region) -> bool:
        return not isinstance(region, tuple)

    def label(self, index: int) -> str:
        code = int(self.region[index])
        if code == 2:
            return f"S2j({int(self.disc[index])})"
        return f"S{code}"

    def counts(self) -> Dict[str, int]:
        return {
            name: int(np.count_nonzero(self.region == code)) for name, code in REGION_CODES.items()
        }

    @property
    def consistent(self) -> bool:
        """``2δ + δ^2 < δ_1^2``, i.e. ``C ε^{1/2} < 1``."""
        return 2.0 * self.delta + self.delta**2 < self.delta1**2

    def header(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "C": self.C,
            "delta": self.delta,
            "delta1": self.delta1,
            "counts": self.counts(),
        }


def classify_spectrum(
    atlas: LatticeAtlas,
    epsilon: float,
    C: float = DEFAULT_C,
    strict: bool = True,
    logger: Optional[Logger] = None,
) -> SplitLabels:
    """
    Label every site S0, S1 or S2 (with its disc).

    Raises:
        ParameterError: non-positive ``ε`` or ``C``, or (strict mode) the
            consistency condition ``ε^{1/2} < 1/C`` fails.
    """
    if not epsilon > 0.0 or not C > 0.0:
        raise ParameterError(f"ε and C must be positive, got ε={epsilon}, C={C}.")
    if strict and not np.sqrt(epsilon) < 1.0 / C:
        raise ParameterError(
            f"ε^(1/2) = {np.sqrt(epsilon):.4g} must stay below 1/C = {1.0 / C:.4g}."
        )
    log = logger if logger is not None else atlas.logger
    delta = C * float(np.sqrt(epsilon))
    delta1 = float(np.sqrt(3.0 * delta))
    region, disc = _classify_points(atlas.embed, atlas.q, delta, delta1)
    labels = SplitLabels(atlas, float(epsilon), float(C), delta, delta1, region, disc)
    log.info(
        "Split ε=%.4g C=%.3g: δ=%.4g δ₁=%.4g %s",
        epsilon,
        C,
        delta,
        delta1,
        labels.counts(),
    )
    return labels


def generator_sums(q: int, terms: int) -> np.ndarray:
    """Distinct non-zero embeddings of sums of ``terms`` unit vectors."""
    gens = cyclotomic_data(q).generators
    sums = np.zeros((1, gens.shape[1]), dtype=np.int64)
    for _ in range(terms):
        sums = np.unique((sums[:, None, :] + gens[None]).reshape(-1, gens.shape[1]), axis=0)
    sums = sums[np.any(sums, axis=1)]
    return sums @ cyclotomic_data(q).basis_embed


def shift_margin(q: int, delta: float, delta1: float) -> float:
    """
    Distance by which every shifted disc clears the annulus.

    For ``v = k_j + s`` with ``s`` a two- or four-sum and ``v`` not itself a
    unit vector, ``||v|^2 - 1| - 2|v|δ_1 - δ_1^2`` bounds ``||v + k'|^2 - 1|``
    from below over ``|k'| <= δ_1``. The margin is the smallest such bound
    minus ``δ``; when it is positive, ``S2`` shifted by those sums misses
    ``S1`` on every atlas.
    """
    shifts = np.vstack([generator_sums(q, 2), generator_sums(q, 4)])
    units = unit_vectors(q)
    points = (units[:, None, :] + shifts[None]).reshape(-1, 2)
    to_unit = np.linalg.norm(points[:, None, :] - units[None], axis=2).min(axis=1)
    points = points[to_unit > 1e-9]
    norm = np.linalg.norm(points, axis=1)
    bound = np.abs(norm**2 - 1.0) - 2.0 * norm * delta1 - delta1**2
    return float(bound.min() - delta)


@dataclass
class DisjointnessReport:
    """Violations of the region-shift rules; empty when the split is sound."""

    checks: Dict[str, int] = field(default_factory=dict)
    violations: List[Dict[str, Any]] = field(default_factory=list)
    margin: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.violations


def check_disjointness(
    labels: SplitLabels, logger: Optional[Logger] = None
) -> DisjointnessReport:
    """
    Verify the shift rules of the split on the atlas.

    * ``S1 + (k_j + k_l)`` misses ``S1 ∪ S2`` for every non-zero two-sum;
    * ``S2 + (two- or four-sum)`` misses ``S1``.

    Shifted points are classified geometrically, so they need not belong to
    the atlas. The zero shift ``k_j + k_{j+q}`` is excluded. A failed
    consistency condition is reported as a violation as well.
    """
    atlas = labels.atlas
    log = logger if logger is not None else atlas.logger
    report = DisjointnessReport(margin=shift_margin(atlas.q, labels.delta, labels.delta1))
    if not labels.consistent:
        report.violations.append(
            {
                "check": "consistency",
                "detail": f"2δ + δ² = {2 * labels.delta + labels.delta**2:.6g} "
                f"is not below δ₁² = {labels.delta1**2:.6g}",
            }
        )
    two = generator_sums(atlas.q, 2)
    four = generator_sums(atlas.q, 4)
    rules = [
        ("S1+two", labels.indices("S1"), two, (1, 2)),
        ("S2+two", labels.indices("S2"), two, (1,)),
        ("S2+four", labels.indices("S2"), four, (1,)),
    ]
    for name, sites, shifts, forbidden in rules:
        found = 0
        if sites.size and shifts.size:
            points = (atlas.embed[sites][:, None, :] + shifts[None]).reshape(-1, 2)
            region, _ = _classify_points(points, atlas.q, labels.delta, labels.delta1)
            bad = np.flatnonzero(np.isin(region, forbidden))
            found = int(bad.size)
            for flat in bad[: max(0, MAX_REPORTED - len(report.violations))]:
                site = int(sites[flat // shifts.shape[0]])
                report.violations.append(
                    {
                        "check": name,
                        "site": [int(a) for a in atlas.canon[site]],
                        "shift": [float(v) for v in shifts[flat % shifts.shape[0]]],
                        "lands_in": f"S{int(region[flat])}",
                    }
                )
        report.checks[name] = found
    if report.violations:
        log.warning(
            "Split ε=%.4g has %d shift violations", labels.epsilon, sum(report.checks.values())
        )
    elif report.margin <= 0.0:
        log.info(
            "Split ε=%.4g: shift rules hold on this atlas only (margin %.3g)",
            labels.epsilon,
            report.margin,
        )
    return report
