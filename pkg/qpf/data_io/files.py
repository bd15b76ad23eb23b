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


"""Concrete file formats of qpf runs."""

import csv
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from qpf.asymptotics import ExpansionBundle
from qpf.exceptions import ConfigurationError, NotInAtlasError
from qpf.newton_solver import SolveReport
from qpf.operator_analysis import SplitLabels
from qpf.quasilattice import LatticeAtlas, build_atlas
from qpf.spectral_field import SpectralField

from ._serialization import canonical_json_bytes, csv_cell
from .data_io import DataSink, DataSource, PathLike

PGM_MAXVAL = 65535


# encoders -----------------------------------------------------------------


def atlas_record(atlas: LatticeAtlas) -> Dict[str, Any]:
    """Header and site records in atlas order, i.e. sorted by ``(N, canon)``."""
    return {
        "header": atlas.header(),
        "sites": [
            {
                "canon": atlas.canon[i],
                "word": atlas.words[i],
                "x": atlas.embed[i, 0],
                "y": atlas.embed[i, 1],
                "norm2_coeffs": atlas.norm2_coeffs[i],
                "n": atlas.n_word[i],
            }
            for i in range(len(atlas))
        ],
    }


def field_record(field: SpectralField) -> Dict[str, Any]:
    """Non-zero coefficients keyed by canonical coordinates."""
    atlas = field.atlas
    return {
        "atlas_header": atlas.header(),
        "symmetric": field.symmetric,
        "truncation_loss": field.truncation_loss,
        "coeffs": [
            {"canon": atlas.canon[i], "value": field.coeffs[i]} for i in field.support
        ],
    }


def field_from_record(
    record: Mapping[str, Any], atlas: Optional[LatticeAtlas] = None
) -> SpectralField:
    """Inverse of :func:`field_record`; the atlas is rebuilt from the header if absent."""
    try:
        header = record["atlas_header"]
        entries = record["coeffs"]
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"Not a field record: missing {exc}.") from exc
    if atlas is None:
        atlas = build_atlas(int(header["q"]), int(header["n_max"]), header.get("k_cut"))
    coeffs = np.zeros(len(atlas))
    if entries:
        canon = np.array([entry["canon"] for entry in entries], dtype=np.int64)
        where = atlas.lookup(canon)
        if np.any(where < 0):
            raise NotInAtlasError("Field file has coefficients outside its atlas.")
        coeffs[where] = [float(entry["value"]) for entry in entries]
    return SpectralField(atlas, coeffs, symmetric=bool(record.get("symmetric", False)))


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"Cannot read {path}: {exc}") from exc


# JSON sinks ---------------------------------------------------------------


class JsonReportSink(DataSink[Any]):
    """Any JSON-compatible report (violation lists, summaries)."""

    def _send_data(self, data: Any, path: Path, **kwargs) -> None:
        path.write_bytes(canonical_json_bytes(data))

    @classmethod
    def input_data_type(cls) -> type:
        return dict


class AtlasJsonSink(DataSink[LatticeAtlas]):
    """Atlas header plus one record per site."""

    def _send_data(self, data: LatticeAtlas, path: Path, **kwargs) -> None:
        path.write_bytes(canonical_json_bytes(atlas_record(data)))

    @classmethod
    def input_data_type(cls) -> type:
        return LatticeAtlas


class FieldJsonSink(DataSink[SpectralField]):
    """Field file: atlas header and the non-zero coefficients."""

    def _send_data(self, data: SpectralField, path: Path, **kwargs) -> None:
        path.write_bytes(canonical_json_bytes(field_record(data)))

    @classmethod
    def input_data_type(cls) -> type:
        return SpectralField


class BundleJsonSink(DataSink[ExpansionBundle]):
    """Expansion orders, ``λ_2``, ``λ_4`` and the coefficient fields."""

    def _send_data(self, data: ExpansionBundle, path: Path, **kwargs) -> None:
        record = {
            "q": data.q,
            "lambda2": data.lambda2,
            "lambda4": data.lambda4,
            "a0": data.a0,
            "b0": data.b0,
            "u0": field_record(data.u0),
            "u1": field_record(data.u1),
            "u2": field_record(data.u2),
            "a": field_record(data.a_field),
            "b": field_record(data.b_field),
        }
        record.update(kwargs.get("extra", {}))
        path.write_bytes(canonical_json_bytes(record))

    @classmethod
    def input_data_type(cls) -> type:
        return ExpansionBundle


class LabelMapJsonSink(DataSink[SplitLabels]):
    """Split header and the region label of every site."""

    def _send_data(self, data: SplitLabels, path: Path, **kwargs) -> None:
        atlas = data.atlas
        record = {
            "header": dict(data.header(), atlas=atlas.header()),
            "labels": [
                {"canon": atlas.canon[i], "label": data.label(i)} for i in range(len(atlas))
            ],
        }
        path.write_bytes(canonical_json_bytes(record))

    @classmethod
    def input_data_type(cls) -> type:
        return SplitLabels


class SolutionJsonSink(DataSink[SpectralField]):
    """Field file of a solution plus its solve report."""

    def _send_data(self, data: SpectralField, path: Path, **kwargs) -> None:
        report: SolveReport = kwargs["report"]
        record = field_record(data)
        record["lambda"] = report.lam
        record["report"] = report.to_dict()
        path.write_bytes(canonical_json_bytes(record))

    @classmethod
    def input_data_type(cls) -> type:
        return SpectralField


# CSV sinks ----------------------------------------------------------------


class CsvTableSink(DataSink[Sequence[Mapping[str, Any]]]):
    """Rows of dictionaries under a fixed column list."""

    columns: Tuple[str, ...] = ()

    def _send_data(self, data: Sequence[Mapping[str, Any]], path: Path, **kwargs) -> None:
        columns = kwargs.get("columns", self.columns)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in data:
                writer.writerow([csv_cell(row.get(name)) for name in columns])

    @classmethod
    def input_data_type(cls) -> type:
        return list


class CensusCsvSink(CsvTableSink):
    """Shell census ``N, count, count / N^{q-1}``."""

    columns = ("N", "count", "ratio")


class DivisorCsvSink(CsvTableSink):
    """Per-shell minimum small divisor and the site attaining it."""

    columns = ("N", "min_divisor", "site_canon")


class BlockCsvSink(CsvTableSink):
    columns = (
        "eps",
        "kprime_x",
        "kprime_y",
        "j",
        "beta_j",
        "mu_j",
        "mu_j_minus_beta_minus_3eps2",
    )


class BranchCsvSink(CsvTableSink):
    columns = (
        "lambda",
        "norm_h0",
        "unit_coefficient",
        "converged",
        "iterations",
        "final_residual",
    )


# images -------------------------------------------------------------------


def pgm_bytes(values: np.ndarray) -> Tuple[bytes, float, float]:
    """16-bit binary PGM of ``values`` (row 0 at the top), with min and max."""
    values = np.asarray(values, dtype=float)
    low, high = float(values.min()), float(values.max())
    span = high - low
    scaled = np.zeros(values.shape) if span == 0.0 else (values - low) / span
    pixels = np.rint(scaled * PGM_MAXVAL).astype(">u2")
    height, width = values.shape
    header = f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + pixels.tobytes(), low, high


class PgmSink(DataSink[np.ndarray]):
    """
    Sampled field as a P5 image plus a sidecar ``<name>.json``.

    The sample matrix has ``y`` increasing with the row index; the image is
    flipped so that its top row is ``y = +window``.
    """

    def _send_data(self, data: np.ndarray, path: Path, **kwargs) -> None:
        payload, low, high = pgm_bytes(np.flipud(data))
        path.write_bytes(payload)
        sidecar = {
            "image": path.name,
            "width": int(data.shape[1]),
            "height": int(data.shape[0]),
            "maxval": PGM_MAXVAL,
            "min": low,
            "max": high,
            "window": kwargs.get("window"),
            "top_row": "y = +window",
        }
        self.sidecar_path(path).write_bytes(canonical_json_bytes(sidecar))

    @staticmethod
    def sidecar_path(path: PathLike) -> Path:
        path = Path(path)
        return path.with_name(path.name + ".json")

    @classmethod
    def input_data_type(cls) -> type:
        return np.ndarray


# sources ------------------------------------------------------------------


class FieldJsonSource(DataSource):
    """Reads a field file back into a :class:`SpectralField`."""

    def _get_data(self, path: PathLike, **kwargs) -> SpectralField:
        return field_from_record(_read_json(path), kwargs.get("atlas"))

    @classmethod
    def output_data_type(cls) -> type:
        return SpectralField


class SolutionJsonSource(DataSource):
    """Reads a solution file: the field, its λ and the stored report fields."""

    def _get_data(self, path: PathLike, **kwargs) -> Tuple[SpectralField, float, Dict]:
        record = _read_json(path)
        field = field_from_record(record, kwargs.get("atlas"))
        try:
            return field, float(record["lambda"]), dict(record["report"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path} is not a solution file: {exc}") from exc

    @classmethod
    def output_data_type(cls) -> type:
        return SpectralField


def census_rows(rows: List[Tuple[int, int, float]]) -> List[Dict[str, Any]]:
    return [{"N": n, "count": c, "ratio": r} for n, c, r in rows]


def divisor_rows(rows: List[Tuple[int, float, Any]]) -> List[Dict[str, Any]]:
    return [{"N": n, "min_divisor": m, "site_canon": canon} for n, m, canon in rows]
