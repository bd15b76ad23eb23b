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


from ._serialization import canonical_json_bytes, csv_cell, file_sha256, to_jsonable
from .data_io import DataSink, DataSource
from .files import (
    AtlasJsonSink,
    BlockCsvSink,
    BranchCsvSink,
    BundleJsonSink,
    CensusCsvSink,
    CsvTableSink,
    DivisorCsvSink,
    FieldJsonSink,
    FieldJsonSource,
    JsonReportSink,
    LabelMapJsonSink,
    PgmSink,
    SolutionJsonSink,
    SolutionJsonSource,
    atlas_record,
    census_rows,
    divisor_rows,
    field_from_record,
    field_record,
    pgm_bytes,
)

__all__ = [
    "AtlasJsonSink",
    "BlockCsvSink",
    "BranchCsvSink",
    "BundleJsonSink",
    "CensusCsvSink",
    "CsvTableSink",
    "DataSink",
    "DataSource",
    "DivisorCsvSink",
    "FieldJsonSink",
    "FieldJsonSource",
    "JsonReportSink",
    "LabelMapJsonSink",
    "PgmSink",
    "SolutionJsonSink",
    "SolutionJsonSource",
    "atlas_record",
    "canonical_json_bytes",
    "census_rows",
    "csv_cell",
    "divisor_rows",
    "field_from_record",
    "field_record",
    "file_sha256",
    "pgm_bytes",
    "to_jsonable",
]
