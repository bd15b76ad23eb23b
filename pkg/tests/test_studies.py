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


"""Parameter parsing and the studies behind each command, run in-process."""

import json
import math

import pytest

from qpf.configurations import COMMANDS
from qpf.data_io import SolutionJsonSource
from qpf.exceptions import ConfigurationError
from qpf.newton_solver import GalerkinSystem
from qpf.studies import study_for
from qpf.studies.study import (
    parse_bool,
    parse_int,
    parse_optional_real,
    parse_real,
    parse_real_list,
)


def test_parse_real_expressions():
    assert parse_real("sqrt(5)") == pytest.approx(math.sqrt(5.0))
    assert parse_real("√5") == pytest.approx(math.sqrt(5.0))
    assert parse_real("1e-3") == pytest.approx(1e-3)
    assert parse_real(2) == 2.0
    assert parse_optional_real(None) is None
    for bad in (True, "abc", "nan", "1/0"):
        with pytest.raises(ConfigurationError):
            parse_real(bad)


def test_parse_scalars():
    assert parse_int("3") == 3
    assert parse_int(4.0) == 4
    with pytest.raises(ConfigurationError):
        parse_int(2.5)
    with pytest.raises(ConfigurationError):
        parse_int(False)
    assert parse_bool("no") is False
    assert parse_bool("True") is True
    with pytest.raises(ConfigurationError):
        parse_bool("maybe")
    assert parse_real_list("0.1, 0.05 0.025") == pytest.approx([0.1, 0.05, 0.025])
    assert parse_real_list(0.5) == [0.5]


def test_study_registry():
    for command in COMMANDS:
        assert study_for(command).command == command
    with pytest.raises(ConfigurationError):
        study_for("plot")


def test_resolve_parameters():
    lattice = study_for("lattice")
    resolved = lattice.resolve_parameters({"nmax": "3", "kcut": "sqrt(5)"})
    assert resolved["nmax"] == 3
    assert resolved["q"] == 4
    assert resolved["kcut"] == pytest.approx(math.sqrt(5.0))
    assert resolved["check"] is True
    with pytest.raises(ConfigurationError, match="bogus"):
        lattice.resolve_parameters({"bogus": 1})
    with pytest.raises(ConfigurationError, match="nmax"):
        lattice.resolve_parameters({"nmax": "many"})


def test_lattice_study(tmp_path):
    study = study_for("lattice")(tmp_path)
    result = study.run({"nmax": 3, "pairs": 500}, seed=3)
    assert set(result.outputs) == {"atlas", "census", "properties"}
    assert result.violations == []
    assert result.summary["sites"] == 129
    assert (tmp_path / "census.csv").read_text().splitlines()[1].startswith("1,8,")


def test_expand_study(tmp_path):
    result = study_for("expand")(tmp_path).run({"q": 4})
    assert result.violations == []
    assert result.summary["lambda2"] == 21.0
    record = json.loads((tmp_path / "bundle.json").read_text())
    assert record["q"] == 4
    assert "lambda4_report" in record


def test_split_study_reports_inconsistent_scale(tmp_path):
    result = study_for("split")(tmp_path).run({"eps": 0.5, "nmax": 4, "strict": False})
    assert result.violations
    assert result.violations[0]["check"] == "consistency"
    stored = json.loads((tmp_path / "violations.json").read_text())
    assert stored[0]["check"] == "consistency"


def test_split_study_consistent_scale(tmp_path):
    result = study_for("split")(tmp_path).run({"eps": 0.01, "nmax": 4})
    assert result.violations == []
    labels = json.loads((tmp_path / "labels.json").read_text())
    assert len(labels["labels"]) == 321


def test_solve_study_with_image(tmp_path):
    params = {
        "lambda": 0.05,
        "nmax": 6,
        "kcut": None,
        "tol": 1e-10,
        "render": "solution.pgm",
        "window": 6.0,
        "resolution": 8,
    }
    result = study_for("solve")(tmp_path).run(params)
    assert result.violations == []
    assert result.summary["converged"]
    assert result.summary["unit_coefficient"] > 0.0
    assert set(result.outputs) == {"solution", "image"}
    assert (tmp_path / "solution.pgm").read_bytes().startswith(b"P5\n8 8\n65535\n")

    field, lam, report = SolutionJsonSource().get_data(tmp_path / "solution.json")
    system = GalerkinSystem.from_truncation(4, 6)
    residual = system.norm(system.residual(system.from_field(field), lam))
    assert abs(residual - report["final_residual"]) <= 1e-14

    render = study_for("render")(tmp_path / "again")
    render.run({"in": str(tmp_path / "solution.json"), "resolution": 4, "window": 6.0})
    assert (tmp_path / "again" / "render.pgm").exists()
    assert (tmp_path / "again" / "render.pgm.json").exists()


def test_render_needs_input(tmp_path):
    with pytest.raises(ConfigurationError):
        study_for("render")(tmp_path).run({})


def test_solve_init_file_needs_path(tmp_path):
    with pytest.raises(ConfigurationError):
        study_for("solve")(tmp_path).run({"nmax": 2, "kcut": None, "init": "file"})


def test_continue_needs_steps(tmp_path):
    with pytest.raises(ConfigurationError):
        study_for("continue")(tmp_path).run({"steps": 0})


def test_split_study_reports_annulus_leaks(tmp_path):
    """At ε = 1e-4 on N_k <= 12 shifted discs reach S1 and b U₂ leaks into it."""
    params = {"eps": 1e-4, "nmax": 12, "trials": 10}
    result = study_for("split")(tmp_path).run(params, seed=1)
    checks = {violation["check"] for violation in result.violations}
    assert {"S2+four", "projection_identity"} <= checks
    assert result.summary["counts"]["S1"] > 0
    assert result.summary["shift_margin"] < 0.0
    assert (tmp_path / "identities.json").exists()


def test_split_study_schur_estimates(tmp_path):
    result = study_for("split")(tmp_path).run({"eps": 0.01, "nmax": 4, "schur_trials": 2})
    assert result.violations == []
    assert set(result.summary["schur"]) == {"c0_u2", "c1_u2", "c0_f", "c1_f"}
    stored = json.loads((tmp_path / "schur.json").read_text())
    assert stored == pytest.approx(result.summary["schur"])


def test_blocks_study_default_sweep(tmp_path):
    """The default sweep passes; the stated weight constant fails for p = 3, K = 2."""
    result = study_for("blocks")(tmp_path).run({"weight_p": 3.0, "weight_K": 2.0})
    assert [violation["check"] for violation in result.violations] == ["weight_ratio_constant"]
    assert result.summary["K_spread"] <= 2.0
    assert result.summary["weight_ratio"]["worst"] == pytest.approx(26.0)
    summary = json.loads((tmp_path / "blocks_summary.json").read_text())
    assert summary["single_constant"] and summary["lower_bound_isolated"]
    assert len((tmp_path / "blocks.csv").read_text().splitlines()) == 1 + 3 * 64 * 8
    assert (tmp_path / "weight_ratio.json").exists()


def test_blocks_study_without_isolated_eigenvalues(tmp_path):
    result = study_for("blocks")(tmp_path).run({"eps": [0.05], "points": 4, "gap_floor": 100.0})
    assert [violation["check"] for violation in result.violations] == ["block_defect_constant"]


def test_solve_study_flags_wrong_amplitude(tmp_path):
    """Newton from zero stays on the trivial state, far from u^(k₁) = ε."""
    params = {"lambda": 0.05, "nmax": 6, "kcut": None, "init": "zero"}
    result = study_for("solve")(tmp_path).run(params)
    assert result.summary["converged"]
    assert result.summary["unit_coefficient"] == 0.0
    assert [violation["check"] for violation in result.violations] == ["unit_coefficient"]


def test_solve_study_below_onset(tmp_path):
    params = {"lambda": -0.05, "nmax": 4, "kcut": None, "init": "zero"}
    result = study_for("solve")(tmp_path).run(params)
    assert result.violations == []
    assert result.summary["isolation"]["ok"]
    assert result.summary["isolation"]["bound"] == pytest.approx(20.0)


def test_solve_study_fixed_point(tmp_path):
    params = {"lambda": 0.05, "nmax": 6, "kcut": None, "method": "fixed_point"}
    result = study_for("solve")(tmp_path).run(params)
    assert result.violations == []
    assert result.summary["converged"]
    assert result.summary["first_iterate"] > 0.0
