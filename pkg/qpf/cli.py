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


"""Command line interface for qpf."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

from qpf.configurations import RunConfig, apply_overrides, load_run_config
from qpf.data_io import JsonReportSink, file_sha256
from qpf.exceptions import OutputLockedError, QpfError
from qpf.logger import Logger
from qpf.studies import study_for

EXIT_SUCCESS = 0
EXIT_ERROR = 1
EXIT_VIOLATIONS = 2
EXIT_USAGE = 64

LOCK_NAME = ".qpf.lock"
MANIFEST_NAME = "manifest.json"


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code 64 on errors."""

    def error(self, message: str) -> NoReturn:  # noqa: D401 - argparse interface
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _get_version() -> str:
    """Return the package version from version.txt."""
    version_file = Path(__file__).resolve().parents[1] / "version.txt"
    try:
        namespace: dict[str, str] = {}
        exec(version_file.read_text(), namespace)  # pylint: disable=exec-used
        return namespace.get("__version__", "unknown")
    except OSError:  # pragma: no cover - installed without version.txt
        return "unknown"


def _configure_logger(verbose: bool, quiet: bool) -> Logger:
    level = "INFO"
    if verbose:
        level = "DEBUG"
    elif quiet:
        level = "ERROR"
    return Logger(level=level)


def _global_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--out-dir", dest="out_dir", help="Output directory")
    common.add_argument("--seed", type=int, help="Seed of randomized checks")
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        metavar="key=value",
        help="Override a parameter (value read as YAML)",
    )
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument("-q", "--quiet", action="store_true", help="Only show errors")
    return common


def _add(sub: argparse.ArgumentParser, *flags: str, **kwargs: Any) -> None:
    sub.add_argument(*flags, default=argparse.SUPPRESS, **kwargs)


def _parse_args(argv: Optional[List[str]]) -> argparse.Namespace:
    common = _global_options()
    parser = _ArgumentParser(prog="qpf", parents=[common])
    parser.add_argument("--version", action="version", version=_get_version())
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[common])

    p = command("lattice", "Generate an atlas with its census and checks")
    _add(p, "--q", type=int)
    _add(p, "--nmax", type=int)
    _add(p, "--kcut")
    _add(p, "--pairs", type=int)
    _add(p, "--no-check", dest="check", action="store_false")

    p = command("divisors", "Small-divisor spectrum and decay fit")
    _add(p, "--q", type=int)
    _add(p, "--nmax", type=int)
    _add(p, "--kcut")

    p = command("expand", "Formal asymptotic expansion")
    _add(p, "--q", type=int)
    _add(p, "--residual-eps", dest="residual_eps")

    p = command("split", "Spectral splitting and region-shift checks")
    _add(p, "--q", type=int)
    _add(p, "--eps")
    _add(p, "--C")
    _add(p, "--nmax", type=int)
    _add(p, "--kcut")
    _add(p, "--no-strict", dest="strict", action="store_false")
    _add(p, "--trials", type=int)
    _add(p, "--schur-trials", dest="schur_trials", type=int)

    p = command("blocks", "Block eigenvalue sweep")
    _add(p, "--q", type=int)
    _add(p, "--eps", nargs="+")
    _add(p, "--points", type=int)
    _add(p, "--C")
    _add(p, "--gap-floor", dest="gap_floor")
    _add(p, "--inverse-nmax", dest="inverse_nmax", type=int)
    _add(p, "--inverse-kcut", dest="inverse_kcut")
    _add(p, "--weight-p", dest="weight_p")
    _add(p, "--weight-K", dest="weight_K")

    p = command("solve", "Solve the truncated steady equation")
    _add(p, "--q", type=int)
    _add(p, "--lambda", dest="lambda")
    _add(p, "--nmax", type=int)
    _add(p, "--kcut")
    _add(p, "--tol")
    _add(p, "--max-iter", dest="max_iter", type=int)
    _add(p, "--init", choices=["asymptotic", "zero", "file"])
    _add(p, "--init-file", dest="init_file")
    _add(p, "--method", choices=["newton", "fixed_point"])
    _add(p, "--linear-solver", dest="linear_solver", choices=["auto", "dense", "iterative"])
    _add(p, "--out")
    _add(p, "--render")
    _add(p, "--window")
    _add(p, "--resolution", type=int)

    p = command("continue", "Continuation in λ")
    _add(p, "--q", type=int)
    _add(p, "--lambda-start", dest="lambda_start")
    _add(p, "--lambda-end", dest="lambda_end")
    _add(p, "--steps", type=int)
    _add(p, "--nmax", type=int)
    _add(p, "--kcut")
    _add(p, "--tol")
    _add(p, "--max-iter", dest="max_iter", type=int)
    _add(p, "--out")

    p = command("render", "Render a field file as PGM")
    _add(p, "--in", dest="in")
    _add(p, "--window")
    _add(p, "--resolution", type=int)
    _add(p, "--out")

    args = parser.parse_args(argv)
    if args.command is None and not getattr(args, "config", None):
        parser.error("a command (or --config with a command) is required")
    return args


GLOBAL_KEYS = {"command", "out_dir", "seed", "config", "overrides", "verbose", "quiet"}


def _build_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if getattr(args, "config", None) else RunConfig()
    if args.command is not None:
        config.command = args.command
    flags = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS}
    config.parameters.update(flags)
    if hasattr(args, "seed"):
        config.seed = args.seed
    if hasattr(args, "out_dir"):
        config.output_dir = args.out_dir
    apply_overrides(config, getattr(args, "overrides", []))
    return config.validate()


class _OutputLock:
    """Exclusive ``.qpf.lock`` file inside the output directory."""

    def __init__(self, directory: Path):
        self.path = directory / LOCK_NAME

    def __enter__(self) -> "_OutputLock":
        try:
            handle = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as exc:
            raise OutputLockedError(
                f"{self.path.parent} is locked by another run ({self.path})."
            ) from exc
        with os.fdopen(handle, "w") as stream:
            stream.write(f"{os.getpid()}\n")
        return self

    def __exit__(self, *exc_info) -> None:
        self.path.unlink(missing_ok=True)


def _manifest(config: RunConfig, result, directory: Path) -> Dict[str, Any]:
    files = {
        label: {
            "path": os.path.relpath(path, directory),
            "sha256": file_sha256(path),
        }
        for label, path in sorted(result.outputs.items())
    }
    return {
        "command": config.command,
        "parameters": result.parameters,
        "seed": config.seed,
        "version": _get_version(),
        "files": files,
        "violations": len(result.violations),
        "summary": result.summary,
    }


def run(config: RunConfig, logger: Optional[Logger] = None) -> int:
    """Execute one run; returns the exit code."""
    logger = logger if logger is not None else Logger()
    study_cls = study_for(config.command)
    directory = Path(config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    with _OutputLock(directory):
        study = study_cls(directory, logger=logger)
        result = study.run(config.parameters, config.seed)
        JsonReportSink(logger).send_data(
            _manifest(config, result, directory), directory / MANIFEST_NAME
        )
    return EXIT_VIOLATIONS if result.violations else EXIT_SUCCESS


def main(argv: Optional[List[str]] = None) -> None:
    args = _parse_args(argv)
    logger = _configure_logger(
        getattr(args, "verbose", False), getattr(args, "quiet", False)
    )
    try:
        config = _build_config(args)
        code = run(config, logger)
    except QpfError as exc:
        print(f"qpf: error: {exc.message}", file=sys.stderr)
        code = EXIT_ERROR
    sys.exit(code)


if __name__ == "__main__":  # pragma: no cover
    main()
