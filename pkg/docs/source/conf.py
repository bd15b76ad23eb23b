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

# Configuration file for the Sphinx documentation builder.
import importlib
import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

project = "qpf"
copyright = "2025, qpf authors"
author = "qpf authors"
release = "0.1.0"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosummary",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx.ext.viewcode",
]

try:
    import myst_parser  # noqa: F401

    extensions.append("myst_parser")
except ModuleNotFoundError:
    pass

autosummary_generate = True
napoleon_google_docstring = True
napoleon_numpy_docstring = False
autodoc_typehints = "none"
autodoc_type_aliases = {"T": "typing.Any", "S": "typing.Any", "E": "typing.Any"}

templates_path = ["_templates"]
exclude_patterns = []

try:
    importlib.import_module("furo")
    html_theme = "furo"
except ModuleNotFoundError:
    html_theme = "alabaster"

nitpick_ignore_regex = [
    ("py:class", r".*\.[TSEXY]"),
    ("py:obj", r".*\.[TSEXY]"),
    ("py:class", r"numpy\..*"),
    ("py:class", r"scipy\..*"),
]
