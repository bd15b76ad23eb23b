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

# Description: Custom exceptions for the qpf package.


class QpfError(Exception):
    """Base class of every error raised on purpose by qpf."""

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class InvalidOrderError(QpfError):
    """Raised when the rotation order q is below 4."""


class CapacityError(QpfError):
    """Raised when an atlas, key packing or operator exceeds its size limit."""


class NotInAtlasError(QpfError):
    """Raised when a wave vector is looked up outside the generated atlas."""


class ParameterError(QpfError):
    """Raised for out-of-domain numerical parameters (ε, C, s, k′, ...)."""


class OutOfRangeError(QpfError):
    """Raised when λ admits no small-amplitude ε (negative discriminant)."""


class TruncationError(QpfError):
    """Raised when a strict product loses coefficient mass to the truncation."""

    def __init__(self, message, loss: float = 0.0):
        super().__init__(message)
        self.loss = loss


class SolvabilityError(QpfError):
    """Raised when a unit-circle coefficient fails to vanish in the expansion."""


class UnclassifiedAtlasError(QpfError):
    """Raised when spectral labels do not belong to the field's atlas."""


class SupportError(QpfError):
    """Raised when a field carries mass outside the region an operator accepts."""


class SingularBlockError(QpfError):
    """Raised when the E0 diagonal block of L_eps cannot be factorized."""


class FactorizationError(QpfError):
    """Raised when a sparse or dense factorization fails."""


class SingularJacobianError(QpfError):
    """Raised when the Newton Jacobian is numerically singular."""


class ConvergenceError(QpfError):
    """Raised when an iterative kernel (Jacobi sweeps) exhausts its budget."""


class DivergenceError(QpfError):
    """Raised when fixed-point iterates grow for five consecutive steps."""


class ContinuationError(QpfError):
    """Raised when a continuation step fails; keeps the failing λ."""

    def __init__(self, message, lam: float, cause: Exception | None = None):
        super().__init__(message)
        self.lam = lam
        self.cause = cause


class ConfigurationError(QpfError):
    """Raised when a run configuration is malformed."""


class OutputLockedError(QpfError):
    """Raised when another run holds the lock of the output directory."""
