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

"""Logging front-end shared by every qpf component.

Components and module-level operations take an optional ``logger`` keyword.
When it is omitted a :class:`Logger` bound to the process-wide ``"qpf"``
logging channel is created, so solver traces, atlas statistics and diagnostic
warnings all end up on the same handlers.
"""

import logging
import os
import sys
from typing import Optional

DEFAULT_FORMATTER = logging.Formatter(
    "%(asctime)s - %(levelname)-8s - %(message)s (%(module)s)"
)

LOG_FILE_ENV = "QPF_LOG_FILE"


class Logger:
    """
    Thin wrapper around :class:`logging.Logger` with qpf defaults.

    The first instance created in a process installs INFO level and a stdout
    handler on the ``"qpf"`` channel; later instances reuse that configuration
    unless they pass an explicit level. If ``QPF_LOG_FILE`` is set, a file
    handler is attached once as well.

    Attribute access falls through to the wrapped logger, so ``info``,
    ``debug`` and friends are used directly. Instances survive pickling: the
    wrapped logger is dropped from the state and looked up again by name.
    """

    logger: logging.Logger
    verbosity_map = {
        "DEBUG": logging.DEBUG,
        "INFO": logging.INFO,
        "WARNING": logging.WARNING,
        "ERROR": logging.ERROR,
        "CRITICAL": logging.CRITICAL,
    }

    _initialized = False

    def __init__(
        self,
        level: Optional[str] = None,
        console_output: Optional[bool] = None,
        logger: Optional[logging.Logger] = None,
        name: str = "qpf",
        formatter: Optional[logging.Formatter] = None,
    ):
        """
        Bind to ``name`` (or to an explicit ``logger``) and apply settings.

        :param level: One of DEBUG, INFO, WARNING, ERROR, CRITICAL. Changing it
            changes the level of the shared channel for every component.
        :param console_output: Attach (True) or detach (False) the stdout handler.
        :param logger: Existing logging.Logger to wrap instead of ``name``.
        :param name: Channel name, ``"qpf"`` by default.
        :param formatter: Formatter for handlers installed by this instance.
        """
        self.formatter = formatter or DEFAULT_FORMATTER
        self.logger = logger if logger is not None else logging.getLogger(name)
        self.name = name

        first_use = logger is None and not type(self)._initialized
        if first_use:
            level = level or "INFO"
            if console_output is None:
                console_output = True

        if level is not None:
            self.set_verbose_level(level)
        if console_output is not None:
            self.set_console_output(console_output)
        if first_use:
            log_file = os.environ.get(LOG_FILE_ENV)
            if log_file:
                self.set_file_output(log_file)

        type(self)._initialized = True

    def set_verbose_level(self, verbosity_level: str) -> None:
        """Set the channel level; unknown names are reported and ignored."""
        if verbosity_level not in self.verbosity_map:
            self.logger.error(
                "Unknown verbosity level '%s'; expected one of %s.",
                verbosity_level,
                list(self.verbosity_map),
            )
            return
        previous = self.logger.level
        self.logger.setLevel(self.verbosity_map[verbosity_level])
        if previous != self.logger.level:
            self.logger.debug(
                "Log level %s -> %s",
                logging.getLevelName(previous),
                verbosity_level,
            )

    def _stdout_handlers(self) -> list:
        return [
            handler
            for handler in self.logger.handlers
            if isinstance(handler, logging.StreamHandler)
            and getattr(handler, "stream", None) is sys.stdout
        ]

    def set_console_output(self, enable: bool = True) -> None:
        """Attach or detach the stdout handler (never duplicated)."""
        existing = self._stdout_handlers()
        if enable and not existing:
            handler = logging.StreamHandler(sys.stdout)
            handler.setFormatter(self.formatter)
            self.logger.addHandler(handler)
        elif not enable:
            for handler in existing:
                self.logger.removeHandler(handler)

    def set_file_output(self, file_path: str) -> None:
        """Add a file handler; failures are logged, not raised."""
        try:
            handler = logging.FileHandler(file_path)
        except OSError as exc:
            self.logger.error("Cannot open log file %s: %s", file_path, exc)
            return
        handler.setFormatter(self.formatter)
        self.logger.addHandler(handler)

    def __getattr__(self, name):
        logger = self.__dict__.get("logger")
        if logger is None:
            logger = logging.getLogger(self.__dict__.get("name", "qpf"))
            self.__dict__["logger"] = logger
        return getattr(logger, name)

    def __getstate__(self):
        state = self.__dict__.copy()
        state["logger"] = None
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.logger = logging.getLogger(state.get("name") or "qpf")
