"""Multisymplectic field theory workbench.

Expressions use the grammar of the theory files: x_0, y_1, v_1_0, p_1_0 (p^0_1), pe, q_0_1.
"""

import json
from dataclasses import dataclass
from typing import Optional

from . import _core
from ._core import (
    Expr,
    MultisymError,
    chart_coordinates,
    chart_dimension,
    momenta,
    parse,
    parse_on,
)

__all__ = [
    "Expr",
    "MultisymError",
    "Result",
    "chart_coordinates",
    "chart_dimension",
    "momenta",
    "parse",
    "parse_on",
    "run",
]


@dataclass
class Result:
    report: Optional[dict]
    exit_code: int
    error: Optional[str]

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


def run(command, theory, samples=16, tol=None, latex=False, connection="trivial", grid=None):
    """Runs derive, classify, verify or solve on a theory file, like the CLI."""
    text, code, err = _core._run(command, str(theory), samples, tol, latex, connection, grid)
    return Result(json.loads(text) if text is not None else None, code, err)

