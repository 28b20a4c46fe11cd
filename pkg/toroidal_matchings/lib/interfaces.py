"""Callable shapes shared by the bijection, the checks and the harness."""

from collections.abc import Callable
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from toroidal_matchings.lib.matching import PerfectMatching

type Fn[*T, U] = Callable[[*T], U]
type Transformation[T] = Fn[T, T]
type Predicate[T] = Fn[T, bool]

# Φ and anything standing in for it (corrupted variants in mutation tests).
type PhiFn = Transformation[PerfectMatching]
