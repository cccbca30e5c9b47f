"""Zero-testing: canonical check with a seeded random-evaluation fallback.

An expression is reported zero either because its canonical form is the
constant 0, or because it evaluates below tolerance at a batch of random
rational points (Schwartz-Zippel style).  Points draw every symbol from
nonzero rationals with magnitude in [1/3, 3]; evaluation failures (ln of a
nonpositive value, vanishing denominator) trigger a resample, up to a retry
budget per point.

The random stream is derived from the seed and the expression's structural
digest, so results do not depend on call order.
"""

from __future__ import annotations

import enum
import random
from fractions import Fraction

from .errors import EvaluationDomainError
from .expr import Expr, free_symbols, evaluate, to_expr

DEFAULT_SEED = 322377415
POINTS = 32
TOLERANCE = 1e-9
RETRIES = 10


class ZeroStatus(enum.Enum):
    CANONICAL_ZERO = "zero (canonical)"
    PROBABILISTIC_ZERO = "zero (probabilistic)"
    NONZERO = "nonzero"


def random_rational(rng: random.Random) -> Fraction:
    """Nonzero rational with magnitude in [1/3, 3]."""
    while True:
        value = Fraction(rng.randint(1, 12), rng.randint(1, 12))
        if Fraction(1, 3) <= value <= 3:
            break
    return -value if rng.random() < 0.5 else value


def zero_status(
    e,
    seed: int = DEFAULT_SEED,
    points: int = POINTS,
    tolerance: float = TOLERANCE,
    retries: int = RETRIES,
) -> ZeroStatus:
    e = to_expr(e)
    if e.is_zero_canonical():
        return ZeroStatus.CANONICAL_ZERO
    symbols = sorted(free_symbols(e), key=lambda s: s.name)
    rng = random.Random((seed << 16) ^ e.stable_digest())
    for _ in range(points):
        value = None
        for _ in range(retries):
            env = {s: random_rational(rng) for s in symbols}
            try:
                value = evaluate(e, env)
                break
            except EvaluationDomainError:
                continue
        if value is None:
            raise EvaluationDomainError(
                "could not find an admissible evaluation point"
            )
        if abs(value) >= tolerance:
            return ZeroStatus.NONZERO
    return ZeroStatus.PROBABILISTIC_ZERO


def is_zero(e, seed: int = DEFAULT_SEED) -> bool:
    """True when the expression is canonically or probabilistically zero."""
    return zero_status(e, seed=seed) is not ZeroStatus.NONZERO
