"""Rejection engines for sampling a joint law conditioned on linear statistics.

A :class:`ConditioningProblem` holds independent marginals X_1..X_n, a
weight vector w, and a target t for the statistic T = sum_i w_i X_i
(optionally a second statistic sum_i u_i X_i with its own target).  The
goal is one exact draw from L(X | T = t).

Four engines share that description:

* ``hard_rejection_sample`` draws the full vector and keeps it when the
  constraint holds exactly.
* ``dsh_discrete_sample`` draws every coordinate except a pivot block I,
  solves the constraint for the pivot exactly (there is at most one
  solution), and accepts with probability pmf(solution) / max pmf.
* ``dsh_continuous_sample`` is the density analogue; the Jacobian of the
  pivot map cancels in the ratio, leaving pdf(solution) / sup pdf.
* ``dsh_uniform_weight_sample`` covers pivots whose density is constant
  on their support: any completable first half is accepted outright, so
  the rejection step consumes no uniforms at all.

``soft_rejection_sample`` generalises the pivot acceptance to a caller
supplied weight q on first halves with upper bound q_sup, plus a caller
supplied second-half sampler.  Acceptance ratios are asserted to lie in
[0, 1] (up to float slack) and are never clamped; a genuine violation
raises :class:`InvalidRejection`.

Costs are whatever the :class:`CountingRng` records; completability is
checked before the acceptance uniform is drawn, so a dead first half
costs only its own draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidRejection, NonTerminating, SingularSystem
from .marginals import ContinuousMarginal, CountingRng, DiscreteMarginal

DEFAULT_MAX_ATTEMPTS = 10 ** 8

_REL_TOL = 1e-9
_RATIO_SLACK = 1e-9

# Draw hooks return (linear sum, second sum, values); values may be a
# sequence aligned with the drawn index list or a sparse {index: value}
# dict over the full coordinate space (absent keys are zero).
DrawHook = Callable[[CountingRng], tuple[float, float, Sequence | dict]]


@dataclass(frozen=True)
class SecondConstraint:
    """An additional statistic sum_i coeffs_i X_i pinned to ``target``."""

    coeffs: tuple[float, ...]
    target: float


@dataclass(frozen=True)
class Completion:
    """Result of solving the constraint for the pivot block."""

    values: tuple | None

    @property
    def completable(self) -> bool:
        return self.values is not None


_NOT_COMPLETABLE = Completion(None)


@dataclass(frozen=True)
class SampleRecord:
    """One accepted outcome with its rejection cost."""

    outcome: tuple
    attempts: int
    rng_calls: int


@dataclass(frozen=True)
class SparseVector:
    """A mostly-zero integer outcome stored as (index, value) pairs.

    Produced instead of a dense tuple when a draw hook reports sparse
    values; keeps accepted records small for huge coordinate spaces.
    """

    size: int
    entries: tuple[tuple[int, int], ...]

    def dense(self) -> tuple:
        out = [0] * self.size
        for i, v in self.entries:
            out[i] = v
        return tuple(out)


@dataclass(frozen=True, eq=False)
class ConditioningProblem:
    marginals: tuple
    weights: tuple
    target: float
    index_set: tuple[int, ...]
    second: SecondConstraint | None = None
    support_check: Callable[[int, float], bool] | None = None
    free_draw: DrawHook | None = None
    full_draw: DrawHook | None = None

    # derived, filled by __post_init__
    free_indices: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        n = len(self.marginals)
        if n == 0:
            raise ValueError("a conditioning problem needs at least one coordinate")
        if len(self.weights) != n:
            raise ValueError(f"{n} marginals but {len(self.weights)} weights")
        if self.second is not None and len(self.second.coeffs) != n:
            raise ValueError("second constraint coefficient count mismatch")
        idx = tuple(sorted(set(self.index_set)))
        if idx != tuple(self.index_set):
            object.__setattr__(self, "index_set", idx)
        if not idx or idx[0] < 0 or idx[-1] >= n:
            raise ValueError(f"pivot index set {self.index_set} out of range for n={n}")
        want = 2 if self.second is not None else 1
        if len(idx) != want:
            raise ValueError(
                f"pivot block must have {want} coordinate(s) for this constraint count, got {len(idx)}"
            )
        for i in idx:
            if self.weights[i] == 0:
                raise SingularSystem(f"pivot coordinate {i} has zero weight")
        if self.second is not None:
            w = self.weights
            u = self.second.coeffs
            i, j = idx
            det = w[i] * u[j] - w[j] * u[i]
            if det == 0:
                raise SingularSystem(
                    f"constraint matrix for pivot block {idx} is singular"
                )
            object.__setattr__(self, "_det", det)
        free = tuple(i for i in range(n) if i not in idx)
        object.__setattr__(self, "free_indices", free)
        discrete = all(isinstance(m, DiscreteMarginal) for m in self.marginals)
        object.__setattr__(self, "_discrete", discrete)
        ints = (
            discrete
            and all(float(w).is_integer() for w in self.weights)
            and float(self.target).is_integer()
            and (
                self.second is None
                or (
                    all(float(c).is_integer() for c in self.second.coeffs)
                    and float(self.second.target).is_integer()
                )
            )
        )
        object.__setattr__(self, "_exact_int", ints)
        sec = self.second
        object.__setattr__(
            self,
            "_free_plan",
            tuple(
                (self.marginals[i].sample, self.weights[i], sec.coeffs[i] if sec else 0)
                for i in free
            ),
        )
        object.__setattr__(
            self,
            "_full_plan",
            tuple(
                (self.marginals[i].sample, self.weights[i], sec.coeffs[i] if sec else 0)
                for i in range(n)
            ),
        )

    @property
    def size(self) -> int:
        return len(self.marginals)

    def is_discrete(self) -> bool:
        return self._discrete


def _draw(plan, rng: CountingRng):
    lin = 0
    sec = 0
    vals = []
    for sample, w, c in plan:
        v = sample(rng)
        vals.append(v)
        lin += w * v
        sec += c * v
    return lin, sec, vals


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _REL_TOL * max(1.0, abs(a), abs(b))


def _pivot_value(problem: ConditioningProblem, i: int, raw: float) -> float | None:
    """Snap and validate one pivot coordinate; None if out of support."""
    m = problem.marginals[i]
    if isinstance(m, DiscreteMarginal):
        k = round(raw)
        if not _close(k, raw):
            return None
        k = int(k)
        if not m.in_support(k):
            return None
        if problem.support_check is not None and not problem.support_check(i, k):
            return None
        return k
    if not m.in_support(raw):
        return None
    if problem.support_check is not None and not problem.support_check(i, raw):
        return None
    return raw


def _complete_linear(problem: ConditioningProblem, partial_lin) -> tuple | None:
    i = problem.index_set[0]
    w = problem.weights[i]
    resid = problem.target - partial_lin
    if problem._exact_int:
        q, r = divmod(int(resid), int(w))
        if r != 0:
            return None
        if not problem.marginals[i].in_support(q):
            return None
        if problem.support_check is not None and not problem.support_check(i, q):
            return None
        return (q,)
    y = _pivot_value(problem, i, resid / w)
    return None if y is None else (y,)


def _complete_two(problem: ConditioningProblem, partial_lin, partial_sec) -> tuple | None:
    i, j = problem.index_set
    w = problem.weights
    u = problem.second.coeffs
    det = problem._det
    r1 = problem.target - partial_lin
    r2 = problem.second.target - partial_sec
    num_i = r1 * u[j] - r2 * w[j]
    num_j = w[i] * r2 - u[i] * r1
    if problem._exact_int:
        qi, ri = divmod(int(num_i), int(det))
        qj, rj = divmod(int(num_j), int(det))
        if ri != 0 or rj != 0:
            return None
        for idx, val in ((i, qi), (j, qj)):
            if not problem.marginals[idx].in_support(val):
                return None
            if problem.support_check is not None and not problem.support_check(idx, val):
                return None
        return (qi, qj)
    yi = _pivot_value(problem, i, num_i / det)
    if yi is None:
        return None
    yj = _pivot_value(problem, j, num_j / det)
    return None if yj is None else (yi, yj)


def complete_from_sums(problem: ConditioningProblem, partial_lin, partial_sec=0) -> tuple | None:
    """Pivot values given the free coordinates' constraint sums; None if dead."""
    if problem.second is None:
        return _complete_linear(problem, partial_lin)
    return _complete_two(problem, partial_lin, partial_sec)


def free_partial_sums(problem: ConditioningProblem, vals) -> tuple:
    """Constraint sums of free-coordinate values (sequence or sparse dict)."""
    sec_coeffs = problem.second.coeffs if problem.second else None
    lin = 0
    sec = 0
    if isinstance(vals, dict):
        for i, v in vals.items():
            lin += problem.weights[i] * v
            if sec_coeffs:
                sec += sec_coeffs[i] * v
    else:
        for i, v in zip(problem.free_indices, vals):
            lin += problem.weights[i] * v
            if sec_coeffs:
                sec += sec_coeffs[i] * v
    return lin, sec


def solve_completion_linear(problem: ConditioningProblem, partial: Sequence) -> Completion:
    """Unique pivot value matching the target given free-coordinate values.

    ``partial`` lists the values of the non-pivot coordinates in ascending
    index order.  Exact integer arithmetic is used whenever the problem is
    integral; otherwise the solution is accepted to relative tolerance 1e-9.
    """
    lin, _ = free_partial_sums(problem, partial)
    vals = _complete_linear(problem, lin)
    return Completion(vals) if vals is not None else _NOT_COMPLETABLE


def solve_completion_two_constraint(problem: ConditioningProblem, partial: Sequence) -> Completion:
    """Pivot pair solving both constraints, via the exact 2x2 system."""
    lin, sec = free_partial_sums(problem, partial)
    vals = _complete_two(problem, lin, sec)
    return Completion(vals) if vals is not None else _NOT_COMPLETABLE


def _assemble(problem: ConditioningProblem, free_vals, pivot_vals):
    if isinstance(free_vals, dict):
        entries = {i: int(v) for i, v in free_vals.items() if v}
        for i, v in zip(problem.index_set, pivot_vals):
            if v:
                entries[i] = int(v)
        return SparseVector(problem.size, tuple(sorted(entries.items())))
    n = problem.size
    out = [0] * n
    for i, v in zip(problem.free_indices, free_vals):
        out[i] = _as_scalar(v)
    for i, v in zip(problem.index_set, pivot_vals):
        out[i] = _as_scalar(v)
    return tuple(out)


def _assemble_full(problem: ConditioningProblem, vals):
    if isinstance(vals, dict):
        return SparseVector(
            problem.size, tuple(sorted((i, int(v)) for i, v in vals.items() if v))
        )
    return tuple(_as_scalar(v) for v in vals)


def _as_scalar(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _constraint_met(problem: ConditioningProblem, lin, sec) -> bool:
    if problem._exact_int:
        if lin != problem.target:
            return False
        return problem.second is None or sec == problem.second.target
    if not _close(lin, problem.target):
        return False
    return problem.second is None or _close(sec, problem.second.target)


def _give_up(problem: ConditioningProblem, what: str, attempts: int, spent: int):
    raise NonTerminating(
        f"{what} on a size-{problem.size} problem exhausted {attempts} attempts",
        attempts=attempts,
        rng_calls=spent,
    )


def hard_rejection_sample(
    problem: ConditioningProblem,
    rng: CountingRng,
    *,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SampleRecord:
    """Draw the full vector until the constraint holds exactly.

    For continuous problems the hit event has probability zero and the
    attempt guard is what ends the call.
    """
    start = rng.calls
    draw = problem.full_draw
    plan = problem._full_plan
    for attempt in range(1, max_attempts + 1):
        if draw is not None:
            lin, sec, vals = draw(rng)
        else:
            lin, sec, vals = _draw(plan, rng)
        if _constraint_met(problem, lin, sec):
            return SampleRecord(_assemble_full(problem, vals), attempt, rng.calls - start)
    _give_up(problem, "hard rejection", max_attempts, rng.calls - start)


def _dsh_sample(
    problem: ConditioningProblem,
    rng: CountingRng,
    numerator: Callable,
    denominator: float,
    max_attempts: int,
    what: str,
) -> SampleRecord:
    start = rng.calls
    draw = problem.free_draw
    plan = problem._free_plan
    for attempt in range(1, max_attempts + 1):
        if draw is not None:
            lin, sec, vals = draw(rng)
        else:
            lin, sec, vals = _draw(plan, rng)
        pivot = complete_from_sums(problem, lin, sec)
        if pivot is None:
            continue
        num = numerator(pivot)
        if num <= 0.0:
            continue
        ratio = num / denominator
        if ratio > 1.0 + _RATIO_SLACK:
            raise InvalidRejection(
                f"{what} acceptance ratio {ratio} exceeds 1 at pivot {pivot}"
            )
        if rng.uniform() < ratio:
            return SampleRecord(_assemble(problem, vals, pivot), attempt, rng.calls - start)
    _give_up(problem, what, max_attempts, rng.calls - start)


def dsh_discrete_sample(
    problem: ConditioningProblem,
    rng: CountingRng,
    *,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SampleRecord:
    """Pivot-completion sampling for integer marginals.

    Accepts a completable first half with probability
    prod_i pmf_i(pivot_i) / prod_i max_pmf_i, which leaves every accepted
    outcome carrying the exact conditional law.  A dead or zero-mass
    pivot restarts without spending the acceptance uniform.
    """
    pivots = [problem.marginals[i] for i in problem.index_set]
    for m in pivots:
        if not isinstance(m, DiscreteMarginal):
            raise ValueError("dsh_discrete_sample needs discrete pivot marginals")
    denom = math.prod(m.max_pmf()[1] for m in pivots)

    def numerator(vals):
        return math.prod(m.pmf(v) for m, v in zip(pivots, vals))

    return _dsh_sample(problem, rng, numerator, denom, max_attempts, "discrete pivot sampling")


def dsh_continuous_sample(
    problem: ConditioningProblem,
    rng: CountingRng,
    *,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SampleRecord:
    """Pivot-completion sampling for real marginals.

    The pivot solve is linear, so the density of the induced statistic at
    the target is pdf(pivot) / |w|; the |w| appears in the bound as well
    and cancels, leaving the ratio pdf(pivot) / sup pdf.
    """
    pivots = [problem.marginals[i] for i in problem.index_set]
    for m in pivots:
        if not isinstance(m, ContinuousMarginal):
            raise ValueError("dsh_continuous_sample needs continuous pivot marginals")
    denom = math.prod(m.sup_pdf() for m in pivots)

    def numerator(vals):
        return math.prod(m.pdf(v) for m, v in zip(pivots, vals))

    return _dsh_sample(problem, rng, numerator, denom, max_attempts, "continuous pivot sampling")


def dsh_uniform_weight_sample(
    problem: ConditioningProblem,
    rng: CountingRng,
    *,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SampleRecord:
    """Pivot-completion sampling when the pivot density is flat.

    Caller asserts the pivot marginal is uniform on its support (discrete
    or continuous); then pdf(pivot) / sup pdf is 1 on the support and the
    acceptance step degenerates to the completability check, costing zero
    uniforms per attempt beyond the first-half draws.
    """
    start = rng.calls
    draw = problem.free_draw
    plan = problem._free_plan
    for attempt in range(1, max_attempts + 1):
        if draw is not None:
            lin, sec, vals = draw(rng)
        else:
            lin, sec, vals = _draw(plan, rng)
        pivot = complete_from_sums(problem, lin, sec)
        if pivot is None:
            continue
        return SampleRecord(_assemble(problem, vals, pivot), attempt, rng.calls - start)
    _give_up(problem, "uniform-pivot sampling", max_attempts, rng.calls - start)


def soft_rejection_sample(
    problem: ConditioningProblem,
    q: Callable[[Sequence], float],
    q_sup: float,
    rng: CountingRng,
    second_half: Callable[[Sequence, CountingRng], Sequence],
    *,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
) -> SampleRecord:
    """Accept a first half with probability q(a) / q_sup, then complete it.

    ``q`` is any nonnegative weight on first halves with finite positive
    supremum bounded by ``q_sup`` (a loose bound stays exact, only
    slower), and ``second_half`` draws the pivot block from the exact
    conditional law given the accepted first half.
    """
    if not (q_sup > 0.0 and math.isfinite(q_sup)):
        raise ValueError(f"q_sup must be a finite positive bound, got {q_sup}")
    start = rng.calls
    draw = problem.free_draw
    plan = problem._free_plan
    for attempt in range(1, max_attempts + 1):
        if draw is not None:
            lin, sec, vals = draw(rng)
        else:
            lin, sec, vals = _draw(plan, rng)
        qa = q(vals)
        if qa < 0.0:
            raise InvalidRejection(f"first-half weight q = {qa} is negative")
        if qa > q_sup * (1.0 + _RATIO_SLACK):
            raise InvalidRejection(f"first-half weight {qa} exceeds its bound {q_sup}")
        if qa == 0.0:
            continue
        if rng.uniform() < qa / q_sup:
            pivot = tuple(second_half(vals, rng))
            return SampleRecord(_assemble(problem, vals, pivot), attempt, rng.calls - start)
    _give_up(problem, "soft rejection", max_attempts, rng.calls - start)
