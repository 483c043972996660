"""File-size bound over rack-collection compositions, and derived curves.

The supported file size at an operating point (alpha, beta1, beta2) is the
minimum, over all ordered compositions u of m into parts <= f, of

    k*alpha + sum_i u_i * min(0, (d - prefix_i)*beta1 - (e/f)*alpha + (f - u_i)*beta2)

where prefix_i = u_1 + ... + u_{i-1}.  Everything here is exact rational
arithmetic; the minimum-bandwidth curve is obtained from a tiny 2-variable
linear program solved by enumerating vertices of the active-constraint lines.
"""

from __future__ import annotations

import csv
from fractions import Fraction
from typing import NamedTuple

from .params import CodeParams, TradeoffPoint, ROLE_CUSTOM, gamma_of

Composition = tuple[int, ...]


class InfeasibleAlphaError(ValueError):
    pass


def compositions(m: int, f: int) -> list[Composition]:
    """All ordered compositions of m into parts between 1 and f."""
    if m < 1 or f < 1:
        raise ValueError(f"need m >= 1 and f >= 1, got m={m}, f={f}")
    out: list[Composition] = []

    def extend(prefix: tuple[int, ...], remaining: int) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        for part in range(min(f, remaining), 0, -1):
            extend(prefix + (part,), remaining - part)

    extend((), m)
    return out


def bound_rhs(p: CodeParams, alpha, beta1, beta2, u) -> Fraction:
    """Right-hand side of the file-size bound for one composition."""
    alpha, beta1, beta2 = Fraction(alpha), Fraction(beta1), Fraction(beta2)
    epf = Fraction(p.e, p.f)
    total = p.k * alpha
    prefix = 0
    for part in u:
        term = (p.d - prefix) * beta1 - epf * alpha + (p.f - part) * beta2
        total += part * min(Fraction(0), term)
        prefix += part
    return total


class FileSizeBound(NamedTuple):
    value: Fraction
    minimizers: tuple[Composition, ...]


def max_file_size(p: CodeParams, alpha, beta1, beta2) -> FileSizeBound:
    """Largest file size the bound supports, with the minimizing compositions."""
    best: Fraction | None = None
    argmin: list[Composition] = []
    for u in compositions(p.m, p.f):
        v = bound_rhs(p, alpha, beta1, beta2, u)
        if best is None or v < best:
            best, argmin = v, [u]
        elif v == best:
            argmin.append(u)
    assert best is not None
    return FileSizeBound(best, tuple(argmin))


def feasible(p: CodeParams, file_size, alpha, beta1, beta2) -> bool:
    return Fraction(file_size) <= max_file_size(p, alpha, beta1, beta2).value


class GammaSolution(NamedTuple):
    gamma: Fraction
    beta1: Fraction
    beta2: Fraction


def _constraint_lines(p: CodeParams, file_size: Fraction, alpha: Fraction):
    """Boundary lines A*beta1 + C*beta2 = rhs of the linear pieces of the bound.

    Each composition contributes one line per nonempty subset of clamped-
    active positions; coincident lines are deduplicated.
    """
    epf = Fraction(p.e, p.f)
    lines = set()
    for u in compositions(p.m, p.f):
        g = len(u)
        terms = []
        prefix = 0
        for part in u:
            terms.append((part * (p.d - prefix), part * (p.f - part), part))
            prefix += part
        for mask in range(1, 1 << g):
            a = c = w = 0
            for i in range(g):
                if mask >> i & 1:
                    a += terms[i][0]
                    c += terms[i][1]
                    w += terms[i][2]
            rhs = file_size - p.k * alpha + epf * alpha * w
            lines.add((Fraction(a), Fraction(c), rhs))
    lines.add((Fraction(1), Fraction(0), Fraction(0)))  # beta1 = 0
    lines.add((Fraction(0), Fraction(1), Fraction(0)))  # beta2 = 0
    return lines


def min_gamma_given_alpha(p: CodeParams, file_size, alpha) -> GammaSolution:
    """Minimize d*beta1 + (f-1)*beta2 subject to the bound supporting ``file_size``.

    The feasible region in (beta1, beta2) is an intersection of superlevel
    sets of concave piecewise-linear functions, hence a polyhedron inside
    the nonnegative quadrant; the optimum sits on a vertex formed by two of
    the piece-boundary lines (axes included), so all pairwise intersections
    are enumerated and checked with the exact feasibility primitive.
    """
    file_size = Fraction(file_size)
    alpha = Fraction(alpha)
    if file_size <= 0:
        raise ValueError("file size must be positive")
    if alpha < Fraction(file_size, p.k):
        raise InfeasibleAlphaError(
            f"alpha = {alpha} below the minimum B/k = {Fraction(file_size, p.k)}"
        )
    lines = list(_constraint_lines(p, file_size, alpha))
    candidates = set()
    for i in range(len(lines)):
        a1, c1, r1 = lines[i]
        for j in range(i + 1, len(lines)):
            a2, c2, r2 = lines[j]
            det = a1 * c2 - a2 * c1
            if det == 0:
                continue
            b1 = (r1 * c2 - r2 * c1) / det
            b2 = (a1 * r2 - a2 * r1) / det
            if b1 >= 0 and b2 >= 0:
                candidates.add((b1, b2))
    best: GammaSolution | None = None
    for b1, b2 in sorted(candidates):
        g = gamma_of(p, b1, b2)
        if best is not None and g >= best.gamma:
            continue
        if feasible(p, file_size, alpha, b1, b2):
            best = GammaSolution(g, b1, b2)
    # alpha >= B/k guarantees feasibility for large enough betas, so a
    # vertex always exists.
    assert best is not None
    return best


def sweep_curve(p: CodeParams, file_size, steps: int) -> list[TradeoffPoint]:
    """Tradeoff curve from the minimum-storage to the minimum-bandwidth corner.

    Returns ``steps + 1`` points with exact rational coordinates; the two
    endpoints are tagged with their corner roles.
    """
    from .params import msrcr_point, mbrcr_point

    if steps < 1:
        raise ValueError("steps must be >= 1")
    b = Fraction(file_size)
    lo = msrcr_point(p, b)
    hi = mbrcr_point(p, b)
    points = []
    for i in range(steps + 1):
        alpha = lo.alpha + Fraction(i, steps) * (hi.alpha - lo.alpha)
        if alpha == lo.alpha:
            points.append(lo)
        elif alpha == hi.alpha:
            points.append(hi)
        else:
            sol = min_gamma_given_alpha(p, b, alpha)
            points.append(TradeoffPoint(
                alpha=alpha, beta1=sol.beta1, beta2=sol.beta2,
                gamma=sol.gamma, file_size=b, role=ROLE_CUSTOM,
            ))
    return points


def write_curve_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha_num", "alpha_den", "gamma_num", "gamma_den", "role"])
        for pt in points:
            writer.writerow([
                pt.alpha.numerator, pt.alpha.denominator,
                pt.gamma.numerator, pt.gamma.denominator,
                pt.role,
            ])
