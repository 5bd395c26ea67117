"""Real polynomials with error-free-transformation Horner evaluation."""
from __future__ import annotations

from dataclasses import dataclass

__all__ = ["Polynomial", "two_sum", "two_prod"]

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


@dataclass(frozen=True)
class Polynomial:
    """Coefficients stored highest degree first.

    Coefficients may be floats or mpmath numbers; plain ``__call__`` runs
    Horner in whatever arithmetic the coefficients and argument carry.
    """

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("empty coefficient sequence")
        if self.coeffs[0] == 0:
            raise ValueError("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = self.coeffs[0] * 1
        for c in self.coeffs[1:]:
            acc = acc * x + c
        return acc

    def eval_compensated(self, x: float) -> float:
        """Compensated Horner (Graillat, Langlois, Louvet 2005) in double precision.

        The result is as accurate as plain Horner run in twice the working
        precision, then rounded.
        """
        x = float(x)
        cs = [float(c) for c in self.coeffs]
        s = cs[0]
        err = 0.0
        for c in cs[1:]:
            p, pi = two_prod(s, x)
            s, sigma = two_sum(p, c)
            err = err * x + (pi + sigma)
        return s + err

    def horner_error_bound(self, x: float) -> float:
        """Bound on the rounding error of plain double Horner at ``x``."""
        n = self.degree
        u = 2.0 ** -53
        gamma = 2 * n * u / (1 - 2 * n * u)
        ax = abs(float(x))
        return gamma * Polynomial(tuple(abs(float(c)) for c in self.coeffs))(ax)

    def derivative(self) -> "Polynomial":
        n = self.degree
        if n == 0:
            raise ValueError("derivative of a constant is the zero polynomial")
        return Polynomial(tuple(c * (n - i) for i, c in enumerate(self.coeffs[:-1])))

    def monic_residual(self, x):
        """|p(x)| scaled by the leading coefficient."""
        return abs(self(x) / self.coeffs[0])

    @property
    def scale(self) -> float:
        return float(sum(abs(c) for c in self.coeffs))

    def is_palindromic(self, tol: float = 0.0) -> bool:
        cs = self.coeffs
        return all(abs(cs[i] - cs[-1 - i]) <= tol for i in range(len(cs) // 2))

