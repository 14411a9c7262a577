"""Sparse multivariate polynomials with float coefficients.

A polynomial maps exponent tuples (one nonnegative entry per variable) to
coefficients. Coefficients with magnitude below ``CLEANUP_TOL`` are dropped
after every operation, and iteration is always in sorted exponent order so
that anything assembled from the terms (LP rows in particular) is
reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Real
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import UnsupportedSubstitutionException

CLEANUP_TOL = 1e-14

Exponent = Tuple[Real, ...]


def _normalize_exponent(exponent: Iterable) -> Exponent:
    out = []
    for e in exponent:
        if e < 0:
            raise ValueError(f"Negative exponent {e}")
        out.append(int(e) if float(e).is_integer() else float(e))
    return tuple(out)


class Polynomial:
    __slots__ = ("nvars", "_terms")

    def __init__(self, nvars: int, terms: Optional[Mapping[Exponent, float]] = None):
        self.nvars = nvars
        self._terms: Dict[Exponent, float] = {}
        for exponent, coefficient in (terms or {}).items():
            self._accumulate(_normalize_exponent(exponent), float(coefficient))
        self._cleanup()

    # construction helpers

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Polynomial":
        exponent = [0] * nvars
        exponent[index] = 1
        return cls(nvars, {tuple(exponent): 1.0})

    @classmethod
    def monomial(cls, exponent: Sequence, coefficient: float = 1.0) -> "Polynomial":
        return cls(len(exponent), {tuple(exponent): coefficient})

    def _accumulate(self, exponent: Exponent, coefficient: float) -> None:
        if len(exponent) != self.nvars:
            raise ValueError(f"Exponent {exponent} does not have {self.nvars} entries")
        self._terms[exponent] = self._terms.get(exponent, 0.0) + coefficient

    def _cleanup(self) -> "Polynomial":
        self._terms = {
            e: c for e, c in sorted(self._terms.items()) if abs(c) >= CLEANUP_TOL
        }
        return self

    # read access

    @property
    def terms(self) -> Dict[Exponent, float]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Exponent, float]]:
        return iter(sorted(self._terms.items()))

    def support(self) -> List[Exponent]:
        return sorted(self._terms)

    def coefficient(self, exponent: Sequence) -> float:
        return self._terms.get(tuple(exponent), 0.0)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> Real:
        return max((sum(e) for e in self._terms), default=0)

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # ring operations

    def _check(self, other: "Polynomial") -> None:
        if self.nvars != other.nvars:
            raise ValueError(f"Variable count mismatch: {self.nvars} vs {other.nvars}")

    def add(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        result = Polynomial(self.nvars)
        result._terms = dict(self._terms)
        for exponent, coefficient in other._terms.items():
            result._accumulate(exponent, coefficient)
        return result._cleanup()

    def scale(self, factor: float) -> "Polynomial":
        result = Polynomial(self.nvars)
        result._terms = {e: c * factor for e, c in self._terms.items()}
        return result._cleanup()

    def multiply(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        result = Polynomial(self.nvars)
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                result._accumulate(tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
        return result._cleanup()

    def power(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("Negative power")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                result = result.multiply(base)
            base = base.multiply(base)
            k >>= 1
        return result

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return self.add(other)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self.add(other.scale(-1.0))

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return self.multiply(other)
        return self.scale(float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self._terms.items()))))

    def distance(self, other: "Polynomial") -> float:
        """Max absolute coefficient of self - other"""
        return (self - other).max_abs_coefficient()

    # evaluation and substitution

    def evaluate(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError(f"Expected a point with {self.nvars} coordinates")
        total = 0.0
        for exponent, coefficient in self._terms.items():
            total += coefficient * float(np.prod(np.power(x, np.asarray(exponent, dtype=float))))
        return total

    def substitute_affine(self, targets: Sequence[int], affine: "AffineMap") -> "Polynomial":
        """
        Replace each variable in ``targets`` by an affine expression of the
        remaining variables and expand.

        The result is a polynomial over the remaining variables, kept in their
        original relative order.
        """
        targets = list(targets)
        if len(targets) != affine.constant.shape[0]:
            raise ValueError("One affine row per target variable is required")
        remaining = [i for i in range(self.nvars) if i not in set(targets)]
        m = len(remaining)
        if affine.linear.shape != (len(targets), m):
            raise ValueError(f"Affine map must be {len(targets)}x{m}")

        expressions = [affine.expression(t) for t in range(len(targets))]
        powers: Dict[Tuple[int, int], Polynomial] = {}

        def power_of(t: int, k: int) -> Polynomial:
            if (t, k) not in powers:
                powers[(t, k)] = expressions[t].power(k)
            return powers[(t, k)]

        result = Polynomial(m)
        for exponent, coefficient in self._terms.items():
            term = Polynomial.monomial([exponent[i] for i in remaining], coefficient)
            for t, var in enumerate(targets):
                k = exponent[var]
                if k == 0:
                    continue
                if not float(k).is_integer():
                    raise UnsupportedSubstitutionException(
                        f"Variable {var} appears with exponent {k}; only integer powers can be expanded"
                    )
                term = term.multiply(power_of(t, int(k)))
            result = result.add(term)
        return result

    def __repr__(self) -> str:
        return f"Polynomial({self.format()})"

    def format(self, names: Optional[Sequence[str]] = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for exponent, coefficient in sorted(self._terms.items(), reverse=True):
            factors = []
            for name, power in zip(names, exponent):
                if power == 1:
                    factors.append(name)
                elif power:
                    factors.append(f"{name}^{power}")
            body = "*".join(factors)
            if body and abs(coefficient) == 1.0:
                parts.append(("-" if coefficient < 0 else "+") + body)
            else:
                parts.append(f"{coefficient:+.12g}" + (f"*{body}" if body else ""))
        return " ".join(parts).lstrip("+")


@dataclass(frozen=True)
class AffineMap:
    """x_target = constant + linear @ x_remaining, one row per target variable"""
    constant: np.ndarray
    linear: np.ndarray

    def expression(self, row: int) -> Polynomial:
        m = self.linear.shape[1]
        p = Polynomial.constant(m, float(self.constant[row]))
        for j in range(m):
            if self.linear[row, j] != 0.0:
                p = p.add(Polynomial.variable(m, j).scale(float(self.linear[row, j])))
        return p

    def apply(self, remaining: Sequence[float]) -> np.ndarray:
        return self.constant + self.linear @ np.asarray(remaining, dtype=float)

    @classmethod
    def identity(cls, m: int) -> "AffineMap":
        return cls(constant=np.zeros(0), linear=np.zeros((0, m)))


class PolynomialVector:
    """One polynomial per coordinate, all over the same variables"""

    def __init__(self, components: Sequence[Polynomial]):
        components = list(components)
        if components and len({p.nvars for p in components}) != 1:
            raise ValueError("Inconsistent variable counts")
        self.components = components

    @property
    def nvars(self) -> int:
        return self.components[0].nvars if self.components else 0

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, i: int) -> Polynomial:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def evaluate(self, x: Sequence[float]) -> np.ndarray:
        return np.array([p.evaluate(x) for p in self.components])

    def scale_rows(self, factors: Sequence[float]) -> "PolynomialVector":
        return PolynomialVector([p.scale(float(f)) for p, f in zip(self.components, factors)])

    def substitute_affine(self, targets: Sequence[int], affine: AffineMap) -> "PolynomialVector":
        return PolynomialVector([p.substitute_affine(targets, affine) for p in self.components])

    def select(self, rows: Sequence[int]) -> "PolynomialVector":
        return PolynomialVector([self.components[i] for i in rows])

    def support(self) -> List[Exponent]:
        return sorted({e for p in self.components for e in p.support()})

    def distance(self, other: "PolynomialVector") -> float:
        if len(self) != len(other):
            raise ValueError("Length mismatch")
        return max((p.distance(q) for p, q in zip(self.components, other.components)), default=0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolynomialVector):
            return NotImplemented
        return self.components == other.components

    def __repr__(self) -> str:
        return f"PolynomialVector({[p.format() for p in self.components]})"
