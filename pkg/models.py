"""Core domain types for mass action reaction networks.

A network is the species list plus the reactions; everything else (the
complex matrix Z, incidence B, stoichiometry S = Z B and the Kirchhoff
matrix L) is derived once by ``build_matrices`` and never changes. Exact
rational copies of Z, S and L are kept next to the float ones so that the
structural identities hold without rounding.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from core.exceptions import DomainException, ValidationException
from core.math import linalg
from core.math.poly import Polynomial, PolynomialVector

logger = logging.getLogger(__name__)

Number = Union[int, float, str, Fraction]


def to_exact(value: Number) -> Fraction:
    """
    Rational value of a number. Floats are taken at their shortest
    round-tripping decimal, so 0.1 becomes 1/10, not the binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        return Fraction(value.strip())
    value = float(value)
    if not np.isfinite(value):
        raise ValidationException(f"Non-finite number {value}")
    return Fraction(repr(value))


def format_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    as_float = float(value)
    return repr(as_float)


@dataclass(frozen=True)
class SpeciesId:
    index: int
    name: str


@dataclass(frozen=True)
class Complex:
    """Sparse species-index -> coefficient map; the zero complex has no entries"""
    coefficients: Tuple[Tuple[int, Fraction], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Number]) -> "Complex":
        items = []
        for index, value in sorted(mapping.items()):
            exact = to_exact(value)
            if exact != 0:
                items.append((int(index), exact))
        return cls(tuple(items))

    @classmethod
    def from_dense(cls, values: Sequence[Number]) -> "Complex":
        return cls.from_mapping({i: v for i, v in enumerate(values)})

    @classmethod
    def zero(cls) -> "Complex":
        return cls(())

    def get(self, index: int) -> Fraction:
        for i, value in self.coefficients:
            if i == index:
                return value
        return Fraction(0)

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for i, value in self.coefficients:
            out[i] = float(value)
        return out

    def dense_exact(self, n: int) -> List[Fraction]:
        out = [Fraction(0)] * n
        for i, value in self.coefficients:
            out[i] = value
        return out

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def is_standard(self) -> bool:
        return all(v >= 0 and v.denominator == 1 for _, v in self.coefficients)

    def max_index(self) -> int:
        return max((i for i, _ in self.coefficients), default=-1)

    def format(self, names: Sequence[str]) -> str:
        if self.is_zero:
            return "0"
        terms = []
        for i, value in self.coefficients:
            if value == 1:
                terms.append(names[i])
            else:
                terms.append(f"{format_number(value)} {names[i]}")
        return " + ".join(terms)


@dataclass(frozen=True)
class Reaction:
    reactant: Complex
    product: Complex
    rate: Fraction

    def __post_init__(self):
        object.__setattr__(self, "rate", to_exact(self.rate))

    @property
    def key(self) -> Tuple[Complex, Complex]:
        return self.reactant, self.product


@dataclass(frozen=True)
class StructureReport:
    n_species: int
    n_reactions: int
    n_complexes: int
    linkage_classes: int
    linkage_class_members: List[List[int]]
    strong_components: int
    weakly_reversible: bool
    rank: int
    deficiency: int


@dataclass(frozen=True, eq=False)
class Network:
    species: Tuple[SpeciesId, ...]
    reactions: Tuple[Reaction, ...]
    complexes: Tuple[Complex, ...]
    reactant_index: Tuple[int, ...]
    product_index: Tuple[int, ...]
    Z: np.ndarray
    B: np.ndarray
    S: np.ndarray
    L: np.ndarray
    Z_exact: np.ndarray = field(repr=False)
    S_exact: np.ndarray = field(repr=False)
    L_exact: np.ndarray = field(repr=False)
    generalized: bool = False
    name: Optional[str] = None

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def c(self) -> int:
        return len(self.complexes)

    @property
    def species_names(self) -> List[str]:
        return [s.name for s in self.species]

    @property
    def rates(self) -> np.ndarray:
        return np.array([float(reaction.rate) for reaction in self.reactions])

    @property
    def reactant_matrix(self) -> np.ndarray:
        """n x r matrix whose j-th column is the reactant complex of reaction j"""
        return self.Z[:, list(self.reactant_index)]

    def species_index(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise ValidationException(f"Unknown species {name!r}")

    def reaction_label(self, j: int) -> str:
        reaction = self.reactions[j]
        names = self.species_names
        return f"{reaction.reactant.format(names)} -> {reaction.product.format(names)}"

    def matrices_equal(self, other: "Network") -> bool:
        return (
            self.species_names == other.species_names
            and all(np.array_equal(a, b) for a, b in (
                (self.Z, other.Z), (self.B, other.B), (self.S, other.S), (self.L, other.L)
            ))
        )


def _species_list(species: Sequence[Union[SpeciesId, str]]) -> Tuple[SpeciesId, ...]:
    out = []
    for position, s in enumerate(species):
        if isinstance(s, str):
            s = SpeciesId(index=position, name=s)
        if s.index != position:
            raise ValidationException(f"Species {s.name!r} has index {s.index}, expected {position}")
        out.append(s)
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise ValidationException(f"Duplicate species names in {names}")
    return tuple(out)


def build_matrices(
    species: Sequence[Union[SpeciesId, str]],
    reactions: Iterable[Reaction],
    generalized: bool = False,
    name: Optional[str] = None,
) -> Network:
    """Validate the reactions and derive Z, B, S and L."""
    species = _species_list(species)
    reactions = tuple(reactions)
    n = len(species)
    if not reactions:
        raise ValidationException("A network needs at least one reaction")

    seen = set()
    complexes: List[Complex] = []
    position: Dict[Complex, int] = {}
    reactant_index, product_index = [], []
    for j, reaction in enumerate(reactions):
        if reaction.rate <= 0:
            raise ValidationException(f"Reaction {j + 1} has nonpositive rate {reaction.rate}")
        if reaction.reactant == reaction.product:
            raise ValidationException(f"Reaction {j + 1} has identical reactant and product")
        if reaction.key in seen:
            raise ValidationException(
                f"Duplicate reaction {reaction.reactant.format([s.name for s in species])} -> "
                f"{reaction.product.format([s.name for s in species])}; merge the rates explicitly"
            )
        seen.add(reaction.key)
        for cplx in reaction.key:
            if cplx.max_index() >= n:
                raise ValidationException(f"Reaction {j + 1} references an undeclared species")
            if not generalized and not cplx.is_standard:
                raise ValidationException(
                    f"Reaction {j + 1} has a non-integer or negative coefficient; "
                    f"only generalized networks allow that"
                )
            if cplx not in position:
                position[cplx] = len(complexes)
                complexes.append(cplx)
        reactant_index.append(position[reaction.reactant])
        product_index.append(position[reaction.product])

    c, r = len(complexes), len(reactions)
    Z_exact = np.array([cplx.dense_exact(n) for cplx in complexes], dtype=object).T.reshape(n, c)
    B = np.zeros((c, r), dtype=int)
    L_exact = np.full((c, c), Fraction(0), dtype=object)
    for j, reaction in enumerate(reactions):
        src, dst = reactant_index[j], product_index[j]
        B[src, j] = -1
        B[dst, j] = 1
        L_exact[dst, src] += reaction.rate
        L_exact[src, src] -= reaction.rate
    S_exact = Z_exact.dot(B.astype(object))

    to_float = np.vectorize(float, otypes=[float])
    net = Network(
        species=species,
        reactions=reactions,
        complexes=tuple(complexes),
        reactant_index=tuple(reactant_index),
        product_index=tuple(product_index),
        Z=to_float(Z_exact) if Z_exact.size else np.zeros((n, c)),
        B=B,
        S=to_float(S_exact) if S_exact.size else np.zeros((n, r)),
        L=to_float(L_exact),
        Z_exact=Z_exact,
        S_exact=S_exact,
        L_exact=L_exact,
        generalized=generalized,
        name=name,
    )
    logger.debug(f"Built network {name or ''} with n={n}, r={r}, c={c}")
    return net


def _state(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (net.n,):
        raise ValidationException(f"State must have {net.n} entries, got shape {x.shape}")
    if np.any(x < 0):
        raise DomainException(f"Negative concentration in {x.tolist()}")
    return x


def _monomials(x: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    return np.prod(np.power(x[:, None], exponents), axis=0)


def mass_action_rates(net: Network, x) -> np.ndarray:
    """v_j(x) = k_j * prod_i x_i ** Z_ij over the reactant complex of reaction j"""
    x = _state(net, x)
    if net.generalized and np.any(x <= 0):
        raise DomainException("Generalized networks are evaluated on positive states only")
    return net.rates * _monomials(x, net.reactant_matrix)


def psi(net: Network, x) -> np.ndarray:
    """Psi_rho(x) = prod_i x_i ** Z_i,rho, one entry per complex"""
    x = _state(net, x)
    if np.any(x == 0) and np.any(net.Z < 0):
        raise DomainException("Complexes with negative coefficients need a positive state")
    return _monomials(x, net.Z)


def complex_balance_residual(net: Network, x) -> np.ndarray:
    """L Psi(x), which equals B v(x); zero exactly when x is complex balanced"""
    return net.L @ psi(net, x)


def _monomial_exponent(cplx: Complex, n: int) -> Tuple:
    return tuple(cplx.dense_exact(n))


def vector_field(net: Network) -> PolynomialVector:
    """f(x) = S v(x) as polynomials, built reaction by reaction"""
    components = [dict() for _ in range(net.n)]
    for j, reaction in enumerate(net.reactions):
        exponent = _monomial_exponent(reaction.reactant, net.n)
        rate = float(reaction.rate)
        for i in range(net.n):
            if net.S_exact[i, j] != 0:
                components[i][exponent] = components[i].get(exponent, 0.0) + float(net.S_exact[i, j]) * rate
    return PolynomialVector([Polynomial(net.n, terms) for terms in components])


def complex_centered_field(net: Network) -> PolynomialVector:
    """f(x) = Z L Psi(x), built complex by complex"""
    ZL = net.Z_exact.dot(net.L_exact)
    components = []
    for i in range(net.n):
        terms = {}
        for k, cplx in enumerate(net.complexes):
            if ZL[i, k] != 0:
                terms[_monomial_exponent(cplx, net.n)] = float(ZL[i, k])
        components.append(Polynomial(net.n, terms))
    return PolynomialVector(components)


def reaction_graph(net: Network) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(net.c))
    graph.add_edges_from(zip(net.reactant_index, net.product_index))
    return graph


def structure_report(net: Network) -> StructureReport:
    graph = reaction_graph(net)
    classes = sorted(sorted(component) for component in nx.weakly_connected_components(graph))
    strong = nx.number_strongly_connected_components(graph)
    s = linalg.rank(net.S) if net.S.size else 0
    return StructureReport(
        n_species=net.n,
        n_reactions=net.r,
        n_complexes=net.c,
        linkage_classes=len(classes),
        linkage_class_members=classes,
        strong_components=strong,
        weakly_reversible=strong == len(classes),
        rank=s,
        deficiency=net.c - len(classes) - s,
    )
