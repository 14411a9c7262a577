"""Reader and writer for the ``.crn`` reaction network format.

One reaction per line::

    # comment
    @name = example
    @equilibrium = (1, 2)
    2 X1 -> 2 X2 ; k = 1
    X1 <-> X3 ; k = 1, 0.5
    0 -> X1 ; k = 0.008

Header lines are ``@species``, ``@name``, ``@equilibrium``, ``@x0`` and
``@generalized``. Species are inferred in first-appearance order unless an
``@species`` line declares them. Negative and fractional stoichiometric
coefficients are only accepted under ``@generalized = true``.
"""
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ParseException
from models import Complex, Network, Reaction, build_matrices, format_number

logger = logging.getLogger(__name__)

SPECIES_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_COEFFICIENT = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+(?=\s))?")
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_ARROW = re.compile(r"<->|->")
_RATE = re.compile(r"\s*k\s*=\s*")
_HEADER = re.compile(r"\s*@([A-Za-z_][A-Za-z0-9_]*)\s*=\s*")
_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


@dataclass
class NetworkDocument:
    species: List[str]
    reactions: List[Reaction]
    name: Optional[str] = None
    equilibrium: Optional[List[float]] = None
    x0: Optional[List[float]] = None
    generalized: bool = False
    declared_species: bool = False

    def to_network(self) -> Network:
        return build_matrices(self.species, self.reactions, generalized=self.generalized, name=self.name)


@dataclass
class _Line:
    number: int
    text: str

    def error(self, message: str, column: int) -> ParseException:
        return ParseException(message, line=self.number, column=column + 1)


@dataclass
class _State:
    species: List[str] = field(default_factory=list)
    index: Dict[str, int] = field(default_factory=dict)
    declared: bool = False
    generalized: bool = False
    name: Optional[str] = None
    equilibrium: Optional[List[float]] = None
    x0: Optional[List[float]] = None
    # header label -> (line, column) of its value, for length errors
    vector_at: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def species_index(self, line: _Line, name: str, column: int) -> int:
        if name not in self.index:
            if self.declared:
                raise line.error(f"Species {name!r} is not declared in @species", column)
            self.index[name] = len(self.species)
            self.species.append(name)
        return self.index[name]


def _skip_spaces(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_vector(line: _Line, text: str, offset: int) -> List[float]:
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    values = []
    for part in body.split(","):
        part = part.strip()
        if not _NUMBER.fullmatch(part):
            raise line.error(f"Expected a number, got {part!r}", offset + max(text.find(part), 0))
        values.append(float(part))
    return values


def _parse_header(line: _Line, state: _State, has_reactions: bool) -> None:
    text = line.text
    match = _HEADER.match(text)
    if not match:
        raise line.error("Header lines look like '@key = value'", text.find("@"))
    key, value_at = match.group(1).lower(), match.end()
    value = text[value_at:].strip()
    if key == "name":
        state.name = value
    elif key == "generalized":
        if value.lower() not in _TRUE | _FALSE:
            raise line.error(f"Expected true or false, got {value!r}", value_at)
        state.generalized = value.lower() in _TRUE
    elif key == "species":
        if has_reactions or state.declared:
            raise line.error("@species must come once, before the first reaction", match.start(1) - 1)
        for name in (part.strip() for part in value.split(",")):
            if not SPECIES_NAME.fullmatch(name):
                raise line.error(f"Invalid species name {name!r}", value_at + value.find(name))
            if name in state.index:
                raise line.error(f"Species {name!r} declared twice", value_at + value.find(name))
            state.index[name] = len(state.species)
            state.species.append(name)
        state.declared = True
    elif key == "equilibrium":
        state.equilibrium = _parse_vector(line, text[value_at:], value_at)
        state.vector_at["@equilibrium"] = (line.number, value_at + 1)
    elif key == "x0":
        state.x0 = _parse_vector(line, text[value_at:], value_at)
        state.vector_at["@x0"] = (line.number, value_at + 1)
    else:
        raise line.error(f"Unknown header @{key}", match.start(1) - 1)


def _parse_complex(line: _Line, text: str, start: int, end: int, state: _State) -> Complex:
    pos = _skip_spaces(text, start)
    if pos >= end:
        raise line.error("Empty complex; write 0 for the zero complex", start)
    if text[pos] == "0" and text[pos:end].strip() == "0":
        return Complex.zero()

    coefficients: Dict[int, Fraction] = {}
    while True:
        pos = _skip_spaces(text, pos)
        term_at = pos
        coefficient = Fraction(1)
        number = _COEFFICIENT.match(text, pos, end)
        if number:
            coefficient = Fraction(number.group())
            pos = _skip_spaces(text, number.end())
        name = SPECIES_NAME.match(text, pos, end)
        if not name:
            raise line.error("Expected a species name", pos)
        if not state.generalized and (coefficient < 0 or coefficient.denominator != 1):
            raise line.error(
                f"Coefficient {number.group()} is not a nonnegative integer "
                f"(use @generalized = true for real stoichiometry)",
                term_at,
            )
        index = state.species_index(line, name.group(), name.start())
        coefficients[index] = coefficients.get(index, Fraction(0)) + coefficient
        pos = _skip_spaces(text, name.end())
        if pos >= end:
            break
        if text[pos] != "+":
            raise line.error(f"Expected '+' between terms, got {text[pos]!r}", pos)
        pos += 1
    return Complex.from_mapping(coefficients)


def _parse_rates(line: _Line, text: str, start: int, expected: int) -> List[Fraction]:
    match = _RATE.match(text, start)
    if not match:
        raise line.error("Expected 'k = <rate>' after ';'", _skip_spaces(text, start))
    rates = []
    pos = match.end()
    while True:
        pos = _skip_spaces(text, pos)
        number = _NUMBER.match(text, pos)
        if not number:
            raise line.error("Expected a rate constant", pos)
        rate = Fraction(number.group())
        if rate <= 0:
            raise line.error(f"Rate constant must be positive, got {number.group()}", pos)
        rates.append(rate)
        pos = _skip_spaces(text, number.end())
        if pos >= len(text):
            break
        if text[pos] != ",":
            raise line.error(f"Unexpected {text[pos]!r}", pos)
        pos += 1
    if len(rates) != expected:
        kind = "A reversible" if expected == 2 else "An irreversible"
        raise line.error(f"{kind} reaction takes {expected} rate constant(s), got {len(rates)}", match.end())
    return rates


def _parse_reaction(line: _Line, state: _State) -> List[Reaction]:
    text = line.text
    arrow = _ARROW.search(text)
    if not arrow:
        raise line.error("Expected '->' or '<->'", _skip_spaces(text, 0))
    semicolon = text.find(";", arrow.end())
    if semicolon < 0:
        raise line.error("Expected ';' before the rate constant", len(text.rstrip()))

    reactant = _parse_complex(line, text, 0, arrow.start(), state)
    product = _parse_complex(line, text, arrow.end(), semicolon, state)
    if reactant == product:
        raise line.error("Reactant and product complexes are identical", arrow.start())

    if arrow.group() == "<->":
        forward, backward = _parse_rates(line, text, semicolon + 1, 2)
        return [Reaction(reactant, product, forward), Reaction(product, reactant, backward)]
    rate, = _parse_rates(line, text, semicolon + 1, 1)
    return [Reaction(reactant, product, rate)]


def parse_network(text: str) -> NetworkDocument:
    """Parse ``.crn`` text. Syntax errors carry 1-based line and column."""
    state = _State()
    reactions: List[Reaction] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        line = _Line(number, body)
        if body.lstrip().startswith("@"):
            _parse_header(line, state, has_reactions=bool(reactions))
        else:
            reactions.extend(_parse_reaction(line, state))

    if not reactions:
        raise ParseException("No reactions found", line=max(1, len(text.splitlines())), column=1)
    for label, vector in (("@equilibrium", state.equilibrium), ("@x0", state.x0)):
        if vector is not None and len(vector) != len(state.species):
            at_line, at_column = state.vector_at[label]
            raise ParseException(
                f"{label} has {len(vector)} entries for {len(state.species)} species",
                line=at_line, column=at_column,
            )

    logger.debug(f"Parsed {len(reactions)} reactions over {len(state.species)} species")
    return NetworkDocument(
        species=state.species,
        reactions=reactions,
        name=state.name,
        equilibrium=state.equilibrium,
        x0=state.x0,
        generalized=state.generalized,
        declared_species=state.declared,
    )


def parse_complex(text: str, species: Sequence[str], generalized: bool = False) -> Complex:
    """Parse a single complex such as '2 X1 + X2' over known species"""
    state = _State(
        species=list(species),
        index={name: i for i, name in enumerate(species)},
        declared=True,
        generalized=generalized,
    )
    line = _Line(1, text)
    return _parse_complex(line, text, 0, len(text.rstrip()), state)


def load_network(text: str) -> Tuple[Network, NetworkDocument]:
    document = parse_network(text)
    return document.to_network(), document


def _format_vector(values: Sequence[float]) -> str:
    return "(" + ", ".join(repr(float(v)) for v in values) + ")"


def serialize_network(
    net: Network,
    equilibrium: Optional[Sequence[float]] = None,
    x0: Optional[Sequence[float]] = None,
) -> str:
    """Write ``net`` back to ``.crn`` text; parsing the result rebuilds the same matrices."""
    names = net.species_names
    lines = []
    if net.name:
        lines.append(f"@name = {net.name}")
    if net.generalized:
        lines.append("@generalized = true")
    lines.append("@species = " + ", ".join(names))
    if equilibrium is not None:
        lines.append(f"@equilibrium = {_format_vector(np.asarray(equilibrium, dtype=float))}")
    if x0 is not None:
        lines.append(f"@x0 = {_format_vector(np.asarray(x0, dtype=float))}")
    for reaction in net.reactions:
        lines.append(
            f"{reaction.reactant.format(names)} -> {reaction.product.format(names)} "
            f"; k = {format_number(reaction.rate)}"
        )
    return "\n".join(lines) + "\n"
