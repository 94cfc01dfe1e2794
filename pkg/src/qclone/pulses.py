"""A small text language for two-spin NMR pulse sequences.

Example::

    Rx:b(pi/3) - Gz - Rx:b(pi/4) - tau1 - R-y:b(pi/4) - Gz

Events run left to right and are separated by ``-``, ``;`` or newlines.
``R{axis}:{spin}(angle)`` is a hard pulse, ``Gz`` a gradient crusher,
``tau1``/``tau2`` the free evolutions 1/(2J) and 1/(4J), and
``delay(seconds)`` an explicit wait.  ``#`` starts a comment.

Angles written as multiples of pi (``pi/4``, ``3/4pi``, ``-2pi``) are kept
as exact fractions; anything else is decimal radians.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

SPINS = ("a", "b")


class ParseError(ValueError):
    """Any failure to read pulse-program text.

    Carries the character ``offset`` plus 1-based ``line`` and ``column``.
    """

    kind = "parse"

    def __init__(self, message: str, text: str, offset: int):
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        self.reason = message
        super().__init__(
            f"{self.kind} error at line {self.line}, column {self.column} "
            f"(offset {offset}): {message}"
        )


class LexError(ParseError):
    kind = "lexical"


class PulseSyntaxError(ParseError):
    kind = "syntax"


class SemanticError(ParseError):
    kind = "semantic"


@dataclass(frozen=True)
class Angle:
    """Either an exact rational multiple of pi or plain radians."""

    pi_multiple: Fraction | None = None
    radians_value: float | None = None

    def __post_init__(self):
        if (self.pi_multiple is None) == (self.radians_value is None):
            raise ValueError("Angle needs exactly one of pi_multiple / radians_value")
        if self.radians_value is not None and not math.isfinite(self.radians_value):
            raise ValueError(f"angle must be finite, got {self.radians_value}")

    @classmethod
    def pi(cls, num: int = 1, den: int = 1) -> "Angle":
        return cls(pi_multiple=Fraction(num, den))

    @classmethod
    def rad(cls, value: float) -> "Angle":
        return cls(radians_value=float(value))

    @property
    def exact(self) -> bool:
        return self.pi_multiple is not None

    @property
    def radians(self) -> float:
        if self.pi_multiple is not None:
            return float(self.pi_multiple) * math.pi
        return self.radians_value

    def is_zero(self) -> bool:
        return self.radians == 0.0

    def __neg__(self) -> "Angle":
        if self.pi_multiple is not None:
            return Angle(pi_multiple=-self.pi_multiple)
        return Angle(radians_value=-self.radians_value)

    def __add__(self, other: "Angle") -> "Angle":
        if self.exact and other.exact:
            return Angle(pi_multiple=self.pi_multiple + other.pi_multiple)
        return Angle(radians_value=self.radians + other.radians)

    def __str__(self) -> str:
        if self.pi_multiple is None:
            return repr(self.radians_value)
        p, q = self.pi_multiple.numerator, self.pi_multiple.denominator
        if p == 0:
            return "0pi"
        sign = "-" if p < 0 else ""
        p = abs(p)
        if p == 1:
            return f"{sign}pi" if q == 1 else f"{sign}pi/{q}"
        return f"{sign}{p}pi" if q == 1 else f"{sign}{p}/{q}pi"


@dataclass(frozen=True)
class RfPulse:
    spin: str
    axis: str
    angle: Angle

    def __str__(self) -> str:
        return f"R{self.axis}:{self.spin}({self.angle})"


@dataclass(frozen=True)
class Delay:
    """``kind`` is ``"tau1"``, ``"tau2"`` or ``"explicit"`` (with ``seconds``)."""

    kind: str
    seconds: float | None = None

    def __post_init__(self):
        if self.kind == "explicit":
            if self.seconds is None or not math.isfinite(self.seconds) or self.seconds < 0:
                raise ValueError(f"explicit delay needs finite seconds >= 0, got {self.seconds}")
        elif self.kind in ("tau1", "tau2"):
            if self.seconds is not None:
                raise ValueError(f"{self.kind} takes its length from J, not seconds")
        else:
            raise ValueError(f"unknown delay kind {self.kind!r}")

    def duration(self, J: float) -> float:
        if self.kind == "tau1":
            return 1.0 / (2.0 * J)
        if self.kind == "tau2":
            return 1.0 / (4.0 * J)
        return self.seconds

    def __str__(self) -> str:
        if self.kind == "explicit":
            return f"delay({self.seconds!r})"
        return self.kind


@dataclass(frozen=True)
class Crusher:
    def __str__(self) -> str:
        return "Gz"


PulseEvent = Union[RfPulse, Delay, Crusher]


@dataclass(frozen=True)
class PulseProgram:
    events: tuple[PulseEvent, ...] = ()
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self) -> int:
        return len(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def __iter__(self):
        return iter(self.events)

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        return PulseProgram(self.events + other.events)

    @property
    def has_crusher(self) -> bool:
        return any(isinstance(e, Crusher) for e in self.events)


# --- lexer -----------------------------------------------------------------

_NUMBER = re.compile(r"(?:[0-9]+\.[0-9]*|\.[0-9]+|[0-9]+)(?:[eE][+-]?[0-9]+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = {"Gz", "tau1", "tau2", "delay", "pi"}
_PUNCT = {"-": "DASH", ";": "SEMI", ":": "COLON", "(": "LPAREN", ")": "RPAREN", "/": "SLASH"}


@dataclass(frozen=True)
class _Token:
    type: str
    value: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "\n":
            tokens.append(_Token("NEWLINE", ch, i))
            i += 1
        elif ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, i))
            i += 1
        elif _NUMBER.match(text, i):
            m = _NUMBER.match(text, i)
            tokens.append(_Token("NUMBER", m.group(), i))
            i = m.end()
        elif ch == "R":
            # pulse head: R, optional '-', axis letter
            j = i + 1
            sign = ""
            if j < n and text[j] == "-":
                sign = "-"
                j += 1
            if j >= n or text[j] not in "xyz":
                raise LexError("expected pulse axis x, y or z after 'R'", text, j)
            if j + 1 < n and _WORD.match(text[j + 1]) or text[j + 1].isdigit():
                raise LexError("expected ':' after pulse axis", text, j + 1)
            tokens.append(_Token("PULSE", sign + text[j], i))
            i = j + 1
        elif _WORD.match(text, i):
            m = _WORD.match(text, i)
            word = m.group()
            if word in _KEYWORDS:
                tokens.append(_Token(word.upper(), word, i))
            else:
                tokens.append(_Token("IDENT", word, i))
            i = m.end()
        else:
            raise LexError(f"unexpected character {ch!r}", text, i)
    tokens.append(_Token("EOF", "", n))
    return tokens


# --- parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, type_: str, what: str) -> _Token:
        if self.tok.type != type_:
            self.fail(f"expected {what}")
        return self.advance()

    def fail(self, message: str):
        t = self.tok
        found = "end of input" if t.type == "EOF" else repr(t.value)
        raise PulseSyntaxError(f"{message}, found {found}", self.text, t.offset)

    def skip_newlines(self):
        while self.tok.type == "NEWLINE":
            self.advance()

    def program(self) -> list[PulseEvent]:
        events = []
        self.skip_newlines()
        if self.tok.type == "EOF":
            return events
        events.append(self.event())
        while True:
            t = self.tok.type
            if t == "EOF":
                break
            if t in ("DASH", "SEMI"):
                self.advance()
                self.skip_newlines()
            elif t == "NEWLINE":
                self.skip_newlines()
                if self.tok.type == "EOF":
                    break
            else:
                self.fail("expected '-', ';' or newline between events")
            events.append(self.event())
        return events

    def event(self) -> PulseEvent:
        t = self.tok
        if t.type == "PULSE":
            return self.pulse()
        if t.type == "GZ":
            self.advance()
            return Crusher()
        if t.type in ("TAU1", "TAU2"):
            self.advance()
            return Delay(t.value)
        if t.type == "DELAY":
            self.advance()
            self.expect("LPAREN", "'(' after delay")
            num = self.expect("NUMBER", "delay length in seconds")
            self.expect("RPAREN", "')'")
            return Delay("explicit", float(num.value))
        if t.type == "IDENT":
            raise LexError(f"unknown token {t.value!r}", self.text, t.offset)
        self.fail("expected a pulse, delay or Gz")

    def pulse(self) -> RfPulse:
        head = self.advance()
        self.expect("COLON", "':' after pulse axis")
        spin_tok = self.tok
        if not _WORD.fullmatch(spin_tok.value):
            self.fail("expected spin label")
        self.advance()
        if spin_tok.value not in SPINS:
            raise SemanticError(
                f"unknown spin {spin_tok.value!r} (expected a or b)", self.text, spin_tok.offset
            )
        self.expect("LPAREN", "'(' before angle")
        angle = self.angle()
        self.expect("RPAREN", "')' after angle")
        return RfPulse(spin_tok.value, head.value, angle)

    def angle(self) -> Angle:
        negative = False
        if self.tok.type == "DASH":
            self.advance()
            negative = True
        t = self.tok
        if t.type == "PI":
            self.advance()
            den = 1
            if self.tok.type == "SLASH":
                self.advance()
                den = self.integer("denominator")
            ang = Angle.pi(1, den)
        elif t.type == "NUMBER":
            self.advance()
            if self.tok.type in ("SLASH", "PI"):
                num = self._as_int(t)
                den = 1
                if self.tok.type == "SLASH":
                    self.advance()
                    den = self.integer("denominator")
                self.expect("PI", "'pi' after rational coefficient")
                ang = Angle.pi(num, den)
            else:
                ang = Angle.rad(float(t.value))
        else:
            self.fail("expected an angle")
        return -ang if negative else ang

    def integer(self, what: str) -> int:
        t = self.expect("NUMBER", what)
        value = self._as_int(t)
        if value == 0:
            raise PulseSyntaxError(f"{what} must be non-zero", self.text, t.offset)
        return value

    def _as_int(self, t: _Token) -> int:
        if not t.value.isdigit():
            raise PulseSyntaxError(f"expected an integer, found {t.value!r}", self.text, t.offset)
        return int(t.value)


def parse(text: str, name: str | None = None) -> PulseProgram:
    """Parse pulse-program text.

    Raises
    ------
    LexError
        Unknown token or malformed pulse head.
    PulseSyntaxError
        Tokens in the wrong order.
    SemanticError
        Well-formed pulse on a spin other than ``a`` or ``b``.
    """
    return PulseProgram(tuple(_Parser(text).program()), name=name)


def parse_angle(text: str) -> Angle:
    """Parse a bare angle such as ``pi/2``, ``-3/4pi`` or ``0.25``."""
    p = _Parser(text)
    ang = p.angle()
    if p.tok.type != "EOF":
        p.fail("unexpected trailing input after angle")
    return ang


def to_text(p: PulseProgram) -> str:
    """Canonical text; ``parse(to_text(p)) == p``."""
    body = " - ".join(str(e) for e in p.events)
    if p.name:
        return f"# {p.name}\n{body}\n"
    return body + "\n" if body else ""


# --- builtins and rewriting ---------------------------------------------------

_BUILTIN_TEXT = {
    "prep_pp": "Rx:b(pi/3) - Gz - Rx:b(pi/4) - tau1 - R-y:b(pi/4) - Gz",
    "north": (
        "R-y:b(pi/2) - tau1 - R-x:b(pi/2) - Ry:a(pi/2) - tau2 - R-y:a(pi/2)"
        " - Rx:a(pi/4) - Rx:b(pi/2) - tau1 - R-y:b(pi/2)"
    ),
    "south": (
        "Ry:b(pi/2) - tau1 - R-x:b(pi/2) - R-y:a(pi/2) - tau2 - Ry:a(pi/2)"
        " - R-x:a(pi/4) - Rx:b(pi/2) - tau1 - R-y:b(pi/2)"
    ),
    "frame_north": "Rz:a(pi) - Rz:b(pi)",
    "frame_south": "Rz:a(pi)",
}

BUILTIN_NAMES = tuple(_BUILTIN_TEXT)


def builtin(name: str) -> PulseProgram:
    """One of the stock programs: ``prep_pp``, ``north``, ``south``,
    ``frame_north`` or ``frame_south``."""
    try:
        text = _BUILTIN_TEXT[name]
    except KeyError:
        raise KeyError(f"unknown builtin program {name!r}; choose from {BUILTIN_NAMES}") from None
    return parse(text, name=name)


def simplify(p: PulseProgram) -> PulseProgram:
    """Merge neighbouring pulses on the same spin and axis, drop no-ops.

    Crushers and delays are kept in place; nothing is reordered.
    """
    out: list[PulseEvent] = []
    for ev in p.events:
        if isinstance(ev, Delay) and ev.kind == "explicit" and ev.seconds == 0.0:
            continue
        if isinstance(ev, RfPulse):
            if ev.angle.is_zero():
                continue
            if out and isinstance(out[-1], RfPulse) and (out[-1].spin, out[-1].axis) == (ev.spin, ev.axis):
                merged = out.pop().angle + ev.angle
                if not merged.is_zero():
                    out.append(RfPulse(ev.spin, ev.axis, merged))
                continue
        out.append(ev)
    return PulseProgram(tuple(out), name=p.name)
