"""Morse presentations: ordered critical events and their widths.

A presentation is read bottom to top.  Each minimum adds two strands to the
level above it, each maximum removes two.  Crossings are not modeled; the
width of a projection depends only on the event sequence.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels


class Kind(enum.IntEnum):
    MIN = 1
    MAX = -1

    @property
    def token(self) -> str:
        return "m" if self is Kind.MIN else "M"

    def flipped(self) -> "Kind":
        return Kind(-int(self))


class InvalidPresentation(ValueError):
    """Raised when an operation receives a presentation that fails validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(ValueError):
    def __init__(self, line: int, token: str, message: str):
        self.line = line
        self.token = token
        super().__init__(f"line {line}: {message} (token {token!r})")


@dataclass(frozen=True)
class CriticalEvent:
    kind: Kind
    owner: str = ""


@dataclass(frozen=True, eq=False)
class MorsePresentation:
    """Critical events bottom to top plus boundary puncture counts.

    ``kinds`` is stored as a read-only int8 array (+1 minimum, -1 maximum)
    and ``owners`` as a parallel tuple of labels.
    """

    kinds: np.ndarray
    owners: tuple
    punctures_bottom: int = 0
    punctures_top: int = 0

    def __post_init__(self):
        kinds = np.array(self.kinds, dtype=np.int8).reshape(-1)
        kinds.setflags(write=False)
        object.__setattr__(self, "kinds", kinds)
        owners = tuple(self.owners) if self.owners is not None else ()
        if not owners:
            owners = ("",) * kinds.shape[0]
        if len(owners) != kinds.shape[0]:
            raise ValueError(f"{len(owners)} owners for {kinds.shape[0]} events")
        if np.any((kinds != 1) & (kinds != -1)):
            raise ValueError("event kinds must be +1 (minimum) or -1 (maximum)")
        object.__setattr__(self, "owners", owners)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_events(cls, events: Iterable, punctures_bottom: int = 0, punctures_top: int | None = None):
        """Build from ``CriticalEvent`` objects, ``Kind`` values or tokens ``m``/``M``."""
        kinds, owners = [], []
        for ev in events:
            if isinstance(ev, CriticalEvent):
                kinds.append(int(ev.kind))
                owners.append(ev.owner)
            elif isinstance(ev, str):
                kinds.append(int(_TOKENS[ev]))
                owners.append("")
            else:
                kinds.append(int(Kind(ev)))
                owners.append("")
        if punctures_top is None:
            punctures_top = punctures_bottom + 2 * sum(kinds)
        return cls(np.array(kinds, dtype=np.int8), tuple(owners), punctures_bottom, punctures_top)

    @classmethod
    def knot(cls, tokens: str | Sequence, owner: str = ""):
        """Shorthand: ``MorsePresentation.knot("m m M M")``."""
        if isinstance(tokens, str):
            tokens = tokens.split()
        p = cls.from_events(tokens, 0, 0)
        if owner:
            p = p.relabel(owner)
        return p

    def relabel(self, owner: str) -> "MorsePresentation":
        return MorsePresentation(self.kinds, (owner,) * len(self), self.punctures_bottom, self.punctures_top)

    # -- basic protocol ---------------------------------------------------

    def __len__(self):
        return int(self.kinds.shape[0])

    def __eq__(self, other):
        if not isinstance(other, MorsePresentation):
            return NotImplemented
        return (
            self.punctures_bottom == other.punctures_bottom
            and self.punctures_top == other.punctures_top
            and np.array_equal(self.kinds, other.kinds)
            and self.owners == other.owners
        )

    def __hash__(self):
        return hash((self.kinds.tobytes(), self.owners, self.punctures_bottom, self.punctures_top))

    def __repr__(self):
        toks = " ".join(Kind(int(k)).token for k in self.kinds)
        return f"MorsePresentation(punctures=({self.punctures_bottom},{self.punctures_top}), events=[{toks}])"

    @property
    def events(self) -> tuple:
        return tuple(CriticalEvent(Kind(int(k)), o) for k, o in zip(self.kinds, self.owners))

    @cached_property
    def n_minima(self) -> int:
        return int(np.count_nonzero(self.kinds == 1))

    @cached_property
    def n_maxima(self) -> int:
        return int(np.count_nonzero(self.kinds == -1))

    @property
    def is_knot(self) -> bool:
        return self.punctures_bottom == 0 and self.punctures_top == 0

    def owner_span(self, owners) -> tuple[int, int]:
        """Half-open index range of the events carrying any label in ``owners``.

        Raises ``ValueError`` when the events are missing or not contiguous.
        """
        if isinstance(owners, str):
            owners = {owners}
        owners = set(owners)
        idx = [i for i, o in enumerate(self.owners) if o in owners]
        if not idx:
            raise ValueError(f"no events owned by {sorted(owners)}")
        lo, hi = idx[0], idx[-1] + 1
        if hi - lo != len(idx):
            raise ValueError(f"events owned by {sorted(owners)} are not contiguous")
        return lo, hi


_TOKENS = {"m": Kind.MIN, "M": Kind.MAX}


def validate(p: MorsePresentation) -> list[str]:
    """Every invariant violation of ``p``; an empty list means valid."""
    out = []
    if p.punctures_bottom < 0 or p.punctures_top < 0:
        out.append("negative puncture count")
    expected_top = p.punctures_bottom + 2 * p.n_minima - 2 * p.n_maxima
    if _kernels.min_level(p.kinds, p.punctures_bottom) < 0:
        out.append("negative strand count")
    if expected_top != p.punctures_top:
        out.append(f"boundary count mismatch: events give top {expected_top}, declared {p.punctures_top}")
    if p.is_knot:
        if len(p) == 0:
            out.append("knot presentation has no events")
        else:
            if int(p.kinds[0]) != 1:
                out.append("knot presentation must start with a minimum")
            if int(p.kinds[-1]) != -1:
                out.append("knot presentation must end with a maximum")
            if len(p) > 1 and int(_kernels.levels(p.kinds, 0)[:-1].min()) < 2:
                out.append("knot presentation has an interior level with fewer than 2 strands")
    return out


def require_valid(p: MorsePresentation) -> MorsePresentation:
    if p.__dict__.get("_valid"):
        return p
    bad = validate(p)
    if bad:
        raise InvalidPresentation(bad)
    # instances are immutable, so the verdict can be kept
    object.__setattr__(p, "_valid", True)
    return p


def profile(p: MorsePresentation) -> list[int]:
    """Strand counts at the interior regular levels, bottom to top."""
    require_valid(p)
    if len(p) < 2:
        return []
    return [int(c) for c in _kernels.levels(p.kinds, p.punctures_bottom)[:-1]]


def width_direct(p: MorsePresentation) -> int:
    require_valid(p)
    return _kernels.width(p.kinds, p.punctures_bottom)


def width_unchecked(p: MorsePresentation) -> int:
    """Width without validation, for hot loops over known-valid input."""
    return _kernels.width(p.kinds, p.punctures_bottom)


@dataclass(frozen=True)
class WidthReport:
    total: int
    thick: tuple
    thin: tuple

    @property
    def lemma_total(self) -> int:
        """(sum thick^2 - sum thin^2) / 2."""
        return (sum(b * b for b in self.thick) - sum(a * a for a in self.thin)) // 2


def thick_thin_of_profile(counts: Sequence[int]) -> tuple[list[int], list[int]]:
    """Thick and thin values of a knot profile padded with 0 at both ends."""
    padded = [0, *counts, 0]
    thick, thin = [], []
    for i in range(1, len(padded) - 1):
        c = padded[i]
        if c > padded[i - 1] and c > padded[i + 1]:
            thick.append(c)
        elif c < padded[i - 1] and c < padded[i + 1]:
            thin.append(c)
    return thick, thin


def thick_thin(p: MorsePresentation) -> WidthReport:
    if not p.is_knot:
        raise ValueError("thick/thin decomposition is only defined for knot presentations")
    counts = profile(p)
    thick, thin = thick_thin_of_profile(counts)
    return WidthReport(sum(counts), tuple(thick), tuple(thin))


def mirror(p: MorsePresentation) -> MorsePresentation:
    """Reflect heights: reverse the events and swap minima with maxima."""
    return MorsePresentation(-p.kinds[::-1], p.owners[::-1], p.punctures_top, p.punctures_bottom)


def concat(*parts: MorsePresentation) -> MorsePresentation:
    """Stack presentations bottom to top; boundary counts must agree."""
    for lower, upper in zip(parts, parts[1:]):
        if lower.punctures_top != upper.punctures_bottom:
            raise ValueError(f"cannot stack: top {lower.punctures_top} against bottom {upper.punctures_bottom}")
    kinds = np.concatenate([q.kinds for q in parts]) if parts else np.zeros(0, np.int8)
    owners = tuple(o for q in parts for o in q.owners)
    return MorsePresentation(kinds, owners, parts[0].punctures_bottom, parts[-1].punctures_top)


# -- text format -------------------------------------------------------------

_OWNER_RE = re.compile(r"^[^\s#]+$")


def serialize(p: MorsePresentation) -> str:
    require_valid(p)
    toks = []
    for k, o in zip(p.kinds, p.owners):
        t = Kind(int(k)).token
        toks.append(f"{t}@{o}" if o else t)
    return f"punctures {p.punctures_bottom} {p.punctures_top}\nevents {' '.join(toks)}\n"


def parse(text: str) -> MorsePresentation:
    """Parse the two-line presentation format.

    ``punctures <bottom> <top>`` may be omitted (defaults to a knot); comments
    start with ``#``.
    """
    bottom = top = None
    kinds, owners = [], []
    seen_events = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "punctures":
            if len(rest) != 2:
                raise ParseError(lineno, line, "expected 'punctures <bottom> <top>'")
            try:
                bottom, top = (int(x) for x in rest)
            except ValueError:
                bad = next(x for x in rest if not x.lstrip("-").isdigit())
                raise ParseError(lineno, bad, "puncture count is not an integer") from None
        elif head == "events":
            if seen_events:
                raise ParseError(lineno, head, "duplicate events line")
            seen_events = True
            for tok in rest:
                base, _, owner = tok.partition("@")
                if base not in _TOKENS or (owner and not _OWNER_RE.match(owner)):
                    raise ParseError(lineno, tok, "unknown event token")
                kinds.append(int(_TOKENS[base]))
                owners.append(owner)
        else:
            raise ParseError(lineno, head, "unknown directive")
    if not seen_events:
        raise ParseError(0, "", "missing events line")
    if bottom is None:
        bottom = top = 0
    return MorsePresentation(np.array(kinds, dtype=np.int8), tuple(owners), bottom, top)


def read_presentation(path) -> MorsePresentation:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write_presentation(p: MorsePresentation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(p))


# -- enumeration helpers used by tests and the harness ----------------------


def iter_knot_sequences(max_events: int):
    """Every valid knot kind sequence with at most ``max_events`` events."""
    for half in range(1, max_events // 2 + 1):
        n = 2 * half
        seq = [0] * n

        def rec(i, count, mins):
            if i == n:
                if count == 0:
                    yield tuple(seq)
                return
            # interior levels of a knot must stay >= 2
            for k in (1, -1):
                nxt = count + 2 * k
                if k == 1 and mins == half:
                    continue
                if i < n - 1 and nxt < 2:
                    continue
                if i == n - 1 and nxt != 0:
                    continue
                seq[i] = k
                yield from rec(i + 1, nxt, mins + (k == 1))

        yield from rec(0, 0, 0)


def random_knot(rng: np.random.Generator, n_events: int) -> MorsePresentation:
    """Uniform-ish random valid knot presentation with ``n_events`` (even) events."""
    if n_events < 2 or n_events % 2:
        raise ValueError("knot presentations have an even, positive number of events")
    half = n_events // 2
    while True:
        kinds = np.array([1] * half + [-1] * half, dtype=np.int8)
        rng.shuffle(kinds)
        lv = 2 * np.cumsum(kinds.astype(np.int64))
        if kinds[0] == 1 and kinds[-1] == -1 and (n_events == 2 or lv[:-1].min() >= 2):
            return MorsePresentation(kinds, (), 0, 0)
        # fall back to a reflection-fixed walk when shuffles keep failing
        if rng.random() < 0.2:
            return _random_walk_knot(rng, half)


def _random_walk_knot(rng, half):
    kinds = []
    count, mins = 0, 0
    n = 2 * half
    for i in range(n):
        remaining = n - i
        can_min = mins < half and (count + 2) // 2 <= remaining - 1
        can_max = count - 2 >= (2 if i < n - 1 else 0)
        if can_min and can_max:
            k = 1 if rng.random() < 0.5 else -1
        elif can_min:
            k = 1
        else:
            k = -1
        kinds.append(k)
        count += 2 * k
        mins += k == 1
    return MorsePresentation(np.array(kinds, dtype=np.int8), (), 0, 0)
