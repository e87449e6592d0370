"""Finite-window potentials, partition sums over zero-padded configurations,
and pressure estimates.

A configuration in ``E^n`` is a word of ``L_{2n+1}`` written on the sites
``-n..n`` with zeros everywhere else.  Its energy is
``sum_{j=-n}^{n} phi(T^j x)``; windows that reach into the padding read the
padding zeros (no wrap-around).
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .digits import DigitSeq
from .errors import WindowTooLarge
from .language import PrefixAutomaton, as_automaton, suffix_info, walk, zero_run_after

WINDOW_BUDGET = 1 << 20


def logsumexp(values) -> float:
    """``log(sum(exp(v)))`` with a max shift and compensated summation."""
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    top = max(vals)
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class Potential:
    """``phi(x) = table[x_{-a} ... x_{b}]`` for the window ``[-a, b]``.

    ``values`` is the table flattened in lexicographic order of the window
    word; use :meth:`from_function` or :meth:`from_table` to build one.
    """

    window: tuple
    alphabet: int
    values: tuple
    name: str = "phi"

    def __post_init__(self):
        lo, hi = self.window
        if lo > 0 or hi < 0:
            raise ValueError("window must have the form [-a, b] with a, b >= 0")
        size = self.alphabet ** (hi - lo + 1)
        if len(self.values) != size:
            raise ValueError(f"table has {len(self.values)} entries, expected {size}")
        values = tuple(float(v) for v in self.values)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("potential values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "window", (int(lo), int(hi)))

    @property
    def left(self) -> int:
        return -self.window[0]

    @property
    def right(self) -> int:
        return self.window[1]

    @property
    def width(self) -> int:
        return self.window[1] - self.window[0] + 1

    @property
    def radius(self) -> int:
        return max(self.left, self.right)

    def _index(self, letters: Sequence[int]) -> int:
        idx = 0
        for x in letters:
            idx = idx * self.alphabet + x
        return idx

    def value(self, letters: Sequence[int]) -> float:
        """Value on a window word ``x_{-a} ... x_{b}``."""
        return self.values[self._index(letters)]

    def at(self, config: Callable[[int], int], j: int) -> float:
        """``phi(T^j x)`` for a configuration given as ``site -> letter``."""
        lo, hi = self.window
        return self.value([config(j + i) for i in range(lo, hi + 1)])

    @property
    def table(self) -> dict:
        return {w: self.values[i] for i, w in enumerate(product(range(self.alphabet), repeat=self.width))}

    def __add__(self, other: float) -> "Potential":
        return Potential(self.window, self.alphabet, tuple(v + other for v in self.values),
                         f"{self.name}+{other}")

    @classmethod
    def from_function(cls, alphabet: int, window: tuple, func: Callable[[tuple], float],
                      name: str = "phi") -> "Potential":
        lo, hi = window
        width = hi - lo + 1
        if alphabet ** width > WINDOW_BUDGET:
            raise WindowTooLarge(f"{alphabet}^{width} window words exceed the budget {WINDOW_BUDGET}")
        return cls((lo, hi), alphabet,
                   tuple(func(w) for w in product(range(alphabet), repeat=width)), name)

    @classmethod
    def from_table(cls, alphabet: int, window: tuple, table: Mapping, name: str = "phi") -> "Potential":
        lo, hi = window
        width = hi - lo + 1
        missing = [w for w in product(range(alphabet), repeat=width) if tuple(w) not in table]
        if missing:
            raise ValueError(f"table is not total; missing {missing[:3]}...")
        return cls.from_function(alphabet, window, lambda w: table[tuple(w)], name)

    @classmethod
    def zero(cls, alphabet: int) -> "Potential":
        return cls((0, 0), alphabet, (0.0,) * alphabet, "zero")

    @classmethod
    def constant(cls, alphabet: int, value: float) -> "Potential":
        return cls((0, 0), alphabet, (float(value),) * alphabet, f"const{value}")

    @classmethod
    def indicator(cls, alphabet: int, letter: int = 1, scale: float = 1.0) -> "Potential":
        """``scale * 1[x_0 = letter]``."""
        return cls.from_function(alphabet, (0, 0), lambda w: scale if w[0] == letter else 0.0,
                                 f"indicator{letter}" + ("" if scale == 1.0 else f"*{scale}"))

    # JSON: {"window": [-a, b], "alphabet": b, "table": {"<letters>": value}}

    @classmethod
    def from_json(cls, obj: Union[str, Mapping]) -> "Potential":
        if isinstance(obj, str):
            obj = json.loads(obj)
        lo, hi = obj["window"]
        alphabet = int(obj["alphabet"])
        table = {}
        for key, val in obj["table"].items():
            letters = key.split(",") if alphabet > 10 else list(key.replace(",", ""))
            table[tuple(int(x) for x in letters)] = float(val)
        return cls.from_table(alphabet, (int(lo), int(hi)), table, obj.get("name", "phi"))

    def to_json(self) -> dict:
        sep = "," if self.alphabet > 10 else ""
        return {
            "name": self.name,
            "window": list(self.window),
            "alphabet": self.alphabet,
            "table": {sep.join(map(str, w)): v for w, v in self.table.items()},
        }


@dataclass(frozen=True)
class OscProfile:
    deltas: dict   # offset -> delta_i
    norm: float    # sum of deltas; an upper bound for the oscillation norm
    sup_norm: float


def osc_profile(phi: Potential, *, budget: int = WINDOW_BUDGET,
                within: Union[DigitSeq, PrefixAutomaton, None] = None) -> OscProfile:
    """Single-site oscillations of the finite-window extension of ``phi``.

    With ``within`` the maxima run only over window words of the language.
    That variant is a diagnostic: the inequalities that consume the norm
    are proved for extensions to the full shift, so use the default there.
    """
    if phi.alphabet ** phi.width > budget:
        raise WindowTooLarge(f"{phi.alphabet}^{phi.width} window words exceed the budget {budget}")
    arr = np.array(phi.values).reshape((phi.alphabet,) * phi.width)
    if within is not None:
        aut = as_automaton(within)
        mask = np.zeros(arr.shape, dtype=bool)
        for w in product(range(phi.alphabet), repeat=phi.width):
            try:
                walk(aut, w)
            except Exception:
                mask[w] = True
        arr = np.where(mask, np.nan, arr)
    deltas = {}
    lo = phi.window[0]
    for i in range(phi.width):
        if within is None:
            spread = arr.max(axis=i) - arr.min(axis=i)
        else:
            with np.errstate(all="ignore"):
                spread = np.nanmax(arr, axis=i) - np.nanmin(arr, axis=i)
            spread = np.nan_to_num(spread, nan=0.0)
        deltas[lo + i] = float(spread.max())
    sup = float(np.nanmax(np.abs(arr))) if within is not None else float(np.abs(arr).max())
    return OscProfile(deltas, math.fsum(deltas.values()), sup)


def sharp_energy(phi: Potential, word: Sequence[int], start: int, sites: range | None = None) -> float:
    """``sum_j phi(T^j w#)`` for ``w`` written at ``start..`` on a zero background.

    ``sites`` defaults to the sites occupied by the word.
    """
    m = len(word)
    if sites is None:
        sites = range(start, start + m)

    def config(i):
        return word[i - start] if start <= i < start + m else 0

    return math.fsum(phi.at(config, j) for j in sites)


def boundary_sum(phi: Potential, x: Callable[[int], int], y: Callable[[int], int], m: int) -> float:
    """``sum_{i=1}^{m} |phi(T^i x) - phi(T^i y)|`` (x and y should agree on 1..m)."""
    return math.fsum(abs(phi.at(x, i) - phi.at(y, i)) for i in range(1, m + 1))


def boundary_sum_bound(phi: Potential) -> float:
    """``2 * radius * 2 * sup|phi|``: only the sites whose window leaves
    ``[1, m]`` can see a difference, and there are at most ``2 * radius``."""
    return 4.0 * phi.radius * max(abs(v) for v in phi.values)


# ---------------------------------------------------------------------------
# transfer tables


class TransferTables:
    """Forward/backward log-weights of partial configurations in ``E^n``.

    Layer ``t`` holds states ``(automaton state, last a+b letters)`` after
    sites ``-n..t`` have been written; sites beyond ``n`` are padding zeros
    and are not read by the automaton.
    """

    def __init__(self, phi: Potential, aut: PrefixAutomaton, n: int):
        if phi.alphabet != aut.alphabet:
            raise ValueError(f"potential alphabet {phi.alphabet} != digits alphabet {aut.alphabet}")
        aut.check_length(2 * n + 1)
        self.phi, self.aut, self.n = phi, aut, n
        self.last = n + phi.right
        start = {(0, (0,) * (phi.left + phi.right)): 0.0}
        self._forward = [start]
        for t in range(-n, self.last + 1):
            self._forward.append(self.advance(self._forward[-1], t))
        self.log_total = logsumexp(self._forward[-1].values())
        self._backward = None

    def _moves(self, key, t, forced=None):
        s, ctx = key
        n, phi = self.n, self.phi
        if t > n:
            letters = (0,) if forced in (None, 0) else ()
        else:
            letters = range(phi.alphabet) if forced is None else (forced,)
        for x in letters:
            if t <= n:
                s2 = self.aut.step(s, x)
                if s2 is None:
                    continue
            else:
                s2 = s
            window = ctx + (x,)
            j = t - phi.right
            term = phi.value(window) if -n <= j <= n else 0.0
            yield (s2, window[1:]), term

    def advance(self, layer: dict, t: int, forced: int | None = None) -> dict:
        acc = defaultdict(list)
        for key, lw in layer.items():
            for key2, term in self._moves(key, t, forced):
                acc[key2].append(lw + term)
        return {k: logsumexp(v) for k, v in acc.items()}

    def forward(self, t: int) -> dict:
        """Layer after site ``t`` (``t = -n-1`` is the empty start)."""
        return self._forward[t + self.n + 1]

    def backward(self, t: int) -> dict:
        if self._backward is None:
            back = [None] * len(self._forward)
            back[-1] = {k: 0.0 for k in self._forward[-1]}
            for t2 in range(self.last, -self.n - 1, -1):
                nxt = back[t2 + self.n + 1]
                layer = {}
                for key in self._forward[t2 + self.n]:
                    layer[key] = logsumexp(term + nxt[key2] for key2, term in self._moves(key, t2)
                                           if key2 in nxt)
                back[t2 + self.n] = layer
            self._backward = back
        return self._backward[t + self.n + 1]

    def log_pinned(self, k: int, word: Sequence[int], star: bool = False) -> float:
        """Log of the partition sum with ``word`` written at sites ``k..``.

        Sites past ``n`` are padding, so letters placed there must be zero.
        With ``star`` the configuration must sit in ``q_0`` just before ``k``.
        """
        layer = self.forward(k - 1)
        if star:
            layer = {key: w for key, w in layer.items() if key[0] == 0}
        t = k - 1
        for i, x in enumerate(word):
            t = k + i
            if t > self.last:
                if x != 0:
                    return -math.inf
                t = self.last
                continue
            layer = self.advance(layer, t, forced=x)
        back = self.backward(t)
        return logsumexp(w + back[key] for key, w in layer.items())


@lru_cache(maxsize=256)
def transfer_tables(phi: Potential, aut: PrefixAutomaton, n: int) -> TransferTables:
    return TransferTables(phi, aut, n)


def _tables(phi, digits, n) -> TransferTables:
    return transfer_tables(phi, as_automaton(digits), n)


def log_xi_full(phi: Potential, n: int, digits) -> float:
    return _tables(phi, digits, n).log_total


def xi_full(phi: Potential, n: int, digits) -> float:
    """Partition sum over ``E^n``; use :func:`log_xi_full` when it may overflow."""
    return math.exp(log_xi_full(phi, n, digits))


def _check_window(n, k, l, v):
    if not -n <= k <= l <= n:
        raise ValueError(f"[{k}, {l}] is not inside [-{n}, {n}]")
    if len(v) != l - k + 1:
        raise ValueError(f"|v| = {len(v)} does not match the window length {l - k + 1}")


def log_xi_constrained(phi: Potential, n: int, k: int, l: int, v: Sequence[int], star: bool,
                       digits) -> float:
    _check_window(n, k, l, v)
    aut = as_automaton(digits)
    walk(aut, v)
    return transfer_tables(phi, aut, n).log_pinned(k, tuple(v), star)


def xi_constrained(phi: Potential, n: int, k: int, l: int, v: Sequence[int], star: bool,
                   digits) -> float:
    """Partition sum with ``x_{[k,l]} = v``; with ``star`` also ``s(x_k^-)`` empty."""
    return math.exp(log_xi_constrained(phi, n, k, l, v, star, digits))


# ---------------------------------------------------------------------------
# pressure


def _loop_log_partition(phi: Potential, aut: PrefixAutomaton, m: int) -> float:
    """log of sum over ``w`` in ``L_m`` with ``q(w) = q_0`` of
    ``exp sum_{j=1}^m phi(T^j w#)``, by a rescaled linear-domain transfer."""
    aut.check_length(m)
    right = phi.right
    index = {(0, (0,) * (phi.left + right)): 0}
    vec = np.ones(1)
    log_scale = 0.0
    for t in range(1, m + right + 1):
        new_index: dict = {}
        src, dst, terms = [], [], []
        for (s, ctx), i in index.items():
            for x in (range(phi.alphabet) if t <= m else (0,)):
                s2 = aut.step(s, x) if t <= m else s
                if s2 is None:
                    continue
                window = ctx + (x,)
                j = new_index.setdefault((s2, window[1:]), len(new_index))
                src.append(i)
                dst.append(j)
                terms.append(phi.value(window) if 1 <= t - right <= m else 0.0)
        new = np.zeros(len(new_index))
        np.add.at(new, dst, vec[src] * np.exp(terms))
        if t == m:
            keep = np.array([key[0] == 0 for key in new_index])
            new = np.where(keep, new, 0.0)
        total = new.sum()
        if total == 0:
            return -math.inf
        vec = new / total
        log_scale += math.log(total)
        index = new_index
    return log_scale


def loop_pressure_term(phi: Potential, m: int, digits) -> float:
    return _loop_log_partition(phi, as_automaton(digits), m) / m


def full_pressure_term(phi: Potential, n: int, digits) -> float:
    return log_xi_full(phi, n, digits) / (2 * n + 1)


def aitken(xs: Sequence[float]) -> float:
    """Aitken delta-squared on the last three terms, else the last term."""
    if len(xs) < 3:
        return xs[-1]
    x0, x1, x2 = xs[-3:]
    d1, d2 = x1 - x0, x2 - x1
    den = d2 - d1
    if den == 0 or abs(den) < 1e-14 * max(1.0, abs(x2)):
        return x2
    acc = x2 - d2 * d2 / den
    # a wild jump means the tail is not geometric; keep the last value
    if abs(acc - x2) > 10 * abs(d2) + 1e-12:
        return x2
    return acc


FULL = "full"
LOOP = "loop-words"


@dataclass(frozen=True)
class PressureEstimate:
    """``values`` is the requested mode's sequence ``(n, P_n)``;
    ``companion`` the other mode's, computed independently.  Loop-word
    terms use words of length ``2n+1`` so both are indexed by ``n``."""

    values: tuple
    mode: str
    extrapolated: float
    uncertainty: float
    companion: tuple = ()
    companion_extrapolated: float = math.nan


def pressure(phi: Potential, n_max: int, mode: str = FULL, digits=None) -> PressureEstimate:
    if digits is None:
        raise ValueError("digits are required")
    if mode == "loop":
        mode = LOOP
    if mode not in (FULL, LOOP):
        raise ValueError(f"unknown pressure mode {mode!r}")
    aut = as_automaton(digits)
    aut.check_length(2 * n_max + 1)
    ns = range(1, n_max + 1)
    full = tuple((n, full_pressure_term(phi, n, aut)) for n in ns)
    loop = tuple((n, loop_pressure_term(phi, 2 * n + 1, aut)) for n in ns)
    ext_full = aitken([p for _, p in full])
    ext_loop = aitken([p for _, p in loop])
    primary, other = (full, loop) if mode == FULL else (loop, full)
    ext, ext_other = (ext_full, ext_loop) if mode == FULL else (ext_loop, ext_full)
    uncertainty = abs(ext_full - ext_loop) + abs(primary[-1][1] - ext)
    return PressureEstimate(primary, mode, ext, uncertainty, other, ext_other)


# ---------------------------------------------------------------------------
# partition-sum inequalities


@dataclass(frozen=True)
class BoundReport:
    """Both sides of an inequality chain, in logs.

    ``slack`` holds ``log(rhs) - log(lhs)`` for each inequality; the chain
    holds when every slack is ``>= -tol``.
    """

    kind: str
    word: tuple
    hat: tuple
    window: tuple
    n: int
    log_values: dict
    log_constant: float
    slack: tuple
    holds: bool
    corrected_holds: bool | None = None


SLACK_TOL = 1e-12


def check_hat_upper(phi: Potential, n: int, k: int, l: int, v: Sequence[int], digits,
                 osc: OscProfile | None = None) -> BoundReport:
    """``Xi*(v) <= Xi(v) <= (z(c_1)+2) e^{2|phi|} Xi*(v^)``.

    The constant comes from counting preimages of the hat map, which can
    number ``z(c_1)+3`` (for beta = 3/2, ``10000`` is the hat of ``10000``,
    ``10001``, ``10010`` and ``10100``).  ``holds`` uses the stated constant;
    ``corrected_holds`` uses ``z(c_1)+3``.
    """
    v = tuple(v)
    aut = as_automaton(digits)
    osc = osc or osc_profile(phi)
    info = suffix_info(aut, v)
    star_v = log_xi_constrained(phi, n, k, l, v, True, aut)
    plain_v = log_xi_constrained(phi, n, k, l, v, False, aut)
    star_hat = log_xi_constrained(phi, n, k, l, info.hat, True, aut)
    z1 = zero_run_after(aut, 1)
    log_const = math.log(z1 + 2) + 2 * osc.norm
    slack = (plain_v - star_v, log_const + star_hat - plain_v)
    tol = -SLACK_TOL * max(1.0, abs(plain_v))
    corrected = slack[1] + math.log((z1 + 3) / (z1 + 2))
    return BoundReport("hat-upper", v, info.hat, (k, l), n,
                       {"star": star_v, "plain": plain_v, "star_hat": star_hat},
                       log_const, slack, all(s >= tol for s in slack),
                       slack[0] >= tol and corrected >= tol)


def check_hat_lower(phi: Potential, n: int, k: int, l: int, v: Sequence[int], digits,
                 osc: OscProfile | None = None) -> BoundReport:
    """``Xi*(v) >= |A|^{-(z(v)+1)} e^{-(z(v)+2)|phi|} Xi*(v^)``."""
    v = tuple(v)
    aut = as_automaton(digits)
    osc = osc or osc_profile(phi)
    info = suffix_info(aut, v)
    star_v = log_xi_constrained(phi, n, k, l, v, True, aut)
    star_hat = log_xi_constrained(phi, n, k, l, info.hat, True, aut)
    log_const = -(info.z + 1) * math.log(aut.alphabet) - (info.z + 2) * osc.norm
    slack = (star_v - (log_const + star_hat),)
    return BoundReport("hat-lower", v, info.hat, (k, l), n,
                       {"star": star_v, "star_hat": star_hat},
                       log_const, slack, slack[0] >= -SLACK_TOL * max(1.0, abs(star_v)))
