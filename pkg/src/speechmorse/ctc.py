"""CTC scoring and decoding over a per-frame posterior grid.

Conventions used throughout:
  * The grid has one column per alphabet symbol plus a final blank column,
    so blank index == len(alphabet.symbols).
  * Likelihoods are computed in the log domain with log-sum-exp; zero
    probabilities become -inf and flow through without special cases.
  * A label sequence is feasible only if T >= len(labels) + #adjacent
    repeats (each repeat needs a separating blank frame). Infeasible
    sequences score -inf; that is a flag, not an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SymbolOutOfAlphabet

NEG_INF = float("-inf")


def _logaddexp(a: float, b: float) -> float:
    # scalar hot path for the beam search; matches np.logaddexp
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@dataclass(frozen=True)
class Alphabet:
    """Ordered decoding symbols; blank is implicit at index len(symbols)."""

    symbols: str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ 0123456789"

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be unique")
        if "\n" in self.symbols or "\r" in self.symbols:
            raise ValueError("alphabet symbols may not contain newlines")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def blank_index(self) -> int:
        return len(self.symbols)

    def index(self, char: str) -> int:
        found = self.symbols.find(char)
        if found < 0:
            raise SymbolOutOfAlphabet(f"{char!r} is not in the alphabet")
        return found


DEFAULT_ALPHABET = Alphabet()


@dataclass(frozen=True)
class LabelSeq:
    """Blank-free sequence of symbol indices."""

    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(i) for i in self.labels)
        if any(i < 0 for i in labels):
            raise ValueError("label indices must be non-negative")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def from_text(cls, text: str, alphabet: Alphabet) -> "LabelSeq":
        return cls(tuple(alphabet.index(ch) for ch in text))

    def to_text(self, alphabet: Alphabet) -> str:
        if any(i >= len(alphabet) for i in self.labels):
            raise SymbolOutOfAlphabet("label index outside the alphabet")
        return "".join(alphabet.symbols[i] for i in self.labels)


@dataclass(frozen=True)
class PosteriorGrid:
    """T x (V+1) per-frame posteriors; rows must sum to 1 within 1e-6."""

    probs: np.ndarray
    alphabet: Alphabet = DEFAULT_ALPHABET

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64, copy=True)
        width = len(self.alphabet) + 1
        if probs.ndim != 2 or probs.shape[1] != width:
            raise ValueError(f"probs must be T x {width}")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite")
        if probs.size:
            if probs.min() < -1e-12 or probs.max() > 1 + 1e-12:
                raise ValueError("probabilities must lie in [0, 1]")
            sums = probs.sum(axis=1)
            if np.max(np.abs(sums - 1.0)) > 1e-6:
                raise ValueError("each row must sum to 1 within 1e-6")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def num_frames(self) -> int:
        return self.probs.shape[0]


def min_feasible_frames(labels: LabelSeq) -> int:
    """Fewest frames that can emit the sequence: length plus repeats."""
    lab = labels.labels
    repeats = sum(1 for a, b in zip(lab, lab[1:]) if a == b)
    return len(lab) + repeats


def _augmented(labels: LabelSeq, blank: int) -> tuple[np.ndarray, np.ndarray]:
    """Blank-interleaved state sequence and its skip-transition mask."""
    aug = [blank]
    for i in labels.labels:
        aug.extend((i, blank))
    aug = np.array(aug)
    can_skip = np.zeros(len(aug), dtype=bool)
    can_skip[2:] = (aug[2:] != blank) & (aug[2:] != aug[:-2])
    return aug, can_skip


def _check_labels(labels: LabelSeq, n_symbols: int) -> None:
    if any(i >= n_symbols for i in labels.labels):
        raise SymbolOutOfAlphabet("label index outside the grid's alphabet")


def _forward(logp: np.ndarray, aug: np.ndarray, can_skip: np.ndarray) -> np.ndarray:
    """Log-domain forward lattice; row t holds log alpha_t(s)."""
    T = logp.shape[0]
    S = len(aug)
    alpha = np.full((T, S), NEG_INF)
    alpha[0, 0] = logp[0, aug[0]]
    if S > 1:
        alpha[0, 1] = logp[0, aug[1]]
    for t in range(1, T):
        prev = alpha[t - 1]
        stay = prev
        step = np.full(S, NEG_INF)
        step[1:] = prev[:-1]
        skip = np.full(S, NEG_INF)
        skip[2:] = np.where(can_skip[2:], prev[:-2], NEG_INF)
        alpha[t] = np.logaddexp(np.logaddexp(stay, step), skip) + logp[t, aug]
    return alpha


def ctc_log_likelihood(grid: PosteriorGrid, labels: LabelSeq) -> float:
    """Log of the total probability of all frame paths collapsing to labels.

    Collapse removes consecutive repeats, then blanks. An empty grid gives
    0.0 for the empty sequence (the empty product) and -inf otherwise.
    """
    _check_labels(labels, len(grid.alphabet))
    T = grid.num_frames
    if T == 0:
        return 0.0 if len(labels) == 0 else NEG_INF
    if min_feasible_frames(labels) > T:
        return NEG_INF
    with np.errstate(divide="ignore"):
        logp = np.log(grid.probs)
    aug, can_skip = _augmented(labels, grid.alphabet.blank_index)
    alpha = _forward(logp, aug, can_skip)
    last = alpha[-1]
    if len(aug) == 1:
        return float(last[0])
    return float(np.logaddexp(last[-1], last[-2]))


def ctc_gradient(logits: np.ndarray, labels: LabelSeq) -> np.ndarray:
    """Gradient of the negative log likelihood with respect to the logits.

    The posterior grid is softmax(logits) per row. With alpha including the
    frame-t emission and beta covering frames t+1..T, the gradient is
    p[t, k] - (1/P) * sum over augmented states s with symbol k of
    alpha_t(s) * beta_t(s); each row therefore sums to zero.

    For an infeasible label length the loss is infinite and the returned
    matrix is all-NaN (a flag, matching the -inf likelihood convention).
    """
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise ValueError("logits must be T x (V+1)")
    T, width = logits.shape
    blank = width - 1
    _check_labels(labels, blank)
    logp = logits - _logsumexp_rows(logits)
    p = np.exp(logp)
    if T == 0:
        return np.zeros((0, width))
    if min_feasible_frames(labels) > T:
        return np.full((T, width), np.nan)

    aug, can_skip = _augmented(labels, blank)
    S = len(aug)
    alpha = _forward(logp, aug, can_skip)
    log_z = alpha[-1, 0] if S == 1 else np.logaddexp(alpha[-1, -1], alpha[-1, -2])

    beta = np.full((T, S), NEG_INF)
    beta[-1, -1] = 0.0
    if S > 1:
        beta[-1, -2] = 0.0
    for t in range(T - 2, -1, -1):
        nxt = beta[t + 1] + logp[t + 1, aug]
        stay = nxt
        step = np.full(S, NEG_INF)
        step[:-1] = nxt[1:]
        skip = np.full(S, NEG_INF)
        skip[:-2] = np.where(can_skip[2:], nxt[2:], NEG_INF)
        beta[t] = np.logaddexp(np.logaddexp(stay, step), skip)

    occupancy = np.full((T, width), NEG_INF)
    gamma = alpha + beta
    for s in range(S):
        occupancy[:, aug[s]] = np.logaddexp(occupancy[:, aug[s]], gamma[:, s])
    return p - np.exp(occupancy - log_z)


def _logsumexp_rows(m: np.ndarray) -> np.ndarray:
    peak = m.max(axis=1, keepdims=True)
    return peak + np.log(np.exp(m - peak).sum(axis=1, keepdims=True))


def greedy_decode(grid: PosteriorGrid) -> LabelSeq:
    """Per-frame argmax, collapse consecutive repeats, drop blanks.

    Argmax ties go to the lowest index.
    """
    if grid.num_frames == 0:
        return LabelSeq(())
    best = np.argmax(grid.probs, axis=1)
    blank = grid.alphabet.blank_index
    out = []
    prev = -1
    for b in best:
        if b != prev and b != blank:
            out.append(int(b))
        prev = b
    return LabelSeq(tuple(out))


def prefix_beam_decode(
    grid: PosteriorGrid,
    beam_width: int = 16,
    lm=None,
    alpha: float = 0.0,
    beta: float = 1.2,
) -> list[tuple[LabelSeq, float]]:
    """Prefix beam search with optional shallow n-gram fusion.

    Each live prefix tracks two masses: paths ending in blank and paths
    ending in the prefix's final symbol. Pruning and the final ranking use

        score = ln p_ctc(prefix) + alpha * ln p_lm(prefix) + beta * len(prefix)

    where p_lm is the chain probability of the prefix's characters under the
    fused model (anything with a ``log_prob(token, context)`` method). Ties
    are broken lexicographically on the label indices. With beam_width at
    least the number of reachable prefixes and no fusion terms the search is
    exact.

    Returns:
      Up to beam_width (LabelSeq, score) pairs, best first.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be at least 1")
    blank = grid.alphabet.blank_index
    n_symbols = len(grid.alphabet)
    symbols = grid.alphabet.symbols
    with np.errstate(divide="ignore"):
        logp = np.log(grid.probs)

    lm_cache: dict[tuple[int, ...], float] = {(): 0.0}

    def lm_logp(prefix: tuple[int, ...]) -> float:
        cached = lm_cache.get(prefix)
        if cached is None:
            context = tuple(symbols[i] for i in prefix[:-1])
            cached = lm_cache[prefix[:-1]] + lm.log_prob(symbols[prefix[-1]], context)
            lm_cache[prefix] = cached
        return cached

    def score(prefix: tuple[int, ...], masses: tuple[float, float]) -> float:
        s = _logaddexp(masses[0], masses[1]) + beta * len(prefix)
        if lm is not None and prefix:
            s += alpha * lm_logp(prefix)
        return s

    def ranked(beams: dict) -> list:
        return sorted(
            ((prefix, masses, score(prefix, masses)) for prefix, masses in beams.items()),
            key=lambda item: (-item[2], item[0]),
        )

    beams: dict[tuple[int, ...], tuple[float, float]] = {(): (0.0, NEG_INF)}
    for t in range(grid.num_frames):
        row = logp[t].tolist()
        nxt: dict[tuple[int, ...], tuple[float, float]] = {}
        for prefix, (p_blank, p_symbol) in beams.items():
            total = _logaddexp(p_blank, p_symbol)
            if total == NEG_INF:
                continue
            # same prefix, path moves into (or stays in) blank
            if row[blank] != NEG_INF:
                old = nxt.get(prefix, (NEG_INF, NEG_INF))
                nxt[prefix] = (_logaddexp(old[0], total + row[blank]), old[1])
            # same prefix, final symbol repeated with no blank in between
            if prefix and p_symbol != NEG_INF and row[prefix[-1]] != NEG_INF:
                old = nxt.get(prefix, (NEG_INF, NEG_INF))
                nxt[prefix] = (
                    old[0],
                    _logaddexp(old[1], p_symbol + row[prefix[-1]]),
                )
            # grow the prefix by one symbol
            for s in range(n_symbols):
                lp = row[s]
                if lp == NEG_INF:
                    continue
                # emitting the final symbol again only counts as a new
                # character when a blank separated the two emissions
                source = p_blank if (prefix and s == prefix[-1]) else total
                if source == NEG_INF:
                    continue
                ext = prefix + (s,)
                old = nxt.get(ext, (NEG_INF, NEG_INF))
                nxt[ext] = (old[0], _logaddexp(old[1], source + lp))
        beams = {prefix: masses for prefix, masses, _ in ranked(nxt)[:beam_width]}

    final = ranked(beams)[:beam_width]
    return [(LabelSeq(prefix), s) for prefix, _, s in final]


def write_grid(grid: PosteriorGrid, path) -> None:
    """Plain-text grid: `T V blank_index`, the symbols verbatim, then T rows."""
    lines = [
        f"{grid.num_frames} {len(grid.alphabet)} {grid.alphabet.blank_index}",
        grid.alphabet.symbols,
    ]
    for row in grid.probs:
        lines.append(" ".join(f"{v:.12g}" for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid(path) -> PosteriorGrid:
    """Inverse of write_grid. Only the newline is stripped from the symbol
    line, so a space symbol round-trips."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: header must be 'T V blank_index'")
        n_frames, n_symbols, blank_index = (int(v) for v in header)
        symbols = fh.readline().rstrip("\n")
        if len(symbols) != n_symbols:
            raise ValueError(
                f"{path}: header says {n_symbols} symbols, line has {len(symbols)}"
            )
        if blank_index != n_symbols:
            raise ValueError(f"{path}: blank index must equal the symbol count")
        rows = []
        for _ in range(n_frames):
            parts = fh.readline().split()
            if len(parts) != n_symbols + 1:
                raise ValueError(f"{path}: each row needs {n_symbols + 1} columns")
            rows.append([float(v) for v in parts])
    probs = np.array(rows, dtype=np.float64).reshape(n_frames, n_symbols + 1)
    return PosteriorGrid(probs, Alphabet(symbols))
