"""Count-based n-gram language model with add-k smoothing.

Tokens are plain strings: single characters by default (so the model composes
directly with the character decoding alphabet) or whitespace-split words.
Three literals are reserved and may not appear in training corpora:
``<s>`` (begin padding), ``</s>`` (end of sequence), ``<unk>`` (out of
vocabulary). The conditional distribution for any context is over
vocab + {UNK, EOS}, so it always sums to one; an entirely unseen context
backs off to the uniform distribution through the same formula.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .errors import EmptyText

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
_RESERVED = (BOS, EOS, UNK)


def tokenize_chars(text: str) -> list[str]:
    return list(text)


def tokenize_words(text: str) -> list[str]:
    return text.split()


@dataclass
class NGramModel:
    """Frozen-by-convention model: order, smoothing, vocab, context counts."""

    order: int
    smoothing_k: float
    vocab: tuple[str, ...]
    counts: dict[tuple[str, ...], Counter]
    totals: dict[tuple[str, ...], int]
    _vocab_set: frozenset = field(init=False, repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if self.smoothing_k <= 0:
            raise ValueError("smoothing_k must be positive")
        self._vocab_set = frozenset(self.vocab)

    @property
    def num_outcomes(self) -> int:
        """Size of every conditional distribution: |vocab| + UNK + EOS."""
        return len(self.vocab) + 2

    def _map(self, token: str) -> str:
        if token in self._vocab_set or token in (BOS, EOS):
            return token
        return UNK

    def _context(self, context) -> tuple[str, ...]:
        if self.order == 1:
            return ()
        ctx = tuple(self._map(t) for t in context)
        need = self.order - 1
        if len(ctx) >= need:
            return ctx[-need:]
        return (BOS,) * (need - len(ctx)) + ctx

    def log_prob(self, token: str, context=()) -> float:
        """ln p(token | context) with add-k smoothing.

        Long contexts are truncated to the last order-1 tokens, short ones
        are padded with BOS, and out-of-vocabulary tokens (in either
        position) are mapped to UNK.
        """
        ctx = self._context(context)
        tok = self._map(token)
        bucket = self.counts.get(ctx)
        count = bucket[tok] if bucket is not None else 0
        total = self.totals.get(ctx, 0)
        k = self.smoothing_k
        return math.log((count + k) / (total + k * self.num_outcomes))

    def perplexity(self, tokens) -> float:
        """exp of the mean negative log prob over the tokens plus EOS.

        The normalizer is len(tokens) + 1 because the end transition is
        scored too.

        Raises:
          EmptyText: tokens is empty.
        """
        tokens = list(tokens)
        if not tokens:
            raise EmptyText("perplexity of an empty sequence is undefined")
        total_lp = 0.0
        for i, tok in enumerate(tokens):
            total_lp += self.log_prob(tok, tokens[:i])
        total_lp += self.log_prob(EOS, tokens)
        return math.exp(-total_lp / (len(tokens) + 1))

    def save(self, path) -> None:
        """Plain-text serialization, byte-identical across runs.

        Two header lines (order, k), then one sorted line per count:
        the order-1 context tokens, the next token, and the count, all
        tab-separated. Tokens therefore may not contain tabs or newlines.
        """
        lines = []
        for ctx, bucket in self.counts.items():
            for tok, count in bucket.items():
                lines.append("\t".join([*ctx, tok, str(count)]))
        lines.sort()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"order\t{self.order}\n")
            # repr is the shortest string that parses back to the same float
            fh.write(f"k\t{self.smoothing_k!r}\n")
            fh.write("\n".join(lines) + ("\n" if lines else ""))


def train(corpus, order: int = 3, smoothing_k: float = 0.1) -> NGramModel:
    """Counts n-grams over an iterable of token sequences.

    Every sequence is padded with order-1 BOS tokens and closed with one
    EOS, so p(first-token | BOS...) and p(EOS | ...) are both modeled.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if smoothing_k <= 0:
        raise ValueError("smoothing_k must be positive")
    sequences = [list(seq) for seq in corpus]
    for seq in sequences:
        for tok in seq:
            if tok in _RESERVED:
                raise ValueError(f"corpus may not contain the reserved token {tok!r}")
            if "\t" in tok or "\n" in tok:
                raise ValueError("tokens may not contain tabs or newlines")
    vocab = sorted({tok for seq in sequences for tok in seq})
    counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
    totals: dict[tuple[str, ...], int] = defaultdict(int)
    for seq in sequences:
        history = [BOS] * (order - 1)
        for tok in seq + [EOS]:
            ctx = tuple(history[-(order - 1) :]) if order > 1 else ()
            counts[ctx][tok] += 1
            totals[ctx] += 1
            history.append(tok)
    return NGramModel(order, smoothing_k, tuple(vocab), dict(counts), dict(totals))


def load(path) -> NGramModel:
    """Reads a model saved by NGramModel.save."""
    with open(path, "r", encoding="utf-8") as fh:
        order_line = fh.readline().rstrip("\n").split("\t")
        k_line = fh.readline().rstrip("\n").split("\t")
        if order_line[:1] != ["order"] or k_line[:1] != ["k"]:
            raise ValueError(f"{path}: missing order/k header")
        order = int(order_line[1])
        smoothing_k = float(k_line[1])
        counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
        totals: dict[tuple[str, ...], int] = defaultdict(int)
        next_tokens = set()
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != order + 1:
                raise ValueError(f"{path}: bad line {line!r}")
            ctx = tuple(fields[: order - 1])
            tok = fields[-2]
            counts[ctx][tok] += int(fields[-1])
            totals[ctx] += int(fields[-1])
            next_tokens.add(tok)
    vocab = sorted(next_tokens - {EOS})
    return NGramModel(order, smoothing_k, tuple(vocab), dict(counts), dict(totals))
