"""Cost-sensitive multinomial naive Bayes used to triage pages before the full detector.

Features are lowercase alphanumeric runs of the raw source plus structural
tokens (``tag:div``, ``css:position:absolute``, ``script:eval`` ...).

Class-conditional counts are *averaged per document* before smoothing, so
duplicating every training document leaves the model unchanged.  Tokens
never seen in training carry no evidence and are skipped.  A page is flagged
when ``P(spam | page) >= cost_fp / (cost_fp + cost_fn)``.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence, Union

from .dom import parse_document
from .style import parse_declarations

SPAM, NORMAL = "spam", "normal"
_WORD = re.compile(rb"[a-z0-9]+")


def page_tokens(data: Union[bytes, str]) -> Counter:
    """Token multiset for one HTML page."""
    raw = data.encode("utf-8", "replace") if isinstance(data, str) else data
    tokens = Counter(m.group(0).decode("ascii") for m in _WORD.finditer(raw.lower()))
    root = parse_document(raw)
    for node in root.iter():
        if node.tag == "#document":
            continue
        tokens[f"tag:{node.tag}"] += 1
        style = node.get("style")
        if style:
            for d in parse_declarations(style):
                tokens[f"css:{d.prop}:{d.value.strip().lower()}"] += 1
        if node.tag == "style" and node.raw_text:
            for body in re.findall(r"\{([^}]*)\}", node.raw_text):
                for d in parse_declarations(body):
                    tokens[f"css:{d.prop}:{d.value.strip().lower()}"] += 1
        if node.tag == "script":
            src = node.raw_text or ""
            tokens["script:inline" if src.strip() else "script:empty"] += 1
            for marker, pattern in (
                ("eval", r"\beval\s*\("), ("write", r"document\.write"), ("hex", r"\\x[0-9a-fA-F]{2}"),
                ("location", r"\blocation\b"), ("fromcharcode", r"fromCharCode"),
            ):
                if re.search(pattern, src):
                    tokens[f"script:{marker}"] += 1
        if node.tag == "meta" and (node.get("http-equiv") or "").lower() == "refresh":
            tokens["meta:refresh"] += 1
    return tokens


@dataclass(frozen=True)
class NBModel:
    vocabulary: Mapping[str, int]
    log_likelihoods: Mapping[str, tuple[float, ...]]  # class -> per-token log probability
    class_priors: Mapping[str, float]  # class -> log prior
    cost_fp: float = 1.0
    cost_fn: float = 10.0
    alpha: float = 1.0

    @property
    def threshold(self) -> float:
        return self.cost_fp / (self.cost_fp + self.cost_fn)

    def with_costs(self, cost_fp: float, cost_fn: float) -> "NBModel":
        if cost_fp <= 0 or cost_fn <= 0:
            raise ValueError("costs must be positive")
        return replace(self, cost_fp=float(cost_fp), cost_fn=float(cost_fn))

    def to_json(self) -> str:
        return json.dumps(
            {
                "vocabulary": sorted(self.vocabulary, key=self.vocabulary.__getitem__),
                "log_likelihoods": {c: list(v) for c, v in sorted(self.log_likelihoods.items())},
                "class_priors": dict(sorted(self.class_priors.items())),
                "cost_fp": self.cost_fp,
                "cost_fn": self.cost_fn,
                "alpha": self.alpha,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "NBModel":
        d = json.loads(text)
        return cls(
            vocabulary={t: i for i, t in enumerate(d["vocabulary"])},
            log_likelihoods={c: tuple(v) for c, v in d["log_likelihoods"].items()},
            class_priors=d["class_priors"],
            cost_fp=d["cost_fp"],
            cost_fn=d["cost_fn"],
            alpha=d["alpha"],
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "NBModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def nb_train(
    labeled: Iterable[tuple[Mapping[str, int], str]],
    cost_fp: float = 1.0,
    cost_fn: float = 10.0,
    alpha: float = 1.0,
) -> NBModel:
    """Train on ``(token counts, class)`` pairs; class is ``"spam"`` or ``"normal"``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if cost_fp <= 0 or cost_fn <= 0:
        raise ValueError("costs must be positive")
    sums: dict[str, Counter] = {SPAM: Counter(), NORMAL: Counter()}
    docs = {SPAM: 0, NORMAL: 0}
    for tokens, label in labeled:
        if label not in docs:
            raise ValueError(f"unknown class {label!r}")
        docs[label] += 1
        sums[label].update(tokens)
    if not docs[SPAM] or not docs[NORMAL]:
        raise ValueError("training needs documents of both classes")
    vocab_list = sorted(set(sums[SPAM]) | set(sums[NORMAL]))
    vocabulary = {t: i for i, t in enumerate(vocab_list)}
    v = len(vocab_list)
    likelihoods = {}
    for c in (SPAM, NORMAL):
        avg = [sums[c][t] / docs[c] for t in vocab_list]
        denom = math.fsum(avg) + alpha * v
        likelihoods[c] = tuple(math.log((a + alpha) / denom) for a in avg)
    total = docs[SPAM] + docs[NORMAL]
    priors = {c: math.log(docs[c] / total) for c in (SPAM, NORMAL)}
    return NBModel(vocabulary, likelihoods, priors, float(cost_fp), float(cost_fn), float(alpha))


def _logsumexp(a: float, b: float) -> float:
    m = max(a, b)
    return m + math.log(math.exp(a - m) + math.exp(b - m))


def nb_score(model: NBModel, tokens: Mapping[str, int]) -> float:
    """Posterior probability of the spam class."""
    score = {c: model.class_priors[c] for c in (SPAM, NORMAL)}
    for tok in sorted(tokens):
        idx = model.vocabulary.get(tok)
        n = tokens[tok]
        if idx is None or n <= 0:
            continue
        for c in (SPAM, NORMAL):
            score[c] += n * model.log_likelihoods[c][idx]
    return math.exp(score[SPAM] - _logsumexp(score[SPAM], score[NORMAL]))


def nb_filter(model: NBModel, pages: Sequence[tuple[Hashable, Mapping[str, int]]]) -> list[Hashable]:
    """Keys of pages whose spam posterior reaches the cost threshold, in input order."""
    t = model.threshold
    return [key for key, tokens in pages if nb_score(model, tokens) >= t]
