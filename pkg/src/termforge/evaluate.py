"""Span-level scoring: exact and partial precision/recall/F1, micro-averaged.

Exact: a predicted span counts iff an identical gold span exists.  Partial:
a predicted span counts toward precision iff it overlaps any gold span, and
a gold span counts toward recall iff it overlaps any predicted span; both
are binary per span (overlap credit, not token-proportional).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .corpus import ParsedCorpus, TermSpan


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


def _prf(tp_precision: int, n_predicted: int, tp_recall: int, n_gold: int) -> PRF:
    precision = tp_precision / n_predicted if n_predicted else 0.0
    recall = tp_recall / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PRF(precision, recall, f1)


@dataclass
class EvalReport:
    exact: PRF
    partial: PRF
    counts: Dict[str, int]
    per_sentence: Optional[List[Dict[str, int]]] = None

    def to_json(self) -> dict:
        doc = {
            "exact": vars(self.exact),
            "partial": vars(self.partial),
            "counts": self.counts,
        }
        if self.per_sentence is not None:
            doc["per_sentence"] = self.per_sentence
        return doc

    def to_text(self) -> str:
        rows = [
            ("", "precision", "recall", "f1"),
            ("exact", f"{self.exact.precision:.4f}", f"{self.exact.recall:.4f}", f"{self.exact.f1:.4f}"),
            ("partial", f"{self.partial.precision:.4f}", f"{self.partial.recall:.4f}", f"{self.partial.f1:.4f}"),
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
        c = self.counts
        lines.append(
            f"gold={c['gold']} predicted={c['predicted']} exact_tp={c['exact_tp']} "
            f"partial_tp_pred={c['partial_tp_pred']} partial_tp_gold={c['partial_tp_gold']}"
        )
        return "\n".join(lines)


def evaluate(
    predicted: Sequence[Sequence[TermSpan]],
    gold: Sequence[Sequence[TermSpan]],
    per_sentence: bool = False,
) -> EvalReport:
    """Micro-averaged exact and partial P/R/F1 over aligned sentence lists."""
    if len(predicted) != len(gold):
        raise ValueError(
            f"sentence count mismatch: {len(predicted)} predicted vs {len(gold)} gold"
        )
    n_pred = n_gold = exact_tp = partial_pred = partial_gold = 0
    breakdown: List[Dict[str, int]] = []
    for pred_spans, gold_spans in zip(predicted, gold):
        pred_set, gold_set = set(pred_spans), set(gold_spans)
        s_exact = len(pred_set & gold_set)
        s_ppred = sum(1 for p in pred_set if any(p.overlaps(g) for g in gold_set))
        s_pgold = sum(1 for g in gold_set if any(g.overlaps(p) for p in pred_set))
        n_pred += len(pred_set)
        n_gold += len(gold_set)
        exact_tp += s_exact
        partial_pred += s_ppred
        partial_gold += s_pgold
        if per_sentence:
            breakdown.append(
                {
                    "predicted": len(pred_set),
                    "gold": len(gold_set),
                    "exact_tp": s_exact,
                    "partial_tp_pred": s_ppred,
                    "partial_tp_gold": s_pgold,
                }
            )
    counts = {
        "gold": n_gold,
        "predicted": n_pred,
        "exact_tp": exact_tp,
        "partial_tp_pred": partial_pred,
        "partial_tp_gold": partial_gold,
    }
    return EvalReport(
        exact=_prf(exact_tp, n_pred, exact_tp, n_gold),
        partial=_prf(partial_pred, n_pred, partial_gold, n_gold),
        counts=counts,
        per_sentence=breakdown if per_sentence else None,
    )


def evaluate_corpora(
    predicted: ParsedCorpus, gold: ParsedCorpus, per_sentence: bool = False
) -> EvalReport:
    """Evaluate two parsed label files, checking sentence alignment first."""
    if predicted.gold_spans is None or gold.gold_spans is None:
        raise ValueError("both files must carry an IOB label column")
    if len(predicted.sentences) != len(gold.sentences):
        raise ValueError(
            f"sentence count mismatch: {len(predicted.sentences)} vs {len(gold.sentences)}"
        )
    for p, g in zip(predicted.sentences, gold.sentences):
        if len(p) != len(g):
            raise ValueError(f"token count mismatch in sentence {p.id}: {len(p)} vs {len(g)}")
    return evaluate(predicted.gold_spans, gold.gold_spans, per_sentence=per_sentence)


def write_report(path, report: EvalReport) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.to_json(), f, indent=2, sort_keys=True)
        f.write("\n")
