"""Shared report container for inequality evaluations."""

from __future__ import annotations

from dataclasses import dataclass

# Strict positivity margin used everywhere a violation flag is derived.
VIOLATION_TOL = 1e-12


@dataclass(frozen=True)
class InequalityReport:
    """Per-term probabilities plus the combined value against a classical bound.

    ``terms`` keeps the (label, probability) pairs in display order; ``value``
    is the signed combination the inequality bounds.  ``term_errors`` and
    ``stat_err`` are filled only for event-based evaluations.
    """

    terms: tuple[tuple[str, float], ...]
    value: float
    bound: float
    violated: bool
    term_errors: tuple[float, ...] | None = None
    stat_err: float | None = None

    def term(self, label: str) -> float:
        for name, value in self.terms:
            if name == label:
                return value
        raise KeyError(label)

    def to_dict(self) -> dict:
        out = {
            "terms": {name: value for name, value in self.terms},
            "value": self.value,
            "bound": self.bound,
            "violated": self.violated,
        }
        if self.term_errors is not None:
            out["term_errors"] = list(self.term_errors)
        if self.stat_err is not None:
            out["stat_err"] = self.stat_err
        return out


def make_report(
    terms: list[tuple[str, float]],
    value: float,
    bound: float = 0.0,
    term_errors: list[float] | None = None,
    stat_err: float | None = None,
) -> InequalityReport:
    return InequalityReport(
        terms=tuple(terms),
        value=float(value),
        bound=float(bound),
        violated=bool(value > bound + VIOLATION_TOL),
        term_errors=None if term_errors is None else tuple(term_errors),
        stat_err=stat_err,
    )
