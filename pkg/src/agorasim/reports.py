"""Pass/fail reporting for algebraic law checks.

Every checker in the package (morphism laws, metric axioms, functor laws,
bundling laws) produces a :class:`LawReport`: one verdict per law, and for
each failed law at least one witness recording the inputs involved, the
measured values, and the violation magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Witness:
    """A concrete counterexample to one law."""

    law: str
    inputs: tuple[str, ...]
    measured: tuple[float, ...]
    magnitude: float
    detail: str = ""

    def render(self) -> str:
        measured = ", ".join(f"{m:.9f}" for m in self.measured)
        head = f"{self.law} violated by ({', '.join(self.inputs)}): magnitude {self.magnitude:.9f}"
        if measured:
            head += f" [measured {measured}]"
        if self.detail:
            head += f" -- {self.detail}"
        return head


#: Default cap on witnesses kept per verdict; violations beyond the cap still
#: fail the law and are counted in the verdict note.
WITNESS_CAP = 8


@dataclass
class LawVerdict:
    law: str
    passed: bool
    checks: int = 0
    skipped: int = 0
    witnesses: list[Witness] = field(default_factory=list)
    note: str = ""

    def __post_init__(self):
        if not self.passed and not self.witnesses:
            raise ValueError(f"failed law {self.law} must carry a witness")

    @property
    def max_magnitude(self) -> float:
        return max((w.magnitude for w in self.witnesses), default=0.0)

    def merge(self, other: "LawVerdict") -> "LawVerdict":
        if other.law != self.law:
            raise ValueError(f"cannot merge {self.law} with {other.law}")
        note = self.note or other.note
        return LawVerdict(
            law=self.law,
            passed=self.passed and other.passed,
            checks=self.checks + other.checks,
            skipped=self.skipped + other.skipped,
            witnesses=self.witnesses + other.witnesses,
            note=note,
        )


def capped_verdict(
    law: str,
    checks: int,
    witnesses: list[Witness],
    skipped: int = 0,
    note: str = "",
    cap: int = WITNESS_CAP,
) -> LawVerdict:
    """A verdict keeping at most ``cap`` witnesses, noting how many were found."""
    kept = witnesses[:cap]
    if len(witnesses) > cap:
        extra = f"showing {cap} of {len(witnesses)} violations"
        note = f"{note}; {extra}" if note else extra
    return LawVerdict(law=law, passed=not witnesses, checks=checks, skipped=skipped,
                      witnesses=kept, note=note)


@dataclass
class LawReport:
    """Verdicts for one family of laws, keyed by law name."""

    subject: str
    verdicts: dict[str, LawVerdict] = field(default_factory=dict)

    def add(self, verdict: LawVerdict) -> None:
        self.verdicts[verdict.law] = verdict

    def verdict(self, law: str) -> LawVerdict:
        return self.verdicts[law]

    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def failures(self) -> list[LawVerdict]:
        return [v for v in self.verdicts.values() if not v.passed]

    def witnesses(self, law: str | None = None) -> list[Witness]:
        if law is not None:
            return list(self.verdicts[law].witnesses)
        return [w for v in self.verdicts.values() for w in v.witnesses]

    def merge(self, other: "LawReport") -> "LawReport":
        """Combine two reports over the same laws (e.g. disjoint sample batches)."""
        merged = LawReport(subject=self.subject)
        for law in sorted(set(self.verdicts) | set(other.verdicts)):
            a, b = self.verdicts.get(law), other.verdicts.get(law)
            merged.add(a.merge(b) if a and b else (a or b))
        return merged

    def render(self) -> list[str]:
        lines = []
        for law in sorted(self.verdicts):
            v = self.verdicts[law]
            status = "pass" if v.passed else "FAIL"
            extra = f", {v.skipped} skipped" if v.skipped else ""
            note = f" ({v.note})" if v.note else ""
            lines.append(f"{law}: {status} ({v.checks} checks{extra}){note}")
            for w in v.witnesses:
                lines.append(f"  witness: {w.render()}")
        return lines
