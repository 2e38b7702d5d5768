from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional

from core.errors import IllDefinedHomError, TameModError
from core.exactalg import GroupHom


class IssueLevel(Enum):
    CRITICAL = "CRITICAL"
    WARNING = "WARNING"
    INFO = "INFO"


@dataclass
class FunctorIssue:
    level: IssueLevel
    relation: str
    level_n: Optional[int]
    generators: List[int]
    message: str
    recommendation: str


def _failing_generators(lhs: GroupHom, rhs: GroupHom) -> List[int]:
    """Source generators on which two parallel maps disagree."""
    diff = lhs.matrix - rhs.matrix
    return [j for j in range(diff.ncols) if not lhs.target.is_relation(diff.column_vector(j))]


class FunctorValidator:
    """Check the defining relations of a truncated I-functor and collect every violation.

    Notes:
        - Never raises from validate_all(); problems are returned as issues
        - Relations are checked on the stored adjacent transpositions only
        - Stops checking a relation family at the first level that fails it
    """

    def __init__(self, functor):
        self.F = functor
        self.issues: List[FunctorIssue] = []

    # --------------------------- Public API ---------------------------
    def validate_all(self) -> Dict[str, Any]:
        """Run every check and return a dictionary report.

        Returns:
            Dict with keys: valid (bool), issues (List[dict]), summary (dict),
            first_violation (dict or None)
        """
        self.issues.clear()
        try:
            if self._validate_structure():
                self._validate_involutions()
                self._validate_braids()
                self._validate_far_commutation()
                self._validate_equivariance()
                self._validate_added_coordinate()
        except TameModError as e:
            self._add(IssueLevel.CRITICAL, "structure", None, [], f"{type(e).__name__}: {e}",
                      "Check the presentation file against the tamemod-v1 format.")

        issues = [self._issue_to_dict(i) for i in self.issues]
        critical = [i for i in issues if i["level"] == IssueLevel.CRITICAL.value]
        return {
            "valid": not critical,
            "issues": issues,
            "summary": self._generate_summary(),
            "first_violation": critical[0] if critical else None,
        }

    # --------------------------- Validators ---------------------------
    def _validate_structure(self) -> bool:
        F = self.F
        ok = True
        for n, hom in enumerate(F.stab):
            if not self._well_defined(hom, "stabilization", n):
                ok = False
        for (n, i), hom in sorted(F.transpositions.items()):
            if not self._well_defined(hom, f"s_{i}", n):
                ok = False
        if F.N >= 2 and all(F.level(n).is_trivial() for n in range(F.N + 1)):
            self._add(IssueLevel.INFO, "structure", None, [], "Every level is the zero group",
                      "Nothing to check; the functor is zero.")
        return ok

    def _well_defined(self, hom: GroupHom, what: str, n: int) -> bool:
        try:
            GroupHom(hom.source, hom.target, hom.matrix)
        except IllDefinedHomError as e:
            self._add(IssueLevel.CRITICAL, "structure", n, [], f"{what} at level {n} is not well defined: {e}",
                      "Every relation of the source level must map into the relations of the target level.")
            return False
        return True

    def _validate_involutions(self) -> None:
        F = self.F
        for n in range(2, F.N + 1):
            ident = GroupHom.identity(F.level(n))
            for i in range(1, n):
                s = F.transposition(n, i)
                bad = _failing_generators(s.compose(s), ident)
                if bad:
                    self._add(IssueLevel.CRITICAL, "involution", n, bad,
                              f"s_{i} o s_{i} is not the identity on F({n})",
                              f"Make the matrix of s_{i} at level {n} square to the identity.")
                    return

    def _validate_braids(self) -> None:
        F = self.F
        for n in range(3, F.N + 1):
            for i in range(1, n - 1):
                a, b = F.transposition(n, i), F.transposition(n, i + 1)
                bad = _failing_generators(a.compose(b).compose(a), b.compose(a).compose(b))
                if bad:
                    self._add(IssueLevel.CRITICAL, "braid", n, bad,
                              f"s_{i} s_{i + 1} s_{i} != s_{i + 1} s_{i} s_{i + 1} on F({n})",
                              "Adjacent transpositions must satisfy the braid relation.")
                    return

    def _validate_far_commutation(self) -> None:
        F = self.F
        for n in range(4, F.N + 1):
            for i in range(1, n):
                for j in range(i + 2, n):
                    a, b = F.transposition(n, i), F.transposition(n, j)
                    bad = _failing_generators(a.compose(b), b.compose(a))
                    if bad:
                        self._add(IssueLevel.CRITICAL, "far_commutation", n, bad,
                                  f"s_{i} and s_{j} do not commute on F({n})",
                                  "Transpositions with disjoint support must commute.")
                        return

    def _validate_equivariance(self) -> None:
        F = self.F
        for n in range(2, F.N):
            iota = F.stab[n]
            for i in range(1, n):
                bad = _failing_generators(iota.compose(F.transposition(n, i)),
                                          F.transposition(n + 1, i).compose(iota))
                if bad:
                    self._add(IssueLevel.CRITICAL, "equivariance", n, bad,
                              f"iota o s_{i} != s_{i} o iota from F({n}) to F({n + 1})",
                              "Stabilization must commute with the permutations it extends.")
                    return

    def _validate_added_coordinate(self) -> None:
        F = self.F
        for n in range(0, F.N - 1):
            twice = F.stab[n + 1].compose(F.stab[n])
            swap = F.transposition(n + 2, n + 1)
            bad = _failing_generators(swap.compose(twice), twice)
            if bad:
                self._add(IssueLevel.CRITICAL, "added_coordinate", n, bad,
                          f"s_{n + 1} at level {n + 2} moves the image of iota o iota from F({n})",
                          "Swapping the two added coordinates must fix doubly stabilized elements; "
                          "sign conventions belong in the data, not in the action.")
                return

    # --------------------------- Report ---------------------------
    def _add(self, level, relation, level_n, generators, message, recommendation) -> None:
        self.issues.append(FunctorIssue(level, relation, level_n, list(generators), message, recommendation))

    def _generate_summary(self) -> Dict[str, Any]:
        counts = {lvl: 0 for lvl in IssueLevel}
        for i in self.issues:
            counts[i.level] += 1
        return {
            "total_issues": len(self.issues),
            "critical_issues": counts[IssueLevel.CRITICAL],
            "warning_issues": counts[IssueLevel.WARNING],
            "info_issues": counts[IssueLevel.INFO],
            "truncation": self.F.N,
            "ranks": [self.F.level(n).num_generators for n in range(self.F.N + 1)],
        }

    def _issue_to_dict(self, issue: FunctorIssue) -> Dict[str, Any]:
        return {
            "level": issue.level.value,
            "relation": issue.relation,
            "level_n": issue.level_n,
            "generators": issue.generators,
            "message": issue.message,
            "recommendation": issue.recommendation,
        }
