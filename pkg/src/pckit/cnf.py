"""CNF formulas, DIMACS parsing, and desk-scale model enumeration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ValidationError


@dataclass(frozen=True)
class CNF:
    """Clauses are tuples of nonzero literals; negative means negated."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def holds(self, assignment: dict[int, int]) -> bool:
        for clause in self.clauses:
            if not any(
                assignment.get(abs(lit), 0) == (1 if lit > 0 else 0) for lit in clause
            ):
                return False
        return True


def parse_dimacs(text: str) -> CNF:
    num_vars = None
    declared_clauses = None
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValidationError("dimacs-header", f"line {lineno}: bad problem line {line!r}")
            num_vars, declared_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValidationError("dimacs-header", f"line {lineno}: clause before problem line")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                if abs(lit) > num_vars:
                    raise ValidationError(
                        "dimacs-var", f"line {lineno}: literal {lit} outside declared range"
                    )
                pending.append(lit)
    if pending:
        raise ValidationError("dimacs-clause", "final clause missing its 0 terminator")
    if num_vars is None:
        raise ValidationError("dimacs-header", "missing problem line")
    if declared_clauses is not None and declared_clauses != len(clauses):
        raise ValidationError(
            "dimacs-count",
            f"header declares {declared_clauses} clauses but {len(clauses)} were read",
        )
    return CNF(num_vars, tuple(clauses))


def to_dimacs(cnf: CNF) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def model_table(cnf: CNF, max_vars: int = 20) -> np.ndarray:
    """Boolean satisfaction table over all 2^n assignments (vectorized)."""
    if cnf.num_vars > max_vars:
        raise BudgetError(f"CNF enumeration over {cnf.num_vars} vars exceeds {max_vars}")
    idx = np.arange(1 << cnf.num_vars, dtype=np.int64)
    table = np.ones(idx.size, dtype=bool)
    for clause in cnf.clauses:
        sat = np.zeros(idx.size, dtype=bool)
        for lit in clause:
            bit = ((idx >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= bit if lit > 0 else ~bit
        table &= sat
    return table


def model_indices(cnf: CNF, max_vars: int = 20) -> np.ndarray:
    return np.nonzero(model_table(cnf, max_vars))[0]


def model_count(cnf: CNF, max_vars: int = 20) -> int:
    return int(np.count_nonzero(model_table(cnf, max_vars)))


def random_cnf(num_vars: int, num_clauses: int, seed: int, clause_len: int = 3) -> CNF:
    """Seeded random k-CNF; clause density controls the SAT/UNSAT mix."""
    rng = np.random.default_rng(seed)
    clauses = []
    for _ in range(num_clauses):
        k = min(clause_len, num_vars)
        vars_ = rng.choice(np.arange(1, num_vars + 1), size=k, replace=False)
        signs = rng.integers(0, 2, size=k)
        clauses.append(tuple(int(v) if s else -int(v) for v, s in zip(vars_, signs)))
    return CNF(num_vars, tuple(clauses))
