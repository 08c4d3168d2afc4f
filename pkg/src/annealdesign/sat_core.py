"""3-SAT instances and their encoding as diagonal problem Hamiltonians.

An instance is a conjunction of m clauses over n boolean variables, each
clause a disjunction of exactly 3 literals. The problem Hamiltonian assigns
to every computational-basis state the number of clauses that assignment
violates, so satisfying assignments span the zero-energy ground space.

Basis convention (used everywhere in this package): variable 0 is the most
significant bit of the basis index, and boolean true maps to bit value 1.
So for n=3 the index 0b110 = 6 is the assignment b0=1, b1=1, b2=0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimacsFormatError, GenerationBudgetError, SizeLimitError

# Hard ceiling for full enumeration of assignments.
MAX_BRUTE_FORCE_VARS = 24

#: (variable index, negated flag)
Literal = tuple[int, bool]
Clause = tuple[Literal, Literal, Literal]


@dataclass(frozen=True)
class SatInstance:
    """An n-variable 3-SAT formula with m clauses of 3 distinct variables each."""

    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 variables, got n={self.n}")
        if len(self.clauses) < 1:
            raise ValueError("instance must have at least one clause")
        for ci, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {ci} has {len(clause)} literals, expected 3")
            variables = [v for v, _ in clause]
            if len(set(variables)) != 3:
                raise ValueError(f"clause {ci} repeats a variable: {clause}")
            if any(v < 0 or v >= self.n for v in variables):
                raise ValueError(f"clause {ci} references a variable outside [0,{self.n}): {clause}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def clause_satisfied(self, ci: int, assignment: int) -> bool:
        """Evaluate clause `ci` on a basis-index assignment."""
        for var, negated in self.clauses[ci]:
            bit = (assignment >> (self.n - 1 - var)) & 1
            value = bool(bit)
            if value != negated:  # positive literal true, or negated literal of a false var
                return True
        return False

    def count_violations(self, assignment: int) -> int:
        return sum(not self.clause_satisfied(ci, assignment) for ci in range(self.m))


@dataclass(frozen=True)
class DiagonalHamiltonian:
    """Clause-violation counts over all 2^n basis states (the problem Hamiltonian).

    The spectrum is a subset of {0, ..., m}; an assignment is satisfying
    exactly when its entry is 0.
    """

    violations: np.ndarray  # shape (2^n,), non-negative integers
    n: int
    m: int

    def __post_init__(self):
        v = np.asarray(self.violations)
        if v.shape != (1 << self.n,):
            raise ValueError(f"violations has shape {v.shape}, expected ({1 << self.n},)")
        if v.min() < 0 or v.max() > self.m:
            raise ValueError("violation counts must lie in [0, m]")
        v.setflags(write=False)
        object.__setattr__(self, "violations", v)

    @property
    def ground_energy(self) -> int:
        return int(self.violations.min())


@dataclass(frozen=True)
class HInfoMatrix:
    """Signed clause/variable incidence matrix fed to the guiding networks.

    Row s encodes clause s: +1 where the variable appears positively,
    -1 where negated, 0 elsewhere. Exactly 3 nonzeros per row.
    """

    entries: np.ndarray = field(repr=False)  # shape (m, n), values in {-1, 0, +1}

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.ndim != 2:
            raise ValueError("entries must be a 2-D matrix")
        if not np.all(np.isin(e, (-1, 0, 1))):
            raise ValueError("entries must be in {-1, 0, +1}")
        if not np.all((e != 0).sum(axis=1) == 3):
            raise ValueError("each row must have exactly 3 nonzero entries")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def vectorized(self) -> np.ndarray:
        """Row-major flattening, length m*n, as float64."""
        return self.entries.astype(np.float64).ravel()


@dataclass(frozen=True)
class SolveResult:
    satisfiable: bool
    solutions: tuple[int, ...]  # basis indices of minimum-violation assignments
    ground_energy: int


def _clause_mask_value(clause: Clause, n: int) -> tuple[int, int]:
    """Bit mask over the clause's variables and the unique violating bit pattern."""
    mask = 0
    value = 0
    for var, negated in clause:
        bit = 1 << (n - 1 - var)
        mask |= bit
        if negated:  # negated literal is false when the variable is true
            value |= bit
    return mask, value


def encode_hamiltonian(inst: SatInstance) -> DiagonalHamiltonian:
    """Sum of per-clause projectors onto each clause's violating assignment."""
    size = 1 << inst.n
    zs = np.arange(size, dtype=np.uint32)
    violations = np.zeros(size, dtype=np.int64)
    for clause in inst.clauses:
        mask, value = _clause_mask_value(clause, inst.n)
        violations += (zs & np.uint32(mask)) == np.uint32(value)
    return DiagonalHamiltonian(violations=violations, n=inst.n, m=inst.m)


def brute_force_solve(inst: SatInstance) -> SolveResult:
    """Enumerate all assignments; the oracle the rest of the package is tested against."""
    if inst.n > MAX_BRUTE_FORCE_VARS:
        raise SizeLimitError(f"brute force limited to n <= {MAX_BRUTE_FORCE_VARS}, got n={inst.n}")
    h = encode_hamiltonian(inst)
    e_ground = h.ground_energy
    solutions = tuple(int(z) for z in np.flatnonzero(h.violations == e_ground))
    return SolveResult(satisfiable=(e_ground == 0), solutions=solutions, ground_energy=e_ground)


def generate_unique_instance(
    n: int,
    m: int | None = None,
    seed: int = 0,
    max_attempts: int = 100_000,
    distinct_clauses: bool = False,
) -> SatInstance:
    """Rejection-sample a random instance with exactly one satisfying assignment.

    Draws m random width-3 clauses (distinct variables, random polarities) and
    keeps the first draw whose brute-force solution set has size 1. m defaults
    to 3n. Deterministic given the seed.
    """
    if n > 16:
        raise SizeLimitError(f"unique-instance generation limited to n <= 16, got n={n}")
    if m is None:
        m = 3 * n
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        clauses = []
        for _ in range(m):
            variables = rng.choice(n, size=3, replace=False)
            negations = rng.integers(0, 2, size=3)
            clauses.append(tuple((int(v), bool(g)) for v, g in zip(variables, negations)))
        if distinct_clauses and len({frozenset(c) for c in clauses}) != m:
            continue
        inst = SatInstance(n=n, clauses=tuple(clauses))
        result = brute_force_solve(inst)
        if result.satisfiable and len(result.solutions) == 1:
            return inst
    raise GenerationBudgetError(
        f"no unique-solution instance with (n={n}, m={m}) found in {max_attempts} attempts"
    )


def build_h_info(inst: SatInstance) -> HInfoMatrix:
    entries = np.zeros((inst.m, inst.n), dtype=np.int8)
    for s, clause in enumerate(inst.clauses):
        for var, negated in clause:
            entries[s, var] = -1 if negated else 1
    return HInfoMatrix(entries=entries)


def assignment_to_bitstring(assignment: int, n: int) -> str:
    """Bits in variable order: character i is variable i ('1' = true)."""
    return format(assignment, f"0{n}b")


def bitstring_to_assignment(bits: str) -> int:
    return int(bits, 2)


# ---------------------------------------------------------------------------
# DIMACS CNF interchange (literals are 1-based and signed, clauses end in 0)


def parse_dimacs(text: str) -> SatInstance:
    n = None
    m_declared = None
    clauses: list[Clause] = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsFormatError(f"line {lineno}: malformed problem line {line!r}")
            n, m_declared = int(parts[2]), int(parts[3])
            continue
        if n is None:
            raise DimacsFormatError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if len(pending) != 3:
                    raise DimacsFormatError(
                        f"line {lineno}: clause width {len(pending)}, expected 3"
                    )
                clause = []
                for sl in pending:
                    var = abs(sl) - 1
                    if var >= n:
                        raise DimacsFormatError(f"line {lineno}: variable {abs(sl)} out of range")
                    clause.append((var, sl < 0))
                clauses.append(tuple(clause))
                pending = []
            else:
                pending.append(lit)
    if pending:
        raise DimacsFormatError("unterminated clause at end of input")
    if n is None:
        raise DimacsFormatError("missing 'p cnf' header")
    if m_declared is not None and m_declared != len(clauses):
        raise DimacsFormatError(f"header declares {m_declared} clauses, found {len(clauses)}")
    return SatInstance(n=n, clauses=tuple(clauses))


def emit_dimacs(inst: SatInstance, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"c {c}" for c in comment.splitlines())
    lines.append(f"p cnf {inst.n} {inst.m}")
    for clause in inst.clauses:
        lits = " ".join(str(-(v + 1)) if neg else str(v + 1) for v, neg in clause)
        lines.append(f"{lits} 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON instance format: records the formula plus (optionally) the generation
# seed and the brute-force-verified solution, for reproducible experiment sets.


def instance_to_json(inst: SatInstance, seed: int | None = None, verify: bool = True) -> str:
    doc: dict = {
        "n": inst.n,
        "m": inst.m,
        "clauses": [
            [-(v + 1) if neg else (v + 1) for v, neg in clause] for clause in inst.clauses
        ],
    }
    if seed is not None:
        doc["seed"] = seed
    if verify:
        result = brute_force_solve(inst)
        doc["satisfiable"] = result.satisfiable
        doc["ground_energy"] = result.ground_energy
        doc["solutions"] = [assignment_to_bitstring(z, inst.n) for z in result.solutions]
    return json.dumps(doc, indent=1)


def instance_from_json(text: str) -> SatInstance:
    doc = json.loads(text)
    clauses = tuple(
        tuple((abs(sl) - 1, sl < 0) for sl in clause) for clause in doc["clauses"]
    )
    inst = SatInstance(n=int(doc["n"]), clauses=clauses)
    if "solutions" in doc:
        got = brute_force_solve(inst)
        recorded = tuple(sorted(bitstring_to_assignment(b) for b in doc["solutions"]))
        if recorded != tuple(sorted(got.solutions)):
            raise ValueError("recorded solutions do not match the formula")
    return inst
