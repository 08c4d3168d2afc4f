import itertools

import numpy as np
import pytest

from annealdesign import sat_core as sc
from annealdesign.errors import DimacsFormatError, GenerationBudgetError, SizeLimitError


def oracle_violations(inst: sc.SatInstance) -> np.ndarray:
    """Reference clause counting, written against booleans instead of bit masks.

    Enumerates assignments as explicit truth tuples (variable i -> tuple slot i,
    which is the MSB-first reading of the basis index) and evaluates each
    clause with plain any().
    """
    counts = []
    for truth in itertools.product([False, True], repeat=inst.n):
        bad = 0
        for clause in inst.clauses:
            lits = [(not truth[v]) if neg else truth[v] for v, neg in clause]
            if not any(lits):
                bad += 1
        counts.append(bad)
    return np.array(counts)


def test_single_positive_clause_violated_only_by_all_false():
    inst = sc.SatInstance(n=3, clauses=(((0, False), (1, False), (2, False)),))
    ham = sc.encode_hamiltonian(inst)
    expected = np.zeros(8, dtype=int)
    expected[0] = 1  # all-false assignment is basis index 0
    assert np.array_equal(ham.violations, expected)


def test_single_negated_clause_violated_only_by_all_true():
    inst = sc.SatInstance(n=3, clauses=(((0, True), (1, True), (2, True)),))
    ham = sc.encode_hamiltonian(inst)
    assert ham.violations[7] == 1
    assert ham.violations.sum() == 1


def test_mixed_clause_matches_msb_convention():
    # (x0 or not x1 or x2) is violated exactly when x0=F, x1=T, x2=F -> index 0b010
    inst = sc.SatInstance(n=3, clauses=(((0, False), (1, True), (2, False)),))
    ham = sc.encode_hamiltonian(inst)
    assert list(np.flatnonzero(ham.violations)) == [0b010]


@pytest.mark.parametrize("seed", range(20))
def test_encoder_agrees_with_truth_table_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 8))
    m = int(rng.integers(1, 4 * n))
    clauses = []
    for _ in range(m):
        variables = rng.choice(n, size=3, replace=False)
        negs = rng.integers(0, 2, size=3)
        clauses.append(tuple((int(v), bool(g)) for v, g in zip(variables, negs)))
    inst = sc.SatInstance(n=n, clauses=tuple(clauses))
    assert np.array_equal(sc.encode_hamiltonian(inst).violations, oracle_violations(inst))


def test_count_violations_matches_encoded_column():
    inst = sc.generate_unique_instance(5, seed=3)
    ham = sc.encode_hamiltonian(inst)
    for z in range(32):
        assert inst.count_violations(z) == ham.violations[z]


def test_spectrum_bounded_by_clause_count():
    inst = sc.generate_unique_instance(6, seed=0)
    ham = sc.encode_hamiltonian(inst)
    assert ham.violations.min() >= 0
    assert ham.violations.max() <= inst.m
    assert ham.m == inst.m == len(inst.clauses)


class TestInstanceValidation:
    def test_rejects_repeated_variable_in_clause(self):
        with pytest.raises(ValueError, match="repeats"):
            sc.SatInstance(n=3, clauses=(((0, False), (0, True), (1, False)),))

    def test_rejects_wrong_width(self):
        with pytest.raises(ValueError, match="literals"):
            sc.SatInstance(n=3, clauses=(((0, False), (1, False)),))  # type: ignore[arg-type]

    def test_rejects_out_of_range_variable(self):
        with pytest.raises(ValueError, match="outside"):
            sc.SatInstance(n=3, clauses=(((0, False), (1, False), (3, False)),))

    def test_rejects_too_few_variables(self):
        with pytest.raises(ValueError):
            sc.SatInstance(n=2, clauses=(((0, False), (1, False), (1, True)),))


def test_brute_force_finds_unique_solution():
    inst = sc.generate_unique_instance(7, seed=11)
    res = sc.brute_force_solve(inst)
    assert res.satisfiable
    assert res.ground_energy == 0
    assert len(res.solutions) == 1
    z = res.solutions[0]
    assert inst.count_violations(z) == 0


def test_brute_force_size_limit():
    inst = sc.SatInstance(n=30, clauses=(((0, False), (1, False), (2, False)),))
    with pytest.raises(SizeLimitError):
        sc.brute_force_solve(inst)


def test_generator_is_deterministic_and_seed_sensitive():
    a = sc.generate_unique_instance(6, seed=42)
    b = sc.generate_unique_instance(6, seed=42)
    c = sc.generate_unique_instance(6, seed=43)
    assert a == b
    assert a != c


def test_generator_default_clause_ratio():
    inst = sc.generate_unique_instance(5, seed=9)
    assert inst.m == 15


def test_generator_budget_error():
    # m=1 can never pin a unique solution (a width-3 clause removes one
    # assignment out of 2^n), so the attempt budget must trip.
    with pytest.raises(GenerationBudgetError):
        sc.generate_unique_instance(4, m=1, seed=0, max_attempts=50)


def test_h_info_rows_and_signs():
    inst = sc.SatInstance(
        n=4,
        clauses=(
            ((0, False), (2, True), (3, False)),
            ((1, True), (2, False), (3, True)),
        ),
    )
    h = sc.build_h_info(inst)
    assert h.shape == (2, 4)
    assert list(h.entries[0]) == [1, 0, -1, 1]
    assert list(h.entries[1]) == [0, -1, 1, -1]
    assert h.vectorized().shape == (8,)
    assert h.vectorized().dtype == np.float64


def test_h_info_vector_length_for_benchmark_family():
    inst = sc.generate_unique_instance(7, m=21, seed=1)
    assert sc.build_h_info(inst).vectorized().shape == (147,)


def test_dimacs_round_trip():
    inst = sc.generate_unique_instance(5, seed=7)
    text = sc.emit_dimacs(inst, comment="round trip")
    back = sc.parse_dimacs(text)
    assert back == inst


def test_dimacs_parses_multiline_and_comments():
    text = "c header\np cnf 4 2\n1 -2\n4 0\nc mid comment\n-1 3 -4 0\n"
    inst = sc.parse_dimacs(text)
    assert inst.n == 4
    assert inst.clauses[0] == ((0, False), (1, True), (3, False))
    assert inst.clauses[1] == ((0, True), (2, False), (3, True))


@pytest.mark.parametrize(
    "bad",
    [
        "p cnf 3 1\n1 2 0\n",  # width 2
        "1 2 3 0\n",  # clause before header
        "p cnf 3 2\n1 2 3 0\n",  # declared count mismatch
        "p cnf 3 1\n1 2 4 0\n",  # variable out of range
        "p cnf 3 1\n1 2 3\n",  # unterminated clause
    ],
)
def test_dimacs_rejects_malformed(bad):
    with pytest.raises(DimacsFormatError):
        sc.parse_dimacs(bad)


def test_instance_json_round_trip_with_solution_check():
    inst = sc.generate_unique_instance(6, seed=5)
    text = sc.instance_to_json(inst, seed=5)
    assert sc.instance_from_json(text) == inst


def test_instance_json_rejects_tampered_solutions():
    inst = sc.generate_unique_instance(4, seed=2)
    import json

    doc = json.loads(sc.instance_to_json(inst))
    doc["solutions"] = ["0000" if doc["solutions"][0] != "0000" else "1111"]
    with pytest.raises(ValueError, match="recorded solutions"):
        sc.instance_from_json(json.dumps(doc))


def test_bitstring_helpers():
    assert sc.assignment_to_bitstring(0b110, 3) == "110"
    assert sc.bitstring_to_assignment("110") == 6
