"""Verification suites: every closed formula against independent recount.

Each suite returns a list of check dicts ``{"check", "ok", ...detail}``;
the CLI renders them as a table and exits nonzero if anything fails.
The acceptance tests drive the same functions, so the command line and
the test suite cannot drift apart.

Suites: chio-identity (determinant identity and rank drop), measures
(census preimages, recipe equivalence, averaging, worst-case ratio),
failures (enumerated counts against closed forms), census (partition,
determinism, k-wise agreement, singular counts), switching (orbits and
rank invariance), relations (linear relations and density bounds).
"""

from __future__ import annotations

import random
import time
from fractions import Fraction
from itertools import combinations, islice, product
from math import comb

from .matrix_core import IndexSet, IntMatrix, PartialTernaryMatrix, det_int
from .measures import (
    Event,
    p_chio,
    p_chio_abs,
    p_chio_averaged,
    p_lcf,
    recipe_p_chio,
)
from .signed_graph import SignedBipartiteGraph, balance_summary
from .failure_enum import (
    check_linear_relations,
    count_failures,
    failure_count_formula,
    failure_density_bound,
    h_counts,
    realization_table,
)
from .census_oracle import (
    CensusConfig,
    binary_rank_counts,
    empirical_p_chio,
    decode_condensate,
    kwise_agreement_check,
    rank_census,
    run_census,
    singular_count,
)
from .switching import all_switches, balanced_signings, orbit, signing_tuple, switch_matrix
from . import parallel

SUITES = ("chio-identity", "measures", "failures", "census", "switching", "relations")


def _check(name: str, ok: bool, **details) -> dict:
    entry = {"check": name, "ok": bool(ok)}
    entry.update(details)
    return entry


# --- chio-identity ----------------------------------------------------------


def _sign_matrix_from_code(code: int, n: int) -> list[list[int]]:
    return [
        [1 if code >> ((i * n) + j) & 1 else -1 for j in range(n)] for i in range(n)
    ]


def chio_identity_exhaustive(n: int = 4) -> dict:
    """det of the full condensate equals pivot^(n-2) times det, all 2^(n^2)."""
    start = time.time()
    mismatches = 0
    for code in range(1 << (n * n)):
        rows = _sign_matrix_from_code(code, n)
        pivot = rows[n - 1][n - 1]
        cond = [
            [rows[i][j] * pivot - rows[i][n - 1] * rows[n - 1][j] for j in range(n - 1)]
            for i in range(n - 1)
        ]
        det_a = det_int(IntMatrix(rows))
        det_c = det_int(IntMatrix(cond))
        if det_c != pivot ** (n - 2) * det_a:
            mismatches += 1
        if (det_a == 0) != (det_c == 0):
            mismatches += 1
    elapsed = time.time() - start
    return _check(
        f"chio-identity exhaustive n={n}",
        mismatches == 0,
        matrices=1 << (n * n),
        mismatches=mismatches,
        seconds=round(elapsed, 2),
    )


def chio_identity_sampled(n: int = 5, samples: int = 2000, seed: int = 0) -> dict:
    """Sampled determinant identity check at a size too big to exhaust."""
    rng = random.Random(seed)
    mismatches = 0
    for _ in range(samples):
        rows = [[rng.choice((-1, 1)) for _ in range(n)] for _ in range(n)]
        pivot = rows[n - 1][n - 1]
        cond = [
            [rows[i][j] * pivot - rows[i][n - 1] * rows[n - 1][j] for j in range(n - 1)]
            for i in range(n - 1)
        ]
        if det_int(IntMatrix(cond)) != pivot ** (n - 2) * det_int(IntMatrix(rows)):
            mismatches += 1
    return _check(
        f"chio-identity sampled n={n}",
        mismatches == 0,
        samples=samples,
        seed=seed,
        mismatches=mismatches,
    )


def rank_drop_pointwise(max_dim: int = 4, workers: int | None = None) -> list[dict]:
    """rank of the half condensate is rank - 1 for every sign matrix."""
    checks = []
    for s in range(2, max_dim + 1):
        for t in range(2, max_dim + 1):
            cfg = CensusConfig(dims=(s, t), worker_count=workers)
            res = run_census(cfg, aggregates=("rank_drop_violations",))
            checks.append(
                _check(
                    f"rank-drop pointwise {s}x{t}",
                    res.rank_drop_violations == 0,
                    matrices=res.visited,
                    violations=res.rank_drop_violations,
                )
            )
    return checks


def suite_chio_identity(big: bool = False, seed: int = 0, workers: int | None = None) -> list[dict]:
    checks = [chio_identity_exhaustive(4), chio_identity_sampled(5, seed=seed)]
    checks.extend(rank_drop_pointwise(4, workers=workers))
    return checks


# --- measures ----------------------------------------------------------------


def census_measure_agreement(n: int, workers: int | None = None) -> dict:
    """Every condensate preimage count equals the closed fibre formula."""
    from .measures import fibre_cardinality

    counts = empirical_p_chio(n, workers=workers)
    mismatches = 0
    nonpow = 0
    for code in range(counts.size):
        got = int(counts[code])
        matrix = decode_condensate(code, n, n)
        if got != fibre_cardinality(Event.on_full_grid(matrix)):
            mismatches += 1
        if got and got & (got - 1):
            nonpow += 1
    return _check(
        f"census preimages == fibre formula n={n}",
        mismatches == 0 and nonpow == 0 and int(counts.sum()) == 1 << (n * n),
        condensates=counts.size,
        mismatches=mismatches,
        non_power_of_two=nonpow,
    )


def _recipe_chunk(args: tuple[int, int, int, int]) -> tuple[int, int]:
    n, k, start, stop = args
    positions = [(i, j) for i in range(1, n) for j in range(1, n)]
    total = 0
    mismatches = 0
    for chosen in islice(combinations(positions, k), start, stop):
        for values in product((-1, 0, 1), repeat=k):
            matrix = PartialTernaryMatrix((n, n), dict(zip(chosen, values)))
            total += 1
            if recipe_p_chio(matrix) != p_chio(Event(matrix)):
                mismatches += 1
    return total, mismatches


def recipe_equivalence_scan(n: int, workers: int | None = None) -> dict:
    """Compare the recipe against the graph formula on every |I| <= 6 event."""
    workers = parallel.resolve_workers(workers)
    m = (n - 1) ** 2
    tasks = []
    for k in range(min(6, m) + 1):
        n_sets = comb(m, k)
        n_chunks = 1 if workers == 1 else min(n_sets, workers * 4) or 1
        tasks.extend(
            (n, k, n_sets * c // n_chunks, n_sets * (c + 1) // n_chunks)
            for c in range(n_chunks)
        )
    results = parallel.run_tasks(_recipe_chunk, tasks, workers)
    total = sum(r[0] for r in results)
    mismatches = sum(r[1] for r in results)
    expected = sum(3**k * comb(m, k) for k in range(min(6, m) + 1))
    return _check(
        f"recipe == p_chio for dom <= 6, n={n}",
        mismatches == 0 and total == expected,
        events=total,
        mismatches=mismatches,
    )


def averaging_checks(n: int = 3, workers: int | None = None) -> list[dict]:
    """Averaged measure equals lazy coin flip; |.|-measure is uniform.

    Formula-level over every domain, and census-level at n by comparing
    summed preimage counts of all sign patterns on a support.
    """
    positions = [(i, j) for i in range(1, n) for j in range(1, n)]
    mismatches = 0
    events = 0
    for k in range(len(positions) + 1):
        for chosen in combinations(positions, k):
            for values in product((-1, 0, 1), repeat=k):
                matrix = PartialTernaryMatrix((n, n), dict(zip(chosen, values)))
                events += 1
                if p_chio_averaged(matrix) != p_lcf(Event(matrix)):
                    mismatches += 1
    formula_check = _check(
        f"averaged measure == lazy coin flip, all domains, n={n}",
        mismatches == 0,
        events=events,
        mismatches=mismatches,
    )

    counts = empirical_p_chio(n, workers=workers)
    m = (n - 1) ** 2
    total = 1 << (n * n)
    avg_bad = 0
    abs_bad = 0
    for pattern_values in product((0, 1), repeat=m):
        pattern = PartialTernaryMatrix(
            (n, n), dict(zip(positions, pattern_values))
        )
        support = sorted(pattern.support)
        acc = Fraction(0)
        for signs in product((-1, 1), repeat=len(support)):
            entries = dict(pattern.entries)
            for pos, sg in zip(support, signs):
                entries[pos] = sg
            from .census_oracle import condensate_code

            code = condensate_code(PartialTernaryMatrix((n, n), entries))
            acc += Fraction(int(counts[code]), total)
        averaged = acc / 2 ** len(support)
        if averaged != p_lcf(Event(pattern)).as_fraction():
            avg_bad += 1
        if acc != p_chio_abs(pattern).as_fraction():
            abs_bad += 1
    census_check = _check(
        f"averaging and sign-forgetting vs census counts, n={n}",
        avg_bad == 0 and abs_bad == 0,
        patterns=1 << m,
        averaged_mismatches=avg_bad,
        forgetting_mismatches=abs_bad,
    )
    return [formula_check, census_check]


def worst_ratio_scan(n: int) -> dict:
    """Max measure ratio over realizable full specifications is 2^((n-2)^2),
    attained exactly at the complete bipartite graph."""
    positions = [(i, j) for i in range(1, n) for j in range(1, n)]
    m = len(positions)
    best = -1
    argmax_full_support = True
    attained = 0
    for values in product((-1, 0, 1), repeat=m):
        entries = dict(zip(positions, values))
        balanced, f0, beta0 = balance_summary((n, n), entries)
        if not balanced:
            continue
        supp = sum(1 for v in values if v)
        beta1 = supp - f0 + beta0
        if beta1 > best:
            best = beta1
            attained = 1
            argmax_full_support = supp == m
        elif beta1 == best:
            attained += 1
            argmax_full_support = argmax_full_support and supp == m
    expected = (n - 2) ** 2
    return _check(
        f"worst-case ratio 2^((n-2)^2) at n={n}",
        best == expected and argmax_full_support,
        max_ratio_log2=best,
        expected_log2=expected,
        maximizers=attained,
        maximizers_complete_bipartite=argmax_full_support,
    )


def j_independence_check(n: int = 3) -> dict:
    """The event measure does not depend on the ambient index set."""
    positions = [(i, j) for i in range(1, n) for j in range(1, n)]
    m = len(positions)
    mismatches = 0
    cases = 0
    for k in range(m + 1):
        for chosen in combinations(positions, k):
            for values in product((-1, 0, 1), repeat=k):
                matrix = PartialTernaryMatrix((n, n), dict(zip(chosen, values)))
                base = p_chio(Event(matrix))
                for extra in range(m - k + 1):
                    for sup in combinations(
                        [p for p in positions if p not in chosen], extra
                    ):
                        ambient = IndexSet((n, n), frozenset(chosen) | frozenset(sup))
                        cases += 1
                        if p_chio(Event(matrix, ambient)) != base:
                            mismatches += 1
    return _check(
        f"measure independent of ambient set, n={n}",
        mismatches == 0,
        cases=cases,
        mismatches=mismatches,
    )


def suite_measures(big: bool = False, workers: int | None = None) -> list[dict]:
    checks = [census_measure_agreement(3, workers), census_measure_agreement(4, workers)]
    checks.append(recipe_equivalence_scan(4, workers))
    if big:
        checks.append(recipe_equivalence_scan(5, workers))
    checks.extend(averaging_checks(3, workers))
    checks.append(worst_ratio_scan(3))
    checks.append(worst_ratio_scan(4))
    checks.append(j_independence_check(3))
    return checks


# --- failures -----------------------------------------------------------------


def failure_agreement(k: int, n: int, workers: int | None = None) -> dict:
    """Enumerated counts equal the closed forms including every split."""
    enum = count_failures(k, n, workers=workers)
    form = failure_count_formula(k, n)
    ok = (
        enum.failure_count == form.failure_count
        and enum.by_ratio == form.by_ratio
        and enum.by_value == form.by_value
        and enum.by_isotype == form.by_isotype
    )
    return _check(
        f"failure census k={k} n={n}",
        ok,
        enumerated=enum.failure_count,
        formula=form.failure_count,
    )


def h_identity_check(n: int) -> dict:
    """The three subgraph counts assemble the k=6 closed form."""
    h_c6, h_k23, h_c4, h_geq = h_counts(n)
    form = failure_count_formula(6, n)
    table = realization_table(6, n)
    from .signed_graph import IsoType

    seventeen = sum(
        v for t, v in table.items() if t not in (IsoType.T4, IsoType.T12)
    )
    ok = (
        h_c6 + h_k23 + h_c4 == form.failure_count
        and h_c4 == h_geq - 3 * h_k23
        and seventeen == h_c4
    )
    return _check(
        f"k=6 subgraph-count identity n={n}",
        ok,
        h_c6=h_c6,
        h_k23=h_k23,
        h_c4_not_k23=h_c4,
        total=form.failure_count,
    )


def suite_failures(big: bool = False, workers: int | None = None) -> list[dict]:
    checks = []
    for n in (4, 5):
        for k in (4, 5, 6):
            checks.append(failure_agreement(k, n, workers))
    for k in (4, 5):
        checks.append(failure_agreement(k, 6, workers))
    checks.append(h_identity_check(6))
    if big:
        checks.append(failure_agreement(6, 6, workers))
    return checks


# --- census -------------------------------------------------------------------


def census_determinism(dims: tuple[int, int] = (4, 4)) -> dict:
    """Aggregates are bit-identical for worker counts 1, 2 and 8."""
    outputs = []
    for w in (1, 2, 8):
        res = run_census(
            CensusConfig(dims=dims, worker_count=w),
            aggregates=("rank_pm", "rank_cond", "cond_counts"),
        )
        outputs.append(
            (
                tuple(int(v) for v in res.rank_pm),
                tuple(int(v) for v in res.rank_cond),
                res.cond_counts.tobytes(),
            )
        )
    ok = outputs[0] == outputs[1] == outputs[2]
    return _check(f"census determinism {dims[0]}x{dims[1]}", ok, worker_counts=[1, 2, 8])


def rank_identity_checks(workers: int | None = None) -> list[dict]:
    checks = []
    for s, t in ((3, 3), (4, 4)):
        rc = rank_census(s, t, workers=workers)
        v = rc.verify()
        checks.append(
            _check(
                f"rank level-set identities {s}x{t}",
                v["all_ok"],
                rank_pm=rc.pm_rank_counts,
                rank_condensate=rc.condensate_rank_counts,
                rank_binary=rc.binary_rank_counts,
            )
        )
    return checks


def edge_marginal_check(n: int = 4, workers: int | None = None) -> dict:
    """Condensate edges appear with exact density 1/2, pairwise independent."""
    res = run_census(
        CensusConfig(dims=(n, n), worker_count=workers), aggregates=("edge_pairs",)
    )
    m = (n - 1) ** 2
    total = 1 << (n * n)
    diag_ok = all(int(res.edge_pairs[i, i]) == total // 2 for i in range(m))
    off_ok = all(
        int(res.edge_pairs[i, j]) == total // 4
        for i in range(m)
        for j in range(m)
        if i != j
    )
    return _check(
        f"edge marginals exact at n={n}",
        diag_ok and off_ok,
        positions=m,
        single_count=total // 2,
        pair_count=total // 4,
    )


def singular_consistency(n: int, workers: int | None = None) -> dict:
    """Singular count factors through the smaller binary singular count."""
    rep = singular_count(n, workers=workers)
    binary = binary_rank_counts(n - 1, n - 1)
    binary_singular = int(binary[: n - 1].sum())
    expected = binary_singular << (2 * n - 1)
    return _check(
        f"singular count factorization n={n}",
        rep.singular_count == expected,
        singular=rep.singular_count,
        binary_singular=binary_singular,
        q4_left=rep.q4_left,
        q4_right=str(rep.q4_right),
    )


def suite_census(big: bool = False, workers: int | None = None, seed: int = 0) -> list[dict]:
    checks = [census_determinism((3, 3)), census_determinism((4, 4))]
    checks.extend(rank_identity_checks(workers))
    checks.append(edge_marginal_check(4, workers))
    kw = kwise_agreement_check(4, workers=workers)
    checks.append(
        _check(
            "k-wise empirical agreement n=4",
            kw["all_ok"],
            per_k=[
                {
                    "k": e["k"],
                    "disagreements": e["disagreements"],
                    "matches_failure_set": e["matches_failure_set"],
                }
                for e in kw["per_k"]
            ],
        )
    )
    for n in (2, 3, 4):
        checks.append(singular_consistency(n, workers))
    if big:
        from .census_oracle import RankCensus

        res = run_census(
            CensusConfig(dims=(5, 5), worker_count=workers),
            aggregates=("rank_pm", "rank_cond", "rank_drop_violations"),
        )
        rc5 = RankCensus(
            dims=(5, 5),
            pm_rank_counts=[int(v) for v in res.rank_pm],
            binary_rank_counts=[int(v) for v in binary_rank_counts(4, 4)],
            condensate_rank_counts=[int(v) for v in res.rank_cond],
        )
        checks.append(
            _check(
                "census 5x5 (big)",
                res.visited == 1 << 25
                and res.rank_drop_violations == 0
                and rc5.verify()["all_ok"],
                visited=res.visited,
                rank_pm=rc5.pm_rank_counts,
            )
        )
    return checks


# --- switching ----------------------------------------------------------------


def _connected_support_graphs(max_edges: int = 6):
    """All connected bipartite graphs with <= max_edges edges, as supports
    on an (a x b) grid covering every row and column."""
    for a in range(1, max_edges + 1):
        for b in range(a, max_edges + 1):
            if a + b > max_edges + 1:
                continue
            cells = [(i, j) for i in range(1, a + 1) for j in range(1, b + 1)]
            min_edges = a + b - 1
            for e in range(min_edges, max_edges + 1):
                for support in combinations(cells, e):
                    rows = {i for i, _ in support}
                    cols = {j for _, j in support}
                    if len(rows) != a or len(cols) != b:
                        continue
                    edges = frozenset(support)
                    graph = SignedBipartiteGraph(
                        dims=(a + 1, b + 1),
                        row_vertices=frozenset(rows),
                        col_vertices=frozenset(cols),
                        edges=edges,
                    )
                    from .signed_graph import betti

                    if betti(graph).beta0 == 1:
                        yield graph


def orbit_transitivity_check(max_edges: int = 6) -> dict:
    """Orbits of balanced signings are exactly the balanced signings."""
    graphs = 0
    failures = 0
    for graph in _connected_support_graphs(max_edges):
        graphs += 1
        balanced_set = {signing_tuple(g) for g in balanced_signings(graph)}
        some_balanced = next(iter(balanced_signings(graph)))
        orb = orbit(some_balanced)
        expected_size = 2 ** (graph.f0 - 1)
        if orb != balanced_set or len(orb) != expected_size:
            failures += 1
    return _check(
        f"orbits == balanced signings, connected graphs <= {max_edges} edges",
        failures == 0,
        graphs=graphs,
        failures=failures,
    )


def rank_invariance_all_patterns(d: int = 3) -> dict:
    """Every balanced signing of every {0,1} d x d pattern keeps its rank."""
    from .switching import rank_invariance_check

    positions = [(i, j) for i in range(1, d + 1) for j in range(1, d + 1)]
    bad = 0
    for values in product((0, 1), repeat=d * d):
        pattern = PartialTernaryMatrix((d + 1, d + 1), dict(zip(positions, values)))
        report = rank_invariance_check(pattern)
        if not report.all_equal:
            bad += 1
    return _check(
        f"rank invariance of balanced signings, all {d}x{d} patterns",
        bad == 0,
        patterns=1 << (d * d),
        failing_patterns=bad,
    )


def switch_action_laws(n: int = 4) -> dict:
    """Group action laws and the two-element kernel on the full grid."""
    positions = [(i, j) for i in range(1, n) for j in range(1, n)]
    base = PartialTernaryMatrix(
        (n, n), {p: (1 if (p[0] + p[1]) % 2 else -1) for p in positions}
    )
    switches = list(all_switches(n, n))
    ok = True
    for g in switches[:16]:
        for h in switches[:16]:
            lhs = switch_matrix(switch_matrix(base, g), h)
            rhs = switch_matrix(base, g + h)
            if lhs.entries != rhs.entries:
                ok = False
    kernel = [g for g in switches if switch_matrix(base, g).entries == base.entries]
    ok = ok and len(kernel) == 2
    return _check(f"switch action laws n={n}", ok, kernel_size=len(kernel))


def suite_switching(big: bool = False, workers: int | None = None) -> list[dict]:
    return [
        orbit_transitivity_check(6),
        rank_invariance_all_patterns(3),
        switch_action_laws(4),
    ]


# --- relations ------------------------------------------------------------------


def linear_relations_check(n_values: tuple[int, ...] = (4, 5, 6, 7, 8)) -> dict:
    """The five linear relations hold at every requested n.

    Both sides are polynomials of degree at most 8, so agreement on nine
    points implies agreement as polynomials; points 4..12 are always
    included to certify the symbolic identity.
    """
    points = sorted(set(n_values) | set(range(4, 13)))
    bad = []
    for n in points:
        for entry in check_linear_relations(n):
            if not entry["holds"]:
                bad.append((n, entry["relation"]))
    return _check(
        "linear relations among realization counts",
        not bad,
        n_values=list(points),
        failures=bad,
    )


def density_bound_check(n_values: tuple[int, ...] = (4, 5, 6, 7, 8)) -> dict:
    """Exact failure counts stay below the circuit union bound."""
    bad = []
    for n in n_values:
        for k in range(1, 7):
            count, bound = failure_density_bound(k, n)
            if count is None or count > bound:
                bad.append((k, n))
    return _check("failure counts within union bound", not bad, failures=bad)


def suite_relations(big: bool = False, workers: int | None = None) -> list[dict]:
    return [linear_relations_check(), density_bound_check()]


def run_suites(
    names: list[str],
    big: bool = False,
    workers: int | None = None,
    seed: int = 0,
) -> list[dict]:
    """Run the requested suites and return all checks in order."""
    registry = {
        "chio-identity": lambda: suite_chio_identity(big, seed, workers),
        "measures": lambda: suite_measures(big, workers),
        "failures": lambda: suite_failures(big, workers),
        "census": lambda: suite_census(big, workers, seed),
        "switching": lambda: suite_switching(big, workers),
        "relations": lambda: suite_relations(big, workers),
    }
    checks = []
    for name in names:
        if name not in registry:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        for entry in registry[name]():
            entry["suite"] = name
            checks.append(entry)
    return checks
