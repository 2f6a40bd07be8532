"""Experiment drivers: table reproductions, generator scans, hypothesis sweeps, tail checks.

Work items are pure and keyed by (master_seed, p, trial), and results are reduced
in submission order, so a report never depends on the thread count.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel

from . import kernels
from .acceptance import AcceptanceProfile, accept_prob, bound, cosine_sum, meets_bound, worst_case_epsilon
from .errors import (
    EMPTY_GRID,
    EMPTY_RANGE,
    MISSING_PARAMETER,
    NOT_PRIMITIVE_ROOT,
    TOO_FEW_TRIALS,
)
from .models import DPolicy, ExperimentKind, ExperimentReport, ReportMetadata
from .numtheory import (
    PrimeModulus,
    as_modulus,
    is_primitive_root,
    power_table,
    primes_in_range,
    primitive_roots,
)
from .parallel import ordered_map
from .rng import GENERATOR_SAMPLING_STREAM, trial_generator
from .sequences import (
    LogBase,
    ParameterSequence,
    build_aikps_sets,
    classical_state_count,
    cyclic_sequence,
    is_degenerate,
    random_sequence,
    required_length,
    state_count,
    theorem4_bound_report,
    union_bound,
    unrounded_length,
)
from .simulator import Completion, build_qfa, run
from .statistics import proportion_sigma, wilson_interval

logger = logging.getLogger(__name__)

MIN_RATE_TRIALS = 100
MIN_AZUMA_TRIALS = 1000
_SCREEN_SLACK = 1e-6


def _random_runs(
    modulus: PrimeModulus,
    d: int,
    trials: int,
    master_seed: int,
    threads: int,
    exclude_zero: bool = False,
) -> List[Tuple[ParameterSequence, AcceptanceProfile]]:
    def one(t: int) -> Tuple[ParameterSequence, AcceptanceProfile]:
        seq = random_sequence(modulus, d, master_seed, t, exclude_zero)
        return seq, worst_case_epsilon(seq)

    return ordered_map(one, range(trials), threads)


def _random_profiles(
    modulus: PrimeModulus,
    d: int,
    trials: int,
    master_seed: int,
    threads: int,
    exclude_zero: bool = False,
) -> List[AcceptanceProfile]:
    return [profile for _, profile in _random_runs(modulus, d, trials, master_seed, threads, exclude_zero)]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def evaluate_cyclic(p: int, g: int, eps: Optional[float] = None, d: Optional[int] = None) -> Dict[str, Any]:
    """eps_g of a single cyclic sequence, with its bound check when eps is known."""
    modulus = as_modulus(p)
    if d is None:
        if eps is None:
            raise ValueError(f"{MISSING_PARAMETER}: eps or d")
        d = required_length(modulus, eps)
    seq = cyclic_sequence(g, modulus, d)
    profile = worst_case_epsilon(seq)
    threshold = bound(eps, d) if eps is not None else None
    return {
        "p": modulus.p,
        "eps": eps,
        "d": d,
        "g": g,
        "eps_g": profile.worst_eps,
        "worst_j": profile.worst_j,
        "max_abs_cos_sum": profile.max_abs_cosine_sum,
        "threshold": threshold,
        "meets_bound": None if eps is None else meets_bound(seq, eps, profile),
        "states": state_count(d),
    }


def simulate_word(
    seq: ParameterSequence,
    j: int,
    completion: Completion = Completion.HOUSEHOLDER,
    fast_power: bool = False,
) -> Dict[str, Any]:
    """Closed-form acceptance probability next to the explicit-matrix oracle."""
    closed_form = accept_prob(seq, j)
    oracle = run(build_qfa(seq, completion), j, fast_power=fast_power)
    return {
        "p": seq.p,
        "d": seq.d,
        "j": j,
        "closed_form": closed_form,
        "oracle": oracle,
        "abs_diff": abs(closed_form - oracle),
        "completion": Completion(completion).value,
    }


def table1_row(
    p: int,
    eps: float,
    g: int,
    trials: int,
    master_seed: int,
    threads: int = 1,
    exclude_zero: bool = False,
) -> Dict[str, Any]:
    """eps_rand (mean over random sequences) next to eps_g for one generator."""
    if trials < 1:
        raise ValueError(f"{TOO_FEW_TRIALS}: {trials}")
    modulus = as_modulus(p)
    d = required_length(modulus, eps)
    eps_g = worst_case_epsilon(cyclic_sequence(g, modulus, d)).worst_eps

    profiles = _random_profiles(modulus, d, trials, master_seed, threads, exclude_zero)
    values = np.array([prof.worst_eps for prof in profiles])
    logger.info(f"table1 p={modulus.p}: eps_g={eps_g:.5f}, eps_rand={_mean(values):.5f} over {trials} trials")
    return {
        "p": modulus.p,
        "eps": eps,
        "d": d,
        "g": g,
        "eps_rand": _mean(values),
        "eps_g": eps_g,
        "eps_rand_std": float(values.std(ddof=1)) if trials > 1 else 0.0,
        "states": state_count(d),
        "union_bound": union_bound(modulus.p, eps, d),
    }


def table2_scan(
    p: int,
    eps: float,
    generators: Sequence[int],
    threads: int = 1,
    unrounded_threshold: bool = False,
) -> List[Dict[str, Any]]:
    """eps_g for each of several generators of the same p."""
    modulus = as_modulus(p)
    rejected = [g for g in generators if not is_primitive_root(g, modulus)]
    if rejected:
        raise ValueError(f"{NOT_PRIMITIVE_ROOT}: g={rejected}, p={modulus.p}")
    d = required_length(modulus, eps)
    threshold = bound(eps, unrounded_length(modulus, eps) if unrounded_threshold else d)
    sequences = [cyclic_sequence(g, modulus, d) for g in generators]
    profiles = ordered_map(worst_case_epsilon, sequences, threads)
    return [
        {
            "p": modulus.p,
            "eps": eps,
            "d": d,
            "g": g,
            "eps_g": profile.worst_eps,
            "max_abs_cos_sum": profile.max_abs_cosine_sum,
            "threshold": threshold,
            "meets_bound": meets_bound(seq, eps, profile),
        }
        for g, seq, profile in zip(generators, sequences, profiles)
    ]


def cyclic_length(p: int, eps: float) -> Tuple[int, bool]:
    """required_length capped at p-1, the longest cyclic sequence; the flag is set when capped."""
    modulus = as_modulus(p)
    d = required_length(modulus, eps)
    if d < modulus.p:
        return d, False
    logger.warning(f"p={modulus.p}: required length {d} >= p, using d={modulus.p - 1}")
    return modulus.p - 1, True


def minimal_generator(
    p: int,
    eps: float,
    d: Optional[int] = None,
    threads: int = 1,
) -> Tuple[int, float]:
    """Exhaustive search for the primitive root with the smallest eps_g (smallest g on ties)."""
    modulus = as_modulus(p)
    d = d if d is not None else cyclic_length(modulus.p, eps)[0]
    roots = primitive_roots(modulus)
    values = ordered_map(lambda g: worst_case_epsilon(cyclic_sequence(g, modulus, d)).worst_eps, roots, threads)
    g_min, eps_min = roots[0], values[0]
    for g, value in zip(roots, values):
        if value < eps_min:
            g_min, eps_min = g, value
    logger.info(f"mingen p={modulus.p} d={d}: g_min={g_min}, eps={eps_min:.5f} over {len(roots)} generators")
    return g_min, eps_min


@dataclass
class _PrimeOutcome:
    p: int
    generators: int = 0
    lengths: int = 0
    skipped: bool = False
    counterexamples: List[Dict[str, Any]] = field(default_factory=list)


def _confirm_counterexample(modulus: PrimeModulus, g: int, d: int, m: int, threshold: float) -> Optional[Dict[str, Any]]:
    j = pow(g, m, modulus.p)
    exact = cosine_sum(cyclic_sequence(g, modulus, d), j)
    if abs(exact) < threshold:
        logger.debug(f"screened candidate p={modulus.p} g={g} d={d} j={j} cleared on recheck")
        return None
    logger.warning(f"counterexample: p={modulus.p} g={g} d={d} j={j} |f|={abs(exact):.6f} >= {threshold:.6f}")
    return {"p": modulus.p, "g": g, "d": d, "j": j, "cos_sum": exact, "threshold": threshold}


def _scan_prime(p: int, policy: DPolicy, eps: Optional[float]) -> _PrimeOutcome:
    modulus = PrimeModulus.of(p)
    n = p - 1
    if policy is DPolicy.FROM_EPS:
        d = required_length(modulus, eps)
        if d >= p:
            logger.debug(f"p={p}: required length {d} >= p, skipped")
            return _PrimeOutcome(p=p, skipped=True)
        lengths = [d]
    else:
        lengths = list(range(1, p))

    roots = primitive_roots(modulus)
    base = power_table(roots[0], modulus)
    discrete_log = np.empty(p, dtype=np.uint64)
    discrete_log[base] = np.arange(n, dtype=np.uint64)
    base_cosines = kernels.cosines(base.astype(np.uint64), p)
    exponents = np.arange(n, dtype=np.uint64)
    log_2p = math.log(2 * p)

    outcome = _PrimeOutcome(p=p, generators=len(roots), lengths=len(roots) * len(lengths))
    for g in roots:
        # cycle[t] = cos(2*pi*g^t/p); every j != 0 is g^m, and k_i*j = g^(i+m),
        # so f(g^m) is a length-d window sum over the cycle.
        cycle = base_cosines[(discrete_log[g] * exponents) % np.uint64(n)]
        prefix = np.concatenate(([0.0], np.cumsum(np.concatenate((cycle, cycle)))))
        for d in lengths:
            window = prefix[1 + d:n + 1 + d] - prefix[1:n + 1]
            threshold = math.sqrt(2.0 * d * log_2p)
            for m in np.flatnonzero(np.abs(window) >= threshold - _SCREEN_SLACK):
                row = _confirm_counterexample(modulus, g, d, int(m), threshold)
                if row:
                    outcome.counterexamples.append(row)
    return outcome


def hypothesis_scan(
    p_min: int,
    p_max: int,
    policy: DPolicy,
    eps: Optional[float] = None,
    threads: int = 1,
) -> ExperimentReport:
    """Check |f(j)| < sqrt(eps(d))*d, eps(d) = 2 ln(2p)/d, for every cyclic sequence in range."""
    policy = DPolicy(policy)
    if policy is DPolicy.FROM_EPS and eps is None:
        raise ValueError(f"{MISSING_PARAMETER}: eps")
    primes = primes_in_range(p_min, p_max)
    if not primes:
        raise ValueError(f"{EMPTY_RANGE}: [{p_min}, {p_max}]")

    outcomes = ordered_map(lambda p: _scan_prime(p, policy, eps), primes, threads)
    rows = [row for outcome in outcomes for row in outcome.counterexamples]
    checked = [o for o in outcomes if not o.skipped]
    logger.info(f"hypothesis scan [{p_min}, {p_max}]: {len(checked)} primes, {len(rows)} counterexamples")
    return ExperimentReport(
        kind=ExperimentKind.HYPOTHESIS,
        rows=rows,
        metadata=ReportMetadata(
            command=ExperimentKind.HYPOTHESIS,
            parameters={"p_min": p_min, "p_max": p_max, "policy": policy.value, "eps": eps},
            summary={
                "primes_checked": len(checked),
                "primes_skipped": [o.p for o in outcomes if o.skipped],
                "generators_checked": sum(o.generators for o in checked),
                "lengths_checked": sum(o.lengths for o in checked),
                "counterexamples": len(rows),
            },
        ),
    )


class SuccessRate(BaseModel):
    p: int
    eps: float
    d: int
    trials: int
    successes: int
    fraction: float
    wilson_center: float
    half_width: float
    failure_fraction: float
    union_bound: float


def random_success_rate(
    p: int,
    eps: float,
    trials: int,
    master_seed: int,
    threads: int = 1,
    exclude_zero: bool = False,
) -> SuccessRate:
    """Fraction of random sequences whose automaton meets the eps bound."""
    if trials < MIN_RATE_TRIALS:
        raise ValueError(f"{TOO_FEW_TRIALS}: {trials} < {MIN_RATE_TRIALS}")
    modulus = as_modulus(p)
    d = required_length(modulus, eps)
    runs = _random_runs(modulus, d, trials, master_seed, threads, exclude_zero)
    successes = sum(1 for seq, profile in runs if meets_bound(seq, eps, profile))
    center, half_width = wilson_interval(successes, trials)
    return SuccessRate(
        p=modulus.p,
        eps=eps,
        d=d,
        trials=trials,
        successes=successes,
        fraction=successes / trials,
        wilson_center=center,
        half_width=half_width,
        failure_fraction=1.0 - successes / trials,
        union_bound=union_bound(modulus.p, eps, d),
    )


def _sample_generators(modulus: PrimeModulus, count: int, master_seed: int) -> List[int]:
    roots = primitive_roots(modulus)
    if count >= len(roots):
        return roots
    rng = trial_generator(master_seed, modulus.p, 0, stream=GENERATOR_SAMPLING_STREAM)
    picks = rng.choice(len(roots), size=count, replace=False)
    return sorted(roots[int(i)] for i in picks)


def random_vs_cyclic(
    p_samples: Sequence[int],
    eps_samples: Sequence[float],
    generators_per_p: int,
    trials: int,
    master_seed: int,
    threads: int = 1,
    generators: Optional[Dict[int, List[int]]] = None,
) -> ExperimentReport:
    """Per (p, eps, g): does the cyclic sequence beat the mean random sequence?"""
    if not p_samples or not eps_samples:
        raise ValueError(EMPTY_GRID)
    if trials < 1:
        raise ValueError(f"{TOO_FEW_TRIALS}: {trials}")

    rows: List[Dict[str, Any]] = []
    skipped = 0
    for p in p_samples:
        modulus = as_modulus(p)
        chosen = (generators or {}).get(modulus.p) or _sample_generators(modulus, generators_per_p, master_seed)
        for eps in eps_samples:
            d = required_length(modulus, eps)
            if d >= modulus.p:
                logger.warning(f"compare: skipping p={modulus.p}, eps={eps}: d={d} >= p")
                skipped += 1
                continue
            baseline = _random_profiles(modulus, d, trials, master_seed, threads)
            eps_rand = _mean([prof.worst_eps for prof in baseline])
            sup_f_rand = _mean([prof.max_abs_cosine_sum for prof in baseline])
            cyclic = ordered_map(lambda g: worst_case_epsilon(cyclic_sequence(g, modulus, d)), chosen, threads)
            for g, profile in zip(chosen, cyclic):
                rows.append({
                    "p": modulus.p,
                    "eps": eps,
                    "d": d,
                    "g": g,
                    "eps_rand": eps_rand,
                    "eps_g": profile.worst_eps,
                    "cyclic_wins": profile.worst_eps < eps_rand,
                    "bound": bound(eps, d),
                    "sup_f_g": profile.max_abs_cosine_sum,
                    "sup_f_rand": sup_f_rand,
                })

    wins = sum(1 for row in rows if row["cyclic_wins"])
    summary: Dict[str, Any] = {"instances": len(rows), "cyclic_wins": wins, "skipped": skipped}
    if rows:
        center, half_width = wilson_interval(wins, len(rows))
        summary.update({"win_rate": wins / len(rows), "wilson_center": center, "half_width": half_width})
    return ExperimentReport(
        kind=ExperimentKind.RANDOM_VS_CYCLIC,
        rows=rows,
        metadata=ReportMetadata(
            command=ExperimentKind.RANDOM_VS_CYCLIC,
            seed=master_seed,
            trials=trials,
            summary=summary,
        ),
    )


def azuma_tail_check(
    p: int,
    d: int,
    lambdas: Sequence[float],
    trials: int,
    master_seed: int,
    j: int = 1,
    threads: int = 1,
) -> ExperimentReport:
    """Empirical Pr[|sum_i cos(2*pi*k_i*j/p)| >= lambda] against 2e^(-lambda^2/2d)."""
    if trials < MIN_AZUMA_TRIALS:
        raise ValueError(f"{TOO_FEW_TRIALS}: {trials} < {MIN_AZUMA_TRIALS}")
    modulus = as_modulus(p)
    js = np.array([j % modulus.p], dtype=np.uint64)

    def trial_terms(t: int) -> np.ndarray:
        seq = random_sequence(modulus, d, master_seed, t)
        return kernels.cosines(kernels.reduced_products(seq.as_array(), js, modulus.p)[0], modulus.p)

    terms = ordered_map(trial_terms, range(trials), threads)
    sums = np.array([float(row.sum()) for row in terms])
    stacked = np.concatenate(terms)
    mean_term = float(stacked.mean())
    stderr = float(stacked.std(ddof=1)) / math.sqrt(stacked.size)

    rows = []
    for lam in lambdas:
        empirical = float(np.count_nonzero(np.abs(sums) >= lam)) / trials
        tail_bound = 2.0 * math.exp(-lam * lam / (2.0 * d))
        margin = 3.0 * proportion_sigma(tail_bound, trials)
        rows.append({
            "p": modulus.p,
            "d": d,
            "j": int(js[0]),
            "lambda": float(lam),
            "empirical": empirical,
            "bound": tail_bound,
            "margin": margin,
            "passes": empirical <= tail_bound + margin,
        })
    return ExperimentReport(
        kind=ExperimentKind.AZUMA_TAIL,
        rows=rows,
        metadata=ReportMetadata(
            command=ExperimentKind.AZUMA_TAIL,
            seed=master_seed,
            trials=trials,
            summary={
                "mean_term": mean_term,
                "mean_term_stderr": stderr,
                "zero_mean_within_3_sigma": abs(mean_term) <= 3.0 * stderr,
                "all_pass": all(row["passes"] for row in rows),
            },
        ),
    )


def instance_comparison(
    p: int,
    eps: float,
    g: int,
    n_random: int,
    master_seed: int,
    threads: int = 1,
) -> ExperimentReport:
    """One cyclic sequence against individually listed random sequences."""
    modulus = as_modulus(p)
    d = required_length(modulus, eps)
    threshold = bound(eps, d)
    cyclic_seq = cyclic_sequence(g, modulus, d)
    cyclic = worst_case_epsilon(cyclic_seq)
    rows = [{
        "p": modulus.p, "eps": eps, "d": d, "sequence": "cyclic", "g": g, "trial": None,
        "sup_f": cyclic.max_abs_cosine_sum, "eps_value": cyclic.worst_eps,
        "bound": threshold, "meets_bound": meets_bound(cyclic_seq, eps, cyclic),
    }]
    for t, (seq, profile) in enumerate(_random_runs(modulus, d, n_random, master_seed, threads)):
        rows.append({
            "p": modulus.p, "eps": eps, "d": d, "sequence": "random", "g": None, "trial": t,
            "sup_f": profile.max_abs_cosine_sum, "eps_value": profile.worst_eps,
            "bound": threshold, "meets_bound": meets_bound(seq, eps, profile),
        })
    beaten_by = sum(1 for row in rows[1:] if row["sup_f"] < cyclic.max_abs_cosine_sum)
    return ExperimentReport(
        kind=ExperimentKind.INSTANCE,
        rows=rows,
        metadata=ReportMetadata(
            command=ExperimentKind.INSTANCE,
            seed=master_seed,
            trials=n_random,
            summary={"random_better_than_cyclic": beaten_by},
        ),
    )


def aikps_report(
    p_values: Sequence[int],
    eps_a: float,
    log_base: LogBase = LogBase.NATURAL,
    threads: int = 1,
) -> ExperimentReport:
    """Exponential-sum ratios over T; sets too large to drive an automaton are still reported."""
    log_base = LogBase(log_base)
    rows = []
    for p in p_values:
        sets = build_aikps_sets(p, eps_a, log_base)
        degenerate = is_degenerate(sets)
        if degenerate:
            logger.warning(f"AIKPS p={p}: |S|={sets.offsets_max}, |T|={len(sets.set_t)} is degenerate for an automaton")
        report = theorem4_bound_report(sets, p, threads=threads)
        rows.append({**report.model_dump(), "log_base": log_base.value, "degenerate": degenerate})
    return ExperimentReport(
        kind=ExperimentKind.AIKPS_BOUND,
        rows=rows,
        metadata=ReportMetadata(command=ExperimentKind.AIKPS_BOUND),
    )


def states_report(p_values: Sequence[int], eps: float) -> ExperimentReport:
    """Automaton size 2d next to the p states a deterministic automaton needs."""
    rows = []
    for p in p_values:
        d = required_length(p, eps)
        rows.append({
            "p": p,
            "eps": eps,
            "d": d,
            "d_unrounded": unrounded_length(p, eps),
            "qfa_states": state_count(d),
            "classical_states": classical_state_count(p),
        })
    return ExperimentReport(
        kind=ExperimentKind.STATES,
        rows=rows,
        metadata=ReportMetadata(command=ExperimentKind.STATES),
    )
