"""Replicated sweeps: simulation, CSV traces, summary and guarantee checks."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from itertools import groupby
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import metrics
from .bounds import FAIL, NOT_IN_FORCE, PASS, BoundReport, compute_bounds
from .config import ExperimentConfig
from .environment import InstanceSpec
from .oracle import InfeasibleFairness, OracleSolution, max_slack, solve_benchmark
from .policies import PolicyConfig
from .simulation import Diagnostics, simulate_replication

log = logging.getLogger(__name__)

SUMMARY_NAME = "summary.json"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _sim_task(args):
    instance, cfg, horizon, seed, rep, diagnostics = args
    return simulate_replication(instance, cfg, horizon, seed, rep, diagnostics)


def simulate_entry(instance: InstanceSpec, cfg: PolicyConfig, horizon: int, replications: int,
                   master_seed: int, diagnostics: Diagnostics = Diagnostics(),
                   threads: int = 1) -> list[metrics.RunTrace]:
    """All replications of one sweep entry, in replication order.

    The result does not depend on ``threads``: each replication is keyed by
    its own index.
    """
    tasks = [(instance, cfg, horizon, master_seed, r, diagnostics) for r in range(replications)]
    if threads <= 1 or replications == 1:
        return [_sim_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_sim_task, tasks))


def sample_rows(horizon: int, stride: int) -> np.ndarray:
    """Rounds written to CSV: multiples of ``stride`` plus the final round."""
    rows = np.arange(stride, horizon + 1, stride)
    if rows.size == 0 or rows[-1] != horizon:
        rows = np.append(rows, horizon)
    return rows


def write_trace_csv(path: Path, trace: metrics.RunTrace, realized: np.ndarray, mean_form: np.ndarray,
                    rows: np.ndarray) -> None:
    n = trace.service.shape[1]
    cum = trace.cumulative_service()
    header = (["round", "cumulative_regret", "cumulative_violation_realized",
               "cumulative_violation_mean_applicable"]
              + [f"per_arm_avg_reward_{i + 1}" for i in range(n)] + ["comparisons"])
    tmp = path.with_suffix(".csv.tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t in rows:
            avg = cum[t] / t
            w.writerow([int(t), _fmt(trace.pseudo_regret[t]), _fmt(realized[t]), _fmt(mean_form[t])]
                       + [_fmt(a) for a in avg] + [int(t) * trace.comparisons_per_round])
    tmp.replace(path)


def _verdict(ok: bool) -> str:
    return PASS if ok else FAIL


def best_pick_check(traces: Sequence[metrics.RunTrace], alpha: float, horizon: int) -> dict:
    """Best-pick inclusion rate and gap moments against their analytical limits."""
    st = metrics.best_pick_stats(traces)
    band = 3 * math.sqrt(alpha * (1 - alpha) / horizon)
    c1 = (alpha * alpha - 3 * alpha + 2) / (alpha * alpha)
    if alpha < 1:
        max_bound = 1 - (1 + math.log(horizon)) / math.log(1 - alpha)
    else:
        max_bound = 1.0
    checks = {
        "inclusion_rate": abs(st.inclusion_rate - alpha) <= band,
        "gap_mean": st.gap_mean <= 1 / alpha + 3 * st.gap_mean_se,
        "gap_second_moment": st.gap_second_moment <= c1 + 3 * st.gap_second_moment_se,
        "max_gap": bool(np.all(st.max_gaps <= 5 * max_bound)),
    }
    return {
        "alpha": alpha,
        "inclusion_rate": st.inclusion_rate,
        "inclusion_band": band,
        "gap_mean": st.gap_mean,
        "gap_mean_se": st.gap_mean_se,
        "gap_mean_limit": 1 / alpha,
        "gap_second_moment": st.gap_second_moment,
        "gap_second_moment_se": st.gap_second_moment_se,
        "gap_second_moment_limit": c1,
        "max_gap": int(st.max_gaps.max()),
        "max_gap_limit": max_bound,
        "checks": {k: bool(v) for k, v in checks.items()},
        "verdict": _verdict(all(checks.values())),
    }


def queue_gap_check(traces: Sequence[metrics.RunTrace], bounds: BoundReport, horizon: int) -> dict:
    if bounds.gamma is None or bounds.b1 is None:
        return {"verdict": NOT_IN_FORCE, "reason": "; ".join(bounds.unavailable)}
    freqs = [metrics.lemma3_gap_frequency(tr, None, bounds.b1) for tr in traces]
    pooled = float(np.mean(freqs))
    g = bounds.gamma
    se = math.sqrt(g * (1 - g) / horizon)
    return {
        "b1": bounds.b1,
        "gamma": g,
        "frequency": pooled,
        "per_replication": freqs,
        "limit": g - 3 * se,
        "verdict": _verdict(pooled >= g - 3 * se),
    }


def summarize_entry(cfg: PolicyConfig, traces: Sequence[metrics.RunTrace], instance: InstanceSpec,
                    oracle: OracleSolution, bounds: BoundReport, diagnostics: Diagnostics) -> tuple[dict, np.ndarray, list]:
    """Summary record for one sweep entry plus the violation curves it used."""
    horizon = traces[0].horizon
    lam = instance.targets
    regrets = np.array([metrics.pseudo_regret(tr, oracle, instance.means) for tr in traces])
    realized_curves = [metrics.violation_curve(tr, lam) for tr in traces]
    mean_curve = metrics.mean_violation_curve(traces, lam)
    t_mean = metrics.zero_violation_point(mean_curve)
    t_realized = [metrics.zero_violation_point(c) for c in realized_curves]
    rates = metrics.final_service_rates(traces)
    n_rep = len(traces)

    verdicts: dict[str, str] = {}
    if bounds.regret_guarantee_in_force:
        verdicts["regret_bound"] = _verdict(regrets.mean() <= bounds.regret_bound)
    else:
        verdicts["regret_bound"] = NOT_IN_FORCE
    if bounds.violation_guarantee_in_force:
        # Zero violation is promised only from t0 on; vacuous when t0 > T.
        verdicts["zero_violation"] = _verdict(bounds.t0 > horizon or (t_mean is not None and t_mean <= bounds.t0))
    else:
        verdicts["zero_violation"] = NOT_IN_FORCE

    diag: dict = {}
    if diagnostics.shadow_argmax:
        diag["best_pick"] = best_pick_check(traces, bounds.alpha, horizon)
        diag["queue_gap"] = queue_gap_check(traces, bounds, horizon)
        verdicts["best_pick"] = diag["best_pick"]["verdict"]
        verdicts["queue_gap"] = diag["queue_gap"]["verdict"]
    if diagnostics.lemma2_assert:
        count = int(sum(tr.drift_violations for tr in traces))
        diag["ucb_drift"] = {"violations": count, "verdict": _verdict(count == 0)}
        verdicts["ucb_drift"] = diag["ucb_drift"]["verdict"]

    record = {
        "label": cfg.name,
        "policy": cfg.to_dict(),
        "regret": {
            "mean": float(regrets.mean()),
            "stderr": float(regrets.std(ddof=1) / math.sqrt(n_rep)) if n_rep > 1 else 0.0,
            "per_replication": regrets.tolist(),
        },
        "zero_violation_point": {"mean_service": t_mean, "realized": t_realized},
        "final_violation": {
            "mean_service": float(mean_curve[-1]),
            "realized_mean": float(np.mean([c[-1] for c in realized_curves])),
        },
        "service_rates": rates.tolist(),
        "min_service_slack": float((rates - lam).min()),
        "comparisons": {
            "per_round": traces[0].comparisons_per_round,
            "total": int(traces[0].comparisons),
        },
        "bounds": bounds.to_dict(),
        "diagnostics": diag,
        "verdicts": verdicts,
    }
    return record, mean_curve, realized_curves


def run(config: ExperimentConfig, out_dir: str | Path | None = None, threads: int = 1,
        keep_traces: bool = False) -> dict:
    """Execute every sweep entry and write CSV traces plus ``summary.json``.

    Raises :class:`InfeasibleFairness` when the instance admits no slack.
    With ``keep_traces`` the returned summary carries the raw traces under
    ``"_traces"`` (not serialized).
    """
    instance = config.instance
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    delta_max = max_slack(instance)
    if delta_max <= 0:
        raise InfeasibleFairness(f"fairness targets admit no slack (delta_max = {delta_max:.6g})")
    oracle = solve_benchmark(instance, delta=config.oracle_delta)
    rows = sample_rows(config.horizon, config.subsample)

    entries, kept = [], {}
    for k, cfg in enumerate(config.sweep):
        log.info("entry %d/%d: %s", k + 1, len(config.sweep), cfg.name)
        traces = simulate_entry(instance, cfg, config.horizon, config.replications, config.master_seed,
                                config.diagnostics, threads)
        for tr in traces:
            tr.attach_oracle(oracle.optimal_reward)
        bounds = compute_bounds(instance, None, cfg, config.horizon, delta_max)
        record, mean_curve, realized = summarize_entry(cfg, traces, instance, oracle, bounds,
                                                       config.diagnostics)
        entry_dir = out / f"{k:02d}_{cfg.name}"
        entry_dir.mkdir(exist_ok=True)
        for tr, curve in zip(traces, realized):
            write_trace_csv(entry_dir / f"rep_{tr.replication:03d}.csv", tr, curve, mean_curve, rows)
        record["trace_dir"] = entry_dir.name
        entries.append(record)
        if keep_traces:
            kept[k] = traces

    summary = {
        "instance": {
            "means": instance.means.tolist(),
            "targets": instance.targets.tolist(),
            "family": instance.family.generator,
            "family_size": instance.family.size,
            "s_max": instance.s_max,
        },
        "horizon": config.horizon,
        "replications": config.replications,
        "master_seed": config.master_seed,
        "delta_max": delta_max,
        "oracle": oracle.to_dict(),
        "entries": entries,
    }
    summary["verdict"] = FAIL if any(v == FAIL for e in entries for v in e["verdicts"].values()) else PASS
    with open(out / SUMMARY_NAME, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if keep_traces:
        summary["_traces"] = kept
    return summary


# --- cross-entry comparisons ---------------------------------------------

def _tstar_key(t) -> float:
    return math.inf if t is None else float(t)


def paired_difference(a: Sequence[float], b: Sequence[float], confidence: float = 0.95) -> dict:
    """Mean of ``a - b`` with its one-sided lower confidence bound."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    mean = float(d.mean())
    if d.size > 1 and d.std(ddof=1) > 0:
        se = float(d.std(ddof=1) / math.sqrt(d.size))
        lower = mean - float(stats.t.ppf(confidence, d.size - 1)) * se
    else:
        se, lower = 0.0, mean
    return {"mean": mean, "stderr": se, "lower": lower, "significant": bool(lower > 0)}


def _trend(entries: list[dict], key: str) -> list[dict]:
    """Pairwise checks along ``key`` (ascending); better = lower regret."""
    # Equal settings are paired too; identical runs then pass with zero margins.
    ordered = sorted(entries, key=lambda e: e["policy"][key])
    pairs = []
    for lo, hi in zip(ordered, ordered[1:]):
        diff = paired_difference(lo["regret"]["per_replication"], hi["regret"]["per_replication"])
        t_lo = lo["zero_violation_point"]["mean_service"]
        t_hi = hi["zero_violation_point"]["mean_service"]
        if key == "m_picks":
            # More picks: regret and zero-violation point should not increase.
            t_ok = _tstar_key(t_lo) >= _tstar_key(t_hi)
        else:
            # Larger eta: regret should not increase, zero-violation point should not decrease.
            t_ok = _tstar_key(t_hi) >= _tstar_key(t_lo)
        margin = (_tstar_key(t_lo) - _tstar_key(t_hi)) if key == "m_picks" else (_tstar_key(t_hi) - _tstar_key(t_lo))
        pairs.append({
            "from": lo["label"], "to": hi["label"],
            key: [lo["policy"][key], hi["policy"][key]],
            "regret_improvement": diff,
            "regret_verdict": _verdict(diff["mean"] >= 0),
            "t_star": [t_lo, t_hi],
            "t_star_margin": None if math.isnan(margin) else margin,
            "t_star_verdict": _verdict(t_ok),
        })
    return pairs


def compare_policies(summaries: Iterable[dict]) -> dict:
    """Monotonicity verdicts over the M and eta sweeps of one or more summaries."""
    summaries = list(summaries)
    if not summaries:
        raise ValueError("no summaries given")
    ref = summaries[0]
    for s in summaries[1:]:
        for key in ("instance", "horizon", "replications", "master_seed"):
            if s[key] != ref[key]:
                raise ValueError(f"summaries differ in '{key}'; comparisons need a common instance and seeds")
    entries = [e for s in summaries for e in s["entries"] if e["policy"]["variant"] == "lcfl"]
    if len(entries) < 2:
        raise ValueError("need at least two lcfl entries to compare")

    report = {"m_trend": [], "eta_trend": []}
    by_eta = sorted(entries, key=lambda e: (e["policy"]["eta"], e["policy"]["epsilon"]))
    for (eta, eps), group in groupby(by_eta, key=lambda e: (e["policy"]["eta"], e["policy"]["epsilon"])):
        group = list(group)
        if len(group) >= 2:
            report["m_trend"].append({"eta": eta, "epsilon": eps, "pairs": _trend(group, "m_picks")})
    by_m = sorted(entries, key=lambda e: (e["policy"]["m_picks"], e["policy"]["epsilon"]))
    for (m, eps), group in groupby(by_m, key=lambda e: (e["policy"]["m_picks"], e["policy"]["epsilon"])):
        group = list(group)
        if len(group) >= 2:
            report["eta_trend"].append({"m_picks": m, "epsilon": eps, "pairs": _trend(group, "eta")})

    verdicts = [p[v] for trend in ("m_trend", "eta_trend") for g in report[trend] for p in g["pairs"]
                for v in ("regret_verdict", "t_star_verdict")]
    report["verdict"] = FAIL if FAIL in verdicts else PASS
    return report
