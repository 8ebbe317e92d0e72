"""Generate the bundled synthetic case-study files and their golden results.

The goldens are computed here with numpy/scipy from first principles, and
cross-checked against lifelines where its conventions coincide (log-rank
always; Cox only for tie-free data, since lifelines uses Efron ties).

    python3 scripts/make_goldens.py
"""

import json
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "data" / "case_studies"


def fmt(x):
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def simulate(rng, n, rate0, rate1_early, rate1_late, change, accrual, cutoff, decimals):
    rows = []
    for arm in (0, 1):
        for _ in range(n):
            entry = accrual * rng.random()
            if arm == 0:
                t = rng.exponential(1 / rate0)
            else:
                t = rng.exponential(1 / rate1_early)
                if t > change:
                    t = change + rng.exponential(1 / rate1_late)
            follow = cutoff - entry
            time, event = (t, 1) if t <= follow else (follow, 0)
            rows.append((round(time, decimals), event, arm))
    return rows


def km_table(times, events):
    ut = np.unique(times[events == 1])
    n = np.array([(times >= u).sum() for u in ut])
    d = np.array([((times == u) & (events == 1)).sum() for u in ut])
    return ut, n, d


def rmst(times, events, tau):
    ut, n, d = km_table(times, events)
    keep = ut <= tau
    ut, n, d = ut[keep], n[keep], d[keep]
    surv = np.cumprod(1 - d / n)
    grid = np.concatenate([[0.0], ut, [tau]])
    svals = np.concatenate([[1.0], surv])
    areas = svals * np.diff(grid)
    mu = areas.sum()
    # tail area from each event time to tau
    tail = np.array([areas[i + 1:].sum() for i in range(len(ut))])
    ok = n > d
    var = np.sum(tail[ok] ** 2 * d[ok] / (n[ok] * (n[ok] - d[ok])))
    return mu, var


def logrank(times, events, arms):
    ut = np.unique(times[events == 1])
    o = e = v = 0.0
    for u in ut:
        at = times >= u
        n, n1 = at.sum(), (at & (arms == 1)).sum()
        dd = ((times == u) & (events == 1))
        d, d1 = dd.sum(), (dd & (arms == 1)).sum()
        o += d1
        e += d * n1 / n
        if n > 1:
            v += d * (n1 / n) * (1 - n1 / n) * (n - d) / (n - 1)
    return (o - e) / np.sqrt(v)


def breslow(theta, times, events, arms):
    score = info = 0.0
    for u in np.unique(times[events == 1]):
        at = times >= u
        dd = (times == u) & (events == 1)
        w = np.exp(theta * arms[at])
        s0, s1 = w.sum(), (w * arms[at]).sum()
        m = dd.sum()
        score += (arms[dd]).sum() - m * s1 / s0
        info += m * (s1 / s0 - (s1 / s0) ** 2)
    return score, info


def analyze(rows, tau):
    times = np.array([r[0] for r in rows], dtype=float)
    events = np.array([r[1] for r in rows])
    arms = np.array([r[2] for r in rows], dtype=float)
    theta = brentq(lambda th: breslow(th, times, events, arms)[0], -5, 5, xtol=1e-15, rtol=1e-15)
    _, info = breslow(theta, times, events, arms)
    se = 1 / np.sqrt(info)
    u0, i0 = breslow(0.0, times, events, arms)
    mu0, v0 = rmst(times[arms == 0], events[arms == 0], tau)
    mu1, v1 = rmst(times[arms == 1], events[arms == 1], tau)
    diff, rse = mu1 - mu0, np.sqrt(v0 + v1)
    n_events = int(events.sum())
    late = int(((times > tau) & (events == 1)).sum())
    return {
        "n_control": int((arms == 0).sum()),
        "n_experimental": int((arms == 1).sum()),
        "events": n_events,
        "cox_theta": theta,
        "cox_se": se,
        "cox_wald_z": theta / se,
        "cox_score_z": u0 / np.sqrt(i0),
        "logrank_z": logrank(times, events, arms),
        "rmst_diff": diff,
        "rmst_se": rse,
        "rmst_z": diff / rse,
        "pct_events_after_tau": 100.0 * late / n_events,
    }


def cross_check(rows, golden, ties):
    import pandas as pd
    from lifelines import CoxPHFitter, KaplanMeierFitter
    from lifelines.statistics import logrank_test
    from lifelines.utils import restricted_mean_survival_time

    df = pd.DataFrame(rows, columns=["time", "event", "arm"])
    a, b = df[df.arm == 0], df[df.arm == 1]
    lr = logrank_test(a.time, b.time, a.event, b.event)
    assert abs(np.sqrt(lr.test_statistic) - abs(golden["logrank_z"])) < 1e-8
    mu = [restricted_mean_survival_time(KaplanMeierFitter().fit(p.time, p.event), t=golden["tau"]) for p in (a, b)]
    assert abs((mu[1] - mu[0]) - golden["rmst_diff"]) < 1e-8
    if not ties:
        cph = CoxPHFitter().fit(df, "time", "event")
        assert abs(cph.params_["arm"] - golden["cox_theta"]) < 1e-6
        assert abs(cph.standard_errors_["arm"] - golden["cox_se"]) < 1e-6


CASES = [
    # name, tau, unit, seed, n, rate0, rate1 early, rate1 late, change, accrual, cutoff, decimals
    ("early_benefit", 36.0, "months", 20240601, 300, 0.030, 0.015, 0.028, 18.0, 24.0, 60.0, 6),
    ("late_benefit", 24.0, "months", 20240602, 220, 0.060, 0.058, 0.030, 8.0, 12.0, 36.0, 1),
]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    goldens = {}
    for name, tau, unit, seed, n, r0, r1e, r1l, change, accrual, cutoff, dec in CASES:
        rows = simulate(np.random.default_rng(seed), n, r0, r1e, r1l, change, accrual, cutoff, dec)
        times = [r[0] for r in rows]
        ties = len(set(times)) < len(times)
        with open(OUT / f"{name}.csv", "w") as f:
            f.write("time,event,arm\n")
            for t, e, a in rows:
                f.write(f"{fmt(t)},{e},{a}\n")
        g = {"file": f"{name}.csv", "tau": tau, "time_unit": unit}
        g.update(analyze(rows, tau))
        cross_check(rows, g, ties)
        goldens[name] = {k: (float(v) if isinstance(v, np.floating) else v) for k, v in g.items()}
        print(name, "ties" if ties else "no ties", {k: goldens[name][k] for k in ("cox_wald_z", "logrank_z", "rmst_z")})
    with open(OUT / "goldens.json", "w") as f:
        json.dump(goldens, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
