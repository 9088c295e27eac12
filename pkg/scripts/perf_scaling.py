"""Lumped vs consistent cost on Barabasi-Albert graphs at h = 2^-6; writes results/perf.csv."""
import argparse
import sys
from pathlib import Path

import numpy as np

from metric_grf.experiments import loglog_slope, perf_study, write_perf_csv

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="100,500,1000,2000,5000")
    ap.add_argument("--tasks", default="noise_only,full_grf")
    ap.add_argument("--memory", action="store_true")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/perf.csv")
    args = ap.parse_args()

    def show(r):
        print(f"|V|={r.graph_vertices:>6} N={r.num_nodes:>8} {r.mode:>10} {r.task:>10} "
              f"{r.wall_time:10.4g}s iters={r.pcg_iterations}", file=sys.stderr, flush=True)

    recs = perf_study(sizes=[int(s) for s in args.sizes.split(",")], tasks=args.tasks.split(","),
                      measure_memory=args.memory, threads=args.threads, progress=show)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_perf_csv(recs, args.out)

    for task in args.tasks.split(","):
        sel = {m: [r for r in recs if r.task == task and r.mode == m] for m in ("lumped", "consistent")}
        N = np.array([r.num_nodes for r in sel["lumped"]], dtype=float)
        tl = np.array([r.wall_time for r in sel["lumped"]])
        tc = np.array([r.wall_time for r in sel["consistent"]])
        print(f"{task}: lumped slope {loglog_slope(N, tl):.3f}, consistent slope {loglog_slope(N, tc):.3f}, "
              f"speedup at largest {tc[-1] / tl[-1]:.0f}x")
