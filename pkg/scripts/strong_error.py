"""Strong convergence study on the default graph; writes results/strong_error.csv.

    python scripts/strong_error.py              # desk scale: overkill 2^-10, 50 realisations
    python scripts/strong_error.py --full       # overkill 2^-16, 100 realisations (hours)
"""
import argparse
import time
from pathlib import Path

from metric_grf.experiments import rate_summary, strong_error_study, write_report_csv

BETAS = [3 / 8, 4 / 8, 5 / 8, 6 / 8, 7 / 8]

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--mode", default="lumped")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/strong_error.csv")
    args = ap.parse_args()

    ell_ok, reps = (16, 100) if args.full else (10, 50)
    t0 = time.perf_counter()
    reports = strong_error_study(BETAS, ell_ok=ell_ok, ell_coarse=(3, 4, 5, 6), reps=reps,
                                 seed=0, mode=args.mode, threads=args.threads)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_report_csv(reports, args.out)
    print(rate_summary(reports))
    print(f"{time.perf_counter() - t0:.1f}s -> {args.out}")
