"""Write feasibility-region CSVs for several n and print zone counts."""
import argparse
from collections import Counter
from pathlib import Path

from pbitswitch.construction import feasibility_scan, reports_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--grid", type=int, default=41)
    ap.add_argument("--out-dir", default="region_out")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for n in args.n:
        reports = feasibility_scan(n, args.grid)
        path = out / f"region_n{n}.csv"
        path.write_text(reports_to_csv(reports))
        counts = Counter(r.zone for r in reports)
        print(f"n={n}: {dict(sorted(counts.items()))} -> {path}")


if __name__ == "__main__":
    main()
