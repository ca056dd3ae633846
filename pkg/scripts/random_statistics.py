"""Outcome statistics of the polytope algorithm on random strongly connected systems."""
import argparse
import time
from collections import Counter

import numpy as np

from cjsr.generators import normalize_matrix, random_strongly_connected
from cjsr.compilers import WordConstraint, compile_forbidden_words
from cjsr.graphs import strongly_connected_components
from cjsr.polytope import Converged, run_invariant_polytope, verify_certificate
from cjsr.reducibility import find_invariant_family
from cjsr.smp import NoCycles, find_candidate_smp
from cjsr.system import brute_force_bounds


def polytope_outcomes(rng, n):
    counts, violations, worst = Counter(), 0, 0.0
    for _ in range(n):
        s = random_strongly_connected(rng)
        cand = find_candidate_smp(s)
        if isinstance(cand, NoCycles):
            counts["no_cycles"] += 1
            continue
        out = run_invariant_polytope(s, cand)
        counts[type(out).__name__ + (f":{out.reason}" if hasattr(out, "reason") else "")] += 1
        if isinstance(out, Converged):
            br = brute_force_bounds(s, 8)
            worst = max(worst, verify_certificate(s, out))
            violations += not (br.lower - 1e-9 <= out.rho <= br.upper + 1e-9)
    return counts, violations, worst


def reducible_fraction(rng, n, d):
    found = total = 0
    for i in range(n):
        mats = [normalize_matrix(rng.standard_normal((d, d))) for _ in range(2)]
        g = compile_forbidden_words(WordConstraint(mats, [["121"], ["121", "11"]][i % 2]))
        for comp in strongly_connected_components(g).subsystems:
            if comp.edges:
                total += 1
                found += find_invariant_family(comp) is not None
    return found, total


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--dims", type=int, nargs="*", default=[3, 5])
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    counts, violations, worst = polytope_outcomes(rng, args.n)
    print(f"{args.n} systems in {time.perf_counter() - t0:.1f} s")
    for k, v in sorted(counts.items()):
        print(f"  {k:<28} {v}")
    print(f"  bracket violations {violations}, worst residual {worst:.15f}")
    for d in args.dims:
        found, total = reducible_fraction(rng, 40, d)
        print(f"reducible compiled components, d={d}: {found}/{total}")


if __name__ == "__main__":
    main()
