"""Sweep theta for variable-stepsize BDF-3/4 and print the zero-stability threshold."""
import argparse

from cjsr.bdf import theta_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, choices=(3, 4), nargs="*", default=[3, 4])
    ap.add_argument("--ratios", default="1/theta,1,theta")
    ap.add_argument("--theta-step", type=float, default=0.005)
    ap.add_argument("--table", action="store_true", help="print every sweep row")
    args = ap.parse_args()
    ranges = {3: (1.0, 2.0), 4: (1.0, 1.5)}
    for k in args.steps:
        res = theta_sweep(k, args.ratios, ranges[k], args.theta_step)
        if args.table:
            for r in res.rows:
                print(f"  k={k} theta={r.theta:.4f} rho={r.rho:.6f} {r.leading_class} {r.verdict}")
        print(f"BDF-{k}: rho(C(theta,...)) crosses 1 at theta ~ {res.crossing:.5f}")


if __name__ == "__main__":
    main()
