#!/usr/bin/env python3
"""Sweep the Minami and n-level Wegner bound checks over box size and
report the observed mean, the proved bound, and the slack.

Example:
    python3 scripts/run_bounds.py --sides 16 32 64 --samples 5000
"""

import argparse

import randlat as rl
from randlat import montecarlo as mc


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sides", type=int, nargs="+", default=[16, 32])
    parser.add_argument("--samples", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=8)
    parser.add_argument("--z", type=complex, default=0.5 + 0.1j,
                        help="spectral parameter for the Minami check")
    args = parser.parse_args()

    header = f"{'experiment':<24}{'|L|':>6}{'mean':>12}{'bound':>12}{'slack':>12}  verdict"
    print(header)
    print("-" * len(header))
    for side in args.sides:
        model = mc.ModelSpec(box=rl.LatticeBox((side,)),
                             background=rl.Laplacian(),
                             density=rl.Uniform(0.0, 1.0))
        config = mc.McConfig(model=model, samples=args.samples,
                             master_seed=args.seed, workers=args.workers)
        mid = side // 2
        checks = [
            ("minami n=1", mc.mc_minami(config, args.z, [mid])),
            ("minami n=2 adjacent", mc.mc_minami(config, args.z, [mid, mid + 1])),
            ("wegner n=1", mc.mc_wegner_nlevel(config, (0.495, 0.505), 1)),
            ("wegner n=2", mc.mc_wegner_nlevel(config, (0.495, 0.505), 2)),
        ]
        for name, chk in checks:
            print(f"{name:<24}{side:>6}{chk.estimate.mean:>12.5f}"
                  f"{chk.bound:>12.5f}{chk.slack:>12.5f}  {chk.verdict}")


if __name__ == "__main__":
    main()
