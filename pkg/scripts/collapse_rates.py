"""Singularity statistics over random starts: fiber dimension, the rate
|x - x(T)|^2 / (T - t) against 2m, and Q (T - t) against 1/2.

    python3 scripts/collapse_rates.py --family B --k 2 --count 50
"""
import argparse
from dataclasses import dataclass

import numpy as np

from isoflow.analysis import classify_singularity, random_chamber_points
from isoflow.flow import integrate
from isoflow.weyl import build_root_system


@dataclass
class RatesConfig:
    family: str = "B"
    k: int = 2
    m: int = 1
    count: int = 50
    seed: int = 0


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(RatesConfig()).items():
        p.add_argument("--" + name, type=type(default), default=default)
    cfg = RatesConfig(**vars(p.parse_args()))
    rs = build_root_system(cfg.family, cfg.k, cfg.m)
    xs = random_chamber_points(rs, np.random.default_rng(cfg.seed), cfg.count)
    print("T,fiber_dim,fiber_type,rate/2m,Q(T-t),top_stratum")
    rel = []
    for x in xs:
        rep = integrate(rs, x).collapse
        c = classify_singularity(rep, rs)
        rel.append(rep.rate_estimate / (2 * rep.fiber_dim))
        print(f"{rep.T:.10f},{rep.fiber_dim},{c['fiber_type']},{rel[-1]:.6f},"
              f"{rep.typeI_estimate:.6f},{rep.top_stratum}")
    print(f"# rate/2m in [{min(rel):.6f}, {max(rel):.6f}] over {len(rel)} runs")


if __name__ == "__main__":
    main()
