"""Run the desk-scale property suites over a list of root systems.

    python3 scripts/verify_all.py --starts 5
"""
import argparse
import time
from dataclasses import dataclass

from isoflow.verify import run_suites
from isoflow.weyl import build_root_system


@dataclass
class VerifyConfig:
    systems: tuple = (("A", 2, 1), ("A", 3, 2), ("B", 2, 1), ("B", 3, (1, 2)), ("D", 4, 1),
                      ("D", 5, 1), ("I2", 3, 1), ("I2", 4, (1, 3)), ("I2", 5, 1), ("I2", 6, 2))
    starts: int = 5
    seed: int = 0


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--starts", type=int, default=VerifyConfig.starts)
    p.add_argument("--seed", type=int, default=VerifyConfig.seed)
    a = p.parse_args()
    cfg = VerifyConfig(starts=a.starts, seed=a.seed)
    failed = 0
    for spec in cfg.systems:
        rs = build_root_system(*spec)
        t0 = time.perf_counter()
        checks = run_suites(rs, seed=cfg.seed, n_starts=cfg.starts)
        bad = [c for c in checks if not c.passed]
        failed += len(bad)
        print(f"{rs.label():<16s} {len(checks) - len(bad):2d}/{len(checks)} "
              f"({time.perf_counter() - t0:.1f}s)")
        for c in bad:
            print("   ", c.line())
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
