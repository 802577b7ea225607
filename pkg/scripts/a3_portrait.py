"""Spherical phase portrait of A3: region labels against observed limit walls.

    python3 scripts/a3_portrait.py --m 1 --samples 300 --out-dir a3_out
"""
import argparse
from collections import Counter
from dataclasses import dataclass

from isoflow.analysis import a3_portrait
from isoflow.cli import main as cli_main


@dataclass
class PortraitConfig:
    m: int = 1
    samples: int = 300
    seed: int = 0
    out_dir: str = "a3_out"


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, default in vars(PortraitConfig()).items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=type(default), default=default)
    cfg = PortraitConfig(**vars(p.parse_args()))
    pt = a3_portrait(cfg.m, n_samples=cfg.samples, seed=cfg.seed)
    print("vertex angles / pi:", [round(a / 3.141592653589793, 12) for a in pt.angles])
    print("fiber types:", pt.fiber_types, " separatrices reach p0:", pt.separatrix_ok)
    print("predicted walls:", pt.region_walls)
    table = Counter((lab, obs) for lab, obs in zip(pt.labels, pt.observed))
    for (lab, obs), count in sorted(table.items()):
        print(f"  {lab:>10s} -> walls {obs}: {count}")
    print(f"match fraction {pt.match_fraction():.3f}")
    # files (CSV, SVG, JSON) through the command-line writer
    cli_main(["portrait", "--family", "A", "--k", "3", "--m", str(cfg.m),
              "--samples", str(cfg.samples), "--seed", str(cfg.seed), "--out-dir", cfg.out_dir])
    print("wrote", cfg.out_dir)


if __name__ == "__main__":
    main()
