"""Run every scenario with its default (or TOML-supplied) configuration.

    python3 scripts/run_all.py [--out results] [--seed N] [--configs configs/]

A ``configs/<scenario>.toml`` file, when present, replaces the defaults for
that scenario. CSV and JSON sidecars land in ``--out``.
"""
import argparse
import time
from pathlib import Path

from fspa.harness import SCENARIOS, ScenarioConfig, load_config, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--configs", default="configs")
    args = ap.parse_args()
    for name in SCENARIOS:
        path = Path(args.configs) / f"{name}.toml"
        cfg = load_config(path, name) if path.is_file() else ScenarioConfig(name)
        d = cfg.to_dict()
        d["output_dir"] = args.out
        if args.seed is not None:
            d["seed"] = args.seed
        cfg = ScenarioConfig.from_dict(d)
        t0 = time.perf_counter()
        result = run_scenario(cfg)
        csv_path, _ = result.write(cfg.output_dir)
        print(f"{name:20s} {len(result.rows):5d} rows  {time.perf_counter() - t0:6.2f} s  -> {csv_path}")


if __name__ == "__main__":
    main()
