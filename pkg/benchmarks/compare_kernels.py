"""Time the compiled kernels against the pure-numpy fallback.

Each timing runs in a fresh subprocess so MGS_DISABLE_NUMBA is honored at
import time and JIT compilation can be excluded via a warmup chain.

Usage: python benchmarks/compare_kernels.py [--iterations N]
"""

import argparse
import json
import os
import subprocess
import sys

SNIPPET = """
import json, time
import numpy as np
import mgsamplers as mg

spec = json.loads({spec!r})
target = {{
    "exponential": lambda: mg.exponential_target(1.0),
    "bimodal_2d": mg.bimodal_2d_target,
}}[spec["target"]]()
icfg = mg.IntegratorConfig(base_step=0.1) if spec["kind"] == "mg_hmc" else None
cfg = mg.SamplerConfig(spec["kind"], mg.KineticParams(spec["a"]),
                       spec["iterations"], spec["iterations"] // 5, 0,
                       np.full(target.dim, 1.0), icfg)
mg.run_sampler(target, cfg)  # warmup: triggers JIT when numba is enabled
t0 = time.perf_counter()
mg.run_sampler(target, cfg)
print(json.dumps(time.perf_counter() - t0))
"""


def time_case(spec, disable_numba):
    env = dict(os.environ)
    if disable_numba:
        env["MGS_DISABLE_NUMBA"] = "1"
    else:
        env.pop("MGS_DISABLE_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", SNIPPET.format(spec=json.dumps(spec))],
        env=env, capture_output=True, text=True, check=True)
    return float(json.loads(out.stdout.strip().splitlines()[-1]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=2000)
    args = ap.parse_args()

    cases = [
        ("mg_hmc", "exponential", 1.0),
        ("mg_hmc", "bimodal_2d", 2.0),
        ("mg_ss_analytic", "exponential", 1.0),
        ("std_slice", "exponential", 1.0),
    ]
    print(f"{'sampler':<16}{'target':<14}{'a':>4}{'numba (s)':>12}"
          f"{'numpy (s)':>12}{'speedup':>9}")
    for kind, target, a in cases:
        spec = {"kind": kind, "target": target, "a": a,
                "iterations": args.iterations}
        fast = time_case(spec, disable_numba=False)
        slow = time_case(spec, disable_numba=True)
        print(f"{kind:<16}{target:<14}{a:>4g}{fast:>12.3f}{slow:>12.3f}"
              f"{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
