#!/usr/bin/env python3
"""
Polymer Lab - Experiment Suite Runner
=====================================

Runs every experiment config in ``configs/`` (or the files given on the
command line) through ``python -m polymer_lab`` and prints a summary.

Experiments included by default:
1. Tracy-Widom table (F2 参考表)
2. Fredholm Laplace checks (拉普拉斯变换校验)
3. Crossover kernel vs Airy kernel (两条路径)
4. Lattice universality (离散聚合物普适性)
5. Semi-discrete universality (半离散聚合物)
6. Coupling gap (耦合误差)
7. Law of large numbers (大数定律)
8. Zero-temperature limit (零温极限)
9. Fixed-n GUE comparison
10. Brownian modulus of continuity (连续模)
"""

import argparse
import glob
import json
import os
import subprocess
import sys
import time

from polymer_lab.experiments.config import SUBCOMMANDS

EXPERIMENT_TO_SUBCOMMAND = {v: k for k, v in SUBCOMMANDS.items()}
DEFAULT_TIMEOUT = 6 * 3600
EXIT_MEANINGS = {2: "config error", 3: "convergence failure", 4: "acceptance failure"}


def run_experiment(config_path, out_dir, workers, check, timeout):
    """Run one config file and report its status"""
    with open(config_path, encoding="utf-8") as fh:
        experiment = json.load(fh).get("experiment")
    name = os.path.basename(config_path)
    print(f"\n{'=' * 60}")
    print(f"Running {name} ({experiment})...")
    print(f"{'=' * 60}")

    if experiment not in EXPERIMENT_TO_SUBCOMMAND:
        print(f"❌ {name}: unknown experiment {experiment!r}")
        return False

    cmd = [sys.executable, "-m", "polymer_lab", EXPERIMENT_TO_SUBCOMMAND[experiment],
           "--config", config_path, "--out", out_dir, "--workers", str(workers)]
    if check:
        cmd.append("--check")
    try:
        result = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        print(f"⏰ {name} timed out!")
        return False
    except Exception as e:
        print(f"💥 Error running {name}: {str(e)}")
        return False

    if result.returncode == 0:
        print(f"✅ {name} completed successfully!")
        if result.stderr:
            print(result.stderr.rstrip())
        return True
    meaning = EXIT_MEANINGS.get(result.returncode, "error")
    print(f"❌ {name} failed with exit code {result.returncode} ({meaning})")
    if result.stderr:
        print("Error:", result.stderr.rstrip())
    return False


def main(argv=None):
    parser = argparse.ArgumentParser(description="Run a suite of polymer-lab experiment configs")
    parser.add_argument("configs", nargs="*", help="config files (default: configs/*.json)")
    parser.add_argument("--out", default="results")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--check", action="store_true", help="enforce acceptance thresholds")
    parser.add_argument("--timeout", type=int, default=DEFAULT_TIMEOUT)
    args = parser.parse_args(argv)

    configs = args.configs or sorted(glob.glob(os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                                            "configs", "*.json")))
    print("🧪 Polymer Lab Experiment Suite")
    print("=" * 60)

    results = {}
    start_time = time.time()
    for path in configs:
        results[path] = run_experiment(path, args.out, args.workers, args.check, args.timeout)

    total_time = time.time() - start_time
    successful = sum(results.values())
    failed = len(results) - successful

    print(f"\n{'=' * 60}")
    print("📊 SUMMARY REPORT")
    print(f"{'=' * 60}")
    print(f"Total execution time: {total_time:.2f} seconds")
    print(f"Experiments run: {len(results)}")
    print(f"✅ Successful: {successful}")
    print(f"❌ Failed: {failed}")
    print(f"\n📁 Outputs are organized as {args.out}/<experiment>/<config-hash>/")
    print("      samples.csv  - per-sample ensembles")
    print("      summary.csv  - per-N summaries and checks")
    print("      meta.json    - config echo, timings, file digests")

    if failed == 0:
        print("\n🎉 All experiments completed successfully!")
    else:
        print(f"\n⚠️  {failed} experiment(s) had issues. Check the output above for details.")
    print(f"\n{'=' * 60}")
    return failed == 0


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
