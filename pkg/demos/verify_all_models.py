"""Run the full verification suite on every built-in model and summarize."""

from kahler_fedosov.geom import BUILTIN_MODELS
from kahler_fedosov.verify import config_for, run_suite

for name in BUILTIN_MODELS:
    results = run_suite(config_for(name, weight=6))
    failed = [r for r in results if not r.passed]
    print(f"{name:8s} {len(results) - len(failed)}/{len(results)} checks pass")
    for r in failed:
        print("   ", r.line())
