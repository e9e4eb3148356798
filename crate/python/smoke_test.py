#!/usr/bin/env python3
"""Smoke test for the sumrate_py extension module.

Builds the extension if needed, imports it straight out of the cargo target
directory, and runs all three algorithms on a small two-hop scenario.

Usage: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent

CONFIG = """
K = 2
M = 2
R = 2
N_B = 2
N_R = 2
N_M = 2
P_d = 1.0
sigma2 = 1.0
mode = "two-hop"
psnr_db = 20.0
rho = 0.5
"""


def import_extension():
    built = REPO / "target" / "debug" / "libsumrate_py.so"
    if shutil.which("cargo"):
        subprocess.run(
            ["cargo", "build", "-p", "sumrate-py"], cwd=REPO, check=True
        )
    elif not built.exists():
        raise SystemExit("cargo is unavailable and the extension is not built")
    # The cdylib is named lib<name>.so; Python wants <name><ext-suffix>.
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    stage = Path(tempfile.mkdtemp(prefix="sumrate_py_"))
    shutil.copy2(built, stage / f"sumrate_py{suffix}")
    sys.path.insert(0, str(stage))
    import sumrate_py

    return sumrate_py


def main():
    sumrate_py = import_extension()

    scenario = sumrate_py.Scenario(CONFIG)
    assert scenario.cells == 2 and scenario.users_per_cell == 2
    assert scenario.num_users == 4 and scenario.relays == 2
    assert scenario.mode == "two-hop"
    total = 10.0 ** (20.0 / 10.0)  # psnr_db = 20, sigma2 = 1
    assert math.isclose(scenario.bs_budget + scenario.relay_budget, total)

    rates = {}
    for algo in ("maxsr", "summse", "ia"):
        result = sumrate_py.run(
            scenario,
            algorithm=algo,
            channel_seed=7,
            init_seed=11,
            epsilon=1e-4,
            max_iters=200,
            record_trace=(algo == "maxsr"),
        )
        assert result.iterations >= 1, algo
        assert math.isfinite(result.sum_rate_per_slot), algo
        assert result.sum_rate_per_slot > 0.0, algo
        rates[algo] = result.sum_rate_per_slot
        print(f"  {result!r}")
        if algo == "maxsr":
            objectives = [step[1] for step in result.trace]
            assert len(objectives) == result.iterations + 1
            assert all(
                later >= earlier - 1e-8
                for earlier, later in zip(objectives, objectives[1:])
            ), "surrogate objective must be non-decreasing"

    # Same seeds, same scenario: the run must be exactly reproducible.
    again = sumrate_py.run(
        scenario, algorithm="maxsr", channel_seed=7, init_seed=11,
        epsilon=1e-4, max_iters=200,
    )
    assert again.sum_rate_per_slot == rates["maxsr"]

    # Rescaling the budgets must change the outcome scenario, not mutate the
    # original (Scenario is frozen).
    low = scenario.with_psnr(0.0, 0.5)
    assert math.isclose(low.bs_budget + low.relay_budget, 1.0)
    assert math.isclose(scenario.bs_budget + scenario.relay_budget, total)

    try:
        sumrate_py.run(scenario, algorithm="nonsense")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown algorithm must raise ValueError")

    print("PASS")


if __name__ == "__main__":
    main()
