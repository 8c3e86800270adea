"""Compare the numba and numpy relaxation/solver backends.

Runs each workload in a fresh subprocess per backend (the PLURIPOT_BACKEND
flag is read at import), checks that both backends agree to 1e-10, and
prints a timing table.  Exit status 1 on any disagreement.

    python benchmarks/bench_backends.py
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _workload_sor(h):
    import numpy as np
    from pluripot.geometry import disk_spec, rasterize_domain
    from pluripot.envelopes import green_function

    # warm-up on a coarse grid so JIT cost stays out of the timing
    green_function(rasterize_domain(disk_spec(0.0, 1.0), 0.1), 0.3)
    dom = rasterize_domain(disk_spec(0.0, 1.0), h)
    t0 = time.monotonic()
    g = green_function(dom, 0.5)
    dt = time.monotonic() - t0
    # the pole node is -inf by construction; fingerprint the finite part
    vals = g.values[dom.interior]
    fingerprint = float(np.sum(vals[np.isfinite(vals)]))
    return {"value": fingerprint, "seconds": dt, "sweeps": g.sweeps}


def _workload_pgd(n_nodes):
    from pluripot.capacity import (PlanarCompactSet, IntervalUnionSet,
                                   log_capacity)

    seg = PlanarCompactSet.from_intervals(IntervalUnionSet(((-1.0, 1.0),),
                                                           ()))
    log_capacity(seg, n_nodes=64)  # warm-up
    t0 = time.monotonic()
    sol = log_capacity(seg, n_nodes=n_nodes)
    dt = time.monotonic() - t0
    return {"value": float(sol.capacity), "seconds": dt,
            "sweeps": sol.iterations}


WORKLOADS = {
    "sor-disk-h0.02": lambda: _workload_sor(0.02),
    "sor-disk-h0.01": lambda: _workload_sor(0.01),
    "pgd-interval-512": lambda: _workload_pgd(512),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--workload", choices=sorted(WORKLOADS))
    args = ap.parse_args()
    if args.workload:
        from pluripot import BACKEND
        rep = WORKLOADS[args.workload]()
        rep["backend"] = BACKEND
        print(json.dumps(rep))
        return 0

    rows, bad = [], []
    for name in sorted(WORKLOADS):
        results = {}
        for backend in ("numba", "numpy"):
            env = dict(os.environ, PLURIPOT_BACKEND=backend)
            proc = subprocess.run(
                [sys.executable, os.path.abspath(__file__), "--workload",
                 name], capture_output=True, env=env, timeout=600)
            if proc.returncode:
                sys.stderr.write(proc.stderr.decode())
                return 1
            results[backend] = json.loads(proc.stdout)
        a, b = results["numba"], results["numpy"]
        denom = max(abs(a["value"]), 1.0)
        rel = abs(a["value"] - b["value"]) / denom
        agree = rel <= 1e-10
        if not agree:
            bad.append(name)
        speedup = b["seconds"] / max(a["seconds"], 1e-12)
        rows.append((name, a["backend"], a["seconds"], b["seconds"],
                     speedup, rel, "ok" if agree else "DISAGREE"))

    print("%-20s %-8s %10s %10s %9s %10s  %s"
          % ("workload", "fast", "numba[s]", "numpy[s]", "speedup",
             "rel-diff", "check"))
    for name, backend, ta, tb, sp, rel, verdict in rows:
        print("%-20s %-8s %10.3f %10.3f %8.1fx %10.1e  %s"
              % (name, backend, ta, tb, sp, rel, verdict))
    if bad:
        print("backend disagreement: %s" % ", ".join(bad))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
