"""Compare the compiled kernel against the pure-Python fallback.

Runs the same workloads under both backends (each in a fresh interpreter,
since the kernel is chosen at import) and prints a timing table:

    python benchmarks/bench_backends.py
    python benchmarks/bench_backends.py --repeat 5
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("eval_scalar", "eval_batch", "flow_traces", "grid_solve")


def run_workloads(repeat):
    import numpy as np

    import advect2d
    from advect2d import FlowEngine, corpus, parse_field, solve_direct

    timings = {}

    def best(fn):
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    f = parse_field("exp(-x) * sin(3*y) + x^2*y - sqrt(x^2 + y^2 + 1)")

    def w_scalar():
        for i in range(20000):
            f(0.1 + 1e-5 * i, 0.2)
    timings["eval_scalar"] = best(w_scalar)

    xs = np.linspace(0.0, 1.0, 200000)
    ys = np.linspace(1.0, 2.0, 200000)

    def w_batch():
        f.eval_many(xs, ys)
    timings["eval_batch"] = best(w_batch)

    sq = corpus.example_square()
    rot = corpus.example_triangle()
    eng = FlowEngine(rot.domain, rot.beta, cfg=rot.cfg)
    rng = np.random.default_rng(7)
    pts = [(float(rng.uniform(-y + 0.01, y - 0.01)), float(y))
           for y in rng.uniform(0.05, 0.95, size=2000)]

    def w_flow():
        for x, y in pts:
            eng.trace((x, y), direction=-1)
    timings["flow_traces"] = best(w_flow)

    cs = (np.arange(50) + 0.5) / 50

    def w_solve():
        # fresh field each run: point values are cached per instance
        u = solve_direct(sq.domain, sq.beta, mu=sq.mu, g=sq.g,
                         classification=sq.classification)
        for x in cs:
            for y in cs:
                u(float(x), float(y))
    timings["grid_solve"] = best(w_solve)

    return {"backend": advect2d.backend_name(), "timings": timings}


def run_child(backend, repeat):
    env = dict(os.environ, ADVECT2D_BACKEND=backend)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--child",
         "--repeat", str(repeat)],
        env=env, capture_output=True, text=True)
    if out.returncode != 0:
        sys.stderr.write(out.stderr)
        raise SystemExit("backend %r failed" % backend)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3,
                    help="repetitions per workload; best time wins")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        json.dump(run_workloads(args.repeat), sys.stdout)
        return

    results = {r["backend"]: r["timings"]
               for r in (run_child(b, args.repeat) for b in ("c", "python"))}
    if set(results) != {"c", "python"}:
        raise SystemExit("expected one run per backend, got %s"
                         % sorted(results))

    print(f"{'workload':<14} {'compiled':>12} {'python':>12} {'speedup':>9}")
    for name in WORKLOADS:
        tc, tp = results["c"][name], results["python"][name]
        print(f"{name:<14} {tc * 1e3:>10.2f}ms {tp * 1e3:>10.2f}ms "
              f"{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
