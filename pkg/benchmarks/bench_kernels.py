#!/usr/bin/env python3
"""Benchmark the compiled transition kernel against the pure-Python one.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Workloads:
  blocks-step    single transitions in the 4-block world (56 ground rules)
  counter-run    5 transitions over the 1000-fluent causal chain
  blocks-plan    the 3-step planning query with 1072 solutions
  mc-plan        missionaries & cannibals, all 4 length-11 plans
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from pal import syntax
from pal.engine import WellFoundedEngine, available_kernels
from pal.grounding import Program, build_signature
from pal.narrative import Narrative, ground_step
from pal.planner import Options, build_query, solve


def load(name):
    path = os.path.join(
        os.path.dirname(__file__), "..", "src", "pal", "examples", f"{name}.pal"
    )
    with open(path) as fh:
        return syntax.parse_program(fh.read())


def session(ast, kernel):
    signature = build_signature(ast)
    prog = Program(signature, ast.rule_schemas)
    engine = WellFoundedEngine(prog, kernel=kernel)
    narrative = Narrative(prog, engine)
    for sentence in ast.sentences:
        if isinstance(sentence, syntax.Initially):
            narrative.initialize(sentence.assigns)
            break
    return prog, engine, narrative


def bench_blocks_step(kernel, repeat):
    ast = load("blocks")
    prog, engine, narrative = session(ast, kernel)
    acts = {prog.action_index[("carry", (1,))]: prog.encode(2)}
    state = narrative.current
    n = 20000 * repeat
    start = time.perf_counter()
    for _ in range(n):
        engine.transition(state, acts)
    elapsed = time.perf_counter() - start
    return elapsed, f"{elapsed / n * 1e6:.1f} us/transition"


def bench_counter_run(kernel, repeat):
    ast = load("counter")
    start = time.perf_counter()
    for _ in range(repeat):
        prog, engine, narrative = session(ast, kernel)
        for sentence in ast.sentences:
            if isinstance(sentence, syntax.Do):
                for step in sentence.steps:
                    narrative.perform([ground_step(step, prog, narrative)])
    elapsed = time.perf_counter() - start
    return elapsed, f"{elapsed / repeat * 1e3:.0f} ms/run"


def _plan(ast, qtext, kernel, concurrent):
    prog, engine, narrative = session(ast, kernel)
    query = build_query(syntax.parse_sentence(qtext), prog.signature, prog)
    return solve(
        prog, engine, narrative.current, None, query,
        Options(concurrent=concurrent),
    )


def bench_blocks_plan(kernel, repeat):
    path = os.path.join(
        os.path.dirname(__file__), "..", "src", "pal", "examples", "blocks.pal"
    )
    with open(path) as fh:
        declarations = fh.read().split("initially")[0]
    ast = syntax.parse_program(
        declarations
        + "options not concurrent;\ninitially loc(B):=table,free(B);"
    )
    start = time.perf_counter()
    for _ in range(repeat):
        sols = _plan(ast, "query ; ; ; not free(3)?", kernel, concurrent=False)
        assert len(sols) == 1072
    elapsed = time.perf_counter() - start
    return elapsed, f"{elapsed / repeat * 1e3:.0f} ms/query"


def bench_mc_plan(kernel, repeat):
    ast = load("missionaries")
    start = time.perf_counter()
    for _ in range(repeat):
        sols = _plan(
            ast, "query ...{11} m=0 and c=0 and not bleft?", kernel,
            concurrent=False,
        )
        assert len(sols) == 4
    elapsed = time.perf_counter() - start
    return elapsed, f"{elapsed / repeat * 1e3:.0f} ms/query"


BENCHES = [
    ("blocks-step", bench_blocks_step),
    ("counter-run", bench_counter_run),
    ("blocks-plan", bench_blocks_plan),
    ("mc-plan", bench_mc_plan),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=1)
    args = parser.parse_args()

    kernels = available_kernels()
    print(f"kernels: {', '.join(kernels)}")
    print(f"{'workload':<14}" + "".join(f"{k:>22}" for k in kernels) + f"{'speedup':>10}")
    for name, bench in BENCHES:
        times = {}
        notes = {}
        for kernel in kernels:
            times[kernel], notes[kernel] = bench(kernel, args.repeat)
        row = f"{name:<14}"
        for kernel in kernels:
            row += f"{notes[kernel]:>22}"
        if "c" in times and "python" in times:
            row += f"{times['python'] / times['c']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
