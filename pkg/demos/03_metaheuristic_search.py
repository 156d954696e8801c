"""Compare the chaotic rabbit-search optimizer against the plain baseline.

Demonstrates: random-key decoding, fitness evaluation, and the convergence
traces of both population-based solvers on the same scenario and seed.
"""

from fleetsched.evaluation import evaluate
from fleetsched.optimizers import OptimizerConfig, run_aro, run_cgg_aro
from fleetsched.scenario import generate_scenario


def main():
    s = generate_scenario(seed=0)
    config = OptimizerConfig(pop_size=30, iterations=300, seed=1)

    for name, runner in (("CGG-ARO", run_cgg_aro), ("ARO", run_aro)):
        res = runner(s, config)
        report = evaluate(res.best_solution, s)
        print(f"{name}: fitness {res.best_fitness:.1f}, "
              f"completed {report.completed_count}/{s.Z}, "
              f"total benefit {report.total_benefit:.1f}, "
              f"{res.wall_s:.1f}s / {res.evaluations} evaluations")
        marks = [0, 24, 49, 99, 199, 299]
        curve = ", ".join(f"g{pt.generation}:{pt.best_fitness:.0f}"
                          for pt in (res.trace[i] for i in marks))
        print(f"  convergence: {curve}")


if __name__ == "__main__":
    main()
