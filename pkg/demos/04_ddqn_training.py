"""Train a small multi-agent DQN and compare its one-shot inference against
population-based search.

Demonstrates: the round-robin assignment environment, delayed composite
rewards, training traces, checkpointing, and fast greedy inference.
"""

import numpy as np

from fleetsched import ddqn
from fleetsched.evaluation import evaluate
from fleetsched.optimizers import OptimizerConfig, run_cgg_aro
from fleetsched.scenario import generate_scenario

PARAMS = {"num_missions": 10, "Z": 10, "K_star": 2, "num_mec": 8,
          "grid_rows": 4, "grid_cols": 4}


def main():
    s = generate_scenario(seed=0, params=PARAMS)
    config = ddqn.TrainConfig(episodes=1500, hidden_width=64,
                              batch_size=256, edge_cap=16, lr=1e-3,
                              epsilon_decay=0.99)
    print(f"training {s.K_star} agents for {config.episodes} episodes...")
    policy, trace = ddqn.train(s, config, seed=0)

    for lo, hi in ((0, 300), (600, 900), (1200, 1500)):
        chunk = trace[lo:hi]
        print(f"  episodes {lo:4d}-{hi:4d}: "
              f"mean benefit {np.mean([t.total_benefit for t in chunk]):.0f},"
              f" completed {np.mean([t.completed for t in chunk]):.1f},"
              f" epsilon {chunk[-1].epsilon:.2f}")

    D = ddqn.infer(policy, s)
    learned = evaluate(D, s)
    print(f"\ngreedy inference: {learned.completed_count}/{s.Z} completed, "
          f"total benefit {learned.total_benefit:.1f}")

    res = run_cgg_aro(s, OptimizerConfig(pop_size=30, iterations=200,
                                         seed=0))
    search = evaluate(res.best_solution, s)
    print(f"search baseline:  {search.completed_count}/{s.Z} completed, "
          f"total benefit {search.total_benefit:.1f}")


if __name__ == "__main__":
    main()
