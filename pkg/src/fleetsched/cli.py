"""Command-line harness: scenario generation, solver runs, DQN training and
multi-seed comparisons. All randomness funnels through explicit seeds."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench, ddqn, scenario as scen


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def cmd_generate(args) -> int:
    params = _load_config(args.config)
    s = scen.generate_scenario(args.seed, params)
    scen.save_scenario(s, args.out)
    print(f"wrote scenario ({len(s.missions)} missions, "
          f"K*={s.K_star}) to {args.out}")
    return 0


def cmd_solve(args) -> int:
    s = scen.load_scenario(args.scenario)
    row, trace = bench.solve(s, args.algo, args.seed, pop=args.pop,
                             iters=args.iters, rho=args.rho,
                             policy_path=args.policy,
                             scenario_id=os.path.basename(args.scenario))
    os.makedirs(args.out, exist_ok=True)
    bench.write_results([row], os.path.join(args.out, "results.csv"))
    if trace:
        bench.write_trace(trace, os.path.join(
            args.out, f"trace_{args.algo}_{args.seed}.csv"))
    print(f"{args.algo} seed={args.seed}: fitness={row.fitness:.2f} "
          f"completed={row.completed} benefit={row.total_benefit:.2f} "
          f"wall={row.wall_ms:.0f}ms")
    return 0


def cmd_train(args) -> int:
    s = scen.load_scenario(args.scenario)
    config = ddqn.TrainConfig(episodes=args.episodes,
                              hidden_width=args.width,
                              batch_size=args.batch)
    policy, trace = ddqn.train(s, config, seed=args.seed)
    ddqn.save_policy(policy, args.out)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("episode,epsilon,mean_reward,total_benefit,completed\n")
            for t in trace:
                fh.write(f"{t.episode},{t.epsilon:.4f},{t.mean_reward:.4f},"
                         f"{t.total_benefit:.4f},{t.completed}\n")
    print(f"trained {args.episodes} episodes; checkpoint at {args.out}")
    return 0


def cmd_compare(args) -> int:
    s = scen.load_scenario(args.scenario)
    seeds = list(range(args.seeds))
    rows = []
    os.makedirs(args.out, exist_ok=True)
    for algo in args.algos:
        for seed in seeds:
            row, trace = bench.solve(
                s, algo, seed, pop=args.pop, iters=args.iters,
                policy_path=args.policy,
                scenario_id=os.path.basename(args.scenario))
            rows.append(row)
            if trace:
                bench.write_trace(trace, os.path.join(
                    args.out, f"trace_{algo}_{seed}.csv"))
    bench.write_results(rows, os.path.join(args.out, "results.csv"))
    summary = bench.summarize(rows)
    bench.write_summary(summary, os.path.join(args.out, "summary.csv"))
    for rec in summary:
        print(f"{rec['algo']}: fitness {rec['fitness_mean']:.2f} "
              f"± {rec['fitness_std']:.2f}, completed "
              f"{rec['completed_mean']:.2f} ± {rec['completed_std']:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fleetsched")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a scenario file")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--config", help="JSON file of generation parameters")
    g.set_defaults(func=cmd_generate)

    so = sub.add_parser("solve", help="run one solver on a scenario")
    so.add_argument("--scenario", required=True)
    so.add_argument("--algo", required=True, choices=bench.ALGOS)
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--pop", type=int, default=30)
    so.add_argument("--iters", type=int, default=1000)
    so.add_argument("--rho", type=float, default=0.4)
    so.add_argument("--policy", help="checkpoint file for ddqn-infer")
    so.add_argument("--out", default="results")
    so.set_defaults(func=cmd_solve)

    t = sub.add_parser("train", help="train the multi-agent DQN")
    t.add_argument("--scenario", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--episodes", type=int, default=2000)
    t.add_argument("--width", type=int, default=256)
    t.add_argument("--batch", type=int, default=512)
    t.add_argument("--out", required=True, help="checkpoint path")
    t.add_argument("--trace", help="optional training trace CSV")
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("compare", help="multi-seed comparison of solvers")
    c.add_argument("--scenario", required=True)
    c.add_argument("--algos", nargs="+", default=["cgg-aro", "aro"],
                   choices=bench.ALGOS)
    c.add_argument("--seeds", type=int, default=15)
    c.add_argument("--pop", type=int, default=30)
    c.add_argument("--iters", type=int, default=1000)
    c.add_argument("--policy", help="checkpoint file for ddqn-infer")
    c.add_argument("--out", default="results")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (bench.UnknownAlgo, ddqn.MissingPolicy,
            scen.InvalidScenario) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
