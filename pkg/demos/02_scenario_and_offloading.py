"""Generate a full scenario and inspect mission delays and offload costs.

Demonstrates: deterministic scenario assembly, mission structure (deadlines,
budgets, dependencies, compute tasks) and the per-mission delay/cost profile
produced by greedy edge/cloud offloading.
"""

from fleetsched.evaluation import isolated_delay, mission_profiles
from fleetsched.scenario import generate_scenario


def main():
    s = generate_scenario(seed=0)
    print(f"scenario: {len(s.missions)} missions, {len(s.vehicles)} vehicles,"
          f" {len(s.servers) - 1} edge servers + cloud")

    delays, costs = mission_profiles(s)
    print(f"\nisolated delays: {delays.min():.0f}..{delays.max():.0f} s "
          f"(mean {delays.mean():.0f})")
    print(f"offload costs:   {costs.min():.2f}..{costs.max():.2f}")

    print("\nfirst five missions:")
    for m in s.missions[:5]:
        bd, cost = isolated_delay(m, s.vehicles[0], s)
        deps = f" preds={sorted(m.preds)}" if m.preds else ""
        print(f"  #{m.id}: {m.start_node}->{m.end_node}, "
              f"{len(m.tasks)} tasks, deadline {m.deadline_s:.0f}s, "
              f"budget {m.budget:.1f}{deps}")
        print(f"      move {bd.move_s:.1f}s + comm {bd.comm_s:.3f}s "
              f"+ comp {bd.comp_s:.3f}s, offload cost {cost:.2f}")


if __name__ == "__main__":
    main()
