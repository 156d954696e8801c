"""Mission assignment and task offloading for edge-assisted vehicle fleets.

Subpackages: road network + routing (roadnet), mission modeling (missions),
radio/offloading model (radio), scenario assembly (scenario), assignment
scoring (evaluation), population-based solvers (optimizers), multi-agent
double DQN (ddqn), and the benchmark harness (bench, cli).
"""

__version__ = "0.1.0"
