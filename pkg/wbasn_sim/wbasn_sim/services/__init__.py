# WBASN Sim Services Module
#
# This module contains the simulation core:
# - radio_energy.py: first-order radio energy model
# - physiology.py: synthetic body signals and the soldier energy budget
# - nodes.py: event-driven sensor nodes and the base station
# - simulator.py: round loop, seeded runs and experiments
# - metrics.py: lifetime, throughput and fatigue metrics with confidence intervals
# - output.py: CSV series, summary table and manifest
