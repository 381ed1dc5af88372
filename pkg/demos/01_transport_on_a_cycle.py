"""
Transport around a two-edge cycle.

Material sits on two unit edges joined head to tail. Each edge moves its
contents towards x=0 at its own speed; whatever leaves one edge enters the
other. We follow a ramp profile through a few laps and compare the three
evolution schemes.

Run: python demos/01_transport_on_a_cycle.py
"""

# %%
import numpy as np

from graphflow import Edge, MetricGraph, VelocityProfile
from graphflow.transport import PolynomialData, evolve, total_mass, trace_value

graph = MetricGraph.build(
    ["v1", "v2"],
    [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")],
    {("v2", "e1"): 1.0, ("v1", "e2"): 1.0},
)
print("line-graph matrix B:\n", graph.line_adjacency)

# %% [markdown]
# With unit speeds the solution is a pure shift. A point at x=0.9 on e1 at
# time 0.3 came across the vertex at time 0.2 and started on e2 at x=0.2.

# %%
unit = [VelocityProfile.constant(1.0)] * 2
ramp = PolynomialData([[0.0, 1.0], [1.0, -1.0]])  # f1 = x, f2 = 1 - x
print("u1(0.5, 0.3) =", trace_value(graph, unit, ramp, 0, 0.5, 0.0, 0.3))
print("u1(0.9, 0.3) =", trace_value(graph, unit, ramp, 0, 0.9, 0.0, 0.3))

# %% [markdown]
# Now the speeds oscillate in time, out of phase. Edge masses slosh back and
# forth while the total stays put.

# %%
vel = [VelocityProfile.sinusoid(2.0, 0.5), VelocityProfile.sinusoid(2.0, 0.5, phase=1.0)]
for scheme in ("oracle", "semilagrangian", "frozen-product"):
    state, report = evolve(graph, vel, ramp, 0.0, 3.0, dt=0.01, scheme=scheme, cells=200)
    per_edge, total = total_mass(state)
    print(f"{scheme:>15}: edge masses {np.round(per_edge, 4)}, total {total:.12f}, drift {report.mass_drift:.1e}")

# %% [markdown]
# The grid schemes smear fronts a little (first-order remap) but agree with
# the exact oracle to within a few percent in L1 at this resolution.

# %%
exact, _ = evolve(graph, vel, ramp, 0.0, 3.0, scheme="oracle", cells=200)
grid, _ = evolve(graph, vel, ramp, 0.0, 3.0, dt=0.01, cells=200)
print("L1 distance semilagrangian vs oracle:", np.abs(grid.values - exact.values).sum() / 200)
