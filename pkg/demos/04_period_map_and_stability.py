"""
Stability of a periodic network from its period map.

With T-periodic speeds the evolution over one period, M = U(T, 0), decides
long-time behaviour: the growth bound is -log r(M) / T. We assemble M on a
grid, find its Perron root, and compare with a direct fit of log ||U(t,0) f||.
"""

# %%
import math

import numpy as np

from graphflow import Edge, MetricGraph, VelocityProfile
from graphflow.spectral import growth_bound_fit, monodromy_assemble, spectral_radius
from graphflow.transport import AbsorptionProfile, NetworkState, evolve

graph = MetricGraph.build(
    ["v1", "v2"],
    [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")],
    {("v2", "e1"): 1.0, ("v1", "e2"): 1.0},
)

# %% [markdown]
# Unit speeds, period 2: every particle laps the cycle exactly once, so M is
# the identity and nothing decays.

# %%
unit = [VelocityProfile.constant(1.0)] * 2
M = monodromy_assemble(graph, unit, 2.0, cells=20, dt=0.05)
print("max |M - I| =", np.abs(M.matrix - np.eye(40)).max())
print(spectral_radius(M).to_dict())

# %% [markdown]
# Add absorption that is strongest in the middle of each edge and let the
# speeds pulse with period 2. Now the network loses mass every lap.

# %%
vel = [VelocityProfile.sinusoid(1.5, 0.5, math.pi)] * 2
q = [AbsorptionProfile.grid([0.0], np.linspace(0, 1, 5), [[-0.2, -0.6, -1.0, -0.4, -0.1]])] * 2
M = monodromy_assemble(graph, vel, 2.0, cells=40, dt=0.025, absorption=q)
rep = spectral_radius(M)
print(f"r = {rep.radius:.6f}, omega0 = {rep.omega0:.6f}: {rep.verdict}")

# %%
f = NetworkState(np.ones((2, 40)))
f, _ = evolve(graph, vel, f, 0.0, 20.0, 0.025, absorption=q)  # let the transient die out
slope = growth_bound_fit(graph, vel, f, 20.0, np.arange(2, 26, 2.0), 0.025, absorption=q)
print(f"fitted decay rate {-slope:.6f} vs omega0 {rep.omega0:.6f}")
