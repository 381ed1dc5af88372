"""
Does the generator's domain depend on time?

The vertex condition v(1) = C(t)^-1 B C(t) v(0) couples neighbouring edges
through speed ratios. If every coupled pair keeps a fixed ratio, the domain is
the same at all times; otherwise it moves. This demo runs the check on three
cases and shows what the witness looks like.
"""

# %%
import numpy as np

from graphflow import Edge, MetricGraph, VelocityProfile, constant_domain_check, velocity_adjacency

graph = MetricGraph.build(
    ["v1", "v2"],
    [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")],
    {("v2", "e1"): 1.0, ("v1", "e2"): 1.0},
)
times = np.linspace(0.0, 2 * np.pi, 50)

# %%
cases = {
    "proportional": [VelocityProfile.sinusoid(2.0, 1.0), VelocityProfile.sinusoid(3.0, 1.5)],
    "coupled, not proportional": [VelocityProfile.constant(1.0), VelocityProfile.sinusoid(2.0, 1.0)],
}
for name, vel in cases.items():
    res = constant_domain_check(graph.line_adjacency, vel, times)
    print(f"{name}: constant domain = {res.constant}, witness = {res.witness}")

# %% [markdown]
# The witness names a coupled pair of edges and two times at which their speed
# ratio differs. The boundary matrices at those times show the change.

# %%
res = constant_domain_check(graph.line_adjacency, cases["coupled, not proportional"], times)
i, j, ta, tb = res.witness
for t in (ta, tb):
    print(f"B_C({t:.3f}) =\n", velocity_adjacency(graph.line_adjacency, cases["coupled, not proportional"], t))

# %% [markdown]
# When the two edges do not feed each other the condition is vacuous.

# %%
print("decoupled:", constant_domain_check(np.eye(2), cases["coupled, not proportional"], times).constant)
