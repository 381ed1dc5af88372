"""
The resolvent in closed form.

For the frozen generator A(s) the equation (lambda - A(s)) v = f is a set of
scalar ODEs tied together only at the vertices. Solving each edge and then an
m x m boundary system gives v directly. We check the result three ways:
the equation itself, the vertex condition, and the Laplace integral of the
frozen semigroup.
"""

# %%
import numpy as np

from graphflow import Edge, MetricGraph, VelocityProfile
from graphflow.errors import SingularBoundarySystem
from graphflow.spectral import resolvent_apply, resolvent_check
from graphflow.transport import PolynomialData

graph = MetricGraph.build(
    ["v1", "v2"],
    [Edge("e1", "v1", "v2"), Edge("e2", "v2", "v1")],
    {("v2", "e1"): 1.0, ("v1", "e2"): 1.0},
)
vel = [VelocityProfile.sinusoid(2.0, 0.5), VelocityProfile.sinusoid(2.0, 0.7, 1.5, 0.3)]
f = PolynomialData([[0.5, 1.0, -1.5], [2.0, -1.0, 0.25]])

# %%
v = resolvent_apply(graph, vel, 0.4, 1.0, f)
x = np.linspace(0, 1, 5)
print("v on e1:", np.round(v.value(0, x).real, 6))
print("condition of the boundary system:", f"{v.condition:.3g}")

# %%
for lam in (1.0, 1.0 + 1.0j, 2.0):
    chk = resolvent_check(graph, vel, 0.4, lam, f, laplace_cells=200)
    print(
        f"lambda={lam}: identity {chk.identity_residual:.1e}, boundary {chk.boundary_residual:.1e}, "
        f"laplace {chk.laplace_residual:.1e}"
    )

# %% [markdown]
# At lambda = 0 the boundary system is singular: the network conserves mass,
# so constants (suitably weighted) are equilibria and 0 is in the spectrum.

# %%
try:
    resolvent_apply(graph, vel, 0.4, 0.0, f)
except SingularBoundarySystem as exc:
    print("lambda=0:", exc)
