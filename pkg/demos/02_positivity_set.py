"""
Sampling the positivity set
===========================

The relaxation never looks at concrete values of h, but test oracles do:
lifting a grid through x -> (x, h(x)) and keeping the points where every
generator is nonnegative gives a finite picture of P(Q).
"""
import numpy as np

from measos.polyalg import VarSpace, idempotent_rules, parse_poly
from measos.quadmod import (GridSpec, MeasurableEvaluator, argmin_on_sample, make_archimedean,
                            min_on_sample, sample_positivity_set)

S = VarSpace(1, 1)
Q = make_archimedean(S, idempotent_rules(S), [], epsilon=1.0)
print("ball generator after reduction:", Q.ball)

step = MeasurableEvaluator((lambda xs: (xs[:, 0] >= 0).astype(float),))
sample = sample_positivity_set(Q, step, GridSpec(0.25))
print(sample.points)

# With h = [x >= 0] the only lifted point on the h = 1 branch is x = 0: the
# ball 1 - x^2 - h leaves no room elsewhere.
f = parse_poly("3*h1 + x1^2 - x1", S)
fine = sample_positivity_set(Q, step, GridSpec(1e-3))
print("min over the graph of [x >= 0]:", min_on_sample(f, fine))

# A different 0/1-valued h sees the branch where f attains -1/4.
zero = MeasurableEvaluator((lambda xs: np.zeros(len(xs)),))
fine0 = sample_positivity_set(Q, zero, GridSpec(1e-3))
print("min with h = 0:", min_on_sample(f, fine0), "at", argmin_on_sample(f, fine0))
