"""The alpha-GAN value function, its limits, and the quantities around it.

Run: python demos/01_value_function.py
"""

import math

import numpy as np

from alphagan import (
    alpha_classification_loss,
    arimoto_conditional_entropy,
    renyi_conditional_cross_entropy,
    value_function,
)

pr = np.array([0.5, 0.3, 0.2])
pg = np.array([0.1, 0.3, 0.6])
d = np.array([0.8, 0.5, 0.3])

print("V_alpha for one fixed discriminator across orders")
for alpha in (0, 0.1, 0.5, 1, 2, 10, math.inf):
    print(f"  alpha={alpha:<5} V={value_function(alpha, (pr, pg), d): .6f}")

# at alpha = 1 the value is the average binary cross entropy with fractional-chance labels
wr, wg = pr / (pr + pg), pg / (pr + pg)
bce = np.mean(wr * np.log(d) + wg * np.log(1 - d))
print(f"\nalpha=1 value {value_function(1, (pr, pg), d):.12f} vs cross entropy form {bce:.12f}")
print(f"cross entropy H_2 = {renyi_conditional_cross_entropy(2, (pr, pg), d):.6f} (negated value)")

print("\nBest achievable value equals minus the Arimoto conditional entropy")
for alpha in (0.5, 1, 3):
    d_best = wr**alpha / (wr**alpha + wg**alpha)
    v = value_function(alpha, (pr, pg), d_best)
    print(f"  alpha={alpha}: V(D*)={v:.10f}  -H_A={-arimoto_conditional_entropy(alpha, (pr, pg)):.10f}")

print("\nalpha-loss of a 3-class classifier")
cond = np.eye(3)[[0, 1, 2, 1]]
pred = np.array([[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4], [0.2, 0.6, 0.2]])
for alpha in (0.5, 1, 2, math.inf):
    print(f"  alpha={alpha:<4} L={alpha_classification_loss(alpha, cond, pred):.6f}")
