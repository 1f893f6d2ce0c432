"""
Forward and backward ground states
==================================

As t -> +inf and t -> -inf a soliton emerges from the same datum, but with
different position and phase: the radiation on either side of the stationary
point shifts it by Delta(z1) forward and by Lambda(z1) backward.
"""

import numpy as np

from nlsist import RealGrid, backward_shift, forward_shift
from nlsist.experiments import GROUND_STATE_DATUM, scatter

data = scatter(GROUND_STATE_DATUM.sample(RealGrid.centered(40.0, 0.01)), RealGrid.centered(12.0, 0.01),
               search_box=(-3.0, 3.0, 0.05, 1.5)).data
(z1, c1), = data.discrete
delta, lam = forward_shift(data, z1), backward_shift(data, z1)
print(f"eigenvalue {z1:.4f}")
print(f"Delta(z1)  = {delta:.4f}")
print(f"Lambda(z1) = {lam:.4f}")

####################################################################
# The centre of a soliton with norming constant c sits at log(|c| / omega) / omega;
# the shift factor divides |c| by |shift|^2

omega = 2 * z1.imag
for name, s in (("t -> +inf", delta), ("t -> -inf", lam)):
    print(f"{name}: centre moves by {-2 * np.log(abs(s)) / omega:+.4f}, phase by {-2 * np.angle(s):+.4f}")

####################################################################
# The long split-step check of this picture is criterion A9 of the acceptance
# suite (``nlsist validate`` or ``pytest tests/test_acceptance.py -k a9``).
