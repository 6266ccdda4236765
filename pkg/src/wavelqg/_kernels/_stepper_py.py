"""Pure-numpy Euler-Maruyama stepping kernel (fallback path).

Semantics match the compiled kernel in ``_stepper_cy.pyx``: cost and
error integrands are evaluated at the pre-update state, the state is
advanced in place, and the running max of |state| is tracked for blow-up
detection.
"""

import numpy as np


def advance(z, m, qbar, krk, noise, dt):
    """Advance ``z`` through ``noise.shape[0]`` Euler-Maruyama steps.

    z     : (4n,) joint (plant, estimate) state, updated in place
    m     : (4n, 4n) closed-loop generator
    qbar  : (2n, 2n) state cost weight, applied to the plant half
    krk   : (2n, 2n) control cost weight K' R K, applied to the estimate half
    noise : (steps, 4n) pre-scaled additive increments (already * sqrt(dt))
    dt    : step size

    Returns (cost_integral, err_integral, max_abs_state) for the chunk.
    """
    half = qbar.shape[0]
    cost = 0.0
    err = 0.0
    mx = 0.0
    for t in range(noise.shape[0]):
        x = z[:half]
        xh = z[half:]
        cost += float(x @ (qbar @ x) + xh @ (krk @ xh))
        e = x - xh
        err += float(e @ e)
        z += dt * (m @ z) + noise[t]
        amax = float(np.abs(z).max())
        if amax > mx:
            mx = amax
    return cost * dt, err * dt, mx
