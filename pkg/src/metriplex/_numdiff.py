"""Central finite differences shared by gradient oracles and tensor derivatives."""

import numpy as np

EPS = np.finfo(float).eps
STEP_SCALE = EPS ** (1.0 / 3.0)
# derivatives of quantities that were themselves finite-differenced carry
# noise ~ EPS/STEP_SCALE; a 5-point stencil at this step balances h^4 against it
NESTED_STEP_SCALE = 1e-3


def steps(z, scale=STEP_SCALE):
    z = np.asarray(z, dtype=float)
    h = scale * np.maximum(1.0, np.abs(z))
    # make z +/- h exactly representable so the divisor is the true spacing
    return (z + h) - z


def derivative(F, z, scale=STEP_SCALE, order=2):
    """Array of partials with the derivative index last: out[..., s] = dF/dz^s.

    ``order`` selects the 3-point (2) or 5-point (4) central stencil.
    """
    z = np.asarray(z, dtype=float)
    h = steps(z, scale)

    def at(s, t):
        x = z.copy()
        x[s] += t * h[s]
        return np.asarray(F(x), dtype=float)

    cols = []
    for s in range(z.size):
        if order == 2:
            cols.append((at(s, 1) - at(s, -1)) / (2.0 * h[s]))
        elif order == 4:
            cols.append((8.0 * (at(s, 1) - at(s, -1)) - (at(s, 2) - at(s, -2))) / (12.0 * h[s]))
        else:
            raise ValueError("stencil order must be 2 or 4")
    return np.stack(cols, axis=-1)


def gradient(f, z, scale=STEP_SCALE):
    return derivative(lambda x: np.asarray(f(x), dtype=float), z, scale)


def nested_derivative(F, z):
    """Derivative of a quantity that is itself finite-differenced."""
    return derivative(F, z, NESTED_STEP_SCALE, order=4)
