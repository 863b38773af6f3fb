"""Random backgrounds and perturbations for the randomized suites."""

import numpy as np

from .background import PeriodicBackground
from .perturbed import Perturbation, perturbed_polys

EDGE_GUARD = 1e-6


def random_background(rng, q):
    """Period-``q`` background with ``prod a0 = 1`` and moderate coefficients."""
    log_a = rng.uniform(-0.5, 0.5, q)
    log_a -= log_a.mean()
    a0 = np.exp(log_a)
    # pin the product exactly after rounding
    a0[-1] = 1.0 / np.prod(a0[:-1])
    b0 = rng.uniform(-1.0, 1.0, q)
    return PeriodicBackground(tuple(a0), tuple(b0))


def random_perturbation(bg, rng, p, odd=None, scale=0.5):
    """Perturbation supported on ``[0, p]`` with ``v0 != 0``.

    ``odd`` selects ``nu = 2p - 1`` (``u_p = 0``); by default it is a coin flip.
    """
    odd = bool(rng.integers(2)) if odd is None else odd
    u = np.array([rng.uniform(-scale, scale) * bg.a(n) for n in range(p + 1)])
    v = rng.uniform(-1.0, 1.0, p + 1)
    v[0] = np.sign(v[0] or 1.0) * max(abs(v[0]), 0.2)
    if odd:
        u[p] = 0.0
        v[p] = np.sign(v[p] or 1.0) * max(abs(v[p]), 0.2)
    else:
        u[p] = np.sign(u[p] or 1.0) * max(abs(u[p]), 0.1 * bg.a(p))
    return Perturbation(tuple(u), tuple(v))


def near_edge(bg, pert, guard=EDGE_GUARD):
    """True when a zero of ``F`` sits within ``guard`` of a band edge without being on it.

    Such a state is bound or virtual depending on the clustering tolerance,
    so the randomized suites redraw it.
    """
    f = perturbed_polys(bg, pert).f_poly
    roots = np.roots(f.coeffs.real[::-1])
    for e in bg.bands.edges:
        d = np.abs(roots - e)
        scale = max(1.0, abs(e))
        if np.any((d < guard * scale) & (abs(f(e)) > 1e-12 * scale)):
            return True
    return False


def random_pair(rng, qs=(2, 3), ps=(1, 2, 3), max_tries=100):
    for _ in range(max_tries):
        q = int(rng.choice(qs))
        p = int(rng.choice(ps))
        bg = random_background(rng, q)
        pert = random_perturbation(bg, rng, p)
        if not near_edge(bg, pert):
            return bg, pert
    raise RuntimeError(f"no draw clear of the band edges in {max_tries} tries")
