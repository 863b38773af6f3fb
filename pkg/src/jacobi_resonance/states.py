"""States: zeros of ``w_hat`` on the two-sheeted surface.

Every root of the real state polynomial ``F = w_hat(sheet 1) w_hat(sheet 2)``
is lifted to the sheet on which ``w_hat`` vanishes. Edge roots are virtual
states, sheet-1 roots are bound states, sheet-2 roots are resonances and
real sheet-2 roots inside a gap are antibound states.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import CLUSTER_RADIUS, poly_roots
from .background import SurfacePoint, zeta_values
from .errors import LawViolation, LiftAmbiguous
from .perturbed import perturbed_polys

LIFT_TOL = 1e-6
KINDS = ("bound", "antibound", "resonance", "virtual")


@dataclass(frozen=True)
class State:
    location: SurfacePoint
    kind: str
    multiplicity: int = 1

    @property
    def lam(self):
        return self.location.lam

    def to_json(self):
        return {"lambda": [self.lam.real, self.lam.imag], "sheet": self.location.sheet,
                "kind": self.kind, "multiplicity": self.multiplicity}

    @classmethod
    def from_json(cls, data):
        lam = complex(*data["lambda"])
        return cls(SurfacePoint(lam, int(data["sheet"])), data["kind"], int(data.get("multiplicity", 1)))


@dataclass(frozen=True)
class StateCatalog:
    states: tuple
    kappa: int
    excluded: tuple = field(default=())

    def of_kind(self, kind):
        return [s for s in self.states if s.kind == kind]

    def bound_states(self):
        return sorted(s.lam.real for s in self.of_kind("bound"))

    def total_multiplicity(self):
        return sum(s.multiplicity for s in self.states)

    def to_json(self):
        return {"kappa": self.kappa, "states": [s.to_json() for s in self.states],
                "excluded": [[z.real, z.imag] for z in self.excluded]}


def _is_real(lam, radius=CLUSTER_RADIUS):
    return abs(lam.imag) <= radius * max(1.0, abs(lam))


def classify_state(bg, st, radius=CLUSTER_RADIUS):
    """Kind of a located state; edges take precedence over sheets."""
    lam = st.location.lam
    bs = bg.bands
    if _is_real(lam, radius):
        k = bs.edge_index(lam.real, radius)
        if k is not None:
            return "virtual"
        where, _ = bs.locate(lam.real)
        if st.location.sheet == 1:
            if where != "gap":
                raise LawViolation("no-band-states", f"sheet-1 state at {lam} lies on a band")
            return "bound"
        return "antibound" if where == "gap" else "resonance"
    if st.location.sheet == 1:
        raise LawViolation("self-adjointness", f"non-real sheet-1 state at {lam}")
    return "resonance"


def _closed_gap_point(bg, lam, radius):
    bs = bg.bands
    for j in range(1, bg.q):
        if bs.closed[j - 1] and abs(lam - bs.alpha[j - 1]) <= radius * max(1.0, abs(lam)):
            return True
    return False


def _polish_gap_root(bg, pair, x, sheet, steps=3):
    """Newton steps on ``w_hat`` itself; roots of ``F`` near an edge are less accurate."""
    where, j = bg.bands.locate(x)
    if where != "gap":
        return complex(x, 0.0)
    lo, hi = bg.bands.gap(j)

    def w(t):
        lam = np.array([complex(t)])
        return pair.w_hat(lam, zeta_values(bg, lam, sheet))[0].real

    for _ in range(steps):
        fx = w(x)
        d = pair.w_hat_deriv(np.array([complex(x)]), sheet)[0].real
        if fx == 0 or d == 0:
            break
        nx = x - fx / d
        if not lo < nx < hi or abs(w(nx)) >= abs(fx):
            break
        x = nx
    return complex(x, 0.0)


def _lift_residual(bg, pair, lam, sheet):
    z = zeta_values(bg, np.array([lam]), sheet)
    w = pair.w_hat(np.array([lam]), z)[0]
    scale = abs((z[0] - 1.0 / z[0]) * pair.one_plus_a(lam)) + abs(pair.j(lam)) + 1e-300
    return abs(w) / scale


def states_from_pair(bg, pair, f_poly, kappa, cluster_radius=CLUSTER_RADIUS, lift_tol=LIFT_TOL):
    """Catalog of the zeros of ``w_hat`` given its polynomial carriers."""
    bs = bg.bands
    states, excluded = [], []
    for root in poly_roots(f_poly.real(), cluster_radius):
        lam = root.value
        if _is_real(lam, cluster_radius):
            lam = complex(lam.real, 0.0)
            if _closed_gap_point(bg, lam.real, cluster_radius):
                excluded.append(lam)
                continue
            if bs.edge_index(lam.real, cluster_radius) is not None:
                e = bs.edges[bs.edge_index(lam.real, cluster_radius)]
                states.append(State(SurfacePoint(complex(e, 0.0), 1), "virtual", root.multiplicity))
                continue
        simple_real = lam.imag == 0 and root.multiplicity == 1
        res = [_lift_residual(bg, pair, lam, sheet) for sheet in (1, 2)]
        hits = [s for s, r in zip((1, 2), res) if r < lift_tol]
        cand = [lam, lam]
        if not hits and simple_real:
            # gap roots of F near an edge are less accurate than w_hat allows
            cand = [_polish_gap_root(bg, pair, lam.real, sheet) for sheet in (1, 2)]
            res = [_lift_residual(bg, pair, at, sheet) for at, sheet in zip(cand, (1, 2))]
            best = int(np.argmin(res))
            if res[best] < lift_tol and res[1 - best] > 1e3 * res[best]:
                hits = [best + 1]
        if len(hits) != 1:
            raise LiftAmbiguous(f"root {lam} lifts to sheets {hits}; residuals {res[0]:.3g}, {res[1]:.3g}")
        lam = cand[hits[0] - 1]
        if simple_real:
            lam = _polish_gap_root(bg, pair, lam.real, hits[0])
        loc = SurfacePoint(lam, hits[0])
        kind = classify_state(bg, State(loc, "resonance"), cluster_radius)
        states.append(State(loc, kind, root.multiplicity))
    states.sort(key=lambda s: (s.location.sheet, s.lam.real, s.lam.imag))
    return StateCatalog(tuple(states), kappa, tuple(excluded))


def locate_states(bg, pert, cluster_radius=CLUSTER_RADIUS, lift_tol=LIFT_TOL):
    fam = perturbed_polys(bg, pert)
    kappa = pert.nu + 2 * bg.q - 1
    return states_from_pair(bg, fam.pair, fam.f_poly, kappa, cluster_radius, lift_tol)


def validate_state_laws(catalog, bg, f_poly=None, grid=200, radius=CLUSTER_RADIUS, strict=True):
    """Check the structural laws of the state set.

    Returns ``{"pass": bool, "laws": {name: {"pass": bool, "detail": str}}}``.
    With ``strict`` the first failing law raises LawViolation.
    """
    bs = bg.bands
    laws = {}

    total = catalog.total_multiplicity() + len(catalog.excluded)
    laws["total-count"] = (total == catalog.kappa, f"{total} states, expected {catalog.kappa}")

    odd = []
    for j in range(1, bg.q):
        if bs.closed[j - 1]:
            continue
        lo, hi = bs.gap(j)
        count = sum(s.multiplicity for s in catalog.states
                    if _is_real(s.lam, radius) and lo - radius <= s.lam.real <= hi + radius)
        if count % 2:
            odd.append((j, count))
    laws["even-count"] = (not odd, f"odd counts (gap, count): {odd}" if odd else "all gaps even")

    clash = []
    bound = [s for s in catalog.states if s.kind == "bound"]
    anti = [s for s in catalog.states if s.kind == "antibound"]
    for b in bound:
        for a in anti:
            if abs(a.lam - b.lam) <= radius * max(1.0, abs(b.lam)):
                clash.append(b.lam.real)
    laws["exclusion"] = (not clash, f"bound and antibound coincide at {clash}" if clash else "none")

    multiple = [(s.kind, s.lam) for s in catalog.states if s.kind in ("bound", "virtual") and s.multiplicity != 1]
    laws["simplicity"] = (not multiple, f"non-simple: {multiple}" if multiple else "all simple")

    if f_poly is not None:
        worst = np.inf
        t = (np.arange(grid) + 0.5) / grid
        for j in range(1, bg.q + 1):
            lo, hi = bs.band(j)
            x = lo + (hi - lo) * t
            keep = np.array([bs.edge_index(v, 1e-6) is None for v in x])
            if keep.any():
                worst = min(worst, float(np.min(f_poly(x[keep]).real)))
        laws["positive-on-bands"] = (worst > 0, f"minimum of F on band grid {worst:.6g}")

    report = {"pass": all(ok for ok, _ in laws.values()),
              "laws": {k: {"pass": bool(ok), "detail": d} for k, (ok, d) in laws.items()}}
    if strict and not report["pass"]:
        name = next(k for k, (ok, _) in laws.items() if not ok)
        raise LawViolation(name, laws[name][1])
    return report
