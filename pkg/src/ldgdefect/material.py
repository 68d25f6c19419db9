"""Material parameters and the Landau-de Gennes bulk potential.

    f_b(Q) = -(a2/2) tr(Q^2) - (b2/3) tr(Q^3) + (c2/4) tr(Q^2)^2 + C

with C chosen so that min f_b = 0, attained on the uniaxial manifold
N = {s_plus (n (x) n - Id/3)}. In the Euler-Lagrange operator, tr(Q)^2 is
read as tr(Q^2).
"""

from dataclasses import dataclass, field

import numpy as np

from . import qtensor as qt


def _s_plus(a2, b2, c2):
    return (b2 + np.sqrt(b2 * b2 + 24.0 * a2 * c2)) / (4.0 * c2)


def uniaxial_bulk(s, a2, b2, c2):
    """f_b without the offset on uniaxial tensors with scalar order s."""
    s = np.asarray(s, dtype=float)
    return -(a2 / 3.0) * s**2 - (2.0 * b2 / 27.0) * s**3 + (c2 / 9.0) * s**4


@dataclass(frozen=True)
class MaterialParams:
    a2: float = 1.0
    b2: float = 1.0
    c2: float = 1.0
    eps: float = 0.1
    s_plus: float = field(init=False)
    c_offset: float = field(init=False)

    def __post_init__(self):
        for name in ("a2", "b2", "c2", "eps"):
            v = getattr(self, name)
            # b2 = 0 is allowed: the potential stays well posed without the cubic term
            if not (np.isfinite(v) and (v > 0 or (name == "b2" and v == 0))):
                raise ValueError(f"{name} must be positive, got {v!r}")
        s = float(_s_plus(self.a2, self.b2, self.c2))
        object.__setattr__(self, "s_plus", s)
        object.__setattr__(
            self, "c_offset", -float(uniaxial_bulk(s, self.a2, self.b2, self.c2))
        )

    def with_eps(self, eps):
        return MaterialParams(self.a2, self.b2, self.c2, eps)

    def as_dict(self):
        return {
            "a2": self.a2,
            "b2": self.b2,
            "c2": self.c2,
            "eps": self.eps,
            "s_plus": self.s_plus,
            "c_offset": self.c_offset,
        }


def derive_params(a2, b2, c2, eps):
    return MaterialParams(float(a2), float(b2), float(c2), float(eps))


def bulk_energy(q, p):
    q = np.asarray(q, dtype=float)
    t2 = qt.tr2(q)
    t3 = qt.tr3(q)
    return -0.5 * p.a2 * t2 - p.b2 / 3.0 * t3 + 0.25 * p.c2 * t2 * t2 + p.c_offset


def bulk_gradient(q, p):
    """Gradient of f_b in the 5-coefficient coordinates.

    Equals -a2 Q - b2 (Q^2 - tr2 Id/3) + c2 tr2 Q; zero on N and at Q = 0.
    """
    q = np.asarray(q, dtype=float)
    t2 = qt.tr2(q)[..., None]
    return (-p.a2 + p.c2 * t2) * q - p.b2 * qt.square_traceless(q)
