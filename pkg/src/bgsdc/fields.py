"""Analytic electromagnetic field models.

All models work in Cartesian coordinates; the tokamak-like equilibrium
converts to cylindrical coordinates internally. Evaluators are pure and
stateless, so they can be shared freely between integrators.
"""

import math
from dataclasses import dataclass

import numpy as np

_DEGENERATE_R = 1e-12


class DegeneratePointError(ValueError):
    """Raised when a field is evaluated on the cylindrical axis R ~ 0."""


class FieldModel:
    """Evaluator contract: B_at / E_at / potential_at for a point in space."""

    def B_at(self, point):
        raise NotImplementedError

    def E_at(self, point):
        raise NotImplementedError

    def potential_at(self, point):
        return 0.0

    def B_many(self, points):
        """B at each row of an (n, 3) array; subclasses vectorize."""
        return np.array([self.B_at(p) for p in np.asarray(points, float)])


class UniformField(FieldModel):
    """Spatially constant magnetic field with zero electric field."""

    def __init__(self, B_const):
        self.B_const = np.asarray(B_const, dtype=float)

    def B_at(self, point):
        return self.B_const.copy()

    def E_at(self, point):
        return np.zeros(3)

    def B_many(self, points):
        return np.tile(self.B_const, (np.asarray(points).shape[0], 1))


@dataclass(frozen=True)
class MirrorParams:
    """Magnetic mirror trap model: B0 = omega_B / alpha, coils at z = +-z0."""

    B0: float
    z0: float

    @classmethod
    def from_frequencies(cls, omega_B, alpha, z0):
        return cls(B0=omega_B / alpha, z0=z0)

    def __post_init__(self):
        if self.z0 <= 0:
            raise ValueError("z0 must be positive")


def mirror_B(point, params, bz_sign=+1.0):
    """Mirror trap field; divergence-free with the plus sign in B_z.

    bz_sign is a test hook reproducing the sign typo of an earlier
    write-up of this field; production use keeps the default.
    """
    x, y, z = point
    B0, z0 = params.B0, params.z0
    w = z / (z0 * z0)
    return np.array(
        [-B0 * x * w, -B0 * y * w, B0 * (1.0 + bz_sign * z * z / (z0 * z0))]
    )


class MirrorField(FieldModel):
    def __init__(self, params, bz_sign=+1.0):
        self.params = params
        self._bz_sign = bz_sign

    def B_at(self, point):
        return mirror_B(point, self.params, self._bz_sign)

    def E_at(self, point):
        return np.zeros(3)

    def B_many(self, points):
        pts = np.asarray(points, dtype=float)
        B0, z0 = self.params.B0, self.params.z0
        w = pts[:, 2] / (z0 * z0)
        out = np.empty_like(pts)
        out[:, 0] = -B0 * pts[:, 0] * w
        out[:, 1] = -B0 * pts[:, 1] * w
        out[:, 2] = B0 * (1.0 + self._bz_sign * pts[:, 2] * pts[:, 2]
                          / (z0 * z0))
        return out


@dataclass(frozen=True)
class SolovevParams:
    """Constants reconstructing a JET-like equilibrium plus radial E-field."""

    sigma: float
    epsilon: float
    kappa: float
    psi: float
    r_ma: float
    r_mi: float
    z_m: float
    z0_len: float
    Bphi0: float
    E0: float
    r_a: float
    R0: float
    Z0: float
    alpha: float

    def __post_init__(self):
        if not (self.r_ma > self.r_mi > 0):
            raise ValueError("need r_ma > r_mi > 0")
        if self.r_a <= 0:
            raise ValueError("r_a must be positive")


# Parameter set modelling the JET equilibrium, with the weak radial
# electric field and the passing / trapped initial conditions used by
# the benchmark harness.
JET_PARAMS = SolovevParams(
    sigma=1.46387369075,
    epsilon=0.22615668214,
    kappa=1.43320389205,
    psi=1.13333149039,
    r_ma=3.83120489000,
    r_mi=1.96085203000,
    z_m=0.30397316800,
    z0_len=1.0,
    Bphi0=-9.96056843000,
    E0=50000.0,
    r_a=1.5,
    R0=3.00045800,
    Z0=0.30397317,
    alpha=47918787.60368,
)

JET_PASSING_X0 = np.array([2.1889641172761, 0.0, 0.8635434778595])
JET_PASSING_V0 = np.array([2269604.3143406, 292264.06108651, -338526.06660893])
JET_TRAPPED_X0 = np.array([3.0852639552352, 0.0, -0.0732997600262])
JET_TRAPPED_V0 = np.array([814158.31065935, 931354.18390575, 1793580.5493877])


def _cylindrical(point):
    x, y, z = point
    R = math.hypot(x, y)
    if R < _DEGENERATE_R:
        raise DegeneratePointError("field evaluated at R = %.3e" % R)
    return R, z, x / R, y / R


def solovev_B(point, params):
    """Equilibrium magnetic field at a Cartesian point, in Tesla."""
    p = params
    R, Z, cphi, sphi = _cylindrical(point)
    xt = 2.0 * (R - p.r_mi) / (p.r_ma - p.r_mi) - 1.0
    yt = (Z - p.z_m) / p.z0_len
    eps = p.epsilon
    B_R = (
        -(2.0 * yt / p.sigma ** 2)
        * (1.0 - 0.25 * eps ** 2)
        * (1.0 + p.kappa * eps * xt * (2.0 + eps * xt))
        / (p.psi * R)
    )
    B_Z = (
        4.0
        * (1.0 + eps * xt)
        * (xt - 0.5 * eps * (1.0 - xt * xt) + (1.0 - 0.25 * eps ** 2) * yt * yt * p.kappa * eps / p.sigma ** 2)
        / (p.psi * R * (p.r_ma - p.r_mi) / p.z0_len)
    )
    B_phi = p.Bphi0 / R
    return np.array(
        [B_R * cphi - B_phi * sphi, B_R * sphi + B_phi * cphi, B_Z]
    )


def solovev_E(point, params):
    """Radial electric field E_r = E0 * r^2 / r_a^2 in the poloidal plane."""
    p = params
    R, Z, cphi, sphi = _cylindrical(point)
    dR = R - p.R0
    dZ = Z - p.Z0
    r = math.hypot(dR, dZ)
    if r < _DEGENERATE_R:
        return np.zeros(3)
    mag = p.E0 * r / (p.r_a * p.r_a)  # E0 * r^2 / r_a^2 / r
    E_R = mag * dR
    E_Z = mag * dZ
    return np.array([E_R * cphi, E_R * sphi, E_Z])


def solovev_potential(point, params):
    """Electrostatic potential Phi(r) = -E0 r^3 / (3 r_a^2), in Volts."""
    p = params
    R, Z, _, _ = _cylindrical(point)
    r = math.hypot(R - p.R0, Z - p.Z0)
    return -p.E0 * r ** 3 / (3.0 * p.r_a * p.r_a)


class SolovevField(FieldModel):
    def __init__(self, params=JET_PARAMS):
        self.params = params

    def B_at(self, point):
        return solovev_B(point, self.params)

    def E_at(self, point):
        return solovev_E(point, self.params)

    def potential_at(self, point):
        return solovev_potential(point, self.params)
