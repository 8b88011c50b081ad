"""
Vehicle Parameters
Airframe constants, the sinusoidal lift/drag regression fit, and the Omega^2 rotor model.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AeroFit:
    """
    Sinusoidal regression fit of the wing lift and fuselage drag coefficients.

    C_L(alpha_e) = (a4*alpha_e + a3)*exp(-a2*alpha_e^2) + a1*sin(2*alpha_e) + a0
    C_D(alpha)   = b1*cos(2*alpha) + b0
    """
    a0: float
    a1: float
    a2: float
    a3: float
    a4: float
    b0: float
    b1: float

    def __post_init__(self):
        values = np.array([self.a0, self.a1, self.a2, self.a3, self.a4, self.b0, self.b1])
        if not np.all(np.isfinite(values)):
            raise ValueError("AeroFit coefficients must be finite")

        alpha = np.linspace(-np.pi / 2, np.pi / 2, 721)
        c_d = self.b1 * np.cos(2 * alpha) + self.b0
        if np.min(c_d) < -1e-12:
            raise ValueError(
                f"AeroFit drag coefficient goes negative (min C_D = {np.min(c_d):.4f}) "
                f"on [-pi/2, pi/2]"
            )

    @classmethod
    def ideal(cls) -> 'AeroFit':
        """Fit used by the planner for the optimal feedforward."""
        return cls(a0=0.37, a1=0.69, a2=12.35, a3=0.07, a4=5.59, b0=1.07, b1=-1.05)

    @classmethod
    def perturbed(cls) -> 'AeroFit':
        """Less accurate fit used to generate the perturbed feedforward."""
        return cls(a0=0.47, a1=0.73, a2=12.35, a3=0.08, a4=3.18, b0=1.07, b1=-1.07)

    @classmethod
    def zero(cls) -> 'AeroFit':
        """All-zero fit (no lift, no drag)."""
        return cls(a0=0.0, a1=0.0, a2=0.0, a3=0.0, a4=0.0, b0=0.0, b1=0.0)

    def as_dict(self) -> dict:
        return {
            'a0': self.a0, 'a1': self.a1, 'a2': self.a2, 'a3': self.a3, 'a4': self.a4,
            'b0': self.b0, 'b1': self.b1,
        }


@dataclass(frozen=True)
class VehicleParams:
    """
    Constants of one quadrotor-biplane airframe (SI units, body y-axis along the nose).

    Attributes:
        m: Mass (kg)
        Ixx, Iyy, Izz: Principal inertias (kg*m^2)
        R: Rotor radius (m)
        C_T, C_Q: Hover thrust and torque coefficients
        d_L, d_N: Rotor moment arms for the body x and z moments (m)
        S_w, S_f, S_y: Wing, longitudinal fuselage and lateral fuselage areas (m^2)
        r_AC: Center of mass to aerodynamic center (m, body frame)
        rho: Air density (kg/m^3)
        g: Gravitational acceleration (m/s^2)
        aero_fit: Lift/drag regression fit
        T_max: Total thrust ceiling (N)
        side_force_slope: dC_Y/dalpha of the lateral force fit (1/rad)
    """
    m: float
    Ixx: float
    Iyy: float
    Izz: float
    R: float
    C_T: float
    C_Q: float
    d_L: float
    d_N: float
    S_w: float
    S_f: float
    S_y: float
    r_AC: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    rho: float = 1.225
    g: float = 9.81
    aero_fit: AeroFit = field(default_factory=AeroFit.ideal)
    T_max: float = 200.0
    side_force_slope: float = 0.0
    name: str = "vehicle"

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("Vehicle mass must be positive")
        if min(self.Ixx, self.Iyy, self.Izz) <= 0:
            raise ValueError("Principal inertias must be positive")
        if self.R <= 0:
            raise ValueError("Rotor radius must be positive")
        if self.C_T <= 0 or self.C_Q <= 0:
            raise ValueError("Rotor thrust and torque coefficients must be positive")
        if min(self.S_w, self.S_f, self.S_y) < 0:
            raise ValueError("Reference areas must be non-negative")
        if self.rho <= 0:
            raise ValueError("Air density must be positive")
        if self.T_max <= 0:
            raise ValueError("T_max must be positive")
        if len(self.r_AC) != 3:
            raise ValueError("r_AC must have three components")
        object.__setattr__(self, 'r_AC', tuple(float(c) for c in self.r_AC))

    @classmethod
    def crc20_placeholder(cls) -> 'VehicleParams':
        """
        Placeholder CRC-20 airframe.

        The mass matches the reference stability numbers; every other
        constant is a plausible-scale placeholder.
        """
        return cls(
            m=9.07, Ixx=0.35, Iyy=0.45, Izz=0.55,
            R=0.254, C_T=0.01, C_Q=0.001,
            d_L=0.3, d_N=0.25,
            S_w=0.36, S_f=0.36, S_y=0.2,
            r_AC=(0.0, 0.02, 0.0),
            name="crc20-placeholder",
        )

    # ==================== DERIVED QUANTITIES ====================

    @property
    def k_T(self) -> float:
        """Rotor thrust constant rho*pi*R^4*C_T (N*s^2)."""
        return self.rho * np.pi * self.R ** 4 * self.C_T

    @property
    def k_Q(self) -> float:
        """Rotor torque constant rho*pi*R^5*C_Q (N*m*s^2)."""
        return self.rho * np.pi * self.R ** 5 * self.C_Q

    @property
    def hover_thrust(self) -> float:
        return self.m * self.g

    @property
    def omega_max(self) -> float:
        """Rotor speed that produces T_max when shared by the four rotors."""
        return float(np.sqrt(self.T_max / (4.0 * self.k_T)))

    @property
    def inertia(self) -> np.ndarray:
        return np.diag([self.Ixx, self.Iyy, self.Izz])

    @property
    def r_ac(self) -> np.ndarray:
        return np.asarray(self.r_AC, dtype=float)

    @property
    def has_aero(self) -> bool:
        return max(self.S_w, self.S_f, self.S_y) > 0

    @property
    def mixing_matrix(self) -> np.ndarray:
        """
        Omega^2 mixing matrix mapping squared rotor speeds to [T, Lm, Mm, Nm].

        Rows: total thrust, moment about body x, moment about body y (nose,
        rotor reaction torque), moment about body z.
        """
        kT, kQ, dL, dN = self.k_T, self.k_Q, self.d_L, self.d_N
        return np.array([
            [kT, kT, kT, kT],
            [-dL * kT, -dL * kT, dL * kT, dL * kT],
            [kQ, -kQ, kQ, -kQ],
            [-dN * kT, dN * kT, dN * kT, -dN * kT],
        ])

    # ==================== VARIANTS ====================

    def with_aero_fit(self, fit: AeroFit) -> 'VehicleParams':
        return replace(self, aero_fit=fit)

    def aero_free(self) -> 'VehicleParams':
        """Same airframe with every aerodynamic reference area set to zero."""
        return replace(self, S_w=0.0, S_f=0.0, S_y=0.0, name=f"{self.name}-aero-free")

    def with_overrides(self, **kwargs) -> 'VehicleParams':
        return replace(self, **kwargs)

    def __repr__(self) -> str:
        return (
            f"VehicleParams({self.name}, m={self.m:.2f}kg, R={self.R:.3f}m, "
            f"T_max={self.T_max:.1f}N)"
        )


@dataclass(frozen=True)
class RotorCommand:
    """Four rotor speeds (rad/s)."""
    Omega: Tuple[float, float, float, float]
    saturated: Tuple[bool, bool, bool, bool] = (False, False, False, False)

    def __post_init__(self):
        omega = np.asarray(self.Omega, dtype=float)
        if omega.shape != (4,):
            raise ValueError("RotorCommand needs exactly four rotor speeds")
        if np.any(omega < 0):
            raise ValueError("Rotor speeds must be non-negative")
        object.__setattr__(self, 'Omega', tuple(float(w) for w in omega))
        object.__setattr__(self, 'saturated', tuple(bool(s) for s in self.saturated))

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.Omega)

    @property
    def saturation_count(self) -> int:
        return int(sum(self.saturated))

    @classmethod
    def hover(cls, params: VehicleParams) -> 'RotorCommand':
        omega = np.sqrt(params.hover_thrust / (4.0 * params.k_T))
        return cls(Omega=(omega, omega, omega, omega))


def rotor_forward_map(
    rotor_speeds: RotorCommand, params: VehicleParams
) -> Tuple[float, np.ndarray]:
    """
    Total thrust and rotor moments produced by the given rotor speeds.

    Args:
        rotor_speeds: Rotor speeds
        params: Vehicle parameters (hover C_T, C_Q)

    Returns:
        Tuple of (T, [Lm, Mm, Nm])
    """
    wrench = params.mixing_matrix @ (rotor_speeds.omega ** 2)
    return float(wrench[0]), wrench[1:]


def vehicle_summary(params: VehicleParams, fit: Optional[AeroFit] = None) -> dict:
    """Flat dictionary of the airframe constants and derived rotor quantities."""
    fit = fit or params.aero_fit
    return {
        'name': params.name,
        'm': params.m,
        'k_T': params.k_T,
        'k_Q': params.k_Q,
        'omega_max': params.omega_max,
        'hover_thrust': params.hover_thrust,
        **{f'fit_{k}': v for k, v in fit.as_dict().items()},
    }
