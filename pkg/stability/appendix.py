"""
Proof Identity Checks
Randomized numerical checks of the algebra used in the convergence proofs:
the completing-the-square identity, the x = |P_e| + c |Pdot_e| substitution
and the sign of the resulting bound on dV/dt at the set thresholds.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-12
IMPLICATION_TOLERANCE = 1e-10


def completing_square_residual(p, v, c2) -> np.ndarray:
    """
    Relative residual of p^2 - c2 p v = (p - c2 v / 2)^2 - (c2^2 / 4) v^2.
    """
    p, v, c2 = (np.asarray(a, dtype=float) for a in (p, v, c2))
    lhs = p ** 2 - c2 * p * v
    rhs = (p - 0.5 * c2 * v) ** 2 - 0.25 * c2 ** 2 * v ** 2
    scale = 1.0 + p ** 2 + np.abs(c2 * p * v) + (0.5 * c2 * v) ** 2
    return np.abs(lhs - rhs) / scale


def substitution_residual(p, v, alpha0, m, c, epsilon) -> np.ndarray:
    """
    Relative residual of the regrouping
    (alpha0/m)(eps p + v) = (alpha0/m)(eps x + (eps c + 1) v - eps c v),  x = p + c v.
    """
    p, v = np.asarray(p, dtype=float), np.asarray(v, dtype=float)
    x = p + c * v
    lhs = alpha0 / m * (epsilon * p + v)
    rhs = alpha0 / m * (epsilon * x + (epsilon * c + 1.0) * v - epsilon * c * v)
    scale = 1.0 + np.abs(alpha0 / m) * (np.abs(epsilon * x) + np.abs(epsilon * c + 1.0) * v + np.abs(epsilon * c * v))
    return np.abs(lhs - rhs) / scale


def decrease_bound_rhs(x, v, alpha0, alpha1, m, kp, kd, epsilon: float = 0.0) -> np.ndarray:
    """
    Upper bound on dV/dt in terms of x = |P_e| + c |Pdot_e| and v = |Pdot_e|:

        eps [(alpha0/m) x - kp x^2] + [(alpha0 (eps c + 1)/m) v - (kd - alpha1/m) v^2],
        c = alpha1 / (2 m kp)
    """
    x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
    c = alpha1 / (2.0 * m * kp)
    return (
        epsilon * (alpha0 / m * x - kp * x ** 2)
        + (alpha0 * (epsilon * c + 1.0) / m * v - (kd - alpha1 / m) * v ** 2)
    )


@dataclass
class AppendixCheck:
    """
    Outcome of the randomized identity checks.

    Attributes:
        samples: Number of random draws per check
        identity_residual: Max relative residual of the completing-the-square identity
        substitution_residual: Max relative residual of the x substitution
        implication_violations: Draws above both thresholds with a positive bound
        implication_max: Largest bound value (scaled) among those draws
        threshold_rhs: Bound evaluated exactly at the thresholds (scaled)
        chain_violations: Draws where |P_e| falls below alpha0/(m kp) - c * alpha0/(m kd - alpha1)
            despite x >= alpha0/(m kp); diagnostic only
        passed: Identities within 1e-12 and the implication within 1e-10
    """
    samples: int
    identity_residual: float
    substitution_residual: float
    implication_violations: int
    implication_max: float
    threshold_rhs: float
    chain_violations: int
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def appendix_identities_check(
    samples: int = 10_000,
    seed: Optional[int] = 0,
    epsilon: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> AppendixCheck:
    """
    Check the proof algebra on random nonnegative samples.

    Args:
        samples: Draws per check
        seed: Seed for the default generator (ignored when rng is given)
        epsilon: Cross-term weight in the bound; the proof's limit is 0
        rng: Optional generator

    Returns:
        AppendixCheck
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = rng or np.random.default_rng(seed)

    p = rng.uniform(0.0, 10.0, samples)
    v = rng.uniform(0.0, 10.0, samples)
    c2 = rng.uniform(0.0, 5.0, samples)
    identity = float(np.max(completing_square_residual(p, v, c2)))

    m = rng.uniform(1.0, 20.0, samples)
    alpha0 = rng.uniform(0.0, 100.0, samples)
    alpha1 = rng.uniform(0.0, 20.0, samples)
    kp = rng.uniform(0.1, 25.0, samples)
    kd = alpha1 / m + rng.uniform(0.05, 10.0, samples)
    c = alpha1 / (2.0 * m * kp)
    substitution = float(np.max(substitution_residual(p, v, alpha0, m, c, epsilon)))

    x_thr = alpha0 / (m * kp)
    v_thr = alpha0 / (m * kd - alpha1)
    x = x_thr + rng.exponential(2.0, samples)
    vv = v_thr + rng.exponential(2.0, samples)
    # Half the draws sit exactly on the thresholds
    on_boundary = rng.random(samples) < 0.5
    x = np.where(on_boundary, x_thr, x)
    vv = np.where(on_boundary, v_thr, vv)

    rhs = decrease_bound_rhs(x, vv, alpha0, alpha1, m, kp, kd, epsilon)
    scale = 1.0 + alpha0 / m * (x + vv) + kd * vv ** 2 + epsilon * kp * x ** 2
    scaled = rhs / scale
    violations = int(np.sum(scaled > IMPLICATION_TOLERANCE))
    threshold_rhs = float(np.max(scaled[on_boundary], initial=-np.inf))

    p_from_x = x - c * vv
    chain = int(np.sum(p_from_x < x_thr - c * v_thr - IMPLICATION_TOLERANCE))

    passed = identity < IDENTITY_TOLERANCE and substitution < IDENTITY_TOLERANCE and violations == 0
    result = AppendixCheck(
        samples=samples,
        identity_residual=identity,
        substitution_residual=substitution,
        implication_violations=violations,
        implication_max=float(np.max(scaled)),
        threshold_rhs=threshold_rhs,
        chain_violations=chain,
        passed=passed,
    )
    logger.info(f"Proof identity check on {samples} samples: identity residual {identity:.2e}, "
                f"implication violations {violations}, chain diagnostic {chain}")
    return result
