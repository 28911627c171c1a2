"""Physical parameters of the linearized compressible viscoelastic model.

The model couples a density perturbation phi, a velocity field w and a
deformation-gradient perturbation G through the block operator

    A u = ( div w,
            -nu*Lap(w) - nu_tilde*grad(div w) + gamma^2*grad(phi) - beta^2*div(G),
            -grad(w) )

with shear viscosity nu, second viscosity nu_prime (nu_tilde = nu + nu_prime),
sound speed gamma and elastic shear speed beta.  beta = 0 recovers the
linearized compressible Navier-Stokes equations.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalParams:
    nu: float
    nu_prime: float = 0.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if 2.0 * self.nu + 3.0 * self.nu_prime < 0:
            raise ValueError("need 2*nu + 3*nu_prime >= 0")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def nu_tilde(self):
        return self.nu + self.nu_prime

    @property
    def visc_sum(self):
        """nu + nu_tilde = 2*nu + nu_prime, the compressible viscosity."""
        return self.nu + self.nu_tilde

    @property
    def beta2(self):
        return self.beta * self.beta

    @property
    def gamma2(self):
        return self.gamma * self.gamma

    @property
    def R0(self):
        """Radius of the spectral exclusion disk touching the origin.

        R0 = max(beta^2/nu, (beta^2+gamma^2)/(nu+nu_tilde)); all per-mode
        dispersion roots lie on or left of the circle |lam + R0| = R0.
        """
        return max(self.beta2 / self.nu,
                   (self.beta2 + self.gamma2) / self.visc_sum)

    @property
    def wave_speed(self):
        """Fast (compressive) propagation speed sqrt(beta^2 + gamma^2)."""
        return (self.beta2 + self.gamma2) ** 0.5

    def kappa(self, l, lam):
        """kappa_1(lam) = nu*lam + beta^2, kappa_2(lam) = (nu+nu_tilde)*lam + beta^2 + gamma^2."""
        if l == 1:
            return self.nu * lam + self.beta2
        if l == 2:
            return self.visc_sum * lam + self.beta2 + self.gamma2
        raise ValueError(f"family index must be 1 or 2, got {l}")
