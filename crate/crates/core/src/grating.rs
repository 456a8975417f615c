//! Physical configuration, derived wavenumbers and the per-order scalar
//! coefficients of the scattering equations.

use alloc::format;

use libm::{cos, sin, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::SchlomilchTable;
use crate::special::eval_pair;

/// Exact SI constants.
pub mod constants {
    /// Speed of light in vacuum (m/s).
    pub const C0: f64 = 299_792_458.0;
    /// Vacuum permeability, 4 pi 1e-7 (H/m).
    pub const MU0: f64 = 4.0 * core::f64::consts::PI * 1.0e-7;
    /// Vacuum permittivity, 1 / (mu0 c^2) (F/m).
    pub const EPS0: f64 = 1.0 / (MU0 * C0 * C0);
}

/// Which material parameter a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Medium {
    Permittivity,
    Permeability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingConfig {
    /// Cylinder radius `a` (m).
    pub radius: f64,
    /// Centre-to-centre spacing `d` (m).
    pub spacing: f64,
    pub eps_r: f64,
    pub mu_r: f64,
    /// Free-space wavenumber `k0` (rad/m).
    pub k0: f64,
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig {
            field,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

impl GratingConfig {
    pub fn validate(&self) -> Result<()> {
        positive("radius", self.radius)?;
        positive("spacing", self.spacing)?;
        positive("eps_r", self.eps_r)?;
        positive("mu_r", self.mu_r)?;
        positive("k0", self.k0)?;
        if self.spacing <= 2.0 * self.radius {
            return Err(Error::InvalidConfig {
                field: "spacing",
                reason: format!(
                    "cylinders overlap: spacing {} must exceed twice the radius {}",
                    self.spacing, self.radius
                ),
            });
        }
        Ok(())
    }

    pub fn relative(&self, medium: Medium) -> f64 {
        match medium {
            Medium::Permittivity => self.eps_r,
            Medium::Permeability => self.mu_r,
        }
    }
}

/// Obliquely incident, vertically polarized plane wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    /// Amplitude `E_0v` (V/m).
    pub e0v: f64,
    /// Obliquity angle from the cylinder axis, in `(0, pi/2]` (rad).
    pub theta_i: f64,
    /// In-plane incidence angle from the x-axis (rad); `psi_i = pi + phi_i`.
    pub phi_i: f64,
}

/// `|theta - pi/2|` below which the wave counts as normally incident on the axis.
const NORMAL_SNAP: f64 = 1.0 / (1u64 << 50) as f64;

impl IncidentWave {
    pub fn validate(&self) -> Result<()> {
        if !self.e0v.is_finite() {
            return Err(Error::InvalidConfig {
                field: "e0v",
                reason: format!("must be finite, got {}", self.e0v),
            });
        }
        let half_pi = core::f64::consts::FRAC_PI_2;
        if !(self.theta_i > 0.0 && self.theta_i <= half_pi + NORMAL_SNAP) {
            return Err(Error::InvalidConfig {
                field: "theta_i",
                reason: format!("must lie in (0, pi/2], got {}", self.theta_i),
            });
        }
        if !self.phi_i.is_finite() {
            return Err(Error::InvalidConfig {
                field: "phi_i",
                reason: format!("must be finite, got {}", self.phi_i),
            });
        }
        Ok(())
    }

    pub fn psi_i(&self) -> f64 {
        core::f64::consts::PI + self.phi_i
    }

    /// `sin psi_i = -sin phi_i`, exact zero at `phi_i = 0`.
    pub fn sin_psi(&self) -> f64 {
        -sin(self.phi_i)
    }

    pub fn cos_psi(&self) -> f64 {
        -cos(self.phi_i)
    }

    fn is_normal(&self) -> bool {
        (self.theta_i - core::f64::consts::FRAC_PI_2).abs() <= NORMAL_SNAP
    }

    /// `cos theta_i`, exactly zero at `theta_i = pi/2`.
    pub fn cos_theta(&self) -> f64 {
        if self.is_normal() {
            0.0
        } else {
            cos(self.theta_i)
        }
    }

    pub fn sin_theta(&self) -> f64 {
        if self.is_normal() {
            1.0
        } else {
            sin(self.theta_i)
        }
    }

    /// `e^{-i n psi_i} = (-1)^n e^{-i n phi_i}`.
    pub fn order_phase(&self, n: i32) -> Complex64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let arg = -(n as f64) * self.phi_i;
        Complex64::new(sign * cos(arg), sign * sin(arg))
    }

    /// The same wave with `psi_i -> -psi_i` (equivalently `phi_i -> -phi_i`).
    pub fn mirrored(&self) -> Self {
        Self {
            phi_i: -self.phi_i,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedWavenumbers {
    pub kr: f64,
    pub kz: f64,
    /// Interior transverse wavenumber `k0 sqrt(eps_r mu_r - cos^2 theta_i)`.
    pub k1: f64,
    /// `(mu_r eps_r - 1) cos theta_i / (mu_r eps_r - cos^2 theta_i)`.
    pub f: f64,
    pub omega: f64,
    /// Free-space impedance `sqrt(mu0 / eps0)` (ohm).
    pub xi0: f64,
    /// Free-space admittance `1 / xi0` (S).
    pub eta0: f64,
}

pub fn derive_wavenumbers(cfg: &GratingConfig, inc: &IncidentWave) -> Result<DerivedWavenumbers> {
    cfg.validate()?;
    inc.validate()?;
    let (s, c) = (inc.sin_theta(), inc.cos_theta());
    let eps_mu = cfg.eps_r * cfg.mu_r;
    let cos2 = c * c;
    // eps_mu - cos^2 written as (eps_mu - 1) + sin^2 so that k1 == kr when eps_mu == 1
    let interior = (eps_mu - 1.0) + s * s;
    if !(interior > 0.0) {
        return Err(Error::UnsupportedRegime { eps_mu, cos2 });
    }
    let xi0 = sqrt(constants::MU0 / constants::EPS0);
    Ok(DerivedWavenumbers {
        kr: cfg.k0 * s,
        kz: cfg.k0 * c,
        k1: cfg.k0 * sqrt(interior),
        f: (eps_mu - 1.0) * c / interior,
        omega: constants::C0 * cfg.k0,
        xi0,
        eta0: 1.0 / xi0,
    })
}

/// `E_n^i = sin theta_i E_0v e^{-i n psi_i}`.
pub fn incident_coefficient(n: i32, inc: &IncidentWave) -> Complex64 {
    inc.order_phase(n) * (inc.sin_theta() * inc.e0v)
}

/// Per-order coefficients of the scattering equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffSet {
    pub n: i32,
    pub a_eps: Complex64,
    pub a_mu: Complex64,
    pub b_eps: Complex64,
    pub b_mu: Complex64,
    /// `J_n(kr a) / H_n(kr a)`.
    pub c: Complex64,
    /// `(n kz / a) (1/k1^2 - 1/kr^2)`.
    pub k_n: f64,
    pub e_inc: Complex64,
}

impl CoeffSet {
    pub fn a(&self, medium: Medium) -> Complex64 {
        match medium {
            Medium::Permittivity => self.a_eps,
            Medium::Permeability => self.a_mu,
        }
    }

    pub fn b(&self, medium: Medium) -> Complex64 {
        match medium {
            Medium::Permittivity => self.b_eps,
            Medium::Permeability => self.b_mu,
        }
    }
}

/// Shared denominator `J_n(k1 a) H'_n(kr a) - zeta_r (kr/k1) H_n(kr a) J'_n(k1 a)`
/// and the numerator of `a_n`, for one medium.
pub(crate) struct MediumTerms {
    pub numerator: f64,
    pub denominator: Complex64,
}

pub(crate) fn medium_terms(
    n: i32,
    medium: Medium,
    zeta_r: f64,
    wn: &DerivedWavenumbers,
    outer: &crate::special::CylFnValue,
    inner: &crate::special::CylFnValue,
) -> Result<MediumTerms> {
    let ratio = zeta_r * wn.kr / wn.k1;
    let numerator = inner.j * outer.jp - ratio * outer.j * inner.jp;
    let left = outer.hankel_prime() * inner.j;
    let right = outer.hankel() * (ratio * inner.jp);
    let denominator = left - right;
    if denominator.norm() <= 8.0 * f64::EPSILON * (left.norm() + right.norm()) {
        return Err(Error::Resonance { order: n, medium });
    }
    Ok(MediumTerms {
        numerator,
        denominator,
    })
}

pub fn coeff_set(n: i32, cfg: &GratingConfig, inc: &IncidentWave, wn: &DerivedWavenumbers) -> Result<CoeffSet> {
    let a = cfg.radius;
    let outer = eval_pair(n, wn.kr * a)?;
    let inner = eval_pair(n, wn.k1 * a)?;
    let eps = medium_terms(n, Medium::Permittivity, cfg.eps_r, wn, &outer, &inner)?;
    let mu = medium_terms(n, Medium::Permeability, cfg.mu_r, wn, &outer, &inner)?;
    let h = outer.hankel();
    let jh = h * inner.j;
    let nf = n as f64 * wn.f / (wn.kr * a);
    let i = Complex64::i();
    Ok(CoeffSet {
        n,
        a_eps: eps.numerator / eps.denominator,
        a_mu: mu.numerator / mu.denominator,
        b_eps: jh / eps.denominator * i * (nf * wn.xi0),
        b_mu: jh / mu.denominator * i * (nf * wn.eta0),
        c: Complex64::new(outer.j, 0.0) / h,
        k_n: n as f64 * wn.kz / a * (1.0 / (wn.k1 * wn.k1) - 1.0 / (wn.kr * wn.kr)),
        e_inc: incident_coefficient(n, inc),
    })
}

/// `a_0 / (1 + a_0 J_0)`, the factor produced by eliminating the zeroth order.
pub fn elimination_factor(a0: Complex64, lattice_self: Complex64, medium: Medium) -> Result<Complex64> {
    let prod = a0 * lattice_self;
    let den = prod + 1.0;
    if den.norm() <= 8.0 * f64::EPSILON * (1.0 + prod.norm()) {
        return Err(Error::EliminationSingular { medium });
    }
    Ok(a0 / den)
}

/// `d_{n,m} = J_{n-m} - [a_0 / (1 + a_0 J_0)] J_n J_{-m}` for `n, m != 0`.
pub fn coupling_entry(
    n: i32,
    m: i32,
    medium: Medium,
    table: &SchlomilchTable,
    coeffs0: &CoeffSet,
) -> Result<Complex64> {
    debug_assert!(n != 0 && m != 0);
    let g = elimination_factor(coeffs0.a(medium), table.value(0), medium)?;
    Ok(coupling_with_factor(n, m, g, table))
}

pub(crate) fn coupling_with_factor(n: i32, m: i32, g: Complex64, table: &SchlomilchTable) -> Complex64 {
    table.value(n - m) - g * table.value(n) * table.value(-m)
}

/// Right-hand sides `(e_n^eps, f_n^mu)` for `n != 0`:
/// `e = -a_n^eps {E_n - g_eps J_n E_0}` and `f = -b_n^mu c_n {E_n - g_eps J_n E_0}`,
/// with `g_eps = a_0^eps / (1 + a_0^eps J_0)`.
pub fn rhs_entries(table: &SchlomilchTable, coeffs: &CoeffSet, coeffs0: &CoeffSet) -> Result<(Complex64, Complex64)> {
    debug_assert!(coeffs.n != 0);
    let g = elimination_factor(coeffs0.a_eps, table.value(0), Medium::Permittivity)?;
    Ok(rhs_with_factor(g, table, coeffs, coeffs0))
}

pub(crate) fn rhs_with_factor(
    g_eps: Complex64,
    table: &SchlomilchTable,
    coeffs: &CoeffSet,
    coeffs0: &CoeffSet,
) -> (Complex64, Complex64) {
    let driven = coeffs.e_inc - g_eps * table.value(coeffs.n) * coeffs0.e_inc;
    (-coeffs.a_eps * driven, -coeffs.b_mu * coeffs.c * driven)
}
