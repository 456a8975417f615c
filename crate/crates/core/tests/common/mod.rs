//! Reference evaluations written independently of the library's code paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use cylgrating::grating::{GratingConfig, IncidentWave};
use cylgrating::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// k0 a = 0.5, d = 4a, eps_r = 2, mu_r = 1, theta = 60 deg, phi = 0, E0 = 1.
pub fn desk() -> (GratingConfig, IncidentWave) {
    let a = 0.01;
    (
        GratingConfig {
            radius: a,
            spacing: 4.0 * a,
            eps_r: 2.0,
            mu_r: 1.0,
            k0: 0.5 / a,
        },
        IncidentWave {
            e0v: 1.0,
            theta_i: PI / 3.0,
            phi_i: 0.0,
        },
    )
}

pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}

pub fn crel(x: Complex64, y: Complex64) -> f64 {
    (x - y).norm() / y.norm().max(f64::MIN_POSITIVE)
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Ascending power series for `J_n(x)`, `n >= 0`.
pub fn j_series(n: u32, x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = (x / 2.0).powi(n as i32) / factorial(n);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn digamma_int(m: u32) -> f64 {
    -EULER_GAMMA + (1..m).map(|k| 1.0 / k as f64).sum::<f64>()
}

/// Ascending series for `Y_n(x)`, `n >= 0`:
/// `-(x/2)^-n / pi sum_{k<n} (n-k-1)!/k! (x^2/4)^k + (2/pi) ln(x/2) J_n(x)
///  - (x/2)^n / pi sum_k [psi(k+1) + psi(n+k+1)] (-x^2/4)^k / (k! (n+k)!)`.
pub fn y_series(n: u32, x: f64) -> f64 {
    let h = x / 2.0;
    let head: f64 = (0..n)
        .map(|k| factorial(n - k - 1) / factorial(k) * (h * h).powi(k as i32))
        .sum::<f64>()
        * -h.powi(-(n as i32))
        / PI;
    let mut tail = 0.0;
    let mut k = 0u32;
    loop {
        let t = (digamma_int(k + 1) + digamma_int(n + k + 1)) * (-h * h).powi(k as i32)
            / (factorial(k) * factorial(n + k));
        tail += t;
        if k > 10 && t.abs() < 1e-18 * tail.abs() || k > 150 {
            break;
        }
        k += 1;
    }
    head + 2.0 / PI * (h.ln()) * j_series(n, x) - h.powi(n as i32) / PI * tail
}

/// Large-argument expansion of `H_n^(1)(x)` truncated at its smallest term.
pub fn hankel_asymptotic(n: i32, x: f64) -> Complex64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kk = k as f64;
        let next = term * Complex64::i() * ((mu - (2.0 * kk - 1.0).powi(2)) / (kk * 8.0 * x));
        if next.norm() >= last {
            break;
        }
        last = next.norm();
        term = next;
        sum += term;
        if last < 1e-17 {
            break;
        }
    }
    let phase = x - n as f64 * PI / 2.0 - PI / 4.0;
    sum * Complex64::from_polar((2.0 / (PI * x)).sqrt(), phase)
}

/// One branch `sum_{s>=1} H_n(s x) e^{i sigma s x}` by straight summation of
/// `terms` terms plus a summation-by-parts tail. Writing the summand as
/// `q^s f(s)` with `q = e^{i x (1 + sigma)}` and a smooth `f`,
/// `sum_{s>=M} q^s f(s) = [q^M f(M) + q^{M+1} (f(M+1) - f(M)) / (1 - q)] / (1 - q)`
/// up to second differences.
pub fn brute_branch(n: i32, x: f64, sigma: f64, terms: usize) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for s in 1..=terms {
        let arg = s as f64 * x;
        sum += hankel_asymptotic(n, arg) * Complex64::from_polar(1.0, sigma * arg);
    }
    let q = Complex64::from_polar(1.0, x * (1.0 + sigma));
    let f = |s: f64| hankel_asymptotic(n, s * x) * Complex64::from_polar(1.0, -s * x);
    let m = (terms + 1) as f64;
    let qm = Complex64::from_polar(1.0, x * (1.0 + sigma) * m);
    let tail = (qm * f(m) + qm * q * (f(m + 1.0) - f(m)) / (1.0 - q)) / (1.0 - q);
    sum + tail
}

/// `J_n(x) = sum_s H_n(s x) [(-1)^n e^{i s x sin psi} + e^{-i s x sin psi}]`.
pub fn brute_lattice(n: i32, x: f64, sin_psi: f64, terms: usize) -> Complex64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    brute_branch(n, x, sin_psi, terms) * sign + brute_branch(n, x, -sin_psi, terms)
}

/// Unit Complex from an angle.
pub fn cis(t: f64) -> Complex64 {
    Complex64::from_polar(1.0, t)
}

use cylgrating::grating::derive_wavenumbers;
use cylgrating::lattice::{build_table, LatticeSumOptions, SchlomilchTable};
use cylgrating::system::{ScatteringSolution, Truncation};

pub fn table_for(cfg: &GratingConfig, inc: &IncidentWave, n: usize) -> SchlomilchTable {
    let wn = derive_wavenumbers(cfg, inc).unwrap();
    build_table(2 * n, wn.kr * cfg.spacing, inc.sin_psi(), &LatticeSumOptions::default()).unwrap()
}

pub fn trunc(n: usize) -> Truncation {
    Truncation::new(n).unwrap()
}

/// Which coefficient family an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Electric,
    Magnetic,
}

/// Largest element-wise relative gap between two solutions, skipping the
/// listed elements.
pub fn max_rel_gap(x: &ScatteringSolution, y: &ScatteringSolution, skip: &[(Family, i32)]) -> f64 {
    let mut worst = 0.0_f64;
    for n in y.orders() {
        for fam in [Family::Electric, Family::Magnetic] {
            if skip.contains(&(fam, n)) {
                continue;
            }
            let (a, b) = match fam {
                Family::Electric => (x.a_at(n), y.a_at(n)),
                Family::Magnetic => (x.ah_at(n), y.ah_at(n)),
            };
            let gap = if a == b { 0.0 } else { crel(a, b) };
            worst = worst.max(gap);
        }
    }
    worst
}
