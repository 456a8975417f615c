//! Cylinder functions of integer order and real argument.
//!
//! `J_n` comes from the ascending series for small arguments, from Miller's
//! backward recurrence (normalized with `J_0 + 2 sum J_2k = 1`) when the order
//! reaches the argument, and from the Hankel asymptotic expansion of `J_0`,
//! `J_1` followed by upward recurrence for large arguments. `Y_0` and `Y_1`
//! come from the Neumann expansions over `J_k` below [`ASYMPTOTIC_ARG`] and
//! from the asymptotic expansion above it; higher `Y_n` always use upward
//! recurrence, which is stable for the second kind.

use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, log, sin, sqrt};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported |n|.
pub const MAX_ORDER: u32 = 200;
/// Largest supported argument.
pub const MAX_ARG: f64 = 1.0e8;
/// Arguments at or above this use the Hankel asymptotic expansion for orders 0 and 1.
pub const ASYMPTOTIC_ARG: f64 = 25.0;
/// Arguments at or below this use the ascending series for `J_n`.
const SERIES_ARG: f64 = 1.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const PI: f64 = core::f64::consts::PI;
const RESCALE_AT: f64 = 1.0e250;

/// `J_n`, `Y_n` and their derivatives with respect to the argument, at one order and argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylFnValue {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

impl CylFnValue {
    pub fn hankel(&self) -> Complex64 {
        Complex64::new(self.j, self.y)
    }

    pub fn hankel_prime(&self) -> Complex64 {
        Complex64::new(self.jp, self.yp)
    }

    /// `J Y' - Y J'`, which equals `2 / (pi x)`.
    pub fn wronskian(&self) -> f64 {
        self.j * self.yp - self.y * self.jp
    }
}

fn check_envelope(order: u32, x: f64, function: &'static str) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain { function, x });
    }
    if order > MAX_ORDER || x > MAX_ARG {
        return Err(Error::Range {
            order: order as i64,
            x,
        });
    }
    Ok(())
}

#[inline]
fn parity(n: i32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Hankel asymptotic expansion of `(J_nu, Y_nu)` for `nu` in {0, 1}.
fn asymptotic_01(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut k = 1u32;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() > term.abs() || next == 0.0 {
            break;
        }
        term = next;
        // a_k/x^k enters P for even k and Q for odd k, with alternating signs.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1.0e-17 * p.abs().max(1e-300) {
            break;
        }
        k += 1;
    }
    let (s, c) = (sin(x), cos(x));
    // chi = x - phase, with phase = pi/4 (nu = 0) or 3pi/4 (nu = 1)
    let (cos_ph, sin_ph) = if nu == 0 {
        (FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    } else {
        (-FRAC_1_SQRT_2, FRAC_1_SQRT_2)
    };
    let cos_chi = c * cos_ph + s * sin_ph;
    let sin_chi = s * cos_ph - c * sin_ph;
    let amp = sqrt(2.0 / (PI * x));
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// Ascending series for `J_0 .. J_{n_max}`, intended for `x <= SERIES_ARG`.
fn j_series(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    let half = 0.5 * x;
    let q = -half * half;
    let mut lead = 1.0;
    for (n, slot) in out.iter_mut().enumerate() {
        if n > 0 {
            lead *= half / n as f64;
        }
        if lead == 0.0 {
            break;
        }
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * (n as f64 + k));
            sum += term;
            if term.abs() <= 1.0e-17 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        *slot = lead * sum;
    }
    out
}

/// Miller backward recurrence for `J_0 .. J_{n_max}`.
fn j_miller(n_max: usize, x: f64) -> Vec<f64> {
    let top = (n_max as f64).max(x);
    let mut start = top as usize + 20 + sqrt(40.0 * top) as usize;
    start += start % 2;
    let mut out = vec![0.0; n_max + 1];
    let mut above = 0.0;
    let mut cur = 1.0e-30;
    let mut even_sum = 0.0;
    let two_over_x = 2.0 / x;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = cur;
        }
        if k % 2 == 0 {
            even_sum += cur;
        }
        let below = k as f64 * two_over_x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            above /= RESCALE_AT;
            even_sum /= RESCALE_AT;
            for v in out.iter_mut().skip(k) {
                *v /= RESCALE_AT;
            }
        }
    }
    out[0] = cur;
    let norm = cur + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// `J_0 .. J_{n_max}` at `x >= 0`, without envelope checks.
fn j_orders_unchecked(n_max: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return out;
    }
    if x <= SERIES_ARG {
        return j_series(n_max, x);
    }
    if x >= ASYMPTOTIC_ARG && (n_max as f64) < x {
        let (j0, _) = asymptotic_01(0, x);
        let (j1, _) = asymptotic_01(1, x);
        let mut out = vec![0.0; n_max + 1];
        out[0] = j0;
        if n_max >= 1 {
            out[1] = j1;
        }
        for k in 1..n_max {
            out[k + 1] = 2.0 * k as f64 / x * out[k] - out[k - 1];
        }
        return out;
    }
    j_miller(n_max, x)
}

/// `(Y_0, Y_1)` at `x > 0`.
fn y01(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_ARG {
        return (asymptotic_01(0, x).1, asymptotic_01(1, x).1);
    }
    let kmax = x as usize + 40;
    let j = j_orders_unchecked(2 * kmax + 1, x);
    let lg = log(0.5 * x) + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in (1..=kmax).rev() {
        let sign = parity(k as i32);
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (2.0 * kf + 1.0) * j[2 * k + 1] / (kf * (kf + 1.0));
    }
    let y0 = (2.0 / PI) * (lg * j[0] - 2.0 * s0);
    let y1 = (2.0 / PI) * (-j[0] / x + (lg - 1.0) * j[1] - s1);
    (y0, y1)
}

/// `Y_0 .. Y_{n_max}` at `x > 0` by upward recurrence; overflow is a range error.
fn y_orders_unchecked(n_max: usize, x: f64) -> Result<Vec<f64>> {
    let (y0, y1) = y01(x);
    let mut out = vec![0.0; n_max + 1];
    out[0] = y0;
    if n_max >= 1 {
        out[1] = y1;
    }
    for k in 1..n_max {
        let next = 2.0 * k as f64 / x * out[k] - out[k - 1];
        if !next.is_finite() {
            return Err(Error::Range {
                order: (k + 1) as i64,
                x,
            });
        }
        out[k + 1] = next;
    }
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::Range {
            order: n_max as i64,
            x,
        });
    }
    Ok(out)
}

/// `J_0(x) .. J_{n_max}(x)` for `x >= 0`.
pub fn bessel_j_orders(n_max: u32, x: f64) -> Result<Vec<f64>> {
    check_envelope(n_max, x, "bessel_j")?;
    Ok(j_orders_unchecked(n_max as usize, x))
}

/// `Y_0(x) .. Y_{n_max}(x)` for `x > 0`.
pub fn bessel_y_orders(n_max: u32, x: f64) -> Result<Vec<f64>> {
    check_envelope(n_max, x, "bessel_y")?;
    if x == 0.0 {
        return Err(Error::Domain {
            function: "bessel_y",
            x,
        });
    }
    y_orders_unchecked(n_max as usize, x)
}

/// Scalar upward recurrence for `(J_m, Y_m)` when `x >= ASYMPTOTIC_ARG` and `m < x`;
/// performs the same operations as the array paths.
fn large_arg_pair(m: u32, x: f64) -> Result<(f64, f64)> {
    let (mut j_prev, mut y_prev) = asymptotic_01(0, x);
    if m == 0 {
        return Ok((j_prev, y_prev));
    }
    let (mut j, mut y) = asymptotic_01(1, x);
    for k in 1..m {
        let f = 2.0 * k as f64 / x;
        let jn = f * j - j_prev;
        let yn = f * y - y_prev;
        j_prev = j;
        y_prev = y;
        j = jn;
        y = yn;
    }
    if !y.is_finite() {
        return Err(Error::Range { order: m as i64, x });
    }
    Ok((j, y))
}

/// `J_n(x)` for integer `n` and `x >= 0`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    let m = n.unsigned_abs();
    check_envelope(m, x, "bessel_j")?;
    let v = if x >= ASYMPTOTIC_ARG && (m as f64) < x {
        large_arg_pair(m, x)?.0
    } else {
        j_orders_unchecked(m as usize, x)[m as usize]
    };
    Ok(if n < 0 { parity(n) * v } else { v })
}

/// `Y_n(x)` for integer `n` and `x > 0`.
pub fn bessel_y(n: i32, x: f64) -> Result<f64> {
    let m = n.unsigned_abs();
    check_envelope(m, x, "bessel_y")?;
    if x == 0.0 {
        return Err(Error::Domain {
            function: "bessel_y",
            x,
        });
    }
    let v = if x >= ASYMPTOTIC_ARG && (m as f64) < x {
        large_arg_pair(m, x)?.1
    } else {
        y_orders_unchecked(m as usize, x)?[m as usize]
    };
    Ok(if n < 0 { parity(n) * v } else { v })
}

/// `H_n^(1)(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: i32, x: f64) -> Result<Complex64> {
    let m = n.unsigned_abs();
    check_envelope(m, x, "hankel1")?;
    if x == 0.0 {
        return Err(Error::Domain {
            function: "hankel1",
            x,
        });
    }
    let (j, y) = if x >= ASYMPTOTIC_ARG && (m as f64) < x {
        large_arg_pair(m, x)?
    } else {
        let j = j_orders_unchecked(m as usize, x)[m as usize];
        let y = y_orders_unchecked(m as usize, x)?[m as usize];
        (j, y)
    };
    let s = if n < 0 { parity(n) } else { 1.0 };
    Ok(Complex64::new(s * j, s * y))
}

/// `H_0^(1)(x) .. H_{n_max}^(1)(x)`.
pub fn hankel1_orders(n_max: u32, x: f64) -> Result<Vec<Complex64>> {
    let j = bessel_j_orders(n_max, x)?;
    let y = bessel_y_orders(n_max, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(j, y)| Complex64::new(j, y))
        .collect())
}

/// Values and first derivatives at order `n`, using
/// `C'_n = (C_{n-1} - C_{n+1}) / 2` and `C'_0 = -C_1`.
pub fn eval_pair(n: i32, x: f64) -> Result<CylFnValue> {
    let m = n.unsigned_abs();
    check_envelope(m + 1, x, "eval_pair")?;
    if x == 0.0 {
        return Err(Error::Domain {
            function: "eval_pair",
            x,
        });
    }
    let top = m as usize + 1;
    let j = j_orders_unchecked(top, x);
    let y = y_orders_unchecked(top, x)?;
    let mu = m as usize;
    let (jp, yp) = if mu == 0 {
        (-j[1], -y[1])
    } else {
        (0.5 * (j[mu - 1] - j[mu + 1]), 0.5 * (y[mu - 1] - y[mu + 1]))
    };
    let s = if n < 0 { parity(n) } else { 1.0 };
    Ok(CylFnValue {
        j: s * j[mu],
        y: s * y[mu],
        jp: s * jp,
        yp: s * yp,
    })
}
