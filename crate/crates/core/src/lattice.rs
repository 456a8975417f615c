//! Schlömilch lattice sums for oblique incidence,
//!
//! ```text
//! J_n(krd) = sum_{s>=1} H_n(s krd) [ e^{i s krd sin psi} (-1)^n + e^{-i s krd sin psi} ]
//! ```
//!
//! Each sum splits into two branches `P_m = sum H_m(s krd) e^{+i s krd sin psi}`
//! and `M_m = sum H_m(s krd) e^{-i s krd sin psi}` for `m = |n| >= 0`, so that
//! `J_m = (-1)^m P_m + M_m` and `J_{-m} = P_m + (-1)^m M_m`. A branch's terms
//! behave like `e^{i s theta} s^{-1/2}` with a smooth amplitude; past a
//! head of directly summed terms, its partial sums are accelerated with an
//! iterated Shanks transformation, and the spread of the last column is the
//! error estimate.

use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, floor, sin};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{hankel1, MAX_ORDER};

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Anomaly distance below which results carry a warning.
pub const NEAR_ANOMALY_BAND: f64 = 1.0e-2;

/// Distances of `krd (1 +- sin psi) / 2pi` from the nearest integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyReport {
    pub plus_branch: f64,
    pub minus_branch: f64,
    pub is_anomalous: bool,
    pub guard_band: f64,
}

impl AnomalyReport {
    pub fn min_distance(&self) -> f64 {
        self.plus_branch.min(self.minus_branch)
    }

    /// Outside the guard band but within [`NEAR_ANOMALY_BAND`].
    pub fn is_near(&self) -> bool {
        !self.is_anomalous && self.min_distance() < NEAR_ANOMALY_BAND
    }
}

fn distance_to_integer(v: f64) -> f64 {
    (v - floor(v + 0.5)).abs()
}

pub fn check_anomaly(krd: f64, sin_psi: f64, guard_band: f64) -> AnomalyReport {
    let plus_branch = distance_to_integer(krd * (1.0 + sin_psi) / TWO_PI);
    let minus_branch = distance_to_integer(krd * (1.0 - sin_psi) / TWO_PI);
    AnomalyReport {
        plus_branch,
        minus_branch,
        is_anomalous: plus_branch.min(minus_branch) < guard_band,
        guard_band,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSumOptions {
    /// Target for the error estimate, relative to `max(1, |value|)`.
    pub tol: f64,
    pub max_terms: usize,
    pub guard_band: f64,
    /// Number of iterated Shanks passes.
    pub shanks_depth: usize,
}

impl Default for LatticeSumOptions {
    fn default() -> Self {
        Self {
            tol: 1.0e-8,
            max_terms: 200_000,
            guard_band: 1.0e-4,
            shanks_depth: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSum {
    pub value: Complex64,
    pub est_error: f64,
    pub terms_used: usize,
}

/// Accelerated limits of both branches for one non-negative order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSums {
    pub order: u32,
    pub plus: Complex64,
    pub minus: Complex64,
    pub est_error: f64,
    pub terms_used: usize,
    pub converged: bool,
}

impl BranchSums {
    fn vanishing(order: u32) -> Self {
        Self {
            order,
            plus: ZERO,
            minus: ZERO,
            est_error: 0.0,
            terms_used: 0,
            converged: true,
        }
    }

    /// `J_n` for `n = +order` or `n = -order`.
    pub fn combine(&self, n: i32) -> Complex64 {
        let sign = if self.order % 2 == 0 { 1.0 } else { -1.0 };
        if n >= 0 {
            self.plus * sign + self.minus
        } else {
            self.plus + self.minus * sign
        }
    }

    fn lattice_sum(&self, n: i32) -> LatticeSum {
        LatticeSum {
            value: self.combine(n),
            est_error: self.est_error,
            terms_used: self.terms_used,
        }
    }
}

/// Aitken's delta-squared step (first-order Shanks transform) on three
/// consecutive partial sums, in difference form.
fn aitken(a: Complex64, b: Complex64, c: Complex64) -> Complex64 {
    let d1 = b - a;
    let d2 = c - b;
    let den = d2 - d1;
    if den.norm() <= f64::EPSILON * (d1.norm() + d2.norm()) {
        c
    } else {
        c - d2 * d2 / den
    }
}

/// Applies `depth` Shanks passes to consecutive partial sums; returns the
/// last entry of the final column and that column's spread.
pub fn iterated_shanks(partial_sums: &[Complex64], depth: usize) -> (Complex64, f64) {
    let mut col: Vec<Complex64> = partial_sums.to_vec();
    for _ in 0..depth {
        if col.len() < 3 {
            break;
        }
        col = col.windows(3).map(|w| aitken(w[0], w[1], w[2])).collect();
    }
    let last = *col.last().expect("at least one partial sum");
    let mut spread = 0.0_f64;
    for (i, a) in col.iter().enumerate() {
        for b in &col[i + 1..] {
            spread = spread.max((a - b).norm());
        }
    }
    (last, spread)
}

/// First term index handled by the accelerated tail; before it the Hankel
/// amplitude is far from its smooth large-argument form.
fn head_terms(order: u32, krd: f64) -> usize {
    let m = order as f64;
    let need = (0.5 * m * m + 2.0 * m + 10.0) / krd;
    (libm::ceil(need) as usize).max(8)
}

const FIRST_CHECKPOINT: usize = 64;

/// Ring of the most recent partial sums.
struct Window {
    buf: Vec<Complex64>,
    next: usize,
    filled: usize,
}

impl Window {
    fn new(len: usize) -> Self {
        Self {
            buf: vec![ZERO; len],
            next: 0,
            filled: 0,
        }
    }

    fn push(&mut self, v: Complex64) {
        self.buf[self.next] = v;
        self.next = (self.next + 1) % self.buf.len();
        self.filled = (self.filled + 1).min(self.buf.len());
    }

    fn ordered(&self) -> Vec<Complex64> {
        let n = self.buf.len();
        (0..self.filled)
            .map(|k| self.buf[(self.next + n - self.filled + k) % n])
            .collect()
    }
}

/// Both branches for order `m >= 0`, continuing until the estimate meets
/// `tol * max(1, |P|, |M|)` or `max_terms` is exhausted. The latter is
/// reported as `converged = false` with the checkpoint of smallest estimate.
pub fn branch_sums(order: u32, krd: f64, sin_psi: f64, opts: &LatticeSumOptions) -> Result<BranchSums> {
    if !(krd > 0.0) || !krd.is_finite() {
        return Err(Error::InvalidConfig {
            field: "krd",
            reason: alloc::format!("must be positive and finite, got {krd}"),
        });
    }
    if order > MAX_ORDER {
        return Err(Error::Range {
            order: order as i64,
            x: krd,
        });
    }
    let head_end = head_terms(order, krd);
    let window_len = 2 * opts.shanks_depth + 3;
    let m = order as i32;

    let mut head_plus = ZERO;
    let mut head_minus = ZERO;
    let mut tail_plus = ZERO;
    let mut tail_minus = ZERO;
    let mut win_plus = Window::new(window_len);
    let mut win_minus = Window::new(window_len);

    let mut checkpoint = head_end + FIRST_CHECKPOINT.max(window_len);
    let mut best: Option<BranchSums> = None;
    let mut s = 1usize;
    while s <= opts.max_terms {
        let x = s as f64 * krd;
        let h = hankel1(m, x)?;
        let phase_arg = x * sin_psi;
        let e = Complex64::new(cos(phase_arg), sin(phase_arg));
        let tp = h * e;
        let tm = h * e.conj();
        if s < head_end {
            head_plus += tp;
            head_minus += tm;
        } else {
            tail_plus += tp;
            tail_minus += tm;
            win_plus.push(tail_plus);
            win_minus.push(tail_minus);
        }
        if s == checkpoint {
            let (lp, ep) = iterated_shanks(&win_plus.ordered(), opts.shanks_depth);
            let (lm, em) = iterated_shanks(&win_minus.ordered(), opts.shanks_depth);
            let plus = head_plus + lp;
            let minus = head_minus + lm;
            let est = ep + em;
            let scale = plus.norm().max(minus.norm()).max(1.0);
            let cur = BranchSums {
                order,
                plus,
                minus,
                est_error: est,
                terms_used: s,
                converged: est <= opts.tol * scale,
            };
            if cur.converged {
                return Ok(cur);
            }
            if best.map_or(true, |b| cur.est_error <= b.est_error) {
                best = Some(cur);
            }
            checkpoint = head_end + 2 * (checkpoint - head_end);
            if checkpoint > opts.max_terms {
                break;
            }
        }
        s += 1;
    }
    Ok(best.unwrap_or(BranchSums {
        order,
        plus: head_plus + tail_plus,
        minus: head_minus + tail_minus,
        est_error: f64::INFINITY,
        terms_used: opts.max_terms.min(s),
        converged: false,
    }))
}

/// One lattice sum `J_n(krd)`. Odd orders at `sin psi = 0` vanish identically and
/// are returned without summation.
pub fn schlomilch_sum(n: i32, krd: f64, sin_psi: f64, opts: &LatticeSumOptions) -> Result<LatticeSum> {
    let report = check_anomaly(krd, sin_psi, opts.guard_band);
    if report.is_anomalous {
        return Err(Error::Anomaly(report));
    }
    let order = n.unsigned_abs();
    if sin_psi == 0.0 && order % 2 == 1 {
        return Ok(BranchSums::vanishing(order).lattice_sum(n));
    }
    let b = branch_sums(order, krd, sin_psi, opts)?;
    if !b.converged {
        return Err(Error::NonConvergence {
            order: n,
            best: b.combine(n),
            est_error: b.est_error,
            terms: b.terms_used,
        });
    }
    Ok(b.lattice_sum(n))
}

/// Lattice sums for all orders `|n| <= n_max` at one geometry and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SchlomilchTable {
    krd: f64,
    sin_psi: f64,
    n_max: usize,
    entries: Vec<LatticeSum>,
    anomaly: AnomalyReport,
    forced_zero: bool,
}

impl SchlomilchTable {
    /// Table with every entry forced to zero: the isolated-cylinder limit.
    pub fn zeroed(n_max: usize, krd: f64, sin_psi: f64) -> Self {
        Self {
            krd,
            sin_psi,
            n_max,
            entries: vec![
                LatticeSum {
                    value: ZERO,
                    est_error: 0.0,
                    terms_used: 0,
                };
                2 * n_max + 1
            ],
            anomaly: check_anomaly(krd, sin_psi, 0.0),
            forced_zero: true,
        }
    }

    /// Assembles a table from per-order branch sums (orders `0..=n_max`, any
    /// order of arrival), for callers that evaluate orders concurrently.
    pub fn from_branches(
        n_max: usize,
        krd: f64,
        sin_psi: f64,
        opts: &LatticeSumOptions,
        branches: &[BranchSums],
    ) -> Result<Self> {
        let anomaly = check_anomaly(krd, sin_psi, opts.guard_band);
        if anomaly.is_anomalous {
            return Err(Error::Anomaly(anomaly));
        }
        let mut entries = vec![
            LatticeSum {
                value: ZERO,
                est_error: 0.0,
                terms_used: 0
            };
            2 * n_max + 1
        ];
        let mut seen = vec![false; n_max + 1];
        for b in branches {
            let m = b.order as usize;
            if m > n_max {
                continue;
            }
            if !b.converged {
                return Err(Error::NonConvergence {
                    order: b.order as i32,
                    best: b.combine(b.order as i32),
                    est_error: b.est_error,
                    terms: b.terms_used,
                });
            }
            seen[m] = true;
            entries[n_max + m] = b.lattice_sum(m as i32);
            entries[n_max - m] = b.lattice_sum(-(m as i32));
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::TableCoverage {
                available: missing.saturating_sub(1),
                required: n_max,
            });
        }
        Ok(Self {
            krd,
            sin_psi,
            n_max,
            entries,
            anomaly,
            forced_zero: false,
        })
    }

    pub fn krd(&self) -> f64 {
        self.krd
    }

    pub fn sin_psi(&self) -> f64 {
        self.sin_psi
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn anomaly(&self) -> &AnomalyReport {
        &self.anomaly
    }

    pub fn is_forced_zero(&self) -> bool {
        self.forced_zero
    }

    pub fn entry(&self, n: i32) -> Option<&LatticeSum> {
        let idx = self.n_max as i64 + n as i64;
        if idx < 0 {
            return None;
        }
        self.entries.get(idx as usize)
    }

    /// `J_n`; panics when `|n| > n_max`.
    pub fn value(&self, n: i32) -> Complex64 {
        match self.entry(n) {
            Some(e) => e.value,
            None => panic!("lattice order {n} outside table of n_max {}", self.n_max),
        }
    }

    pub fn require(&self, n_max: usize) -> Result<()> {
        if n_max > self.n_max {
            Err(Error::TableCoverage {
                available: self.n_max,
                required: n_max,
            })
        } else {
            Ok(())
        }
    }

    /// `(n, sum)` pairs in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, &LatticeSum)> + '_ {
        let off = self.n_max as i32;
        self.entries.iter().enumerate().map(move |(i, e)| (i as i32 - off, e))
    }

    pub fn max_est_error(&self) -> f64 {
        self.entries.iter().map(|e| e.est_error).fold(0.0, f64::max)
    }
}

/// Sequential table construction. Any failed order rejects the whole table.
pub fn build_table(n_max: usize, krd: f64, sin_psi: f64, opts: &LatticeSumOptions) -> Result<SchlomilchTable> {
    let anomaly = check_anomaly(krd, sin_psi, opts.guard_band);
    if anomaly.is_anomalous {
        return Err(Error::Anomaly(anomaly));
    }
    let branches = (0..=n_max as u32)
        .map(|m| order_branches(m, krd, sin_psi, opts))
        .collect::<Result<Vec<_>>>()?;
    SchlomilchTable::from_branches(n_max, krd, sin_psi, opts, &branches)
}

/// Branch sums for one order as used by table construction; odd orders at
/// `sin psi = 0` short-circuit to zero.
pub fn order_branches(order: u32, krd: f64, sin_psi: f64, opts: &LatticeSumOptions) -> Result<BranchSums> {
    if sin_psi == 0.0 && order % 2 == 1 {
        Ok(BranchSums::vanishing(order))
    } else {
        branch_sums(order, krd, sin_psi, opts)
    }
}
