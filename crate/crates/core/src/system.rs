//! Truncated block system for the scattering coefficients and its solvers.
//!
//! For orders `n != 0` the unknowns are stacked as `[A; A^H]`, each in the
//! order `N, N-1, .., 1, -1, .., -N`, and satisfy
//!
//! ```text
//! [ I + Le De        -Be (I + G Dm) ] [A  ]   [e]
//! [ Bm (I + G De)     I + Lm Dm     ] [A^H] = [f]
//! ```
//!
//! with `Le, Lm, Be, Bm, G` diagonal (`a_n^eps, a_n^mu, b_n^eps, b_n^mu, c_n`)
//! and `De, Dm` the dense rank-one-corrected coupling matrices `d_{n,m}`.
//! `A_0` and `A_0^H` are recovered afterwards. [`oracle_full`] instead solves
//! the equations for all `|n| <= N` including zero, before elimination.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grating::{
    coeff_set, coupling_with_factor, derive_wavenumbers, elimination_factor, rhs_with_factor, CoeffSet,
    GratingConfig, IncidentWave, Medium,
};
use crate::lattice::SchlomilchTable;
use crate::linalg::{norm_inf_vec, residual, solve_refined, ComplexMatrix, Lu};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest order window used by automatic truncation.
pub const AUTO_MAX_ORDER: usize = 40;
/// Automatic truncation stops once edge coefficients fall below this fraction
/// of the largest coefficient.
pub const AUTO_EDGE_TARGET: f64 = 1.0e-10;

/// Symmetric order window `{-N..N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    order: usize,
}

impl Truncation {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig {
                field: "truncation",
                reason: "order N must be at least 1".into(),
            });
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Dimension of each block of the eliminated system.
    pub fn block_dim(&self) -> usize {
        2 * self.order
    }

    /// `N, N-1, .., 1, -1, .., -N`.
    pub fn orders(&self) -> Vec<i32> {
        let n = self.order as i32;
        (1..=n).rev().chain((-n..=-1).rev()).collect()
    }

    /// `N, .., 1, 0, -1, .., -N`.
    pub fn full_orders(&self) -> Vec<i32> {
        let n = self.order as i32;
        (-n..=n).rev().collect()
    }

    /// Row of order `n` in [`Truncation::orders`].
    pub fn index_of(&self, n: i32) -> Option<usize> {
        let big = self.order as i32;
        if n == 0 || n.abs() > big {
            None
        } else if n > 0 {
            Some((big - n) as usize)
        } else {
            Some((big - 1 - n) as usize)
        }
    }
}

/// Everything needed to recover `A_0`, `A_0^H` from the other orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOrderTerms {
    pub coeffs0: CoeffSet,
    pub g_eps: Complex64,
    pub g_mu: Complex64,
    /// `J_{-m}` for `m` in [`Truncation::orders`] order.
    pub lattice_neg: Vec<Complex64>,
}

impl ZeroOrderTerms {
    pub fn new(trunc: &Truncation, table: &SchlomilchTable, coeffs0: CoeffSet) -> Result<Self> {
        table.require(trunc.order())?;
        let j0 = table.value(0);
        Ok(Self {
            coeffs0,
            g_eps: elimination_factor(coeffs0.a_eps, j0, Medium::Permittivity)?,
            g_mu: elimination_factor(coeffs0.a_mu, j0, Medium::Permeability)?,
            lattice_neg: trunc.orders().iter().map(|&m| table.value(-m)).collect(),
        })
    }
}

/// `A_0 = -g_eps (E_0 + sum A_m J_{-m})`, `A_0^H = -g_mu sum A^H_m J_{-m}`, with
/// `a`, `ah` in [`Truncation::orders`] order.
pub fn recover_n0(terms: &ZeroOrderTerms, a: &[Complex64], ah: &[Complex64]) -> (Complex64, Complex64) {
    let dot = |v: &[Complex64]| {
        v.iter()
            .zip(&terms.lattice_neg)
            .fold(ZERO, |acc, (x, j)| acc + x * j)
    };
    let a0 = -terms.g_eps * (terms.coeffs0.e_inc + dot(a));
    let ah0 = -terms.g_mu * dot(ah);
    (a0, ah0)
}

/// Test hooks for assembly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyHooks {
    /// Drop the rank-one correction so that `D` is the plain `J_{n-m}` matrix.
    pub zero_elimination_correction: bool,
}

/// The diagonal and dense blocks of the eliminated system at one truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemBlocks {
    pub trunc: Truncation,
    pub lambda_eps: Vec<Complex64>,
    pub lambda_mu: Vec<Complex64>,
    pub b_eps: Vec<Complex64>,
    pub b_mu: Vec<Complex64>,
    pub gamma: Vec<Complex64>,
    pub d_eps: ComplexMatrix,
    pub d_mu: ComplexMatrix,
    pub e_vec: Vec<Complex64>,
    pub f_vec: Vec<Complex64>,
    pub zero: ZeroOrderTerms,
    /// Expected magnitudes of `A_n` and `A^H_n`, used to scale the unknowns.
    pub scale_a: Vec<f64>,
    pub scale_ah: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SystemBlocks {
    /// `I + Lambda_eps D_eps`.
    pub fn p_eps(&self) -> ComplexMatrix {
        self.d_eps.scale_rows(&self.lambda_eps).add_identity()
    }

    /// `I + Lambda_mu D_mu`.
    pub fn p_mu(&self) -> ComplexMatrix {
        self.d_mu.scale_rows(&self.lambda_mu).add_identity()
    }

    /// `B_eps (I + Gamma D_mu)`.
    pub fn m_eps_mu(&self) -> ComplexMatrix {
        self.d_mu.scale_rows(&self.gamma).add_identity().scale_rows(&self.b_eps)
    }

    /// `B_mu (I + Gamma D_eps)`.
    pub fn m_mu_eps(&self) -> ComplexMatrix {
        self.d_eps.scale_rows(&self.gamma).add_identity().scale_rows(&self.b_mu)
    }

    pub fn full_matrix(&self) -> ComplexMatrix {
        let k = self.trunc.block_dim();
        let mut m = ComplexMatrix::zeros(2 * k, 2 * k);
        m.set_block(0, 0, &self.p_eps());
        m.set_block(0, k, &self.m_eps_mu().neg());
        m.set_block(k, 0, &self.m_mu_eps());
        m.set_block(k, k, &self.p_mu());
        m
    }

    pub fn rhs(&self) -> Vec<Complex64> {
        self.e_vec.iter().chain(&self.f_vec).copied().collect()
    }

    fn scales(&self) -> Vec<f64> {
        self.scale_a.iter().chain(&self.scale_ah).copied().collect()
    }
}

/// Single-cylinder solution at one order from its coefficients.
fn isolated_from(c: &CoeffSet) -> (Complex64, Complex64) {
    let coupling = c.b_eps * c.b_mu;
    let a = -c.e_inc * (c.a_eps + coupling * c.c) / (coupling + 1.0);
    let ah = -c.b_mu * (c.c * c.e_inc + a);
    (a, ah)
}

/// Isolated-cylinder magnitudes, falling back to the electric scale (or 1)
/// where a magnitude vanishes. Solving for `x_n / scale_n` keeps coefficients
/// that span many decades equally well resolved.
fn unknown_scales(sets: &[CoeffSet]) -> (Vec<f64>, Vec<f64>) {
    let usable = |v: f64| v.is_finite() && v > 1e-250 && v < 1e250;
    sets.iter()
        .map(|c| {
            let (a, ah) = isolated_from(c);
            let sa = if usable(a.norm()) { a.norm() } else { 1.0 };
            let sh = if usable(ah.norm()) { ah.norm() } else { sa };
            (sa, sh)
        })
        .unzip()
}

fn reciprocal(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| 1.0 / x).collect()
}

fn scale_vec(v: &[Complex64], s: &[f64]) -> Vec<Complex64> {
    v.iter().zip(s).map(|(x, f)| x * *f).collect()
}

/// Solves `M x = b` through `S^-1 M S y = S^-1 b`, `x = S y`; the residual is
/// that of the unscaled system.
fn solve_scaled(m: &ComplexMatrix, b: &[Complex64], s: &[f64], what: &'static str) -> Result<(Vec<Complex64>, f64)> {
    let inv = reciprocal(s);
    let (y, _) = solve_refined(&m.scale_real(&inv, s), &scale_vec(b, &inv), what)?;
    let x = scale_vec(&y, s);
    let res = norm_inf_vec(&residual(m, &x, b));
    Ok((x, res))
}

pub fn assemble(
    cfg: &GratingConfig,
    inc: &IncidentWave,
    trunc: &Truncation,
    table: &SchlomilchTable,
) -> Result<SystemBlocks> {
    assemble_with(cfg, inc, trunc, table, AssemblyHooks::default())
}

fn coeff_sets(
    cfg: &GratingConfig,
    inc: &IncidentWave,
    orders: &[i32],
) -> Result<(Vec<CoeffSet>, CoeffSet)> {
    let wn = derive_wavenumbers(cfg, inc)?;
    let sets = orders
        .iter()
        .map(|&n| coeff_set(n, cfg, inc, &wn))
        .collect::<Result<Vec<_>>>()?;
    Ok((sets, coeff_set(0, cfg, inc, &wn)?))
}

fn table_warnings(table: &SchlomilchTable) -> Vec<String> {
    let mut w = Vec::new();
    if table.anomaly().is_near() {
        w.push(format!(
            "near Rayleigh anomaly: distance {:.3e} to the nearest passing grating order",
            table.anomaly().min_distance()
        ));
    }
    if table.is_forced_zero() {
        w.push("lattice sums forced to zero (isolated-cylinder limit)".into());
    }
    w
}

pub fn assemble_with(
    cfg: &GratingConfig,
    inc: &IncidentWave,
    trunc: &Truncation,
    table: &SchlomilchTable,
    hooks: AssemblyHooks,
) -> Result<SystemBlocks> {
    table.require(2 * trunc.order())?;
    let orders = trunc.orders();
    let (sets, coeffs0) = coeff_sets(cfg, inc, &orders)?;
    let zero = ZeroOrderTerms::new(trunc, table, coeffs0)?;
    let (g_eps, g_mu) = if hooks.zero_elimination_correction {
        (ZERO, ZERO)
    } else {
        (zero.g_eps, zero.g_mu)
    };
    let k = orders.len();
    let d_eps = ComplexMatrix::from_fn(k, k, |i, j| coupling_with_factor(orders[i], orders[j], g_eps, table));
    let d_mu = ComplexMatrix::from_fn(k, k, |i, j| coupling_with_factor(orders[i], orders[j], g_mu, table));
    let (e_vec, f_vec) = sets
        .iter()
        .map(|c| rhs_with_factor(g_eps, table, c, &coeffs0))
        .unzip();
    let (scale_a, scale_ah) = unknown_scales(&sets);
    Ok(SystemBlocks {
        trunc: *trunc,
        lambda_eps: sets.iter().map(|c| c.a_eps).collect(),
        lambda_mu: sets.iter().map(|c| c.a_mu).collect(),
        b_eps: sets.iter().map(|c| c.b_eps).collect(),
        b_mu: sets.iter().map(|c| c.b_mu).collect(),
        gamma: sets.iter().map(|c| c.c).collect(),
        d_eps,
        d_mu,
        e_vec,
        f_vec,
        zero,
        scale_a,
        scale_ah,
        warnings: table_warnings(table),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Dense LU of the eliminated block system.
    Direct,
    /// Substitution through the diagonal blocks.
    Schur,
    /// Pre-elimination system including `n = 0`.
    Oracle,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Schur => "schur",
            Route::Oracle => "oracle",
        }
    }
}

/// Scattering coefficients over `n = -N..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub trunc: Truncation,
    /// `A_n` for `n = -N..N` (ascending).
    pub a: Vec<Complex64>,
    /// `A_n^H` for `n = -N..N` (ascending).
    pub ah: Vec<Complex64>,
    pub residual_norm: f64,
    pub route: Route,
    pub warnings: Vec<String>,
}

impl ScatteringSolution {
    fn from_eliminated(
        trunc: Truncation,
        a_elim: &[Complex64],
        ah_elim: &[Complex64],
        zero: &ZeroOrderTerms,
        residual_norm: f64,
        route: Route,
        warnings: Vec<String>,
    ) -> Self {
        let (a0, ah0) = recover_n0(zero, a_elim, ah_elim);
        let n = trunc.order() as i32;
        let pick = |v: &[Complex64], v0: Complex64| -> Vec<Complex64> {
            (-n..=n)
                .map(|m| match trunc.index_of(m) {
                    Some(i) => v[i],
                    None => v0,
                })
                .collect()
        };
        Self {
            trunc,
            a: pick(a_elim, a0),
            ah: pick(ah_elim, ah0),
            residual_norm,
            route,
            warnings,
        }
    }

    pub fn order(&self) -> usize {
        self.trunc.order()
    }

    pub fn orders(&self) -> core::ops::RangeInclusive<i32> {
        let n = self.order() as i32;
        -n..=n
    }

    /// `A_n`, or zero outside the window.
    pub fn a_at(&self, n: i32) -> Complex64 {
        self.index(n).map_or(ZERO, |i| self.a[i])
    }

    pub fn ah_at(&self, n: i32) -> Complex64 {
        self.index(n).map_or(ZERO, |i| self.ah[i])
    }

    fn index(&self, n: i32) -> Option<usize> {
        let big = self.order() as i32;
        (n.abs() <= big).then(|| (n + big) as usize)
    }

    pub fn max_abs_a(&self) -> f64 {
        norm_inf_vec(&self.a)
    }

    pub fn max_abs_ah(&self) -> f64 {
        norm_inf_vec(&self.ah)
    }

    /// Largest `|A_{+-N}| / max|A|` or `|A^H_{+-N}| / max|A^H|`.
    pub fn edge_ratio(&self) -> f64 {
        let n = self.order() as i32;
        let ratio = |v: &[Complex64], at: &dyn Fn(i32) -> Complex64| {
            let top = norm_inf_vec(v);
            if top == 0.0 {
                0.0
            } else {
                at(n).norm().max(at(-n).norm()) / top
            }
        };
        ratio(&self.a, &|m| self.a_at(m)).max(ratio(&self.ah, &|m| self.ah_at(m)))
    }
}

/// Dense LU of the full eliminated system.
pub fn solve_direct(blocks: &SystemBlocks) -> Result<ScatteringSolution> {
    let (x, res) = solve_scaled(&blocks.full_matrix(), &blocks.rhs(), &blocks.scales(), "block system")?;
    let k = blocks.trunc.block_dim();
    Ok(ScatteringSolution::from_eliminated(
        blocks.trunc,
        &x[..k],
        &x[k..],
        &blocks.zero,
        res,
        Route::Direct,
        blocks.warnings.clone(),
    ))
}

/// `A = [I + Pe^-1 Mem Pm^-1 Mme]^-1 Pe^-1 [e + Mem Pm^-1 f]`, then
/// `A^H = Pm^-1 [f - Mme A]`.
///
/// Every block is first scaled by the unknowns' expected magnitudes.
pub fn solve_schur(blocks: &SystemBlocks) -> Result<ScatteringSolution> {
    let (sa, sh) = (&blocks.scale_a, &blocks.scale_ah);
    let (ia, ih) = (reciprocal(sa), reciprocal(sh));
    let lu_e = Lu::factor(&blocks.p_eps().scale_real(&ia, sa), "I + Lambda_eps D_eps")?;
    let lu_m = Lu::factor(&blocks.p_mu().scale_real(&ih, sh), "I + Lambda_mu D_mu")?;
    let m_em = blocks.m_eps_mu().scale_real(&ia, sh);
    let m_me = blocks.m_mu_eps().scale_real(&ih, sa);
    let e_vec = scale_vec(&blocks.e_vec, &ia);
    let f_vec = scale_vec(&blocks.f_vec, &ih);
    let inner = lu_e.solve_matrix(&m_em.mul_mat(&lu_m.solve_matrix(&m_me)));
    let lu_t = Lu::factor(&inner.add_identity(), "Schur complement")?;
    let u = lu_m.solve(&f_vec);
    let driven: Vec<Complex64> = e_vec
        .iter()
        .zip(m_em.mul_vec(&u))
        .map(|(e, v)| e + v)
        .collect();
    let a = lu_t.solve(&lu_e.solve(&driven));
    let back: Vec<Complex64> = f_vec.iter().zip(m_me.mul_vec(&a)).map(|(f, v)| f - v).collect();
    let ah = scale_vec(&lu_m.solve(&back), sh);
    let a = scale_vec(&a, sa);
    let x: Vec<Complex64> = a.iter().chain(&ah).copied().collect();
    let res = norm_inf_vec(&residual(&blocks.full_matrix(), &x, &blocks.rhs()));
    Ok(ScatteringSolution::from_eliminated(
        blocks.trunc,
        &a,
        &ah,
        &blocks.zero,
        res,
        Route::Schur,
        blocks.warnings.clone(),
    ))
}

/// The pre-elimination equations over `n = N..-N` including zero, term by
/// term: rows `[0, K)` are the electric equations and rows `[K, 2K)` the
/// magnetic ones, unknowns `[A; A^H]` in [`Truncation::full_orders`] order.
/// Also returns the unknown scales used by [`oracle_full`].
pub fn oracle_system(
    cfg: &GratingConfig,
    inc: &IncidentWave,
    trunc: &Truncation,
    table: &SchlomilchTable,
) -> Result<(ComplexMatrix, Vec<Complex64>, Vec<f64>)> {
    table.require(2 * trunc.order())?;
    let orders = trunc.full_orders();
    let wn = derive_wavenumbers(cfg, inc)?;
    let sets = orders
        .iter()
        .map(|&n| coeff_set(n, cfg, inc, &wn))
        .collect::<Result<Vec<_>>>()?;
    let k = orders.len();
    let mut m = ComplexMatrix::zeros(2 * k, 2 * k);
    let mut rhs = alloc::vec![ZERO; 2 * k];
    for (i, cn) in sets.iter().enumerate() {
        let n = cn.n;
        for (j, &mo) in orders.iter().enumerate() {
            let delta = if i == j { 1.0 } else { 0.0 };
            let lat = table.value(n - mo);
            m[(i, j)] = cn.a_eps * lat + delta;
            m[(i, k + j)] = -cn.b_eps * (cn.c * lat + delta);
            m[(k + i, k + j)] = cn.a_mu * lat + delta;
            m[(k + i, j)] = cn.b_mu * (cn.c * lat + delta);
        }
        rhs[i] = -cn.a_eps * cn.e_inc;
        rhs[k + i] = -cn.b_mu * cn.c * cn.e_inc;
    }
    let (sa, sh) = unknown_scales(&sets);
    Ok((m, rhs, sa.into_iter().chain(sh).collect()))
}

/// Solves [`oracle_system`] directly, without eliminating the zeroth order.
pub fn oracle_full(
    cfg: &GratingConfig,
    inc: &IncidentWave,
    trunc: &Truncation,
    table: &SchlomilchTable,
) -> Result<ScatteringSolution> {
    let (m, rhs, scales) = oracle_system(cfg, inc, trunc, table)?;
    let k = rhs.len() / 2;
    let (x, res) = solve_scaled(&m, &rhs, &scales, "pre-elimination system")?;
    // full_orders is descending; solutions are stored ascending
    let a = x[..k].iter().rev().copied().collect();
    let ah = x[k..].iter().rev().copied().collect();
    Ok(ScatteringSolution {
        trunc: *trunc,
        a,
        ah,
        residual_norm: res,
        route: Route::Oracle,
        warnings: table_warnings(table),
    })
}

/// Closed-form single-cylinder solution at one order (all lattice sums zero):
/// `A - b_eps A^H = -a_eps E`, `b_mu A + A^H = -b_mu c E`.
pub fn isolated_limit(cfg: &GratingConfig, inc: &IncidentWave, n: i32) -> Result<(Complex64, Complex64)> {
    let wn = derive_wavenumbers(cfg, inc)?;
    let c = coeff_set(n, cfg, inc, &wn)?;
    let coupling = c.b_eps * c.b_mu;
    if (coupling + 1.0).norm() <= 8.0 * f64::EPSILON * (1.0 + coupling.norm()) {
        return Err(Error::Singular {
            what: "isolated-cylinder 2x2 system",
            column: 0,
            pivot_growth: f64::INFINITY,
        });
    }
    Ok(isolated_from(&c))
}

/// Dispatches on `route`.
pub fn solve(
    cfg: &GratingConfig,
    inc: &IncidentWave,
    trunc: &Truncation,
    table: &SchlomilchTable,
    route: Route,
) -> Result<ScatteringSolution> {
    match route {
        Route::Direct => solve_direct(&assemble(cfg, inc, trunc, table)?),
        Route::Schur => solve_schur(&assemble(cfg, inc, trunc, table)?),
        Route::Oracle => oracle_full(cfg, inc, trunc, table),
    }
}

/// Result of automatic truncation.
#[derive(Debug, Clone)]
pub struct AutoTruncation {
    pub solution: ScatteringSolution,
    pub table: SchlomilchTable,
    /// `(N, edge ratio)` for every attempted window.
    pub history: Vec<(usize, f64)>,
}

/// Doubles `N` from 2 until the edge ratio drops below [`AUTO_EDGE_TARGET`],
/// stopping at [`AUTO_MAX_ORDER`]. `make_table(n_max)` supplies lattice sums.
pub fn solve_auto<F>(cfg: &GratingConfig, inc: &IncidentWave, route: Route, mut make_table: F) -> Result<AutoTruncation>
where
    F: FnMut(usize) -> Result<SchlomilchTable>,
{
    let mut order = 2usize;
    let mut history = Vec::new();
    loop {
        let trunc = Truncation::new(order)?;
        let table = make_table(2 * order)?;
        let mut solution = solve(cfg, inc, &trunc, &table, route)?;
        let ratio = solution.edge_ratio();
        history.push((order, ratio));
        if ratio < AUTO_EDGE_TARGET || order == AUTO_MAX_ORDER {
            if ratio >= AUTO_EDGE_TARGET {
                solution.warnings.push(format!(
                    "automatic truncation stopped at N = {order} with edge ratio {ratio:.3e}"
                ));
            }
            return Ok(AutoTruncation {
                solution,
                table,
                history,
            });
        }
        order = (2 * order).min(AUTO_MAX_ORDER);
    }
}

/// Measured deviations of the closed-form combined expressions built from
/// `Omega_em = Be(I + G Dm)(I + Lm Dm)^-1` and
/// `Omega_me = Bm(I + G De)(I + Le De)^-1` against the direct solve.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaReport {
    pub available: bool,
    pub notes: Vec<String>,
    pub omega_eps_mu_norm: f64,
    pub omega_mu_eps_norm: f64,
    /// Substitution form of `A` (control: should match to rounding).
    pub substitution_a_deviation: Option<f64>,
    /// `A = Pe^-1 [(I + Ome^-1 Oem^-1) e + (Oem + Ome^-1) f]`.
    pub combined_a_deviation: Option<f64>,
    /// `A^H = -Pm^-1 [(Ome + Oem^-1) e + Ome Oem f]`.
    pub combined_ah_deviation: Option<f64>,
    /// Block form: lower-left block written `Oem + Ome`.
    pub block_ah_deviation: Option<f64>,
}

fn relative_deviation(x: &[Complex64], reference: &[Complex64]) -> f64 {
    let diff = x
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = norm_inf_vec(reference);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn add_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Purely diagnostic: never used to produce coefficients.
pub fn omega_diagnostic(blocks: &SystemBlocks) -> OmegaReport {
    let mut report = OmegaReport {
        available: false,
        notes: Vec::new(),
        omega_eps_mu_norm: f64::NAN,
        omega_mu_eps_norm: f64::NAN,
        substitution_a_deviation: None,
        combined_a_deviation: None,
        combined_ah_deviation: None,
        block_ah_deviation: None,
    };
    let direct = match solve_direct(blocks) {
        Ok(s) => s,
        Err(e) => {
            report.notes.push(format!("direct solve unavailable: {e}"));
            return report;
        }
    };
    let k = blocks.trunc.block_dim();
    let orders = blocks.trunc.orders();
    let big = blocks.trunc.order() as i32;
    let ref_a: Vec<Complex64> = orders.iter().map(|&n| direct.a[(n + big) as usize]).collect();
    let ref_ah: Vec<Complex64> = orders.iter().map(|&n| direct.ah[(n + big) as usize]).collect();
    let (lu_e, lu_m) = match (
        Lu::factor(&blocks.p_eps(), "I + Lambda_eps D_eps"),
        Lu::factor(&blocks.p_mu(), "I + Lambda_mu D_mu"),
    ) {
        (Ok(e), Ok(m)) => (e, m),
        (Err(e), _) | (_, Err(e)) => {
            report.notes.push(format!("diagonal factor unavailable: {e}"));
            return report;
        }
    };
    report.available = true;
    let m_em = blocks.m_eps_mu();
    let m_me = blocks.m_mu_eps();
    let om_em = m_em.mul_mat(&lu_m.inverse());
    let om_me = m_me.mul_mat(&lu_e.inverse());
    report.omega_eps_mu_norm = om_em.norm_inf();
    report.omega_mu_eps_norm = om_me.norm_inf();

    // substitution form: [I + Pe^-1 Mem Pm^-1 Mme] A = Pe^-1 [e + Oem f]
    let inner = lu_e.solve_matrix(&m_em.mul_mat(&lu_m.solve_matrix(&m_me))).add_identity();
    if let Ok(lu_t) = Lu::factor(&inner, "substitution factor") {
        let a = lu_t.solve(&lu_e.solve(&add_vec(&blocks.e_vec, &om_em.mul_vec(&blocks.f_vec))));
        report.substitution_a_deviation = Some(relative_deviation(&a, &ref_a));
    }

    let inv_em = Lu::factor(&om_em, "Omega_eps_mu");
    let inv_me = Lu::factor(&om_me, "Omega_mu_eps");
    let (inv_em, inv_me) = match (inv_em, inv_me) {
        (Ok(a), Ok(b)) => (a.inverse(), b.inverse()),
        (Err(e), _) | (_, Err(e)) => {
            report
                .notes
                .push(format!("combined expressions need Omega inverses: {e}"));
            return report;
        }
    };
    let e = &blocks.e_vec;
    let f = &blocks.f_vec;
    let eye = ComplexMatrix::identity(k);
    let a43 = lu_e.solve(&add_vec(
        &eye.add(&inv_me.mul_mat(&inv_em)).mul_vec(e),
        &om_em.add(&inv_me).mul_vec(f),
    ));
    let prod = om_me.mul_mat(&om_em);
    let ah44: Vec<Complex64> = lu_m
        .solve(&add_vec(&om_me.add(&inv_em).mul_vec(e), &prod.mul_vec(f)))
        .into_iter()
        .map(|v| -v)
        .collect();
    let ah45: Vec<Complex64> = lu_m
        .solve(&add_vec(&om_em.add(&om_me).mul_vec(e), &prod.mul_vec(f)))
        .into_iter()
        .map(|v| -v)
        .collect();
    report.combined_a_deviation = Some(relative_deviation(&a43, &ref_a));
    report.combined_ah_deviation = Some(relative_deviation(&ah44, &ref_ah));
    report.block_ah_deviation = Some(relative_deviation(&ah45, &ref_ah));
    report
}
