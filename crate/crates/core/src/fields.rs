//! Incident and exterior axial fields.
//!
//! Points are given in the polar frame `(R_s, phi_s)` of cylinder `s`, whose
//! axis sits at `(x, y) = (0, s d)`. The exterior expansion about cylinder `s`
//! represents the other cylinders' outgoing waves through the regular sums
//! `Q_n J_n(kr R_s)`, which converge only for `R_s < d`; evaluation is limited
//! to `a < R_s <= FIELD_RADIUS_FRACTION * d`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use libm::{atan2, ceil, cos, hypot, log, round, sin};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grating::{derive_wavenumbers, incident_coefficient, DerivedWavenumbers, GratingConfig, IncidentWave};
use crate::lattice::SchlomilchTable;
use crate::special::{bessel_j_orders, hankel1_orders};
use crate::system::ScatteringSolution;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `R_s / d` accepted by [`exterior_field`].
pub const FIELD_RADIUS_FRACTION: f64 = 0.75;

/// Point in the frame of cylinder `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    pub s: i64,
    pub rs: f64,
    pub phis: f64,
    pub z: f64,
}

impl CylPoint {
    /// Frame of the cylinder nearest to `(x, y)`.
    pub fn nearest(x: f64, y: f64, z: f64, spacing: f64) -> Self {
        let s = round(y / spacing);
        let dy = y - s * spacing;
        Self {
            s: s as i64,
            rs: hypot(x, dy),
            phis: atan2(dy, x),
            z,
        }
    }

    /// Frame of cylinder `s`.
    pub fn in_frame(x: f64, y: f64, z: f64, spacing: f64, s: i64) -> Self {
        let dy = y - s as f64 * spacing;
        Self {
            s,
            rs: hypot(x, dy),
            phis: atan2(dy, x),
            z,
        }
    }
}

/// `Q_n` and `Q_n^H` for `|n| <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct QSums {
    order: usize,
    q: Vec<Complex64>,
    qh: Vec<Complex64>,
}

impl QSums {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn q(&self, n: i32) -> Complex64 {
        self.q[(n + self.order as i32) as usize]
    }

    pub fn qh(&self, n: i32) -> Complex64 {
        self.qh[(n + self.order as i32) as usize]
    }
}

/// `Q_n = J_0 A_n + sum_{m != n} J_{n-m} A_m`, same form for `Q_n^H`, over the
/// solution's window.
pub fn q_sums(solution: &ScatteringSolution, table: &SchlomilchTable) -> Result<QSums> {
    q_sums_to(solution, table, solution.order())
}

/// [`q_sums`] for `|n| <= order`, which may exceed the solution window; the
/// table must then cover `order + N`.
pub fn q_sums_to(solution: &ScatteringSolution, table: &SchlomilchTable, order: usize) -> Result<QSums> {
    let big = solution.order();
    table.require(order + big)?;
    let l = order as i32;
    let mut q = Vec::with_capacity(2 * order + 1);
    let mut qh = Vec::with_capacity(2 * order + 1);
    for n in -l..=l {
        let (mut acc, mut acc_h) = (ZERO, ZERO);
        for m in solution.orders() {
            let lat = table.value(n - m);
            acc += lat * solution.a_at(m);
            acc_h += lat * solution.ah_at(m);
        }
        q.push(acc);
        qh.push(acc_h);
    }
    Ok(QSums { order, q, qh })
}

/// `(J_0..J_L)` extended to negative orders by parity, indexed `n + L`.
fn j_window(l: usize, x: f64) -> Result<Vec<f64>> {
    let pos = bessel_j_orders(l as u32, x)?;
    Ok((-(l as i32)..=l as i32)
        .map(|n| {
            let v = pos[n.unsigned_abs() as usize];
            if n < 0 && n % 2 != 0 {
                -v
            } else {
                v
            }
        })
        .collect())
}

fn h_window(l: usize, x: f64) -> Result<Vec<Complex64>> {
    let pos = hankel1_orders(l as u32, x)?;
    Ok((-(l as i32)..=l as i32)
        .map(|n| {
            let v = pos[n.unsigned_abs() as usize];
            if n < 0 && n % 2 != 0 {
                -v
            } else {
                v
            }
        })
        .collect())
}

/// `e^{i kr s d sin psi} e^{-i kz z}`.
fn frame_phase(point: &CylPoint, cfg: &GratingConfig, inc: &IncidentWave, wn: &DerivedWavenumbers) -> Complex64 {
    let array = wn.kr * point.s as f64 * cfg.spacing * inc.sin_psi();
    Complex64::from_polar(1.0, array - wn.kz * point.z)
}

/// `e^{i n (phi + pi/2)}` for `n = -L..L`.
fn angular_window(l: usize, phis: f64) -> Vec<Complex64> {
    let base = phis + core::f64::consts::FRAC_PI_2;
    (-(l as i32)..=l as i32)
        .map(|n| {
            let t = n as f64 * base;
            Complex64::new(cos(t), sin(t))
        })
        .collect()
}

/// Incident `E_z` as the cylindrical-harmonic partial sum over `|n| <= n_terms`.
pub fn incident_field(
    point: &CylPoint,
    cfg: &GratingConfig,
    inc: &IncidentWave,
    wn: &DerivedWavenumbers,
    n_terms: usize,
) -> Result<Complex64> {
    let jn = j_window(n_terms, wn.kr * point.rs)?;
    let ang = angular_window(n_terms, point.phis);
    let l = n_terms as i32;
    let sum = (-l..=l).fold(ZERO, |acc, n| {
        let k = (n + l) as usize;
        acc + incident_coefficient(n, inc) * jn[k] * ang[k]
    });
    Ok(sum * frame_phase(point, cfg, inc, wn))
}

/// Plane-wave closed form of [`incident_field`].
pub fn incident_plane_wave(point: &CylPoint, cfg: &GratingConfig, inc: &IncidentWave, wn: &DerivedWavenumbers) -> Complex64 {
    let phase = wn.kr * point.rs * (inc.cos_psi() * cos(point.phis) + inc.sin_psi() * sin(point.phis));
    Complex64::from_polar(inc.sin_theta() * inc.e0v, phase) * frame_phase(point, cfg, inc, wn)
}

/// Number of orders kept in the exterior sums at radius `rs`.
pub fn field_order(rs: f64, spacing: f64, kr: f64, n: usize) -> usize {
    let bessel = ceil(kr * rs) as usize + 20;
    let lattice = if rs > 0.0 && rs < spacing {
        ceil(30.0 / log(spacing / rs)) as usize
    } else {
        usize::MAX
    };
    n.max(bessel).max(lattice)
}

/// Table order a [`FieldEvaluator`] needs for a solution of window `n`.
pub fn field_table_order(cfg: &GratingConfig, inc: &IncidentWave, n: usize) -> Result<usize> {
    let wn = derive_wavenumbers(cfg, inc)?;
    Ok(field_order(FIELD_RADIUS_FRACTION * cfg.spacing, cfg.spacing, wn.kr, n) + n)
}

fn check_exterior(point: &CylPoint, cfg: &GratingConfig) -> Result<()> {
    if !(point.rs > cfg.radius) {
        return Err(Error::FieldDomain {
            r: point.rs,
            reason: "point lies inside or on the cylinder",
        });
    }
    if point.rs > FIELD_RADIUS_FRACTION * cfg.spacing {
        return Err(Error::FieldDomain {
            r: point.rs,
            reason: "the regular expansion about this cylinder does not reach the point",
        });
    }
    Ok(())
}

/// Exterior `(E_z, H_z)`: per order `(E_n + Q_n) J_n + A_n H_n` and
/// `Q^H_n J_n + A^H_n H_n`, summed with `e^{i n (phi + pi/2)}`.
pub fn exterior_field(
    point: &CylPoint,
    solution: &ScatteringSolution,
    qsums: &QSums,
    cfg: &GratingConfig,
    inc: &IncidentWave,
    wn: &DerivedWavenumbers,
) -> Result<(Complex64, Complex64)> {
    check_exterior(point, cfg)?;
    let big = solution.order();
    let l = field_order(point.rs, cfg.spacing, wn.kr, big);
    if l > qsums.order() {
        return Err(Error::TableCoverage {
            available: qsums.order(),
            required: l,
        });
    }
    let x = wn.kr * point.rs;
    let jn = j_window(l, x)?;
    let hn = h_window(big, x)?;
    let ang = angular_window(l, point.phis);
    let li = l as i32;
    let (mut ez, mut hz) = (ZERO, ZERO);
    for n in -li..=li {
        let k = (n + li) as usize;
        let mut e = (incident_coefficient(n, inc) + qsums.q(n)) * jn[k];
        let mut h = qsums.qh(n) * jn[k];
        if n.unsigned_abs() as usize <= big {
            let hv = hn[(n + big as i32) as usize];
            e += solution.a_at(n) * hv;
            h += solution.ah_at(n) * hv;
        }
        ez += e * ang[k];
        hz += h * ang[k];
    }
    let phase = frame_phase(point, cfg, inc, wn);
    Ok((ez * phase, hz * phase))
}

/// Outgoing part radiated by cylinder `s` alone, `sum A_n H_n e^{i n (phi + pi/2)}`
/// (and the `A^H` counterpart), valid at any `R_s > a`.
pub fn outgoing_field(
    point: &CylPoint,
    solution: &ScatteringSolution,
    cfg: &GratingConfig,
    inc: &IncidentWave,
    wn: &DerivedWavenumbers,
) -> Result<(Complex64, Complex64)> {
    if !(point.rs > cfg.radius) {
        return Err(Error::FieldDomain {
            r: point.rs,
            reason: "point lies inside or on the cylinder",
        });
    }
    let big = solution.order();
    let hn = h_window(big, wn.kr * point.rs)?;
    let ang = angular_window(big, point.phis);
    let (mut ez, mut hz) = (ZERO, ZERO);
    for (k, n) in solution.orders().enumerate() {
        ez += solution.a_at(n) * hn[k] * ang[k];
        hz += solution.ah_at(n) * hn[k] * ang[k];
    }
    let phase = frame_phase(point, cfg, inc, wn);
    Ok((ez * phase, hz * phase))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub s: i64,
    pub rs: f64,
    pub phis: f64,
    pub ez: Complex64,
    pub hz: Complex64,
}

/// Rectangular region in the x-y plane at fixed `z`, sampled on an
/// `nx` by `ny` lattice including both edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
}

impl GridSpec {
    fn coord(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        Self::coord(self.x0, self.x1, i, self.nx)
    }

    pub fn y(&self, j: usize) -> f64 {
        Self::coord(self.y0, self.y1, j, self.ny)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1, self.z].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig {
                field: "region",
                reason: "bounds must be finite".into(),
            });
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidConfig {
                field: "resolution",
                reason: "need at least one sample per axis".into(),
            });
        }
        Ok(())
    }
}

/// Samples in row-major order (`y` outer, `x` inner) plus skipped-point notes.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub samples: Vec<FieldSample>,
    pub skipped_inside: usize,
    pub skipped_out_of_reach: usize,
    pub warnings: Vec<String>,
}

/// Evaluates exterior fields anywhere within reach of some cylinder, using
/// the nearest cylinder as reference.
#[derive(Debug, Clone)]
pub struct FieldEvaluator<'a> {
    cfg: GratingConfig,
    inc: IncidentWave,
    wn: DerivedWavenumbers,
    solution: &'a ScatteringSolution,
    qsums: QSums,
}

impl<'a> FieldEvaluator<'a> {
    /// `table` must cover [`field_table_order`].
    pub fn new(
        cfg: &GratingConfig,
        inc: &IncidentWave,
        solution: &'a ScatteringSolution,
        table: &SchlomilchTable,
    ) -> Result<Self> {
        let wn = derive_wavenumbers(cfg, inc)?;
        let l = field_order(FIELD_RADIUS_FRACTION * cfg.spacing, cfg.spacing, wn.kr, solution.order());
        let qsums = q_sums_to(solution, table, l)?;
        Ok(Self {
            cfg: *cfg,
            inc: *inc,
            wn,
            solution,
            qsums,
        })
    }

    pub fn wavenumbers(&self) -> &DerivedWavenumbers {
        &self.wn
    }

    pub fn qsums(&self) -> &QSums {
        &self.qsums
    }

    pub fn at_point(&self, point: &CylPoint) -> Result<(Complex64, Complex64)> {
        exterior_field(point, self.solution, &self.qsums, &self.cfg, &self.inc, &self.wn)
    }

    pub fn sample(&self, x: f64, y: f64, z: f64) -> Result<FieldSample> {
        let p = CylPoint::nearest(x, y, z, self.cfg.spacing);
        let (ez, hz) = self.at_point(&p)?;
        Ok(FieldSample {
            x,
            y,
            z,
            s: p.s,
            rs: p.rs,
            phis: p.phis,
            ez,
            hz,
        })
    }

    /// Evaluates one grid row (fixed `j`), returning samples and skip counts.
    pub fn grid_row(&self, grid: &GridSpec, j: usize) -> Result<(Vec<FieldSample>, usize, usize)> {
        let y = grid.y(j);
        let mut out = Vec::with_capacity(grid.nx);
        let (mut inside, mut reach) = (0, 0);
        for i in 0..grid.nx {
            match self.sample(grid.x(i), y, grid.z) {
                Ok(s) => out.push(s),
                Err(Error::FieldDomain { r, .. }) if r <= self.cfg.radius => inside += 1,
                Err(Error::FieldDomain { .. }) => reach += 1,
                Err(e) => return Err(e),
            }
        }
        Ok((out, inside, reach))
    }

    pub fn finish_grid(rows: Vec<(Vec<FieldSample>, usize, usize)>) -> FieldGrid {
        let mut grid = FieldGrid {
            samples: Vec::new(),
            skipped_inside: 0,
            skipped_out_of_reach: 0,
            warnings: Vec::new(),
        };
        for (samples, inside, reach) in rows {
            grid.samples.extend(samples);
            grid.skipped_inside += inside;
            grid.skipped_out_of_reach += reach;
        }
        if grid.skipped_inside > 0 {
            grid.warnings
                .push(format!("{} points inside cylinders skipped", grid.skipped_inside));
        }
        if grid.skipped_out_of_reach > 0 {
            grid.warnings.push(format!(
                "{} points farther than {FIELD_RADIUS_FRACTION} d from every cylinder axis skipped",
                grid.skipped_out_of_reach
            ));
        }
        if grid.samples.is_empty() {
            grid.warnings.push("region contains no evaluable exterior points".into());
        }
        grid
    }

    pub fn grid(&self, grid: &GridSpec) -> Result<FieldGrid> {
        grid.validate()?;
        let rows = (0..grid.ny)
            .map(|j| self.grid_row(grid, j))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::finish_grid(rows))
    }
}

/// One-shot grid evaluation.
pub fn field_grid(
    grid: &GridSpec,
    cfg: &GratingConfig,
    inc: &IncidentWave,
    solution: &ScatteringSolution,
    table: &SchlomilchTable,
) -> Result<FieldGrid> {
    FieldEvaluator::new(cfg, inc, solution, table)?.grid(grid)
}
