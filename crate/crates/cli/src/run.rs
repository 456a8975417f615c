//! Subcommand bodies.

use std::fmt::Write as _;
use std::path::PathBuf;

use cylgrating::fields::{field_table_order, FieldEvaluator, GridSpec};
use cylgrating::grating::derive_wavenumbers;
use cylgrating::lattice::{check_anomaly, order_branches, AnomalyReport, SchlomilchTable};
use cylgrating::system::{
    assemble, isolated_limit, solve, solve_auto, Route, ScatteringSolution, Truncation, AUTO_EDGE_TARGET,
};
use cylgrating::{Complex64, Error};
use rayon::prelude::*;

use crate::config::{Order, Physics, RouteChoice, RunConfig};
use crate::failure::Failure;
use crate::output::{num, Header, OutputDir, Table};

/// Everything a subcommand needs after flags are merged into the config.
pub struct Context {
    pub config: RunConfig,
    pub physics: Physics,
    pub out: OutputDir,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self, Failure> {
        let physics = config.physics()?;
        let out = OutputDir::create(&config.output.dir)?;
        Ok(Self { config, physics, out })
    }

    fn header(&self, command: &str) -> Header {
        Header::new(command, &self.config.to_toml())
    }

    fn krd(&self) -> Result<f64, Failure> {
        let wn = derive_wavenumbers(&self.physics.grating, &self.physics.incidence)?;
        Ok(wn.kr * self.physics.grating.spacing)
    }

    fn sin_psi(&self) -> f64 {
        self.physics.incidence.sin_psi()
    }

    fn anomaly(&self) -> Result<AnomalyReport, Failure> {
        Ok(check_anomaly(self.krd()?, self.sin_psi(), self.physics.lattice.guard_band))
    }

    /// Lattice sums for `|n| <= n_max`, one order per worker.
    fn table(&self, n_max: usize) -> Result<SchlomilchTable, Failure> {
        Ok(parallel_table(n_max, self.krd()?, self.sin_psi(), &self.physics)?)
    }

    /// Solves at the configured `N` with a table of at least `min_table` orders.
    fn solution(&self, route: Route, min_table: impl Fn(usize) -> Result<usize, Failure>) -> Result<Solved, Failure> {
        let (order, mut notes) = match self.config.truncation.n {
            Order::Fixed(n) => (n, Vec::new()),
            Order::Auto => self.auto_order(route)?,
        };
        let trunc = Truncation::new(order)?;
        let table = self.table(min_table(order)?.max(2 * order))?;
        let solution = solve(&self.physics.grating, &self.physics.incidence, &trunc, &table, route)?;
        notes.extend(solution.warnings.iter().cloned());
        Ok(Solved { solution, table, notes })
    }

    fn auto_order(&self, route: Route) -> Result<(usize, Vec<String>), Failure> {
        let krd = self.krd()?;
        let sin_psi = self.sin_psi();
        let auto = solve_auto(&self.physics.grating, &self.physics.incidence, route, |n_max| {
            parallel_table(n_max, krd, sin_psi, &self.physics)
        })?;
        let history: Vec<String> = auto.history.iter().map(|(n, r)| format!("N={n}: {r:.3e}")).collect();
        log::info!("automatic truncation edge ratios {}", history.join(", "));
        let edge = auto.solution.edge_ratio();
        if edge > AUTO_EDGE_TARGET {
            return Err(Failure::NotConverged(format!(
                "automatic truncation stopped at N = {} with edge ratio {edge:.3e} above {AUTO_EDGE_TARGET:.0e} ({})",
                auto.solution.order(),
                history.join(", ")
            )));
        }
        let note = format!("automatic truncation: {}", history.join(", "));
        Ok((auto.solution.order(), vec![note]))
    }
}

struct Solved {
    solution: ScatteringSolution,
    table: SchlomilchTable,
    notes: Vec<String>,
}

pub fn parallel_table(n_max: usize, krd: f64, sin_psi: f64, physics: &Physics) -> cylgrating::Result<SchlomilchTable> {
    let opts = &physics.lattice;
    let report = check_anomaly(krd, sin_psi, opts.guard_band);
    if report.is_anomalous {
        return Err(Error::Anomaly(report));
    }
    let branches = (0..=n_max as u32)
        .into_par_iter()
        .map(|m| order_branches(m, krd, sin_psi, opts))
        .collect::<cylgrating::Result<Vec<_>>>()?;
    SchlomilchTable::from_branches(n_max, krd, sin_psi, opts, &branches)
}

fn routes(choice: RouteChoice) -> Vec<Route> {
    match choice {
        RouteChoice::Direct => vec![Route::Direct],
        RouteChoice::Schur => vec![Route::Schur],
        RouteChoice::Oracle => vec![Route::Oracle],
        RouteChoice::All => vec![Route::Direct, Route::Schur, Route::Oracle],
    }
}

fn coefficient_table(sol: &ScatteringSolution) -> Table {
    let mut t = Table::new(&["n", "re_A", "im_A", "re_AH", "im_AH", "abs_A", "abs_AH"]);
    for n in sol.orders() {
        let (a, ah) = (sol.a_at(n), sol.ah_at(n));
        t.row([n.to_string(), num(a.re), num(a.im), num(ah.re), num(ah.im), num(a.norm()), num(ah.norm())]);
    }
    t
}

/// Element-wise relative deviation. Elements whose reference is below `1e-12`
/// of their family maximum (symmetry zeros) are measured against that maximum.
pub fn route_deviation(x: &ScatteringSolution, reference: &ScatteringSolution) -> f64 {
    let (max_a, max_ah) = (reference.max_abs_a(), reference.max_abs_ah());
    let rel = |u: Complex64, v: Complex64, max: f64| {
        let d = (u - v).norm();
        if d == 0.0 {
            0.0
        } else if v.norm() < 1e-12 * max {
            d / max
        } else {
            d / v.norm()
        }
    };
    reference
        .orders()
        .map(|n| rel(x.a_at(n), reference.a_at(n), max_a).max(rel(x.ah_at(n), reference.ah_at(n), max_ah)))
        .fold(0.0, f64::max)
}

fn anomaly_lines(report: &AnomalyReport) -> Vec<String> {
    let mut lines = vec![format!(
        "anomaly distance: plus branch {:.6e}, minus branch {:.6e} (guard band {:.1e})",
        report.plus_branch, report.minus_branch, report.guard_band
    )];
    if report.is_near() {
        lines.push("warning: near a Rayleigh anomaly; lattice sums converge slowly here".into());
    }
    lines
}

pub fn solve_cmd(ctx: &Context) -> Result<String, Failure> {
    let choice = ctx.config.output.route;
    let list = routes(choice);
    let first = ctx.solution(list[0], |_| Ok(0))?;
    let mut header = ctx.header("solve");
    let mut summary = String::new();
    let sol = &first.solution;
    let _ = writeln!(summary, "N = {}", sol.order());
    let _ = writeln!(summary, "lattice table |n| <= {}, max est_error {:.3e}", first.table.n_max(), first.table.max_est_error());
    for l in anomaly_lines(first.table.anomaly()) {
        let _ = writeln!(summary, "{l}");
    }
    let _ = writeln!(summary, "route {}: residual {:.3e}, edge ratio {:.3e}", sol.route.name(), sol.residual_norm, sol.edge_ratio());
    header.push(format!("N = {}, route = {}", sol.order(), choice));
    ctx.out.write_csv("coefficients.csv", &header, coefficient_table(sol))?;

    let trunc = Truncation::new(sol.order())?;
    for &route in &list[1..] {
        let other = solve(&ctx.physics.grating, &ctx.physics.incidence, &trunc, &first.table, route)?;
        let dev = route_deviation(&other, sol);
        let _ = writeln!(
            summary,
            "route {}: residual {:.3e}, max relative deviation from {} {dev:.3e}",
            route.name(),
            other.residual_norm,
            sol.route.name()
        );
        let mut h = ctx.header("solve");
        h.push(format!("N = {}, route = {}", other.order(), route.name()));
        ctx.out.write_csv(&format!("coefficients_{}.csv", route.name()), &h, coefficient_table(&other))?;
    }
    for w in &first.notes {
        log::warn!("{w}");
        let _ = writeln!(summary, "note: {w}");
    }

    if ctx.config.output.dump_matrix {
        let blocks = assemble(&ctx.physics.grating, &ctx.physics.incidence, &trunc, &first.table)?;
        let m = blocks.full_matrix();
        let mut t = Table::new(&["row", "col", "re", "im"]);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                t.row([i.to_string(), j.to_string(), num(v.re), num(v.im)]);
            }
        }
        let mut h = ctx.header("solve --dump-matrix");
        let orders: Vec<String> = trunc.orders().iter().map(|n| n.to_string()).collect();
        h.push(format!("unknowns: A_n then A^H_n, each for n = {}", orders.join(" ")));
        ctx.out.write_csv("matrix.csv", &h, t)?;
    }
    ctx.out.write_text("summary.txt", &header, &summary)?;
    Ok(summary)
}

pub fn converge_cmd(ctx: &Context, n_list: Option<Vec<usize>>) -> Result<String, Failure> {
    let list = n_list
        .or_else(|| ctx.config.converge.as_ref().map(|c| c.n_list.clone()))
        .ok_or_else(|| Failure::Config("no N list: pass --n-list or set converge.n_list".into()))?;
    if list.is_empty() || list.contains(&0) {
        return Err(Failure::Config("N list must hold positive orders".into()));
    }
    let route = match ctx.config.output.route {
        RouteChoice::All => Route::Direct,
        _ => routes(ctx.config.output.route)[0],
    };
    let top = *list.iter().max().unwrap();
    let table = ctx.table(2 * top)?;
    let mut coeffs = Table::new(&["N", "n", "re_A", "im_A", "re_AH", "im_AH", "abs_A", "abs_AH"]);
    let mut diffs = Table::new(&["N_prev", "N", "max_abs_diff", "edge_ratio"]);
    let mut summary = String::new();
    let mut prev: Option<ScatteringSolution> = None;
    for &n in &list {
        let sol = solve(&ctx.physics.grating, &ctx.physics.incidence, &Truncation::new(n)?, &table, route)?;
        for k in sol.orders() {
            let (a, ah) = (sol.a_at(k), sol.ah_at(k));
            coeffs.row([n.to_string(), k.to_string(), num(a.re), num(a.im), num(ah.re), num(ah.im), num(a.norm()), num(ah.norm())]);
        }
        if let Some(p) = &prev {
            let window = p.order().min(n) as i32;
            let d = (-window..=window)
                .map(|k| (sol.a_at(k) - p.a_at(k)).norm().max((sol.ah_at(k) - p.ah_at(k)).norm()))
                .fold(0.0, f64::max);
            diffs.row([p.order().to_string(), n.to_string(), num(d), num(sol.edge_ratio())]);
            let _ = writeln!(summary, "N {} -> {n}: max |difference| {d:.3e}, edge ratio {:.3e}", p.order(), sol.edge_ratio());
        } else {
            let _ = writeln!(summary, "N {n}: edge ratio {:.3e}", sol.edge_ratio());
        }
        prev = Some(sol);
    }
    let mut header = ctx.header("converge");
    header.push(format!("route = {}, N list = {list:?}", route.name()));
    ctx.out.write_csv("convergence.csv", &header, coeffs)?;
    ctx.out.write_csv("differences.csv", &header, diffs)?;
    Ok(summary)
}

pub fn schlomilch_cmd(ctx: &Context, n_max: Option<usize>) -> Result<String, Failure> {
    let n_max = n_max.unwrap_or(match ctx.config.truncation.n {
        Order::Fixed(n) => 2 * n,
        Order::Auto => 16,
    });
    let report = ctx.anomaly()?;
    let table = ctx.table(n_max)?;
    let mut t = Table::new(&["n", "re", "im", "est_error", "terms_used"]);
    for (n, e) in table.iter() {
        t.row([n.to_string(), num(e.value.re), num(e.value.im), num(e.est_error), e.terms_used.to_string()]);
    }
    let mut header = ctx.header("schlomilch");
    header.push(format!("krd = {:e}, sin_psi = {:e}, n_max = {n_max}", table.krd(), table.sin_psi()));
    let lines = anomaly_lines(&report);
    for l in &lines {
        header.push(l.clone());
    }
    ctx.out.write_csv("lattice.csv", &header, t)?;
    let mut summary = lines.join("\n");
    let _ = write!(summary, "\nlattice sums |n| <= {n_max}, max est_error {:.3e}\n", table.max_est_error());
    Ok(summary)
}

pub fn fieldmap_cmd(ctx: &Context, grid: GridSpec) -> Result<String, Failure> {
    grid.validate().map_err(Failure::config_field("fieldmap"))?;
    let (cfg, inc) = (ctx.physics.grating, ctx.physics.incidence);
    let route = match ctx.config.output.route {
        RouteChoice::All => Route::Direct,
        r => routes(r)[0],
    };
    let solved = ctx.solution(route, |n| Ok(field_table_order(&cfg, &inc, n)?))?;
    let eval = FieldEvaluator::new(&cfg, &inc, &solved.solution, &solved.table)?;
    let rows = (0..grid.ny)
        .into_par_iter()
        .map(|j| eval.grid_row(&grid, j))
        .collect::<cylgrating::Result<Vec<_>>>()?;
    let map = FieldEvaluator::finish_grid(rows);
    let mut t = Table::new(&["x", "y", "z", "re_Ez", "im_Ez", "re_Hz", "im_Hz"]);
    for s in &map.samples {
        t.row([num(s.x), num(s.y), num(s.z), num(s.ez.re), num(s.ez.im), num(s.hz.re), num(s.hz.im)]);
    }
    let mut header = ctx.header("fieldmap");
    header.push(format!(
        "N = {}, route = {}, region x [{:e}, {:e}] y [{:e}, {:e}] z {:e}, {} x {} points",
        solved.solution.order(),
        route.name(),
        grid.x0,
        grid.x1,
        grid.y0,
        grid.y1,
        grid.z,
        grid.nx,
        grid.ny
    ));
    for w in map.warnings.iter().chain(&solved.notes) {
        log::warn!("{w}");
        header.push(format!("warning: {w}"));
    }
    ctx.out.write_csv("fields.csv", &header, t)?;
    let mut summary = format!(
        "{} points evaluated, {} inside cylinders, {} out of reach\n",
        map.samples.len(),
        map.skipped_inside,
        map.skipped_out_of_reach
    );
    for w in &map.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    Ok(summary)
}

/// Tolerance for the isolated-cylinder comparison.
pub const ISOLATED_TOL: f64 = 1e-12;

pub fn isolated_check_cmd(ctx: &Context) -> Result<String, Failure> {
    let (cfg, inc) = (ctx.physics.grating, ctx.physics.incidence);
    let n = match ctx.config.truncation.n {
        Order::Fixed(n) => n,
        Order::Auto => 8,
    };
    let trunc = Truncation::new(n)?;
    let table = SchlomilchTable::zeroed(2 * n, ctx.krd()?, ctx.sin_psi());
    let mut summary = String::new();
    let mut worst = 0.0_f64;
    let mut t = Table::new(&["route", "n", "re_A", "im_A", "re_A_iso", "im_A_iso", "re_AH", "im_AH", "re_AH_iso", "im_AH_iso"]);
    for route in routes(ctx.config.output.route) {
        let sol = solve(&cfg, &inc, &trunc, &table, route)?;
        let mut route_worst = 0.0_f64;
        for k in sol.orders() {
            let (a_iso, ah_iso) = isolated_limit(&cfg, &inc, k)?;
            let (a, ah) = (sol.a_at(k), sol.ah_at(k));
            let rel = |u: Complex64, v: Complex64| {
                let d = (u - v).norm();
                if d == 0.0 {
                    0.0
                } else {
                    d / v.norm().max(f64::MIN_POSITIVE)
                }
            };
            route_worst = route_worst.max(rel(a, a_iso)).max(rel(ah, ah_iso));
            t.row([
                route.name().to_string(),
                k.to_string(),
                num(a.re),
                num(a.im),
                num(a_iso.re),
                num(a_iso.im),
                num(ah.re),
                num(ah.im),
                num(ah_iso.re),
                num(ah_iso.im),
            ]);
        }
        let _ = writeln!(summary, "route {}: max relative deviation from closed form {route_worst:.3e}", route.name());
        worst = worst.max(route_worst);
    }
    let mut header = ctx.header("isolated-check");
    header.push(format!("N = {n}, lattice sums forced to zero"));
    ctx.out.write_csv("isolated.csv", &header, t)?;
    if worst > ISOLATED_TOL {
        return Err(Failure::CheckFailed(format!(
            "isolated-cylinder check: deviation {worst:.3e} exceeds {ISOLATED_TOL:.0e}\n{summary}"
        )));
    }
    let _ = writeln!(summary, "isolated-cylinder check passed (tolerance {ISOLATED_TOL:.0e})");
    Ok(summary)
}

/// Parses `x0,x1,y0,y1`.
pub fn parse_region(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected four numbers x0,x1,y0,y1".to_string())
}

/// Parses `n` or `nx,ny`.
pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [n] => Ok((n, n)),
        [nx, ny] => Ok((nx, ny)),
        _ => Err("expected n or nx,ny".into()),
    }
}

/// Output directory override helper.
pub fn with_out(mut config: RunConfig, out: Option<PathBuf>) -> RunConfig {
    if let Some(dir) = out {
        config.output.dir = dir;
    }
    config
}
