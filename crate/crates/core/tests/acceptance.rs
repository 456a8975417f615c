//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use common::{brute_lattice, crel, desk, max_rel_gap, rel, table_for, trunc, Family};
use cylgrating::fields::*;
use cylgrating::grating::*;
use cylgrating::lattice::*;
use cylgrating::linalg::{norm_inf_vec, residual};
use cylgrating::special::*;
use cylgrating::system::*;
use cylgrating::{Complex64, Error};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn routes(cfg: &GratingConfig, inc: &IncidentWave, n: usize) -> [ScatteringSolution; 3] {
    let t = table_for(cfg, inc, n);
    let tr = trunc(n);
    let blocks = assemble(cfg, inc, &tr, &t).unwrap();
    [
        solve_direct(&blocks).unwrap(),
        solve_schur(&blocks).unwrap(),
        oracle_full(cfg, inc, &tr, &t).unwrap(),
    ]
}

fn route_equivalence() -> Outcome {
    let start = Instant::now();
    let (cfg, inc) = desk();
    let [d, s, o] = routes(&cfg, &inc, 8);
    let secs = start.elapsed().as_secs_f64();
    // A_0^H is zero by mirror symmetry at phi = 0; a relative gap is
    // meaningless there, so it is held to an absolute floor instead.
    let skip = [(Family::Magnetic, 0)];
    let gap = max_rel_gap(&s, &d, &skip).max(max_rel_gap(&o, &d, &skip));
    let ah0 = [&d, &s, &o].iter().map(|x| x.ah_at(0).norm()).fold(0.0, f64::max) / d.max_abs_ah();
    check(
        gap <= 1e-10 && ah0 <= 1e-12 && secs < 5.0,
        format!(
            "max rel gap {gap:.2e} (A_0 {:.2e}), |A_0^H|/max|A^H| {ah0:.1e}, {secs:.3} s",
            crel(s.a_at(0), d.a_at(0)).max(crel(o.a_at(0), d.a_at(0)))
        ),
    )
}

fn random_config(rng: &mut StdRng) -> (GratingConfig, IncidentWave) {
    loop {
        let a = 0.01;
        let cfg = GratingConfig {
            radius: a,
            spacing: a * rng.gen_range(2.5..6.0),
            eps_r: rng.gen_range(1.2..6.0),
            mu_r: rng.gen_range(1.0..2.0),
            k0: rng.gen_range(0.2..1.0) / a,
        };
        let inc = IncidentWave {
            e0v: rng.gen_range(0.5..2.0),
            theta_i: rng.gen_range(20f64..89.0).to_radians(),
            phi_i: rng.gen_range(-60f64..60.0).to_radians(),
        };
        let wn = derive_wavenumbers(&cfg, &inc).unwrap();
        if check_anomaly(wn.kr * cfg.spacing, inc.sin_psi(), 0.0).min_distance() > 0.02 {
            return (cfg, inc);
        }
    }
}

fn reconstruction() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let (mut gap, mut res) = (0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let (cfg, inc) = random_config(&mut rng);
        let t = table_for(&cfg, &inc, 8);
        let tr = trunc(8);
        let d = solve_direct(&assemble(&cfg, &inc, &tr, &t).unwrap()).unwrap();
        let o = oracle_full(&cfg, &inc, &tr, &t).unwrap();
        gap = gap.max(max_rel_gap(&d, &o, &[]));
        let (m, rhs, _) = oracle_system(&cfg, &inc, &tr, &t).unwrap();
        let orders = tr.full_orders();
        let x: Vec<Complex64> = orders.iter().map(|&k| d.a_at(k)).chain(orders.iter().map(|&k| d.ah_at(k))).collect();
        let scale = m.norm_inf() * norm_inf_vec(&x) + norm_inf_vec(&rhs);
        res = res.max(norm_inf_vec(&residual(&m, &x, &rhs)) / scale);
    }
    check(
        gap <= 1e-9 && res <= 1e-9,
        format!("10 configs: max rel gap {gap:.2e}, scaled pre-elimination residual {res:.2e}"),
    )
}

fn decoupling() -> Outcome {
    let (cfg, mut inc) = desk();
    inc.theta_i = FRAC_PI_2;
    let wn = derive_wavenumbers(&cfg, &inc).unwrap();
    let blocks = assemble(&cfg, &inc, &trunc(8), &table_for(&cfg, &inc, 8)).unwrap();
    let b_zero = blocks.b_eps.iter().chain(&blocks.b_mu).all(|b| b.norm() == 0.0);
    let mut worst = 0.0_f64;
    for sol in routes(&cfg, &inc, 8) {
        worst = worst.max(sol.max_abs_ah() / sol.max_abs_a().max(1.0));
    }
    check(
        wn.f == 0.0 && b_zero && worst <= 1e-12,
        format!("F = {}, all b_n zero: {b_zero}, max|A^H|/max(1,max|A|) {worst:.1e}", wn.f),
    )
}

fn transparent() -> Outcome {
    let (mut cfg, inc) = desk();
    cfg.eps_r = 1.0;
    cfg.mu_r = 1.0;
    let mut coeff = 0.0_f64;
    for sol in routes(&cfg, &inc, 8) {
        coeff = coeff.max(sol.max_abs_a()).max(sol.max_abs_ah());
    }
    let wn = derive_wavenumbers(&cfg, &inc).unwrap();
    let order = field_table_order(&cfg, &inc, 8).unwrap();
    let table = build_table(order, wn.kr * cfg.spacing, inc.sin_psi(), &LatticeSumOptions::default()).unwrap();
    let sol = solve(&cfg, &inc, &trunc(8), &table, Route::Direct).unwrap();
    let d = cfg.spacing;
    let grid = GridSpec {
        x0: -0.7 * d,
        x1: 0.7 * d,
        y0: -0.7 * d,
        y1: 0.7 * d,
        nx: 21,
        ny: 21,
        z: 0.0,
    };
    let out = field_grid(&grid, &cfg, &inc, &sol, &table).unwrap();
    let mut field = 0.0_f64;
    for smp in &out.samples {
        let p = CylPoint::nearest(smp.x, smp.y, smp.z, d);
        field = field.max((smp.ez - incident_plane_wave(&p, &cfg, &inc, &wn)).norm()).max(smp.hz.norm());
    }
    check(
        coeff <= 1e-14 && field <= 1e-10 && !out.samples.is_empty(),
        format!(
            "max coefficient {coeff:.1e}, max field deviation {field:.1e} over {} exterior points ({} inside skipped)",
            out.samples.len(),
            out.skipped_inside
        ),
    )
}

fn isolated() -> Outcome {
    let (cfg, inc) = desk();
    let wn = derive_wavenumbers(&cfg, &inc).unwrap();
    let t = SchlomilchTable::zeroed(16, wn.kr * cfg.spacing, inc.sin_psi());
    let tr = trunc(8);
    let blocks = assemble(&cfg, &inc, &tr, &t).unwrap();
    let mut worst = 0.0_f64;
    let mut ok = true;
    for sol in [solve_direct(&blocks).unwrap(), solve_schur(&blocks).unwrap(), oracle_full(&cfg, &inc, &tr, &t).unwrap()] {
        for n in -8..=8 {
            let (a, ah) = isolated_limit(&cfg, &inc, n).unwrap();
            worst = worst.max(crel(sol.a_at(n), a));
            if ah.norm() > 0.0 {
                worst = worst.max(crel(sol.ah_at(n), ah));
            } else {
                ok &= sol.ah_at(n).norm() == 0.0;
            }
        }
    }
    check(ok && worst <= 1e-12, format!("max rel gap to closed form {worst:.2e} over |n| <= 8, all routes"))
}

fn symmetry() -> Outcome {
    let (cfg, mut inc) = desk();
    inc.phi_i = PI / 6.0;
    let back_inc = inc.mirrored();
    let fwd = solve(&cfg, &inc, &trunc(8), &table_for(&cfg, &inc, 8), Route::Direct).unwrap();
    let back = solve(&cfg, &back_inc, &trunc(8), &table_for(&cfg, &back_inc, 8), Route::Direct).unwrap();
    let mut worst = 0.0_f64;
    for n in -8..=8 {
        worst = worst.max(crel(back.a_at(-n), fwd.a_at(n))).max(crel(back.ah_at(-n), -fwd.ah_at(n)));
    }
    check(worst <= 1e-10, format!("max rel deviation {worst:.2e}"))
}

fn schlomilch() -> Outcome {
    let start = Instant::now();
    let opts = LatticeSumOptions::default();
    let mut worst = 0.0_f64;
    for sp in [0.0, 0.3] {
        for n in 0..=2 {
            let got = schlomilch_sum(n, 10.0, sp, &opts).map_err(|e| e.to_string())?;
            worst = worst.max((got.value - brute_lattice(n, 10.0, sp, 1_000_000)).norm());
        }
    }
    let zeros = [1, 3, -5].iter().all(|&n| schlomilch_sum(n, 10.0, 0.0, &opts).unwrap().value == Complex64::new(0.0, 0.0));
    // kr d (1 + sin psi) / 2 pi = 2 exactly, then nudged inside and outside the band
    let sp = 0.2;
    let krd = 4.0 * PI / (1.0 + sp);
    let fires = |k: f64| matches!(schlomilch_sum(0, k, sp, &opts), Err(Error::Anomaly(_)));
    let inside = fires(krd) && fires(krd * (1.0 + 0.5e-4 / 2.0));
    let outside = !fires(krd * (1.0 + 2e-4 / 2.0));
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-6 && zeros && inside && outside && secs < 30.0,
        format!("max |accelerated - brute| {worst:.1e}, odd zeros exact: {zeros}, anomaly fires in band: {inside}, quiet outside: {outside}, {secs:.2} s"),
    )
}

fn special_functions() -> Outcome {
    let xs = [1e-3, 0.01, 0.1, 0.5, 1.0, 1.7, 3.1, 5.0, 10.0, 24.9, 25.0, 31.4, 50.0, 100.0, 1000.0];
    let mut wr = 0.0_f64;
    for &x in &xs {
        for n in [-7, -1, 0, 1, 2, 5, 12, 30] {
            let v = eval_pair(n, x).map_err(|e| e.to_string())?;
            wr = wr.max(rel(v.wronskian(), 2.0 / (PI * x)));
        }
    }
    let mut rec = 0.0_f64;
    let mut fd = 0.0_f64;
    let mut x = 0.1;
    while x <= 50.0 {
        for n in -29..=29 {
            for c in [bessel_j as fn(i32, f64) -> cylgrating::Result<f64>, bessel_y] {
                let (lo, mid, hi) = (c(n - 1, x).unwrap(), c(n, x).unwrap(), c(n + 1, x).unwrap());
                let rhs = 2.0 * n as f64 / x * mid;
                rec = rec.max((lo + hi - rhs).abs() / (lo.abs() + hi.abs() + rhs.abs()).max(1e-300));
            }
            let v = eval_pair(n, x).unwrap();
            let h = 1e-6 * x.max(1.0);
            let dj = (bessel_j(n, x + h).unwrap() - bessel_j(n, x - h).unwrap()) / (2.0 * h);
            let dy = (bessel_y(n, x + h).unwrap() - bessel_y(n, x - h).unwrap()) / (2.0 * h);
            let jscale = v.jp.abs().max(v.j.abs() * 1e-3).max(1e-300);
            let yscale = v.yp.abs().max(v.y.abs() * 1e-3).max(1e-300);
            fd = fd.max((dj - v.jp).abs() / jscale).max((dy - v.yp).abs() / yscale);
        }
        x += 0.7;
    }
    let (cfg, mut inc) = desk();
    inc.phi_i = 0.4;
    let wn = derive_wavenumbers(&cfg, &inc).unwrap();
    let mut ja = 0.0_f64;
    for &(px, py) in &[(0.015, 0.004), (-0.02, 0.01), (0.0, -0.03), (0.02, 0.02)] {
        let p = CylPoint::nearest(px, py, 0.1, cfg.spacing);
        let n_terms = (wn.kr * p.rs).ceil() as usize + 20;
        let s = incident_field(&p, &cfg, &inc, &wn, n_terms).map_err(|e| e.to_string())?;
        ja = ja.max((s - incident_plane_wave(&p, &cfg, &inc, &wn)).norm());
    }
    check(
        wr <= 1e-10 && rec <= 1e-9 && fd <= 1e-6 && ja <= 1e-10,
        format!("Wronskian {wr:.1e}, recurrence {rec:.1e}, finite difference {fd:.1e}, Jacobi-Anger {ja:.1e}"),
    )
}

fn convergence() -> Outcome {
    let (cfg, inc) = desk();
    let sols: Vec<ScatteringSolution> = [6, 8, 10, 12]
        .iter()
        .map(|&n| solve(&cfg, &inc, &trunc(n), &table_for(&cfg, &inc, n), Route::Direct).unwrap())
        .collect();
    let diffs: Vec<f64> = sols
        .windows(2)
        .map(|w| {
            w[0].orders()
                .map(|k| (w[1].a_at(k) - w[0].a_at(k)).norm().max((w[1].ah_at(k) - w[0].ah_at(k)).norm()))
                .fold(0.0, f64::max)
        })
        .collect();
    let monotone = diffs.windows(2).all(|p| p[1] <= p[0]);
    let wn = derive_wavenumbers(&cfg, &inc).unwrap();
    let krd = wn.kr * cfg.spacing;
    let auto = solve_auto(&cfg, &inc, Route::Direct, |m| {
        build_table(m, krd, inc.sin_psi(), &LatticeSumOptions::default())
    })
    .map_err(|e| e.to_string())?;
    let s = &auto.solution;
    let n = s.order() as i32;
    let edge = s.a_at(n).norm().max(s.a_at(-n).norm()) / s.max_abs_a();
    check(
        monotone && edge <= 1e-8,
        format!(
            "successive differences {:?}, auto N = {n}, edge |A_+-N|/max|A| {edge:.1e}",
            diffs.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()
        ),
    )
}

fn omega() -> Outcome {
    let (cfg, inc) = desk();
    let blocks = assemble(&cfg, &inc, &trunc(8), &table_for(&cfg, &inc, 8)).unwrap();
    let r = omega_diagnostic(&blocks);
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
    let line = format!(
        "available {}, |Oem| {:.3e}, |Ome| {:.3e}, substitution A {}, combined A {}, combined A^H {}, block A^H {}",
        r.available,
        r.omega_eps_mu_norm,
        r.omega_mu_eps_norm,
        fmt(r.substitution_a_deviation),
        fmt(r.combined_a_deviation),
        fmt(r.combined_ah_deviation),
        fmt(r.block_ah_deviation)
    );
    let ran = r.available && r.combined_a_deviation.is_some() && r.combined_ah_deviation.is_some() && r.block_ah_deviation.is_some();
    check(ran, line)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("route equivalence", route_equivalence),
        ("reconstruction validation", reconstruction),
        ("decoupling at normal incidence", decoupling),
        ("transparent-cylinder nullity", transparent),
        ("isolated-cylinder limit", isolated),
        ("angular symmetry", symmetry),
        ("lattice sum correctness", schlomilch),
        ("special-function suite", special_functions),
        ("truncation convergence", convergence),
        ("omega diagnostic recorded", omega),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
