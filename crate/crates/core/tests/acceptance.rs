//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::io::Write;
use std::process::Command;
use std::sync::Arc;

use hcmu_lab::algebra::{certify_nonvanishing, mu_curvature_identity, obstruction_poly, CubicData, MuElement, RationalPoly, Verdict};
use hcmu_lab::compatibility::{
    holonomy_defect, optimize_shape_field, residual_summary, Constraint, FieldSeed, GridDomain, OptimizeOptions, RandomSeed, RectLoop,
};
use hcmu_lab::metric::{curvature_residual, implicit_x_of_state, parse_profile_csv, solve_curvature_ode, validate_params};
use hcmu_lab::realizer::{integrate_frame, integrate_path, parse_mesh, solve_codazzi_family, verify_immersion, Ambient, FrameGrid};
use hcmu_lab::compatibility::{GridPath, Move};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = (bool, String);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Random admissible `(K1, K2)`: `K1 > 0` and `K2 = t·K1` with `t ∈ (-1/2, 1)`,
/// or the cusp `t = -1/2` one time in ten.
fn random_params(rng: &mut ChaCha8Rng) -> (BigRational, BigRational) {
    let k1 = q(rng.gen_range(1..60), rng.gen_range(1..25));
    let t = if rng.gen_range(0..10) == 0 { q(-1, 2) } else { q(rng.gen_range(-48..97), 97) };
    let k2 = &k1 * &t;
    (k1, k2)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let target = MuElement::from_poly(RationalPoly::var().scale(&q(-4, 1)));
    for n in 0..100 {
        let (k1, k2) = random_params(&mut rng);
        let id = mu_curvature_identity(&CubicData::new(k1.clone(), k2.clone())).unwrap();
        if id != target {
            return (false, format!("case {n}: K1={k1} K2={k2} gives {id:?}"));
        }
    }
    (true, "mu*mu'' + mu'^2 = -4K exactly for 100 random parameter pairs".into())
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 0..100 {
        let (k1, k2) = random_params(&mut rng);
        let c = q(rng.gen_range(-200..200), rng.gen_range(1..40));
        let phi = obstruction_poly(&CubicData::new(k1.clone(), k2.clone()), &c).unwrap();
        if phi.degree() != Some(3) || phi.leading() != Some(&q(-56, 3)) {
            return (false, format!("case {n}: K1={k1} K2={k2} c={c} gives {}", phi.to_line()));
        }
    }
    let phi = obstruction_poly(&CubicData::new(q(2, 1), q(1, 1)), &q(0, 1)).unwrap();
    let cert = certify_nonvanishing(&phi, &q(1, 1), &q(2, 1)).unwrap();
    let ok = cert.verdict == Verdict::NoRoot && phi.to_line() == "-56/3 0 0 8";
    (ok, format!("100 cases of degree 3 with leading -56/3; (2,1,0): Phi = {}, {}", phi.to_line(), cert.summary()))
}

fn criterion_3() -> Outcome {
    let p = validate_params(2.0, 1.0).unwrap();
    let err = |step: f64| {
        let prof = solve_curvature_ode(&p, 1.5, -10.0, 10.0, step).unwrap();
        let base = prof.base_state();
        prof.xs
            .iter()
            .zip(&prof.states)
            .map(|(x, s)| (implicit_x_of_state(&p, &base, s).unwrap() - x).abs())
            .fold(0.0, f64::max)
    };
    let (a, b) = (err(1e-3), err(5e-4));
    let order = (a / b).log2();
    (a < 1e-8 && (3.5..=4.5).contains(&order), format!("max |x_implicit - x| = {a:.3e} at step 1e-3, {b:.3e} at 5e-4, order {order:.3}"))
}

fn criterion_4() -> Outcome {
    let p = validate_params(2.0, 1.0).unwrap();
    let prof = solve_curvature_ode(&p, 1.5, -2.0, 2.0, 1e-3).unwrap();
    let r1 = curvature_residual(&prof, 1e-2).unwrap().max;
    let r2 = curvature_residual(&prof, 5e-3).unwrap().max;
    let ratio = r1 / r2;
    (r1 < 1e-3 && (3.5..=4.5).contains(&ratio), format!("residual {r1:.3e} at h=1e-2, {r2:.3e} at h=5e-3, ratio {ratio:.3}"))
}

fn criterion_5() -> Outcome {
    let p = validate_params(2.0, 1.0).unwrap();
    let prof = Arc::new(solve_curvature_ode(&p, 1.5, -2.0, 2.0, 1e-3).unwrap());
    let g = GridDomain::new(prof, 41, 41, 1e-3, 1e-3, (-0.02, -0.02)).unwrap();
    let col = g.column(0);
    let h0 = Complex64::from_polar((col.mu * col.mu * (3.0 - col.k) / 4.0).sqrt(), 0.3);
    let d = holonomy_defect(&g, 3.0, h0, &RectLoop::centered((20, 20), 10)).unwrap();
    let rel = (d.ratio() - 1.0).norm();
    (rel < 0.05, format!("measured/predicted = {:.6}, relative deviation {rel:.3e}", d.ratio()))
}

fn criterion_6() -> Outcome {
    let p = validate_params(2.0, 1.0).unwrap();
    let prof = Arc::new(solve_curvature_ode(&p, 1.5, -1.0, 1.0, 1e-3).unwrap());
    let grid = GridDomain::new(prof.clone(), 32, 32, 1.0 / 32.0, 1.0 / 32.0, (-0.5, -0.5)).unwrap();
    let fam = solve_codazzi_family(prof, 0.0, 2.0).unwrap();
    let opts = OptimizeOptions { refine: false, ..Default::default() };
    let start = residual_summary(&fam.seed_field(&grid, Constraint::None), &grid, 0.0).total_l2();
    let (_, none) = optimize_shape_field(&grid, 0.0, Constraint::None, &fam, &opts).unwrap();
    let mut ok = none.floor_l2 < 1e-8;
    let mut detail = format!("none: {start:.3e} -> {:.3e}", none.floor_l2);
    let opts = OptimizeOptions { refine: true, ..Default::default() };
    for constraint in [Constraint::Minimal, Constraint::Cmc(0.0), Constraint::Cmc(0.5), Constraint::Cmc(1.0)] {
        let levels: Vec<(f64, f64)> = (0..10u64)
            .into_par_iter()
            .map(|s| {
                let (_, r) = optimize_shape_field(&grid, 0.0, constraint, &RandomSeed(s), &opts).unwrap();
                (r.refinement_history[0].floor_l2, r.refinement_history[1].floor_l2)
            })
            .collect();
        let f32 = levels.iter().map(|l| l.0).fold(f64::INFINITY, f64::min);
        let f64_ = levels.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
        let ratio = f64_ / f32;
        ok &= f32 > 1e-4 && f64_ > 1e-4 && ratio >= 0.9;
        detail += &format!("; {}: floor {f32:.4e} (32) {f64_:.4e} (64) ratio {ratio:.4}", constraint.label());
    }
    (ok, detail)
}

fn criterion_7() -> Outcome {
    let p = validate_params(2.0, 1.0).unwrap();
    let prof = Arc::new(solve_curvature_ode(&p, 1.5, -1.0, 1.0, 1e-3).unwrap());
    let g = FrameGrid { nx: 101, ny: 101, x0: -0.05, y0: 0.0, hx: 1e-3, hy: 1e-3, substeps: 1 };
    let mut ok = true;
    let mut detail = Vec::new();
    for c in [0.0, 1.0, -1.0] {
        let fam = solve_codazzi_family(prof.clone(), c, 2.0).unwrap();
        let mesh = integrate_frame(&fam, &g).unwrap();
        let r = verify_immersion(&mesh, &fam).unwrap();
        let mut path_gap = 0.0f64;
        for (i, j) in [(100, 100), (50, 80), (17, 64)] {
            let alt = integrate_path(&fam, &g, &GridPath::new((0, 0)).then(Move::North, j).then(Move::East, i)).unwrap();
            let v = mesh.vertex(i, j);
            path_gap = path_gap.max((0..4).map(|k| (v[k] - alt.x[k]).abs()).fold(0.0, f64::max));
        }
        let amb = Ambient::for_curvature(c);
        let quad = if c == 0.0 { 0.0 } else { mesh.vertices.iter().map(|v| (amb.inner(v, v) - 1.0 / c).abs()).fold(0.0, f64::max) };
        let h_range = r.h_max - r.h_min;
        ok &= r.metric_rel_err < 1e-6 && path_gap < 1e-6 && quad < 1e-7 && r.weingarten_spread < 1e-6 && !r.is_cmc && h_range > 1e-6;
        detail.push(format!(
            "c={c}: metric {:.2e}, path {path_gap:.2e}, quadric {quad:.2e}, spread {:.2e}, H range {h_range:.3e}",
            r.metric_rel_err, r.weingarten_spread
        ));
    }
    (ok, detail.join("; "))
}

fn cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_hcmu-lab")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = validate_params(1.0, -0.5).unwrap();
    let prof = solve_curvature_ode(&p, 0.2, -3.0, 3.0, 1e-2).unwrap();
    let csv = prof.to_csv();
    let path = dir.path().join("profile.csv");
    std::fs::write(&path, &csv).unwrap();
    let table = parse_profile_csv(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let profile_ok = table.bits_eq(&prof.table()) && table.to_csv() == csv;

    let p = validate_params(2.0, 1.0).unwrap();
    let fam = solve_codazzi_family(Arc::new(solve_curvature_ode(&p, 1.5, -0.5, 0.5, 1e-3).unwrap()), -1.0, 2.0).unwrap();
    let mesh = integrate_frame(&fam, &FrameGrid { nx: 21, ny: 13, x0: -0.01, y0: 0.0, hx: 1e-3, hy: 2e-3, substeps: 2 }).unwrap();
    let path = dir.path().join("mesh.txt");
    hcmu_lab::realizer::export_mesh(&mesh, &path).unwrap();
    let back = parse_mesh(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let bits = |a: &[[f64; 4]], b: &[[f64; 4]]| a.len() == b.len() && a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits());
    let mesh_ok = bits(&mesh.vertices, &back.vertices) && bits(&mesh.normals, &back.normals) && mesh.faces == back.faces;

    let runs: [&[&str]; 3] = [
        &["optimize", "--constraint", "minimal", "--grid", "16,16", "--seed", "7"],
        &["realize", "--grid", "21,21", "--c", "1"],
        &["profile", "--x-min", "-2", "--x-max", "2", "--step", "1e-2"],
    ];
    let cli_ok = runs.iter().all(|a| {
        let one = cli(a);
        !one.is_empty() && one == cli(a) && one == cli(&[a, &["--threads", "1"][..]].concat())
    });
    (profile_ok && mesh_ok && cli_ok, format!("profile csv {profile_ok}, mesh {mesh_ok}, cli byte-reproducible {cli_ok}"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exact identity suite", criterion_1),
        ("obstruction certification", criterion_2),
        ("ODE / closed-form agreement", criterion_3),
        ("curvature self-consistency", criterion_4),
        ("holonomy defect vs prediction", criterion_5),
        ("existence / nonexistence contrast", criterion_6),
        ("realization fidelity", criterion_7),
        ("roundtrips", criterion_8),
    ];
    let mut failed = Vec::new();
    for (n, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        let mut out = std::io::stdout().lock();
        writeln!(out, "criterion {} {} ({name}): {detail}", n + 1, if ok { "PASS" } else { "FAIL" }).unwrap();
        out.flush().unwrap();
        if !ok {
            failed.push(n + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
