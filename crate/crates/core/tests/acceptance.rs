//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use common::*;
use rcl_core::analytic::{cayley, inverse_cayley, positive_real_margin, SchurCheck, TaylorFn};
use rcl_core::cli;
use rcl_core::dataset::{build_omega, random_dataset, Dims, Preset};
use rcl_core::jmap::{canonical_parameter, j_gamma, parameter_to_constrained};
use rcl_core::lifting::{
    build_big_omega, gamma_defect, gamma_from_pair, uniqueness_check, verify_solution, Uniqueness,
};
use rcl_core::majorant::{
    factor_delta, majorant_gap, poisson_cross_check, v_from_theta, w_from_contraction_parameter,
};
use rcl_core::opcore::{op_norm, real_matrix};
use rcl_core::schurpair::{pair_from_parameter, parameter_from_pair, SchurPair};

type Check = Result<String, String>;
/// Criterion number, runtime limit in seconds, check.
type Criterion = (u32, Option<u64>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const RANK_TOL: f64 = 1e-10;
const TOL: f64 = 1e-9;

fn generic_dims(rng: &mut rand_chacha::ChaCha8Rng) -> Dims {
    let h = rng.random_range(2..=6);
    let h0 = rng.random_range(1..h);
    let hp = rng.random_range(1..=6);
    Dims::new(h0, h, hp)
}

fn criterion_1() -> Check {
    let ds = ds3();
    let od = build_omega(&ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
    ensure(op_norm(&od.omega1()) <= 1e-12, || "omega1 is not zero".into())?;
    ensure(
        max_abs_diff(&od.omega2(), &real_matrix(2, 1, &[0.0, 1.0])) <= 1e-12,
        || format!("omega2 e1 = {}", od.omega2()),
    )?;
    let h = TaylorFn::constant(real_matrix(2, 1, &[1.0, 0.0]));
    let pair = pair_from_parameter(&od, &h, 0, &SchurCheck::default()).map_err(|e| e.to_string())?;
    let f = real_matrix(1, 2, &[0.0, 1.0]);
    let n = real_matrix(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    ensure(
        max_abs_diff(&pair.f.coeff(0), &f) <= 1e-12 && max_abs_diff(&pair.g.coeff(0), &n) <= 1e-12,
        || "pair differs from F = [0,1], G = [[0,0],[1,0]]".into(),
    )?;
    let g = gamma_from_pair(&pair, 32);
    let theta = g.theta();
    ensure(
        max_abs_diff(&theta.coeff(0), &f) <= 1e-12
            && max_abs_diff(&theta.coeff(1), &real_matrix(1, 2, &[1.0, 0.0])) <= 1e-12
            && (2..=32).all(|k| op_norm(&theta.coeff(k)) <= 1e-12),
        || "symbol differs from [λ, 1]".into(),
    )?;
    let rep = verify_solution(&ds, &g, 1e-12).map_err(|e| e.to_string())?;
    ensure(
        rep.contraction_margin.abs() <= 1e-12 && rep.max_residual <= 1e-12,
        || format!("margin {:.3e}, residual {:.3e}", rep.contraction_margin, rep.max_residual),
    )?;
    let bo = build_big_omega(&ds, &od, &g, RANK_TOL, TOL).map_err(|e| e.to_string())?;
    let out = j_gamma(&g, &bo, &canonical_parameter(&bo), 32, &SchurCheck::default())
        .map_err(|e| e.to_string())?;
    let expected = SchurPair::new(TaylorFn::constant(f), TaylorFn::constant(n)).unwrap();
    let d = out
        .pair
        .f
        .max_coeff_distance(&expected.f, 32)
        .max(out.pair.g.max_coeff_distance(&expected.g, 31));
    ensure(d <= 1e-12, || format!("J_Γ pair differs by {d:.3e}"))?;
    Ok(format!("margin {:.1e}, J_Γ distance {d:.1e}", rep.contraction_margin))
}

fn criterion_2() -> Check {
    let mut worst_margin = f64::INFINITY;
    let mut worst_residual = 0.0f64;
    for seed in 0..200u64 {
        let mut r = rng(1000 + seed);
        let dims = generic_dims(&mut r);
        let ds = random_dataset(seed, dims, Preset::Generic).map_err(|e| format!("seed {seed}: {e}"))?;
        let od = build_omega(&ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
        let (rows, cols) = od.coupling().parameter_shape();
        let degree = r.random_range(0..=3);
        let h = random_schur(&mut r, rows, cols, degree, 0.9);
        let pair = pair_from_parameter(&od, &h, degree, &SchurCheck::default()).map_err(|e| e.to_string())?;
        let g = gamma_from_pair(&pair, 32);
        let rep = verify_solution(&ds, &g, TOL).map_err(|e| e.to_string())?;
        worst_margin = worst_margin.min(rep.contraction_margin);
        worst_residual = worst_residual.max(rep.max_residual);
        ensure(rep.pass, || {
            format!(
                "seed {seed}: margin {:.3e}, residual {:.3e}",
                rep.contraction_margin, rep.max_residual
            )
        })?;
    }
    Ok(format!("200 instances, worst margin {worst_margin:.2e}, worst residual {worst_residual:.2e}"))
}

/// Unit vector along which `D_{Ω*}` acts isometrically, in the coordinates of
/// its range basis.
fn top_dstar_direction(bo: &rcl_core::BigOmegaData) -> rcl_core::ComplexMatrix {
    let c = bo.coupling();
    let embed = c.dstar() * c.dstar_basis().matrix();
    let svd = embed.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let i = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let u = v_t.row(i).adjoint();
    rcl_core::ComplexMatrix::from_column_slice(u.len(), 1, u.as_slice())
}

fn criterion_3() -> Check {
    let n = 32;
    let mut worst = 0.0f64;
    let mut witnesses = 0;
    let mut min_g_gap = f64::INFINITY;
    for seed in 0..50u64 {
        let mut r = rng(3000 + seed);
        let preset = if seed % 2 == 0 { Preset::Generic } else { Preset::ExactEquality };
        let dims = generic_dims(&mut r);
        let ds = random_dataset(seed, dims, preset).map_err(|e| format!("seed {seed}: {e}"))?;
        let od = build_omega(&ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
        let (rows, cols) = od.coupling().parameter_shape();
        let deg_h = r.random_range(0..=3);
        let h = random_schur(&mut r, rows, cols, deg_h, 0.7);
        let pair = pair_from_parameter(&od, &h, deg_h, &SchurCheck::default()).map_err(|e| e.to_string())?;
        let g = gamma_from_pair(&pair, n);
        let bo = build_big_omega(&ds, &od, &g, RANK_TOL, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        let (c1_rows, c1_cols) = bo.coupling().parameter_shape();
        let deg_c = r.random_range(0..=2);
        let c1 = random_schur(&mut r, c1_rows, c1_cols, deg_c, 0.45);
        let check = SchurCheck { tol: 1e-8, ..SchurCheck::default() };
        let c = parameter_to_constrained(&bo, &c1, deg_c, &check).map_err(|e| e.to_string())?;
        let out = j_gamma(&g, &bo, &c, n, &check).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = gamma_from_pair(&out.pair, n);
        let d = back.theta().max_coeff_distance(g.theta(), n - 4);
        worst = worst.max(d);
        ensure(d <= 1e-8, || format!("seed {seed}: symbol reproduced only to {d:.3e}"))?;

        if witnesses < 20 && c1_rows > 0 && c1_cols > 0 {
            let mut bump = rcl_core::ComplexMatrix::zeros(c1_rows, c1_cols);
            let u = top_dstar_direction(&bo);
            let v = common::gaussian(&mut r, c1_cols, 1);
            let v = &v / Complex64::new(v.norm(), 0.0);
            bump += u * v.adjoint() * Complex64::new(0.3, 0.0);
            let c1b = c1.add(&TaylorFn::constant(bump)).unwrap();
            let cb = parameter_to_constrained(&bo, &c1b, deg_c, &check).map_err(|e| e.to_string())?;
            let g_basis = bo.g_basis().matrix();
            let c_gap = (0..=deg_c)
                .map(|k| op_norm(&((c.coeff(k) - cb.coeff(k)) * g_basis)))
                .fold(0.0, f64::max);
            ensure(c_gap >= 0.1, || format!("seed {seed}: perturbation only {c_gap:.3e}"))?;
            let outb = j_gamma(&g, &bo, &cb, n, &check).map_err(|e| e.to_string())?;
            let g_gap = outb.pair.g.max_coeff_distance(&out.pair.g, n - 1);
            min_g_gap = min_g_gap.min(g_gap);
            ensure(g_gap >= 1e-6, || format!("seed {seed}: pairs coincide ({g_gap:.3e})"))?;
            witnesses += 1;
        }
    }
    ensure(witnesses == 20, || format!("only {witnesses} injectivity witnesses available"))?;
    Ok(format!(
        "50 round trips, worst symbol error {worst:.2e}; 20 witnesses, min G distance {min_g_gap:.2e}"
    ))
}

fn criterion_4() -> Check {
    let presets = [Preset::Generic, Preset::ExactEquality, Preset::TreilVolberg];
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(4000 + seed);
        let preset = presets[seed as usize % 3];
        let dims = match preset {
            Preset::TreilVolberg => {
                let h = r.random_range(1..=5);
                Dims::new(h, h, r.random_range(1..=5))
            }
            _ => generic_dims(&mut r),
        };
        let ds = random_dataset(seed, dims, preset).map_err(|e| format!("seed {seed}: {e}"))?;
        let od = build_omega(&ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
        let (rows, cols) = od.coupling().parameter_shape();
        let deg = r.random_range(0..=3);
        let h = random_schur(&mut r, rows, cols, deg, 0.9);
        let pair = pair_from_parameter(&od, &h, deg, &SchurCheck::default()).map_err(|e| e.to_string())?;
        let back = parameter_from_pair(&od, &pair, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        let again = pair_from_parameter(&od, &back, deg, &SchurCheck::default()).map_err(|e| e.to_string())?;
        let d = back
            .max_coeff_distance(&h, deg)
            .max(again.f.max_coeff_distance(&pair.f, deg))
            .max(again.g.max_coeff_distance(&pair.g, deg));
        worst = worst.max(d);
        ensure(d <= 1e-9, || format!("seed {seed}: round trip error {d:.3e}"))?;
    }
    Ok(format!("100 instances, worst error {worst:.2e}"))
}

fn criterion_5() -> Check {
    let n = 16;
    let mut worst_gap = f64::INFINITY;
    let mut worst_pr = f64::INFINITY;
    let mut worst_k = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(5000 + seed);
        let rows = r.random_range(1..=4);
        let cols = r.random_range(1..=4);
        let level = r.random_range(0.3..0.9);
        let g = random_contractive_theta(&mut r, rows, cols, n, level);
        let v = v_from_theta(g.theta(), n);
        let gap = majorant_gap(g.theta(), &v, 64).map_err(|e| e.to_string())?;
        let pr_v = positive_real_margin(&v, 16).map_err(|e| e.to_string())?;
        let deg_c = r.random_range(0..=3);
        let c = random_schur(&mut r, cols, cols, deg_c, 0.9);
        let w = w_from_contraction_parameter(&g, &c, n, &SchurCheck::default()).map_err(|e| e.to_string())?;
        let pr_excess = positive_real_margin(&w.sub(&v).unwrap(), 16).map_err(|e| e.to_string())?;
        let factor = factor_delta(&g, &w, RANK_TOL, 1e-8).map_err(|e| format!("seed {seed}: {e}"))?;
        let k = cayley(&c, n).map_err(|e| e.to_string())?;
        let dk = factor.k.max_coeff_distance(&k, n);
        worst_gap = worst_gap.min(gap);
        worst_pr = worst_pr.min(pr_v).min(pr_excess);
        worst_k = worst_k.max(dk);
        ensure(gap >= -1e-8, || format!("seed {seed}: gap {gap:.3e}"))?;
        ensure(pr_v >= -1e-8 && pr_excess >= -1e-8, || {
            format!("seed {seed}: positive-real margins {pr_v:.3e} / {pr_excess:.3e}")
        })?;
        ensure(dk <= 1e-9, || format!("seed {seed}: K recovered to {dk:.3e}"))?;
    }
    Ok(format!(
        "100 symbols, min gap {worst_gap:.2e}, min Toeplitz margin {worst_pr:.2e}, K error {worst_k:.2e}"
    ))
}

fn criterion_6() -> Check {
    let mut worst = 0.0f64;
    let mut worst_pr = f64::INFINITY;
    for seed in 0..100u64 {
        let mut r = rng(6000 + seed);
        let d = r.random_range(1..=4);
        let deg = r.random_range(0..=6);
        let c = random_schur(&mut r, d, d, deg, 0.9);
        let k = cayley(&c, 40).map_err(|e| e.to_string())?;
        let back = inverse_cayley(&k, 39).map_err(|e| e.to_string())?;
        let e = back.max_coeff_distance(&c, deg);
        let pr = positive_real_margin(&k, 16).map_err(|e| e.to_string())?;
        worst = worst.max(e);
        worst_pr = worst_pr.min(pr);
        ensure(e <= 1e-10, || format!("seed {seed}: inverse Cayley error {e:.3e}"))?;
        ensure(pr >= -1e-9, || format!("seed {seed}: positive-real margin {pr:.3e}"))?;
    }
    Ok(format!("100 functions, worst error {worst:.2e}, min margin {worst_pr:.2e}"))
}

fn criterion_7() -> Check {
    let check = SchurCheck::default();
    let mut cases = vec![(ds3(), ds3_theta())];
    for seed in 0..19u64 {
        let mut r = rng(7000 + seed);
        let rows: usize = r.random_range(1..=3);
        let cols: usize = r.random_range(1..=4);
        let degree = r.random_range(cols.div_ceil(rows)..=8);
        cases.push((unconstrained(cols, rows), random_isometric_theta(&mut r, rows, cols, degree)));
    }
    let mut worst_defect = 0.0f64;
    for (i, (ds, g)) in cases.iter().enumerate() {
        let n = g.degree() + 8;
        let d = gamma_defect(g, 1e-10).map_err(|e| e.to_string())?;
        worst_defect = worst_defect.max(op_norm(&d));
        ensure(op_norm(&d) <= 1e-9, || format!("case {i}: defect {:.3e}", op_norm(&d)))?;
        let od = build_omega(ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
        let bo = build_big_omega(ds, &od, g, RANK_TOL, TOL).map_err(|e| e.to_string())?;
        ensure(bo.defect().dim() == 0, || format!("case {i}: defect space not trivial"))?;
        // the only parameter is the empty function; its degree is irrelevant
        let a = j_gamma(g, &bo, &TaylorFn::zeros(0, 0, 0), n, &check).map_err(|e| e.to_string())?;
        let b = j_gamma(g, &bo, &TaylorFn::zeros(0, 0, 5), n, &check).map_err(|e| e.to_string())?;
        ensure(a.pair == b.pair, || format!("case {i}: J_Γ depends on the parameter"))?;
        let v = v_from_theta(g.theta(), n);
        for c in [TaylorFn::zeros(0, 0, 0), TaylorFn::zeros(0, 0, 4)] {
            let w = w_from_contraction_parameter(g, &c, n, &check).map_err(|e| e.to_string())?;
            ensure(w.max_coeff_distance(&v, n) <= 1e-12, || format!("case {i}: W differs from V"))?;
        }
        ensure(a.w.max_coeff_distance(&v, n) <= 1e-12, || format!("case {i}: J_Γ majorant differs from V"))?;
        let back = gamma_from_pair(&a.pair, n);
        let e = back.theta().max_coeff_distance(g.theta(), n);
        ensure(e <= 1e-9, || format!("case {i}: symbol reproduced to {e:.3e}"))?;
    }
    Ok(format!("20 isometric symbols, largest defect {worst_defect:.2e}"))
}

fn criterion_8() -> Check {
    let check = SchurCheck::default();
    for seed in 0..20u64 {
        let mut r = rng(8000 + seed);
        let h = r.random_range(1..=4);
        let hp = r.random_range(1..=4);
        let ds = random_dataset(seed, Dims::new(h, h, hp), Preset::Classical).map_err(|e| e.to_string())?;
        let od = build_omega(&ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
        ensure(od.f_basis().dim() == od.defects().dim_a(), || {
            format!("seed {seed}: F is a proper subspace")
        })?;
        let rep = uniqueness_check(&ds, &od, TOL).map_err(|e| e.to_string())?;
        ensure(rep.verdict == Uniqueness::Unique, || format!("seed {seed}: verdict {:?}", rep.verdict))?;
        let (rows, cols) = od.coupling().parameter_shape();
        let h1 = random_schur(&mut r, rows, cols, 0, 0.5);
        let h2 = random_schur(&mut r, rows, cols, 3, 0.9);
        let g1 = gamma_from_pair(&pair_from_parameter(&od, &h1, 3, &check).map_err(|e| e.to_string())?, 32);
        let g2 = gamma_from_pair(&pair_from_parameter(&od, &h2, 3, &check).map_err(|e| e.to_string())?, 32);
        let d = g1.theta().max_coeff_distance(g2.theta(), 32);
        ensure(d <= 1e-9, || format!("seed {seed}: solutions differ by {d:.3e}"))?;
    }
    let ds = ds3();
    let od = build_omega(&ds, RANK_TOL, TOL).map_err(|e| e.to_string())?;
    let rep = uniqueness_check(&ds, &od, TOL).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Uniqueness::NonUnique, || format!("DS3 verdict {:?}", rep.verdict))?;
    let zero = GammaOpExt::zero(1, 2, 32);
    let a = verify_solution(&ds, &zero, 1e-12).map_err(|e| e.to_string())?;
    let b = verify_solution(&ds, &ds3_theta(), 1e-12).map_err(|e| e.to_string())?;
    let gap = zero.theta().max_coeff_distance(ds3_theta().theta(), 32);
    ensure(a.pass && b.pass && gap >= 1.0 - 1e-12, || "DS3 solutions not exhibited".into())?;
    Ok(format!("20 classical instances unique; DS3 non-unique, solution distance {gap:.1}"))
}

struct GammaOpExt;

impl GammaOpExt {
    fn zero(rows: usize, cols: usize, degree: usize) -> rcl_core::GammaOp {
        rcl_core::GammaOp::new(TaylorFn::zeros(rows, cols, degree))
    }
}

fn criterion_9() -> Check {
    let thetas = [
        TaylorFn::scalar_real(&[0.0, 1.0]),
        TaylorFn::scalar_real(&[0.5, 0.5]),
        TaylorFn::scalar_real(&[0.3, 0.0, 0.4]),
    ];
    let mut worst = 0.0f64;
    for theta in &thetas {
        for r in [0.0, 0.45, 0.9] {
            for lambda in circle(r, 12) {
                let (v, q) = poisson_cross_check(theta, lambda, 4096).map_err(|e| e.to_string())?;
                worst = worst.max((v - q).norm());
            }
        }
    }
    ensure(worst <= 1e-6, || format!("largest discrepancy {worst:.3e}"))?;
    Ok(format!("3 functions x 36 points, largest discrepancy {worst:.2e}"))
}

fn criterion_10(elapsed_so_far: Duration) -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for name in ["first.json", "second.json"] {
        let path = dir.path().join(name);
        let out = cli::run(["rcl", "gen", "--seed", "7", "--out", path.to_str().unwrap()]);
        ensure(out.code == 0, || format!("gen exited with {}: {}", out.code, out.stderr))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "gen output differs between runs".into())?;
    ensure(elapsed_so_far < Duration::from_secs(300), || {
        format!("suite took {:.1} s", elapsed_so_far.as_secs_f64())
    })?;
    Ok(format!(
        "{} identical bytes; suite time {:.1} s",
        outputs[0].len(),
        elapsed_so_far.as_secs_f64()
    ))
}

fn main() {
    let limits: [Criterion; 9] = [
        (1, Some(1), criterion_1),
        (2, Some(60), criterion_2),
        (3, Some(120), criterion_3),
        (4, None, criterion_4),
        (5, None, criterion_5),
        (6, None, criterion_6),
        (7, None, criterion_7),
        (8, None, criterion_8),
        (9, None, criterion_9),
    ];
    let start = Instant::now();
    let mut failures = 0;
    let mut report = |id: u32, result: Check, took: Duration, limit: Option<u64>| {
        let result = match (result, limit) {
            (Ok(msg), Some(secs)) if took > Duration::from_secs(secs) => {
                Err(format!("{msg}; exceeded {secs} s limit"))
            }
            (r, _) => r,
        };
        match result {
            Ok(msg) => println!("criterion {id:>2}: PASS  {msg}  [{:.2} s]", took.as_secs_f64()),
            Err(msg) => {
                failures += 1;
                println!("criterion {id:>2}: FAIL  {msg}  [{:.2} s]", took.as_secs_f64());
            }
        }
    };
    for (id, limit, f) in limits {
        let t = Instant::now();
        let result = f();
        report(id, result, t.elapsed(), limit);
    }
    let t = Instant::now();
    let result = criterion_10(start.elapsed());
    report(10, result, t.elapsed(), None);
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
