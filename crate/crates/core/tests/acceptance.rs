//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use biuni::bench::{run_bench, BenchConfig};
use biuni::factorizer::{
    block2n_decompose, euler_factor, recursive_decompose, synthesize, u2_biuni, u3_biuni_construct,
    u3_canonicalize, u4_from_phases, ContinuumFamily, U2Biuni,
};
use biuni::fourier::{autocorr_residual, bjorck_sequence, census, gauss_sequence, gcd, CENSUS_TAU};
use biuni::linalg::{
    cis, fourier_matrix, haar_random_unitary, inf_to_1_value, TorusVector, UnitaryMatrix, C64,
};
use biuni::manifold::{full_rank_witness, im_rank, phasing_dim, region_grid, RANK_CUTOFF};
use biuni::projector::{
    biuni_predicates, certify_near, multi_start_search, project_step, SearchConfig,
};
use biuni::rng::{mix_seed, random_torus, stream};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn haar(n: usize, tag: u64, k: u64) -> UnitaryMatrix {
    haar_random_unitary(n, mix_seed(&[tag, n as u64, k])).expect("haar sample")
}

fn census_orbits() -> Outcome {
    let expected: [(usize, usize, &[usize]); 5] = [
        (2, 200, &[2]),
        (3, 500, &[6]),
        (5, 2000, &[10, 10]),
        (6, 2000, &[12, 36]),
        (7, 4000, &[42, 196, 294]),
    ];
    let mut summary = Vec::new();
    for (n, starts, want) in expected {
        let cfg = SearchConfig::new(1e-7, 30_000, starts, 1).map_err(|e| e.to_string())?;
        let c = census(n, &cfg, CENSUS_TAU).map_err(|e| e.to_string())?;
        let mut got = c.lengths();
        got.sort_unstable();
        check(got == want, || {
            format!("n={n}: orbit lengths {got:?}, expected {want:?}")
        })?;
        check(c.total_vectors == want.iter().sum::<usize>(), || {
            format!("n={n}: total {}", c.total_vectors)
        })?;
        summary.push(format!("n={n} {got:?}"));
    }
    Ok(summary.join(", "))
}

fn effectiveness_bench() -> Outcome {
    let cfg = BenchConfig {
        dims: vec![3, 5, 10, 25],
        matrices_per_dim: 100,
        delta: 1e-10,
        max_starts: 1000,
        max_iters: 10_000,
        seed: 0,
    };
    let report = run_bench(&cfg).map_err(|e| e.to_string())?;
    let limits = [1.5, 1.6, 1.8, 3.0];
    let mut summary = Vec::new();
    for (row, limit) in report.rows.iter().zip(limits) {
        check(row.successes == 100, || {
            format!("dim {}: {} successes", row.dim, row.successes)
        })?;
        check(row.avg_starts <= limit, || {
            format!("dim {}: avg starts {} > {limit}", row.dim, row.avg_starts)
        })?;
        summary.push(format!(
            "n={} avg {:.2} max {}",
            row.dim, row.avg_starts, row.max_starts_used
        ));
    }
    Ok(summary.join(", "))
}

/// The sixteen printed entry formulas of the 4x4 closed form, 1-based.
fn printed_u4_entry(
    k: usize,
    l: usize,
    a: &[C64; 4],
    b: &[C64; 4],
    c: &[C64; 4],
    z: &[C64; 4],
) -> C64 {
    let h = 0.5;
    let q = 0.25;
    let one = C64::new(1.0, 0.0);
    let (a0, a1, a2, a3) = (a[0], a[1], a[2], a[3]);
    let (b0, b1, b2, b3) = (b[0], b[1], b[2], b[3]);
    let (c0, c1, c2, c3) = (c[0], c[1], c[2], c[3]);
    let (z0, z1, z2, z3) = (z[0], z[1], z[2], z[3]);
    // Shared column-1 and column-2 factors of the upper (a) and lower (b) halves.
    let col1 = |x1: C64, x3: C64, plus: C64, minus: C64, s: f64| {
        s * q * x1 * x3 * minus * z2 * (one - z0) + h * x1 * plus * (one + s * h * z1 * (one + z0))
    };
    let col2 = |x1: C64, x3: C64, plus: C64, minus: C64, s: f64| {
        s * q * x1 * plus * z1 * z3 * (one - z0)
            + h * x1 * x3 * minus * (one + s * h * z2 * z3 * (one + z0))
    };
    let (ap, am, bp, bm) = (one + a0, one - a0, one + b0, one - b0);
    match (k, l) {
        (1, 1) => h * col1(a1, a3, ap, am, 1.0),
        (2, 1) => h * col1(a2, a3, am, ap, 1.0),
        (3, 1) => h * col1(b1, b3, bp, bm, -1.0),
        (4, 1) => h * col1(b2, b3, bm, bp, -1.0),
        (1, 2) => h * col2(a1, a3, ap, am, 1.0),
        (2, 2) => h * col2(a2, a3, am, ap, 1.0),
        (3, 2) => h * col2(b1, b3, bp, bm, -1.0),
        (4, 2) => h * col2(b2, b3, bm, bp, -1.0),
        (1, 3) => {
            h * (h * c1 * (one + c0) * col1(a1, a3, ap, am, -1.0)
                + h * c2 * (one - c0) * col2(a1, a3, ap, am, -1.0))
        }
        (2, 3) => {
            h * (h * c1 * (one + c0) * col1(a2, a3, am, ap, -1.0)
                + h * c2 * (one - c0) * col2(a2, a3, am, ap, -1.0))
        }
        (3, 3) => {
            h * (h * c1 * (one + c0) * col1(b1, b3, bp, bm, 1.0)
                + h * c2 * (one - c0) * col2(b1, b3, bp, bm, 1.0))
        }
        (4, 3) => {
            h * (h * c1 * (one + c0) * col1(b2, b3, bm, bp, 1.0)
                + h * c2 * (one - c0) * col2(b2, b3, bm, bp, 1.0))
        }
        (1, 4) => {
            h * (h * c1 * c3 * (one - c0) * col1(a1, a3, ap, am, -1.0)
                + h * c2 * c3 * (one + c0) * col2(a1, a3, ap, am, -1.0))
        }
        (2, 4) => {
            h * (h * c1 * c3 * (one - c0) * col1(a2, a3, am, ap, -1.0)
                + h * c2 * c3 * (one + c0) * col2(a2, a3, am, ap, -1.0))
        }
        (3, 4) => {
            h * (h * c1 * c3 * (one - c0) * col1(b1, b3, bp, bm, 1.0)
                + h * c2 * c3 * (one + c0) * col2(b1, b3, bp, bm, 1.0))
        }
        (4, 4) => {
            h * (h * c1 * c3 * (one - c0) * col1(b2, b3, bm, bp, 1.0)
                + h * c2 * c3 * (one + c0) * col2(b2, b3, bm, bp, 1.0))
        }
        _ => unreachable!(),
    }
}

fn factorization_round_trips() -> Outcome {
    let cfg = SearchConfig::new(1e-10, 10_000, 1000, 7).map_err(|e| e.to_string())?;
    let mut worst_a = 0.0f64;
    for n in [2usize, 3, 4, 5, 8] {
        let errors: Vec<Result<f64, String>> = (0..50u64)
            .into_par_iter()
            .map(|k| {
                let a = haar(n, 31, k);
                let d = recursive_decompose(&a, &cfg)
                    .map_err(|e| format!("recursive n={n} k={k}: {e}"))?;
                let back = synthesize(&d.table).map_err(|e| e.to_string())?;
                Ok(back
                    .matrix()
                    .max_abs_diff(a.matrix())
                    .max(d.reconstruction_error))
            })
            .collect();
        for e in errors {
            worst_a = worst_a.max(e?);
        }
    }
    check(worst_a <= 1e-8, || {
        format!("(a) recursive reconstruction {worst_a:.3e}")
    })?;

    let mut worst_b = 0.0f64;
    for size in [2usize, 4, 8, 16, 32, 64] {
        for k in 0..20 {
            let u = haar(size, 32, k);
            let d = block2n_decompose(&u).map_err(|e| format!("block2n size {size}: {e}"))?;
            let back = d.reconstruct().map_err(|e| e.to_string())?;
            worst_b = worst_b.max(back.matrix().max_abs_diff(u.matrix()));
        }
    }
    check(worst_b <= 1e-8, || {
        format!("(b) block2n reconstruction {worst_b:.3e}")
    })?;

    let mut worst_c = 0.0f64;
    for k in 0..1000 {
        let a = haar(3, 33, k);
        let t = u3_canonicalize(&a).map_err(|e| e.to_string())?;
        let (ex, ez) = euler_factor(&a).map_err(|e| e.to_string())?;
        for m in [t.reconstruct(), ex.reconstruct(), ez.reconstruct()] {
            worst_c = worst_c.max(m.max_abs_diff(a.matrix()));
        }
    }
    check(worst_c <= 1e-9, || {
        format!("(c) U(3) round trip {worst_c:.3e}")
    })?;

    let mut rng = stream(34, 0);
    let mut four = || {
        let t = random_torus(4, &mut rng);
        [t[0], t[1], t[2], t[3]]
    };
    let mut worst_d = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c, z) = (four(), four(), four(), four());
        let u = u4_from_phases(a, b, c, z).map_err(|e| e.to_string())?;
        for k in 1..=4 {
            for l in 1..=4 {
                worst_d = worst_d.max(
                    (u.matrix().row(k - 1)[l - 1] - printed_u4_entry(k, l, &a, &b, &c, &z)).norm(),
                );
            }
        }
    }
    check(worst_d <= 1e-12, || {
        format!("(d) u4 entries differ by {worst_d:.3e}")
    })?;
    Ok(format!(
        "(a) {worst_a:.1e} (b) {worst_b:.1e} (c) {worst_c:.1e} (d) {worst_d:.1e}"
    ))
}

fn closed_forms() -> Outcome {
    let mut worst_u2 = 0.0f64;
    for k in 0..10_000 {
        let a = haar(2, 41, k);
        let vectors = match u2_biuni(&a).map_err(|e| e.to_string())? {
            U2Biuni::Pair(p, m) => vec![p, m],
            U2Biuni::Continuum => vec![
                TorusVector::ones(2),
                TorusVector::from_phases(&[0.0, 1.0]).unwrap(),
            ],
        };
        for v in vectors {
            worst_u2 = worst_u2.max((inf_to_1_value(&a, &v).unwrap() - 2.0).abs());
        }
    }
    check(worst_u2 <= 1e-12, || {
        format!("u2: | ||Av||_1 - 2 | = {worst_u2:.3e}")
    })?;

    let mut worst_u3 = 0.0f64;
    for k in 0..1000 {
        let a = haar(3, 42, k);
        let v = u3_biuni_construct(&a).map_err(|e| format!("u3 k={k}: {e}"))?;
        worst_u3 = worst_u3.max(3.0 - inf_to_1_value(&a, &v).unwrap());
    }
    check(worst_u3 <= 1e-8, || {
        format!("u3: 3 - ||Av||_1 = {worst_u3:.3e}")
    })?;

    let b7 = bjorck_sequence(7).map_err(|e| e.to_string())?;
    let e = C64::new(-0.75, 7f64.sqrt() / 4.0);
    let one = C64::new(1.0, 0.0);
    let want = [one, one, one, e, one, e, e];
    let dev = b7
        .vector
        .iter()
        .zip(want)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    check(dev <= 1e-12, || format!("Bjorck-7 differs by {dev:.3e}"))?;
    let b7_res = autocorr_residual(&b7.vector);
    check(b7_res <= 1e-12, || {
        format!("Bjorck-7 autocorrelation {b7_res:.3e}")
    })?;

    let mut worst_gauss = 0.0f64;
    let mut count = 0;
    for n in 1..=12usize {
        for lambda in (0..n as u64).filter(|&l| gcd(l, n as u64) == 1) {
            for mu in 0..n as u64 {
                let g = gauss_sequence(n, lambda, mu, cis(0.7)).map_err(|e| e.to_string())?;
                worst_gauss = worst_gauss.max(autocorr_residual(&g.vector));
                count += 1;
            }
        }
    }
    check(worst_gauss <= 1e-12, || {
        format!("Gauss autocorrelation {worst_gauss:.3e}")
    })?;
    Ok(format!("u2 {worst_u2:.1e}, u3 {worst_u3:.1e}, Bjorck-7 {b7_res:.1e}, {count} Gauss sequences {worst_gauss:.1e}"))
}

fn property_suites() -> Outcome {
    // Monotone values along projection trajectories.
    let mut steps = 0usize;
    let mut worst_drop = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    for t in 0..1100u64 {
        let n = 2 + (t as usize % 11);
        let a = if t % 5 == 0 {
            fourier_matrix(n).unwrap()
        } else {
            haar(n, 51, t)
        };
        let mut v = random_torus(n, &mut stream(52, t));
        let mut value = inf_to_1_value(&a, &v).unwrap();
        for _ in 0..100 {
            let step = project_step(&a, &v).map_err(|e| e.to_string())?;
            let Some(next) = step.into_torus() else { break };
            let next_value = inf_to_1_value(&a, &next).unwrap();
            worst_drop = worst_drop.max(value - next_value);
            worst_excess = worst_excess.max(next_value - n as f64);
            value = next_value;
            v = next;
            steps += 1;
        }
    }
    check(steps >= 100_000, || {
        format!("only {steps} projection steps")
    })?;
    check(worst_drop <= 1e-12, || {
        format!("value dropped by {worst_drop:.3e}")
    })?;
    check(worst_excess <= 1e-9, || {
        format!("value exceeded n by {worst_excess:.3e}")
    })?;

    // Certificate bounds on converged searches.
    let delta = 1e-10;
    let mut certified = 0;
    for k in 0..200u64 {
        let n = 3 + (k as usize % 8);
        let a = haar(n, 53, k);
        let cfg = SearchConfig::new(delta, 10_000, 1000, k).unwrap();
        let r = multi_start_search(&a, &cfg).map_err(|e| e.to_string())?;
        if r.converged {
            let c = certify_near(&a, &r.vector, delta)
                .map_err(|e| format!("certificate n={n} k={k}: {e}"))?;
            check(c.two_delta_bound < (2.0 * delta).sqrt(), || {
                "bound (a)".into()
            })?;
            check(c.min_abs_av >= 0.5 && c.min_abs_astar_sign >= 0.5, || {
                "bound (b)".into()
            })?;
            check(c.step_gap_bound <= c.step_gap_limit, || "bound (d)".into())?;
            certified += 1;
        }
    }
    check(certified >= 190, || {
        format!("only {certified} of 200 searches converged")
    })?;

    // Predicate consistency on reported biunimodular vectors.
    let mut worst_pred = 0.0f64;
    let mut reported = 0;
    for k in 0..500 {
        let a2 = haar(2, 54, k);
        worst_pred = worst_pred.max(
            biuni_predicates(&a2, &u2_biuni(&a2).unwrap().first())
                .unwrap()
                .max_gap(),
        );
        let a3 = haar(3, 55, k);
        worst_pred = worst_pred.max(
            biuni_predicates(&a3, &u3_biuni_construct(&a3).unwrap())
                .unwrap()
                .max_gap(),
        );
        reported += 2;
    }
    for n in [5usize, 6, 7] {
        let f = fourier_matrix(n).unwrap();
        let cfg = SearchConfig::new(1e-7, 30_000, 300, 2).unwrap();
        for orbit in census(n, &cfg, CENSUS_TAU)
            .map_err(|e| e.to_string())?
            .orbits
        {
            worst_pred = worst_pred.max(
                biuni_predicates(&f, &orbit.representative)
                    .unwrap()
                    .max_gap(),
            );
            reported += 1;
        }
    }
    check(worst_pred <= 1e-8, || {
        format!("predicate gap {worst_pred:.3e}")
    })?;

    // The F4 continuum (1, z, 1, -z).
    let f4 = fourier_matrix(4).unwrap();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let family = ContinuumFamily::new(&f4, &[one, zero, one, zero], &[zero, one, zero, -one])
        .map_err(|e| e.to_string())?;
    let mut worst_family = 0.0f64;
    for k in 0..1000 {
        let z = cis(std::f64::consts::TAU * (k as f64 + 0.5) / 1000.0);
        let v = family.member(z).map_err(|e| e.to_string())?;
        check(
            (v[1] - z).norm() < 1e-15 && (v[3] + z).norm() < 1e-15,
            || "family member shape".into(),
        )?;
        let image = f4.apply(&v);
        worst_family = worst_family.max(
            image
                .iter()
                .map(|w| (w.norm() - 1.0).abs())
                .fold(0.0, f64::max),
        );
    }
    check(worst_family <= 1e-12, || {
        format!("F4 family off torus by {worst_family:.3e}")
    })?;
    Ok(format!(
        "{steps} steps (drop {worst_drop:.1e}), {certified} certificates, {reported} predicate checks ({worst_pred:.1e}), F4 family {worst_family:.1e}"
    ))
}

fn geometry() -> Outcome {
    for n in 2..=10 {
        let r = im_rank(&full_rank_witness(n).unwrap(), RANK_CUTOFF).map_err(|e| e.to_string())?;
        check(r.jac_rank == n * n, || {
            format!("witness n={n}: jac_rank {}", r.jac_rank)
        })?;
    }
    for n in 2..=8 {
        let f = phasing_dim(&fourier_matrix(n).unwrap(), RANK_CUTOFF).map_err(|e| e.to_string())?;
        check(f.manifold_dim == 2 * n - 1, || {
            format!("phasing_dim(F_{n}) = {}", f.manifold_dim)
        })?;
        let i = phasing_dim(&UnitaryMatrix::identity(n), RANK_CUTOFF).map_err(|e| e.to_string())?;
        check(i.manifold_dim == n, || {
            format!("phasing_dim(I_{n}) = {}", i.manifold_dim)
        })?;
    }
    Ok("witness n=2..10, F_n and I_n for n=2..8".into())
}

fn regions() -> Outcome {
    let grid = region_grid(&fourier_matrix(3).unwrap(), 512).map_err(|e| e.to_string())?;
    check(grid.uncovered().is_none(), || {
        format!("cell {:?} uncovered", grid.uncovered())
    })?;
    let clusters = grid.triple_boundary_clusters();
    check(clusters == 6, || {
        format!("{clusters} triple-boundary clusters")
    })?;
    Ok(format!("covered, {clusters} clusters at 512"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 orbit census", census_orbits),
        ("2 effectiveness bench", effectiveness_bench),
        ("3 factorization round trips", factorization_round_trips),
        ("4 closed forms", closed_forms),
        ("5 property suites", property_suites),
        ("6 geometry diagnostics", geometry),
        ("7 region figure", regions),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let t0 = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
