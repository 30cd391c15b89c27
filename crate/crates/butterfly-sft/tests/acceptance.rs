//! Acceptance suite: end-to-end accuracy, scaling, speedup, structural and
//! storage checks, one test per criterion, each printing a PASS/FAIL line
//! (run with `cargo test --test acceptance -- --nocapture` to see them all).
//!
//! Tests serialize on a process-wide gate so wall-clock measurements and the
//! live-array instrumentation are never disturbed by a concurrent test.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use butterfly_sft::geometry::{
    attach_random_charges, sample_curve_2d, sample_surface_3d, GeometrySpec, PointSet,
};
use butterfly_sft::lowrank::{
    assemble_operators, charge_check_potentials, evaluate_from_charges, kernel_eval,
    live_charge_arrays, peak_live_charge_arrays, reset_charge_array_peak,
    solve_equivalent_charges, taylor_partial_sum, taylor_rank_bound, ChargeArray, Grid,
};
use butterfly_sft::oracle::{
    direct_transform, estimate_direct_time, estimate_error, sample_indices, SAMPLE_SEED,
};
use butterfly_sft::transform::{plan, TransformPlan};
use butterfly_sft::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static GATE: Mutex<()> = Mutex::new(());

fn gate() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|e| e.into_inner())
}

/// Accuracy thresholds per grid size.
const EPS_P: [(usize, f64); 3] = [(5, 5e-3), (7, 5e-5), (9, 5e-7)];

const GEOMETRY_SEED: u64 = 11;

fn ellipse_pair(n: u64, density: f64) -> (PointSet<2>, PointSet<2>) {
    let sources = sample_curve_2d(&GeometrySpec::ellipse_k(), n, density).unwrap();
    let sources = attach_random_charges(sources, GEOMETRY_SEED);
    let targets = sample_curve_2d(&GeometrySpec::ellipse_x(), n, density).unwrap();
    (sources, targets)
}

fn rel_l2(got: &[Complex64], want: &[Complex64]) -> f64 {
    let num: f64 = got
        .iter()
        .zip(want.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = want.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Sampled relative error against the direct oracle on 200 targets.
fn sampled_eps(
    plan: &TransformPlan<2>,
    sources: &PointSet<2>,
    targets: &PointSet<2>,
) -> f64 {
    let charges = sources.charges().unwrap();
    let approx = plan.transform(charges).unwrap();
    let idx = sample_indices(targets.len(), 200, SAMPLE_SEED);
    let sample_targets: Vec<[f64; 2]> = idx.iter().map(|&i| targets.points()[i]).collect();
    let exact = direct_transform(
        sources.points(),
        charges,
        &sample_targets,
        targets.n_scale(),
    )
    .unwrap();
    let approx_sample: Vec<Complex64> = idx.iter().map(|&i| approx[i]).collect();
    estimate_error(idx, exact, approx_sample).unwrap().eps_a
}

fn median3(mut runs: [f64; 3]) -> f64 {
    runs.sort_by(f64::total_cmp);
    runs[1]
}

/// Full pipeline wall time: tree construction, sweep and evaluation.
fn time_full_run(sources: &PointSet<2>, targets: &PointSet<2>, p: usize) -> f64 {
    let charges = sources.charges().unwrap();
    let t0 = Instant::now();
    let plan = plan(sources, targets, p).unwrap();
    let out = plan.transform(charges).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    std::hint::black_box(out);
    dt
}

/// Random complementary pair with `w^A * w^B = N` on the dyadic lattice.
fn random_pair<const D: usize>(rng: &mut ChaCha8Rng, p: usize) -> (Grid<D>, Grid<D>, u64) {
    let l = rng.random_range(2u32..=8);
    let n = 1u64 << l;
    let t = rng.random_range(0..=l);
    let w_b = (n >> t) as f64;
    let w_a = (1u64 << t) as f64;
    let mut ca = [0.0; D];
    let mut cb = [0.0; D];
    for ax in 0..D {
        ca[ax] = rng.random_range(0..(1u64 << (l - t))) as f64 * w_a;
        cb[ax] = rng.random_range(0..(1u64 << t)) as f64 * w_b;
    }
    (
        Grid { corner: ca, width: w_a, p },
        Grid { corner: cb, width: w_b, p },
        n,
    )
}

#[test]
fn criterion_1_sampled_accuracy_tracks_grid_size() {
    let _g = gate();
    let t0 = Instant::now();
    let (sources, targets) = ellipse_pair(1024, 5.0);
    for (p, tol) in EPS_P {
        let plan = plan(&sources, &targets, p).unwrap();
        let eps = sampled_eps(&plan, &sources, &targets);
        println!("criterion 1 (N=1024, p={p}): eps_a = {eps:.3e} (bound {tol:.0e})");
        assert!(eps <= tol, "criterion 1 FAIL at p={p}: {eps:.3e} > {tol:.0e}");
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("criterion 1: PASS in {dt:.1}s (budget 60s)");
    assert!(dt <= 60.0, "criterion 1 exceeded its 60s budget: {dt:.1}s");
}

#[test]
fn criterion_2_full_population_oracle_equivalence() {
    let _g = gate();
    let t0 = Instant::now();
    for n in [64u64, 128, 256] {
        let (sources, targets) = ellipse_pair(n, 5.0);
        let charges = sources.charges().unwrap();
        let exact = direct_transform(sources.points(), charges, targets.points(), n).unwrap();
        for (p, tol) in EPS_P {
            let plan = plan(&sources, &targets, p).unwrap();
            let approx = plan.transform(charges).unwrap();
            let err = rel_l2(&approx, &exact);
            println!("criterion 2 (N={n}, p={p}): rel L2 = {err:.3e} (bound {tol:.0e})");
            assert!(err <= tol, "criterion 2 FAIL at N={n}, p={p}: {err:.3e}");
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("criterion 2: PASS in {dt:.1}s (budget 30s)");
    assert!(dt <= 30.0, "criterion 2 exceeded its 30s budget: {dt:.1}s");
}

#[test]
fn criterion_3_three_dimensional_correctness() {
    let _g = gate();
    let t0 = Instant::now();
    let x_spec = GeometrySpec::Sphere3d {
        center: [0.5, 0.5, 0.5],
        radius: 0.45,
    };
    let k_spec = GeometrySpec::Torus3d {
        center: [0.5, 0.5, 0.5],
        major_radius: 0.3,
        minor_radius: 0.15,
    };
    let n = 16u64;
    let sources = attach_random_charges(
        sample_surface_3d(&k_spec, n, 25.0).unwrap(),
        GEOMETRY_SEED,
    );
    let targets = sample_surface_3d(&x_spec, n, 25.0).unwrap();
    let charges = sources.charges().unwrap();
    let plan = plan(&sources, &targets, 5).unwrap();
    let approx = plan.transform(charges).unwrap();
    let exact = direct_transform(sources.points(), charges, targets.points(), n).unwrap();
    let err = rel_l2(&approx, &exact);
    println!(
        "criterion 3 (3D, N=16, p=5, {} sources, {} targets): rel L2 = {err:.3e} (bound 5e-3)",
        sources.len(),
        targets.len()
    );
    assert!(err <= 5e-3, "criterion 3 FAIL: {err:.3e} > 5e-3");
    let dt = t0.elapsed().as_secs_f64();
    println!("criterion 3: PASS in {dt:.1}s (budget 60s)");
    assert!(dt <= 60.0, "criterion 3 exceeded its 60s budget: {dt:.1}s");
}

#[test]
fn criterion_4_near_linear_scaling() {
    let _g = gate();
    let mut times = Vec::new();
    for n in [1024u64, 2048, 4096, 8192] {
        let (sources, targets) = ellipse_pair(n, 5.0);
        let t = median3([
            time_full_run(&sources, &targets, 5),
            time_full_run(&sources, &targets, 5),
            time_full_run(&sources, &targets, 5),
        ]);
        println!("criterion 4: T_a(N={n}) = {t:.3}s (median of 3)");
        times.push((n, t));
    }
    let mut ok = true;
    for w in times.windows(2) {
        let ratio = w[1].1 / w[0].1;
        println!(
            "criterion 4: T_a({}) / T_a({}) = {ratio:.2} (bounds [1.5, 3.0])",
            w[1].0, w[0].0
        );
        ok &= (1.5..=3.0).contains(&ratio);
    }
    assert!(ok, "criterion 4 FAIL: a doubling ratio left [1.5, 3.0]");
    println!("criterion 4: PASS");
}

#[test]
fn criterion_5_speedup_over_direct() {
    let _g = gate();
    let (sources, targets) = ellipse_pair(8192, 5.0);
    let t_a = median3([
        time_full_run(&sources, &targets, 5),
        time_full_run(&sources, &targets, 5),
        time_full_run(&sources, &targets, 5),
    ]);
    let t_d = estimate_direct_time(
        sources.points(),
        sources.charges().unwrap(),
        targets.points(),
        8192,
        200,
    );
    let speedup = t_d / t_a;
    println!(
        "criterion 5 (N=8192, p=5): T_a = {t_a:.2}s, estimated T_d = {t_d:.1}s, speedup = {speedup:.1} (bound >= 10)"
    );
    assert!(speedup >= 10.0, "criterion 5 FAIL: speedup {speedup:.1} < 10");
    println!("criterion 5: PASS");
}

#[test]
fn criterion_6_structural_identities() {
    let _g = gate();
    let mut rng = ChaCha8Rng::seed_from_u64(61);

    // axis-factor identities: fit factor = diag * G * diag and transition
    // factor = diag * H * diag, entrywise over 100 random valid pairs
    let mut worst_fit = 0.0f64;
    let mut worst_tr = 0.0f64;
    for _ in 0..100 {
        let p = [5, 7, 9][rng.random_range(0..3)];
        let ops = assemble_operators(p).unwrap();
        let (a, b, n) = random_pair::<1>(&mut rng, p);
        let nf = n as f64;
        let q = (p - 1) as f64;
        for l in 0..p {
            for lp in 0..p {
                let x = a.corner[0] + l as f64 * a.width / q;
                let k = b.corner[0] + lp as f64 * b.width / q;
                let direct = kernel_eval(&[x], &[k], n);
                let m11 = Complex64::cis(std::f64::consts::TAU * x * b.corner[0] / nf);
                let m12 = Complex64::cis(
                    std::f64::consts::TAU * a.corner[0] * (lp as f64 * b.width / q) / nf,
                );
                worst_fit = worst_fit.max((direct - m11 * ops.g_entry(l, lp) * m12).norm());
            }
        }
        if b.width >= 2.0 {
            let child = Grid::<1> {
                corner: [b.corner[0] + b.width / 2.0],
                width: b.width / 2.0,
                p,
            };
            for l in 0..p {
                for lp in 0..p {
                    let x = a.corner[0] + l as f64 * a.width / q;
                    let k = child.corner[0] + lp as f64 * child.width / q;
                    let direct = kernel_eval(&[x], &[k], n);
                    let e11 = Complex64::cis(std::f64::consts::TAU * x * child.corner[0] / nf);
                    let e12 = Complex64::cis(
                        std::f64::consts::TAU * a.corner[0] * (lp as f64 * child.width / q) / nf,
                    );
                    worst_tr = worst_tr.max((direct - e11 * ops.h_entry(l, lp) * e12).norm());
                }
            }
        }
    }
    println!("criterion 6: fit identity worst |diff| = {worst_fit:.3e} (bound 1e-12)");
    println!("criterion 6: transition identity worst |diff| = {worst_tr:.3e} (bound 1e-12)");
    assert!(worst_fit <= 1e-12 && worst_tr <= 1e-12);

    // tensor-axis application vs dense application
    for _ in 0..20 {
        let p = 5;
        let ops = assemble_operators(p).unwrap();
        let (a, b, n) = random_pair::<2>(&mut rng, p);
        if b.width < 2.0 {
            continue;
        }
        let child = Grid::<2> {
            corner: [b.corner[0] + b.width / 2.0, b.corner[1]],
            width: b.width / 2.0,
            p,
        };
        let f: Vec<Complex64> = (0..p * p)
            .map(|_| {
                Complex64::new(
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                )
            })
            .collect();
        let got = butterfly_sft::lowrank::apply_child_to_parent(
            &a,
            &child,
            &ChargeArray::from_values(f.clone()),
            &ops,
            n,
        )
        .unwrap();
        let want: Vec<Complex64> = a
            .nodes()
            .iter()
            .map(|x| {
                child
                    .nodes()
                    .iter()
                    .zip(f.iter())
                    .map(|(k, fv)| kernel_eval(x, k, n) * fv)
                    .sum()
            })
            .collect();
        let err = rel_l2(got.as_slice(), &want);
        assert!(err <= 1e-12, "kronecker apply mismatch {err:.3e}");
    }
    println!("criterion 6: kronecker apply matches dense to 1e-12");

    // equivalent-charge solve residual against the dense fit matrix.
    //
    // The (p=9, d=3) cell cannot meet 1e-9 in f64 arithmetic: there
    // cond(M) = cond(G)^3 ~ 2e25 exceeds 1/eps ~ 9e15, i.e. M is
    // numerically singular. Valid check potentials still determine the
    // charges only up to ~1e5-amplified roundoff, so the dense-measured
    // residual floors near 1e-8 even for a LAPACK-grade joint solve (and
    // the f64 measurement itself cannot resolve below that). The cell is
    // asserted as specified and reported honestly when it fails.
    let mut failures = Vec::new();
    for p in [5usize, 7, 9] {
        let ops = assemble_operators(p).unwrap();
        let mut run = |d: usize, worst: &mut f64| {
            for _ in 0..10 {
                match d {
                    2 => {
                        let (a, b, n) = random_pair::<2>(&mut rng, p);
                        *worst = (*worst).max(solve_residual(&a, &b, n, &ops, &mut rng));
                    }
                    _ => {
                        let (a, b, n) = random_pair::<3>(&mut rng, p);
                        *worst = (*worst).max(solve_residual(&a, &b, n, &ops, &mut rng));
                    }
                }
            }
        };
        for d in [2usize, 3] {
            let mut worst = 0.0;
            run(d, &mut worst);
            let ok = worst <= 1e-9;
            println!(
                "criterion 6: solve residual p={p} d={d}: worst {worst:.3e} (bound 1e-9) {}",
                if ok { "PASS" } else { "FAIL" }
            );
            if !ok {
                failures.push((p, d, worst));
            }
        }
    }
    if failures.is_empty() {
        println!("criterion 6: PASS");
    } else {
        panic!(
            "criterion 6 FAIL: solve residual exceeded 1e-9 at {failures:?}; at (p=9, d=3) the \
             fit matrix is numerically singular in f64 (cond ~ 2e25) and no double-precision \
             solver or measurement reaches 1e-9 there"
        );
    }
}

fn solve_residual<const D: usize>(
    a: &Grid<D>,
    b: &Grid<D>,
    n: u64,
    ops: &butterfly_sft::lowrank::GridOperators,
    rng: &mut ChaCha8Rng,
) -> f64 {
    // random valid fit data: field of random charges inside B
    let mut u = vec![Complex64::new(0.0, 0.0); a.node_count()];
    for _ in 0..20 {
        let f = Complex64::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        );
        let mut k = [0.0; D];
        for ax in 0..D {
            k[ax] = b.corner[ax] + rng.random::<f64>() * b.width;
        }
        for (dst, src) in u.iter_mut().zip(charge_check_potentials(a, &k, f, n)) {
            *dst += src;
        }
    }
    let f = solve_equivalent_charges(a, b, ChargeArray::from_values(u.clone()), ops, n).unwrap();
    // dense residual, naively assembled row by row
    let nodes_b = b.nodes();
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, want) in a.nodes().iter().zip(u.iter()) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, fv) in nodes_b.iter().zip(f.iter()) {
            acc += kernel_eval(x, k, n) * fv;
        }
        num += (acc - want).norm_sqr();
        den += want.norm_sqr();
    }
    (num / den).sqrt()
}

#[test]
fn criterion_7_low_rank_reproduction() {
    let _g = gate();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for (p, tol) in EPS_P {
        let ops = assemble_operators(p).unwrap();
        for d in [2usize, 3] {
            let mut worst = 0.0f64;
            for _ in 0..50 {
                worst = worst.max(match d {
                    2 => single_charge_worst::<2>(&mut rng, p, &ops),
                    _ => single_charge_worst::<3>(&mut rng, p, &ops),
                });
            }
            println!(
                "criterion 7: single-charge reproduction p={p} d={d}: worst {worst:.3e} (bound {tol:.0e})"
            );
            assert!(worst <= tol, "criterion 7 FAIL at p={p}, d={d}: {worst:.3e}");
        }
    }
    println!("criterion 7: PASS");
}

fn single_charge_worst<const D: usize>(
    rng: &mut ChaCha8Rng,
    p: usize,
    ops: &butterfly_sft::lowrank::GridOperators,
) -> f64 {
    let (a, b, n) = random_pair::<D>(rng, p);
    let mut k = [0.0; D];
    for ax in 0..D {
        k[ax] = b.corner[ax] + rng.random::<f64>() * b.width;
    }
    let u = charge_check_potentials(&a, &k, Complex64::new(1.0, 0.0), n);
    let e = solve_equivalent_charges(&a, &b, ChargeArray::from_values(u), ops, n).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut x = [0.0; D];
        for ax in 0..D {
            x[ax] = a.corner[ax] + rng.random::<f64>() * a.width;
        }
        let exact = kernel_eval(&x, &k, n);
        let approx = evaluate_from_charges(&x, &b, &e, n);
        worst = worst.max((exact - approx).norm());
    }
    worst
}

#[test]
fn criterion_8_two_level_storage_contract() {
    let _g = gate();
    assert_eq!(live_charge_arrays(), 0, "leaked charge arrays before run");

    let mut peaks = Vec::new();
    for n in [4096u64, 8192] {
        let (sources, targets) = ellipse_pair(n, 5.0);
        let plan = plan(&sources, &targets, 5).unwrap();
        reset_charge_array_peak();
        let (out, stats) = plan
            .transform_with_stats(sources.charges().unwrap())
            .unwrap();
        std::hint::black_box(out);
        let peak = peak_live_charge_arrays();
        // two adjacent levels at most: pairs(t) + pairs(t+1)
        let pairs = &stats.pairs_per_level;
        let bound = (0..pairs.len())
            .map(|t| pairs[t] + if t + 1 < pairs.len() { pairs[t + 1] } else { 0 })
            .max()
            .unwrap();
        println!(
            "criterion 8 (N={n}): peak live arrays {peak}, two-level bound {bound}, total pairs {}",
            stats.total_pairs()
        );
        assert!(
            peak <= bound,
            "criterion 8 FAIL at N={n}: peak {peak} > bound {bound}"
        );
        peaks.push(peak as f64);
        assert_eq!(live_charge_arrays(), 0, "charge arrays leaked by the run");
    }
    let growth = peaks[1] / peaks[0];
    println!("criterion 8: peak growth N=4096 -> 8192 is {growth:.2} (bound 2.5)");
    assert!(growth <= 2.5, "criterion 8 FAIL: growth {growth:.2} > 2.5");
    println!("criterion 8: PASS");
}

#[test]
fn criterion_9_taylor_truncation_bound() {
    let _g = gate();
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for eps in [1e-3, 1e-6] {
        let rb = taylor_rank_bound(2.0, eps).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let x = rng.random::<f64>() * 4.0 - 2.0;
            let exact = Complex64::cis(std::f64::consts::TAU * x);
            let approx = taylor_partial_sum(x, rb.terms);
            worst = worst.max((exact - approx).norm());
        }
        println!(
            "criterion 9: S = {terms} terms for eps = {eps:.0e}, worst truncation {worst:.3e}",
            terms = rb.terms
        );
        assert!(worst <= eps, "criterion 9 FAIL at eps={eps:.0e}: {worst:.3e}");
    }
    println!("criterion 9: PASS");
}
