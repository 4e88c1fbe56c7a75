//! Acceptance suite: the twelve gates this library must clear, one test
//! and one printed verdict line per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every
//! line. Tolerances are pinned here, next to the assertions they guard.

use gagliardo::constants::{alpha_n, gamma, sharp_sobolev_constant, FracParams};
use gagliardo::experiments::{
    build_bump, bump_sum_corpus, counterexample_sweep, finequality_check, place_bump,
    random_grid_corpus, theorem2_corpus, theorem2_ratio_suite, BumpSpec, Placement, SweepReport,
};
use gagliardo::geometry::Domain;
use gagliardo::kernel::{
    hardy_pointwise_bound, lemma_decrease_inside, lemma_decrease_outside, tail_kernel,
};
use gagliardo::rearrange::{rearrange, GridFunction};
use gagliardo::seminorm::{
    energy_domain, energy_fullspace, energy_rearranged, profile_energy_fullspace,
};
use std::sync::OnceLock;
use std::time::Instant;

/// The reference sweep: boundary bumps on (-1, 1), sigma = 0.6, p = 2.
const EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Documented corpus seeds. Criterion 10 uses seed 0, the front end's
/// default, so the CLI and this suite exercise the same fixed corpus.
const GRID_CORPUS_SEED: u64 = 11;
const SMOOTH_CORPUS_SEED: u64 = 7;
const RATIO_CORPUS_SEED: u64 = 0;

fn verdict(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {criterion}: {detail}");
    assert!(pass, "criterion {criterion}: {detail}");
}

struct Bundle {
    report: SweepReport,
    /// rhs - lhs for the smallest epsilon, recomputed at half the grid
    /// spacing.
    gap_at_half_h: f64,
    sweep_seconds: f64,
    /// Per epsilon: full-space energy of the bump and of its
    /// rearrangement, each with its error estimate.
    fullspace_pairs: Vec<(f64, f64, f64, f64)>,
}

static BUNDLE: OnceLock<Bundle> = OnceLock::new();

fn reference_params() -> FracParams {
    FracParams::new(1, 0.6, 2.0).unwrap()
}

fn bundle() -> &'static Bundle {
    BUNDLE.get_or_init(|| {
        let d = Domain::interval(-1.0, 1.0);
        let params = reference_params();
        let h = EPSILONS[3] / 16.0;
        // The runtime criterion is single-threaded; confine the sweep and
        // its half-spacing rerun to a one-thread pool and time them.
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let start = Instant::now();
        let (report, gap_at_half_h) = pool.install(|| {
            let report =
                counterexample_sweep(&d, &params, &EPSILONS, &Placement::Boundary, Some(h))
                    .unwrap();
            let h2 = h / 2.0;
            let eps = EPSILONS[3];
            let center = place_bump(&d, eps, &Placement::Boundary, h2, &params).unwrap();
            let u = build_bump(&BumpSpec::new(center, eps).unwrap(), h2).unwrap();
            let lhs = energy_domain(&u, &d, &params).unwrap();
            let rhs = energy_rearranged(&u, &d.symmetrize(), &params).unwrap();
            (report, rhs.value - lhs.value)
        });
        let sweep_seconds = start.elapsed().as_secs_f64();
        let hull = Domain::interval(-2.0, 2.0);
        let fullspace_pairs = EPSILONS
            .iter()
            .map(|&eps| {
                let center = place_bump(&d, eps, &Placement::Boundary, h, &params).unwrap();
                let u = build_bump(&BumpSpec::new(center, eps).unwrap(), h).unwrap();
                let full_u = energy_fullspace(&u, &params, &hull).unwrap();
                let full_star = profile_energy_fullspace(&rearrange(&u), &params, &hull).unwrap();
                (
                    full_u.value,
                    full_u.error_estimate,
                    full_star.value,
                    full_star.error_estimate,
                )
            })
            .collect();
        Bundle {
            report,
            gap_at_half_h,
            sweep_seconds,
            fullspace_pairs,
        }
    })
}

#[test]
fn criterion_01_boundary_bump_reverses_the_energy_comparison() {
    let b = bundle();
    let smallest = b.report.records.last().unwrap();
    assert_eq!(smallest.epsilon, EPSILONS[3]);
    let second = &b.report.records[2];
    let pass = smallest.flagged && b.gap_at_half_h > 0.0 && b.sweep_seconds < 120.0;
    verdict(
        1,
        pass,
        &format!(
            "eps=0.025 flagged={} (gap {:.4} vs noise {:.2e}), eps=0.05 flagged={}, \
             sign at h/2 {:+.4}, sweep {:.2}s single-threaded",
            smallest.flagged,
            smallest.rhs - smallest.lhs,
            smallest.flag_scale,
            second.flagged,
            b.gap_at_half_h,
            b.sweep_seconds
        ),
    );
}

#[test]
fn criterion_02_interior_center_variant_and_two_interval_tails() {
    let d = Domain::interval(-1.0, 1.0);
    let params = reference_params();
    let h = EPSILONS[3] / 16.0;
    // Center placement on (-1, 1) puts the bump at x = 1/2.
    let center = place_bump(&d, 0.2, &Placement::Center, h, &params).unwrap();
    assert!((center[0] - 0.5).abs() < 1e-12);
    let report = counterexample_sweep(&d, &params, &EPSILONS, &Placement::Center, Some(h)).unwrap();
    let smallest = report.records.last().unwrap();

    let union = Domain::Union {
        parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(1.2, 1.8)],
    };
    let (f0, f0_star) = finequality_check(&union, &params).unwrap();
    // Closed forms for the complement tails, evaluated independently:
    // complement (-inf,-1] u [1,1.2] u [1.8,inf), symmetrized ball radius
    // (2 + 0.6)/2 = 1.3.
    let sp = params.sp();
    let f0_expected =
        (1f64.powf(-sp) + (1f64.powf(-sp) - 1.2f64.powf(-sp)) + 1.8f64.powf(-sp)) / sp;
    let star_expected = 2.0 * 1.3f64.powf(-sp) / sp;
    let closed_forms_ok =
        (f0 - f0_expected).abs() < 1e-10 && (f0_star - star_expected).abs() < 1e-10;
    let pass = smallest.flagged && closed_forms_ok && f0 > f0_star;
    verdict(
        2,
        pass,
        &format!(
            "center sweep flagged at eps=0.025: {} (gap {:.4}); union tails F0 {:.12} \
             > F0* {:.12}, closed forms matched to 1e-10: {}",
            smallest.flagged,
            smallest.rhs - smallest.lhs,
            f0,
            f0_star,
            closed_forms_ok
        ),
    );
}

#[test]
fn criterion_03_cross_term_scaling_rates() {
    let b = bundle();
    let params = reference_params();
    let domain_target = params.n as f64 - params.sp();
    let star_target = params.n as f64;
    let slope_domain = b.report.slope_cross_domain.unwrap();
    let slope_star = b.report.slope_cross_symmetrized.unwrap();
    let domain_ok = (slope_domain - domain_target).abs() <= 0.15 * domain_target.abs();
    let star_ok = (slope_star - star_target).abs() <= 0.15 * star_target.abs();
    verdict(
        3,
        domain_ok && star_ok,
        &format!(
            "domain-side slope {slope_domain:.4} vs {domain_target} (15% window), \
             symmetrized-side slope {slope_star:.4} vs {star_target}"
        ),
    );
}

#[test]
fn criterion_04_fullspace_energies_agree_across_rearrangement() {
    let b = bundle();
    let mut worst = 0.0f64;
    let mut pass = true;
    for &(full_u, est_u, full_star, est_star) in &b.fullspace_pairs {
        let diff = (full_u - full_star).abs();
        let tol = 2.0 * (est_u + est_star);
        worst = worst.max(diff / tol);
        if diff > tol {
            pass = false;
        }
    }
    verdict(
        4,
        pass,
        &format!(
            "max |fullspace(u) - fullspace(u*)| over the sweep is {:.2}x the \
             allowed 2x combined estimate",
            worst
        ),
    );
}

#[test]
fn criterion_05_hull_independence_and_tail_closed_form() {
    let params = reference_params();
    let u = build_bump(&BumpSpec::new(vec![0.0], 0.2).unwrap(), 1.0 / 128.0).unwrap();
    let narrow = energy_fullspace(&u, &params, &Domain::interval(-1.0, 1.0)).unwrap();
    let wide = energy_fullspace(&u, &params, &Domain::interval(-3.0, 3.0)).unwrap();
    let diff = (narrow.value - wide.value).abs();
    let tol = narrow.error_estimate + wide.error_estimate;
    let half = FracParams::new(1, 0.25, 2.0).unwrap();
    let tail = tail_kernel(&Domain::interval(-1.0, 1.0), &[0.0], &half).unwrap();
    let tail_ok = (tail - 4.0).abs() < 1e-10;
    verdict(
        5,
        diff <= tol && tail_ok,
        &format!(
            "hulls (-1,1) vs (-3,3): |{:.6} - {:.6}| = {:.2e} <= {:.2e}; \
             interval tail at the origin {:.12} vs 4",
            narrow.value, wide.value, diff, tol, tail
        ),
    );
}

/// Copy the support into a padded box at a different cell offset and a
/// different absolute origin. The law under test says the profile cannot
/// see any of that.
fn embed_shifted(u: &GridFunction, shift: &[usize]) -> GridFunction {
    let pad = 3usize;
    let new_shape: Vec<usize> = u.shape.iter().map(|&s| s + 2 * pad).collect();
    let mut values = vec![0.0; new_shape.iter().product()];
    for (flat, &v) in u.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut idx = vec![0usize; u.n];
        let mut rem = flat;
        for axis in (0..u.n).rev() {
            idx[axis] = rem % u.shape[axis];
            rem /= u.shape[axis];
        }
        let mut target = 0usize;
        for axis in 0..u.n {
            target = target * new_shape[axis] + idx[axis] + shift[axis];
        }
        values[target] = v;
    }
    let origin: Vec<f64> = u.origin.iter().map(|o| o - 4.0 * u.h).collect();
    GridFunction::new(origin, u.h, new_shape, values).unwrap()
}

#[test]
fn criterion_06_rearrangement_laws_on_randomized_grids() {
    let corpus = random_grid_corpus(100, GRID_CORPUS_SEED);
    let mut saw_2d = false;
    for u in &corpus {
        saw_2d = saw_2d || u.n == 2;
        let profile = rearrange(u);
        // Equimeasurability as an exact multiset identity.
        let mut values: Vec<f64> = u.values.iter().copied().filter(|&v| v > 0.0).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(values, profile.expand_sorted(), "multiset identity broke");
        // Norm preservation for q = 1, 2, infinity.
        for q in [1.0, 2.0, f64::INFINITY] {
            let a = u.lp_norm(q).unwrap();
            let b = profile.lp_norm(q).unwrap();
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300),
                "L^{q} norm moved: {a} vs {b}"
            );
        }
        // Whole-cell translation invariance, with padding and a moved
        // origin thrown in.
        let shift: Vec<usize> = (0..u.n).map(|axis| 1 + (axis + 1) % 5).collect();
        let translated = embed_shifted(u, &shift);
        assert_eq!(profile, rearrange(&translated), "translation leaked");
    }
    verdict(
        6,
        saw_2d,
        &format!(
            "multiset, L^q (q=1,2,inf) and translation laws exact on {} grids \
             (seed {GRID_CORPUS_SEED}), 2-D cases included: {saw_2d}",
            corpus.len()
        ),
    );
}

#[test]
fn criterion_07_rearrangement_does_not_increase_fullspace_energy() {
    let params = reference_params();
    let h = 1.0 / 128.0;
    let corpus = bump_sum_corpus(20, h, SMOOTH_CORPUS_SEED, 3).unwrap();
    let hull = Domain::interval(-2.0, 2.0);
    let mut worst_margin = f64::INFINITY;
    let mut pass = true;
    for u in &corpus {
        let full_u = energy_fullspace(u, &params, &hull).unwrap();
        let full_star = profile_energy_fullspace(&rearrange(u), &params, &hull).unwrap();
        let slack = 2.0 * (full_u.error_estimate + full_star.error_estimate);
        let margin = full_u.value - full_star.value;
        worst_margin = worst_margin.min(margin);
        if margin < -slack {
            pass = false;
        }
    }
    verdict(
        7,
        pass,
        &format!(
            "fullspace(u) >= fullspace(u*) - 2x estimates on 20 smooth functions \
             (seed {SMOOTH_CORPUS_SEED}); worst margin {worst_margin:.4}"
        ),
    );
}

#[test]
fn criterion_08_radial_weight_comparisons() {
    let one_d: Vec<Domain> = vec![
        Domain::interval(-0.5, 1.5),
        Domain::interval(-1.5, 0.5),
        Domain::Union {
            parts: vec![Domain::interval(-0.3, 1.0), Domain::interval(1.2, 1.7)],
        },
        Domain::interval(-2.0, 0.3),
        Domain::Union {
            parts: vec![Domain::interval(-0.4, 0.4), Domain::interval(0.5, 0.9)],
        },
    ];
    let two_d: Vec<Domain> = vec![
        Domain::Rect {
            lo: vec![-0.6, -0.5],
            hi: vec![1.0, 0.7],
        },
        Domain::Union {
            parts: vec![
                Domain::ball(&[0.0, 0.0], 0.8),
                Domain::ball(&[1.5, 0.3], 0.4),
            ],
        },
    ];
    let mut checks = 0usize;
    let mut weakest = f64::INFINITY;
    let mut pass = true;
    let mut run = |cmp: gagliardo::kernel::LemmaComparison| {
        checks += 1;
        let margin = cmp.lhs - cmp.rhs;
        let floor = 5.0 * cmp.quadrature_error;
        weakest = weakest.min(if floor > 0.0 {
            margin / floor
        } else {
            f64::INFINITY
        });
        if !(margin > floor) {
            pass = false;
        }
    };
    for d in &one_d {
        run(lemma_decrease_inside(d, 0.5).unwrap());
        for alpha in [2.0, 3.0] {
            run(lemma_decrease_outside(d, alpha).unwrap());
        }
    }
    for d in &two_d {
        for alpha in [0.7, 1.3] {
            run(lemma_decrease_inside(d, alpha).unwrap());
        }
        run(lemma_decrease_outside(d, 3.0).unwrap());
    }
    verdict(
        8,
        pass,
        &format!(
            "{checks} strict comparisons on 5 one-dimensional and 2 planar \
             non-ball domains; weakest quadrature-limited margin {weakest:.1}x \
             the 5x floor"
        ),
    );
}

#[test]
fn criterion_09_pointwise_tail_bound_samples() {
    let domains: Vec<Domain> = vec![
        Domain::interval(-1.0, 1.0),
        Domain::Union {
            parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(1.2, 1.8)],
        },
        Domain::ball(&[0.0, 0.0], 1.0),
        Domain::ball(&[0.4, -0.2], 1.0),
    ];
    let mut checked = 0usize;
    let mut pass = true;
    for d in &domains {
        for sigma in [0.6, 0.75] {
            let params = FracParams::new(d.dim(), sigma, 2.0).unwrap();
            for x in d.interior_lattice_points(50).unwrap() {
                let bound = hardy_pointwise_bound(d, &x, &params).unwrap();
                checked += 1;
                if bound.lhs > bound.rhs * (1.0 + 1e-6) {
                    pass = false;
                }
            }
        }
    }
    verdict(
        9,
        pass,
        &format!(
            "lhs <= rhs at {checked} sample points (4 domains, sigma*p in \
             {{1.2, 1.5}}, 50 interior points each)"
        ),
    );
}

#[test]
fn criterion_10_rearranged_to_domain_ratios_stay_bounded() {
    let params = FracParams::new(1, 0.7, 2.0).unwrap();
    let corpus = theorem2_corpus(1.0 / 128.0, RATIO_CORPUS_SEED).unwrap();
    let suite = theorem2_ratio_suite(&corpus, &params).unwrap();
    let corpus_finite = suite.ratios.iter().all(|r| r.is_finite() && *r > 0.0);

    // The boundary-bump family from the reference sweep, resolved at
    // 16 cells per bump radius.
    let d = Domain::interval(-1.0, 1.0);
    let star = d.symmetrize();
    let mut family = Vec::new();
    for &eps in &EPSILONS {
        let h = eps / 16.0;
        let center = place_bump(&d, eps, &Placement::Boundary, h, &params).unwrap();
        let u = build_bump(&BumpSpec::new(center, eps).unwrap(), h).unwrap();
        let numerator = profile_energy_fullspace(&rearrange(&u), &params, &star)
            .unwrap()
            .value;
        let denominator = energy_domain(&u, &d, &params).unwrap().value;
        family.push(numerator / denominator);
    }
    let max = family.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = family.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = max / min;
    verdict(
        10,
        corpus_finite && spread < 10.0,
        &format!(
            "10 corpus ratios finite (seed {RATIO_CORPUS_SEED}, max {:.4}); \
             bump-family ratios span {:.4}..{:.4}, spread {:.2} < 10",
            suite.max_ratio, min, max, spread
        ),
    );
}

#[test]
fn criterion_11_constants_against_independent_references() {
    let mut recurrence_ok = true;
    for &x in &[0.5, 1.3, 2.7, 4.2, 6.9] {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        if (lhs - rhs).abs() > 1e-10 * lhs.abs() {
            recurrence_ok = false;
        }
    }
    // Unit-ball volumes in closed form; the recursion must land on the
    // same floats exactly.
    let alpha_ok = alpha_n(1) == 2.0
        && alpha_n(2) == std::f64::consts::PI
        && alpha_n(3) == 4.0 * std::f64::consts::PI / 3.0;
    // The n=2, sigma=1/2 sharp constant collapses symbolically to
    // 4*pi^(3/2); the 50-digit value of that expression is
    // 22.273311987326831381139271928475342808054497561133.
    let s = sharp_sobolev_constant(2, 0.5).unwrap();
    let reference = 22.273311987326831;
    let sharp_ok = (s - reference).abs() <= 1e-10 * reference;
    verdict(
        11,
        recurrence_ok && alpha_ok && sharp_ok,
        &format!(
            "gamma recurrence to 1e-10: {recurrence_ok}; ball volumes exact for \
             n=1,2,3: {alpha_ok}; S(2, 0.5) = {s:.15} vs 4*pi^(3/2)"
        ),
    );
}

#[test]
fn criterion_12_thread_count_leaves_artifacts_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_gagliardo");
    let root = std::env::temp_dir().join(format!("gagliardo-accept-{}", std::process::id()));
    std::fs::create_dir_all(&root).unwrap();
    let config_path = root.join("config.json");
    std::fs::write(
        &config_path,
        r#"{
  "domain": {"shape": "interval", "a": -1.0, "b": 1.0},
  "params": {"n": 1, "sigma": 0.6, "p": 2.0},
  "epsilons": [0.2, 0.1, 0.05, 0.025],
  "placement": {"mode": "boundary"}
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = root.join(format!("threads-{threads}"));
        let status = std::process::Command::new(bin)
            .args(["counterexample", "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(
            status.success(),
            "sweep run failed with --threads {threads}"
        );
        outputs.push((
            std::fs::read(out.join("sweep.csv")).unwrap(),
            std::fs::read(out.join("sweep.json")).unwrap(),
        ));
    }
    let csv_same = outputs[0].0 == outputs[1].0;
    let json_same = outputs[0].1 == outputs[1].1;
    let _ = std::fs::remove_dir_all(&root);
    verdict(
        12,
        csv_same && json_same,
        &format!(
            "--threads 1 vs --threads 8: sweep.csv identical: {csv_same}, \
             sweep.json identical: {json_same}"
        ),
    );
}
