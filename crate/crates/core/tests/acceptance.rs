//! Acceptance gate. Runs every criterion, prints one line each and exits
//! nonzero if any fails. Built with `harness = false` so the summary is
//! always visible under `cargo test`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use xis3::harmonics::{harmonic_basis, laplace_beltrami_check, zonal_identity_suite, FD_STEP, FD_TOLERANCE};
use xis3::matrix::Matrix;
use xis3::operators::{
    annihilates_block, block_gram, contraction_and_smoothing_check, exactness_report, is_gram_self_adjoint,
    kernel_invariance_check, realization_agreement, reflection, solve_box, box_apply, Mode, KERNEL_TOLERANCE,
    REALIZATION_TOLERANCE,
};
use xis3::poly::{monomials4, sphere_moment};
use xis3::product::{random_spectral, Support};
use xis3::quadrature::{mc_monomial_moments, product_rule, CERTIFY_TOLERANCE};
use xis3::scalar::{rat, rational_to_f64, Rational};

const SEED: u64 = 20240917;
const MAX_DIMENSION_DEGREE: u32 = 8;
const MAX_EXACT_LB_DEGREE: u32 = 6;
const MAX_FD_LB_DEGREE: u32 = 4;
const MAX_ZONAL_DEGREE: u32 = 6;
const MAX_ANNIHILATION_DEGREE: usize = 3;
const MAX_REFLECTION_DEGREE: usize = 3;
const AGREEMENT_INPUTS: usize = 25;
const AGREEMENT_BIDEGREE: u32 = 3;
const AGREEMENT_POINTS: usize = 8;
const COUPLE_TRUNCATION: usize = 3;
const SOLVE_BOX_ROUND_TRIPS: u64 = 10;
const CONTRACTION_TRIALS: usize = 100;
const EXACT_CONTRACTION_TRUNCATION: usize = 3;
const MAX_SMOOTHING_TRUNCATION: usize = 6;
const SOBOLEV_ORDERS: [f64; 3] = [0.0, 1.0, 2.0];
const INVARIANCE_DEGREES: [usize; 2] = [0, 1];
const INVARIANCE_CONFIGURATIONS: usize = 10;
const MC_SAMPLES: usize = 10_000_000;
const MC_SIGMAS: f64 = 5.0;
const MC_MAX_DEGREE: u32 = 8;
const MAX_RULE_ORDER: usize = 8;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = fn() -> Outcome;

fn dimension_law() -> Outcome {
    let mut bad = Vec::new();
    for k in 0..=MAX_DIMENSION_DEGREE {
        let dim = harmonic_basis(k).dimension();
        let expected = ((k + 1) * (k + 1)) as usize;
        if dim != expected {
            bad.push(format!("k={k}: {dim} != {expected}"));
        }
    }
    Outcome { passed: bad.is_empty(), detail: if bad.is_empty() { format!("dim H_k = (k+1)^2 for k <= {MAX_DIMENSION_DEGREE}") } else { bad.join("; ") } }
}

fn eigenvalue_law() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    let mut worst_fd: f64 = 0.0;
    for k in 0..=MAX_EXACT_LB_DEGREE {
        for (i, p) in harmonic_basis(k).elements().iter().enumerate() {
            checked += 1;
            match laplace_beltrami_check(p, SEED + i as u64) {
                Ok(r) => {
                    if !r.exact_ok {
                        bad.push(format!("k={k} element {i}: exact route"));
                    }
                    if k <= MAX_FD_LB_DEGREE {
                        worst_fd = worst_fd.max(r.fd_max_relative_error);
                        if !r.fd_ok {
                            bad.push(format!("k={k} element {i}: fd error {:.2e}", r.fd_max_relative_error));
                        }
                    }
                }
                Err(e) => bad.push(format!("k={k} element {i}: {e}")),
            }
        }
    }
    let detail = if bad.is_empty() {
        format!(
            "{checked} basis elements, exact k <= {MAX_EXACT_LB_DEGREE}, fd (h={FD_STEP:e}, rel tol {FD_TOLERANCE:e}) k <= {MAX_FD_LB_DEGREE}, worst fd {worst_fd:.2e}"
        )
    } else {
        bad.join("; ")
    };
    Outcome { passed: bad.is_empty(), detail }
}

fn zonal_identities() -> Outcome {
    let mut bad = Vec::new();
    for k in 0..=MAX_ZONAL_DEGREE {
        match zonal_identity_suite(k) {
            Ok(r) if r.passed => {}
            Ok(r) => bad.push(format!("k={k}: {}", serde_json::to_string(&r).unwrap_or_default())),
            Err(e) => bad.push(format!("k={k}: {e}")),
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() { format!("three identities equal (k+1)^2 for k <= {MAX_ZONAL_DEGREE}") } else { bad.join("; ") },
    }
}

fn annihilation() -> Outcome {
    let mut bad = Vec::new();
    let mut pairs = 0;
    for k in 0..=MAX_ANNIHILATION_DEGREE {
        for l in 0..=MAX_ANNIHILATION_DEGREE {
            if k == l {
                continue;
            }
            pairs += 1;
            match annihilates_block(k, l) {
                Ok(true) => {}
                Ok(false) => bad.push(format!("({k},{l})")),
                Err(e) => bad.push(format!("({k},{l}): {e}")),
            }
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() { format!("T(Y_i (x) Y_j) = 0 on {pairs} off-diagonal blocks") } else { format!("not annihilated: {}", bad.join(", ")) },
    }
}

fn multiplier_law() -> Outcome {
    let mut bad = Vec::new();
    for k in 0..=MAX_REFLECTION_DEGREE {
        let report = match reflection(k) {
            Ok(r) => r,
            Err(e) => {
                bad.push(format!("k={k}: {e}"));
                continue;
            }
        };
        let t = &report.matrix_t;
        let lambda = rat(1, k as i64 + 1);
        let lambda_sq = &lambda * &lambda;
        let t_sq = t.matmul(t).expect("square");
        let r = t.scale(&Rational::from_integer((k as i64 + 1).into()));
        let r_sq = r.matmul(&r).expect("square");
        let n = t.rows();
        let t_sq_ok = t_sq == Matrix::identity(n).scale(&lambda_sq);
        let r_sq_ok = r_sq.is_identity();
        let adjoint_ok = is_gram_self_adjoint(&r, &block_gram::<Rational>(k, k));
        let (plus, minus) = report.eigen_multiplicities;
        if !(t_sq_ok && r_sq_ok && adjoint_ok && report.lambda == lambda && plus + minus == n) {
            bad.push(format!("k={k}: T^2 {t_sq_ok}, R^2 {r_sq_ok}, self-adjoint {adjoint_ok}"));
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() { format!("T^2 = (k+1)^-2 Id, R^2 = Id, R self-adjoint for k <= {MAX_REFLECTION_DEGREE}") } else { bad.join("; ") },
    }
}

fn realization() -> Outcome {
    match realization_agreement(AGREEMENT_INPUTS, AGREEMENT_BIDEGREE, AGREEMENT_POINTS, SEED) {
        Ok(r) => Outcome {
            passed: r.passed && r.symbolic_equals_spectral && r.kernel_max_error <= REALIZATION_TOLERANCE,
            detail: format!(
                "{} inputs: symbolic == spectral {}, kernel error {:.2e} (tol {REALIZATION_TOLERANCE:e})",
                r.inputs, r.symbolic_equals_spectral, r.kernel_max_error
            ),
        },
        Err(e) => Outcome { passed: false, detail: e.to_string() },
    }
}

fn exact_couple() -> Outcome {
    let report = match exactness_report(COUPLE_TRUNCATION, SEED) {
        Ok(r) => r,
        Err(e) => return Outcome { passed: false, detail: e.to_string() },
    };
    let inclusions = [&report.ker_t, &report.im_t, &report.ker_box, &report.im_box];
    let mut passed = report.passed && report.compositions_vanish && inclusions.iter().all(|i| i.passed);
    let mut failures = Vec::new();
    for t in 0..SOLVE_BOX_ROUND_TRIPS {
        let c = random_spectral(COUPLE_TRUNCATION, Support::OffDiagonal, SEED + t);
        match solve_box(&c) {
            Ok(u) => {
                let diagonal_zero = u.blocks().all(|(&(k, l), m)| k != l || m.is_zero());
                if box_apply(&u) != c || !diagonal_zero {
                    failures.push(t);
                }
            }
            Err(_) => failures.push(t),
        }
    }
    passed &= failures.is_empty();
    Outcome {
        passed,
        detail: format!(
            "N={}: four inclusions {}, compositions vanish {}, solve_box round trips {}/{}",
            report.truncation,
            inclusions.iter().all(|i| i.passed),
            report.compositions_vanish,
            SOLVE_BOX_ROUND_TRIPS as usize - failures.len(),
            SOLVE_BOX_ROUND_TRIPS
        ),
    }
}

fn contraction_smoothing() -> Outcome {
    let bound = 2f64.sqrt();
    let mut bad = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for &s in &SOBOLEV_ORDERS {
        for (n, mode) in [(EXACT_CONTRACTION_TRUNCATION, Mode::Exact), (MAX_SMOOTHING_TRUNCATION, Mode::Float)] {
            let trials = if mode == Mode::Exact { CONTRACTION_TRIALS } else { 0 };
            match contraction_and_smoothing_check(n, s, trials, SEED, mode) {
                Ok(r) => {
                    worst_ratio = worst_ratio.max(r.worst_ratio);
                    if mode == Mode::Exact && !r.contraction_holds {
                        bad.push(format!("contraction fails at s={s}: ratio {:.3}", r.worst_ratio));
                    }
                    let mut running: f64 = 0.0;
                    for d in &r.per_degree {
                        running = running.max(d.block_norm);
                        worst_norm = worst_norm.max(running);
                        if running > bound {
                            bad.push(format!("N={} s={s}: estimate {running:.4}", d.degree));
                        }
                    }
                    if r.per_degree.len() != n + 1 {
                        bad.push(format!("N={n}: {} degrees reported", r.per_degree.len()));
                    }
                }
                Err(e) => bad.push(e.to_string()),
            }
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!(
                "{CONTRACTION_TRIALS} inputs per s, worst |Tf|^2/|f|^2 {worst_ratio:.4}; norm estimate {worst_norm:.4} <= sqrt 2 for N <= {MAX_SMOOTHING_TRUNCATION}"
            )
        } else {
            bad.join("; ")
        },
    }
}

fn kernel_invariance() -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for &k in &INVARIANCE_DEGREES {
        let r = kernel_invariance_check(k, INVARIANCE_CONFIGURATIONS, SEED + k as u64);
        worst = worst.max(r.right_defect).max(r.left_defect);
        if !(r.passed && r.right_defect <= KERNEL_TOLERANCE && r.left_defect <= KERNEL_TOLERANCE) {
            bad.push(format!("k={k}: right {:.2e}, left {:.2e}", r.right_defect, r.left_defect));
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{INVARIANCE_CONFIGURATIONS} configurations at k in {INVARIANCE_DEGREES:?}, worst defect {worst:.2e} (tol {KERNEL_TOLERANCE:e})")
        } else {
            bad.join("; ")
        },
    }
}

fn integration_self_validation() -> Outcome {
    let mut bad = Vec::new();
    let mut even = 0;
    let mut worst_sigma: f64 = 0.0;
    for (e, mean, stderr) in mc_monomial_moments(MC_MAX_DEGREE, MC_SAMPLES, SEED) {
        if e.iter().any(|a| a % 2 == 1) {
            if !sphere_moment(e).is_zero() {
                bad.push(format!("odd monomial {e:?} has nonzero moment"));
            }
            continue;
        }
        even += 1;
        let exact = rational_to_f64(&sphere_moment(e));
        let sigmas = if stderr > 0.0 { (mean - exact).abs() / stderr } else if mean == exact { 0.0 } else { f64::INFINITY };
        worst_sigma = worst_sigma.max(sigmas);
        if sigmas > MC_SIGMAS {
            bad.push(format!("{e:?}: {sigmas:.2} sigma"));
        }
    }
    if !sphere_moment([0, 0, 0, 0]).is_one() {
        bad.push("total mass is not 1".into());
    }

    let mut previous = 0;
    for order in 1..=MAX_RULE_ORDER {
        let rule = product_rule(order);
        let d = rule.exact_degree;
        if d < (2 * order - 1) as u32 || (order > 1 && d <= previous) {
            bad.push(format!("order {order}: exact degree {d}"));
        }
        previous = d;
        for deg in 0..=d {
            for e in monomials4(deg) {
                let approx = rule.integrate(|q| {
                    q.w.powi(e[0] as i32) * q.x.powi(e[1] as i32) * q.y.powi(e[2] as i32) * q.z.powi(e[3] as i32)
                });
                if (approx - rational_to_f64(&sphere_moment(e))).abs() > CERTIFY_TOLERANCE {
                    bad.push(format!("order {order}: {e:?} not integrated exactly"));
                }
            }
        }
    }
    Outcome {
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!(
                "{even} even monomials within {MC_SIGMAS} sigma ({MC_SAMPLES} samples, worst {worst_sigma:.2}); product rule orders 1..={MAX_RULE_ORDER} certified"
            )
        } else {
            bad.join("; ")
        },
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Criterion); 10] = [
        ("dimension law", Duration::from_secs(10), dimension_law),
        ("eigenvalue law", Duration::from_secs(30), eigenvalue_law),
        ("zonal identities", Duration::from_secs(60), zonal_identities),
        ("annihilation", Duration::from_secs(120), annihilation),
        ("multiplier law", Duration::from_secs(15 * 60), multiplier_law),
        ("realization agreement", Duration::from_secs(5 * 60), realization),
        ("exact couple", Duration::from_secs(120), exact_couple),
        ("contraction and smoothing", Duration::from_secs(60), contraction_smoothing),
        ("kernel invariance", Duration::from_secs(120), kernel_invariance),
        ("integration self-validation", Duration::from_secs(180), integration_self_validation),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= *budget;
        let passed = outcome.passed && in_budget;
        if !passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2} s of {} s]{}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_budget { "" } else { " over budget" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
