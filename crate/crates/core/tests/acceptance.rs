//! Acceptance criteria, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use iceline::analysis::{
    detect_periodic_orbit, snowball_exit_experiment, standard_initial_condition, ExitSearch,
    OrbitSearch,
};
use iceline::budyko::{self, BudykoModel, BudykoParams};
use iceline::filippov::{
    boundary_mode, integrate, sliding_field, Boundary, BoundaryMode, EventKind, IntegratorConfig,
    PlanarState, SmoothField,
};
use iceline::jormungand::{self, JormungandModel, JormungandParams};
use iceline::quadrature::{integrate as quad, QuadratureOptions};
use iceline::{IceLineModel, Stability};

/// `1.5 · 112.88`, where the tabulated nullcline meets `η = 0`.
const A_STAR: f64 = 1.5 * 112.88;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn budyko(eta_c: f64) -> BudykoModel {
    BudykoModel::new(BudykoParams {
        eta_c,
        ..Default::default()
    })
}

fn jorm(eta_c: f64) -> JormungandModel {
    JormungandModel::new(JormungandParams {
        eta_c,
        ..Default::default()
    })
}

fn fold_location() -> Outcome {
    // Positive root of 56.91 - 48.62 η - 33.15 η².
    let (a, b, c) = (-33.15f64, -48.62f64, 56.91f64);
    let oracle = (-b - (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
    let start = Instant::now();
    let eta_f = budyko::fold();
    let elapsed = start.elapsed();
    let pass = (0.765..=0.775).contains(&eta_f)
        && (eta_f - oracle).abs() < 5e-4
        && within(elapsed, Duration::from_millis(1));
    outcome(
        pass,
        format!("eta_f = {eta_f:.6}, oracle {oracle:.6}, {elapsed:?}"),
    )
}

fn nullcline_anchors() -> Outcome {
    let h0 = budyko::h_poly(169.32, 0.0, 1.0);
    let h1 = budyko::h_poly(201.645, 1.0, 1.0);
    outcome(
        h0.abs() <= 1e-9 && h1.abs() <= 1e-9,
        format!("h(169.32, 0) = {h0:e}, h(201.645, 1) = {h1:e}"),
    )
}

fn forward_invariance() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut failures = 0;
    for _ in 0..200 {
        let m = budyko(rng.gen_range(0.01..0.99));
        let ic = PlanarState::interior(rng.gen_range(140.0..=230.0), rng.gen_range(0.0..=1.0));
        match integrate(&m, ic, 5000.0, 1.0, &cfg) {
            Ok(traj) => {
                for s in &traj.samples {
                    lo = lo.min(s.y);
                    hi = hi.max(s.y);
                }
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    let pass = failures == 0
        && lo >= -1e-9
        && hi <= 1.0 + 1e-9
        && within(elapsed, Duration::from_secs(30));
    outcome(
        pass,
        format!("eta in [{lo:e}, {hi}], {failures} failed runs, {elapsed:.2?}"),
    )
}

fn strip_attraction() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut bad = 0;
    let mut contacts = 0;
    for k in 0..50 {
        let above = k % 2 == 0;
        let eta0 = if above {
            rng.gen_range(1.1..=2.0)
        } else {
            rng.gen_range(-1.0..=-0.1)
        };
        let m = budyko(rng.gen_range(0.01..0.99));
        let ic = PlanarState::interior(rng.gen_range(140.0..=230.0), eta0);
        let traj = match integrate(&m, ic, 20.0, 1e-3, &cfg) {
            Ok(t) => t,
            Err(_) => {
                bad += 1;
                continue;
            }
        };
        let contact = traj
            .events
            .iter()
            .find(|e| e.kind == EventKind::BoundaryHit)
            .map(|e| e.t);
        if contact.is_some() {
            contacts += 1;
        }
        let until = contact.unwrap_or(f64::INFINITY);
        let monotone = traj
            .samples
            .windows(2)
            .take_while(|w| w[1].t <= until)
            .all(|w| if above { w[1].y <= w[0].y } else { w[1].y >= w[0].y });
        if !monotone {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad == 0 && within(elapsed, Duration::from_secs(10)),
        format!("{bad} non-monotone of 50 ({contacts} reached the strip), {elapsed:.2?}"),
    )
}

fn snowball_exit() -> Outcome {
    let cfg = IntegratorConfig::default();
    let m = budyko(0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut min_eta_after = f64::INFINITY;
    let mut errors = 0;
    for _ in 0..20 {
        // (A*, A* + 50]
        let a = A_STAR + 50.0 * (1.0 - rng.gen::<f64>());
        let ic = PlanarState::interior(a, 0.0);
        match snowball_exit_experiment(&m, ic, ExitSearch::default(), &cfg) {
            Ok(r) => {
                let analytic = (a - A_STAR) / (0.01 * 0.6);
                let rel = (r.measured_slide_time - analytic).abs() / analytic;
                worst = worst.max(rel);
                min_eta_after = min_eta_after.min(r.eta_after_exit_max);
            }
            Err(_) => errors += 1,
        }
    }
    let elapsed = start.elapsed();
    let pass = errors == 0
        && worst <= 0.01
        && min_eta_after > 0.01
        && within(elapsed, Duration::from_secs(20));
    outcome(
        pass,
        format!(
            "max relative slide-time error {worst:e}, min post-exit eta_max {min_eta_after:.4}, {errors} errors, {elapsed:.2?}"
        ),
    )
}

fn stability_dichotomy() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst_identity = 0.0f64;
    let cases = [
        (0.80, Stability::Stable),
        (0.85, Stability::Stable),
        (0.95, Stability::Stable),
        (0.2, Stability::Unstable),
        (0.4, Stability::Unstable),
        (0.6, Stability::Unstable),
        (0.75, Stability::Unstable),
    ];
    for (eta_c, expected) in cases {
        let r = budyko(eta_c).equilibrium();
        ok &= r.stability == expected;
        let [l1, l2] = r.eigenvalues;
        let trace = 56.91 - 48.62 * eta_c - 33.15 * eta_c * eta_c;
        let det = 0.01 * 1.0 / 1.5;
        let sum = l1 + l2;
        let prod = l1 * l2;
        worst_identity = worst_identity
            .max((sum.re - trace).abs())
            .max(sum.im.abs())
            .max((prod.re - det).abs())
            .max(prod.im.abs());
    }
    let elapsed = start.elapsed();
    let pass = ok && worst_identity <= 1e-9 && within(elapsed, Duration::from_secs(1));
    outcome(
        pass,
        format!("labels {}, identity residual {worst_identity:e}, {elapsed:.2?}", if ok { "match" } else { "MISMATCH" }),
    )
}

fn fig3_regimes() -> Outcome {
    let cfg = IntegratorConfig::default();
    let start = Instant::now();

    let m = budyko(0.85);
    let a_c = 1.5 * (112.88 + 56.91 * 0.85 - 24.31 * 0.85f64.powi(2) - 11.05 * 0.85f64.powi(3));
    let (dist, end) = match integrate(&m, PlanarState::interior(210.0, 0.95), 5000.0, 10.0, &cfg) {
        Ok(t) => {
            let l = *t.last().unwrap();
            (((l.x - a_c).powi(2) + (l.y - 0.85).powi(2)).sqrt(), l)
        }
        Err(e) => (f64::INFINITY, e.partial.last().copied().unwrap()),
    };
    let equilibrium_ok = dist < 1e-3;

    let m = budyko(0.6);
    let orbit = detect_periodic_orbit(&m, standard_initial_condition(&m), &OrbitSearch::default(), &cfg);
    let (orbit_ok, orbit_detail) = match &orbit {
        Ok(r) => (
            r.converged
                && r.eta_min < 0.05
                && r.eta_max > 0.95
                && r.includes_sliding == (true, true),
            format!(
                "orbit converged={} eta [{:.3}, {:.3}] sliding {:?}",
                r.converged, r.eta_min, r.eta_max, r.includes_sliding
            ),
        ),
        Err(e) => (false, format!("orbit error: {e}")),
    };
    let elapsed = start.elapsed();
    outcome(
        equilibrium_ok && orbit_ok && within(elapsed, Duration::from_secs(60)),
        format!(
            "eta_c=0.85 distance at t=5000 {dist:.4} (state A={:.3}, eta={:.3}, {}); eta_c=0.6 {orbit_detail}; {elapsed:.2?}",
            end.x,
            end.y,
            end.mode.as_str()
        ),
    )
}

fn jormungand_regimes() -> Outcome {
    let cfg = IntegratorConfig::default();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for eta_c in [0.8, 0.15] {
        let m = jorm(eta_c);
        match detect_periodic_orbit(&m, standard_initial_condition(&m), &OrbitSearch::default(), &cfg) {
            Ok(r) => {
                ok &= r.converged;
                parts.push(format!(
                    "eta_c={eta_c}: converged={} period {:.1} eta [{:.3}, {:.3}]",
                    r.converged, r.period, r.eta_min, r.eta_max
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("eta_c={eta_c}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, Duration::from_secs(120)),
        format!("{}; {elapsed:.2?}", parts.join("; ")),
    )
}

/// Composite Simpson rule with `n` (even) panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

fn quadrature_cross_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = BudykoParams::default();
    let s = |y: f64| 1.0 - 0.241 * (3.0 * y * y - 1.0);
    let mut worst_b = 0.0f64;
    for _ in 0..50 {
        let eta: f64 = rng.gen_range(0.0..=1.0);
        let integrand = |y: f64| s(y) * if y < eta { 0.32 } else { 0.62 };
        let q = quad(integrand, 0.0, 1.0, &[eta], QuadratureOptions::default())
            .expect("quadrature")
            .value;
        worst_b = worst_b.max((budyko::alpha_bar(eta, &p).value - q).abs());
    }
    let pj = JormungandParams::default();
    let alpha2 = |y: f64| 0.625 + 0.175 * (25.0 * (y - 0.35)).tanh();
    let mut worst_j = 0.0f64;
    for _ in 0..20 {
        let eta: f64 = rng.gen_range(0.0..=1.0);
        let n_left = ((1e5 * eta) as usize).max(2);
        let n_right = (100_000 - n_left.min(99_998)).max(2);
        let oracle = simpson(|y| s(y) * 0.35, 0.0, eta, n_left)
            + simpson(|y| s(y) * alpha2(y), eta, 1.0, n_right);
        let v = jormungand::alpha_bar_j(eta, &pj).expect("alpha_bar_j");
        worst_j = worst_j.max((v - oracle).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst_b <= 1e-10 && worst_j <= 1e-8 && within(elapsed, Duration::from_secs(10)),
        format!("alpha_bar max error {worst_b:e}, alpha_bar_J max error {worst_j:e}, {elapsed:.2?}"),
    )
}

fn sliding_field_correctness() -> Outcome {
    let cfg = IntegratorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut checked = 0;
    let mut bad = 0;
    let models: [Box<dyn SmoothField>; 2] = [Box::new(budyko(0.6)), Box::new(jorm(0.8))];
    for m in &models {
        for which in [Boundary::Lower, Boundary::Upper] {
            let mut taken = 0;
            while taken < 25 {
                let a = rng.gen_range(120.0..240.0);
                if boundary_mode(m, a, which, &cfg) != BoundaryMode::AttractingSliding {
                    continue;
                }
                let v = sliding_field(m, a, which, &cfg).expect("attracting point");
                if v.alpha != 0.5 || v.dy != 0.0 || v.dx != m.g(a, which.y()) {
                    bad += 1;
                }
                taken += 1;
                checked += 1;
            }
        }
    }
    outcome(bad == 0, format!("{checked} points, {bad} with alpha != 1/2 or dy != 0"))
}

fn funneling() -> Outcome {
    let cfg = IntegratorConfig::default();
    let m = budyko(0.6);
    let mut exits = Vec::new();
    let mut entries = Vec::new();
    for ic in [PlanarState::interior(200.0, 0.3), PlanarState::interior(185.0, 0.2)] {
        let traj = integrate(&m, ic, 6000.0, 10.0, &cfg).expect("integration");
        let entry = traj
            .events
            .iter()
            .find(|e| e.kind == EventKind::SlidingEntry && e.boundary == Some(Boundary::Lower))
            .map(|e| e.state.x);
        let exit = traj
            .events
            .iter()
            .find(|e| e.kind == EventKind::SlidingExit && e.boundary == Some(Boundary::Lower))
            .map(|e| e.state.x);
        entries.push(entry);
        exits.push(exit);
    }
    let tol = 10.0 * cfg.abs_tol;
    let pass = match (entries[0], entries[1], exits[0], exits[1]) {
        (Some(e1), Some(e2), Some(x1), Some(x2)) => {
            (e1 - e2).abs() > 1.0
                && (x1 - A_STAR).abs() <= tol
                && (x2 - A_STAR).abs() <= tol
                && (x1 - x2).abs() <= tol
        }
        _ => false,
    };
    outcome(pass, format!("entries {entries:?}, exits {exits:?}, A* = {A_STAR}"))
}

/// Least-squares cubic through `(x, y)` via the normal equations.
fn fit_cubic(xs: &[f64], ys: &[f64]) -> [f64; 4] {
    let mut m = [[0.0f64; 5]; 4];
    for (&x, &y) in xs.iter().zip(ys) {
        let pw = [1.0, x, x * x, x * x * x];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += pw[i] * pw[j];
            }
            m[i][4] += pw[i] * y;
        }
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in 0..4 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..5 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    std::array::from_fn(|i| m[i][4] / m[i][i])
}

fn constructed_diagnostic() -> Outcome {
    let p = BudykoParams::default();
    let xs: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    let ys: Vec<f64> = xs.iter().map(|&e| budyko::h_constructed(0.0, e, &p)).collect();
    let fit = fit_cubic(&xs, &ys);
    let diag = budyko::constructed_cubic(&p);
    let eta_ok = ((fit[1] - 56.91) / 56.91).abs() < 1e-3;
    let cube_ok = ((fit[3] + 11.05) / 11.05).abs() < 1e-3;
    let oracle_residual = 112.88 - fit[0];
    let surfaced = (diag.residual[0] - oracle_residual).abs() < 1e-6 && diag.residual[0] > 1.0;
    outcome(
        eta_ok && cube_ok && surfaced,
        format!(
            "fit eta {:.4}, eta^3 {:.4}; constant {:.4}, reported residual {:.4}",
            fit[1], fit[3], fit[0], diag.residual[0]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("fold location", fold_location),
        ("nullcline anchors", nullcline_anchors),
        ("forward invariance", forward_invariance),
        ("strip attraction", strip_attraction),
        ("snowball exit", snowball_exit),
        ("stability dichotomy", stability_dichotomy),
        ("budyko regimes", fig3_regimes),
        ("jormungand regimes", jormungand_regimes),
        ("quadrature cross-check", quadrature_cross_check),
        ("sliding field", sliding_field_correctness),
        ("forward-uniqueness funneling", funneling),
        ("constructed cubic diagnostic", constructed_diagnostic),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
