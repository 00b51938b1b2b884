use iceline::budyko::{self, BudykoModel, BudykoParams};
use iceline::jormungand::{self, JormungandModel, JormungandParams};
use iceline::quadrature::{integrate as quad, QuadratureOptions};
use iceline::roots::brent;
use iceline::{IceLineModel, Stability};

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    sum * h / 3.0
}

fn s(y: f64) -> f64 {
    1.0 - 0.241 * (3.0 * y * y - 1.0)
}

fn alpha2(y: f64) -> f64 {
    0.625 + 0.175 * (25.0 * (y - 0.35)).tanh()
}

#[test]
fn alpha_bar_half_matches_split_quadrature() {
    let q = quad(
        |y| s(y) * if y < 0.5 { 0.32 } else { 0.62 },
        0.0,
        1.0,
        &[0.5],
        QuadratureOptions::default(),
    )
    .unwrap();
    let v = budyko::alpha_bar(0.5, &BudykoParams::default()).value;
    assert!((v - q.value).abs() <= 1e-10);
    assert!((v - 0.4428875).abs() < 1e-12);
}

#[test]
fn rho_scales_h_linearly() {
    for (a, e) in [(150.0, 0.1), (200.0, 0.7), (230.0, 1.3)] {
        assert_eq!(budyko::h_poly(a, e, 2.0), 2.0 * budyko::h_poly(a, e, 1.0));
    }
}

#[test]
fn equilibrium_examples() {
    let p = |eta_c| BudykoParams {
        eta_c,
        ..Default::default()
    };
    let r = budyko::equilibrium(&p(0.85));
    assert_eq!(r.stability, Stability::Stable);
    assert!((r.jacobian[1][1] + 8.368).abs() < 1e-3, "{}", r.jacobian[1][1]);
    assert!(r.eigenvalues.iter().all(|l| l.re < 0.0));
    let expected_a = 1.5 * (112.88 + 56.91 * 0.85 - 24.31 * 0.7225 - 11.05 * 0.614125);
    assert!((r.a_c - expected_a).abs() < 1e-9);
    assert!((r.a_c - 205.35).abs() < 0.01);

    let r = budyko::equilibrium(&p(0.6));
    assert_eq!(r.stability, Stability::Unstable);
    assert!(r.eigenvalues.iter().any(|l| l.re > 0.0));

    let r = budyko::equilibrium(&p(budyko::fold()));
    assert!(r.lambda_re_max().abs() < 1e-6);
    assert_eq!(r.stability, Stability::Degenerate);

    for eta_c in [0.0, 1.0, 1.2] {
        assert_eq!(budyko::equilibrium(&p(eta_c)).stability, Stability::Degenerate);
    }
}

#[test]
fn equilibrium_zeroes_both_rates() {
    use iceline::SmoothField;
    for eta_c in [0.2, 0.5, 0.85] {
        let m = BudykoModel::new(BudykoParams {
            eta_c,
            ..Default::default()
        });
        let r = m.equilibrium();
        assert!(m.h(r.a_c, r.eta_c).abs() < 1e-9);
        assert!(m.g(r.a_c, r.eta_c).abs() < 1e-9);
    }
}

#[test]
fn jormungand_mean_albedo_at_eta_zero() {
    let oracle = simpson(|y| s(y) * alpha2(y), 0.0, 1.0, 100_000);
    let v = jormungand::alpha_bar_j(0.0, &JormungandParams::default()).unwrap();
    assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
}

#[test]
fn jormungand_mean_albedo_is_smooth() {
    // Central differences converge at second order: error ratio ~ 4 on halving.
    let p = JormungandParams::default();
    let f = |e: f64| jormungand::alpha_bar_j(e, &p).unwrap();
    let exact = s(0.5) * (0.35 - alpha2(0.5));
    let err = |d: f64| ((f(0.5 + d) - f(0.5 - d)) / (2.0 * d) - exact).abs();
    let (e1, e2) = (err(0.02), err(0.01));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn jormungand_h_decreases_in_a() {
    let p = JormungandParams::default();
    for e in [0.0, 0.2, 0.35, 0.6, 1.0] {
        let d = jormungand::h_j(150.0, e, &p) - jormungand::h_j(151.0, e, &p);
        assert!((d - 1.0 / 1.5).abs() < 1e-12);
    }
}

#[test]
fn jormungand_nullcline_has_a_double_fold() {
    let m = JormungandModel::new(JormungandParams::default());
    let grid: Vec<f64> = (0..=1000).map(|k| k as f64 / 1000.0).collect();
    let a: Vec<f64> = grid.iter().map(|&e| m.nullcline_a(e)).collect();
    let slopes: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
    let flips = slopes.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert!(flips >= 2, "{flips} sign changes");
}

#[test]
fn jormungand_boundary_values_match_simpson() {
    let p = JormungandParams::default();
    let q = 321.0 / (1.5 + 3.75);
    // η = 0: the line sits at y = 0 with albedo (α_w + α₂(0))/2.
    let mean0 = simpson(|y| s(y) * alpha2(y), 0.0, 1.0, 100_000);
    let a0 = 1.5 * q * (s(0.0) * (1.0 - 0.5 * (0.35 + alpha2(0.0))) + 2.5 * (1.0 - mean0));
    // η = 1: open water everywhere.
    let mean1 = simpson(|y| s(y) * 0.35, 0.0, 1.0, 100_000);
    let a1 = 1.5 * q * (s(1.0) * (1.0 - 0.5 * (0.35 + alpha2(1.0))) + 2.5 * (1.0 - mean1));
    assert!((jormungand::nullcline_a_j(0.0, &p).unwrap() - a0).abs() < 1e-8);
    assert!((jormungand::nullcline_a_j(1.0, &p).unwrap() - a1).abs() < 1e-8);
}

#[test]
fn jormungand_tangency_is_root_of_h() {
    let p = JormungandParams::default();
    let a_star = brent(|a| jormungand::h_j(a, 0.0, &p), 100.0, 200.0, 0.0).unwrap();
    let m = JormungandModel::new(p);
    assert!((m.lower_tangency() - a_star).abs() < 1e-9);
}

#[test]
fn steep_snow_line_approaches_two_level_step() {
    let p = JormungandParams {
        m: 1e4,
        ..Default::default()
    };
    let big_s = |e: f64| 1.241 * e - 0.241 * e * e * e;
    for e in [0.0f64, 0.1, 0.3, 0.4, 0.7, 1.0] {
        let snow = e.max(0.35);
        let step = 0.35 * big_s(e) + 0.45 * (big_s(snow) - big_s(e)) + 0.8 * (1.0 - big_s(snow));
        let v = jormungand::alpha_bar_j(e, &p).unwrap();
        assert!((v - step).abs() < 1e-6, "η = {e}: {v} vs {step}");
    }
}

#[test]
fn jormungand_equilibria_at_0_8_and_0_15_are_unstable() {
    for eta_c in [0.8, 0.15] {
        let m = JormungandModel::new(JormungandParams {
            eta_c,
            ..Default::default()
        });
        assert_eq!(m.equilibrium().stability, Stability::Unstable);
    }
}
