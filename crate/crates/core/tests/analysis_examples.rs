use iceline::analysis::{
    detect_periodic_orbit, sliding_segments, snowball_exit_experiment, standard_initial_condition,
    sweep_eta_c, AnalysisError, Attractor, ExitSearch, OrbitSearch,
};
use iceline::budyko::{BudykoModel, BudykoParams};
use iceline::filippov::{
    integrate, integrate_with_section, Boundary, Event, EventKind, Mode, PlanarState, Section,
    Trajectory,
};
use iceline::jormungand::{self, JormungandModel, JormungandParams};
use iceline::roots::brent;
use iceline::{IntegratorConfig, ModelKind, ModelParams};

const A_STAR: f64 = 1.5 * 112.88;

fn budyko(eta_c: f64) -> BudykoModel {
    BudykoModel::new(BudykoParams {
        eta_c,
        ..Default::default()
    })
}

fn sliding_at(a: f64) -> PlanarState {
    PlanarState {
        x: a,
        y: 0.0,
        mode: Mode::SlideLower,
        t: 0.0,
    }
}

#[test]
fn exit_time_from_180() {
    let m = budyko(0.6);
    let r = snowball_exit_experiment(&m, sliding_at(180.0), ExitSearch::default(), &IntegratorConfig::default())
        .unwrap();
    let expected = (180.0 - A_STAR) / (0.01 * 0.6);
    assert!((expected - 1780.0).abs() < 1e-9);
    assert!((r.measured_slide_time - expected).abs() < 0.01 * expected);
    assert!((r.exit_a - A_STAR).abs() < 1e-6);
    assert!(r.eta_after_exit_max > 0.0);
}

#[test]
fn entry_at_tangency_exits_at_once() {
    let m = budyko(0.6);
    let r = snowball_exit_experiment(&m, sliding_at(A_STAR), ExitSearch::default(), &IntegratorConfig::default())
        .unwrap();
    assert!(r.measured_slide_time.abs() < 1e-6, "{}", r.measured_slide_time);
    assert!(r.analytic_exit_time.abs() < 1e-9);
}

#[test]
fn jormungand_exit_matches_its_own_tangency() {
    let p = JormungandParams::default();
    let a_star = brent(|a| jormungand::h_j(a, 0.0, &p), 100.0, 200.0, 0.0).unwrap();
    let m = JormungandModel::new(p);
    let r = snowball_exit_experiment(&m, sliding_at(a_star + 8.0), ExitSearch::default(), &IntegratorConfig::default())
        .unwrap();
    let expected = 8.0 / (0.01 * 0.8);
    assert!((r.measured_slide_time - expected).abs() < 0.01 * expected);
    assert!((r.exit_a - a_star).abs() < 1e-6);
}

#[test]
fn exit_needs_positive_eta_c() {
    for eta_c in [0.0, -0.1] {
        let m = budyko(eta_c);
        let e = snowball_exit_experiment(&m, sliding_at(180.0), ExitSearch::default(), &IntegratorConfig::default());
        assert!(matches!(e, Err(AnalysisError::Precondition(_))));
    }
}

#[test]
fn no_entry_is_reported() {
    // Near the stable small cap the orbit never sees η = 0.
    let m = budyko(0.85);
    let ic = PlanarState::interior(205.0, 0.85);
    let search = ExitSearch {
        t_max: 500.0,
        ..Default::default()
    };
    let e = snowball_exit_experiment(&m, ic, search, &IntegratorConfig::default());
    assert!(matches!(
        e,
        Err(AnalysisError::NoEntry {
            boundary: Boundary::Lower,
            ..
        })
    ));
}

#[test]
fn stable_cap_gives_no_converged_orbit() {
    let m = budyko(0.85);
    let search = OrbitSearch {
        t_max: Some(20_000.0),
        ..Default::default()
    };
    let r = detect_periodic_orbit(&m, standard_initial_condition(&m), &search, &IntegratorConfig::default());
    match r {
        Err(AnalysisError::NonRecurrent { .. }) => {}
        Ok(r) => assert!(!r.converged),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn orbit_returns_to_its_section_point() {
    let m = budyko(0.6);
    let search = OrbitSearch::default();
    let cfg = IntegratorConfig::default();
    let r = detect_periodic_orbit(&m, standard_initial_condition(&m), &search, &cfg).unwrap();
    assert!(r.converged);
    let start = r.section_point(0.6);
    let traj = integrate_with_section(&m, start, start.t + 1.1 * r.period, 50.0, Some(Section::rising(0.6)), &cfg)
        .unwrap();
    let back = traj
        .events
        .iter()
        .find(|e| e.kind == EventKind::SectionCross && e.t > start.t + 0.5 * r.period)
        .expect("return");
    let tol = 10.0 * search.return_tol_rel * (r.a_max - r.a_min);
    assert!((back.state.x - start.x).abs() < tol, "{} vs {}", back.state.x, start.x);
    assert!((back.t - start.t - r.period).abs() < 1e-3 * r.period);
}

fn event(kind: EventKind, b: Boundary, t: f64, x: f64) -> Event {
    Event {
        kind,
        t,
        state: PlanarState::interior(x, b.y()).at(t),
        boundary: Some(b),
    }
}

#[test]
fn sliding_segments_pair_entries_and_exits() {
    let m = budyko(0.6);
    let traj = integrate(&m, sliding_at(180.0), 3000.0, 10.0, &IntegratorConfig::default()).unwrap();
    let segs = sliding_segments(&traj);
    let first = segs[0];
    assert!(first.open_start && !first.open_end);
    assert_eq!(first.boundary, Boundary::Lower);
    assert_eq!(first.t_start, 0.0);
    assert!((first.a_end - A_STAR).abs() < 1e-6);

    let samples = vec![
        PlanarState::interior(190.0, 0.5),
        PlanarState::interior(170.0, 0.0).at(30.0),
    ];
    let synthetic = Trajectory {
        samples,
        events: vec![
            event(EventKind::SlidingEntry, Boundary::Upper, 1.0, 195.0),
            event(EventKind::SlidingExit, Boundary::Upper, 5.0, 190.0),
            event(EventKind::SlidingEntry, Boundary::Lower, 20.0, 175.0),
        ],
        dt_out: 30.0,
    };
    let segs = sliding_segments(&synthetic);
    assert_eq!(segs.len(), 2);
    assert_eq!((segs[0].t_start, segs[0].t_end), (1.0, 5.0));
    assert!(!segs[0].open_start && !segs[0].open_end);
    assert_eq!((segs[1].boundary, segs[1].t_end, segs[1].a_end), (Boundary::Lower, 30.0, 170.0));
    assert!(segs[1].open_end);
}

fn sweep(grid: &[f64]) -> Vec<iceline::analysis::BifurcationRow> {
    let params = ModelParams::default_for(ModelKind::Budyko);
    sweep_eta_c(&params, grid, &IntegratorConfig::default(), &OrbitSearch::default(), 3).unwrap()
}

#[test]
fn sweep_small_caps_are_equilibria() {
    let rows = sweep(&[0.8, 0.85, 0.9]);
    assert!(rows.iter().all(|r| r.attractor == Attractor::Equilibrium));
    assert_eq!(rows.iter().map(|r| r.eta_c).collect::<Vec<_>>(), vec![0.8, 0.85, 0.9]);
}

#[test]
fn sweep_large_caps_oscillate() {
    let rows = sweep(&[0.3, 0.5, 0.7]);
    for r in &rows {
        assert_eq!(r.attractor, Attractor::PeriodicOrbit, "η_c = {}: {:?}", r.eta_c, r.reason);
        assert!(r.orbit.as_ref().unwrap().converged);
    }
}

#[test]
fn sweep_straddles_the_fold() {
    let fold = iceline::budyko::fold();
    assert!((fold - 0.7682).abs() < 1e-4);
    let rows = sweep(&[fold - 1e-3, fold + 1e-3]);
    assert_ne!(rows[0].attractor, Attractor::Equilibrium);
    assert_eq!(rows[1].attractor, Attractor::Equilibrium);
}

#[test]
fn sweep_stable_set_is_an_up_set() {
    let grid: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
    let params = ModelParams::default_for(ModelKind::Budyko);
    let search = OrbitSearch {
        t_max: Some(30_000.0),
        ..Default::default()
    };
    let rows = sweep_eta_c(&params, &grid, &IntegratorConfig::default(), &search, 4).unwrap();
    let first = rows.iter().position(|r| r.attractor == Attractor::Equilibrium).unwrap();
    assert!(rows[first..].iter().all(|r| r.attractor == Attractor::Equilibrium));
    assert!(rows[..first].iter().all(|r| r.attractor != Attractor::Equilibrium));
}

#[test]
fn sweep_rejects_out_of_range_values() {
    let rows = sweep(&[0.0, 1.0]);
    assert!(rows.iter().all(|r| r.attractor == Attractor::Undetermined && r.reason.is_some()));
}
