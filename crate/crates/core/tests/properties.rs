use std::f64::consts::PI;

use proptest::prelude::*;

use spinsqueeze::channels::{dual_map, evolve_correlations};
use spinsqueeze::initial_state::{closed_initial_correlations, initial_rescaled_concurrence};
use spinsqueeze::metrics::{closed_form_report, xi1_sq, xi2_sq, BlockConcurrence};
use spinsqueeze::oracle::{block_form_check, post_selected_pair_state};
use spinsqueeze::initial_state::twisted_state_dicke;
use spinsqueeze::sweep::{find_sssd, run_sweep, sssd_value, Format, PGrid, SssdOutcome, SssdQuantity, Source, SweepSpec};
use spinsqueeze::verify::report_deviation;
use spinsqueeze::{solve_strengths, ChannelKind, Knob, SqueezingReport, SystemConfig};

fn channel() -> impl Strategy<Value = (ChannelKind, Knob)> {
    prop_oneof![
        Just((ChannelKind::AmplitudeDamping, Knob::Bypass)),
        (1.0..12.0f64).prop_map(|m| (ChannelKind::AmplitudeDamping, Knob::M(m))),
        Just((ChannelKind::Depolarizing, Knob::Bypass)),
        (1.0..500.0f64).prop_map(|n| (ChannelKind::Depolarizing, Knob::N(n))),
        Just((ChannelKind::PhaseDamping, Knob::Bypass)),
        (0.01..2.0f64).prop_map(|m| (ChannelKind::PhaseDamping, Knob::M(m))),
    ]
}

fn system() -> impl Strategy<Value = SystemConfig> {
    (2usize..=14, 0.0..2.0 * PI).prop_map(|(n, theta)| SystemConfig::new(n, theta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn clipped_measures_stay_in_unit_interval(
        cfg in system(), (kind, knob) in channel(), p in 0.0..=1.0f64,
    ) {
        let r = closed_form_report(kind, &cfg, p, knob).unwrap();
        for z in [r.zeta1_sq, r.zeta2_sq, r.zeta3_sq] {
            prop_assert!((0.0..=1.0).contains(&z), "{z}");
        }
        prop_assert!(r.concurrence >= 0.0);
    }

    #[test]
    fn adc_closed_forms_match_generic_pipeline(
        cfg in system(), knob in prop_oneof![Just(Knob::Bypass), (1.0..12.0f64).prop_map(Knob::M)],
        p in 0.0..=1.0f64,
    ) {
        let kind = ChannelKind::AmplitudeDamping;
        let closed = closed_form_report(kind, &cfg, p, knob).unwrap();
        let ch = solve_strengths(kind, p, knob).unwrap();
        let evolved = evolve_correlations(&ch, &closed_initial_correlations(&cfg)).unwrap();
        let generic = SqueezingReport::from_correlations(&evolved, cfg.n_spins);
        let dev = report_deviation(&closed, &generic);
        prop_assert!(dev < 1e-9, "{dev}");
    }

    #[test]
    fn initial_zeta3_equals_rescaled_concurrence(cfg in system()) {
        let r = SqueezingReport::from_correlations(&closed_initial_correlations(&cfg), cfg.n_spins);
        prop_assert!((r.zeta3_sq - r.concurrence).abs() < 1e-9);
        prop_assert!((r.concurrence - initial_rescaled_concurrence(&cfg)).abs() < 1e-9);
    }

    #[test]
    fn oracle_states_are_valid_block_states(
        n in 2usize..=10, theta in 0.0..2.0 * PI, (kind, knob) in channel(), p in 0.0..0.999f64,
    ) {
        let state = twisted_state_dicke(&SystemConfig::new(n, theta).unwrap());
        let ch = solve_strengths(kind, p, knob).unwrap();
        let rho = post_selected_pair_state(&state, &ch).unwrap();
        prop_assert!(rho.min_eigenvalue() > -1e-10);
        let check = block_form_check(&rho);
        prop_assert!(check.residual < 1e-10, "{}", check.residual);
        let c = check.correlations;
        prop_assert!((c.q - 4.0 * c.y - c.szz).abs() < 1e-12);
        // Any physical state obeys xi2 >= xi1, since |<J>| <= N/2.
        let (x1, x2) = (xi1_sq(&c, n), xi2_sq(&c, n));
        prop_assert!(x1 > -1e-10);
        prop_assert!(x2 >= x1 - 1e-9, "{x1} {x2}");
    }

    #[test]
    fn concurrence_dominates_both_branches(
        cfg in system(), (kind, knob) in channel(), p in 0.0..=1.0f64,
    ) {
        let ch = solve_strengths(kind, p, knob).unwrap();
        let c = evolve_correlations(&ch, &closed_initial_correlations(&cfg)).unwrap();
        let b = BlockConcurrence::evaluate(&c, cfg.n_spins);
        prop_assert!(b.pair >= 0.0);
        prop_assert!(b.pair >= b.double_excitation && b.pair >= b.single_excitation);
        prop_assert!((b.rescaled - (cfg.n_spins as f64 - 1.0) * b.pair).abs() < 1e-12);
    }

    #[test]
    fn adc_norm_is_independent_of_sz(m in 1.0..12.0f64, p in 0.0..=1.0f64, sz in -1.0..=1.0f64) {
        let ch = solve_strengths(ChannelKind::AmplitudeDamping, p, Knob::M(m)).unwrap();
        let d = dual_map(&ch, sz).unwrap();
        prop_assert!((d.norm - m * m).abs() < 1e-9 * m * m);
    }

    #[test]
    fn range_grids_are_ordered_and_bounded(
        start in 0.0..0.5f64, len in 0.0..0.5f64, step in 0.001..0.2f64,
    ) {
        let stop = start + len;
        let points = PGrid::range(start, stop, step).unwrap().points();
        prop_assert!(!points.is_empty());
        prop_assert!(points.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(points.iter().all(|&p| p >= start - 1e-12 && p <= stop));
    }
}

#[test]
fn sweeps_are_deterministic_and_in_grid_order() {
    let spec = SweepSpec {
        kind: ChannelKind::PhaseDamping,
        theta: 1.8 * PI,
        n_spins: 10,
        knob: Knob::M(0.5),
        grid: PGrid::range(0.0, 1.0, 0.01).unwrap(),
        source: Source::Both,
        format: Format::Csv,
        output: None,
    };
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a, b);
    let grid = spec.grid.points();
    assert_eq!(a.len(), 2 * grid.len());
    for (pair, p) in a.chunks(2).zip(grid) {
        assert_eq!(pair[0].p, p);
        assert_eq!(pair[1].p, p);
    }
}

#[test]
fn sudden_death_point_does_not_depend_on_scan_grid() {
    let cfg = SystemConfig::new(12, 1.8 * PI).unwrap();
    let cases = [
        (ChannelKind::AmplitudeDamping, Knob::Bypass),
        (ChannelKind::AmplitudeDamping, Knob::M(4.0)),
        (ChannelKind::Depolarizing, Knob::Bypass),
        (ChannelKind::Depolarizing, Knob::N(10.0)),
        (ChannelKind::PhaseDamping, Knob::Bypass),
    ];
    for (kind, knob) in cases {
        for quantity in [SssdQuantity::Zeta2, SssdQuantity::Zeta3, SssdQuantity::Concurrence] {
            let outcome = find_sssd(kind, &cfg, knob, quantity).unwrap();
            // First sign change on an independent 1e-4 grid.
            let coarse = (1..=10_000)
                .map(|i| i as f64 * 1e-4)
                .find(|&p| sssd_value(kind, &cfg, knob, quantity, p).unwrap() <= 0.0);
            match (outcome, coarse) {
                (SssdOutcome::Vanishes { p_star }, Some(p)) => {
                    assert!((p_star - p).abs() <= 2e-4, "{kind:?} {knob:?} {quantity:?}: {p_star} vs {p}")
                }
                (SssdOutcome::NoVanishing, None) | (SssdOutcome::VanishesAtBoundary, Some(_)) => {}
                other => panic!("{kind:?} {knob:?} {quantity:?}: {other:?}"),
            }
        }
    }
}
