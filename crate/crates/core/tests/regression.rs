//! Frozen outputs. A change here means the numerics moved.

use std::f64::consts::PI;

use spinsqueeze::oracle::post_selected_correlations;
use spinsqueeze::sweep::{figure_preset, find_sssd, run_sweep, PGrid, SssdOutcome, SssdQuantity};
use spinsqueeze::{solve_strengths, ChannelKind, Knob, SqueezingReport, SystemConfig};

const ADC: ChannelKind = ChannelKind::AmplitudeDamping;
const DPC: ChannelKind = ChannelKind::Depolarizing;
const PDC: ChannelKind = ChannelKind::PhaseDamping;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn bare_channel_sudden_death_points() {
    let cfg = SystemConfig::new(12, 1.8 * PI).unwrap();
    let table = [
        (ADC, SssdQuantity::Zeta3, 0.30446561),
        (DPC, SssdQuantity::Zeta3, 0.25988923),
        (PDC, SssdQuantity::Zeta3, 0.41039678),
        (ADC, SssdQuantity::Concurrence, 0.05074427),
        (DPC, SssdQuantity::Concurrence, 0.06242702),
        (PDC, SssdQuantity::Concurrence, 0.12721740),
        (ADC, SssdQuantity::Zeta2, 0.03557840),
        (DPC, SssdQuantity::Zeta2, 0.04144619),
        (PDC, SssdQuantity::Zeta2, 0.06017861),
    ];
    for (kind, quantity, expected) in table {
        match find_sssd(kind, &cfg, Knob::Bypass, quantity).unwrap() {
            SssdOutcome::Vanishes { p_star } => {
                assert!(close(p_star, expected, 2e-8), "{kind:?} {quantity:?}: {p_star}")
            }
            other => panic!("{kind:?} {quantity:?}: {other:?}"),
        }
    }
}

#[test]
fn protected_and_boundary_outcomes() {
    let twisted = SystemConfig::new(12, 1.8 * PI).unwrap();
    let weak = SystemConfig::new(12, 0.1 * PI).unwrap();
    assert_eq!(
        find_sssd(ADC, &twisted, Knob::M(70.0), SssdQuantity::Zeta3).unwrap(),
        SssdOutcome::NoVanishing
    );
    assert_eq!(
        find_sssd(PDC, &twisted, Knob::M(0.01), SssdQuantity::Zeta3).unwrap(),
        SssdOutcome::NoVanishing
    );
    assert_eq!(
        find_sssd(ADC, &weak, Knob::Bypass, SssdQuantity::Zeta3).unwrap(),
        SssdOutcome::VanishesAtBoundary
    );
}

#[test]
fn fig2b_rows() {
    let mut spec = figure_preset("fig2b").unwrap();
    spec.grid = PGrid::list(vec![0.0, 0.5, 1.0]).unwrap();
    let rows = run_sweep(&spec).unwrap();
    let expected = [
        [0.24319643007892866, 0.7335302587644502, 0.24319643007892866, 0.7568035699210713, 0.756803569921072],
        [0.26684654163896215, 0.9624461521627063, 0.2885607459010693, 0.7114392540989307, 0.2816532892517233],
        [0.29049665319899565, 1.2750881834829, 0.3400187587001042, 0.6599812412998958, 0.0],
    ];
    for (row, want) in rows.iter().zip(expected) {
        let got = [row.xi1_sq, row.xi2_sq, row.xi3_sq, row.zeta3_sq, row.concurrence];
        for (g, w) in got.into_iter().zip(want) {
            assert!(close(g, w, 1e-12), "p={}: {g} vs {w}", row.p);
        }
    }
}

#[test]
fn oracle_reports_at_half_damping() {
    let cfg = SystemConfig::new(12, 1.8 * PI).unwrap();
    let cases = [
        (DPC, Knob::N(10.0), [0.9938404043965472, 1.008169799447402, 1.0065566931459813, 0.0]),
        (PDC, Knob::M(0.5), [0.9544459499656951, 0.9579187771233608, 0.956608534720601, 0.03198997647810941]),
        (ADC, Knob::Bypass, [0.6215982150394609, 13.81728692911445, 1.641918584970084, 0.0]),
    ];
    for (kind, knob, want) in cases {
        let ch = solve_strengths(kind, 0.5, knob).unwrap();
        let r = SqueezingReport::from_correlations(&post_selected_correlations(&cfg, &ch).unwrap(), 12);
        let got = [r.xi1_sq, r.xi2_sq, r.xi3_sq, r.concurrence];
        for (g, w) in got.into_iter().zip(want) {
            assert!(close(g, w, 1e-10), "{kind:?}: {g} vs {w}");
        }
    }
}
