//! Spin-squeezing parameters and rescaled concurrence from two-spin moments,
//! plus the explicit closed-form reports for each protected channel.
//!
//! Infinite values of `xi2_sq` / `xi3_sq` are sentinels (`f64::INFINITY`) for
//! a vanishing mean spin or a nonpositive denominator; the matching clipped
//! measure is then 0.

use serde::Serialize;

use crate::channels::{solve_strengths, ChannelKind, Knob};
use crate::error::{Error, Result};
use crate::initial_state::{
    closed_initial_correlations, initial_rescaled_concurrence, published_u0, q12y, CorrelationSet,
    SystemConfig,
};

/// Tolerance on the smallest eigenvalue of an implied two-spin state.
pub const POSITIVITY_TOL: f64 = 1e-9;

/// `max(0, 1 - xi^2)`, also capped at 1 so that an unphysical negative
/// `xi^2` from a closed form cannot leave the unit interval.
pub fn zeta_sq(xi_sq: f64) -> f64 {
    if xi_sq.is_nan() {
        return f64::NAN;
    }
    (1.0 - xi_sq).clamp(0.0, 1.0)
}

fn pairs(n_spins: usize) -> f64 {
    n_spins as f64 - 1.0
}

/// Kitagawa-Ueda parameter `1 + 2(N-1)(y - |u|)`.
pub fn xi1_sq(c: &CorrelationSet, n_spins: usize) -> f64 {
    1.0 + 2.0 * pairs(n_spins) * (c.y - c.u.norm())
}

/// Wineland parameter `xi1^2 / sz^2`.
pub fn xi2_sq(c: &CorrelationSet, n_spins: usize) -> f64 {
    let denom = c.sz * c.sz;
    if denom == 0.0 {
        return f64::INFINITY;
    }
    xi1_sq(c, n_spins) / denom
}

/// `1 + (N-1)(szz - sz^2)`.
pub fn varsigma_sq(c: &CorrelationSet, n_spins: usize) -> f64 {
    1.0 + pairs(n_spins) * (c.szz - c.sz * c.sz)
}

fn xi3_denominator(c: &CorrelationSet, n_spins: usize) -> f64 {
    let inv = 1.0 / n_spins as f64;
    (1.0 - inv) * c.q + inv
}

/// Toth parameter `min{xi1^2, varsigma^2} / ((1 - 1/N) q + 1/N)`.
pub fn xi3_sq(c: &CorrelationSet, n_spins: usize) -> f64 {
    let d = xi3_denominator(c, n_spins);
    if d <= 0.0 {
        return f64::INFINITY;
    }
    xi1_sq(c, n_spins).min(varsigma_sq(c, n_spins)) / d
}

/// The same ratio with `xi1^2` alone in the numerator, as used by the
/// per-channel closed forms.
pub fn xi3_sq_simplified(c: &CorrelationSet, n_spins: usize) -> f64 {
    let d = xi3_denominator(c, n_spins);
    if d <= 0.0 {
        return f64::INFINITY;
    }
    xi1_sq(c, n_spins) / d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcurrenceBranch {
    /// Both branches nonpositive.
    Separable,
    /// `2(|u| - w)`: coherence between `|00>` and `|11>`.
    DoubleExcitation,
    /// `2(y - sqrt(v+ v-))`: coherence between `|01>` and `|10>`.
    SingleExcitation,
}

/// Both branches of the block-state concurrence and the resulting values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockConcurrence {
    pub double_excitation: f64,
    pub single_excitation: f64,
    /// Two-spin concurrence `C`.
    pub pair: f64,
    /// `(N - 1) C`.
    pub rescaled: f64,
    pub branch: ConcurrenceBranch,
}

impl BlockConcurrence {
    /// Evaluates the formula without checking positivity of the implied
    /// state; `v+ v-` is clamped at 0 under the square root.
    pub fn evaluate(c: &CorrelationSet, n_spins: usize) -> Self {
        Self::from_parts(c.u.norm(), c.y, c.v_plus(), c.v_minus(), c.w(), n_spins)
    }

    fn from_parts(u_abs: f64, y: f64, v_plus: f64, v_minus: f64, w: f64, n_spins: usize) -> Self {
        let double_excitation = 2.0 * (u_abs - w);
        let single_excitation = 2.0 * (y - (v_plus * v_minus).max(0.0).sqrt());
        let (pair, branch) = if double_excitation <= 0.0 && single_excitation <= 0.0 {
            (0.0, ConcurrenceBranch::Separable)
        } else if double_excitation >= single_excitation {
            (double_excitation, ConcurrenceBranch::DoubleExcitation)
        } else {
            (single_excitation, ConcurrenceBranch::SingleExcitation)
        };
        Self { double_excitation, single_excitation, pair, rescaled: pairs(n_spins) * pair, branch }
    }

    /// The larger branch, unclipped and rescaled; its sign locates sudden death.
    pub fn rescaled_margin(&self, n_spins: usize) -> f64 {
        pairs(n_spins) * self.double_excitation.max(self.single_excitation)
    }
}

/// Rescaled concurrence of the block state implied by `c`; fails if that
/// state is not positive semidefinite.
pub fn block_concurrence(c: &CorrelationSet, n_spins: usize) -> Result<BlockConcurrence> {
    let min = c.min_eigenvalue();
    if min < -POSITIVITY_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(BlockConcurrence::evaluate(c, n_spins))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingReport {
    pub xi1_sq: f64,
    pub xi2_sq: f64,
    /// With the `min{xi1^2, varsigma^2}` numerator.
    pub xi3_sq: f64,
    /// With `xi1^2` alone in the numerator.
    pub xi3_sq_simplified: f64,
    pub varsigma_sq: f64,
    pub zeta1_sq: f64,
    pub zeta2_sq: f64,
    pub zeta3_sq: f64,
    /// Rescaled concurrence `C_r = (N - 1) C`.
    pub concurrence: f64,
    pub pair_concurrence: f64,
    pub concurrence_branch: ConcurrenceBranch,
    /// Whether the implied two-spin state is positive semidefinite.
    pub physical: bool,
}

impl SqueezingReport {
    fn assemble(
        xi1_sq: f64,
        xi2_sq: f64,
        xi3_sq: f64,
        xi3_sq_simplified: f64,
        varsigma_sq: f64,
        cc: BlockConcurrence,
        physical: bool,
    ) -> Self {
        Self {
            xi1_sq,
            xi2_sq,
            xi3_sq,
            xi3_sq_simplified,
            varsigma_sq,
            zeta1_sq: zeta_sq(xi1_sq),
            zeta2_sq: zeta_sq(xi2_sq),
            zeta3_sq: zeta_sq(xi3_sq),
            concurrence: cc.rescaled,
            pair_concurrence: cc.pair,
            concurrence_branch: cc.branch,
            physical,
        }
    }

    /// Generic pipeline: every quantity from the moments in `c`.
    pub fn from_correlations(c: &CorrelationSet, n_spins: usize) -> Self {
        Self::assemble(
            xi1_sq(c, n_spins),
            xi2_sq(c, n_spins),
            xi3_sq(c, n_spins),
            xi3_sq_simplified(c, n_spins),
            varsigma_sq(c, n_spins),
            BlockConcurrence::evaluate(c, n_spins),
            c.is_physical(POSITIVITY_TOL),
        )
    }

    /// Named scalar fields, in a fixed order, for deviation tables.
    pub fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("xi1_sq", self.xi1_sq),
            ("xi2_sq", self.xi2_sq),
            ("xi3_sq", self.xi3_sq),
            ("xi3_sq_simplified", self.xi3_sq_simplified),
            ("varsigma_sq", self.varsigma_sq),
            ("zeta1_sq", self.zeta1_sq),
            ("zeta2_sq", self.zeta2_sq),
            ("zeta3_sq", self.zeta3_sq),
            ("concurrence", self.concurrence),
            ("pair_concurrence", self.pair_concurrence),
            ("physical", if self.physical { 1.0 } else { 0.0 }),
        ]
    }
}

/// Moments after the sandwich, written out channel by channel in explicit
/// closed form. `u_abs` is `|u|` of the evolved `<s1+ s2+>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormMoments {
    pub sz: f64,
    pub szz: f64,
    pub y: f64,
    pub u_abs: f64,
    pub q: f64,
    /// Per-spin normalization `M1`, `M2` or `M3`.
    pub norm: f64,
    /// Transverse gain numerator: `s m^2 n^2`, `s^2 n^2` or `s^2 m^2 n^2`.
    pub gain: f64,
}

/// Evaluates the explicit per-channel expressions for `<s1z>`, `<s1z s2z>`,
/// `<s1+ s2->`, `|<s1+ s2+>|` and `<s1 . s2>`.
pub fn closed_form_moments(
    kind: ChannelKind,
    cfg: &SystemConfig,
    p: f64,
    knob: Knob,
) -> Result<ClosedFormMoments> {
    let ch = solve_strengths(kind, p, knob)?;
    let init = closed_initial_correlations(cfg);
    let (sz0, szz0) = (init.sz, init.szz);
    let y0 = 0.25 * (1.0 - szz0);
    // u = -(1/2) gain Q12y - gain u0, divided by M^2.
    let u_numerator = |gain: f64| (-0.5 * gain * q12y(cfg) - gain * published_u0(cfg)).norm();
    let s = ch.s;
    let m = ch.m;
    let moments = match kind {
        ChannelKind::AmplitudeDamping => {
            // s n^2 + p = m^2 is M1; k = s n^2.
            let k = ch.k;
            let norm = k + p;
            let norm_sq = norm * norm;
            let gain = m * m * k;
            ClosedFormMoments {
                sz: (k * sz0 - p) / norm,
                szz: (k * k * szz0 - 2.0 * k * p * sz0 + p * p) / norm_sq,
                y: gain * y0 / norm_sq,
                u_abs: u_numerator(gain) / norm_sq,
                q: (gain + k * (k - m * m) * szz0 - 2.0 * k * p * sz0 + p * p) / norm_sq,
                norm,
                gain,
            }
        }
        ChannelKind::Depolarizing => {
            let n = ch.n.value();
            let n2 = n * n;
            let norm = 0.5 * ((n2 * s - s) * sz0 + (n2 + 1.0));
            let norm_sq = norm * norm;
            let gain = s * s * n2;
            let a = n2 * s + s;
            let b = n2 - 1.0;
            let zz = 0.25 * (a * a * szz0 + 2.0 * b * a * sz0 + b * b);
            ClosedFormMoments {
                sz: 0.5 * (a * sz0 + b) / norm,
                szz: zz / norm_sq,
                y: gain * y0 / norm_sq,
                u_abs: u_numerator(gain) / norm_sq,
                q: (gain * (1.0 - szz0) + zz) / norm_sq,
                norm,
                gain,
            }
        }
        ChannelKind::PhaseDamping => {
            // Theta+(A) = [[a n^2, b m n s], [c m n s, d m^2]] / norm. With
            // n^2 = m^2 + 2 this gives a = m^2 + 1, b = 1 and M3 = m^2 + 1 + sz0;
            // the general split also covers the unmeasured channel (m = n = 1).
            let n2 = ch.n.value().powi(2);
            let m2 = m * m;
            let a = 0.5 * (n2 + m2);
            let b = 0.5 * (n2 - m2);
            let norm = a + b * sz0;
            let norm_sq = norm * norm;
            let gain = s * s * m2 * n2;
            let zz = a * a * szz0 + 2.0 * a * b * sz0 + b * b;
            ClosedFormMoments {
                sz: (a * sz0 + b) / norm,
                szz: zz / norm_sq,
                y: gain * y0 / norm_sq,
                u_abs: u_numerator(gain) / norm_sq,
                q: (gain * (1.0 - szz0) + zz) / norm_sq,
                norm,
                gain,
            }
        }
    };
    if !(moments.norm > 0.0) {
        return Err(Error::NonPositiveNorm(moments.norm));
    }
    Ok(moments)
}

fn report_from_closed(cfg: &SystemConfig, mo: &ClosedFormMoments, xi1_sq: f64) -> SqueezingReport {
    let n_spins = cfg.n_spins;
    let inv = 1.0 / n_spins as f64;
    let xi2_sq = if mo.sz == 0.0 { f64::INFINITY } else { xi1_sq / (mo.sz * mo.sz) };
    let denom = (1.0 - inv) * mo.q + inv;
    let varsigma_sq = 1.0 + pairs(n_spins) * (mo.szz - mo.sz * mo.sz);
    let (xi3_sq, xi3_sq_simplified) = if denom <= 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (xi1_sq.min(varsigma_sq) / denom, xi1_sq / denom)
    };
    let v_plus = 0.25 * (1.0 + 2.0 * mo.sz + mo.szz);
    let v_minus = 0.25 * (1.0 - 2.0 * mo.sz + mo.szz);
    let w = 0.25 * (1.0 - mo.szz);
    let cc = BlockConcurrence::from_parts(mo.u_abs, mo.y, v_plus, v_minus, w, n_spins);
    let implied = CorrelationSet::from_moments(
        mo.sz,
        mo.szz,
        mo.y,
        num_complex::Complex64::new(mo.u_abs, 0.0),
    );
    SqueezingReport::assemble(
        xi1_sq,
        xi2_sq,
        xi3_sq,
        xi3_sq_simplified,
        varsigma_sq,
        cc,
        implied.is_physical(POSITIVITY_TOL),
    )
}

/// Report built from the explicit per-channel formulas:
/// `xi1^2 = 1 - gain C_r(0) / M^2`, `xi2^2 = xi1^2 / <s1z>^2`,
/// `xi3^2` from the evolved `<s1 . s2>`, and the concurrence from the evolved
/// `|u|`, `w`, `y` and `v+-`.
pub fn closed_form_report(
    kind: ChannelKind,
    cfg: &SystemConfig,
    p: f64,
    knob: Knob,
) -> Result<SqueezingReport> {
    let mo = closed_form_moments(kind, cfg, p, knob)?;
    let xi1_sq = 1.0 - mo.gain * initial_rescaled_concurrence(cfg) / (mo.norm * mo.norm);
    Ok(report_from_closed(cfg, &mo, xi1_sq))
}

/// Limiting report: amplitude damping with `m -> inf` (everything returns to
/// its initial value) or phase damping with `m -> 0` (`M3 = 1 + sz0`, no
/// transverse coherence left). `p` does not enter either limit.
pub fn asymptotic_report(kind: ChannelKind, cfg: &SystemConfig, p: f64) -> Result<SqueezingReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::StrengthOutOfRange(p));
    }
    let init = closed_initial_correlations(cfg);
    let n_spins = cfg.n_spins;
    match kind {
        ChannelKind::AmplitudeDamping => {
            let cr0 = initial_rescaled_concurrence(cfg);
            let xi1_sq = 1.0 - cr0;
            let varsigma_sq = varsigma_sq(&init, n_spins);
            let xi2_sq = if init.sz == 0.0 { f64::INFINITY } else { xi1_sq / (init.sz * init.sz) };
            let cc = BlockConcurrence::evaluate(&init, n_spins);
            let mut report = SqueezingReport::assemble(
                xi1_sq,
                xi2_sq,
                xi1_sq.min(varsigma_sq),
                xi1_sq,
                varsigma_sq,
                cc,
                init.is_physical(POSITIVITY_TOL),
            );
            report.concurrence = cr0;
            Ok(report)
        }
        ChannelKind::PhaseDamping => {
            let norm = 1.0 + init.sz;
            if !(norm > 0.0) {
                return Err(Error::NonPositiveNorm(norm));
            }
            let q = (init.szz + 2.0 * init.sz + 1.0) / (norm * norm);
            let mo = ClosedFormMoments { sz: 1.0, szz: q, y: 0.0, u_abs: 0.0, q, norm, gain: 0.0 };
            let mut report = report_from_closed(cfg, &mo, 1.0);
            report.concurrence = (0.5 * pairs(n_spins) * (q - 1.0)).max(0.0);
            Ok(report)
        }
        ChannelKind::Depolarizing => Err(Error::UnsupportedLimit(kind)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn cfg(n: usize, theta: f64) -> SystemConfig {
        SystemConfig::new(n, theta).unwrap()
    }

    #[test]
    fn coherent_state_is_unsqueezed() {
        let c = closed_initial_correlations(&cfg(12, 0.0));
        let r = SqueezingReport::from_correlations(&c, 12);
        assert_eq!(r.xi1_sq, 1.0);
        assert_eq!(r.xi2_sq, 1.0);
        assert_eq!(r.varsigma_sq, 1.0);
        assert_eq!(r.xi3_sq, 1.0);
        assert_eq!(r.zeta3_sq, 0.0);
        assert_eq!(r.concurrence, 0.0);
    }

    #[test]
    fn uncorrelated_varsigma_is_one() {
        let c = CorrelationSet::from_moments(0.3, 0.09, 0.0, Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(varsigma_sq(&c, 9), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn xi2_sentinel_at_zero_mean_spin() {
        let c = CorrelationSet::from_moments(0.0, 0.2, 0.1, Complex64::new(0.05, 0.0));
        assert_eq!(xi2_sq(&c, 6), f64::INFINITY);
        assert_eq!(zeta_sq(xi2_sq(&c, 6)), 0.0);
        let c = CorrelationSet::from_moments(-1.0, 1.0, 0.0, Complex64::new(0.0, 0.0));
        assert_eq!(xi2_sq(&c, 6), xi1_sq(&c, 6));
    }

    #[test]
    fn xi3_sentinel_for_nonpositive_denominator() {
        let mut c = CorrelationSet::from_moments(0.0, -1.0, 0.0, Complex64::new(0.0, 0.0));
        c.q = -3.0;
        assert_eq!(xi3_sq(&c, 2), f64::INFINITY);
        assert_eq!(xi3_sq_simplified(&c, 2), f64::INFINITY);
    }

    #[test]
    fn bell_block_and_product() {
        // (|01> + |10>)/sqrt2: w = y = 1/2, v+- = 0.
        let bell = CorrelationSet::from_moments(0.0, -1.0, 0.5, Complex64::new(0.0, 0.0));
        let cc = block_concurrence(&bell, 2).unwrap();
        assert_eq!(cc.rescaled, 1.0);
        assert_eq!(cc.branch, ConcurrenceBranch::SingleExcitation);

        let product = CorrelationSet::from_moments(-1.0, 1.0, 0.0, Complex64::new(0.0, 0.0));
        let cc = block_concurrence(&product, 12).unwrap();
        assert_eq!(cc.rescaled, 0.0);
        assert_eq!(cc.branch, ConcurrenceBranch::Separable);
    }

    #[test]
    fn block_concurrence_rejects_unphysical() {
        let bad = CorrelationSet::from_moments(0.0, 1.0, 0.3, Complex64::new(0.0, 0.0));
        assert!(matches!(block_concurrence(&bad, 4), Err(Error::NotPositive(_))));
    }

    #[test]
    fn initial_xi1_matches_concurrence_identity() {
        for n in [2, 5, 12] {
            for k in 0..=20 {
                let c = cfg(n, k as f64 * 0.1 * PI);
                let r = SqueezingReport::from_correlations(&closed_initial_correlations(&c), n);
                assert_abs_diff_eq!(r.xi1_sq, 1.0 - initial_rescaled_concurrence(&c), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn initial_zeta3_equals_concurrence() {
        let c = cfg(12, 0.1 * PI);
        let r = SqueezingReport::from_correlations(&closed_initial_correlations(&c), 12);
        assert_abs_diff_eq!(r.zeta3_sq, r.concurrence, epsilon = 1e-12);
        assert!(r.concurrence > 0.5);
    }

    #[test]
    fn bypass_at_zero_strength_is_initial() {
        for kind in ChannelKind::ALL {
            for theta in [0.1 * PI, 1.8 * PI] {
                let c = cfg(12, theta);
                let closed = closed_form_report(kind, &c, 0.0, Knob::Bypass).unwrap();
                let init = SqueezingReport::from_correlations(&closed_initial_correlations(&c), 12);
                for ((name, a), (_, b)) in closed.fields().iter().zip(init.fields().iter()) {
                    assert!((a - b).abs() < 1e-12, "{kind:?} {name}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn pdc_small_m_limit() {
        let c = cfg(12, 1.8 * PI);
        let lim = asymptotic_report(ChannelKind::PhaseDamping, &c, 0.3).unwrap();
        assert_eq!(lim.xi1_sq, 1.0);
        assert_eq!(lim.xi2_sq, 1.0);
        assert_eq!(lim.zeta2_sq, 0.0);
        assert!(lim.zeta3_sq > 0.0);
        // The surrogate normalization pushes <s1z s2z> above 1 in this limit.
        assert!(!lim.physical);
        assert!(asymptotic_report(ChannelKind::Depolarizing, &c, 0.3).is_err());
    }

    #[test]
    fn adc_large_m_limit_is_initial() {
        let c = cfg(12, 0.1 * PI);
        let lim = asymptotic_report(ChannelKind::AmplitudeDamping, &c, 0.9).unwrap();
        assert_abs_diff_eq!(lim.concurrence, initial_rescaled_concurrence(&c), epsilon = 1e-15);
        assert_abs_diff_eq!(lim.zeta3_sq, lim.concurrence, epsilon = 1e-12);
    }
}
