//! One-axis twisted initial states and their two-spin correlations.
//!
//! Basis convention used throughout the crate: index 0 is the excited level
//! `|0>` (sigma_z = +1) and index 1 is the ground level `|1>` (sigma_z = -1),
//! so `sigma_+ = |0><1|`. The symmetric (Dicke) basis is indexed by the number
//! of excited spins `k = m_z + N/2`, so the all-down state is index 0.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;

/// Ensemble size and twist angle (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_spins: usize,
    pub theta: f64,
}

impl SystemConfig {
    pub fn new(n_spins: usize, theta: f64) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::TooFewSpins(n_spins));
        }
        if !theta.is_finite() {
            return Err(Error::NonFiniteTheta(theta));
        }
        Ok(Self { n_spins, theta })
    }
}

/// Parses an angle given either in radians (`0.314`) or as a multiple of pi
/// (`0.1pi`, `1.8pi`, `pi`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || Error::BadAngle(text.to_string());
    if let Some(head) = t.strip_suffix("pi").or_else(|| t.strip_suffix("π")) {
        let head = head.trim().trim_end_matches('*');
        let factor = if head.is_empty() {
            1.0
        } else if head == "-" {
            -1.0
        } else {
            head.parse::<f64>().map_err(|_| bad())?
        };
        return Ok(factor * PI);
    }
    let value = t.parse::<f64>().map_err(|_| bad())?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Single-spin and two-spin moments of an exchange-symmetric parity state.
///
/// `sz = <s1z>`, `szz = <s1z s2z>`, `y = <s1+ s2->`, `u = <s1+ s2+>`
/// (so `<s1- s2-> = conj(u)`), and `q = <s1 . s2>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub sz: f64,
    pub szz: f64,
    pub y: f64,
    #[serde(with = "complex_pair")]
    pub u: Complex64,
    pub q: f64,
}

impl CorrelationSet {
    /// Builds a set with `q` fixed by the exchange identity `q = 4y + szz`.
    pub fn from_moments(sz: f64, szz: f64, y: f64, u: Complex64) -> Self {
        Self { sz, szz, y, u, q: 4.0 * y + szz }
    }

    pub fn v_plus(&self) -> f64 {
        0.25 * (1.0 + 2.0 * self.sz + self.szz)
    }

    pub fn v_minus(&self) -> f64 {
        0.25 * (1.0 - 2.0 * self.sz + self.szz)
    }

    pub fn w(&self) -> f64 {
        0.25 * (1.0 - self.szz)
    }

    /// Deviation from the exchange identity `q = 4y + szz`.
    pub fn exchange_residual(&self) -> f64 {
        (self.q - 4.0 * self.y - self.szz).abs()
    }

    /// The block-diagonal two-spin density matrix in the basis
    /// `|00>, |01>, |10>, |11>`.
    pub fn two_qubit_matrix(&self) -> Matrix4<Complex64> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = re(self.v_plus());
        rho[(3, 3)] = re(self.v_minus());
        rho[(3, 0)] = self.u;
        rho[(0, 3)] = self.u.conj();
        rho[(1, 1)] = re(self.w());
        rho[(2, 2)] = re(self.w());
        rho[(1, 2)] = re(self.y);
        rho[(2, 1)] = re(self.y);
        rho
    }

    /// Smallest eigenvalue of the implied two-spin state. The matrix is a
    /// direct sum of two 2x2 blocks, so this is closed form.
    pub fn min_eigenvalue(&self) -> f64 {
        let (vp, vm, w) = (self.v_plus(), self.v_minus(), self.w());
        let outer = 0.5 * (vp + vm) - (0.25 * (vp - vm).powi(2) + self.u.norm_sqr()).sqrt();
        let inner = w - self.y.abs();
        outer.min(inner)
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.sz.abs() <= 1.0 + tol && self.szz.abs() <= 1.0 + tol && self.min_eigenvalue() >= -tol
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_deviation(&self, other: &CorrelationSet) -> f64 {
        [
            (self.sz - other.sz).abs(),
            (self.szz - other.szz).abs(),
            (self.y - other.y).abs(),
            (self.u - other.u).norm(),
            (self.q - other.q).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub(crate) mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Amplitudes over the symmetric basis, indexed by the number of excited spins.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeState {
    amplitudes: Vec<Complex64>,
}

pub(crate) const NORM_TOL: f64 = 1e-12;

impl DickeState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 3 {
            return Err(Error::TooFewSpins(amplitudes.len().saturating_sub(1)));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized(norm_sq));
        }
        Ok(Self { amplitudes })
    }

    pub fn n_spins(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Closed-form moments of the twisted state.
///
/// `y` is not given in closed form in the source derivation; it follows from
/// `<s1 . s2> = 1`, which holds for every state in the symmetric subspace.
///
/// The imaginary part of `u` carries the sign that matches `<s1+ s2+>` for the
/// state built by [`twisted_state_dicke`]. [`published_u0`] keeps the published
/// expression, which is the complex conjugate (it equals `<s1- s2->`).
pub fn closed_initial_correlations(cfg: &SystemConfig) -> CorrelationSet {
    let n = cfg.n_spins as i32;
    let half = cfg.theta / 2.0;
    let c = cfg.theta.cos().powi(n - 2);
    let sz = -half.cos().powi(n - 1);
    let szz = 0.5 * (1.0 + c);
    let y = 0.25 * (1.0 - szz);
    CorrelationSet { sz, szz, y, u: published_u0(cfg).conj(), q: 1.0 }
}

/// `u0 = -(1 - cos^{N-2} theta)/8 - (i/2) sin(theta/2) cos^{N-2}(theta/2)`, verbatim.
pub fn published_u0(cfg: &SystemConfig) -> Complex64 {
    let n = cfg.n_spins as i32;
    let half = cfg.theta / 2.0;
    let c = cfg.theta.cos().powi(n - 2);
    Complex64::new(-(1.0 - c) / 8.0, -0.5 * half.sin() * half.cos().powi(n - 2))
}

/// `Q_12y = (1 - cos^{N-2} theta) / 2`.
pub fn q12y(cfg: &SystemConfig) -> f64 {
    0.5 * (1.0 - cfg.theta.cos().powi(cfg.n_spins as i32 - 2))
}

/// Pairwise concurrence of the twisted state,
/// `C0 = {sqrt[(1 - c)^2 + 16 sin^2(theta/2) cos^{2N-4}(theta/2)] - 1 + c} / 4`
/// with `c = cos^{N-2} theta`.
pub fn initial_pair_concurrence(cfg: &SystemConfig) -> f64 {
    let n = cfg.n_spins as i32;
    let half = cfg.theta / 2.0;
    let c = cfg.theta.cos().powi(n - 2);
    let root = ((1.0 - c).powi(2) + 16.0 * half.sin().powi(2) * half.cos().powi(2 * n - 4)).sqrt();
    0.25 * (root - 1.0 + c)
}

/// `C_r(0) = (N - 1) C0`.
pub fn initial_rescaled_concurrence(cfg: &SystemConfig) -> f64 {
    (cfg.n_spins as f64 - 1.0) * initial_pair_concurrence(cfg)
}

/// `J_x` in the symmetric basis, from the ladder matrix elements.
pub(crate) fn dicke_jx(n_spins: usize) -> DMatrix<f64> {
    let dim = n_spins + 1;
    let j = n_spins as f64 / 2.0;
    let mut jx = DMatrix::zeros(dim, dim);
    for i in 0..n_spins {
        let m = i as f64 - j;
        let elem = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        jx[(i + 1, i)] = elem;
        jx[(i, i + 1)] = elem;
    }
    jx
}

/// `exp(-i theta Jx^2 / 2)` applied to the all-down state.
pub fn twisted_state_dicke(cfg: &SystemConfig) -> DickeState {
    let jx = dicke_jx(cfg.n_spins);
    let eig = (&jx * &jx).symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&lambda| Complex64::from_polar(1.0, -cfg.theta * lambda / 2.0))
        .collect();
    let mut amplitudes: Vec<Complex64> = (0..=cfg.n_spins)
        .map(|k| {
            phases
                .iter()
                .enumerate()
                .map(|(l, ph)| ph * (v[(k, l)] * v[(0, l)]))
                .sum()
        })
        .collect();
    // Renormalize away eigenvector round-off.
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amplitudes {
        *a /= norm;
    }
    DickeState { amplitudes }
}

/// Exact moments of the two-spin marginal of a symmetric pure state.
pub fn oracle_initial_correlations(state: &DickeState) -> Result<CorrelationSet> {
    let norm_sq = state.norm_sqr();
    if (norm_sq - 1.0).abs() > NORM_TOL {
        return Err(Error::Unnormalized(norm_sq));
    }
    let rho = oracle::TwoQubitState::new(oracle::weighted_pair_marginal(state, 1.0, 1.0))?;
    Ok(oracle::block_form_check(&rho).correlations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parse_angle_forms() {
        assert_abs_diff_eq!(parse_angle("0.1pi").unwrap(), 0.1 * PI);
        assert_abs_diff_eq!(parse_angle("1.8pi").unwrap(), 1.8 * PI);
        assert_abs_diff_eq!(parse_angle("pi").unwrap(), PI);
        assert_abs_diff_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("abc").is_err());
        assert!(parse_angle("inf").is_err());
    }

    #[test]
    fn config_validation() {
        assert_eq!(SystemConfig::new(1, 0.0), Err(Error::TooFewSpins(1)));
        assert!(SystemConfig::new(2, f64::NAN).is_err());
    }

    #[test]
    fn untwisted_state_is_all_down() {
        let cfg = SystemConfig::new(12, 0.0).unwrap();
        let c = closed_initial_correlations(&cfg);
        assert_eq!((c.sz, c.szz, c.y, c.q), (-1.0, 1.0, 0.0, 1.0));
        assert_eq!(c.u.norm(), 0.0);

        let state = twisted_state_dicke(&cfg);
        assert_abs_diff_eq!(state.amplitudes()[0].norm(), 1.0, epsilon = 1e-14);
        for a in &state.amplitudes()[1..] {
            assert!(a.norm() < 1e-14);
        }
    }

    #[test]
    fn two_spins_at_pi_saturate_positivity() {
        // exp(-i pi/4 (1 + XX)) |11> = e^{-i pi/4} (|11> - i|00>)/sqrt2
        let cfg = SystemConfig::new(2, PI).unwrap();
        let c = closed_initial_correlations(&cfg);
        assert_abs_diff_eq!(c.sz, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.szz, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.u.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.u.im, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(published_u0(&cfg).im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(c.u.norm(), (c.v_plus() * c.v_minus()).sqrt(), epsilon = 1e-15);

        let oracle = oracle_initial_correlations(&twisted_state_dicke(&cfg)).unwrap();
        assert!(oracle.max_deviation(&c) < 1e-12, "{oracle:?} vs {c:?}");
    }

    #[test]
    fn closed_form_value_at_tenth_pi() {
        let cfg = SystemConfig::new(12, 0.1 * PI).unwrap();
        let c = closed_initial_correlations(&cfg);
        assert_abs_diff_eq!(c.sz, -(0.05 * PI).cos().powi(11), epsilon = 1e-15);
        assert_abs_diff_eq!(c.sz, -0.8726, epsilon = 1e-4);
    }

    #[test]
    fn twisted_state_is_normalized() {
        for n in 2..=14 {
            for k in 0..=20 {
                let cfg = SystemConfig::new(n, k as f64 * 0.1 * PI).unwrap();
                let state = twisted_state_dicke(&cfg);
                assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_states_have_unit_exchange() {
        for n in [3, 7, 14] {
            let cfg = SystemConfig::new(n, 0.7).unwrap();
            let c = oracle_initial_correlations(&twisted_state_dicke(&cfg)).unwrap();
            assert_abs_diff_eq!(c.q, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_unnormalized_state() {
        let amps = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(DickeState::new(amps), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn implied_marginal_is_a_state() {
        for n in [2, 5, 12] {
            for k in 0..=20 {
                let cfg = SystemConfig::new(n, k as f64 * 0.1 * PI).unwrap();
                let c = closed_initial_correlations(&cfg);
                let rho = c.two_qubit_matrix();
                assert!((rho - rho.adjoint()).norm() < 1e-15);
                assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-14);
                assert!(c.min_eigenvalue() >= -1e-12, "n={n} k={k}: {}", c.min_eigenvalue());
            }
        }
    }
}
