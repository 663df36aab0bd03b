//! Squeezing parameters from collective spin operators `J_a = sum_k s_a^(k) / 2`
//! evaluated on a full density matrix.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use super::full::{dicke_to_full, partial_trace_first_pair, post_selected_full_state, MAX_FULL_SPINS};
use super::TwoQubitState;
use crate::channels::ProtectedChannel;
use crate::error::{Error, Result};
use crate::initial_state::DickeState;

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    n_spins: usize,
    rho: DMatrix<Complex64>,
}

impl CollectiveState {
    pub fn from_dicke(state: &DickeState) -> Result<Self> {
        let n = state.n_spins();
        if n > MAX_FULL_SPINS {
            return Err(Error::TooManySpins { path: "full-matrix", max: MAX_FULL_SPINS, n });
        }
        let psi = dicke_to_full(state);
        Ok(Self { n_spins: n, rho: &psi * psi.adjoint() })
    }

    pub fn post_selected(state: &DickeState, channel: &ProtectedChannel) -> Result<Self> {
        Ok(Self { n_spins: state.n_spins(), rho: post_selected_full_state(state, channel)? })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn pair_marginal(&self) -> Result<TwoQubitState> {
        let pair = partial_trace_first_pair(&self.rho, self.n_spins);
        TwoQubitState::new((pair + pair.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// `J_axis X` for axis 0, 1, 2 = x, y, z.
    fn apply_j(&self, axis: usize, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.n_spins;
        let dim = x.nrows();
        let mut out = DMatrix::zeros(dim, x.ncols());
        for q in 0..n {
            let bit = 1usize << (n - 1 - q);
            for i in 0..dim {
                let up = i & bit == 0;
                let (src, coef) = match axis {
                    0 => (i ^ bit, Complex64::new(0.5, 0.0)),
                    1 => (i ^ bit, Complex64::new(0.0, if up { -0.5 } else { 0.5 })),
                    _ => (i, Complex64::new(if up { 0.5 } else { -0.5 }, 0.0)),
                };
                for c in 0..x.ncols() {
                    out[(i, c)] += coef * x[(src, c)];
                }
            }
        }
        out
    }

    /// Mean spin vector and symmetrized second moments `<{J_a, J_b}> / 2`.
    pub fn moments(&self) -> (Vector3<f64>, Matrix3<f64>) {
        let j_rho: Vec<DMatrix<Complex64>> = (0..3).map(|a| self.apply_j(a, &self.rho)).collect();
        let mean = Vector3::from_fn(|a, _| j_rho[a].trace().re);
        let mut second = Matrix3::zeros();
        for a in 0..3 {
            for b in 0..3 {
                second[(a, b)] = self.apply_j(a, &j_rho[b]).trace().re;
            }
        }
        let sym = (second + second.transpose()) * 0.5;
        (mean, sym)
    }
}

/// `xi1_sq`/`xi2_sq` are `None` when the mean spin vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectiveSqueezing {
    pub xi1_sq: Option<f64>,
    pub xi2_sq: Option<f64>,
    pub xi3_sq: f64,
}

const ZERO_SPIN: f64 = 1e-12;

pub fn collective_squeezing(state: &CollectiveState) -> CollectiveSqueezing {
    let n = state.n_spins() as f64;
    let (mean, second) = state.moments();
    let cov = second - mean * mean.transpose();

    let gamma = cov * (n - 1.0) + second;
    let lambda_min = gamma.symmetric_eigen().eigenvalues.min();
    let denom = second.trace() - n / 2.0;
    let xi3_sq = if denom > 0.0 { lambda_min / denom } else { f64::INFINITY };

    let len = mean.norm();
    if len <= ZERO_SPIN * n {
        return CollectiveSqueezing { xi1_sq: None, xi2_sq: None, xi3_sq };
    }
    let dir = mean / len;
    let seed = if dir.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - dir * seed.dot(&dir)).normalize();
    let e2 = dir.cross(&e1);
    let (a, b, c) = (e1.dot(&(cov * e1)), e1.dot(&(cov * e2)), e2.dot(&(cov * e2)));
    let min_var = 0.5 * (a + c) - (0.25 * (a - c).powi(2) + b * b).sqrt();
    let xi1_sq = 4.0 * min_var / n;
    let xi2_sq = n * n / (4.0 * len * len) * xi1_sq;
    CollectiveSqueezing { xi1_sq: Some(xi1_sq), xi2_sq: Some(xi2_sq), xi3_sq }
}
