//! Exact post-selected states and first-principles figures of merit.
//!
//! Nothing here uses the per-spin dual map. The sandwich `rho -> N E(M rho M^dag) N^dag`
//! is applied to every spin and the result is normalized by its global trace.
//!
//! Two routes compute the two-spin marginal:
//! * [`post_selected_pair_state`] reduces over the symmetric amplitudes. The
//!   spins being traced out only contribute through the diagonal weight
//!   `G = sum_l A_l^dag A_l`, so the marginal is
//!   `(L x L)(Tr_{3..N}[(I x I x G^{x(N-2)}) rho]) / Tr[G^{xN} rho]`.
//!   Works up to [`MAX_FAST_SPINS`] spins.
//! * [`full::post_selected_full_state`] materializes the `2^N x 2^N` density
//!   matrix and applies the Kraus sandwich spin by spin. Works up to
//!   [`full::MAX_FULL_SPINS`] spins.

pub mod collective;
pub mod full;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::channels::ProtectedChannel;
use crate::error::{Error, Result};
use crate::initial_state::{twisted_state_dicke, CorrelationSet, DickeState, SystemConfig};

pub use collective::{collective_squeezing, CollectiveSqueezing, CollectiveState};

pub const MAX_FAST_SPINS: usize = 14;

/// Hermiticity and trace tolerance for two-spin states.
pub const STATE_TOL: f64 = 1e-12;
/// Eigenvalue floor for two-spin states.
pub const PSD_TOL: f64 = 1e-10;

/// A two-spin density matrix in the basis `|00>, |01>, |10>, |11>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

impl TwoQubitState {
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let herm = (rho - rho.adjoint()).camax();
        let trace = rho.trace();
        if herm > STATE_TOL || (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::Unnormalized(trace.re));
        }
        let state = Self { rho };
        let min = state.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(state)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho.symmetric_eigen().eigenvalues.min()
    }

    pub fn product(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Result<Self> {
        Self::new(a.kronecker(b))
    }
}

/// `G = M^dag (sum_l E_l^dag N^dag N E_l) M`, which is diagonal for every
/// supported channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightOperator {
    pub g0: f64,
    pub g1: f64,
}

impl WeightOperator {
    pub fn from_operators(ops: &[Matrix2<Complex64>]) -> Result<Self> {
        let g: Matrix2<Complex64> = ops.iter().map(|a| a.adjoint() * a).sum();
        let scale = g[(0, 0)].norm().max(g[(1, 1)].norm()).max(f64::MIN_POSITIVE);
        let off = g[(0, 1)].norm().max(g[(1, 0)].norm());
        if off > 1e-12 * scale {
            return Err(Error::NonDiagonalWeight(off));
        }
        Ok(Self { g0: g[(0, 0)].re, g1: g[(1, 1)].re })
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Tr_{3..N}[(I x I x G^{x(N-2)}) |psi><psi|]` for a symmetric state, with
/// `G = diag(g0, g1)`. Unnormalized unless `g0 = g1 = 1`.
pub(crate) fn weighted_pair_marginal(state: &DickeState, g0: f64, g1: f64) -> Matrix4<Complex64> {
    let n = state.n_spins();
    let amps = state.amplitudes();
    // Amplitude of one computational-basis string with `k` excited spins.
    let per_string: Vec<Complex64> =
        amps.iter().enumerate().map(|(k, a)| a / binomial(n, k).sqrt()).collect();
    let rest = n - 2;
    let weights: Vec<f64> = (0..=rest)
        .map(|j| binomial(rest, j) * g0.powi(j as i32) * g1.powi((rest - j) as i32))
        .collect();
    let excited = |idx: usize| -> usize { (idx >> 1 == 0) as usize + (idx & 1 == 0) as usize };
    Matrix4::from_fn(|r, c| {
        let (er, ec) = (excited(r), excited(c));
        weights
            .iter()
            .enumerate()
            .map(|(j, w)| per_string[er + j] * per_string[ec + j].conj() * *w)
            .sum()
    })
}

fn success_weight(state: &DickeState, g0: f64, g1: f64) -> f64 {
    let n = state.n_spins();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * g0.powi(k as i32) * g1.powi((n - k) as i32))
        .sum()
}

/// Threshold below which post-selection counts as never succeeding.
const ZERO_WEIGHT: f64 = 1e-280;

/// Two-spin marginal of the globally normalized post-selected state (fast route).
pub fn post_selected_pair_state(
    state: &DickeState,
    channel: &ProtectedChannel,
) -> Result<TwoQubitState> {
    let n = state.n_spins();
    if n > MAX_FAST_SPINS {
        return Err(Error::TooManySpins { path: "symmetric", max: MAX_FAST_SPINS, n });
    }
    let mut ops = channel.sandwich_operators()?;
    let weight = WeightOperator::from_operators(&ops)?;
    let scale = weight.g0.max(weight.g1);
    if !(scale > 0.0) {
        return Err(Error::ZeroProbability(0.0));
    }
    let root = Complex64::new(scale.sqrt().recip(), 0.0);
    for a in &mut ops {
        *a *= root;
    }
    let (g0, g1) = (weight.g0 / scale, weight.g1 / scale);
    let z = success_weight(state, g0, g1);
    if z <= ZERO_WEIGHT {
        return Err(Error::ZeroProbability(z));
    }
    let reduced = weighted_pair_marginal(state, g0, g1);
    let mut out = Matrix4::zeros();
    for a in &ops {
        for b in &ops {
            let ab = a.kronecker(b);
            out += ab * reduced * ab.adjoint();
        }
    }
    out /= Complex64::new(z, 0.0);
    // Symmetrize away round-off before validating.
    let out = (out + out.adjoint()) * Complex64::new(0.5, 0.0);
    TwoQubitState::new(out)
}

/// Moments of the exact post-selected two-spin state of the twisted ensemble.
pub fn post_selected_correlations(
    cfg: &SystemConfig,
    channel: &ProtectedChannel,
) -> Result<CorrelationSet> {
    let state = twisted_state_dicke(cfg);
    Ok(block_form_check(&post_selected_pair_state(&state, channel)?).correlations)
}

/// Moments read off a two-spin state, and how far it departs from the
/// exchange-symmetric block-diagonal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockFormCheck {
    pub correlations: CorrelationSet,
    /// Largest magnitude outside the block pattern: coherences between the
    /// `{|00>, |11>}` and `{|01>, |10>}` blocks, `|rho_11 - rho_22|`,
    /// `|rho_12 - rho_21|` and the imaginary part of `rho_12`.
    pub residual: f64,
}

pub fn block_form_check(rho: &TwoQubitState) -> BlockFormCheck {
    let r = rho.matrix();
    let sz = (r[(0, 0)] + r[(1, 1)] - r[(2, 2)] - r[(3, 3)]).re;
    let szz = (r[(0, 0)] - r[(1, 1)] - r[(2, 2)] + r[(3, 3)]).re;
    let y = 0.5 * (r[(2, 1)] + r[(1, 2)]).re;
    let u = r[(3, 0)];
    // <s1 . s2> = Tr[rho (2 SWAP - I)].
    let q = 2.0 * (r[(0, 0)] + r[(3, 3)] + r[(1, 2)] + r[(2, 1)]).re - 1.0;
    let off_block = [(0, 1), (0, 2), (1, 0), (2, 0), (1, 3), (3, 1), (2, 3), (3, 2)];
    let mut residual = off_block.iter().map(|&ij| r[ij].norm()).fold(0.0, f64::max);
    residual = residual
        .max((r[(1, 1)] - r[(2, 2)]).norm())
        .max((r[(1, 2)] - r[(2, 1)]).norm())
        .max(r[(1, 2)].im.abs());
    BlockFormCheck { correlations: CorrelationSet { sz, szz, y, u, q }, residual }
}

/// Eigenvalues of a two-spin state at or below this are treated as round-off.
const RANK_TOL: f64 = 1e-14;
/// Concurrences at or below this are reported as exactly 0.
const CONCURRENCE_FLOOR: f64 = 1e-14;

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, where `l_i` are the
/// descending square roots of the eigenvalues of `rho rho~` and
/// `rho~ = (sy x sy) rho* (sy x sy)`.
///
/// With `rho = A A^dag` the `l_i` are the singular values of
/// `A^T (sy x sy) A` (padded with zeros), which avoids square roots of
/// eigenvalues that vanish up to round-off.
pub fn wootters_concurrence(state: &TwoQubitState) -> Result<f64> {
    let eig = state.matrix().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    let kept: Vec<usize> = (0..4).filter(|&i| eig.eigenvalues[i] > RANK_TOL).collect();
    let a = DMatrix::from_fn(4, kept.len(), |r, c| {
        let i = kept[c];
        eig.eigenvectors[(r, i)] * eig.eigenvalues[i].sqrt()
    });
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    #[rustfmt::skip]
    let yy = DMatrix::from_row_slice(4, 4, &[
        zero, zero, zero, -one,
        zero, zero, one, zero,
        zero, one, zero, zero,
        -one, zero, zero, zero,
    ]);
    let tau = a.transpose() * yy * a;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.resize(4, 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3];
    Ok(if c > CONCURRENCE_FLOOR { c } else { 0.0 })
}
