//! Explicit `2^N`-dimensional route. Spin 1 is the most significant bit and
//! bit value 0 is the excited state `|0>`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;

use super::{binomial, TwoQubitState};
use crate::channels::ProtectedChannel;
use crate::error::{Error, Result};
use crate::initial_state::DickeState;

pub const MAX_FULL_SPINS: usize = 8;

/// Expands a symmetric state into the computational basis.
pub fn dicke_to_full(state: &DickeState) -> DVector<Complex64> {
    let n = state.n_spins();
    let amps = state.amplitudes();
    DVector::from_fn(1 << n, |idx, _| {
        let excited = n - (idx as u32).count_ones() as usize;
        amps[excited] / binomial(n, excited).sqrt()
    })
}

/// `sum_l A_l^{(q)} rho A_l^{(q)dag}`, with each `A_l` acting on spin `q`.
/// Works block by block on the 2x2 submatrices that spin `q` couples.
fn apply_local_map(
    rho: &DMatrix<Complex64>,
    n: usize,
    q: usize,
    ops: &[Matrix2<Complex64>],
) -> DMatrix<Complex64> {
    let bit = 1 << (n - 1 - q);
    let dim = rho.nrows();
    let adjoints: Vec<Matrix2<Complex64>> = ops.iter().map(|a| a.adjoint()).collect();
    let mut out = DMatrix::zeros(dim, dim);
    let lows: Vec<usize> = (0..dim).filter(|i| i & bit == 0).collect();
    for &c in &lows {
        let c1 = c | bit;
        for &r in &lows {
            let r1 = r | bit;
            let block = Matrix2::new(rho[(r, c)], rho[(r, c1)], rho[(r1, c)], rho[(r1, c1)]);
            let mapped: Matrix2<Complex64> =
                ops.iter().zip(&adjoints).map(|(a, ad)| a * block * ad).sum();
            out[(r, c)] = mapped[(0, 0)];
            out[(r, c1)] = mapped[(0, 1)];
            out[(r1, c)] = mapped[(1, 0)];
            out[(r1, c1)] = mapped[(1, 1)];
        }
    }
    out
}

/// Globally normalized post-selected state of all `N` spins.
pub fn post_selected_full_state(
    state: &DickeState,
    channel: &ProtectedChannel,
) -> Result<DMatrix<Complex64>> {
    let n = state.n_spins();
    if n > MAX_FULL_SPINS {
        return Err(Error::TooManySpins { path: "full-matrix", max: MAX_FULL_SPINS, n });
    }
    let psi = dicke_to_full(state);
    let mut rho = &psi * psi.adjoint();
    let ops = channel.sandwich_operators()?;
    for q in 0..n {
        rho = apply_local_map(&rho, n, q, &ops);
        let tr = rho.trace().re;
        if !(tr > 0.0) {
            return Err(Error::ZeroProbability(tr));
        }
        // Rescale as we go; only the final normalization matters.
        rho /= Complex64::new(tr, 0.0);
    }
    Ok(rho)
}

/// Reduces an `N`-spin density matrix to spins 1 and 2.
pub fn partial_trace_first_pair(rho: &DMatrix<Complex64>, n: usize) -> Matrix4<Complex64> {
    let rest = 1 << (n - 2);
    Matrix4::from_fn(|r, c| (0..rest).map(|x| rho[(r * rest + x, c * rest + x)]).sum())
}

/// Two-spin marginal computed through the full density matrix.
pub fn post_selected_pair_state_full(
    state: &DickeState,
    channel: &ProtectedChannel,
) -> Result<TwoQubitState> {
    let rho = post_selected_full_state(state, channel)?;
    let pair = partial_trace_first_pair(&rho, state.n_spins());
    TwoQubitState::new((pair + pair.adjoint()) * Complex64::new(0.5, 0.0))
}
