//! Decoherence channels wrapped between a weak measurement `M = diag(1, m)`
//! and a reversal `N = diag(n, 1)`.
//!
//! Each channel acts identically and independently on every spin. The
//! per-spin Heisenberg-picture map of the sandwich is summarized by
//! [`DualMapCoefficients`]: `sigma_{x,y} -> f_xy sigma_{x,y}` and
//! `sigma_z -> f_z sigma_z + c_z`, each divided by the per-spin normalization.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_state::CorrelationSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChannelKind {
    AmplitudeDamping,
    Depolarizing,
    PhaseDamping,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] =
        [ChannelKind::AmplitudeDamping, ChannelKind::Depolarizing, ChannelKind::PhaseDamping];

    pub fn short_name(self) -> &'static str {
        match self {
            ChannelKind::AmplitudeDamping => "adc",
            ChannelKind::Depolarizing => "dpc",
            ChannelKind::PhaseDamping => "pdc",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "adc" | "amplitude-damping" => Ok(ChannelKind::AmplitudeDamping),
            "dpc" | "depolarizing" => Ok(ChannelKind::Depolarizing),
            "pdc" | "phase-damping" => Ok(ChannelKind::PhaseDamping),
            other => Err(format!("unknown channel `{other}` (expected adc, dpc or pdc)")),
        }
    }
}

/// A measurement strength that may be infinite (projective reversal).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strength {
    Finite(f64),
    Infinite,
}

impl Strength {
    pub fn value(self) -> f64 {
        match self {
            Strength::Finite(v) => v,
            Strength::Infinite => f64::INFINITY,
        }
    }
}

/// Which measurement knob the caller fixes; the other follows from the
/// channel constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Knob {
    /// No weak measurement at all: `M = N = I`.
    Bypass,
    M(f64),
    N(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtectedChannel {
    pub kind: ChannelKind,
    pub p: f64,
    pub s: f64,
    pub m: f64,
    pub n: Strength,
    /// `s n^2`; finite at `p = 1` for amplitude damping under its constraint.
    pub k: f64,
    pub bypass: bool,
    pub constraint_satisfied: bool,
}

const CONSTRAINT_TOL: f64 = 1e-12;

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::StrengthOutOfRange(p))
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::NonPositiveStrength { name, value })
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    check_positive(name, value)?;
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveStrength { name, value })
    }
}

impl ProtectedChannel {
    /// The bare channel with no weak measurement.
    pub fn bypass(kind: ChannelKind, p: f64) -> Result<Self> {
        check_p(p)?;
        let s = 1.0 - p;
        Ok(Self {
            kind,
            p,
            s,
            m: 1.0,
            n: Strength::Finite(1.0),
            k: s,
            bypass: true,
            constraint_satisfied: constraint_holds(kind, p, 1.0, Strength::Finite(1.0), s),
        })
    }

    /// Explicit strengths; the constraint status is recorded, not enforced.
    pub fn with_strengths(kind: ChannelKind, p: f64, m: f64, n: Strength) -> Result<Self> {
        check_p(p)?;
        check_positive("m", m)?;
        if let Strength::Finite(v) = n {
            check_positive("n", v)?;
        }
        let s = 1.0 - p;
        let k = match n {
            Strength::Finite(v) => s * v * v,
            Strength::Infinite if s == 0.0 => 0.0,
            Strength::Infinite => f64::INFINITY,
        };
        Ok(Self {
            kind,
            p,
            s,
            m,
            n,
            k,
            bypass: false,
            constraint_satisfied: constraint_holds(kind, p, m, n, k),
        })
    }

    /// Per-spin sandwich operators `A_l = N E_l M` (up to an overall scale,
    /// which post-selection removes). Amplitude damping is written in terms
    /// of `k = s n^2` so that `p = 1` with `n = inf` stays finite.
    pub fn sandwich_operators(&self) -> Result<Vec<Matrix2<Complex64>>> {
        let kraus = kraus_operators(self.kind, self.p)?;
        if self.bypass {
            return Ok(kraus);
        }
        let c = |x: f64| Complex64::new(x, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        if self.kind == ChannelKind::AmplitudeDamping {
            if self.k.is_finite() {
                let a0 = Matrix2::new(c(self.k.sqrt()), zero, zero, c(self.m));
                let a1 = Matrix2::new(zero, zero, c(self.p.sqrt()), zero);
                return Ok(vec![a0, a1]);
            }
            // n = inf with s > 0: only the no-jump branch survives the projector.
            return Ok(vec![Matrix2::new(c(self.s.sqrt()), zero, zero, zero)]);
        }
        let weak = weak_operators(self.m, self.n)?;
        let pre = weak.pre.map(c);
        let post = weak.reversal.map(c);
        Ok(kraus.iter().map(|e| post * e * pre).collect())
    }
}

fn constraint_holds(kind: ChannelKind, p: f64, m: f64, n: Strength, k: f64) -> bool {
    match kind {
        ChannelKind::AmplitudeDamping => {
            k.is_finite() && (k + p - m * m).abs() <= CONSTRAINT_TOL * (m * m).max(1.0)
        }
        ChannelKind::Depolarizing => (m - 1.0).abs() <= CONSTRAINT_TOL,
        ChannelKind::PhaseDamping => match n {
            Strength::Finite(v) => (v * v - m * m - 2.0).abs() <= CONSTRAINT_TOL * (v * v).max(1.0),
            Strength::Infinite => false,
        },
    }
}

/// Kraus operators of the bare channel at strength `p`.
pub fn kraus_operators(kind: ChannelKind, p: f64) -> Result<Vec<Matrix2<Complex64>>> {
    check_p(p)?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let zero = c(0.0);
    let s = 1.0 - p;
    let ops = match kind {
        ChannelKind::AmplitudeDamping => vec![
            Matrix2::new(c(s.sqrt()), zero, zero, c(1.0)),
            Matrix2::new(zero, zero, c(p.sqrt()), zero),
        ],
        ChannelKind::Depolarizing => {
            let pp = 0.75 * p;
            let a = c((pp / 3.0).sqrt());
            let i = Complex64::new(0.0, 1.0);
            vec![
                Matrix2::identity() * c((1.0 - pp).sqrt()),
                Matrix2::new(zero, c(1.0), c(1.0), zero) * a,
                Matrix2::new(zero, -i, i, zero) * a,
                Matrix2::new(c(1.0), zero, zero, c(-1.0)) * a,
            ]
        }
        ChannelKind::PhaseDamping => vec![
            Matrix2::identity() * c(s.sqrt()),
            Matrix2::new(c(p.sqrt()), zero, zero, zero),
            Matrix2::new(zero, zero, zero, c(p.sqrt())),
        ],
    };
    Ok(ops)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakOperators {
    /// `M = diag(1, m)`.
    pub pre: Matrix2<f64>,
    /// `N = diag(n, 1)`, or the projector `diag(1, 0)` for infinite `n`.
    pub reversal: Matrix2<f64>,
}

impl WeakOperators {
    /// `diag(1, 1/n)`: same post-selected state as `N`, bounded for large `n`.
    pub fn reversal_rescaled(&self) -> Matrix2<f64> {
        let scale = self.reversal[(0, 0)];
        Matrix2::new(1.0, 0.0, 0.0, self.reversal[(1, 1)] / scale)
    }
}

pub fn weak_operators(m: f64, n: Strength) -> Result<WeakOperators> {
    check_positive("m", m)?;
    let reversal = match n {
        Strength::Finite(v) => {
            check_positive("n", v)?;
            Matrix2::new(v, 0.0, 0.0, 1.0)
        }
        Strength::Infinite => Matrix2::new(1.0, 0.0, 0.0, 0.0),
    };
    Ok(WeakOperators { pre: Matrix2::new(1.0, 0.0, 0.0, m), reversal })
}

/// Builds a channel whose strengths satisfy the kind's constraint:
/// amplitude damping `s n^2 + p = m^2`, depolarizing `m = 1`,
/// phase damping `n^2 - 1 = m^2 + 1`.
pub fn solve_strengths(kind: ChannelKind, p: f64, given: Knob) -> Result<ProtectedChannel> {
    check_p(p)?;
    let s = 1.0 - p;
    let (m, n) = match (kind, given) {
        (_, Knob::Bypass) => return ProtectedChannel::bypass(kind, p),
        (ChannelKind::AmplitudeDamping, Knob::M(m)) => {
            check_finite("m", m)?;
            let k = m * m - p;
            if k < 0.0 {
                return Err(Error::InfeasibleConstraint { kind, m_sq: m * m, p });
            }
            let n = if s > 0.0 { Strength::Finite((k / s).sqrt()) } else { Strength::Infinite };
            let mut ch = ProtectedChannel::with_strengths(kind, p, m, Strength::Finite(1.0))?;
            ch.n = n;
            ch.k = k;
            ch.constraint_satisfied = true;
            return Ok(ch);
        }
        (ChannelKind::AmplitudeDamping, Knob::N(n)) => {
            check_finite("n", n)?;
            ((s * n * n + p).sqrt(), Strength::Finite(n))
        }
        (ChannelKind::Depolarizing, Knob::M(m)) => {
            check_positive("m", m)?;
            if (m - 1.0).abs() > CONSTRAINT_TOL {
                return Err(Error::ConstraintViolated {
                    kind,
                    detail: format!("depolarizing protection requires m = 1, got {m}"),
                });
            }
            (1.0, Strength::Finite(1.0))
        }
        (ChannelKind::Depolarizing, Knob::N(n)) => {
            check_finite("n", n)?;
            (1.0, Strength::Finite(n))
        }
        (ChannelKind::PhaseDamping, Knob::M(m)) => {
            check_finite("m", m)?;
            (m, Strength::Finite((m * m + 2.0).sqrt()))
        }
        (ChannelKind::PhaseDamping, Knob::N(n)) => {
            check_finite("n", n)?;
            if n * n <= 2.0 {
                return Err(Error::ConstraintViolated {
                    kind,
                    detail: format!("phase-damping protection requires n^2 > 2, got n = {n}"),
                });
            }
            ((n * n - 2.0).sqrt(), Strength::Finite(n))
        }
    };
    let mut ch = ProtectedChannel::with_strengths(kind, p, m, n)?;
    // Exact by construction; guards against round-off in the tolerance check.
    ch.constraint_satisfied = true;
    Ok(ch)
}

/// Heisenberg-picture action of the per-spin sandwich, normalized per spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualMapCoefficients {
    pub f_xy: f64,
    pub f_z: f64,
    pub c_z: f64,
    pub norm: f64,
}

/// Unnormalized diagonal data of `Theta+`: `Theta+(I) = diag(g0, g1)`,
/// `Theta+(sigma_z) = diag(z0, z1)` and `Theta+(sigma_+) = xy sigma_+`.
struct RawDual {
    g0: f64,
    g1: f64,
    z0: f64,
    z1: f64,
    xy: f64,
}

fn raw_dual(ch: &ProtectedChannel) -> RawDual {
    let (p, s, m) = (ch.p, ch.s, ch.m);
    let m2 = m * m;
    match ch.kind {
        ChannelKind::AmplitudeDamping => {
            if ch.k.is_finite() {
                let k = ch.k;
                RawDual { g0: k + p, g1: m2, z0: k - p, z1: -m2, xy: m * k.sqrt() }
            } else {
                RawDual { g0: s, g1: 0.0, z0: s, z1: 0.0, xy: 0.0 }
            }
        }
        ChannelKind::Depolarizing => match ch.n {
            Strength::Finite(n) => {
                let n2 = n * n;
                RawDual {
                    g0: n2 * (1.0 - p / 2.0) + p / 2.0,
                    g1: m2 * (p * n2 / 2.0 + 1.0 - p / 2.0),
                    z0: n2 * (1.0 - p / 2.0) - p / 2.0,
                    z1: m2 * (p * n2 / 2.0 - 1.0 + p / 2.0),
                    xy: m * n * s,
                }
            }
            Strength::Infinite => RawDual {
                g0: 1.0 - p / 2.0,
                g1: m2 * p / 2.0,
                z0: 1.0 - p / 2.0,
                z1: m2 * p / 2.0,
                xy: 0.0,
            },
        },
        ChannelKind::PhaseDamping => match ch.n {
            Strength::Finite(n) => {
                let n2 = n * n;
                RawDual { g0: n2, g1: m2, z0: n2, z1: -m2, xy: m * n * s }
            }
            Strength::Infinite => RawDual { g0: 1.0, g1: 0.0, z0: 1.0, z1: 0.0, xy: 0.0 },
        },
    }
}

/// Per-spin dual map. The normalization is the single-spin success weight
/// `Tr[Theta+(I) rho_1]` evaluated with the initial `<sigma_z> = sz0`:
/// `M1 = s n^2 + p = m^2` (amplitude damping, independent of `sz0`),
/// `M2 = (n^2 + 1)/2 + (n^2 s - s) sz0 / 2` (depolarizing, `m = 1`),
/// `M3 = m^2 + 1 + sz0` (phase damping, `n^2 = m^2 + 2`).
pub fn dual_map(ch: &ProtectedChannel, sz0: f64) -> Result<DualMapCoefficients> {
    let raw = raw_dual(ch);
    let norm = 0.5 * (raw.g0 + raw.g1) + 0.5 * (raw.g0 - raw.g1) * sz0;
    if !(norm > 0.0) {
        return Err(Error::NonPositiveNorm(norm));
    }
    Ok(DualMapCoefficients {
        f_xy: raw.xy / norm,
        f_z: 0.5 * (raw.z0 - raw.z1) / norm,
        c_z: 0.5 * (raw.z0 + raw.z1) / norm,
        norm,
    })
}

/// Pushes the moments of `c0` through the sandwich using the per-spin dual
/// map. Exact for amplitude damping under its constraint; for the other two
/// channels the per-spin normalization stands in for the global one.
pub fn evolve_correlations(ch: &ProtectedChannel, c0: &CorrelationSet) -> Result<CorrelationSet> {
    if !ch.bypass && !ch.constraint_satisfied {
        return Err(Error::ConstraintViolated {
            kind: ch.kind,
            detail: format!("m = {}, n = {:?}, p = {}", ch.m, ch.n, ch.p),
        });
    }
    let d = dual_map(ch, c0.sz)?;
    let gain = d.f_xy * d.f_xy;
    let szz = d.f_z * d.f_z * c0.szz + 2.0 * d.f_z * d.c_z * c0.sz + d.c_z * d.c_z;
    Ok(CorrelationSet {
        sz: d.f_z * c0.sz + d.c_z,
        szz,
        y: gain * c0.y,
        u: c0.u * gain,
        // Transverse part f_xy^2 (q0 - szz0) plus the zz part.
        q: gain * (c0.q - c0.szz) + szz,
    })
}

/// Amplitude-damping strength after time `t` at rate `gamma`: `p = 1 - exp(-gamma t / 2)`.
pub fn p_from_time(gamma: f64, t: f64) -> Result<f64> {
    if gamma < 0.0 || t < 0.0 || gamma.is_nan() || t.is_nan() {
        return Err(Error::NegativeTime { gamma, t });
    }
    Ok(1.0 - (-gamma * t / 2.0).exp())
}
