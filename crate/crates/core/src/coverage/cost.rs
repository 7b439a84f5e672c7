//! Admissible cost functions `f(d_1, ..., d_k)` of the distances from a point
//! to the `k` sensors of its cell.
//!
//! An admissible cost is nondecreasing in every distance and symmetric under
//! permutation of its arguments; [`validate_cost`] checks both numerically.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::math;
use crate::radar::RadarParams;

pub trait CostFunction {
    /// Number of distances `k`.
    fn arity(&self) -> usize;

    /// `f(d)`, with `d.len() == arity()`.
    fn value(&self, distances: &[f64]) -> f64;

    /// `∂f/∂d_m`.
    fn partial(&self, m: usize, distances: &[f64]) -> f64;
}

/// The built-in cost functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinCost {
    /// `Σ d_m`.
    SumDistance { arity: usize },
    /// `½ Σ d_m²`.
    SumSquaredHalf { arity: usize },
    /// `(Σ d_m^p)^{1/p}`.
    PNorm { arity: usize, exponent: f64 },
    /// `max_m d_m`; the partial is a subgradient.
    MaxDistance { arity: usize },
    /// `−P_d(d_1, d_2)` for a bi-static radar pair.
    NegDetection(RadarParams),
}

impl BuiltinCost {
    pub fn pnorm(arity: usize, exponent: f64) -> Result<Self> {
        if !(exponent >= 1.0) || !exponent.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "p-norm exponent must be finite and at least 1, got {exponent}"
            )));
        }
        Ok(Self::PNorm { arity, exponent })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SumDistance { .. } => "sum_distance",
            Self::SumSquaredHalf { .. } => "sum_squared_half",
            Self::PNorm { .. } => "pnorm",
            Self::MaxDistance { .. } => "max_distance",
            Self::NegDetection(_) => "neg_detection",
        }
    }
}

/// `−P_d` as an arity-2 cost.
pub fn neg_detection_cost(params: RadarParams) -> BuiltinCost {
    BuiltinCost::NegDetection(params)
}

fn pnorm_value(d: &[f64], p: f64) -> f64 {
    let scale = d.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = d.iter().map(|&x| math::powf(x.abs() / scale, p)).sum();
    scale * math::powf(sum, 1.0 / p)
}

impl CostFunction for BuiltinCost {
    fn arity(&self) -> usize {
        match *self {
            Self::SumDistance { arity }
            | Self::SumSquaredHalf { arity }
            | Self::PNorm { arity, .. }
            | Self::MaxDistance { arity } => arity,
            Self::NegDetection(_) => 2,
        }
    }

    fn value(&self, d: &[f64]) -> f64 {
        match self {
            Self::SumDistance { .. } => d.iter().sum(),
            Self::SumSquaredHalf { .. } => 0.5 * d.iter().map(|x| x * x).sum::<f64>(),
            Self::PNorm { exponent, .. } => pnorm_value(d, *exponent),
            Self::MaxDistance { .. } => d.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)),
            Self::NegDetection(radar) => -radar.probability_unchecked(d[0], d[1]),
        }
    }

    fn partial(&self, m: usize, d: &[f64]) -> f64 {
        match self {
            Self::SumDistance { .. } => 1.0,
            Self::SumSquaredHalf { .. } => d[m],
            Self::PNorm { exponent, .. } => {
                let norm = pnorm_value(d, *exponent);
                if norm == 0.0 {
                    0.0
                } else {
                    math::powf(d[m] / norm, exponent - 1.0)
                }
            }
            Self::MaxDistance { .. } => {
                let max = d.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x));
                if d[m] < max {
                    0.0
                } else {
                    1.0 / d.iter().filter(|&&x| x == max).count() as f64
                }
            }
            Self::NegDetection(radar) => {
                let other = d[1 - m];
                -radar.partial_unchecked(d[m], other)
            }
        }
    }
}

impl<C: CostFunction + ?Sized> CostFunction for &C {
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn value(&self, d: &[f64]) -> f64 {
        (**self).value(d)
    }
    fn partial(&self, m: usize, d: &[f64]) -> f64 {
        (**self).partial(m, d)
    }
}

/// Worst violations found by [`validate_cost`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostValidation {
    /// Largest `|f(σ(d)) − f(d)| / max(1, |f(d)|)` over permutations `σ`.
    pub symmetry: f64,
    /// Largest negative central-difference slope (as a positive number).
    pub monotonicity: f64,
    /// Largest negative analytic partial (as a positive number).
    pub partial_sign: f64,
    pub samples: usize,
}

impl CostValidation {
    pub fn worst(&self) -> f64 {
        self.symmetry.max(self.monotonicity).max(self.partial_sign)
    }
}

pub const COST_VIOLATION_TOLERANCE: f64 = 1e-7;

/// Uniform `f64` in `[0, 1)` from 53 random bits.
pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn heap_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = alloc::vec![0usize; k];
    out.push(perm.clone());
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Checks symmetry and monotonicity at `samples` random distance tuples
/// drawn log-uniformly from `[1e-2, 10]`.
///
/// Fails with [`Error::CostRejected`] when any violation exceeds `1e-7`.
pub fn validate_cost(cost: &dyn CostFunction, samples: usize, seed: u64) -> Result<CostValidation> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let k = cost.arity();
    let perms = heap_permutations(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CostValidation {
        samples,
        ..Default::default()
    };
    let mut d = alloc::vec![0.0; k];
    let mut permuted = alloc::vec![0.0; k];
    for _ in 0..samples {
        for x in d.iter_mut() {
            *x = math::exp(math::ln(1e-2) + unit_f64(&mut rng) * math::ln(1e3));
        }
        let base = cost.value(&d);
        let scale = base.abs().max(1.0);
        for p in &perms {
            for (slot, &src) in permuted.iter_mut().zip(p) {
                *slot = d[src];
            }
            let v = cost.value(&permuted);
            report.symmetry = report.symmetry.max((v - base).abs() / scale);
        }
        for m in 0..k {
            let h = 1e-4 * d[m];
            let mut probe = d.clone();
            probe[m] = d[m] + h;
            let up = cost.value(&probe);
            probe[m] = d[m] - h;
            let down = cost.value(&probe);
            let slope = (up - down) / (2.0 * h);
            report.monotonicity = report.monotonicity.max(-slope);
            report.partial_sign = report.partial_sign.max(-cost.partial(m, &d));
        }
    }
    if report.worst() > COST_VIOLATION_TOLERANCE {
        return Err(Error::CostRejected(format!(
            "symmetry violation {:.3e}, monotonicity violation {:.3e}, negative partial {:.3e}",
            report.symmetry, report.monotonicity, report.partial_sign
        )));
    }
    Ok(report)
}
