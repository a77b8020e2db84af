//! Evidence algebra on the binary frame {free, occupied}.
//!
//! A [`MassFunction`] assigns belief mass to `free`, `occupied` and the whole
//! frame (`unknown`); the empty set never carries mass and is not stored.
//! All operations are pure functions on small `Copy` values.

use std::fmt;

use thiserror::Error;

use crate::scalar::{Real, Scalar};

/// Sum residual above which construction rejects a triple outright.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Conflict at or above `1 - TOTAL_CONFLICT_MARGIN` is treated as total.
pub const TOTAL_CONFLICT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvidenceError {
    #[error("mass component {component} = {value} lies outside [0, 1]")]
    ComponentOutOfRange { component: &'static str, value: f64 },
    #[error("mass components sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("{name} = {value} is negative")]
    NegativeEvidence { name: &'static str, value: f64 },
    #[error("total conflict between sources (K = {conflict})")]
    TotalConflict { conflict: f64 },
}

/// Combination rule used when folding an update into a map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinationRule {
    Dempster,
    Yager,
}

/// Mass triple `(m_f, m_o, m_u)` with components in `[0, 1]` summing to one.
#[derive(Clone, Copy, PartialEq)]
pub struct MassFunction<T> {
    free: T,
    occupied: T,
    unknown: T,
}

impl<T: Scalar> MassFunction<T> {
    /// Validates and, if needed, renormalizes a mass triple.
    ///
    /// Residuals up to [`NORMALIZATION_TOLERANCE`] are absorbed by dividing by
    /// the sum; anything larger is reported as an error.
    pub fn new(free: T, occupied: T, unknown: T) -> Result<Self, EvidenceError> {
        let tol = T::lit(NORMALIZATION_TOLERANCE);
        let one = T::one();
        for (component, value) in [("m_f", free), ("m_o", occupied), ("m_u", unknown)] {
            // NaN fails both comparisons.
            if !(value >= T::zero() - tol && value <= one + tol) {
                return Err(EvidenceError::ComponentOutOfRange {
                    component,
                    value: value.to_f64_lossy(),
                });
            }
        }
        let clamp = |v: T| if v < T::zero() { T::zero() } else { v };
        let (free, occupied, unknown) = (clamp(free), clamp(occupied), clamp(unknown));
        let sum = free + occupied + unknown;
        let residual = sum.abs_diff(one);
        if residual > tol {
            return Err(EvidenceError::NotNormalized {
                sum: sum.to_f64_lossy(),
            });
        }
        if residual > T::drift() {
            Ok(Self {
                free: free / sum,
                occupied: occupied / sum,
                unknown: unknown / sum,
            })
        } else {
            Ok(Self {
                free,
                occupied,
                unknown,
            })
        }
    }

    /// Builds a mass function from its committed masses; `m_u` takes the rest.
    pub fn from_committed(free: T, occupied: T) -> Result<Self, EvidenceError> {
        Self::new(free, occupied, T::one() - free - occupied)
    }

    /// Total ignorance `[0, 0, 1]`.
    pub fn vacuous() -> Self {
        Self {
            free: T::zero(),
            occupied: T::zero(),
            unknown: T::one(),
        }
    }

    /// Trusted constructor for algebra results; normalization is checked in
    /// debug builds only.
    pub(crate) fn from_parts(free: T, occupied: T, unknown: T) -> Self {
        debug_assert!(
            (free + occupied + unknown).abs_diff(T::one()) <= T::lit(1e-6),
            "unnormalized result {free:?} {occupied:?} {unknown:?}"
        );
        Self {
            free,
            occupied,
            unknown,
        }
    }

    pub fn free(&self) -> T {
        self.free
    }

    pub fn occupied(&self) -> T {
        self.occupied
    }

    pub fn unknown(&self) -> T {
        self.unknown
    }

    /// Committed mass `m_f + m_o`.
    pub fn committed(&self) -> T {
        self.free + self.occupied
    }

    pub fn is_vacuous(&self) -> bool {
        self.free == T::zero() && self.occupied == T::zero() && self.unknown == T::one()
    }

    /// Conflict `K = m_f1 m_o2 + m_o1 m_f2`.
    pub fn conflict(&self, other: &Self) -> T {
        self.free * other.occupied + self.occupied * other.free
    }

    /// Products of the conjunctive combination before conflict handling.
    fn conjunctive(&self, other: &Self) -> (T, T, T) {
        let free = self.free * other.free + self.free * other.unknown + self.unknown * other.free;
        let occupied = self.occupied * other.occupied
            + self.occupied * other.unknown
            + self.unknown * other.occupied;
        (free, occupied, self.unknown * other.unknown)
    }

    /// Dempster's rule: conjunctive combination with the conflict normalized away.
    pub fn dempster(&self, other: &Self) -> Result<Self, EvidenceError> {
        let conflict = self.conflict(other);
        if conflict >= T::one() - T::lit(TOTAL_CONFLICT_MARGIN) {
            return Err(EvidenceError::TotalConflict {
                conflict: conflict.to_f64_lossy(),
            });
        }
        // Equals `1 − K` for normalized inputs; summing keeps rounding from compounding.
        let (free, occupied, unknown) = self.conjunctive(other);
        let norm = free + occupied + unknown;
        Ok(Self::from_parts(free / norm, occupied / norm, unknown / norm))
    }

    /// Yager's rule: conjunctive combination with the conflict moved to `unknown`.
    pub fn yager(&self, other: &Self) -> Self {
        let conflict = self.conflict(other);
        let (free, occupied, unknown) = self.conjunctive(other);
        Self::from_parts(free, occupied, unknown + conflict)
    }

    /// Combines `update` into `self` with the given rule.
    ///
    /// Under Dempster's rule a total conflict leaves `self` untouched.
    pub fn fuse(&self, update: &Self, rule: CombinationRule) -> Self {
        match rule {
            CombinationRule::Dempster => self.dempster(update).unwrap_or(*self),
            CombinationRule::Yager => self.yager(update),
        }
    }

    /// Discounting `γ ⊗ m`: scales committed mass by `gamma` and moves the rest
    /// to `unknown`.
    ///
    /// # Panics
    ///
    /// If `gamma` lies outside `[0, 1]`.
    pub fn discount(&self, gamma: T) -> Self {
        assert!(
            gamma >= T::zero() && gamma <= T::one(),
            "discount factor {gamma:?} outside [0, 1]"
        );
        Self::from_parts(
            gamma * self.free,
            gamma * self.occupied,
            T::one() - gamma + gamma * self.unknown,
        )
    }

    /// Lower limit on unknown mass (`m ⊞ floor`).
    ///
    /// Raises `m_u` to at least `floor` and shrinks the committed masses
    /// proportionally, preserving their ratio.
    pub fn limit_unknown(&self, floor: T) -> Self {
        if self.unknown >= floor {
            return *self;
        }
        let raise = floor - self.unknown;
        let committed = self.committed();
        debug_assert!(committed > T::zero(), "normalized mass with m_u < floor has committed mass");
        let keep = T::one() - raise / committed;
        Self::from_parts(keep * self.free, keep * self.occupied, self.unknown + raise)
    }

    /// Pignistic probability of `occupied`: `m_o + m_u / 2`.
    pub fn pignistic_occupancy(&self) -> T {
        let two = T::one() + T::one();
        (T::one() - self.free + self.occupied) / two
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<MassFunction<U>, EvidenceError> {
        MassFunction::new(f(self.free), f(self.occupied), f(self.unknown))
    }
}

impl<T: Scalar> Default for MassFunction<T> {
    fn default() -> Self {
        Self::vacuous()
    }
}

impl<T: fmt::Debug> fmt::Debug for MassFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}, {:?}]", self.free, self.occupied, self.unknown)
    }
}

/// Evidence counts for `free` and `occupied` in subjective-logic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubjectiveOpinion<T> {
    free: T,
    occupied: T,
}

impl<T: Scalar> SubjectiveOpinion<T> {
    pub fn new(free: T, occupied: T) -> Result<Self, EvidenceError> {
        for (name, value) in [("e_f", free), ("e_o", occupied)] {
            if !(value >= T::zero()) {
                return Err(EvidenceError::NegativeEvidence {
                    name,
                    value: value.to_f64_lossy(),
                });
            }
        }
        Ok(Self { free, occupied })
    }

    pub fn free(&self) -> T {
        self.free
    }

    pub fn occupied(&self) -> T {
        self.occupied
    }

    /// Dirichlet strength `S = 2 + e_f + e_o`.
    pub fn strength(&self) -> T {
        T::one() + T::one() + self.free + self.occupied
    }

    /// Dirichlet parameters `e + 1`.
    pub fn dirichlet_alpha(&self) -> (T, T) {
        (self.free + T::one(), self.occupied + T::one())
    }

    /// Expected class probabilities `(p_f, p_o)` of the Dirichlet.
    pub fn dirichlet_mean(&self) -> (T, T) {
        let s = self.strength();
        let (a_f, a_o) = self.dirichlet_alpha();
        (a_f / s, a_o / s)
    }

    /// Evidential view `[e_f / S, e_o / S, 2 / S]`.
    pub fn to_mass(&self) -> MassFunction<T> {
        let s = self.strength();
        let two = T::one() + T::one();
        MassFunction::from_parts(self.free / s, self.occupied / s, two / s)
    }
}

/// Per-class terms of the evidential training loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms<T> {
    pub free: T,
    pub occupied: T,
    pub unknown: T,
}

/// Loss between a predicted opinion and a target mass function.
///
/// `L_k = (m̂_k - p_k)² p_k (1 - p_k) / (S + 1)` for the two classes, with `p`
/// the Dirichlet mean, and `L_u = (1 - 2/S)²`.
pub fn evidential_loss<T: Real>(predicted: &SubjectiveOpinion<T>, target: &MassFunction<T>) -> LossTerms<T> {
    let s = predicted.strength();
    let (p_f, p_o) = predicted.dirichlet_mean();
    let one = T::one();
    let term = |target_mass: T, p: T| {
        let residual = target_mass - p;
        residual * residual * p * (one - p) / (s + one)
    };
    let predicted_unknown = (one + one) / s;
    LossTerms {
        free: term(target.free(), p_f),
        occupied: term(target.occupied(), p_o),
        unknown: (one - predicted_unknown) * (one - predicted_unknown),
    }
}
