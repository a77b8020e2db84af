use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::MassFunction;
use crate::grid::EvidenceGrid;
use crate::scalar::Scalar;

/// How the certainty bound inside the discount factor treats the conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaMode {
    /// `(m_u + K − floor) / (m_u (1 − m̃_u))`, with `K` taken as independent
    /// of the discount.
    Paper,
    /// `(m_u − floor) / (m_u (1 − m̃_u) − K)`: discounting scales the conflict
    /// too, and this bound keeps the fused unknown mass on the floor exactly.
    #[default]
    Exact,
}

impl std::str::FromStr for GammaMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(GammaMode::Paper),
            "exact" => Ok(GammaMode::Exact),
            other => Err(format!("unknown gamma mode {other:?} (expected paper or exact)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionParams {
    /// Least unknown mass a cell backed only by the deep ISM may have.
    pub unknown_floor: f64,
    /// Gain of the tanh term that grows the discount factor with new information.
    pub tanh_gain: f64,
    /// Number of radar scans the deep ISM sees per prediction.
    pub accumulation_window: usize,
    pub gamma_mode: GammaMode,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            unknown_floor: 0.3,
            tanh_gain: 10.0,
            accumulation_window: 10,
            gamma_mode: GammaMode::Exact,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        if !(self.unknown_floor > 0.0 && self.unknown_floor < 1.0) {
            return bad("unknown floor", "must lie in (0, 1)");
        }
        if !(self.tanh_gain > 0.0 && self.tanh_gain.is_finite()) {
            return bad("tanh gain", "must be positive");
        }
        if self.accumulation_window == 0 {
            return bad("accumulation window", "must be at least 1");
        }
        Ok(())
    }
}

/// Unknown mass the prediction would remove from the map cell; positive when
/// the prediction is the more informative of the two.
pub fn delta_unknown<T: Scalar>(map_cell: &MassFunction<T>, prediction: &MassFunction<T>) -> T {
    map_cell.unknown() - prediction.unknown()
}

/// Discount factor for a floor-limited prediction.
///
/// Zero whenever the prediction carries no less unknown mass than the map
/// cell; otherwise the smaller of the certainty bound (per `gamma_mode`) and
/// `tanh(α · Δm_u)`, clamped to `[0, 1]`.
pub fn compute_gamma<T: Scalar>(map_cell: &MassFunction<T>, limited: &MassFunction<T>, params: &FusionParams) -> T {
    let (zero, one) = (T::zero(), T::one());
    let map_u = map_cell.unknown();
    let pred_u = limited.unknown();
    if map_u <= pred_u {
        return zero;
    }
    let floor = T::lit(params.unknown_floor);
    let conflict = map_cell.conflict(limited);
    let growth = (T::lit(params.tanh_gain) * (map_u - pred_u)).tanh_approx();
    let spread = map_u * (one - pred_u);
    let bound = match params.gamma_mode {
        GammaMode::Paper if spread > zero => Some((map_u + conflict - floor) / spread),
        GammaMode::Paper => None,
        GammaMode::Exact if spread - conflict > zero => Some((map_u - floor) / (spread - conflict)),
        GammaMode::Exact => Some(one),
    };
    let gamma = bound.map_or(growth, |b| b.min_of(growth));
    gamma.max_of(zero).min_of(one)
}

/// Folds a raw deep-ISM prediction into a map cell: limit its certainty,
/// discount it by the redundancy-aware factor, then combine with Yager's rule.
pub fn integrate_prediction<T: Scalar>(map_cell: &MassFunction<T>, raw: &MassFunction<T>, params: &FusionParams) -> MassFunction<T> {
    let limited = raw.limit_unknown(T::lit(params.unknown_floor));
    let gamma = compute_gamma(map_cell, &limited, params);
    if gamma == T::zero() {
        return *map_cell;
    }
    map_cell.yager(&limited.discount(gamma))
}

/// [`integrate_prediction`] over a whole grid, in parallel.
pub fn integrate_grid<T: Scalar>(map: &mut EvidenceGrid<T>, prediction: &EvidenceGrid<T>, params: &FusionParams) -> Result<()> {
    map.zip_apply(prediction, |cell, pred| *cell = integrate_prediction(cell, pred, params))
}

/// Cell replacement: wherever the raw prediction is more certain than the
/// map, the map cell becomes the floor-limited prediction.
pub fn replace_grid<T: Scalar>(map: &mut EvidenceGrid<T>, prediction: &EvidenceGrid<T>, params: &FusionParams) -> Result<()> {
    let floor = T::lit(params.unknown_floor);
    map.zip_apply(prediction, |cell, pred| {
        if pred.unknown() < cell.unknown() {
            *cell = pred.limit_unknown(floor);
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn m(f: f64, o: f64, u: f64) -> MassFunction<f64> {
        MassFunction::new(f, o, u).unwrap()
    }

    fn params(floor: f64, mode: GammaMode) -> FusionParams {
        FusionParams {
            unknown_floor: floor,
            gamma_mode: mode,
            ..FusionParams::default()
        }
    }

    #[test]
    fn delta_unknown_examples() {
        let vac = MassFunction::<f64>::vacuous();
        assert_eq!(delta_unknown(&vac, &vac), 0.0);
        assert!((delta_unknown(&vac, &m(0.5, 0.2, 0.3)) - 0.7).abs() < 1e-15);
        assert!((delta_unknown(&m(0.5, 0.2, 0.3), &vac) + 0.7).abs() < 1e-15);
    }

    #[test]
    fn gamma_examples() {
        let vac = MassFunction::<f64>::vacuous();
        assert_eq!(compute_gamma(&vac, &vac, &FusionParams::default()), 0.0);

        let map = m(0.3, 0.2, 0.5);
        let pred = m(0.5, 0.3, 0.2);
        let p = params(0.1, GammaMode::Exact);
        let gamma = compute_gamma(&map, &pred, &p);
        assert!((gamma - 3.0f64.tanh()).abs() < 1e-12);
        assert!((gamma - 0.995_054_75).abs() < 1e-8);
        let fused = map.yager(&pred.discount(gamma));
        assert!((fused.unknown() - 0.291_038_5).abs() < 1e-7, "{fused:?}");

        let map = m(0.05, 0.05, 0.9);
        let pred = m(0.5444, 0.1556, 0.3);
        let gamma = compute_gamma(&map, &pred, &params(0.3, GammaMode::Exact));
        assert!((gamma - 6.0f64.tanh()).abs() < 1e-12);
        let fused = map.yager(&pred.discount(gamma));
        assert!((fused.unknown() - 0.305).abs() < 1e-3 && fused.unknown() >= 0.3);
    }

    #[test]
    fn exact_bound_binds_near_the_floor() {
        let map = m(0.5, 0.1, 0.4);
        let pred = m(0.7, 0.0, 0.3);
        let p = params(0.3, GammaMode::Exact);
        let gamma = compute_gamma(&map, &pred, &p);
        assert!(gamma < 1.0f64.tanh());
        let conflict = map.conflict(&pred);
        assert!((gamma - 0.1 / (0.4 * 0.7 - conflict)).abs() < 1e-12);
        assert!((integrate_prediction(&map, &pred, &p).unknown() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn integrate_examples() {
        let p = FusionParams::default();
        let vac = MassFunction::<f64>::vacuous();
        assert_eq!(integrate_prediction(&vac, &vac, &p), vac);
        let verified = m(0.8, 0.1, 0.1);
        for pred in [m(0.0, 1.0, 0.0), m(0.9, 0.0, 0.1), vac, m(0.2, 0.2, 0.6)] {
            assert_eq!(integrate_prediction(&verified, &pred, &p), verified);
        }
    }

    #[test]
    fn repeated_prediction_reaches_a_fixed_point_above_the_floor() {
        let p = FusionParams::default();
        let pred = m(0.6, 0.2, 0.2);
        let mut cell = MassFunction::<f64>::vacuous();
        for _ in 0..1000 {
            let next = integrate_prediction(&cell, &pred, &p);
            assert!(next.unknown() >= 0.3 - 1e-9);
            cell = next;
        }
        let again = integrate_prediction(&cell, &pred, &p);
        assert!((again.free() - cell.free()).abs() < 1e-12 && (again.unknown() - cell.unknown()).abs() < 1e-12);
        // Regression value of the fixed point.
        assert!((cell.unknown() - 0.3).abs() < 1e-9, "{cell:?}");
        assert!((cell.free() - 0.525_002_037).abs() < 1e-8 && (cell.occupied() - 0.174_997_963).abs() < 1e-8, "{cell:?}");
    }

    #[test]
    fn exact_rationals_never_cross_the_floor() {
        let r = |n: i128, d: i128| Rational::new(n, d);
        let p = params(0.3, GammaMode::Exact);
        let map = MassFunction::new(r(1, 10), r(3, 10), r(3, 5)).unwrap();
        let pred = MassFunction::new(r(4, 5), r(0, 1), r(1, 5)).unwrap();
        let fused = integrate_prediction(&map, &pred, &p);
        assert!(fused.unknown() >= r(3, 10), "{fused:?}");
        assert_eq!(fused.free() + fused.occupied() + fused.unknown(), r(1, 1));
    }

    #[test]
    fn replacement_limits_more_certain_predictions() {
        let geometry = crate::grid::GridGeometry::centered(2, 1.0);
        let mut map = EvidenceGrid::from_cells(geometry, "map", vec![m(0.1, 0.0, 0.9), m(0.7, 0.0, 0.3), m(0.0, 0.0, 1.0), m(0.5, 0.4, 0.1)]).unwrap();
        let pred = EvidenceGrid::from_cells(geometry, "pred", vec![m(0.8, 0.0, 0.2), m(0.1, 0.0, 0.9), MassFunction::vacuous(), m(0.0, 0.95, 0.05)]).unwrap();
        replace_grid(&mut map, &pred, &FusionParams::default()).unwrap();
        assert!((map.cells()[0].unknown() - 0.3).abs() < 1e-12 && (map.cells()[0].free() - 0.7).abs() < 1e-12);
        assert_eq!(map.cells()[1], m(0.7, 0.0, 0.3));
        assert!(map.cells()[2].is_vacuous());
        assert!((map.cells()[3].unknown() - 0.3).abs() < 1e-12);
    }

    fn mass() -> impl Strategy<Value = MassFunction<f64>> {
        (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| {
            let f = a;
            let o = (1.0 - f) * b;
            MassFunction::new(f, o, (1.0 - f - o).max(0.0)).unwrap()
        })
    }

    proptest! {
        #[test]
        fn zero_new_information_is_identity(map in mass(), pred in mass()) {
            let p = FusionParams::default();
            if pred.limit_unknown(0.3).unknown() >= map.unknown() {
                prop_assert_eq!(integrate_prediction(&map, &pred, &p), map);
            }
        }

        #[test]
        fn gamma_stays_in_the_unit_interval(map in mass(), pred in mass(), independent in any::<bool>()) {
            let mode = if independent { GammaMode::Paper } else { GammaMode::Exact };
            let g = compute_gamma(&map, &pred.limit_unknown(0.3), &params(0.3, mode));
            prop_assert!((0.0..=1.0).contains(&g));
        }
    }
}
