//! Potentials, physical constants, energy grids and support-range detection.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, ScatterError};
use crate::numerics::CubicSpline;

/// hbar and particle mass; both default to 1 (the model problem's units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicsConstants {
    fn default() -> Self {
        PhysicsConstants { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicsConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if hbar > 0.0 && mass > 0.0 {
            Ok(PhysicsConstants { hbar, mass })
        } else {
            Err(ScatterError::InvalidConstants { hbar, mass })
        }
    }

    /// K = sqrt(2 m E) / hbar for E > 0.
    pub fn wavenumber(&self, energy: f64) -> Result<f64> {
        if energy > 0.0 {
            Ok((2.0 * self.mass * energy).sqrt() / self.hbar)
        } else {
            Err(ScatterError::InvalidEnergy(energy))
        }
    }

    pub fn energy_of(&self, k: f64) -> f64 {
        self.hbar * self.hbar * k * k / (2.0 * self.mass)
    }
}

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A finite-range potential: an evaluator plus its declared support
/// half-width `a`, so that |V(x)| is negligible for |x| >= a.
///
/// Potentials are immutable and cheap to clone; solvers sample the evaluator
/// on whatever grid they need.
#[derive(Clone)]
pub struct Potential {
    tag: String,
    half_range: f64,
    eval: EvalFn,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("tag", &self.tag)
            .field("half_range", &self.half_range)
            .finish()
    }
}

impl Potential {
    pub fn new(
        tag: impl Into<String>,
        half_range: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Potential {
            tag: tag.into(),
            half_range,
            eval: Arc::new(eval),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Same shape scaled by `factor`; the support half-width is unchanged.
    pub fn scaled(&self, factor: f64) -> Potential {
        let inner = Arc::clone(&self.eval);
        Potential {
            tag: format!("{}*{}", factor, self.tag),
            half_range: self.half_range,
            eval: Arc::new(move |x| factor * inner(x)),
        }
    }
}

/// Parameters for the support-range grid search.
#[derive(Debug, Clone, Copy)]
pub struct RangeSearch {
    /// |V(x)| must stay below this for all sampled |x| >= a.
    pub threshold: f64,
    /// Sampling step of the outward scan.
    pub step: f64,
    /// Give up beyond this radius.
    pub max_radius: f64,
}

impl Default for RangeSearch {
    fn default() -> Self {
        // 1e-12 sits below the finite-difference discretization error at
        // every grid used by the solvers
        RangeSearch {
            threshold: 1e-12,
            step: 0.01,
            max_radius: 100.0,
        }
    }
}

/// Smallest sampled half-range a with |V(x)| < threshold for all |x| >= a.
pub fn detect_range<F: Fn(f64) -> f64>(eval: F, search: &RangeSearch) -> Result<f64> {
    assert!(search.threshold > 0.0 && search.step > 0.0);
    let n = (search.max_radius / search.step).ceil() as usize;
    let mut last_bad: Option<usize> = None;
    for i in 0..=n {
        let x = i as f64 * search.step;
        if eval(x).abs() >= search.threshold || eval(-x).abs() >= search.threshold {
            last_bad = Some(i);
        }
    }
    match last_bad {
        None => Ok(0.0),
        Some(i) if (i + 1) as f64 * search.step <= search.max_radius => {
            Ok((i + 1) as f64 * search.step)
        }
        _ => Err(ScatterError::RangeNotFound {
            bound: search.max_radius,
            threshold: search.threshold,
        }),
    }
}

/// The model potential (0.5 x^2 - 0.8) e^{-0.1 x^2}: a well flanked by two
/// barriers, supporting one bound state and a sequence of resonances.
pub fn jolanta_potential() -> Potential {
    let f = |x: f64| (0.5 * x * x - 0.8) * (-0.1 * x * x).exp();
    let a = detect_range(f, &RangeSearch::default())
        .expect("analytic Gaussian envelope always decays under the default bound");
    Potential::new("jolanta", a, f)
}

/// V = 0 everywhere, with a declared half-range for box-based solvers.
pub fn zero_potential(half_range: f64) -> Potential {
    Potential::new("zero", half_range, |_| 0.0)
}

/// Hard-truncated rectangular barrier of the given height on [-w, +w].
/// Grid points landing exactly on the jump sample it at half height, which
/// keeps finite-difference solvers second-order accurate there.
pub fn square_barrier(height: f64, half_width: f64) -> Potential {
    Potential::new("square-barrier", half_width, move |x| {
        if x.abs() < half_width {
            height
        } else if x.abs() == half_width {
            0.5 * height
        } else {
            0.0
        }
    })
}

/// A left-right asymmetric double bump; T is direction independent on it
/// while R is not.
pub fn asymmetric_bumps() -> Potential {
    let f = |x: f64| {
        1.1 * (-((x - 0.8) / 0.6).powi(2)).exp() - 0.5 * (-((x + 1.3) / 0.9).powi(2)).exp()
    };
    let a = detect_range(f, &RangeSearch::default()).expect("gaussian bumps decay");
    Potential::new("asymmetric-bumps", a, f)
}

/// Potential from (x, V) samples: natural cubic spline inside the table,
/// exactly zero outside it.
pub fn tabulated_potential(samples: &[(f64, f64)]) -> Result<Potential> {
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let vs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let spline = CubicSpline::new(xs, vs)?;
    let (lo, hi) = spline.domain();
    let half_range = lo.abs().max(hi.abs());
    Ok(Potential::new("tabulated", half_range, move |x| {
        if x < lo || x > hi {
            0.0
        } else {
            spline.eval(x)
        }
    }))
}

/// Strictly increasing positive energies, shared by scans and comparisons.
#[derive(Debug, Clone)]
pub struct EnergyGrid {
    energies: Vec<f64>,
}

impl EnergyGrid {
    pub fn from_values(energies: Vec<f64>) -> Result<Self> {
        let ok = !energies.is_empty()
            && energies[0] > 0.0
            && energies.windows(2).all(|w| w[1] > w[0]);
        if ok {
            Ok(EnergyGrid { energies })
        } else {
            Err(ScatterError::InvalidEnergyGrid)
        }
    }

    /// n energies evenly spaced over [emin, emax] inclusive.
    pub fn linspace(emin: f64, emax: f64, n: usize) -> Result<Self> {
        if n < 2 || emin <= 0.0 || emax <= emin {
            return Err(ScatterError::InvalidEnergyGrid);
        }
        let step = (emax - emin) / (n - 1) as f64;
        Self::from_values((0..n).map(|i| emin + i as f64 * step).collect())
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn wavenumbers(&self, constants: &PhysicsConstants) -> Vec<f64> {
        self.energies
            .iter()
            .map(|&e| (2.0 * constants.mass * e).sqrt() / constants.hbar)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn jolanta_value_at_origin() {
        let v = jolanta_potential();
        assert_abs_diff_eq!(v.value(0.0), -0.8, epsilon = 1e-15);
    }

    #[test]
    fn jolanta_range_within_expected_bracket() {
        let v = jolanta_potential();
        assert!(v.half_range() >= 12.0 && v.half_range() <= 25.0, "a = {}", v.half_range());
    }

    #[test]
    fn jolanta_decays_beyond_declared_range() {
        let v = jolanta_potential();
        let a = v.half_range();
        let worst = (0..1000)
            .map(|i| {
                let x = a + (a / 1000.0) * i as f64;
                v.value(x).abs().max(v.value(-x).abs())
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "tail magnitude {worst}");
    }

    #[test]
    fn detect_range_zero_potential() {
        let a = detect_range(|_| 0.0, &RangeSearch::default()).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn detect_range_square_barrier_exact_support() {
        let v = square_barrier(1.0, 1.0);
        let a = detect_range(|x| v.value(x), &RangeSearch::default()).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 0.011);
    }

    #[test]
    fn detect_range_rejects_long_range() {
        let err = detect_range(|x| 1.0 / (1.0 + x * x), &RangeSearch::default()).unwrap_err();
        assert!(matches!(err, ScatterError::RangeNotFound { .. }));
    }

    #[test]
    fn scaled_potential_scales_pointwise() {
        let v = jolanta_potential().scaled(0.01);
        assert_abs_diff_eq!(v.value(0.0), -0.008, epsilon = 1e-15);
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_outside() {
        let samples: Vec<(f64, f64)> = (0..41)
            .map(|i| {
                let x = -2.0 + 0.1 * i as f64;
                (x, (1.0 - x * x).max(0.0))
            })
            .collect();
        let v = tabulated_potential(&samples).unwrap();
        assert_abs_diff_eq!(v.value(0.0), 1.0, epsilon = 1e-12);
        assert_eq!(v.value(5.0), 0.0);
        assert_eq!(v.value(-2.5), 0.0);
        assert_abs_diff_eq!(v.value(0.55), 1.0 - 0.55 * 0.55, epsilon = 1e-3);
    }

    #[test]
    fn energy_grid_validation() {
        assert!(EnergyGrid::from_values(vec![0.5, 0.4]).is_err());
        assert!(EnergyGrid::from_values(vec![-0.1, 0.4]).is_err());
        assert!(EnergyGrid::linspace(0.1, 2.0, 1).is_err());
        let g = EnergyGrid::linspace(0.1, 2.0, 39).unwrap();
        assert_eq!(g.len(), 39);
        assert_abs_diff_eq!(g.energies()[38], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn wavenumber_matches_dispersion() {
        let c = PhysicsConstants::default();
        assert_abs_diff_eq!(c.wavenumber(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert!(c.wavenumber(-1.0).is_err());
        assert_abs_diff_eq!(c.energy_of(1.0), 0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn jolanta_is_even(x in -30.0f64..30.0) {
            let v = jolanta_potential();
            prop_assert!((v.value(x) - v.value(-x)).abs() <= 1e-15);
        }
    }
}
