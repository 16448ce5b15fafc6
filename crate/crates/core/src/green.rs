//! Free and full retarded Green functions, the on-shell T-matrix bridge,
//! and the weak-coupling Born check.

use num_complex::Complex64;

use crate::error::{Result, ScatterError};
use crate::fdsolver::{Incidence, ScatteringSolution};
use crate::model::{PhysicsConstants, Potential};

/// Boundary-condition branch of a Green function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Retarded,
    Advanced,
}

/// Free Green function (-+i) m/(hbar^2 K) e^{+-iK|x-y|}.
pub fn free_green(
    constants: &PhysicsConstants,
    energy: f64,
    x: f64,
    y: f64,
    branch: Branch,
) -> Result<Complex64> {
    let k = constants.wavenumber(energy)?;
    let amp = constants.mass / (constants.hbar * constants.hbar * k);
    let phase = k * (x - y).abs();
    Ok(match branch {
        Branch::Retarded => -Complex64::i() * amp * Complex64::from_polar(1.0, phase),
        Branch::Advanced => Complex64::i() * amp * Complex64::from_polar(1.0, -phase),
    })
}

fn check_pair(plus: &ScatteringSolution, minus: &ScatteringSolution) -> Result<()> {
    if plus.incidence != Incidence::Rightward || minus.incidence != Incidence::Leftward {
        return Err(ScatterError::GridMismatch);
    }
    if (plus.energy - minus.energy).abs() > 1e-12 * plus.energy {
        return Err(ScatterError::GridMismatch);
    }
    if plus.transmission.norm() < 1e-14 {
        // the Wronskian argument forbids T = 0; reaching this means the
        // solver state is inconsistent
        return Err(ScatterError::InternalInconsistency(
            "transmission coefficient vanished".into(),
        ));
    }
    Ok(())
}

/// Full retarded Green function from the two stationary solutions at one
/// energy: G(x, y) = -(2 pi i / T) psi_-(min) psi_+(max) with the
/// energy-normalized wavefunctions.
pub fn full_green_retarded(
    plus: &ScatteringSolution,
    minus: &ScatteringSolution,
    x: f64,
    y: f64,
) -> Result<Complex64> {
    check_pair(plus, minus)?;
    let pref = -2.0 * std::f64::consts::PI * Complex64::i() / plus.transmission;
    let value = if x >= y {
        pref * minus.psi_at(y)? * plus.psi_at(x)?
    } else {
        pref * plus.psi_at(y)? * minus.psi_at(x)?
    };
    Ok(value)
}

/// Both sides of the endpoint identity
/// G(-a, +a) = (-i) m/(hbar^2 K) T e^{+2iKa}: the left from the
/// wavefunction product, the right from the closed form.
pub fn green_endpoint_identity(
    plus: &ScatteringSolution,
    minus: &ScatteringSolution,
) -> Result<(Complex64, Complex64)> {
    check_pair(plus, minus)?;
    let a = plus.support;
    let lhs = full_green_retarded(plus, minus, -a, a)?;
    let c = &plus.constants;
    let k = plus.wavenumber;
    let rhs = -Complex64::i() * c.mass / (c.hbar * c.hbar * k)
        * plus.transmission
        * Complex64::from_polar(1.0, 2.0 * k * a);
    Ok((lhs, rhs))
}

/// On-shell T-matrix element T_{(E eta)(E +1)}: quadrature of the
/// energy-normalized plane-wave bra against V psi+ over the support.
///
/// For eta = +1 this equals (i/2pi)(T - 1); for eta = -1 it equals
/// (i/2pi) R.
pub fn onshell_t_matrix(
    potential: &Potential,
    solution: &ScatteringSolution,
    outgoing: Incidence,
) -> Result<Complex64> {
    if solution.incidence != Incidence::Rightward {
        return Err(ScatterError::GridMismatch);
    }
    let psi = solution
        .psi_tilde()
        .ok_or(ScatterError::MissingWavefunction)?;
    let k = solution.wavenumber;
    let eta = outgoing.eta();
    let a = solution.support;
    let dx = solution.grid.dx;
    let c = &solution.constants;

    // trapezoid over the grid points inside the support
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev: Option<Complex64> = None;
    for i in 0..solution.grid.len {
        let x = solution.grid.x(i);
        if x.abs() > a {
            prev = None;
            continue;
        }
        let f = Complex64::from_polar(1.0, -eta * k * x) * potential.value(x) * psi[i];
        if let Some(p) = prev {
            sum += 0.5 * (p + f) * dx;
        }
        prev = Some(f);
    }
    let norm = c.mass / (2.0 * std::f64::consts::PI * c.hbar * c.hbar * k);
    Ok(norm * sum)
}

/// Born order for the perturbative transmission estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BornOrder {
    First,
    Second,
}

impl BornOrder {
    pub fn from_u32(order: u32) -> Result<Self> {
        match order {
            1 => Ok(BornOrder::First),
            2 => Ok(BornOrder::Second),
            n => Err(ScatterError::UnsupportedBornOrder(n)),
        }
    }
}

const BORN_GRID_POINTS: usize = 4001;

/// Transmission from the Born expansion of the scattering state through the
/// given order, mapped via T = 1 - 2 pi i T_matel.
pub fn born_transmission(
    potential: &Potential,
    constants: &PhysicsConstants,
    energy: f64,
    order: BornOrder,
) -> Result<Complex64> {
    let k = constants.wavenumber(energy)?;
    let a = potential.half_range();
    let n = BORN_GRID_POINTS;
    let dx = 2.0 * a / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -a + i as f64 * dx).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| potential.value(x)).collect();
    let mut w = vec![dx; n];
    w[0] = 0.5 * dx;
    w[n - 1] = 0.5 * dx;

    // Born iterate of the unit-incoming wavefunction on the grid
    let free: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::from_polar(1.0, k * x))
        .collect();
    let psi = match order {
        BornOrder::First => free.clone(),
        BornOrder::Second => {
            let kernel_amp =
                -Complex64::i() * constants.mass / (constants.hbar * constants.hbar * k);
            let mut iter = free.clone();
            for (i, out) in iter.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let g0 = kernel_amp * Complex64::from_polar(1.0, k * (xs[i] - xs[j]).abs());
                    acc += w[j] * g0 * vs[j] * free[j];
                }
                *out += acc;
            }
            iter
        }
    };

    let mut matel = Complex64::new(0.0, 0.0);
    for i in 0..n {
        matel += w[i] * Complex64::from_polar(1.0, -k * xs[i]) * vs[i] * psi[i];
    }
    matel *= constants.mass / (2.0 * std::f64::consts::PI * constants.hbar * constants.hbar * k);
    Ok(Complex64::new(1.0, 0.0) - 2.0 * std::f64::consts::PI * Complex64::i() * matel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdsolver::{solve_left_incident, solve_right_incident, SolverParams};
    use crate::model::{jolanta_potential, zero_potential};
    use approx::assert_abs_diff_eq;

    fn constants() -> PhysicsConstants {
        PhysicsConstants::default()
    }

    // small deterministic LCG for reproducible sample points
    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn free_green_diagonal_values() {
        let c = constants();
        // K = 1 at E = 0.5
        let g = free_green(&c, 0.5, 0.3, 0.3, Branch::Retarded).unwrap();
        assert!((g - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        let g = free_green(&c, 0.5, 0.3, 0.3, Branch::Advanced).unwrap();
        assert!((g - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn free_green_symmetry_and_conjugation() {
        let c = constants();
        let mut seed = 0x5eed;
        for _ in 0..100 {
            let x = 10.0 * (lcg(&mut seed) - 0.5);
            let y = 10.0 * (lcg(&mut seed) - 0.5);
            let e = 0.1 + 3.0 * lcg(&mut seed);
            let gr = free_green(&c, e, x, y, Branch::Retarded).unwrap();
            let gr_swapped = free_green(&c, e, y, x, Branch::Retarded).unwrap();
            let ga = free_green(&c, e, x, y, Branch::Advanced).unwrap();
            assert!((gr - gr_swapped).norm() < 1e-14);
            assert!((ga - gr.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn free_green_solves_the_inhomogeneous_ode() {
        let c = constants();
        let e = 0.5;
        let k = 1.0;
        let y = 0.2;
        let h = 1e-3;
        // away from x = y the homogeneous equation holds
        for &x in &[-1.0, 1.5, 3.0] {
            let gm = free_green(&c, e, x - h, y, Branch::Retarded).unwrap();
            let g0 = free_green(&c, e, x, y, Branch::Retarded).unwrap();
            let gp = free_green(&c, e, x + h, y, Branch::Retarded).unwrap();
            let resid = ((gp - 2.0 * g0 + gm) / (h * h) + k * k * g0).norm();
            assert!(resid <= 10.0 * h * h, "ODE residual {resid}");
        }
        // derivative jump across x = y equals 2m/hbar^2
        let dplus = (free_green(&c, e, y + 2.0 * h, y, Branch::Retarded).unwrap()
            - free_green(&c, e, y + h, y, Branch::Retarded).unwrap())
            / h;
        let dminus = (free_green(&c, e, y - h, y, Branch::Retarded).unwrap()
            - free_green(&c, e, y - 2.0 * h, y, Branch::Retarded).unwrap())
            / h;
        let jump = (dplus - dminus).re;
        assert!((jump - 2.0).abs() / 2.0 <= 0.05, "jump {jump}");
    }

    fn jolanta_pair(e: f64) -> (ScatteringSolution, ScatteringSolution) {
        let v = jolanta_potential();
        let c = constants();
        let p = solve_right_incident(&v, &c, e, &SolverParams::default()).unwrap();
        let m = solve_left_incident(&v, &c, e, &SolverParams::default()).unwrap();
        (p, m)
    }

    #[test]
    fn full_green_reduces_to_free_for_zero_potential() {
        let v = zero_potential(1.0);
        let c = constants();
        let e = 0.5;
        let p = solve_right_incident(&v, &c, e, &SolverParams::default()).unwrap();
        let m = solve_left_incident(&v, &c, e, &SolverParams::default()).unwrap();
        let g = full_green_retarded(&p, &m, 0.0, 0.0).unwrap();
        assert!((g - Complex64::new(0.0, -1.0)).norm() < 1e-5, "G(0,0) = {g}");
    }

    #[test]
    fn full_green_is_continuous_with_the_right_derivative_jump() {
        let (p, m) = jolanta_pair(0.5);
        let y = 0.37;
        let h = 1e-3;
        let right = full_green_retarded(&p, &m, y + 1e-6, y).unwrap();
        let left = full_green_retarded(&p, &m, y - 1e-6, y).unwrap();
        assert!((right - left).norm() < 1e-5, "continuity gap {}", (right - left).norm());
        let dplus = (full_green_retarded(&p, &m, y + 2.0 * h, y).unwrap()
            - full_green_retarded(&p, &m, y + h, y).unwrap())
            / h;
        let dminus = (full_green_retarded(&p, &m, y - h, y).unwrap()
            - full_green_retarded(&p, &m, y - 2.0 * h, y).unwrap())
            / h;
        let jump = (dplus - dminus).re;
        assert!((jump - 2.0).abs() / 2.0 <= 0.05, "jump {jump}");
    }

    #[test]
    fn full_green_is_symmetric_in_its_arguments() {
        let (p, m) = jolanta_pair(0.8);
        let mut seed = 0xfeed;
        let a = p.support;
        for _ in 0..100 {
            let x = 2.0 * a * (lcg(&mut seed) - 0.5);
            let y = 2.0 * a * (lcg(&mut seed) - 0.5);
            let g = full_green_retarded(&p, &m, x, y).unwrap();
            let gs = full_green_retarded(&p, &m, y, x).unwrap();
            assert!((g - gs).norm() <= 1e-8 * g.norm().max(1.0), "asymmetry at ({x}, {y})");
        }
    }

    #[test]
    fn endpoint_identity_holds_on_and_off_resonance() {
        for &e in &[0.5, 0.621] {
            let (p, m) = jolanta_pair(e);
            let (lhs, rhs) = green_endpoint_identity(&p, &m).unwrap();
            let rel = (lhs - rhs).norm() / rhs.norm();
            assert!(rel <= 1e-5, "relative gap {rel} at E={e}");
        }
    }

    #[test]
    fn endpoint_identity_for_free_particle() {
        let v = zero_potential(1.0);
        let c = constants();
        let p = solve_right_incident(&v, &c, 0.5, &SolverParams::default()).unwrap();
        let m = solve_left_incident(&v, &c, 0.5, &SolverParams::default()).unwrap();
        let (lhs, rhs) = green_endpoint_identity(&p, &m).unwrap();
        let expect = -Complex64::i() * Complex64::from_polar(1.0, 2.0);
        // both sides share the O(dx^2) phase drift of T; their gap stays small
        assert!((rhs - expect).norm() < 1e-5);
        assert!((lhs - rhs).norm() / rhs.norm() < 1e-5);
    }

    #[test]
    fn onshell_elements_match_t_and_r() {
        let v = jolanta_potential();
        let (p, _) = jolanta_pair(0.5);
        let two_pi = 2.0 * std::f64::consts::PI;
        let same = onshell_t_matrix(&v, &p, Incidence::Rightward).unwrap();
        let expect_same = Complex64::i() / two_pi * (p.transmission - 1.0);
        assert!((same - expect_same).norm() <= 1e-5, "diagonal gap {}", (same - expect_same).norm());
        let flip = onshell_t_matrix(&v, &p, Incidence::Leftward).unwrap();
        let expect_flip = Complex64::i() / two_pi * p.reflection;
        assert!((flip - expect_flip).norm() <= 1e-5, "off-diagonal gap {}", (flip - expect_flip).norm());
    }

    #[test]
    fn onshell_vanishes_for_zero_potential() {
        let v = zero_potential(1.0);
        let c = constants();
        let p = solve_right_incident(&v, &c, 0.5, &SolverParams::default()).unwrap();
        let t = onshell_t_matrix(&v, &p, Incidence::Rightward).unwrap();
        assert_abs_diff_eq!(t.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn born_series_for_weak_coupling() {
        let v = jolanta_potential().scaled(0.01);
        let c = constants();
        let e = 1.0;
        let exact = solve_right_incident(&v, &c, e, &SolverParams::default())
            .unwrap()
            .transmission;
        let t1 = born_transmission(&v, &c, e, BornOrder::First).unwrap();
        let t2 = born_transmission(&v, &c, e, BornOrder::Second).unwrap();
        let scale = (exact - Complex64::new(1.0, 0.0)).norm();
        assert!((t1 - exact).norm() <= 0.05 * scale, "first order ratio {}", (t1 - exact).norm() / scale);
        assert!((t2 - exact).norm() < (t1 - exact).norm(), "second order must improve");
    }

    #[test]
    fn born_is_exact_for_zero_potential() {
        let v = zero_potential(1.0);
        let c = constants();
        let t = born_transmission(&v, &c, 0.7, BornOrder::First).unwrap();
        assert!((t - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn born_rejects_higher_orders() {
        assert!(matches!(
            BornOrder::from_u32(3),
            Err(ScatterError::UnsupportedBornOrder(3))
        ));
    }
}
