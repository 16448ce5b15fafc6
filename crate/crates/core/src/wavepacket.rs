//! Spectral time evolution of incoming packets and the stationary-phase
//! closed forms for the incoming, transmitted and reflected branches.
//!
//! A packet is a complex momentum amplitude F(k) on a positive-momentum
//! quadrature grid, normalized so 2 pi sum w |F|^2 = 1. Time evolution is an
//! expansion over the stationary scattering states at the node momenta; no
//! grid stepping and no absorbing boundaries are involved.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, ScatterError};
use crate::fdsolver::{solve_right_incident, ScanPoint, ScatteringSolution, SolverParams};
use crate::model::{PhysicsConstants, Potential};
use crate::numerics::{CubicSpline, GaussLegendre};

/// Momentum-space amplitude on a Gauss-Legendre grid over
/// [k0 - 6 sigma, k0 + 6 sigma].
#[derive(Debug, Clone)]
pub struct SpectralWavepacket {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    amplitudes: Vec<Complex64>,
    pub k0: f64,
    pub sigma_k: f64,
    /// Spatial center of the packet at t = 0 (a linear phase on F).
    pub center: f64,
    norm_const: f64,
}

/// Gaussian packet centered at x = 0.
pub fn gaussian_packet(k0: f64, sigma_k: f64, n_nodes: usize) -> Result<SpectralWavepacket> {
    gaussian_packet_centered(k0, sigma_k, n_nodes, 0.0)
}

/// Gaussian packet with momentum width sigma_k whose envelope sits at `x0`
/// at t = 0. |F(k)|^2 is a Gaussian of standard deviation sigma_k.
pub fn gaussian_packet_centered(
    k0: f64,
    sigma_k: f64,
    n_nodes: usize,
    x0: f64,
) -> Result<SpectralWavepacket> {
    assert!(n_nodes >= 2 && sigma_k > 0.0);
    if k0 - 6.0 * sigma_k <= 0.0 {
        return Err(ScatterError::SupportTouchesZero {
            k0,
            sigma: sigma_k,
        });
    }
    let rule = GaussLegendre::new(n_nodes);
    let (nodes, weights) = rule.scaled(k0 - 6.0 * sigma_k, k0 + 6.0 * sigma_k);
    let raw: Vec<f64> = nodes
        .iter()
        .map(|&k| (-(k - k0).powi(2) / (4.0 * sigma_k * sigma_k)).exp())
        .collect();
    let norm2: f64 = 2.0
        * std::f64::consts::PI
        * weights
            .iter()
            .zip(&raw)
            .map(|(w, f)| w * f * f)
            .sum::<f64>();
    let norm_const = 1.0 / norm2.sqrt();
    let amplitudes = nodes
        .iter()
        .zip(&raw)
        .map(|(&k, &f)| norm_const * f * Complex64::from_polar(1.0, -k * x0))
        .collect();
    Ok(SpectralWavepacket {
        nodes,
        weights,
        amplitudes,
        k0,
        sigma_k,
        center: x0,
        norm_const,
    })
}

impl SpectralWavepacket {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// 2 pi sum w |F|^2; equals 1 by construction.
    pub fn norm(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self
                .weights
                .iter()
                .zip(&self.amplitudes)
                .map(|(w, f)| w * f.norm_sqr())
                .sum::<f64>()
    }

    /// 2 pi sum w k |F|^2.
    pub fn mean_momentum(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self
                .weights
                .iter()
                .zip(&self.amplitudes)
                .zip(&self.nodes)
                .map(|((w, f), k)| w * k * f.norm_sqr())
                .sum::<f64>()
    }

    /// Momentum support [k0 - 6 sigma, k0 + 6 sigma].
    pub fn support(&self) -> (f64, f64) {
        (self.k0 - 6.0 * self.sigma_k, self.k0 + 6.0 * self.sigma_k)
    }

    /// The analytic amplitude at any momentum inside the support; zero
    /// outside it.
    pub fn amplitude_at(&self, k: f64) -> Complex64 {
        let (lo, hi) = self.support();
        if k < lo || k > hi {
            return Complex64::new(0.0, 0.0);
        }
        let f = self.norm_const * (-(k - self.k0).powi(2) / (4.0 * self.sigma_k * self.sigma_k)).exp();
        f * Complex64::from_polar(1.0, -k * self.center)
    }
}

/// Stationary scattering states precomputed at the packet's momentum nodes.
#[derive(Debug, Clone)]
pub struct StationaryStates {
    solutions: Vec<ScatteringSolution>,
    ks: Vec<f64>,
}

/// One rightward-incident solve per node, fanned out over the rayon pool.
pub fn stationary_states(
    potential: &Potential,
    constants: &PhysicsConstants,
    packet: &SpectralWavepacket,
    params: &SolverParams,
) -> Result<StationaryStates> {
    let solutions: Vec<ScatteringSolution> = packet
        .nodes()
        .par_iter()
        .map(|&k| {
            let e = constants.energy_of(k);
            solve_right_incident(potential, constants, e, params)
                .map_err(|err| ScatterError::at_energy(e, err))
        })
        .collect::<Result<_>>()?;
    Ok(StationaryStates {
        solutions,
        ks: packet.nodes().to_vec(),
    })
}

impl StationaryStates {
    pub fn solutions(&self) -> &[ScatteringSolution] {
        &self.solutions
    }

    pub fn momenta(&self) -> &[f64] {
        &self.ks
    }

    fn check_match(&self, packet: &SpectralWavepacket) -> Result<()> {
        if self.ks.len() != packet.nodes().len()
            || self
                .ks
                .iter()
                .zip(packet.nodes())
                .any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(ScatterError::NodeMismatch);
        }
        Ok(())
    }
}

/// psi(t, x) on the given positions: the quadrature sum
/// sum_j w_j F_j e^{-i E_j t / hbar} psi-tilde_{k_j}(x).
pub fn propagate(
    packet: &SpectralWavepacket,
    states: &StationaryStates,
    t: f64,
    xs: &[f64],
) -> Result<Vec<Complex64>> {
    states.check_match(packet)?;
    let c = states.solutions[0].constants;
    let phases: Vec<Complex64> = states
        .ks
        .iter()
        .zip(packet.weights())
        .zip(packet.amplitudes())
        .map(|((&k, &w), f)| {
            let e = c.energy_of(k);
            w * f * Complex64::from_polar(1.0, -e * t / c.hbar)
        })
        .collect();
    xs.par_iter()
        .map(|&x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (sol, coeff) in states.solutions.iter().zip(&phases) {
                acc += coeff * sol.psi_tilde_at(x)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Transmitted and reflected populations: 2 pi sum w |F|^2 |T|^2 and the
/// same with |R|^2.
pub fn branch_populations(
    packet: &SpectralWavepacket,
    states: &StationaryStates,
) -> Result<(f64, f64)> {
    states.check_match(packet)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut p_trans = 0.0;
    let mut p_refl = 0.0;
    for ((w, f), sol) in packet
        .weights()
        .iter()
        .zip(packet.amplitudes())
        .zip(&states.solutions)
    {
        let wf2 = w * f.norm_sqr();
        p_trans += wf2 * sol.transmission.norm_sqr();
        p_refl += wf2 * sol.reflection.norm_sqr();
    }
    Ok((two_pi * p_trans, two_pi * p_refl))
}

/// Asymptotic branch selected by the sign of t and the side of the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Transmitted,
    Incoming,
    Reflected,
}

/// T(k) and R(k) as cubic splines over a momentum table, for evaluating the
/// stationary-phase forms at continuous momenta.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    t_re: CubicSpline,
    t_im: CubicSpline,
    r_re: CubicSpline,
    r_im: CubicSpline,
    support: f64,
    constants: PhysicsConstants,
}

impl CoefficientTable {
    pub fn from_states(states: &StationaryStates) -> Result<Self> {
        let ks = states.ks.clone();
        let t_re = CubicSpline::new(
            ks.clone(),
            states.solutions.iter().map(|s| s.transmission.re).collect(),
        )?;
        let t_im = CubicSpline::new(
            ks.clone(),
            states.solutions.iter().map(|s| s.transmission.im).collect(),
        )?;
        let r_re = CubicSpline::new(
            ks.clone(),
            states.solutions.iter().map(|s| s.reflection.re).collect(),
        )?;
        let r_im = CubicSpline::new(
            ks,
            states.solutions.iter().map(|s| s.reflection.im).collect(),
        )?;
        Ok(CoefficientTable {
            t_re,
            t_im,
            r_re,
            r_im,
            support: states.solutions[0].support,
            constants: states.solutions[0].constants,
        })
    }

    /// Build from a transmission scan, mapping energies to momenta.
    pub fn from_scan(
        points: &[ScanPoint],
        constants: &PhysicsConstants,
        support: f64,
    ) -> Result<Self> {
        let ks: Vec<f64> = points
            .iter()
            .map(|p| (2.0 * constants.mass * p.energy).sqrt() / constants.hbar)
            .collect();
        let t_re = CubicSpline::new(ks.clone(), points.iter().map(|p| p.transmission.re).collect())?;
        let t_im = CubicSpline::new(ks.clone(), points.iter().map(|p| p.transmission.im).collect())?;
        let r_re = CubicSpline::new(ks.clone(), points.iter().map(|p| p.reflection.re).collect())?;
        let r_im = CubicSpline::new(ks, points.iter().map(|p| p.reflection.im).collect())?;
        Ok(CoefficientTable {
            t_re,
            t_im,
            r_re,
            r_im,
            support,
            constants: *constants,
        })
    }

    pub fn transmission_at(&self, k: f64) -> Complex64 {
        Complex64::new(self.t_re.eval(k), self.t_im.eval(k))
    }

    pub fn reflection_at(&self, k: f64) -> Complex64 {
        Complex64::new(self.r_re.eval(k), self.r_im.eval(k))
    }

    pub fn support(&self) -> f64 {
        self.support
    }
}

/// Leading stationary-phase form of one asymptotic branch at (t, x).
///
/// The stationary momentum is m x / (hbar t) for the transmitted and
/// incoming branches and -m x / (hbar t) for the reflected one; the value is
/// zero when it falls outside the packet's momentum support.
pub fn spa_branch(
    packet: &SpectralWavepacket,
    table: &CoefficientTable,
    t: f64,
    x: f64,
    branch: Branch,
) -> Result<Complex64> {
    let c = &table.constants;
    let a = table.support;
    let (ks, coeff) = match branch {
        Branch::Transmitted => {
            if !(t > 0.0 && x > a) {
                return Err(ScatterError::BranchDomain(
                    "transmitted branch needs x > a and t > 0",
                ));
            }
            let ks = c.mass * x / (c.hbar * t);
            (ks, table.transmission_at(ks))
        }
        Branch::Incoming => {
            if !(t < 0.0 && x < -a) {
                return Err(ScatterError::BranchDomain(
                    "incoming branch needs x < -a and t < 0",
                ));
            }
            let ks = c.mass * x / (c.hbar * t);
            (ks, Complex64::new(1.0, 0.0))
        }
        Branch::Reflected => {
            if !(t > 0.0 && x < -a) {
                return Err(ScatterError::BranchDomain(
                    "reflected branch needs x < -a and t > 0",
                ));
            }
            let ks = -c.mass * x / (c.hbar * t);
            (ks, table.reflection_at(ks))
        }
    };
    let f = packet.amplitude_at(ks);
    if f.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let quarter_turn = match branch {
        Branch::Incoming => Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        _ => Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
    };
    let amp = (2.0 * std::f64::consts::PI * c.mass / (c.hbar * t.abs())).sqrt();
    let fresnel = Complex64::from_polar(1.0, c.mass * x * x / (2.0 * c.hbar * t));
    Ok(quarter_turn * amp * fresnel * f * coeff)
}
