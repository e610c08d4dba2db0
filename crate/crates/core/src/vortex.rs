//! Abelian (`r = n = 1`) vortices on a flat torus.
//!
//! Writing `|u|² = τ·e^h` in holomorphic gauge, the vortex equations reduce to
//!
//! ```text
//! Δh = e²τ (e^h − 1) + 4π Σ mᵢ δ_{xᵢ}
//! ```
//!
//! where the `xᵢ` are the zeros of `u`. The magnetic field is
//! `B = −½ (Δh − 4π Σ mᵢ δ_{xᵢ}) = (e²/2)(τ − |u|²)`, which is the second
//! vortex equation with `μ(u) = −(i/2)(|u|² − τ)`. Splitting `h = h₀ + v`
//! with the band-limited Green background `h₀` leaves a smooth problem for
//! `v`:
//!
//! ```text
//! Δv = e²τ (e^{h₀+v} − 1) + 4πd/Vol
//! ```
//!
//! Integrating over the torus gives `∫|u|² = τ·Vol − 4πd/e²`, which is only
//! positive when `e²τ·Vol > 4πd`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{dot, sup, FlatTorus, GeometryError, Grid, ScalarField, Spectral};
use crate::strata::EffectiveDivisor;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_MAX_ITERS: usize = 50;

#[derive(Debug, Error)]
pub enum VortexError {
    #[error("coupling e and vacuum value tau must be positive (e = {e}, tau = {tau})")]
    InvalidParameters { e: f64, tau: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("Bradlow bound violated: e²τ·Vol − 4πd = {margin} is not positive")]
    BradlowViolation { margin: f64 },
    #[error("Newton iteration stalled after {} steps with residual {}", .solution.newton_iters, .solution.residual_sup)]
    NoConvergence { solution: Box<VortexSolution> },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone)]
pub struct VortexProblem {
    pub torus: FlatTorus,
    pub grid: Grid,
    pub divisor: EffectiveDivisor<Complex64>,
    pub e: f64,
    pub tau: f64,
}

impl VortexProblem {
    pub fn new(
        torus: FlatTorus,
        grid: Grid,
        divisor: EffectiveDivisor<Complex64>,
        e: f64,
        tau: f64,
    ) -> Result<Self, VortexError> {
        if !(e > 0.0 && tau > 0.0 && e.is_finite() && tau.is_finite()) {
            return Err(VortexError::InvalidParameters { e, tau });
        }
        Ok(Self { torus, grid, divisor, e, tau })
    }

    pub fn degree(&self) -> usize {
        self.divisor.degree()
    }

    /// The self-dual coupling is fixed at `ξ = 1`.
    pub fn xi(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BradlowReport {
    pub feasible: bool,
    /// `e²τ·Vol − 4πd`.
    pub margin: f64,
}

pub fn check_bradlow(p: &VortexProblem) -> BradlowReport {
    let margin = p.e * p.e * p.tau * p.torus.volume() - 4.0 * PI * p.degree() as f64;
    BradlowReport { feasible: margin > 0.0, margin }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub max_cg_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iters: DEFAULT_MAX_ITERS, max_cg_iters: 4000 }
    }
}

#[derive(Debug, Clone)]
pub struct VortexSolution {
    pub e: f64,
    pub tau: f64,
    pub degree: usize,
    /// Smooth correction solved for by Newton.
    pub v: ScalarField,
    /// `h = h₀ + v`, so that `|u|² = τ·e^h`.
    pub h: ScalarField,
    pub residual_sup: f64,
    pub newton_iters: usize,
    /// Sup-norm residual before each Newton step and at the end.
    pub residual_history: Vec<f64>,
    pub cg_iters: usize,
    pub energy: f64,
    pub flux: f64,
    pub magnetic_energy: f64,
    pub potential_energy: f64,
}

impl VortexSolution {
    pub fn modulus_sq(&self) -> ScalarField {
        let tau = self.tau;
        self.h.map(|h| tau * h.exp())
    }

    /// Magnetic field from the curvature, `B = ½(4πd/Vol − Δv)`.
    pub fn magnetic_field(&self) -> ScalarField {
        let ops = Spectral::new(self.v.torus, self.v.grid);
        let c = 4.0 * PI * self.degree as f64 / self.v.torus.volume();
        let lap = ops.laplacian(&self.v.values);
        ScalarField {
            torus: self.v.torus,
            grid: self.v.grid,
            values: lap.into_iter().map(|l| 0.5 * (c - l)).collect(),
        }
    }

    pub fn integral_modulus_sq(&self) -> f64 {
        self.modulus_sq().integral()
    }
}

/// First Chern number read off from the Higgs field: `−(e²/4π)∫(|u|² − τ) dA`.
pub fn flux(sol: &VortexSolution) -> f64 {
    let tau = sol.tau;
    let deficit = sol.modulus_sq().map(|r| r - tau).integral();
    -sol.e * sol.e / (4.0 * PI) * deficit
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub total: f64,
    pub bogomolnyi_bound: f64,
    pub magnetic: f64,
    pub potential: f64,
}

/// Splits the static energy along the Bogomol'nyi rearrangement.
///
/// `total = πτd + ∫|∂̄_A u|² + ½∫|F/e + e μ ω|²`. The holomorphic-gauge
/// ansatz makes the first square vanish identically; the second is evaluated
/// with `F` from the curvature of the solved field and `μ` from `|u|²`, so it
/// measures how far the pair is from the second vortex equation.
pub fn energy_report(sol: &VortexSolution) -> EnergyReport {
    let (e, tau) = (sol.e, sol.tau);
    let b = sol.magnetic_field();
    let rho = sol.modulus_sq();
    let magnetic = b.map(|x| x * x).integral() / (2.0 * e * e);
    let potential = rho.map(|r| (r - tau) * (r - tau)).integral() * e * e / 8.0;
    let defect = b.zip_with(&rho, |bx, r| {
        let d = bx / e - 0.5 * e * (tau - r);
        d * d
    });
    let bogomolnyi_bound = PI * tau * sol.degree as f64;
    EnergyReport {
        total: bogomolnyi_bound + 0.5 * defect.integral(),
        bogomolnyi_bound,
        magnetic,
        potential,
    }
}

struct NewtonSystem<'a> {
    ops: &'a Spectral,
    h0: &'a [f64],
    coupling: f64,
    background_charge: f64,
}

impl NewtonSystem<'_> {
    /// `Δv − e²τ(e^{h₀+v} − 1) − 4πd/Vol`.
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let lap = self.ops.laplacian(v);
        lap.par_iter()
            .zip(v)
            .zip(self.h0)
            .map(|((l, vi), h0)| l - self.coupling * ((h0 + vi).exp() - 1.0) - self.background_charge)
            .collect()
    }

    /// Solves `(−Δ + W) x = rhs` by preconditioned conjugate gradients,
    /// preconditioned with `(−Δ + mean W)⁻¹`.
    fn solve_linearised(&self, weight: &[f64], rhs: &[f64], rel_tol: f64, max_iters: usize) -> (Vec<f64>, usize) {
        let w_mean = weight.iter().sum::<f64>() / weight.len() as f64;
        let apply = |x: &[f64]| -> Vec<f64> {
            let lap = self.ops.laplacian(x);
            lap.par_iter().zip(x).zip(weight).map(|((l, xi), w)| -l + w * xi).collect()
        };
        let precondition = |r: &[f64]| self.ops.apply_multiplier(r, |k2| 1.0 / (k2 + w_mean));
        let rhs_norm = dot(rhs, rhs).sqrt();
        let mut x = vec![0.0; rhs.len()];
        if rhs_norm == 0.0 {
            return (x, 0);
        }
        let mut r = rhs.to_vec();
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for iter in 1..=max_iters {
            let ap = apply(&p);
            let alpha = rz / dot(&p, &ap);
            x.par_iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
            r.par_iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
            if dot(&r, &r).sqrt() <= rel_tol * rhs_norm {
                return (x, iter);
            }
            z = precondition(&r);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            p.par_iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        (x, max_iters)
    }
}

/// Solves the reduced vortex equation by damped Newton iteration from `v = 0`.
pub fn solve(p: &VortexProblem, tol: f64, max_iters: usize) -> Result<VortexSolution, VortexError> {
    solve_with(p, SolveOptions { tol, max_iters, ..SolveOptions::default() })
}

pub fn solve_with(p: &VortexProblem, options: SolveOptions) -> Result<VortexSolution, VortexError> {
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(VortexError::InvalidTolerance(options.tol));
    }
    let (torus, grid) = (p.torus, p.grid);
    if p.divisor.is_empty() {
        // Vacuum: u has no zeros, |u|² ≡ τ and the curvature vanishes.
        let zero = ScalarField::zeros(torus, grid);
        return Ok(finish(p, zero.clone(), zero, vec![0.0], 0, 0));
    }
    let bradlow = check_bradlow(p);
    if !bradlow.feasible {
        return Err(VortexError::BradlowViolation { margin: bradlow.margin });
    }
    let ops = Spectral::new(torus, grid);
    let h0 = ops.green_background(&p.divisor)?;
    let system = NewtonSystem {
        ops: &ops,
        h0: &h0,
        coupling: p.e * p.e * p.tau,
        background_charge: 4.0 * PI * p.degree() as f64 / torus.volume(),
    };

    let mut v = vec![0.0; grid.len()];
    let mut residual = system.residual(&v);
    let mut history = vec![sup(&residual)];
    let mut cg_total = 0;
    let mut iters = 0;
    while *history.last().unwrap() > options.tol {
        if iters == options.max_iters {
            let sol = finish(p, field(p, v), field(p, h0), history, iters, cg_total);
            return Err(VortexError::NoConvergence { solution: Box::new(sol) });
        }
        iters += 1;
        let weight: Vec<f64> = v
            .par_iter()
            .zip(&h0)
            .map(|(vi, h)| system.coupling * (h + vi).exp())
            .collect();
        let r_sup = *history.last().unwrap();
        // Forcing term shrinks with the residual so the outer loop stays quadratic.
        let rel_tol = r_sup.clamp(1e-14, 1e-2);
        let (step, cg) = system.solve_linearised(&weight, &residual, rel_tol, options.max_cg_iters);
        cg_total += cg;

        let merit = dot(&residual, &residual);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(&step).map(|(vi, s)| vi + t * s).collect();
            let trial_residual = system.residual(&trial);
            let trial_merit = dot(&trial_residual, &trial_residual);
            if trial_merit.is_finite() && (trial_merit < merit || t < 1e-6) {
                v = trial;
                residual = trial_residual;
                break;
            }
            t *= 0.5;
        }
        history.push(sup(&residual));
    }
    Ok(finish(p, field(p, v), field(p, h0), history, iters, cg_total))
}

fn field(p: &VortexProblem, values: Vec<f64>) -> ScalarField {
    ScalarField { torus: p.torus, grid: p.grid, values }
}

fn finish(
    p: &VortexProblem,
    v: ScalarField,
    h0: ScalarField,
    history: Vec<f64>,
    newton_iters: usize,
    cg_iters: usize,
) -> VortexSolution {
    let h = v.zip_with(&h0, |a, b| a + b);
    let mut sol = VortexSolution {
        e: p.e,
        tau: p.tau,
        degree: p.degree(),
        v,
        h,
        residual_sup: *history.last().unwrap(),
        newton_iters,
        residual_history: history,
        cg_iters,
        energy: f64::NAN,
        flux: f64::NAN,
        magnetic_energy: f64::NAN,
        potential_energy: f64::NAN,
    };
    let report = energy_report(&sol);
    sol.energy = report.total;
    sol.magnetic_energy = report.magnetic;
    sol.potential_energy = report.potential;
    sol.flux = flux(&sol);
    sol
}
