use std::f64::consts::PI;

use num_complex::Complex64;
use vml_core::geometry::{FlatTorus, Grid};
use vml_core::strata::EffectiveDivisor;
use vml_core::vortex::{energy_report, flux, solve, VortexProblem, VortexSolution};

fn problem(torus: FlatTorus, n: usize, points: Vec<(Complex64, u32)>) -> VortexProblem {
    VortexProblem::new(torus, Grid::square(n).unwrap(), EffectiveDivisor::new(points).unwrap(), 1.0, 1.0).unwrap()
}

fn two_points() -> Vec<(Complex64, u32)> {
    vec![(Complex64::new(1.3, 2.2), 2), (Complex64::new(4.9, 5.3), 1)]
}

fn solved(n: usize, points: Vec<(Complex64, u32)>) -> (VortexProblem, VortexSolution) {
    let p = problem(FlatTorus::square_with_volume(50.0).unwrap(), n, points);
    let sol = solve(&p, 1e-10, 50).unwrap();
    (p, sol)
}

#[test]
fn modulus_is_positive_and_below_vacuum() {
    let (_, sol) = solved(64, two_points());
    let rho = sol.modulus_sq();
    assert!(rho.values.iter().all(|&r| r > 0.0));
    assert!(rho.values.iter().all(|&r| r <= sol.tau * (1.0 + 1e-9)));
}

#[test]
fn h_has_logarithmic_zeros() {
    let (p, sol) = solved(128, two_points());
    let cell = p.torus.period1().norm() / 128.0;
    for point in p.divisor.points() {
        let mut regular = Vec::new();
        for i in 0..128 {
            for j in 0..128 {
                let z = p.grid.point(&p.torus, i, j);
                let r = p.torus.lattice_reduce(z - point.position).norm();
                if (4.0 * cell..=0.8).contains(&r) {
                    regular.push(sol.h.get(i, j) - point.multiplicity as f64 * (r * r).ln());
                }
            }
        }
        let lo = regular.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = regular.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo < 1.0, "oscillation {} at {}", hi - lo, point.position);
    }
}

#[test]
fn translating_the_divisor_translates_the_solution() {
    let torus = FlatTorus::rectangular(6.0, 8.0).unwrap();
    let n = 64;
    let base = vec![(Complex64::new(1.1, 2.7), 1), (Complex64::new(3.4, 6.1), 2)];
    let (di, dj) = (5usize, 11usize);
    let shift = torus.from_fractional(di as f64 / n as f64, dj as f64 / n as f64);
    let moved: Vec<_> = base.iter().map(|&(z, m)| (torus.lattice_reduce(z + shift), m)).collect();
    let a = solve(&problem(torus, n, base), 1e-10, 50).unwrap();
    let b = solve(&problem(torus, n, moved), 1e-10, 50).unwrap();
    let diff = b.h.zip_with(&a.h.shifted(di, dj), |x, y| x - y);
    assert!(diff.sup_norm() <= 1e-9, "{}", diff.sup_norm());
}

#[test]
fn newton_converges_quadratically() {
    let (_, sol) = solved(256, vec![(Complex64::new(0.3, 0.4), 1)]);
    let h = &sol.residual_history;
    assert!(h.len() >= 3);
    let last = &h[h.len() - 3..];
    assert!(last[1] < last[0] && last[2] < last[1]);
    // Quadratic until the residual reaches the roundoff floor of the grid.
    let floor = 1e-11;
    for w in last.windows(2) {
        assert!(w[1] <= 10.0 * w[0] * w[0] || w[1] <= floor, "{:?}", last);
    }
}

#[test]
fn skew_torus_identities() {
    let torus = FlatTorus::new(Complex64::new(7.0, 0.0), Complex64::new(2.0, 6.0)).unwrap();
    let p = problem(torus, 96, vec![(Complex64::new(1.0, 1.0), 1), (Complex64::new(4.0, 3.5), 1), (Complex64::new(4.05, 3.5), 1)]);
    let sol = solve(&p, 1e-10, 50).unwrap();
    let expected = torus.volume() - 4.0 * PI * 3.0;
    assert!((sol.integral_modulus_sq() - expected).abs() <= 1e-8 * expected);
    assert!((flux(&sol) - 3.0).abs() <= 3e-9);
    let energy = energy_report(&sol);
    assert!((energy.total - 3.0 * PI).abs() <= 1e-6 * 3.0 * PI);
    assert!((energy.magnetic / energy.potential - 1.0).abs() <= 1e-8);
}

#[test]
fn near_threshold_solution() {
    let volume = 4.0 * PI * 1.01;
    let p = problem(FlatTorus::square_with_volume(volume).unwrap(), 128, vec![(Complex64::new(0.2, 0.1), 1)]);
    let sol = solve(&p, 1e-10, 50).unwrap();
    let expected = volume - 4.0 * PI;
    assert!((sol.integral_modulus_sq() - expected).abs() <= 1e-6 * expected);
    assert!(sol.modulus_sq().values.iter().all(|&r| r > 0.0 && r < 0.05));
}
