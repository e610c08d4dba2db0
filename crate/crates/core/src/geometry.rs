//! Flat tori, sampled scalar fields and the spectral operators on them.
//!
//! A torus is `ℂ / (period1·ℤ + period2·ℤ)` with the flat metric and area
//! form `dA`. Grid point `(i, j)` sits at `(i/n1)·period1 + (j/n2)·period2`
//! and fields are stored row-major in `i`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strata::EffectiveDivisor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("periods {0} and {1} do not span a lattice")]
    InvalidTorus(Complex64, Complex64),
    #[error("grid {0}x{1} must have both sides even and at least 8")]
    InvalidGrid(usize, usize),
    #[error("field contains non-finite values")]
    InvalidField,
    #[error("field has {found} samples but grid needs {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("divisor has degree 0")]
    EmptyDivisor,
    #[error("malformed field CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTorus")]
pub struct FlatTorus {
    period1: Complex64,
    period2: Complex64,
    volume: f64,
}

#[derive(Deserialize)]
struct RawTorus {
    period1: Complex64,
    period2: Complex64,
}

impl TryFrom<RawTorus> for FlatTorus {
    type Error = GeometryError;
    fn try_from(raw: RawTorus) -> Result<Self, Self::Error> {
        FlatTorus::new(raw.period1, raw.period2)
    }
}

impl FlatTorus {
    pub fn new(period1: Complex64, period2: Complex64) -> Result<Self, GeometryError> {
        let volume = (period1.conj() * period2).im.abs();
        let scale = period1.norm() * period2.norm();
        if !volume.is_finite() || !scale.is_finite() || volume <= 1e-12 * scale {
            return Err(GeometryError::InvalidTorus(period1, period2));
        }
        Ok(Self { period1, period2, volume })
    }

    /// `L1 × L2` rectangle.
    pub fn rectangular(l1: f64, l2: f64) -> Result<Self, GeometryError> {
        Self::new(Complex64::new(l1, 0.0), Complex64::new(0.0, l2))
    }

    pub fn square(side: f64) -> Result<Self, GeometryError> {
        Self::rectangular(side, side)
    }

    /// Square torus of the given area.
    pub fn square_with_volume(volume: f64) -> Result<Self, GeometryError> {
        Self::square(volume.sqrt())
    }

    pub fn period1(&self) -> Complex64 {
        self.period1
    }

    pub fn period2(&self) -> Complex64 {
        self.period2
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Coordinates `(s1, s2)` with `z = s1·period1 + s2·period2`.
    pub fn to_fractional(&self, z: Complex64) -> (f64, f64) {
        let (a, b) = (self.period1, self.period2);
        let det = a.re * b.im - a.im * b.re;
        (
            (z.re * b.im - z.im * b.re) / det,
            (a.re * z.im - a.im * z.re) / det,
        )
    }

    pub fn from_fractional(&self, s1: f64, s2: f64) -> Complex64 {
        self.period1 * s1 + self.period2 * s2
    }

    /// Shortest representative of `z` modulo the lattice, searched over
    /// neighbouring cells (adequate for non-degenerate period pairs).
    pub fn lattice_reduce(&self, z: Complex64) -> Complex64 {
        let (s1, s2) = self.to_fractional(z);
        let base = self.from_fractional(s1 - s1.round(), s2 - s2.round());
        let mut best = base;
        for i in -1..=1 {
            for j in -1..=1 {
                let cand = base + self.period1 * i as f64 + self.period2 * j as f64;
                if cand.norm_sqr() < best.norm_sqr() {
                    best = cand;
                }
            }
        }
        best
    }

    /// Inverse Gram matrix of the periods, `[g11, g12, g22]`, so that the
    /// wavevector of mode `(m1, m2)` has `|k|² = 4π²(m1²g11 + 2m1m2g12 + m2²g22)`.
    fn dual_gram(&self) -> [f64; 3] {
        let (a, b) = (self.period1, self.period2);
        let g11 = a.norm_sqr();
        let g22 = b.norm_sqr();
        let g12 = a.re * b.re + a.im * b.im;
        let det = g11 * g22 - g12 * g12;
        [g22 / det, -g12 / det, g11 / det]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    n1: usize,
    n2: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    n1: usize,
    n2: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = GeometryError;
    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        Grid::new(raw.n1, raw.n2)
    }
}

impl Grid {
    pub fn new(n1: usize, n2: usize) -> Result<Self, GeometryError> {
        if n1 < 8 || n2 < 8 || !n1.is_multiple_of(2) || !n2.is_multiple_of(2) {
            return Err(GeometryError::InvalidGrid(n1, n2));
        }
        Ok(Self { n1, n2 })
    }

    pub fn square(n: usize) -> Result<Self, GeometryError> {
        Self::new(n, n)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of grid point `(i, j)`.
    pub fn point(&self, torus: &FlatTorus, i: usize, j: usize) -> Complex64 {
        torus.from_fractional(i as f64 / self.n1 as f64, j as f64 / self.n2 as f64)
    }

    pub fn cell_area(&self, torus: &FlatTorus) -> f64 {
        torus.volume() / self.len() as f64
    }
}

/// Real samples of a function on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub torus: FlatTorus,
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(torus: FlatTorus, grid: Grid, values: Vec<f64>) -> Result<Self, GeometryError> {
        if values.len() != grid.len() {
            return Err(GeometryError::ShapeMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidField);
        }
        Ok(Self { torus, grid, values })
    }

    pub fn zeros(torus: FlatTorus, grid: Grid) -> Self {
        Self { torus, grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(torus: FlatTorus, grid: Grid, f: impl Fn(Complex64) -> f64 + Sync) -> Self {
        let n2 = grid.n2();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.point(&torus, idx / n2, idx % n2)))
            .collect();
        Self { torus, grid, values }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n2() + j]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Trapezoidal (spectrally exact for band-limited data) integral over the torus.
    pub fn integral(&self) -> f64 {
        self.mean() * self.torus.volume()
    }

    pub fn inner(&self, other: &ScalarField) -> f64 {
        dot(&self.values, &other.values) * self.grid.cell_area(&self.torus)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> ScalarField {
        Self {
            torus: self.torus,
            grid: self.grid,
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64 + Sync) -> ScalarField {
        Self {
            torus: self.torus,
            grid: self.grid,
            values: self
                .values
                .par_iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Rolls the samples by whole grid cells: `out(i, j) = self(i - di, j - dj)`.
    pub fn shifted(&self, di: usize, dj: usize) -> ScalarField {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let mut values = vec![0.0; self.values.len()];
        for i in 0..n1 {
            for j in 0..n2 {
                values[((i + di) % n1) * n2 + (j + dj) % n2] = self.values[i * n2 + j];
            }
        }
        Self { torus: self.torus, grid: self.grid, values }
    }

    pub fn to_csv(&self) -> String {
        let (p1, p2) = (self.torus.period1(), self.torus.period2());
        let mut out = String::new();
        let _ = writeln!(out, "# period1 {} {}", p1.re, p1.im);
        let _ = writeln!(out, "# period2 {} {}", p2.re, p2.im);
        let _ = writeln!(out, "# grid {} {}", self.grid.n1(), self.grid.n2());
        for row in self.values.chunks(self.grid.n2()) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, GeometryError> {
        let mut p1 = None;
        let mut p2 = None;
        let mut shape = None;
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let bad = |reason: &str| GeometryError::Csv { line: line_no, reason: reason.into() };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let words: Vec<&str> = header.split_whitespace().collect();
                let nums = |w: &[&str]| -> Result<(f64, f64), GeometryError> {
                    match w {
                        [a, b] => Ok((
                            a.parse().map_err(|_| bad("bad number"))?,
                            b.parse().map_err(|_| bad("bad number"))?,
                        )),
                        _ => Err(bad("expected two numbers")),
                    }
                };
                match words.first() {
                    Some(&"period1") => p1 = Some(nums(&words[1..])?),
                    Some(&"period2") => p2 = Some(nums(&words[1..])?),
                    Some(&"grid") => {
                        let (a, b) = nums(&words[1..])?;
                        shape = Some((a as usize, b as usize));
                    }
                    _ => return Err(bad("unknown header")),
                }
                continue;
            }
            for cell in line.split(',') {
                values.push(cell.trim().parse::<f64>().map_err(|_| bad("bad value"))?);
            }
        }
        let missing = |what: &str| GeometryError::Csv { line: 0, reason: format!("missing {what} header") };
        let (p1, p2) = (p1.ok_or_else(|| missing("period1"))?, p2.ok_or_else(|| missing("period2"))?);
        let (n1, n2) = shape.ok_or_else(|| missing("grid"))?;
        let torus = FlatTorus::new(Complex64::new(p1.0, p1.1), Complex64::new(p2.0, p2.1))?;
        ScalarField::new(torus, Grid::new(n1, n2)?, values)
    }
}

/// Chunked so the summation order, and hence the result, does not depend on
/// the number of worker threads.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 4096;
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u * v).sum())
        .collect();
    partial.iter().sum()
}

pub(crate) fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn signed_mode(index: usize, n: usize) -> i64 {
    if index <= n / 2 {
        index as i64
    } else {
        index as i64 - n as i64
    }
}

/// FFT plans and Fourier multipliers for one torus and grid.
pub struct Spectral {
    torus: FlatTorus,
    grid: Grid,
    row_fft: Arc<dyn Fft<f64>>,
    row_ifft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
    col_ifft: Arc<dyn Fft<f64>>,
    /// `|k|²` per mode in storage order.
    k2: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("torus", &self.torus).field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(torus: FlatTorus, grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let (n1, n2) = (grid.n1(), grid.n2());
        let [g11, g12, g22] = torus.dual_gram();
        let mut k2 = Vec::with_capacity(grid.len());
        for i in 0..n1 {
            for j in 0..n2 {
                let m1 = signed_mode(i, n1) as f64;
                let m2 = signed_mode(j, n2) as f64;
                // At a Nyquist index the ±m modes alias; averaging them
                // drops the cross term and keeps the operator real.
                let nyquist = 2 * i == n1 || 2 * j == n2;
                let cross = if nyquist { 0.0 } else { 2.0 * m1 * m2 * g12 };
                k2.push(4.0 * PI * PI * (m1 * m1 * g11 + cross + m2 * m2 * g22));
            }
        }
        Self {
            torus,
            grid,
            row_fft: planner.plan_fft_forward(n2),
            row_ifft: planner.plan_fft_inverse(n2),
            col_fft: planner.plan_fft_forward(n1),
            col_ifft: planner.plan_fft_inverse(n1),
            k2,
        }
    }

    pub fn torus(&self) -> &FlatTorus {
        &self.torus
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumber_sq(&self) -> &[f64] {
        &self.k2
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        let (row, col) = if inverse {
            (&self.row_ifft, &self.col_ifft)
        } else {
            (&self.row_fft, &self.col_fft)
        };
        data.par_chunks_mut(n2).for_each(|chunk| row.process(chunk));
        let mut transposed = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut transposed, n1, n2);
        transposed.par_chunks_mut(n1).for_each(|chunk| col.process(chunk));
        transpose(&transposed, data, n2, n1);
    }

    /// Unnormalised forward DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse of [`Spectral::forward`], including the `1/N` factor, keeping the real part.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, true);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.into_iter().map(|c| c.re * scale).collect()
    }

    /// Applies a real Fourier multiplier `m(|k|²)`.
    pub fn apply_multiplier(&self, values: &[f64], multiplier: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        let mut spectrum = self.forward(values);
        spectrum
            .par_iter_mut()
            .zip(&self.k2)
            .for_each(|(c, &k2)| *c *= multiplier(k2));
        self.inverse(spectrum)
    }

    pub fn laplacian(&self, values: &[f64]) -> Vec<f64> {
        // Constants are in the kernel; removing the mean first keeps a large
        // constant offset from leaking roundoff into the high modes.
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let centred: Vec<f64> = values.iter().map(|v| v - mean).collect();
        self.apply_multiplier(&centred, |k2| -k2)
    }

    /// Inverse Laplacian on the mean-zero subspace; the zero mode maps to zero.
    pub fn inverse_laplacian(&self, values: &[f64]) -> Vec<f64> {
        self.apply_multiplier(values, |k2| if k2 == 0.0 { 0.0 } else { -1.0 / k2 })
    }

    /// Band-limited `h₀` with `Δh₀ = 4π Σ mᵢ δ_{xᵢ} − 4πd/Vol` and zero mean.
    ///
    /// The point masses enter as exact characters `e^{-i k·xᵢ}`, so divisor
    /// points need not lie on the grid.
    pub fn green_background(&self, divisor: &EffectiveDivisor<Complex64>) -> Result<Vec<f64>, GeometryError> {
        if divisor.degree() == 0 {
            return Err(GeometryError::EmptyDivisor);
        }
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        // The character factorises over the two fractional coordinates.
        let factors = |n: usize, s: f64| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    if 2 * i == n {
                        Complex64::new((PI * n as f64 * s).cos(), 0.0)
                    } else {
                        let m = signed_mode(i, n) as f64;
                        Complex64::from_polar(1.0, -2.0 * PI * m * s)
                    }
                })
                .collect()
        };
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for p in divisor.points() {
            let (s1, s2) = self.torus.to_fractional(p.position);
            let (f1, f2) = (factors(n1, s1), factors(n2, s2));
            let weight = p.multiplicity as f64;
            spectrum.par_chunks_mut(n2).zip(&f1).for_each(|(row, a)| {
                for (c, b) in row.iter_mut().zip(&f2) {
                    *c += a * b * weight;
                }
            });
        }
        // Series coefficient of Δh₀ is (4π/Vol)·Σ mᵢ e^{-ik·xᵢ}; grid values are the
        // unnormalised inverse DFT, which `inverse` reaches after its 1/N factor.
        let coeff = -4.0 * PI / self.torus.volume() * self.grid.len() as f64;
        spectrum
            .par_iter_mut()
            .zip(&self.k2)
            .for_each(|(c, &k2)| *c *= if k2 == 0.0 { 0.0 } else { coeff / k2 });
        Ok(self.inverse(spectrum))
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const BLOCK: usize = 32;
    for rb in (0..rows).step_by(BLOCK) {
        for cb in (0..cols).step_by(BLOCK) {
            for r in rb..(rb + BLOCK).min(rows) {
                for c in cb..(cb + BLOCK).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Flat Laplacian computed through Fourier multipliers.
pub fn laplacian(f: &ScalarField) -> Result<ScalarField, GeometryError> {
    if !f.is_finite() {
        return Err(GeometryError::InvalidField);
    }
    let ops = Spectral::new(f.torus, f.grid);
    Ok(ScalarField { torus: f.torus, grid: f.grid, values: ops.laplacian(&f.values) })
}

/// Mean-zero solution `u` of `Δu = f - mean(f)`.
pub fn inverse_laplacian(f: &ScalarField) -> Result<ScalarField, GeometryError> {
    if !f.is_finite() {
        return Err(GeometryError::InvalidField);
    }
    let ops = Spectral::new(f.torus, f.grid);
    Ok(ScalarField { torus: f.torus, grid: f.grid, values: ops.inverse_laplacian(&f.values) })
}

pub fn green_background(
    torus: FlatTorus,
    grid: Grid,
    divisor: &EffectiveDivisor<Complex64>,
) -> Result<ScalarField, GeometryError> {
    let values = Spectral::new(torus, grid).green_background(divisor)?;
    Ok(ScalarField { torus, grid, values })
}
