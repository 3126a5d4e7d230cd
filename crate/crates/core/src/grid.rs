//! Uniform periodic spatial grids, their frequency duals, and sampled
//! complex fields — the substrate every other module computes on.
//!
//! A grid has `n` points (a power of two) with spacing `dx` covering a
//! periodic interval of length `L = n·dx` centred at `center`:
//! x_m = center − L/2 + m·dx.  Its dual carries the signed frequencies
//! ξ_k = k·dξ for k ∈ {−n/2, …, n/2 − 1} with dξ = 2π/L, so dξ·dx·n = 2π
//! exactly up to floating representation and the Nyquist frequency is π/dx.
//!
//! All types are immutable values; operations never mutate their inputs.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// Uniform periodic grid in physical space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    center: f64,
    spacing: f64,
    count: usize,
}

impl SpatialGrid {
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Grid spacing dx.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Domain length L = n·dx.
    pub fn length(&self) -> f64 {
        self.spacing * self.count as f64
    }

    /// Left endpoint x_0 = center − L/2.
    pub fn left(&self) -> f64 {
        self.center - 0.5 * self.length()
    }

    /// m-th grid point x_m = center − L/2 + m·dx.
    pub fn point(&self, m: usize) -> f64 {
        self.left() + m as f64 * self.spacing
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |m| self.point(m))
    }
}

/// Signed-frequency dual of a [`SpatialGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    spacing: f64,
    count: usize,
}

impl FrequencyGrid {
    /// Frequency spacing dξ = 2π/L.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Frequency of slot `i` under the signed ordering: ξ = dξ·(i − n/2).
    pub fn xi(&self, i: usize) -> f64 {
        self.spacing * (i as i64 - (self.count / 2) as i64) as f64
    }

    /// Nyquist frequency ξ_max = dξ·n/2 = π/dx.
    pub fn nyquist(&self) -> f64 {
        self.spacing * (self.count / 2) as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.xi(i))
    }
}

/// Complex samples of a function on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl Field {
    /// Wraps samples, checking length and finiteness.
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(LabError::InvalidData(format!(
                "field has {} samples but grid holds {} points",
                values.len(),
                grid.count()
            )));
        }
        if let Some(m) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LabError::InvalidData(format!(
                "non-finite sample {} at x = {}",
                values[m],
                grid.point(m)
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zero(grid: SpatialGrid) -> Self {
        Field {
            values: vec![Complex64::new(0.0, 0.0); grid.count()],
            grid,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Pointwise sum; grids must match.
    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a + b)
    }

    /// Pointwise difference; grids must match.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn zip(&self, other: &Field, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(LabError::InvalidArgument(
                "fields live on different grids".into(),
            ));
        }
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(*a, *b))
                .collect(),
        })
    }

    /// Discrete L² norm (Σ|f|² dx)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }
}

/// Complex samples f̂(ξ_k) on the dual of a [`SpatialGrid`].
///
/// The originating spatial grid is retained so the inverse transform can
/// reconstruct samples at the original absolute coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(LabError::InvalidData(format!(
                "spectrum has {} slots but grid holds {} bins",
                values.len(),
                grid.count()
            )));
        }
        Ok(Spectrum { grid, values })
    }

    /// Spatial grid this spectrum is dual to.
    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn fgrid(&self) -> FrequencyGrid {
        dual_grid(&self.grid)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Frequency of slot `i` (signed ordering).
    pub fn xi(&self, i: usize) -> f64 {
        self.fgrid().xi(i)
    }

    /// Discrete L² norm under the 1/(2π) inversion convention,
    /// ((1/2π)·Σ|f̂|² dξ)^{1/2}; equals the L² norm of the field by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let dxi = self.fgrid().spacing();
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dxi / (2.0 * PI)).sqrt()
    }
}

/// Several time slices of one evolving field on a shared grid.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    grid: SpatialGrid,
    times: Vec<f64>,
    slices: Vec<Vec<Complex64>>,
}

impl SpaceTimeField {
    /// Builds from slices sharing one grid; times must be strictly increasing.
    pub fn new(grid: SpatialGrid, times: Vec<f64>, slices: Vec<Vec<Complex64>>) -> Result<Self> {
        if times.len() != slices.len() {
            return Err(LabError::InvalidData(
                "time and slice counts differ".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::InvalidArgument(
                "times must be strictly increasing".into(),
            ));
        }
        if slices.iter().any(|s| s.len() != grid.count()) {
            return Err(LabError::InvalidData(
                "slice length does not match grid".into(),
            ));
        }
        Ok(SpaceTimeField { grid, times, slices })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slice(&self, i: usize) -> Field {
        Field {
            grid: self.grid,
            values: self.slices[i].clone(),
        }
    }
}

/// Builds a grid from its centre, total length and point count.
///
/// `count` must be a power of two (and at least 4) so that windows of every
/// dyadic length exist on the dual grid.
pub fn make_grid(center: f64, length: f64, count: usize) -> Result<SpatialGrid> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "length must be positive and finite, got {length}"
        )));
    }
    if count < 4 || !count.is_power_of_two() {
        return Err(LabError::InvalidArgument(format!(
            "count must be a power of two ≥ 4, got {count}"
        )));
    }
    if !center.is_finite() {
        return Err(LabError::InvalidArgument("center must be finite".into()));
    }
    Ok(SpatialGrid {
        center,
        spacing: length / count as f64,
        count,
    })
}

/// Pointwise evaluation of `f` at the grid points.
pub fn sample(f: impl Fn(f64) -> Complex64, grid: &SpatialGrid) -> Result<Field> {
    Field::new(*grid, grid.points().map(f).collect())
}

/// Frequency dual: dξ = 2π/(n·dx), signed ordering.
pub fn dual_grid(grid: &SpatialGrid) -> FrequencyGrid {
    FrequencyGrid {
        spacing: 2.0 * PI / grid.length(),
        count: grid.count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_unit_circle() {
        let g = make_grid(0.0, 2.0 * PI, 8).unwrap();
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        assert!((dual_grid(&g).spacing() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn make_grid_nyquist() {
        let g = make_grid(0.0, 64.0, 4).unwrap();
        assert_eq!(g.spacing(), 16.0);
        assert!((dual_grid(&g).nyquist() - PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn make_grid_endpoints() {
        let g = make_grid(5.0, 100.0, 1024).unwrap();
        assert!((g.point(0) - (-45.0)).abs() < 1e-12);
        assert!((g.point(1023) - (55.0 - g.spacing())).abs() < 1e-12);
    }

    #[test]
    fn make_grid_rejects_bad_arguments() {
        assert!(make_grid(0.0, 10.0, 12).is_err());
        assert!(make_grid(0.0, 10.0, 2).is_err());
        assert!(make_grid(0.0, -1.0, 8).is_err());
        assert!(make_grid(0.0, 0.0, 8).is_err());
    }

    #[test]
    fn sample_constant_is_all_ones() {
        let g = make_grid(0.0, 10.0, 16).unwrap();
        let f = sample(|_| Complex64::new(1.0, 0.0), &g).unwrap();
        assert!(f.values().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn sample_even_function_is_even() {
        let g = make_grid(0.0, 20.0, 64).unwrap();
        let f = sample(|x| Complex64::new((-x * x / 2.0).exp(), 0.0), &g).unwrap();
        let v = f.values();
        for m in 1..64 {
            assert!((v[m] - v[64 - m]).norm() < 1e-15);
        }
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = make_grid(0.0, 10.0, 8).unwrap();
        let r = sample(|x| Complex64::new(1.0 / x, 0.0), &g);
        assert!(matches!(r, Err(LabError::InvalidData(_))));
    }

    #[test]
    fn dual_grid_examples() {
        let g = make_grid(0.0, 2.0 * PI, 8).unwrap();
        let d = dual_grid(&g);
        assert!((d.spacing() - 1.0).abs() < 1e-15);
        let xs: Vec<f64> = d.frequencies().collect();
        assert_eq!(xs[0], -4.0);
        assert_eq!(xs[7], 3.0);

        let g2 = make_grid(0.0, 4.0 * PI, 8).unwrap();
        assert!((dual_grid(&g2).spacing() - 0.5).abs() < 1e-15);

        // Doubling n at fixed L keeps dξ and doubles the Nyquist frequency.
        let g3 = make_grid(0.0, 2.0 * PI, 16).unwrap();
        assert!((dual_grid(&g3).spacing() - 1.0).abs() < 1e-15);
        assert!((dual_grid(&g3).nyquist() - 2.0 * dual_grid(&g).nyquist()).abs() < 1e-15);
    }

    #[test]
    fn times_must_increase() {
        let g = make_grid(0.0, 10.0, 8).unwrap();
        let z = vec![Complex64::default(); 8];
        assert!(SpaceTimeField::new(g, vec![0.0, 0.0], vec![z.clone(), z]).is_err());
    }
}
