//! Stock input families: Gaussians, modulated Gaussians, slowly decaying
//! power laws, band-limited bumps and indicator spectra, and seeded random
//! band-limited fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{dual_grid, Field, SpatialGrid, Spectrum};
use crate::spectral::inverse_transform;

/// e^{−(x/width)²}; width 1 is e^{−x²}.
pub fn gaussian(grid: &SpatialGrid, width: f64) -> Result<Field> {
    crate::grid::sample(
        |x| Complex64::new((-(x / width) * (x / width)).exp(), 0.0),
        grid,
    )
}

/// e^{ixN} e^{−(x/width)²} with the carrier snapped to the dual grid.
pub fn modulated_gaussian(grid: &SpatialGrid, width: f64, carrier: f64) -> Result<Field> {
    let dxi = dual_grid(grid).spacing();
    let snapped = (carrier / dxi).round() * dxi;
    crate::grid::sample(
        |x| Complex64::from_polar((-(x / width) * (x / width)).exp(), snapped * x),
        grid,
    )
}

/// (1 + |x|)^{−alpha}; square-integrable for alpha > 1/2.
pub fn power_law(grid: &SpatialGrid, alpha: f64) -> Result<Field> {
    crate::grid::sample(|x| Complex64::new((1.0 + x.abs()).powf(-alpha), 0.0), grid)
}

/// Spectrum equal to `height` on B(center, radius) and zero elsewhere.
pub fn indicator_spectrum(grid: &SpatialGrid, center: f64, radius: f64) -> Spectrum {
    let fg = dual_grid(grid);
    let values = (0..grid.count())
        .map(|s| {
            let xi = fg.xi(s);
            if (xi - center).abs() <= radius {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
        .collect();
    Spectrum::new(*grid, values).expect("lengths agree")
}

/// Field whose spectrum is the frequency-concentrated square bump
/// ρ^{−1/2}·1_{[−ρ/2, ρ/2]} (unit L² mass up to the 2π convention).
pub fn concentrated_field(grid: &SpatialGrid, rho: f64) -> Field {
    let fg = dual_grid(grid);
    let h = rho.powf(-0.5);
    let values = (0..grid.count())
        .map(|s| {
            let xi = fg.xi(s);
            if xi.abs() <= 0.5 * rho {
                Complex64::new(h, 0.0)
            } else {
                Complex64::default()
            }
        })
        .collect();
    inverse_transform(&Spectrum::new(*grid, values).expect("lengths agree"))
}

/// C^∞ bump e^{−1/(1−u²)} on B(center, radius) in frequency; exactly
/// band-limited, so transport/wrap accounting is sharp.
pub fn bump_spectrum(grid: &SpatialGrid, center: f64, radius: f64) -> Spectrum {
    let fg = dual_grid(grid);
    let values = (0..grid.count())
        .map(|s| {
            let u = (fg.xi(s) - center) / radius;
            if u.abs() < 1.0 {
                Complex64::new((-1.0 / (1.0 - u * u)).exp(), 0.0)
            } else {
                Complex64::default()
            }
        })
        .collect();
    Spectrum::new(*grid, values).expect("lengths agree")
}

/// Field version of [`bump_spectrum`].
pub fn bump_field(grid: &SpatialGrid, center: f64, radius: f64) -> Field {
    inverse_transform(&bump_spectrum(grid, center, radius))
}

/// Seeded random field with spectrum supported in B(center, radius): rough
/// random modulus in [1/2, 1] under a smooth random chirp phase
/// θ(u) = β₁u + β₂u² + β₃u³ + β₄u⁴ (u the band coordinate), unit L² norm.
///
/// The chirp terms are the noncompact symmetry directions — translation and
/// time shifts of the second- and fourth-order flows — so different seeds
/// move the field around without destroying its coherence.
pub fn random_band_limited(grid: &SpatialGrid, center: f64, radius: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta: [f64; 4] = [
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
    ];
    let fg = dual_grid(grid);
    let values = (0..grid.count())
        .map(|s| {
            let xi = fg.xi(s);
            if (xi - center).abs() <= radius {
                let u = (xi - center) / radius;
                let r: f64 = rng.gen_range(0.5..1.0);
                let th = u * (beta[0] + u * (beta[1] + u * (beta[2] + u * beta[3])));
                Complex64::from_polar(r, th)
            } else {
                Complex64::default()
            }
        })
        .collect();
    let f = inverse_transform(&Spectrum::new(*grid, values).expect("lengths agree"));
    let norm = f.l2_norm();
    f.scale(Complex64::new(1.0 / norm, 0.0))
}
