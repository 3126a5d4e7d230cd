//! Bubble machinery: superposing symmetry-transformed cores, the two
//! orthogonality (separation) functionals, constructive extraction of
//! frequency bubbles from a field, a matched-filter detector for the space
//! and time parameters of each bubble, and decoupling diagnostics for
//! families of separated profiles.
//!
//! Extraction runs in two stages.  Stage one repeatedly locates the interval
//! where the refined functional of the running remainder peaks, caps the
//! amplitude at `amplitude_constant·ρ^{−1/2}`, splits that piece off, and
//! regroups pieces whose scale–frequency separation stays below the
//! threshold.  Supports on the frequency side are disjoint by construction,
//! so the L² bookkeeping of stage one is exact.  Stage two renormalizes each
//! piece to unit scale and scans a time grid for the shift that concentrates
//! it, reading the spatial centre off the sup-norm peak; this matched filter
//! stands in for a weak-limit argument and recovers planted cores, but
//! carries no compactness guarantee.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{dual_grid, make_grid, Field, SpatialGrid, Spectrum};
use crate::quadrature::{FlowScan, TailPolicy, TimeWindow};
use crate::refined::refined_functional;
use crate::spectral::{
    apply_profile, forward_transform, inverse_transform, DispersionParams, Flow, ProfileParams,
};

/// Frequency-interval half-width ρ and centre ξ of one extracted piece.
/// Relates to the profile parameters through h = 1/ρ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFreq {
    pub rho: f64,
    pub xi: f64,
}

impl ScaleFreq {
    pub fn new(rho: f64, xi: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() || !xi.is_finite() {
            return Err(LabError::InvalidArgument(format!(
                "scale-frequency pair needs rho > 0 and finite entries, got ({rho}, {xi})"
            )));
        }
        Ok(ScaleFreq { rho, xi })
    }
}

/// Knobs of the extraction loop.
#[derive(Debug, Clone, Copy)]
pub struct ExtractionConfig {
    /// Stop once the refined functional of the remainder drops below δ.
    pub delta: f64,
    /// Exponent of the refined functional (4/3 unless there is a reason to
    /// deviate).
    pub p: f64,
    /// Amplitude cap is `amplitude_constant · ρ^{−1/2}`; only the ρ^{−1/2}
    /// scaling is structural, the constant is a tuning knob.
    pub amplitude_constant: f64,
    /// Caps the number of pieces in stage one and of cores per piece in
    /// stage two.
    pub max_bubbles: usize,
    /// Finite surrogate Θ for parameter orthogonality: pieces with
    /// separation below Θ are regrouped into one.
    pub ortho_threshold: f64,
}

impl ExtractionConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "extraction threshold must be positive, got {delta}"
            )));
        }
        Ok(ExtractionConfig {
            delta,
            p: 4.0 / 3.0,
            amplitude_constant: 10.0,
            max_bubbles: 24,
            ortho_threshold: 100.0,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0
            && self.p > 1.0
            && self.amplitude_constant > 0.0
            && self.max_bubbles >= 1
            && self.ortho_threshold > 0.0)
        {
            return Err(LabError::InvalidArgument(
                "extraction config entries must be positive (p > 1, max_bubbles >= 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Output of stage one.
#[derive(Debug, Clone)]
pub struct FrequencyPieces {
    pub pieces: Vec<(ScaleFreq, Field)>,
    pub remainder: Field,
    /// Refined functional of the remainder when the loop stopped.
    pub remainder_functional: f64,
    /// False when the loop hit `max_bubbles` (or stalled on the amplitude
    /// cap) before the remainder dropped below δ.
    pub converged: bool,
    /// Refined-functional value at the extraction step of each piece.
    pub piece_values: Vec<f64>,
}

/// Ordered profile list plus remainder.
#[derive(Debug, Clone)]
pub struct BubbleDecomposition {
    /// (parameters, core) per bubble, in the diagonal enumeration of the
    /// two-stage indices.
    pub profiles: Vec<(ProfileParams, Field)>,
    pub remainder: Field,
    pub delta: f64,
    /// Stage-one refined-functional value of the piece each profile came
    /// from.
    pub diagnostics: Vec<f64>,
}

impl BubbleDecomposition {
    /// Σ_j apply_profile(φ⁽ʲ⁾) + remainder, on the remainder's grid.
    pub fn resynthesize(&self, disp: &DispersionParams) -> Result<Field> {
        let grid = *self.remainder.grid();
        let mut acc = self.remainder.clone();
        for (p, core) in &self.profiles {
            acc = acc.add(&apply_profile(core, p, disp, &grid)?)?;
        }
        Ok(acc)
    }

    /// |‖input‖₂² − Σ‖φ⁽ʲ⁾‖₂² − ‖remainder‖₂²| — the near-Pythagoras gap.
    pub fn l2_gap(&self, input: &Field) -> f64 {
        let cores: f64 = self.profiles.iter().map(|(_, c)| c.l2_norm().powi(2)).sum();
        (input.l2_norm().powi(2) - cores - self.remainder.l2_norm().powi(2)).abs()
    }
}

/// Superposition Σ_j apply_profile(φ⁽ʲ⁾, p⁽ʲ⁾) on `grid`.
pub fn synthesize(
    specs: &[(ProfileParams, Field)],
    disp: &DispersionParams,
    grid: &SpatialGrid,
) -> Result<Field> {
    let mut acc = Field::zero(*grid);
    for (i, (p, core)) in specs.iter().enumerate() {
        let bubble = apply_profile(core, p, disp, grid)
            .map_err(|e| LabError::Resolution(format!("profile {i} not representable: {e}")))?;
        acc = acc.add(&bubble)?;
    }
    Ok(acc)
}

/// Scale–frequency separation ρ_a/ρ_b + ρ_b/ρ_a + |ξ_a − ξ_b|/ρ_a.
///
/// Always at least 2, with equality exactly at matching scales and centres;
/// divergence of this quantity along a sequence is what decouples bubbles
/// living at different scales or carriers.
pub fn scale_freq_separation(a: &ScaleFreq, b: &ScaleFreq) -> f64 {
    a.rho / b.rho + b.rho / a.rho + (a.xi - b.xi).abs() / a.rho
}

/// Space–time separation of two profiles sharing (h, ξ):
/// |Δt|/h⁴ + |Δt(μ + 6ξ²)|/h² + |x_a − x_b − 2(t_a − t_b)(2ξ² + μ)ξ|/h.
///
/// The speed 2(2ξ² + μ)ξ = 4ξ³ + 2μξ is the group velocity of the shared
/// carrier, so the third term measures the offset between the bubble centres
/// after transport.  Pairs with different (h, ξ) belong to
/// [`scale_freq_separation`].
pub fn spacetime_separation(
    a: &ProfileParams,
    b: &ProfileParams,
    disp: &DispersionParams,
) -> Result<f64> {
    if a.h != b.h || a.xi != b.xi {
        return Err(LabError::WrongBranch(format!(
            "profiles have (h, ξ) = ({}, {}) vs ({}, {}); use the scale-frequency separation",
            a.h, a.xi, b.h, b.xi
        )));
    }
    let h = a.h;
    let xi = a.xi;
    let dt = b.t0 - a.t0;
    let mu = disp.mu();
    let transported = a.x0 - b.x0 - 2.0 * (a.t0 - b.t0) * (2.0 * xi * xi + mu) * xi;
    Ok(dt.abs() / h.powi(4)
        + (dt * (mu + 6.0 * xi * xi)).abs() / (h * h)
        + transported.abs() / h)
}

/// Stage one: peel frequency bubbles off `f` until the refined functional of
/// the remainder drops below δ or `max_bubbles` pieces have been split off,
/// then regroup pieces that are not mutually separated.
///
/// The returned pieces have pairwise disjoint spectral supports and
/// reconstruct `f` together with the remainder bin-exactly, so
/// ‖f‖₂² = Σ‖piece‖₂² + ‖remainder‖₂² holds to rounding.
pub fn extract_frequency_bubbles(
    f: &Field,
    cfg: &ExtractionConfig,
    _disp: &DispersionParams,
    _window: &TimeWindow,
) -> Result<FrequencyPieces> {
    cfg.validate()?;
    if f.l2_norm() == 0.0 {
        return Err(LabError::DegenerateInput(
            "cannot decompose the zero field".into(),
        ));
    }

    let mut rem = forward_transform(f);
    let mut raw: Vec<(ScaleFreq, Spectrum, f64)> = Vec::new();
    let mut converged = false;
    let mut last_value = f64::NAN;
    for _ in 0..cfg.max_bubbles {
        let r = refined_functional(&rem, cfg.p)?;
        last_value = r.value;
        if r.value < cfg.delta {
            converged = true;
            break;
        }
        let rho = r.half_width();
        let xi = r.center();
        let cap = cfg.amplitude_constant * rho.powf(-0.5);

        let mut piece_values = vec![Complex64::default(); rem.values().len()];
        let mut mass = 0.0;
        for s in 0..rem.values().len() {
            let freq = rem.xi(s);
            if freq >= r.best_interval.0 && freq < r.best_interval.1 {
                let v = rem.values()[s];
                if v.norm() <= cap {
                    piece_values[s] = v;
                    mass += v.norm_sqr();
                    rem.values_mut()[s] = Complex64::default();
                }
            }
        }
        if mass == 0.0 {
            // The amplitude cap swallowed the whole window; splitting off
            // nothing would loop forever.
            break;
        }
        raw.push((
            ScaleFreq::new(rho, xi)?,
            Spectrum::new(*rem.grid(), piece_values)?,
            r.value,
        ));
    }
    if !converged {
        let r = refined_functional(&rem, cfg.p)?;
        last_value = r.value;
        converged = r.value < cfg.delta;
    }

    // Regroup: a piece joins the first earlier anchor it is not separated
    // from; otherwise it anchors a new group.
    let mut groups: Vec<(ScaleFreq, Spectrum, f64)> = Vec::new();
    'outer: for (sf, spec, value) in raw {
        for (anchor, sum, _) in groups.iter_mut() {
            if scale_freq_separation(anchor, &sf) < cfg.ortho_threshold {
                for (s, v) in spec.values().iter().enumerate() {
                    sum.values_mut()[s] += v;
                }
                continue 'outer;
            }
        }
        groups.push((sf, spec, value));
    }

    let mut pieces = Vec::with_capacity(groups.len());
    let mut piece_values = Vec::with_capacity(groups.len());
    for (sf, spec, value) in groups {
        pieces.push((sf, inverse_transform(&spec)));
        piece_values.push(value);
    }
    Ok(FrequencyPieces {
        pieces,
        remainder: inverse_transform(&rem),
        remainder_functional: last_value,
        converged,
        piece_values,
    })
}

/// Renormalized unit-scale version of a frequency-localized piece:
/// P̂(η) = √ρ · f̂(ρη + ξ) on the grid stretched by ρ, which in physical
/// space is P(x) = ρ^{−1/2} e^{−ix·ξ/ρ} f(x/ρ).
fn renormalize_piece(piece: &Spectrum, rho: f64, carrier_bins: i64) -> Result<Spectrum> {
    let n = piece.values().len();
    let grid = piece.grid();
    let stretched = make_grid(grid.center() * rho, grid.length() * rho, n)?;
    let amp = rho.sqrt();
    let mut values = vec![Complex64::default(); n];
    let mut kept = 0.0;
    for j in 0..n {
        let src = j as i64 + carrier_bins;
        if src >= 0 && (src as usize) < n {
            values[j] = piece.values()[src as usize] * amp;
            kept += piece.values()[src as usize].norm_sqr();
        }
    }
    let total: f64 = piece.values().iter().map(|v| v.norm_sqr()).sum();
    if total > 0.0 && total - kept > 1e-10 * total {
        return Err(LabError::Resolution(format!(
            "piece is not localized near its carrier: {:.3e} of {total:.3e} squared spectral mass falls outside the renormalized band",
            total - kept
        )));
    }
    Spectrum::new(stretched, values)
}

/// Output of stage two for one piece.
#[derive(Debug, Clone)]
pub struct SpacetimeCores {
    pub cores: Vec<(ProfileParams, Field)>,
    pub remainder: Field,
}

/// Smooth plateau: 1 on |x| ≤ a, cosine rolloff to 0 at |x| = b.
fn plateau(x: f64, a: f64, b: f64) -> f64 {
    let r = x.abs();
    if r <= a {
        1.0
    } else if r >= b {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (r - a) / (b - a)).cos())
    }
}

/// Half-range of the rescaled time scan (true shifts up to ±T_CORE·h⁴ are
/// detectable) and its sample count.
const T_CORE: f64 = 8.0;
const CORE_SCAN_STEPS: usize = 512;
/// Plateau window radii (inner flat / outer zero), in unit-scale lengths.
const WINDOW_FLAT: f64 = 12.0;
const WINDOW_ZERO: f64 = 20.0;

/// Stage two: matched-filter detection of the time shift and spatial centre
/// of up to `max_rounds` cores inside a frequency-localized piece.
///
/// Each round renormalizes the running remainder to unit scale, scans the
/// carrier-conjugated backward flow over a time grid for the largest
/// sup-norm, demodulates and windows the concentrated profile, and subtracts
/// its resynthesis.  A flat concentration profile (max/median < 2) stops the
/// loop: nothing detectable is left.
pub fn extract_spacetime_core(
    piece: &Field,
    sf: &ScaleFreq,
    disp: &DispersionParams,
    max_rounds: usize,
) -> Result<SpacetimeCores> {
    let grid = *piece.grid();
    let dxi = dual_grid(&grid).spacing();
    let carrier_bins = (sf.xi / dxi).round() as i64;
    let xi_snapped = carrier_bins as f64 * dxi;
    let rho = sf.rho;
    let h = 1.0 / rho;
    let carrier_rel = xi_snapped * h; // hξ, the bounded-modulation offset
    let disp_rescaled = DispersionParams::new(disp.mu() * h * h)?;
    let undo_flow = Flow::CarrierConjugated {
        disp: disp_rescaled,
        offset: carrier_rel,
    };

    let initial_norm = piece.l2_norm();
    let mut rem = piece.clone();
    let mut cores = Vec::new();

    for _ in 0..max_rounds {
        if rem.l2_norm() < 1e-8 * initial_norm {
            break;
        }
        let p_hat = renormalize_piece(&forward_transform(&rem), rho, carrier_bins)?;
        let stretched = *p_hat.grid();
        let n = stretched.count();

        // Scan s ∈ [−T_CORE, T_CORE]; FlowScan applies e^{+itψ}, so the
        // backward map e^{−isψ} sits at t = −s.
        let window = TimeWindow::new(T_CORE, CORE_SCAN_STEPS, TailPolicy::None)?;
        let mut scan = FlowScan::new(&p_hat, &undo_flow, &window);
        let mut sup_profile = Vec::with_capacity(CORE_SCAN_STEPS + 1);
        let mut best = (0.0f64, 0usize, 0usize); // sup², step, position
        for i in 0..=CORE_SCAN_STEPS {
            let u = scan.field_values();
            let mut sup = 0.0;
            let mut at = 0usize;
            for (m, v) in u.iter().enumerate() {
                let a = v.norm_sqr();
                if a > sup {
                    sup = a;
                    at = m;
                }
            }
            sup_profile.push(sup.sqrt());
            if sup > best.0 {
                best = (sup, i, at);
            }
            if i < CORE_SCAN_STEPS {
                scan.advance();
            }
        }
        let mut sorted = sup_profile.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let peak = best.0.sqrt();
        if peak < 2.0 * median {
            break; // flat concentration profile: no detectable core
        }

        let s_star = -window.sample(best.1); // t = −s
        let y_star = stretched.point(best.2);

        // Undo the detected shift and translate the peak to the grid centre.
        // The carrier demodulation lives inside the conjugated symbol
        // already; what remains on the core is the constant phase e^{iy*·hξ}.
        let mut undone = p_hat.clone();
        let fg = undone.fgrid();
        for (s, v) in undone.values_mut().iter_mut().enumerate() {
            let eta = fg.xi(s);
            *v *= Complex64::from_polar(1.0, -s_star * undo_flow.phase(eta));
        }
        let w = inverse_transform(&undone);
        let shift = best.2 as i64 - (n / 2) as i64;
        let carrier_phase = Complex64::from_polar(1.0, y_star * carrier_rel);
        let centred: Vec<Complex64> = (0..n)
            .map(|m| {
                let src = (m as i64 + shift).rem_euclid(n as i64) as usize;
                let x = stretched.point(m) - stretched.center();
                w.values()[src] * carrier_phase * plateau(x, WINDOW_FLAT, WINDOW_ZERO)
            })
            .collect();
        // The recorded core lives on the canonical core grid (centred at 0).
        let core_grid = make_grid(0.0, stretched.length(), n)?;
        let core = Field::new(core_grid, centred)?;
        if core.l2_norm() < 1e-10 * initial_norm {
            break;
        }
        let params = ProfileParams::new(h, xi_snapped, h * y_star, h.powi(4) * s_star)?;
        let resynth = apply_profile(&core, &params, disp, &grid)?;
        rem = rem.sub(&resynth)?;
        cores.push((params, core));
    }

    Ok(SpacetimeCores { cores, remainder: rem })
}

/// Full two-stage decomposition: frequency pieces, then space–time cores per
/// piece, relabelled along diagonals of the (piece, core) index pair.
pub fn full_decomposition(
    f: &Field,
    cfg: &ExtractionConfig,
    disp: &DispersionParams,
    window: &TimeWindow,
) -> Result<BubbleDecomposition> {
    if f.l2_norm() == 0.0 {
        return Ok(BubbleDecomposition {
            profiles: Vec::new(),
            remainder: f.clone(),
            delta: cfg.delta,
            diagnostics: Vec::new(),
        });
    }
    let stage1 = extract_frequency_bubbles(f, cfg, disp, window)?;
    let mut remainder = stage1.remainder.clone();
    let mut tagged: Vec<(usize, usize, ProfileParams, Field, f64)> = Vec::new();
    for (j, (sf, piece)) in stage1.pieces.iter().enumerate() {
        let stage2 = extract_spacetime_core(piece, sf, disp, cfg.max_bubbles)?;
        remainder = remainder.add(&stage2.remainder)?;
        for (alpha, (params, core)) in stage2.cores.into_iter().enumerate() {
            tagged.push((j + 1, alpha + 1, params, core, stage1.piece_values[j]));
        }
    }
    // Diagonal enumeration: (j, α) before (k, β) when j + α < k + β, ties by j.
    tagged.sort_by_key(|(j, a, ..)| (j + a, *j));
    let mut profiles = Vec::with_capacity(tagged.len());
    let mut diagnostics = Vec::with_capacity(tagged.len());
    for (_, _, params, core, value) in tagged {
        profiles.push((params, core));
        diagnostics.push(value);
    }
    Ok(BubbleDecomposition {
        profiles,
        remainder,
        delta: cfg.delta,
        diagnostics,
    })
}

/// Decoupling diagnostics for a family of synthesized bubbles.
#[derive(Debug, Clone)]
pub struct DecouplingReport {
    /// |‖Σ bubbles‖₂² − Σ‖φ⁽ʲ⁾‖₂²| at t = 0.
    pub l2_gap: f64,
    /// |‖Σ Q⁽ʲ⁾‖₆⁶ − Σ‖Q⁽ʲ⁾‖₆⁶| over the window, where Q⁽ʲ⁾ is the weighted
    /// evolution of bubble j.
    pub l6_gap: f64,
    /// ‖Q⁽ʲ⁾Q⁽ᵏ⁾‖_{L³_{t,x}}, the bilinear cross term (symmetric matrix).
    pub pair_products: Vec<Vec<f64>>,
    /// Σ_j ‖Q⁽ʲ⁾‖₆⁶ (normalization reference for the gap).
    pub sum_l6_sixth: f64,
    pub separation_scale: f64,
}

/// Evolves every synthesized bubble across the window and accumulates the
/// joint sixth-power norm, the per-bubble norms, and all pairwise L³ cross
/// terms.
pub fn decoupling_report(
    specs: &[(ProfileParams, Field)],
    disp: &DispersionParams,
    grid: &SpatialGrid,
    window: &TimeWindow,
    separation_scale: f64,
) -> Result<DecouplingReport> {
    if specs.is_empty() {
        return Err(LabError::InvalidArgument("no bubbles to decouple".into()));
    }
    let joint = synthesize(specs, disp, grid)?;
    let cores_sq: f64 = specs.iter().map(|(_, c)| c.l2_norm().powi(2)).sum();
    let l2_gap = (joint.l2_norm().powi(2) - cores_sq).abs();

    let flow = Flow::FourthOrder(*disp);
    let j_count = specs.len();
    let n = grid.count();
    let dx = grid.spacing();
    let mut scans = Vec::with_capacity(j_count);
    for (p, core) in specs {
        let bubble = apply_profile(core, p, disp, grid)?;
        let spec = forward_transform(&bubble);
        let weighted =
            crate::quadrature::weighted_spectrum(&spec, |xi| flow.strichartz_weight(xi));
        scans.push(FlowScan::new(&weighted, &flow, window));
    }

    let mut joint6 = 0.0;
    let mut each6 = vec![0.0f64; j_count];
    let mut prod3 = vec![vec![0.0f64; j_count]; j_count];
    let mut slab: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; j_count];
    for i in 0..=window.steps() {
        let wt = window.weight(i) * dx;
        for (j, scan) in scans.iter_mut().enumerate() {
            slab[j].copy_from_slice(scan.field_values());
            if i < window.steps() {
                scan.advance();
            }
        }
        for m in 0..n {
            let mut total = Complex64::default();
            for row in &slab {
                total += row[m];
            }
            let t2 = total.norm_sqr();
            joint6 += wt * t2 * t2 * t2;
        }
        for j in 0..j_count {
            let mut acc = 0.0;
            for v in &slab[j] {
                let a = v.norm_sqr();
                acc += a * a * a;
            }
            each6[j] += wt * acc;
            for k in (j + 1)..j_count {
                let mut cross = 0.0;
                for m in 0..n {
                    let a = slab[j][m].norm_sqr();
                    let b = slab[k][m].norm_sqr();
                    cross += (a * b).powf(1.5);
                }
                prod3[j][k] += wt * cross;
            }
        }
    }

    let sum_l6_sixth: f64 = each6.iter().sum();
    let mut pair_products = vec![vec![0.0f64; j_count]; j_count];
    for j in 0..j_count {
        for k in (j + 1)..j_count {
            pair_products[j][k] = prod3[j][k].cbrt();
            pair_products[k][j] = pair_products[j][k];
        }
    }
    Ok(DecouplingReport {
        l2_gap,
        l6_gap: (joint6 - sum_l6_sixth).abs(),
        pair_products,
        sum_l6_sixth,
        separation_scale,
    })
}
