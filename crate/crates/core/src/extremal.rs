//! Extremizer experiments for the sharp-constant quotient of the free
//! fourth-order flow: the closed-form Schrödinger Gaussian oracle, the
//! boosted-frame quotient and its large-carrier convergence study, the
//! candidate-table experiment comparing test inputs against the Schrödinger
//! baseline 12^{−1/12}, and a nonlinear power iteration that ascends the
//! quotient directly.
//!
//! The baseline: for φ₀ = e^{−x²/2} the free Schrödinger evolution satisfies
//! |e^{−itΔ}φ₀|² = (1+4t²)^{−1/2} e^{−x²/(1+4t²)}, hence
//! ‖e^{−itΔ}φ₀‖₆⁶ = √(π/3)·π/2 and ‖φ₀‖₂⁶ = π^{3/2}, so the quotient is
//! 12^{−1/12} ≈ 0.8129, independent of the Gaussian width by scaling.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::{dual_grid, make_grid, Field};
use crate::presets;
use crate::quadrature::{
    flow_ratio, schrodinger_ratio, strichartz_ratio, weighted_spectrum, FlowScan, RatioReport,
    TimeWindow,
};
use crate::spectral::{forward_transform, inverse_transform, DispersionParams, Flow};

/// The sharp Schrödinger constant 12^{−1/12} (one dimension, L² data,
/// attained by Gaussians).
pub fn schrodinger_sharp_constant() -> f64 {
    12f64.powf(-1.0 / 12.0)
}

/// Closed-form vs quadrature value of the Schrödinger Gaussian quotient for
/// e^{−(x/width)²}.
///
/// The exact value is width-independent; the numeric one is evaluated with
/// the window rescaled covariantly (t ↦ width²·t) and a grid wide enough for
/// the transported band.  Returns `(exact, numeric)`.
pub fn gaussian_schrodinger_oracle(width: f64, window: &TimeWindow) -> Result<(f64, f64)> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(LabError::InvalidArgument(format!(
            "gaussian width must be positive, got {width}"
        )));
    }
    let exact = schrodinger_sharp_constant();
    let scaled = TimeWindow::new(
        window.t_max() * width * width,
        window.steps(),
        window.tail_policy(),
    )?;
    // Band of e^{−(x/w)²} at the 1e−8 amplitude level is ≈ 8.6/w; the
    // Schrödinger transport over the window then spans ≈ 2·(17.2/w)·T·w².
    let half_span = 17.2 / width * scaled.t_max() + 30.0 * width;
    let n = 8192usize;
    let grid = make_grid(0.0, 2.2 * half_span, n)?;
    let f = presets::gaussian(&grid, width)?;
    let numeric = schrodinger_ratio(&f, &scaled)?.value;
    Ok((exact, numeric))
}

/// Boosted-frame quotient: the value of ‖D^{1/3}S(t)[e^{ixN}φ]‖₆/‖φ‖₂
/// evaluated through the carrier-frame change of variables (dispersion
/// η² + 2η³/(3N) + η⁴/(6N²), weight |η/N + 1|^{1/3}) instead of resolving
/// the carrier frequency N on the grid.  Exact in the continuum; requires
/// the band of φ to stay well below N.
pub fn highfreq_ratio(phi: &Field, carrier: f64, window: &TimeWindow) -> Result<f64> {
    if !(carrier > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "carrier frequency must be positive, got {carrier}"
        )));
    }
    // Effective band at the 1e−4 amplitude level; what lies beyond carries
    // no more than that into the quotient.
    let spec = forward_transform(phi);
    let peak = spec.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let band = (0..spec.values().len())
        .filter(|&s| spec.values()[s].norm() > 1e-4 * peak)
        .map(|s| spec.xi(s).abs())
        .fold(0.0, f64::max);
    if band >= 0.5 * carrier {
        return Err(LabError::InvalidArgument(format!(
            "band {band:.3} of the core reaches half the carrier {carrier}; the expansion regime needs band << N"
        )));
    }
    Ok(flow_ratio(phi, &Flow::HighFrequency { center: carrier }, window)?.value)
}

/// One row of the carrier sweep.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub carrier: f64,
    pub ratio: f64,
    /// ratio − the direct Schrödinger quotient of the same core.
    pub gap: f64,
}

/// Sweeps the boosted-frame quotient over increasing carriers and reports
/// the gap against the direct Schrödinger evaluation of the same core.
pub fn convergence_study(
    phi: &Field,
    carriers: &[f64],
    window: &TimeWindow,
) -> Result<Vec<ConvergenceRow>> {
    if carriers.windows(2).any(|w| w[1] <= w[0]) || carriers.is_empty() {
        return Err(LabError::InvalidArgument(
            "carrier list must be non-empty and increasing".into(),
        ));
    }
    let reference = schrodinger_ratio(phi, window)?.value;
    carriers
        .iter()
        .map(|&n| {
            let ratio = highfreq_ratio(phi, n, window)?;
            Ok(ConvergenceRow {
                carrier: n,
                ratio,
                gap: ratio - reference,
            })
        })
        .collect()
}

/// Input family of a candidate-table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFamily {
    Gaussian,
    PowerLaw,
    Modulated,
}

/// One candidate evaluation in the extremizer table.
#[derive(Debug, Clone)]
pub struct DichotomyRow {
    pub family: RowFamily,
    pub label: String,
    /// Input family and the grid/window it was evaluated on.
    pub description: String,
    pub ratio: f64,
    pub tail_bound: f64,
    /// ratio − 12^{−1/12}.
    pub baseline_gap: f64,
    /// Ratio uncertainty implied by the tail bound of this row.
    pub uncertainty: f64,
}

/// Table plus verdict of the candidate experiment.
#[derive(Debug, Clone)]
pub struct DichotomyOutcome {
    pub rows: Vec<DichotomyRow>,
    pub verdict: String,
    /// Quadrature tolerance used by the verdict threshold.
    pub tolerance: f64,
    pub reference: f64,
}

impl DichotomyOutcome {
    /// Largest quotient among the modulated-family rows (the direction that
    /// approaches the Schrödinger baseline from the carrier limit).
    pub fn modulated_supremum(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.family == RowFamily::Modulated)
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn row_from_report(
    family: RowFamily,
    label: String,
    description: String,
    report: &RatioReport,
    reference: f64,
) -> DichotomyRow {
    DichotomyRow {
        family,
        label,
        description,
        ratio: report.value,
        tail_bound: report.tail_bound,
        baseline_gap: report.value - reference,
        uncertainty: report_uncertainty(report),
    }
}

/// Ratio uncertainty implied by a report's tail bound (sixth-power error
/// divided through the sixth root), floored at the step-convergence level.
fn report_uncertainty(report: &RatioReport) -> f64 {
    let sixth = report.norm6.powi(6);
    if sixth == 0.0 {
        return 1e-6;
    }
    (report.value * report.tail_bound / (6.0 * sixth)).max(1e-6)
}

/// Evaluates the free-flow quotient for the stock candidate families —
/// Gaussians of several widths, slowly decaying power laws, and modulated
/// Gaussians with the high-carrier rows computed in the boosted frame — and
/// emits the table with a verdict line.
///
/// The verdict is a reporting convention: the experiment cannot settle
/// whether the fourth-order constant exceeds the Schrödinger one, it only
/// reports whether any candidate clears the baseline by three times the
/// quadrature tolerance.
///
/// `window` sets the time budget at unit scale: Gaussian rows rescale it by
/// width⁴ around a quarter of the given span, modulated rows by 1/(6N²) (the
/// boosted-frame correspondence), and the boosted-frame rows use it as is.
pub fn dichotomy_experiment(window: &TimeWindow) -> Result<DichotomyOutcome> {
    let reference = schrodinger_sharp_constant();
    let disp = DispersionParams::free();
    let mut rows = Vec::new();

    // Free-flow Gaussians e^{−(x/w)²}: the window is rescaled by w⁴ from a
    // quarter of the unit-scale span (quartic transport is what limits the
    // domain here), the grid covariantly by w.
    let base_t = 0.25 * window.t_max();
    for &w in &[0.5f64, 1.0, 2.0] {
        let scaled = TimeWindow::new(base_t * w.powi(4), window.steps(), window.tail_policy())?;
        let n = 65536usize;
        let grid = make_grid(0.0, 18350.0 * w, n)?;
        let f = presets::gaussian(&grid, w)?;
        let report = strichartz_ratio(&f, &disp, &scaled)?;
        rows.push(row_from_report(
            RowFamily::Gaussian,
            format!("gaussian w={w}"),
            format!(
                "e^-(x/{w})^2 on n={n} L={:.0}, window T={:.3} steps={}",
                grid.length(),
                scaled.t_max(),
                scaled.steps()
            ),
            &report,
            reference,
        ));
    }

    // Power laws (1+|x|)^{−α}, spectrally truncated so the quartic transport
    // of the kinked tail fits the domain.
    for &alpha in &[0.6f64, 1.0, 2.0] {
        let scaled = TimeWindow::new(base_t, window.steps(), window.tail_policy())?;
        let n = 65536usize;
        let band = 6.0;
        let grid = make_grid(0.0, 18000.0, n)?;
        let raw = presets::power_law(&grid, alpha)?;
        let mut spec = forward_transform(&raw);
        for s in 0..n {
            if spec.xi(s).abs() > band {
                spec.values_mut()[s] = Complex64::default();
            }
        }
        let f = inverse_transform(&spec);
        let report = strichartz_ratio(&f, &disp, &scaled)?;
        rows.push(row_from_report(
            RowFamily::PowerLaw,
            format!("power alpha={alpha}"),
            format!(
                "(1+|x|)^-{alpha} truncated to B(0,{band}) on n={n} L={:.0}, window T={:.3}",
                grid.length(),
                scaled.t_max()
            ),
            &report,
            reference,
        ));
    }

    // Modulated Gaussians e^{ixN} e^{−x²}.  Direct evaluation up to N = 8
    // with the window mapped through the carrier frame (T/(6N²)); beyond
    // that the boosted-frame quotient at the full window.
    for &carrier in &[0.0f64, 2.0, 4.0, 8.0] {
        let (scaled, grid) = if carrier == 0.0 {
            (
                TimeWindow::new(base_t, window.steps(), window.tail_policy())?,
                make_grid(0.0, 18350.0, 65536)?,
            )
        } else {
            let t_mod = window.t_max() / (6.0 * carrier * carrier);
            let band_edge = carrier + 6.1;
            let reach = 4.0 * band_edge.powi(3) * t_mod;
            let dx = std::f64::consts::PI / (carrier + 11.0);
            let need = (2.2 * reach + 80.0) / dx;
            let n = need.max(8192.0).log2().ceil().exp2() as usize;
            (
                TimeWindow::new(t_mod, window.steps(), window.tail_policy())?,
                make_grid(0.0, dx * n as f64, n)?,
            )
        };
        let f = presets::modulated_gaussian(&grid, 1.0, carrier)?;
        let report = strichartz_ratio(&f, &disp, &scaled)?;
        rows.push(row_from_report(
            RowFamily::Modulated,
            format!("modulated N={carrier}"),
            format!(
                "e^(ixN) e^-x^2 direct on n={} L={:.0}, window T={:.4}",
                grid.count(),
                grid.length(),
                scaled.t_max()
            ),
            &report,
            reference,
        ));
    }
    for &carrier in &[16.0f64, 64.0] {
        let grid = make_grid(0.0, 4800.0, 16384)?;
        let f = presets::gaussian(&grid, 1.0)?;
        let report = flow_ratio(&f, &Flow::HighFrequency { center: carrier }, window)?;
        rows.push(row_from_report(
            RowFamily::Modulated,
            format!("modulated N={carrier} (boosted frame)"),
            format!(
                "e^(ixN) e^-x^2 via carrier frame on n={} L={:.0}, window T={}",
                grid.count(),
                grid.length(),
                window.t_max()
            ),
            &report,
            reference,
        ));
    }

    let max_row = rows
        .iter()
        .max_by(|a, b| a.ratio.partial_cmp(&b.ratio).unwrap())
        .expect("table is non-empty");
    // The verdict compares the best candidate against the baseline, so the
    // threshold uses that row's own uncertainty; rows with huge tail bounds
    // (slowly dispersing inputs) report their value honestly but must not
    // widen the decision band for everyone else.
    let tolerance = max_row.uncertainty.max(1e-3);
    let verdict = if max_row.ratio > reference + 3.0 * tolerance {
        format!(
            "candidate exceeds Schrodinger baseline by {:.6} ({})",
            max_row.ratio - reference,
            max_row.label
        )
    } else {
        "inconclusive - consistent with equality of the sharp constants".to_string()
    };
    Ok(DichotomyOutcome {
        rows,
        verdict,
        tolerance,
        reference,
    })
}

/// Result of the quotient ascent.
#[derive(Debug, Clone)]
pub struct MaximizeOutcome {
    pub field: Field,
    pub ratio: f64,
    /// Quotient value after each iteration (starting with the seed's).
    pub trace: Vec<f64>,
    /// Set when the trace decreased by more than the numerical-noise budget
    /// somewhere — the ascent property failed.
    pub unstable: bool,
    /// True when successive ratios got within `step_tol` before `iters` ran
    /// out.
    pub converged: bool,
}

/// Nonlinear power iteration on the quotient ‖W S(t) f‖₆ / ‖f‖₂ of `flow`:
/// with A = W S(·), iterate g = A†(|Af|⁴ Af), f ← g/‖g‖₂.
///
/// The adjoint uses the same trapezoid weights as the norm, which makes the
/// ascent property exact in the discrete inner products: ⟨g, f⟩ = ‖Af‖₆⁶ and
/// two Hölder steps give J(f_next) ≥ J(f) up to rounding.
///
/// Iterates are projected onto the band where |ψ(ξ)|·dt ≤ 1/3.  Outside it
/// the time grid no longer resolves the evolution, and the discretized
/// quotient has a spurious supremum ≈ (dt/dx²)^{1/6} attained by sub-grid
/// spikes whose single-sample contribution is credited a whole trapezoid
/// weight; the projection closes that channel while leaving any input the
/// window can genuinely integrate untouched.
pub fn maximize_ratio(
    f0: &Field,
    flow: &Flow,
    window: &TimeWindow,
    iters: usize,
    step_tol: f64,
) -> Result<MaximizeOutcome> {
    let norm0 = f0.l2_norm();
    if norm0 == 0.0 {
        return Err(LabError::DegenerateInput("zero starting field".into()));
    }
    if iters == 0 {
        return Err(LabError::InvalidArgument("need at least one iteration".into()));
    }
    let grid = *f0.grid();
    let n = grid.count();
    let dx = grid.spacing();
    let fg = dual_grid(&grid);
    let phase_cap = 1.0 / (3.0 * window.dt());
    let resolved = |xi: f64| flow.phase(xi).abs() <= phase_cap;

    let project = |field: &Field| -> Result<Field> {
        let mut spec = forward_transform(field);
        let fgl = spec.fgrid();
        for (s, v) in spec.values_mut().iter_mut().enumerate() {
            if !resolved(fgl.xi(s)) {
                *v = Complex64::default();
            }
        }
        Ok(inverse_transform(&spec))
    };

    let seed = project(f0)?;
    let seed_norm = seed.l2_norm();
    if seed_norm == 0.0 {
        return Err(LabError::DegenerateInput(
            "starting field has no content in the resolved band".into(),
        ));
    }
    let mut f = seed.scale(Complex64::new(1.0 / seed_norm, 0.0));
    let mut trace: Vec<f64> = Vec::with_capacity(iters + 1);
    let mut unstable = false;
    let mut converged = false;

    for _ in 0..iters {
        let spec = forward_transform(&f);
        let weighted = weighted_spectrum(&spec, |xi| flow.strichartz_weight(xi));
        let mut scan = FlowScan::new(&weighted, flow, window);

        // Backward phases e^{−itψ} in signed order, advanced alongside the
        // scan, with the forward-transform factor dx·e^{−ix₀ξ} folded in so
        // the inner loop is one raw FFT plus one multiply per bin.
        let x0 = grid.left();
        let mut back: Vec<Complex64> = (0..n)
            .map(|s| {
                let xi = fg.xi(s);
                Complex64::from_polar(dx, window.t_max() * flow.phase(xi) - x0 * xi)
            })
            .collect();
        let back_step: Vec<Complex64> = (0..n)
            .map(|s| Complex64::from_polar(1.0, -window.dt() * flow.phase(fg.xi(s))))
            .collect();
        let fft = crate::spectral::plan_fft(n, false);

        let mut norm6_acc = 0.0;
        let mut adjoint = vec![Complex64::default(); n];
        let mut v_buf = vec![Complex64::default(); n];
        for i in 0..=window.steps() {
            let u = scan.field_values();
            let wt = window.weight(i);
            let mut g = 0.0;
            for (m, val) in u.iter().enumerate() {
                let a2 = val.norm_sqr();
                g += a2 * a2 * a2;
                v_buf[m] = val * (a2 * a2);
            }
            norm6_acc += wt * g * dx;

            fft.process(&mut v_buf);
            for s in 0..n {
                adjoint[s] += v_buf[crate::spectral::fft_bin(s, n)] * back[s] * wt;
            }
            if i < window.steps() {
                scan.advance();
                for (b, e) in back.iter_mut().zip(&back_step) {
                    *b *= *e;
                }
            }
        }

        let ratio = norm6_acc.powf(1.0 / 6.0); // ‖f‖₂ is kept at 1
        if let Some(&prev) = trace.last() {
            if ratio < prev - 1e-5 * prev {
                unstable = true;
            }
            if (ratio - prev).abs() < step_tol {
                trace.push(ratio);
                converged = true;
                break;
            }
        }
        trace.push(ratio);

        for s in 0..n {
            adjoint[s] = if resolved(fg.xi(s)) {
                adjoint[s] * flow.strichartz_weight(fg.xi(s))
            } else {
                Complex64::default()
            };
        }
        let g_field = inverse_transform(&crate::grid::Spectrum::new(grid, adjoint)?);
        let g_norm = g_field.l2_norm();
        if g_norm == 0.0 {
            return Err(LabError::DegenerateInput(
                "power iteration collapsed to zero".into(),
            ));
        }
        f = g_field.scale(Complex64::new(1.0 / g_norm, 0.0));
    }

    let ratio = *trace.last().expect("at least one iteration ran");
    Ok(MaximizeOutcome {
        field: f,
        ratio,
        trace,
        unstable,
        converged,
    })
}
