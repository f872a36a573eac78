//! Monte Carlo build-up of the interference pattern from single arrivals.
//!
//! Photons are launched from positions drawn uniformly over the slit
//! apertures and transported along energy flow lines to an observation
//! line, where their arrival positions are binned. As the count grows the
//! normalized histogram converges to the (equally normalized) energy
//! density profile; the total-variation distance between the two is the
//! convergence metric.
//!
//! Randomness comes from ChaCha12, a seedable counter-based stream cipher
//! generator: photon i draws from stream i of the run seed, so results are
//! bit-identical for a given seed regardless of execution order or thread
//! count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowline::{integrate_with_source, FlowField, IntegratorConfig, Termination};
use crate::poynting::Polarization;
use crate::quadrature::QuadratureConfig;
use crate::spectrum::GratingSpec;
use crate::wavefield::{FieldEvaluator, FieldSource};

/// Seed for a reproducible run. The same seed yields a bit-identical
/// histogram on any thread count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

fn photon_rng(seed: RngSeed, photon: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed.0);
    rng.set_stream(photon);
    rng
}

/// Draw n launch positions, uniform over the union of the slit apertures
/// (slit chosen proportionally to its width, then uniform inside).
/// Photon i uses its own generator stream, so subsets are stable.
pub fn sample_launches(spec: &GratingSpec, n: u64, seed: RngSeed) -> Vec<f64> {
    let delta = spec.slit_width;
    let total = spec.num_slits as f64 * delta;
    (0..n)
        .map(|i| {
            let mut rng = photon_rng(seed, i);
            let u: f64 = rng.gen_range(0.0..total);
            let slit = ((u / delta) as usize).min(spec.num_slits - 1);
            let offset = u - slit as f64 * delta;
            let (lo, _) = spec.slit_edges(slit);
            lo + offset
        })
        .collect()
}

/// Where the photons that never reached the observation line went.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub stagnation: u64,
    pub left_window: u64,
    pub step_limit: u64,
    /// Reached the observation line outside the histogram window.
    pub out_of_window: u64,
}

impl LossBreakdown {
    pub fn total(&self) -> u64 {
        self.stagnation + self.left_window + self.step_limit + self.out_of_window
    }
}

/// Binned arrival positions on the observation line. Bins are uniform,
/// with one bin centered on x = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub y_observation: f64,
    pub total_photons: u64,
    pub losses: LossBreakdown,
}

impl ArrivalHistogram {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|e| 0.5 * (e[0] + e[1]))
            .collect()
    }

    pub fn terminated_elsewhere(&self) -> u64 {
        self.losses.total()
    }

    pub fn binned_total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Counts normalized to unit mass over the window (empty histogram
    /// normalizes to all zeros).
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.binned_total() as f64;
        if total == 0.0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

/// Geometry of one histogram accumulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRequest {
    pub n_photons: u64,
    pub seed: RngSeed,
    /// Observation height (m).
    pub y_observation: f64,
    /// Uniform bin width (m).
    pub bin_width: f64,
    /// Histogram extent: bins cover [-window_half_width, window_half_width]
    /// as far as whole bins fit.
    pub window_half_width: f64,
}

impl HistogramRequest {
    pub fn validate(&self) -> Result<()> {
        if self.n_photons == 0 {
            return Err(Error::invalid("n_photons", "must be at least 1"));
        }
        for (name, v) in [
            ("y_observation", self.y_observation),
            ("bin_width", self.bin_width),
            ("window_half_width", self.window_half_width),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid("histogram", format!("{name} must be positive")));
            }
        }
        if self.window_half_width < 0.5 * self.bin_width {
            return Err(Error::invalid(
                "window_half_width",
                "window must fit at least the central bin",
            ));
        }
        Ok(())
    }

    /// Index range [-m, m] of whole bins inside the window.
    fn half_bins(&self) -> i64 {
        ((self.window_half_width - 0.5 * self.bin_width) / self.bin_width).floor() as i64
    }

    fn edges(&self) -> Vec<f64> {
        let m = self.half_bins();
        (-m..=m + 1)
            .map(|i| (i as f64 - 0.5) * self.bin_width)
            .collect()
    }
}

/// Accumulate `n_photons` flow-line arrivals at the observation line into
/// a histogram. Photons stopping early (stagnation, window exit, step
/// limit) or arriving outside the window are tallied in `losses`; counts
/// plus losses always equal the photon total.
pub fn accumulate(
    spec: &GratingSpec,
    quad: &QuadratureConfig,
    pol: &Polarization,
    cfg: &IntegratorConfig,
    request: &HistogramRequest,
) -> Result<ArrivalHistogram> {
    request.validate()?;
    let eval = FieldEvaluator::new(spec, quad)?;
    accumulate_with_source(spec, &eval, pol, cfg, request)
}

/// Same as [`accumulate`] with a caller-provided field source (shared
/// evaluators, test fields).
pub fn accumulate_with_source<S: FieldSource + ?Sized>(
    spec: &GratingSpec,
    source: &S,
    pol: &Polarization,
    cfg: &IntegratorConfig,
    request: &HistogramRequest,
) -> Result<ArrivalHistogram> {
    request.validate()?;
    let mut run_cfg = *cfg;
    run_cfg.y_target = request.y_observation;
    run_cfg.validate()?;
    if !pol.is_linear() {
        return Err(Error::NonLinearPolarization);
    }

    let launches = sample_launches(spec, request.n_photons, request.seed);
    let arrivals = transport_launches(spec, source, pol, &run_cfg, &launches)?;
    Ok(bin_arrivals(&arrivals, request))
}

/// Transport a fixed list of launch positions to the target line. Returns
/// one (termination, final x) pair per launch, in launch order.
pub fn transport_launches<S: FieldSource + ?Sized>(
    spec: &GratingSpec,
    source: &S,
    pol: &Polarization,
    cfg: &IntegratorConfig,
    launches: &[f64],
) -> Result<Vec<(Termination, f64)>> {
    // surface aperture violations before spawning the parallel transport
    for &x0 in launches {
        if !spec.inside_aperture(x0) {
            return Err(Error::LaunchOutsideAperture { x0 });
        }
    }
    // shared field: construct once to amortize, and to fail fast on
    // non-linear polarization
    FlowField::new(source, *pol)?;
    launches
        .par_iter()
        .map(|&x0| {
            let t = integrate_with_source(spec, source, pol, cfg, x0, false)?;
            Ok((t.termination, t.endpoint().0))
        })
        .collect()
}

/// Bin transported arrivals into the requested histogram.
pub fn bin_arrivals(
    arrivals: &[(Termination, f64)],
    request: &HistogramRequest,
) -> ArrivalHistogram {
    let m = request.half_bins();
    let mut counts = vec![0u64; (2 * m + 1) as usize];
    let mut losses = LossBreakdown::default();
    for &(termination, x) in arrivals {
        match termination {
            Termination::ReachedTargetY => {
                // bin index by rounding keeps the map exactly mirror-symmetric
                let idx = (x / request.bin_width).round();
                if idx.abs() <= m as f64 {
                    counts[(idx as i64 + m) as usize] += 1;
                } else {
                    losses.out_of_window += 1;
                }
            }
            Termination::Stagnation => losses.stagnation += 1,
            Termination::LeftWindow => losses.left_window += 1,
            Termination::StepLimit => losses.step_limit += 1,
        }
    }
    ArrivalHistogram {
        bin_edges: request.edges(),
        counts,
        y_observation: request.y_observation,
        total_photons: arrivals.len() as u64,
        losses,
    }
}

/// Normalized energy-density profile |psi(x, y_ob)|^2 on the given grid,
/// scaled to unit trapezoid integral over the grid's extent. This is the
/// smooth comparison curve for arrival histograms; for linear polarization
/// the polarization constants cancel in the normalization.
pub fn density_reference<S: FieldSource + ?Sized>(
    source: &S,
    y_observation: f64,
    x_grid: &[f64],
) -> Result<Vec<f64>> {
    let mut values: Vec<f64> = x_grid
        .iter()
        .map(|&x| Ok(source.field_at(x, y_observation)?.intensity()))
        .collect::<Result<_>>()?;
    // trapezoid normalization over the (possibly non-uniform) grid
    let mut integral = 0.0;
    for i in 1..x_grid.len() {
        integral += 0.5 * (values[i] + values[i - 1]) * (x_grid[i] - x_grid[i - 1]);
    }
    if integral > 0.0 {
        for v in &mut values {
            *v /= integral;
        }
    }
    Ok(values)
}

/// Expected probability mass of each histogram bin under the energy
/// density, normalized over the window (5-point Gauss-Legendre per bin).
pub fn reference_bin_masses<S: FieldSource + ?Sized>(
    source: &S,
    y_observation: f64,
    bin_edges: &[f64],
) -> Result<Vec<f64>> {
    const NODES: [f64; 5] = [
        -0.906179845938664,
        -0.538469310105683,
        0.0,
        0.538469310105683,
        0.906179845938664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236926885056189,
        0.478628670499366,
        0.568888888888889,
        0.478628670499366,
        0.236926885056189,
    ];
    let mut masses = Vec::with_capacity(bin_edges.len().saturating_sub(1));
    for e in bin_edges.windows(2) {
        let mid = 0.5 * (e[0] + e[1]);
        let half = 0.5 * (e[1] - e[0]);
        let mut acc = 0.0;
        for (t, w) in NODES.iter().zip(WEIGHTS.iter()) {
            acc += w * source.field_at(mid + half * t, y_observation)?.intensity();
        }
        masses.push(acc * half);
    }
    let total: f64 = masses.iter().sum();
    if total > 0.0 {
        for m in &mut masses {
            *m /= total;
        }
    }
    Ok(masses)
}

/// Total-variation distance between two normalized mass vectors.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    0.5 * p
        .iter()
        .zip(q.iter())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Pearson chi-square statistic of observed counts against expected bin
/// masses (bins with negligible expectation are skipped).
pub fn chi_square(counts: &[u64], expected_masses: &[f64], total: u64) -> f64 {
    counts
        .iter()
        .zip(expected_masses.iter())
        .filter(|(_, &q)| q * total as f64 > 1e-9)
        .map(|(&c, &q)| {
            let e = q * total as f64;
            (c as f64 - e) * (c as f64 - e) / e
        })
        .sum()
}

/// Far-field criterion: beyond y_R = (2 delta + d/2)^2 / (4 pi lambda) the
/// Fraunhofer pattern is well formed on the observation line.
pub fn rayleigh_distance(spec: &GratingSpec) -> f64 {
    let w = 2.0 * spec.slit_width + 0.5 * spec.period;
    w * w / (4.0 * std::f64::consts::PI * spec.wavelength)
}
