//! Energy flow lines: integral curves of the time-averaged Poynting field.
//!
//! The path equation dr/ds = S / (c U) is integrated in its arc-length
//! form with the right-hand side normalized to a unit vector. That keeps
//! the integrator regular where S_x vanishes (the symmetry axis and every
//! channel center), which the slope form dy/dx = S_y/S_x is not.
//!
//! Stepping is an embedded Dormand-Prince 5(4) pair with standard
//! proportional step control. Where the energy density falls below the
//! stagnation floor the direction is physically undefined and the
//! trajectory stops with [`Termination::Stagnation`]; no attempt is made
//! to jump across nodal lines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poynting::{poynting_vector, PhysicalConstants, Polarization, PoyntingSample};
use crate::quadrature::QuadratureConfig;
use crate::spectrum::GratingSpec;
use crate::wavefield::{FieldEvaluator, FieldSource};

/// Why a trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTargetY,
    Stagnation,
    LeftWindow,
    StepLimit,
}

/// An integrated flow line. `points` starts at the launch point; when the
/// target height is reached the final point is interpolated exactly onto
/// y = y_target.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: (f64, f64),
    pub points: Vec<(f64, f64)>,
    pub termination: Termination,
    pub steps: usize,
}

impl Trajectory {
    pub fn endpoint(&self) -> (f64, f64) {
        *self.points.last().unwrap_or(&self.start)
    }
}

/// Tolerances and termination bounds for the streamline integrator.
/// Lengths are in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Absolute energy-density floor below which the flow direction is
    /// treated as undefined.
    pub stagnation_u_floor: f64,
    /// Height at which integration ends.
    pub y_target: f64,
    /// Launch standoff above the grating plane; the boundary field is
    /// discontinuous at the slit edges at y = 0 exactly.
    pub y_launch: f64,
    /// Trajectories leaving |x| > window_half_width stop as LeftWindow.
    pub window_half_width: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    /// Defaults scaled to the grating: tolerances 1e-8 / 1e-12 d, step cap
    /// d/50, launch standoff 1e-3 L_T. The stagnation floor starts at an
    /// aperture-field scale and is refined by [`resolve_stagnation_floor`].
    pub fn defaults_for(spec: &GratingSpec, y_target: f64) -> Self {
        let d = spec.period;
        let u0 = spec.aperture_amplitude().powi(2);
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12 * d,
            max_step: d / 50.0,
            stagnation_u_floor: 1e-12 * u0,
            y_target,
            y_launch: 1e-3 * spec.talbot_distance(),
            window_half_width: 40.0 * d,
            max_steps: 500_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("stagnation_u_floor", self.stagnation_u_floor),
            ("y_target", self.y_target),
            ("y_launch", self.y_launch),
            ("window_half_width", self.window_half_width),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid("integrator", format!("{name} must be positive")));
            }
        }
        if self.y_launch >= self.y_target {
            return Err(Error::invalid(
                "integrator",
                format!(
                    "y_launch = {} must lie below y_target = {}",
                    self.y_launch, self.y_target
                ),
            ));
        }
        Ok(())
    }
}

/// The planar Poynting direction field for a linearly polarized wave.
pub struct FlowField<'a, S: FieldSource + ?Sized> {
    source: &'a S,
    pol: Polarization,
    constants: PhysicalConstants,
}

impl<'a, S: FieldSource + ?Sized> FlowField<'a, S> {
    /// Fails for non-linear polarization: S_z does not vanish there and the
    /// flow leaves the plane.
    pub fn new(source: &'a S, pol: Polarization) -> Result<Self> {
        if !pol.is_linear() {
            return Err(Error::NonLinearPolarization);
        }
        Ok(FlowField {
            source,
            pol,
            constants: PhysicalConstants::natural(),
        })
    }

    pub fn poynting(&self, x: f64, y: f64) -> Result<PoyntingSample> {
        let field = self.source.field_at(x, y)?;
        Ok(poynting_vector(
            &field,
            &self.pol,
            &self.constants,
            self.source.wavenumber(),
        ))
    }

    /// Largest energy density over the launch line, sampled across every
    /// aperture. Used to anchor the stagnation floor.
    pub fn max_launch_density(&self, spec: &GratingSpec, y_launch: f64) -> Result<f64> {
        const SAMPLES_PER_SLIT: usize = 256;
        let mut max_u: f64 = 0.0;
        for j in 0..spec.num_slits {
            let (lo, hi) = spec.slit_edges(j);
            for m in 0..SAMPLES_PER_SLIT {
                let x = lo + (hi - lo) * (m as f64 + 0.5) / SAMPLES_PER_SLIT as f64;
                max_u = max_u.max(self.poynting(x, y_launch)?.u);
            }
        }
        Ok(max_u)
    }
}

/// Set the stagnation floor to 1e-12 times the peak launch-line density.
pub fn resolve_stagnation_floor<S: FieldSource + ?Sized>(
    cfg: &mut IntegratorConfig,
    field: &FlowField<'_, S>,
    spec: &GratingSpec,
) -> Result<()> {
    let max_u = field.max_launch_density(spec, cfg.y_launch)?;
    if max_u > 0.0 {
        cfg.stagnation_u_floor = 1e-12 * max_u;
    }
    Ok(())
}

/// Unit flow direction from a Poynting sample, or `None` where the energy
/// density or flux magnitude is below the stagnation floor (the direction
/// is undefined at nodal points).
pub fn flow_direction(sample: &PoyntingSample, u_floor: f64) -> Option<(f64, f64)> {
    // natural units: c = 1, so the flux floor is u_floor * c = u_floor
    let planar = sample.sx.hypot(sample.sy);
    if !(sample.u > u_floor) || !(planar > u_floor) {
        return None;
    }
    Some((sample.sx / planar, sample.sy / planar))
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct StepOutcome {
    position: (f64, f64),
    derivative: (f64, f64),
    error_norm: f64,
}

enum StageResult {
    Ok(StepOutcome),
    /// A stage landed where the flow direction is undefined.
    Stagnant,
    /// A stage landed outside the field's domain (y < 0); retry smaller.
    OutOfDomain,
}

/// Integrate one flow line. The heavy lifting shared by the public entry
/// points; `record` controls whether intermediate points are stored.
fn integrate_core<S: FieldSource + ?Sized>(
    field: &FlowField<'_, S>,
    cfg: &IntegratorConfig,
    x0: f64,
    record: bool,
) -> Trajectory {
    let start = (x0, cfg.y_launch);
    let mut points = Vec::new();
    if record {
        points.push(start);
    }

    let finish = |termination: Termination,
                  mut points: Vec<(f64, f64)>,
                  last: (f64, f64),
                  steps: usize| {
        if !record {
            points.push(last);
        }
        Trajectory {
            start,
            points,
            termination,
            steps,
        }
    };

    let probe = |x: f64, y: f64| -> StageProbe {
        if y < 0.0 {
            return StageProbe::OutOfDomain;
        }
        match field.poynting(x, y) {
            Err(_) => StageProbe::OutOfDomain,
            Ok(sample) => match flow_direction(&sample, cfg.stagnation_u_floor) {
                Some((dx, dy)) => StageProbe::Dir(dx, dy),
                None => StageProbe::Stagnant,
            },
        }
    };

    let mut r = start;
    let mut d0 = match probe(r.0, r.1) {
        StageProbe::Dir(dx, dy) => (dx, dy),
        _ => return finish(Termination::Stagnation, points, start, 0),
    };

    let mut h = cfg.max_step;
    let h_floor = 1e-3 * cfg.abs_tol;
    let mut steps = 0usize;

    while steps < cfg.max_steps {
        if h < h_floor {
            return finish(Termination::StepLimit, points, r, steps);
        }
        match rk_step(&probe, r, d0, h, cfg.abs_tol, cfg.rel_tol) {
            StageResult::Stagnant => {
                return finish(Termination::Stagnation, points, r, steps);
            }
            StageResult::OutOfDomain => {
                h *= 0.5;
            }
            StageResult::Ok(outcome) => {
                if outcome.error_norm <= 1.0 {
                    steps += 1;
                    let prev = r;
                    let prev_d = d0;
                    r = outcome.position;
                    d0 = outcome.derivative;

                    if r.1 >= cfg.y_target {
                        let x_final =
                            interpolate_crossing(prev, prev_d, r, d0, h, cfg.y_target);
                        points.push((x_final, cfg.y_target));
                        return Trajectory {
                            start,
                            points,
                            termination: Termination::ReachedTargetY,
                            steps,
                        };
                    }
                    if record {
                        points.push(r);
                    }
                    if r.0.abs() > cfg.window_half_width {
                        return finish(Termination::LeftWindow, points, r, steps);
                    }
                }
                // proportional controller, clamped; a zero error estimate
                // (straight field) opens the step up to the cap
                let factor = if outcome.error_norm > 0.0 {
                    (0.9 * outcome.error_norm.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                h = (h * factor).min(cfg.max_step);
            }
        }
    }

    finish(Termination::StepLimit, points, r, steps)
}

/// One embedded DP5(4) attempt from `r` with derivative `d1` and step `h`.
fn rk_step<P>(
    probe: &P,
    r: (f64, f64),
    d1: (f64, f64),
    h: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> StageResult
where
    P: Fn(f64, f64) -> StageProbe,
{
    macro_rules! stage {
        ($p:expr) => {
            match probe($p.0, $p.1) {
                StageProbe::Dir(dx, dy) => (dx, dy),
                StageProbe::Stagnant => return StageResult::Stagnant,
                StageProbe::OutOfDomain => return StageResult::OutOfDomain,
            }
        };
    }

    let add = |terms: &[(f64, (f64, f64))]| -> (f64, f64) {
        let mut out = r;
        for (c, k) in terms {
            out.0 += h * c * k.0;
            out.1 += h * c * k.1;
        }
        out
    };

    let k1 = d1;
    let k2 = stage!(add(&[(A2[0], k1)]));
    let k3 = stage!(add(&[(A3[0], k1), (A3[1], k2)]));
    let k4 = stage!(add(&[(A4[0], k1), (A4[1], k2), (A4[2], k3)]));
    let k5 = stage!(add(&[(A5[0], k1), (A5[1], k2), (A5[2], k3), (A5[3], k4)]));
    let k6 = stage!(add(&[
        (A6[0], k1),
        (A6[1], k2),
        (A6[2], k3),
        (A6[3], k4),
        (A6[4], k5),
    ]));

    let stages = [k1, k2, k3, k4, k5, k6];
    let mut fifth = r;
    for (c, k) in B5.iter().zip(stages.iter()) {
        fifth.0 += h * c * k.0;
        fifth.1 += h * c * k.1;
    }
    // FSAL stage at the candidate point, also the error-estimate tail
    let k7 = stage!(fifth);

    let all = [k1, k2, k3, k4, k5, k6, k7];
    let mut err = (0.0, 0.0);
    for ((b5, b4), k) in B5.iter().zip(B4.iter()).zip(all.iter()) {
        err.0 += h * (b5 - b4) * k.0;
        err.1 += h * (b5 - b4) * k.1;
    }

    // WRMS error norm against the componentwise tolerance scale
    let scale_x = abs_tol + rel_tol * r.0.abs().max(fifth.0.abs());
    let scale_y = abs_tol + rel_tol * r.1.abs().max(fifth.1.abs());
    let ex = err.0 / scale_x;
    let ey = err.1 / scale_y;
    StageResult::Ok(StepOutcome {
        position: fifth,
        derivative: k7,
        error_norm: (0.5 * (ex * ex + ey * ey)).sqrt(),
    })
}

/// Outcome of probing the direction field at a stage point.
pub(crate) enum StageProbe {
    Dir(f64, f64),
    Stagnant,
    OutOfDomain,
}

/// Locate y = y_target inside the final step by cubic Hermite interpolation
/// and return the x coordinate there. Bisection on the Hermite polynomial
/// keeps the lookup deterministic and mirror-symmetric.
fn interpolate_crossing(
    r0: (f64, f64),
    d0: (f64, f64),
    r1: (f64, f64),
    d1: (f64, f64),
    h: f64,
    y_target: f64,
) -> f64 {
    if r1.1 == y_target {
        return r1.0;
    }
    let hermite = |theta: f64| -> (f64, f64) {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + theta;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        (
            h00 * r0.0 + h10 * h * d0.0 + h01 * r1.0 + h11 * h * d1.0,
            h00 * r0.1 + h10 * h * d0.1 + h01 * r1.1 + h11 * h * d1.1,
        )
    };

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if hermite(mid).1 < y_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hermite(0.5 * (lo + hi)).0
}

/// Integrate a single flow line launched from x0 inside a slit aperture.
pub fn integrate_trajectory(
    spec: &GratingSpec,
    quad: &QuadratureConfig,
    pol: &Polarization,
    cfg: &IntegratorConfig,
    x0: f64,
) -> Result<Trajectory> {
    let eval = FieldEvaluator::new(spec, quad)?;
    integrate_with_source(spec, &eval, pol, cfg, x0, true)
}

/// Integrate with a caller-provided field source; `record` switches between
/// full paths and endpoint-only bookkeeping (identical arithmetic).
pub fn integrate_with_source<S: FieldSource + ?Sized>(
    spec: &GratingSpec,
    source: &S,
    pol: &Polarization,
    cfg: &IntegratorConfig,
    x0: f64,
    record: bool,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !spec.inside_aperture(x0) {
        return Err(Error::LaunchOutsideAperture { x0 });
    }
    let field = FlowField::new(source, *pol)?;
    Ok(integrate_core(&field, cfg, x0, record))
}

/// Integrate a whole bundle in parallel. Output order matches input order
/// and every trajectory is independent, so results do not depend on the
/// degree of parallelism. Per-trajectory outcomes (stagnation, window exit,
/// step limit) are recorded in each trajectory, never aborting the bundle.
pub fn trajectory_bundle(
    spec: &GratingSpec,
    quad: &QuadratureConfig,
    pol: &Polarization,
    cfg: &IntegratorConfig,
    launch_points: &[f64],
) -> Result<Vec<Trajectory>> {
    use rayon::prelude::*;

    cfg.validate()?;
    for &x0 in launch_points {
        if !spec.inside_aperture(x0) {
            return Err(Error::LaunchOutsideAperture { x0 });
        }
    }
    let eval = FieldEvaluator::new(spec, quad)?;
    let field = FlowField::new(&eval, *pol)?;
    Ok(launch_points
        .par_iter()
        .map(|&x0| integrate_core(&field, cfg, x0, true))
        .collect())
}
