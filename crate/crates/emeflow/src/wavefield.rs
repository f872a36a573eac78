//! Diffracted scalar field behind the grating.
//!
//! The workhorse is [`FieldEvaluator`], which approximates
//!
//!   psi(x, y) = e^{iky}/sqrt(2 pi) * int c(kx) e^{i kx x} e^{-i kx^2 y / 2k} dkx
//!
//! on a fixed quadrature rule, returning psi together with both first
//! derivatives (obtained by differentiating under the integral: d/dx
//! inserts i kx, d/dy inserts i(k - kx^2/2k)).
//!
//! Because c(kx) is even, the +/- kx nodes are summed in pairs. This halves
//! the work and, more importantly, makes psi exactly even in x and
//! d psi/dx exactly odd at the bit level, so mirror-image flow lines are
//! mirror images in floating point too.
//!
//! [`fresnel_oracle`] provides an independent closed-form route to the same
//! field (a sum of Fresnel integrals over the slit edges) used for
//! cross-verification, and [`DiscreteOrders`] the idealized infinite-grating
//! mode sum used by the Talbot-revival checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fresnel::fresnel_complex;
use crate::quadrature::QuadratureConfig;
use crate::spectrum::{spectral_amplitude, GratingSpec};

const INV_SQRT_2PI: f64 = 0.3989422804014327; // 1/sqrt(2 pi)

/// Number of node pairs between exact re-seeds of the phase recurrences.
const PHASE_REFRESH: usize = 128;

/// The complex field and its first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub psi: Complex64,
    pub dpsi_dx: Complex64,
    pub dpsi_dy: Complex64,
    pub position: (f64, f64),
}

impl FieldSample {
    pub fn is_finite(&self) -> bool {
        self.psi.is_finite() && self.dpsi_dx.is_finite() && self.dpsi_dy.is_finite()
    }

    /// |psi|^2 at the sample point.
    pub fn intensity(&self) -> f64 {
        self.psi.norm_sqr()
    }
}

struct Node {
    kx: f64,
    /// c(kx) * quadrature weight
    cw: f64,
    /// k - kx^2 / 2k, the exact d/dy phase rate
    ky_rate: f64,
}

/// Precomputed spectral quadrature for one grating + rule. Evaluation is
/// pure and cheap enough to sit inside an ODE right-hand side.
pub struct FieldEvaluator {
    k: f64,
    /// weight of the kx = 0 node, if the rule has one
    center_cw: Option<f64>,
    nodes: Vec<Node>,
    uniform_step: Option<f64>,
}

impl FieldEvaluator {
    pub fn new(spec: &GratingSpec, quad: &QuadratureConfig) -> Result<Self> {
        spec.validate()?;
        quad.validate_for(spec)?;
        let k = spec.wavenumber();
        let half = quad.half_nodes();
        let center_cw = half
            .center_weight
            .map(|w| w * spectral_amplitude(spec, 0.0));
        let nodes: Vec<Node> = half
            .positive
            .iter()
            .map(|&(kx, w)| Node {
                kx,
                cw: w * spectral_amplitude(spec, kx),
                ky_rate: k - kx * kx / (2.0 * k),
            })
            .collect();

        // The positive trapezoid nodes form an arithmetic sequence, which
        // enables the rotation recurrences in `accumulate_uniform`.
        let uniform_step = match quad.scheme {
            crate::quadrature::Scheme::UniformTrapezoid => {
                Some(2.0 * quad.kx_max / (quad.num_nodes - 1) as f64)
            }
            crate::quadrature::Scheme::GaussLegendre => None,
        };

        Ok(FieldEvaluator {
            k,
            center_cw,
            nodes,
            uniform_step,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Evaluate psi and its derivatives at (x, y), y >= 0.
    pub fn sample(&self, x: f64, y: f64) -> Result<FieldSample> {
        if y < 0.0 {
            return Err(Error::BackwardPropagation { y });
        }
        let (mut acc_psi, acc_dx, mut acc_dy) = match self.uniform_step {
            Some(step) => self.accumulate_uniform(x, y, step),
            None => self.accumulate_generic(x, y),
        };
        if let Some(cw) = self.center_cw {
            acc_psi += cw;
            acc_dy += cw * self.k;
        }

        let prefactor = Complex64::from_polar(INV_SQRT_2PI, self.k * y);
        Ok(FieldSample {
            psi: prefactor * acc_psi,
            dpsi_dx: prefactor * acc_dx,
            dpsi_dy: prefactor * Complex64::i() * acc_dy,
            position: (x, y),
        })
    }

    /// Pair-summed accumulation with per-node sin/cos. Returns the three
    /// partial sums before the common e^{iky}/sqrt(2 pi) prefactor; the
    /// d/dy sum still lacks its factor i.
    fn accumulate_generic(&self, x: f64, y: f64) -> (Complex64, Complex64, Complex64) {
        let alpha = y / (2.0 * self.k);
        let mut acc_psi = Complex64::new(0.0, 0.0);
        let mut acc_dx = Complex64::new(0.0, 0.0);
        let mut acc_dy = Complex64::new(0.0, 0.0);
        for node in &self.nodes {
            let z = Complex64::from_polar(1.0, node.kx * x);
            let b = Complex64::from_polar(1.0, -alpha * node.kx * node.kx);
            // +/- pair of e^{i kx x}: even part 2 Re z multiplies psi and
            // d/dy; the i kx factor of d/dx collapses to the real -2 kx Im z
            let even = node.cw * 2.0 * z.re;
            let odd = -node.cw * 2.0 * node.kx * z.im;
            acc_psi += even * b;
            acc_dx += odd * b;
            acc_dy += (even * node.ky_rate) * b;
        }
        (acc_psi, acc_dx, acc_dy)
    }

    /// Same sums for an arithmetic node sequence kx_p = s + p h, using one
    /// complex rotation per node for both the carrier e^{i kx x} and the
    /// chirp e^{-i alpha kx^2}. Phases are re-seeded from sin/cos every
    /// `PHASE_REFRESH` pairs; the ratio chain grows error quadratically in
    /// the block length, so short blocks keep the drift near 1e-12.
    fn accumulate_uniform(&self, x: f64, y: f64, step: f64) -> (Complex64, Complex64, Complex64) {
        let alpha = y / (2.0 * self.k);
        let mut acc_psi = Complex64::new(0.0, 0.0);
        let mut acc_dx = Complex64::new(0.0, 0.0);
        let mut acc_dy = Complex64::new(0.0, 0.0);
        if self.nodes.is_empty() {
            return (acc_psi, acc_dx, acc_dy);
        }

        let z_step = Complex64::from_polar(1.0, step * x);
        // chirp ratio advances by a constant factor each node
        let chirp_accel = Complex64::from_polar(1.0, -2.0 * alpha * step * step);

        let mut z = Complex64::new(0.0, 0.0);
        let mut b = Complex64::new(0.0, 0.0);
        let mut chirp_ratio = Complex64::new(0.0, 0.0);

        for (p, node) in self.nodes.iter().enumerate() {
            if p % PHASE_REFRESH == 0 {
                z = Complex64::from_polar(1.0, node.kx * x);
                b = Complex64::from_polar(1.0, -alpha * node.kx * node.kx);
                chirp_ratio =
                    Complex64::from_polar(1.0, -alpha * step * (2.0 * node.kx + step));
            } else {
                z *= z_step;
                b *= chirp_ratio;
                chirp_ratio *= chirp_accel;
            }
            let even = node.cw * 2.0 * z.re;
            let odd = -node.cw * 2.0 * node.kx * z.im;
            acc_psi += even * b;
            acc_dx += odd * b;
            acc_dy += (even * node.ky_rate) * b;
        }
        (acc_psi, acc_dx, acc_dy)
    }
}

/// Anything that can produce field samples in the forward half-plane.
/// Implemented by the quadrature evaluator and the discrete mode sum, so
/// flow-line integration and diagnostics run on either.
pub trait FieldSource: Sync {
    fn wavenumber(&self) -> f64;
    fn field_at(&self, x: f64, y: f64) -> Result<FieldSample>;
}

impl FieldSource for FieldEvaluator {
    fn wavenumber(&self) -> f64 {
        self.k
    }

    fn field_at(&self, x: f64, y: f64) -> Result<FieldSample> {
        self.sample(x, y)
    }
}

impl FieldSource for DiscreteOrders {
    fn wavenumber(&self) -> f64 {
        self.k
    }

    fn field_at(&self, x: f64, y: f64) -> Result<FieldSample> {
        Ok(self.sample(x, y))
    }
}

/// One-shot field evaluation; builds the evaluator on the fly. Hot paths
/// should hold a [`FieldEvaluator`] instead.
pub fn evaluate_field(
    spec: &GratingSpec,
    quad: &QuadratureConfig,
    x: f64,
    y: f64,
) -> Result<FieldSample> {
    FieldEvaluator::new(spec, quad)?.sample(x, y)
}

/// Closed-form propagated field: a sum over slits of Fresnel integrals,
/// equivalent to the untruncated spectral integral. This is the independent
/// oracle for [`FieldEvaluator`]; it shares no code with the quadrature.
pub fn fresnel_oracle(spec: &GratingSpec, x: f64, y: f64) -> Result<Complex64> {
    Ok(fresnel_oracle_sample(spec, x, y)?.psi)
}

/// Oracle field with closed-form derivatives. d/dx reduces to the boundary
/// values of the Fresnel kernel; d/dy follows from the kernel satisfying
/// the paraxial equation exactly (A_y = i A_xx / 2k).
pub fn fresnel_oracle_sample(spec: &GratingSpec, x: f64, y: f64) -> Result<FieldSample> {
    spec.validate()?;
    if y <= 0.0 {
        return Err(Error::NonPositiveDistance { y });
    }
    let k = spec.wavenumber();
    let scale = (k / (std::f64::consts::PI * y)).sqrt();
    let amp = spec.aperture_amplitude();

    // e^{-i pi/4} / sqrt(2): the phase of sqrt(k / 2 pi i y) after pulling
    // out the Fresnel normalization
    let corner =
        Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_PI_4);
    // sqrt(k / 2 pi i y) itself, needed by the derivative terms
    let kernel_norm = Complex64::from_polar(
        (k / (2.0 * std::f64::consts::PI * y)).sqrt(),
        -std::f64::consts::FRAC_PI_4,
    );

    let mut sum_f = Complex64::new(0.0, 0.0);
    let mut sum_edge = Complex64::new(0.0, 0.0);
    let mut sum_edge_slope = Complex64::new(0.0, 0.0);
    for j in 0..spec.num_slits {
        let (a, b) = spec.slit_edges(j);
        let ua = (a - x) * scale;
        let ub = (b - x) * scale;
        sum_f += fresnel_complex(ub) - fresnel_complex(ua);

        let pa = 0.5 * k * (x - a) * (x - a) / y;
        let pb = 0.5 * k * (x - b) * (x - b) / y;
        let ea = Complex64::from_polar(1.0, pa);
        let eb = Complex64::from_polar(1.0, pb);
        sum_edge += ea - eb;
        sum_edge_slope +=
            Complex64::new(0.0, k / y) * ((x - a) * ea - (x - b) * eb);
    }

    let carrier = Complex64::from_polar(1.0, k * y);
    let a_val = corner * amp * sum_f;
    let a_dx = kernel_norm * amp * sum_edge;
    let a_dxx = kernel_norm * amp * sum_edge_slope;
    let a_dy = Complex64::new(0.0, 0.5 / k) * a_dxx;

    Ok(FieldSample {
        psi: carrier * a_val,
        dpsi_dx: carrier * a_dx,
        dpsi_dy: carrier * (Complex64::new(0.0, k) * a_val + a_dy),
        position: (x, y),
    })
}

/// Rectangular probe region with an attached finite-difference step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    /// Central-difference step used on the 5-point cross at each probe.
    pub fd_step: f64,
}

impl DiagnosticGrid {
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            let fy = if self.ny > 1 {
                iy as f64 / (self.ny - 1) as f64
            } else {
                0.5
            };
            let y = self.y_min + fy * (self.y_max - self.y_min);
            for ix in 0..self.nx {
                let fx = if self.nx > 1 {
                    ix as f64 / (self.nx - 1) as f64
                } else {
                    0.5
                };
                pts.push((self.x_min + fx * (self.x_max - self.x_min), y));
            }
        }
        pts
    }
}

/// Maximum over the probe grid of |2ik dA/dy + d2A/dx2| / (k^2 |A|) with
/// A = psi e^{-iky}, all derivatives by central differences with the grid's
/// `fd_step`. The spectral solution satisfies the paraxial equation
/// identically, so this measures pure discretization error and must shrink
/// as O(h^2).
pub fn paraxial_residual(
    spec: &GratingSpec,
    quad: &QuadratureConfig,
    grid: &DiagnosticGrid,
) -> Result<f64> {
    let eval = FieldEvaluator::new(spec, quad)?;
    let k = eval.wavenumber();
    let h = grid.fd_step;
    let envelope = |x: f64, y: f64| -> Result<Complex64> {
        let s = eval.sample(x, y)?;
        Ok(s.psi * Complex64::from_polar(1.0, -k * y))
    };

    let mut worst: f64 = 0.0;
    for (x, y) in grid.points() {
        let a = envelope(x, y)?;
        let ax_p = envelope(x + h, y)?;
        let ax_m = envelope(x - h, y)?;
        let ay_p = envelope(x, y + h)?;
        let ay_m = envelope(x, y - h)?;

        let da_dy = (ay_p - ay_m) / (2.0 * h);
        let d2a_dx2 = (ax_p - 2.0 * a + ax_m) / (h * h);
        let residual = (Complex64::new(0.0, 2.0 * k) * da_dy + d2a_dx2).norm();
        worst = worst.max(residual / (k * k * a.norm()));
    }
    Ok(worst)
}

/// Idealized infinite-grating field: a finite sum of discrete diffraction
/// orders kx_n = 2 pi n / d with the same propagation phase law as the
/// integral. Used for Talbot-revival properties and plane-wave limits; the
/// overall normalization is arbitrary.
#[derive(Debug, Clone)]
pub struct DiscreteOrders {
    k: f64,
    modes: Vec<(f64, f64)>,
}

impl DiscreteOrders {
    /// Orders n in [-n_max, n_max] weighted by the spectral amplitude.
    pub fn from_grating(spec: &GratingSpec, n_max: usize) -> Self {
        let d = spec.period;
        let modes = (-(n_max as i64)..=n_max as i64)
            .map(|n| {
                let kx = 2.0 * std::f64::consts::PI * n as f64 / d;
                (kx, spectral_amplitude(spec, kx))
            })
            .collect();
        DiscreteOrders {
            k: spec.wavenumber(),
            modes,
        }
    }

    /// A single forward mode: psi = e^{iky}.
    pub fn plane_wave(k: f64) -> Self {
        DiscreteOrders {
            k,
            modes: vec![(0.0, 1.0)],
        }
    }

    pub fn new(k: f64, modes: Vec<(f64, f64)>) -> Self {
        DiscreteOrders { k, modes }
    }

    pub fn sample(&self, x: f64, y: f64) -> FieldSample {
        let mut psi = Complex64::new(0.0, 0.0);
        let mut dx = Complex64::new(0.0, 0.0);
        let mut dy = Complex64::new(0.0, 0.0);
        for &(kx, a) in &self.modes {
            let rate = self.k - kx * kx / (2.0 * self.k);
            let phase = Complex64::from_polar(1.0, kx * x + rate * y);
            psi += a * phase;
            dx += a * Complex64::new(0.0, kx) * phase;
            dy += a * Complex64::new(0.0, rate) * phase;
        }
        FieldSample {
            psi,
            dpsi_dx: dx,
            dpsi_dy: dy,
            position: (x, y),
        }
    }
}
