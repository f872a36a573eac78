//! Grating geometry and the spectral amplitude of the boundary field.
//!
//! The grating has `num_slits` apertures of width `slit_width` on a pitch
//! `period`, centered so the pattern is symmetric about x = 0. The boundary
//! field is 1/sqrt(N delta) inside the slits and 0 outside, which makes
//! |psi|^2 integrate to one over the grating plane. Its Fourier amplitude
//! has the closed form
//!
//!   c(kx) = sqrt(delta / (2 pi N)) * sinc(kx delta / 2) * D_N(kx d / 2)
//!
//! with the Dirichlet kernel D_N(v) = sin(N v) / sin(v) continued through
//! its removable singularities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of an N-slit amplitude grating and the incident wavelength.
/// All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub num_slits: usize,
    #[serde(rename = "period_m")]
    pub period: f64,
    #[serde(rename = "slit_width_m")]
    pub slit_width: f64,
    #[serde(rename = "wavelength_m")]
    pub wavelength: f64,
}

impl GratingSpec {
    pub fn new(num_slits: usize, period: f64, slit_width: f64, wavelength: f64) -> Result<Self> {
        let spec = GratingSpec {
            num_slits,
            period,
            slit_width,
            wavelength,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Ronchi grating: slit width equal to half the period.
    pub fn ronchi(num_slits: usize, period: f64, wavelength: f64) -> Result<Self> {
        Self::new(num_slits, period, 0.5 * period, wavelength)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_slits < 1 {
            return Err(Error::invalid("num_slits", "must be at least 1"));
        }
        if !(self.period > 0.0) {
            return Err(Error::invalid("period_m", "must be positive"));
        }
        if !(self.slit_width > 0.0) || self.slit_width > self.period {
            return Err(Error::invalid(
                "slit_width_m",
                format!(
                    "must satisfy 0 < slit_width <= period, got {} vs period {}",
                    self.slit_width, self.period
                ),
            ));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::invalid("wavelength_m", "must be positive"));
        }
        Ok(())
    }

    /// k = 2 pi / lambda.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    /// Talbot distance L_T = d^2 / lambda, the longitudinal self-imaging
    /// period of the grating.
    pub fn talbot_distance(&self) -> f64 {
        self.period * self.period / self.wavelength
    }

    /// The paraxial treatment assumes the period is large against the
    /// wavelength; below 5 lambda the approximation degrades noticeably.
    pub fn is_paraxial(&self) -> bool {
        self.period >= 5.0 * self.wavelength
    }

    /// Center of slit j (0-based), symmetric about x = 0.
    pub fn slit_center(&self, j: usize) -> f64 {
        debug_assert!(j < self.num_slits);
        (j as f64 + 1.0 - 0.5 * (self.num_slits as f64 + 1.0)) * self.period
    }

    /// (left edge, right edge) of slit j.
    pub fn slit_edges(&self, j: usize) -> (f64, f64) {
        let c = self.slit_center(j);
        (c - 0.5 * self.slit_width, c + 0.5 * self.slit_width)
    }

    /// Whether x falls inside one of the slit apertures (edges inclusive).
    pub fn inside_aperture(&self, x: f64) -> bool {
        (0..self.num_slits).any(|j| {
            let (lo, hi) = self.slit_edges(j);
            x >= lo && x <= hi
        })
    }

    /// Value of the normalized boundary field inside the slits.
    pub fn aperture_amplitude(&self) -> f64 {
        1.0 / (self.num_slits as f64 * self.slit_width).sqrt()
    }
}

/// Normalized boundary field psi(x, 0): `aperture_amplitude` inside any
/// slit, zero outside.
pub fn aperture_field(spec: &GratingSpec, x: f64) -> f64 {
    if spec.inside_aperture(x) {
        spec.aperture_amplitude()
    } else {
        0.0
    }
}

/// sin(u)/u continued by 1 at u = 0.
fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Dirichlet kernel sin(N v)/sin(v), continued by N cos(N v)/cos(v) where
/// sin(v) vanishes (giving the limit value +/- N at v = m pi).
fn dirichlet(n: usize, v: f64) -> f64 {
    let nf = n as f64;
    let s = v.sin();
    if s.abs() > 1e-8 {
        (nf * v).sin() / s
    } else {
        nf * (nf * v).cos() / v.cos()
    }
}

/// Spectral amplitude c(kx) of the normalized boundary field. Real, even,
/// and finite for every kx.
pub fn spectral_amplitude(spec: &GratingSpec, kx: f64) -> f64 {
    let n = spec.num_slits;
    let envelope = sinc(0.5 * kx.abs() * spec.slit_width);
    let comb = dirichlet(n, 0.5 * kx.abs() * spec.period);
    (spec.slit_width / (2.0 * std::f64::consts::PI * n as f64)).sqrt() * envelope * comb
}

/// The spectral amplitude together with its truncation window, as consumed
/// by the field evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAmplitude {
    pub grating: GratingSpec,
    pub kx_max: f64,
}

impl SpectralAmplitude {
    pub fn new(grating: GratingSpec, kx_max: f64) -> Result<Self> {
        if !(kx_max > 0.0) || kx_max >= grating.wavenumber() {
            return Err(Error::invalid(
                "kx_max",
                format!(
                    "must satisfy 0 < kx_max < k = {:.6e}, got {:.6e}",
                    grating.wavenumber(),
                    kx_max
                ),
            ));
        }
        Ok(SpectralAmplitude { grating, kx_max })
    }

    pub fn eval(&self, kx: f64) -> f64 {
        spectral_amplitude(&self.grating, kx)
    }

    /// Fraction of the boundary-field norm carried inside the truncation
    /// window (Parseval integral of c^2, trapezoid on a fine grid).
    pub fn captured_energy(&self, samples: usize) -> f64 {
        let h = 2.0 * self.kx_max / (samples - 1) as f64;
        let mut sum = 0.0;
        for i in 0..samples {
            let kx = -self.kx_max + i as f64 * h;
            let c = self.eval(kx);
            let w = if i == 0 || i == samples - 1 { 0.5 } else { 1.0 };
            sum += w * c * c;
        }
        sum * h
    }
}

/// Maximum deviation over `kx_grid` between the closed-form spectral
/// amplitude and a direct numerical Fourier transform of the boundary
/// field (midpoint rule per slit). Grid-resolution error shows up in the
/// returned value rather than as a failure.
pub fn verify_transform_pair(spec: &GratingSpec, kx_grid: &[f64]) -> f64 {
    const SAMPLES_PER_SLIT: usize = 8192;
    let amp = spec.aperture_amplitude();
    let h = spec.slit_width / SAMPLES_PER_SLIT as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();

    let mut max_err: f64 = 0.0;
    for &kx in kx_grid {
        // real part of int psi(x,0) exp(-i kx x) dx; the imaginary part
        // vanishes by symmetry and is dropped in the comparison
        let mut integral = 0.0;
        for j in 0..spec.num_slits {
            let (lo, _) = spec.slit_edges(j);
            for m in 0..SAMPLES_PER_SLIT {
                let x = lo + (m as f64 + 0.5) * h;
                integral += (kx * x).cos();
            }
        }
        integral *= amp * h * norm;
        let err = (integral - spectral_amplitude(spec, kx)).abs();
        max_err = max_err.max(err);
    }
    max_err
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig_grating(n: usize) -> GratingSpec {
        // lambda = 500 nm, d = 20 lambda, Ronchi
        GratingSpec::ronchi(n, 10e-6, 500e-9).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GratingSpec::new(0, 1e-5, 5e-6, 5e-7).is_err());
        assert!(GratingSpec::new(2, 1e-5, 2e-5, 5e-7).is_err());
        assert!(GratingSpec::new(2, 1e-5, 0.0, 5e-7).is_err());
        assert!(GratingSpec::new(2, 1e-5, 5e-6, -1.0).is_err());
    }

    #[test]
    fn derived_scales() {
        let g = fig_grating(5);
        assert!((g.wavenumber() - 2.0 * std::f64::consts::PI / 500e-9).abs() < 1.0);
        assert!((g.talbot_distance() - 200e-6).abs() < 1e-12);
        assert!(g.is_paraxial());
        let narrow = GratingSpec::ronchi(2, 1e-6, 500e-9).unwrap();
        assert!(!narrow.is_paraxial());
    }

    #[test]
    fn slit_centers_are_symmetric() {
        let g = fig_grating(5);
        assert_eq!(g.slit_center(2), 0.0);
        assert_eq!(g.slit_center(0), -g.slit_center(4));
        let g2 = fig_grating(2);
        assert_eq!(g2.slit_center(0), -5e-6);
        assert_eq!(g2.slit_center(1), 5e-6);
    }

    #[test]
    fn amplitude_at_zero_is_sqrt_n_delta_over_2pi() {
        for n in [1usize, 2, 5, 30] {
            let g = fig_grating(n);
            let expect = (n as f64 * g.slit_width / (2.0 * std::f64::consts::PI)).sqrt();
            assert!((spectral_amplitude(&g, 0.0) - expect).abs() < 1e-15 * expect);
        }
    }

    #[test]
    fn single_slit_first_minimum() {
        let g = fig_grating(1);
        let kx = 2.0 * std::f64::consts::PI / g.slit_width;
        assert!(spectral_amplitude(&g, kx).abs() < 1e-18);
    }

    #[test]
    fn ronchi_second_order_coincides_with_diffraction_minimum() {
        // two slits, d = 2 delta: the kx d = 4 pi interference order sits on
        // the first zero of the single-slit envelope
        let g = fig_grating(2);
        let kx = 4.0 * std::f64::consts::PI / g.period;
        assert!(spectral_amplitude(&g, kx).abs() < 1e-18);
    }

    /// Oracle for the Dirichlet-kernel limit: approach v = m pi with a
    /// shrinking offset and difference-quotient the raw ratio.
    fn dirichlet_limit_oracle(n: usize, m: i32) -> f64 {
        let v0 = m as f64 * std::f64::consts::PI;
        let mut estimates = Vec::new();
        for &eps in &[1e-3, 1e-4, 1e-5] {
            let nf = n as f64;
            let raw = |v: f64| (nf * v).sin() / v.sin();
            estimates.push(0.5 * (raw(v0 + eps) + raw(v0 - eps)));
        }
        // Richardson: the even-symmetric average converges as eps^2
        let e0 = estimates[0];
        let e1 = estimates[1];
        let e2 = estimates[2];
        assert!((e1 - e2).abs() < (e0 - e1).abs() + 1e-9);
        e2
    }

    #[test]
    fn interference_orders_reach_plus_minus_n() {
        // at kx = 2 pi m / d the comb factor equals N (-1)^{m (N-1)}
        for n in [2usize, 3, 5] {
            for m in 1..=3i32 {
                let oracle = dirichlet_limit_oracle(n, m);
                let g = fig_grating(n);
                let kx = 2.0 * std::f64::consts::PI * m as f64 / g.period;
                let envelope = sinc(0.5 * kx * g.slit_width);
                let expect =
                    (g.slit_width / (2.0 * std::f64::consts::PI * n as f64)).sqrt() * oracle * envelope;
                let got = spectral_amplitude(&g, kx);
                // the oracle itself converges as eps^2 ~ 1e-10 relative
                assert!(
                    (got - expect).abs() < 1e-8 * expect.abs() + 1e-15,
                    "N={n} m={m}: got {got}, oracle {expect}"
                );
                let sign = if (m as usize * (n - 1)) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((oracle - sign * n as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn continuity_at_removable_singularities() {
        let g = fig_grating(5);
        let scale = spectral_amplitude(&g, 0.0);
        for m in 1..=3i32 {
            let kx0 = 2.0 * std::f64::consts::PI * m as f64 / g.period;
            let at = spectral_amplitude(&g, kx0);
            for eps_scale in [1e-6, 1e-8] {
                let eps = eps_scale / g.period;
                let near = spectral_amplitude(&g, kx0 + eps);
                assert!(
                    (near - at).abs() < 1e-5 * scale,
                    "m={m} eps={eps_scale}: {near} vs {at}"
                );
            }
        }
    }

    #[test]
    fn aperture_field_values() {
        let g = fig_grating(5);
        let amp = g.aperture_amplitude();
        // slit centered at the origin for odd N
        assert_eq!(aperture_field(&g, 0.0), amp);
        let g2 = fig_grating(2);
        assert_eq!(aperture_field(&g2, 10.0 * g2.period), 0.0);
        // between the two slits of an even grating
        assert_eq!(aperture_field(&g2, 0.0), 0.0);
        assert_eq!(aperture_field(&g2, 5e-6), g2.aperture_amplitude());
    }

    #[test]
    fn aperture_field_normalizes_per_slit() {
        let g = fig_grating(3);
        // integral of psi^2 over one slit = width * 1/(N width) = 1/N
        let per_slit = g.slit_width * g.aperture_amplitude().powi(2);
        assert!((per_slit - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn transform_pair_single_slit() {
        let g = fig_grating(1);
        let kx_max = QuadCheck::kx_max(&g);
        let grid: Vec<f64> = (0..101)
            .map(|i| -kx_max + 2.0 * kx_max * i as f64 / 100.0)
            .collect();
        let err = verify_transform_pair(&g, &grid);
        let scale = spectral_amplitude(&g, 0.0);
        assert!(err < 1e-6 * scale.max(1.0), "err = {err:.3e}");
    }

    #[test]
    fn transform_pair_five_slits() {
        let g = fig_grating(5);
        let kx_max = QuadCheck::kx_max(&g);
        let grid: Vec<f64> = (0..257)
            .map(|i| -kx_max + 2.0 * kx_max * i as f64 / 256.0)
            .collect();
        let err = verify_transform_pair(&g, &grid);
        assert!(err < 1e-6, "err = {err:.3e}");
    }

    #[test]
    fn wide_slit_degenerates_to_sinc_envelope() {
        // delta -> d: one slit of full period width
        let g = GratingSpec::new(1, 10e-6, 10e-6, 500e-9).unwrap();
        for i in 0..50 {
            let kx = i as f64 * 5e4;
            let expect = (g.slit_width / (2.0 * std::f64::consts::PI)).sqrt()
                * sinc(0.5 * kx * g.slit_width);
            assert!((spectral_amplitude(&g, kx) - expect).abs() < 1e-12 * expect.abs().max(1e-3));
        }
    }

    struct QuadCheck;
    impl QuadCheck {
        fn kx_max(g: &GratingSpec) -> f64 {
            (0.2 * g.wavenumber()).min(40.0 * std::f64::consts::PI / g.period)
        }
    }

    #[test]
    fn parseval_energy_is_bounded_and_grows() {
        let g = fig_grating(5);
        let k = g.wavenumber();
        let narrow = SpectralAmplitude::new(g, 0.1 * k).unwrap();
        let wide = SpectralAmplitude::new(g, 0.8 * k).unwrap();
        let e_narrow = narrow.captured_energy(200_001);
        let e_wide = wide.captured_energy(200_001);
        assert!(e_narrow <= 1.0 + 1e-9);
        assert!(e_wide <= 1.0 + 1e-9);
        assert!(e_wide > e_narrow);
        assert!(e_wide > 0.95, "most energy inside 0.8 k, got {e_wide}");
    }

    proptest! {
        #[test]
        fn evenness_is_exact(kx in -1e7f64..1e7, n in 1usize..8) {
            let g = fig_grating(n);
            prop_assert_eq!(spectral_amplitude(&g, kx), spectral_amplitude(&g, -kx));
        }

        #[test]
        fn amplitude_is_finite_everywhere(kx in -5e7f64..5e7) {
            let g = fig_grating(5);
            let c = spectral_amplitude(&g, kx);
            prop_assert!(c.is_finite());
            prop_assert!(c.abs() <= spectral_amplitude(&g, 0.0) * 1.0000001);
        }

        #[test]
        fn aperture_indicator_is_even(x in -5e-5f64..5e-5, n in 1usize..6) {
            let g = fig_grating(n);
            prop_assert_eq!(aperture_field(&g, x), aperture_field(&g, -x));
        }
    }
}
