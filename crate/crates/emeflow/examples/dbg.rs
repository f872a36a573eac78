// scratch: criterion 4b and 5 pre-verification
use emeflow::ensemble::*;
use emeflow::flowline::*;
use emeflow::poynting::Polarization;
use emeflow::quadrature::{QuadratureConfig, Scheme};
use emeflow::spectrum::GratingSpec;
use emeflow::wavefield::FieldEvaluator;
use std::time::Instant;

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0; let mut va = 0.0; let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

fn main() {
    // --- criterion 4b: N = 5 density correlation at y = L_T
    let g = GratingSpec::ronchi(5, 10e-6, 500e-9).unwrap();
    let lt = g.talbot_distance();
    let k = g.wavenumber();
    let quad = QuadratureConfig { num_nodes: 2048, kx_max: 0.3 * k, scheme: Scheme::UniformTrapezoid };
    let eval = FieldEvaluator::new(&g, &quad).unwrap();
    let pol = Polarization::h_polarized();
    let mut cfg = IntegratorConfig::defaults_for(&g, lt);
    cfg.max_step = 0.5 * g.period;
    {
        let field = FlowField::new(&eval, pol).unwrap();
        resolve_stagnation_floor(&mut cfg, &field, &g).unwrap();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let t0 = Instant::now();
    // uniform fan over each slit, 1000 per slit
    let mut launches = Vec::new();
    for j in 0..5 {
        let (lo, hi) = g.slit_edges(j);
        for i in 0..1000 {
            launches.push(lo + (hi - lo) * (i as f64 + 0.5) / 1000.0);
        }
    }
    let arrivals = pool.install(|| transport_launches(&g, &eval, &pol, &cfg, &launches).unwrap());
    println!("4b transport: {:.1}s, reached {}", t0.elapsed().as_secs_f64(),
        arrivals.iter().filter(|(t, _)| *t == Termination::ReachedTargetY).count());
    let req = HistogramRequest { n_photons: launches.len() as u64, seed: RngSeed(0), y_observation: lt, bin_width: 8.0 * g.period / 50.0, window_half_width: 4.0 * g.period };
    let hist = bin_arrivals(&arrivals, &req);
    let masses = reference_bin_masses(&eval, lt, &hist.bin_edges).unwrap();
    let counts: Vec<f64> = hist.normalized();
    println!("4b: bins {}, r = {:.4}, TV = {:.4}", counts.len(), pearson(&counts, &masses), tv_distance(&counts, &masses));

    // --- criterion 5: N = 2, 200 trajectories
    let g2 = GratingSpec::ronchi(2, 10e-6, 500e-9).unwrap();
    let quad2 = QuadratureConfig { num_nodes: 2048, kx_max: 0.3 * g2.wavenumber(), scheme: Scheme::UniformTrapezoid };
    let eval2 = FieldEvaluator::new(&g2, &quad2).unwrap();
    let mut cfg2 = IntegratorConfig::defaults_for(&g2, 4.3 * g2.talbot_distance());
    cfg2.max_step = 0.5 * g2.period;
    {
        let field = FlowField::new(&eval2, pol).unwrap();
        resolve_stagnation_floor(&mut cfg2, &field, &g2).unwrap();
    }
    let mut launches2 = Vec::new();
    for j in 0..2 {
        let (lo, hi) = g2.slit_edges(j);
        for i in 0..100 {
            launches2.push(lo + (hi - lo) * (i as f64 + 0.5) / 100.0);
        }
    }
    let t0 = Instant::now();
    let bundle = pool.install(|| trajectory_bundle(&g2, &quad2, &pol, &cfg2, &launches2).unwrap());
    println!("5: bundle {:.1}s", t0.elapsed().as_secs_f64());
    let reached: Vec<_> = bundle.iter().filter(|t| t.termination == Termination::ReachedTargetY).collect();
    println!("5: reached {}/200", reached.len());
    let mut violations = 0;
    let tol = 10.0 * cfg2.rel_tol * g2.period;
    for w in reached.windows(2) {
        if w[1].endpoint().0 <= w[0].endpoint().0 - tol { violations += 1; }
    }
    println!("5: order violations {violations}");
    // mirror check
    let x0 = launches2[137];
    let a = integrate_trajectory(&g2, &quad2, &pol, &cfg2, x0).unwrap();
    let b = integrate_trajectory(&g2, &quad2, &pol, &cfg2, -x0).unwrap();
    let dev = a.points.iter().zip(b.points.iter()).map(|(p, q)| (p.0 + q.0).abs()).fold(0.0f64, f64::max);
    println!("5: mirror max |x + x~| = {dev:.3e} (tol {tol:.3e})");
    // rel_tol halving endpoint shift
    let e1 = integrate_trajectory(&g2, &quad2, &pol, &cfg2, x0).unwrap().endpoint().0;
    let mut cfg_half = cfg2; cfg_half.rel_tol /= 2.0;
    let e2 = integrate_trajectory(&g2, &quad2, &pol, &cfg_half, x0).unwrap().endpoint().0;
    println!("5: endpoint shift on rel_tol halving = {:.3e} d", (e1 - e2).abs() / g2.period);
}
