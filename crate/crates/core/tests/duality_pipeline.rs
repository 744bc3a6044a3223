use cocycle_core::arithmetic::AlphaSpec;
use cocycle_core::cocycle::schrodinger;
use cocycle_core::duality::{duality_at, rotation_residual, run_duality, DualityConfig};

fn golden() -> f64 {
    AlphaSpec::golden().approx()
}

#[test]
fn amo_subcritical_residual_small_and_shrinking() {
    let cfg = DualityConfig::almost_mathieu(0.5, golden(), 200);
    let best = run_duality(&cfg).unwrap();
    eprintln!("K=200 {:?}", best.summary());
    assert!(best.residual <= 1e-3);

    let mut wide = cfg.clone();
    wide.half_width = 400;
    wide.e0 = best.eigen.energy;
    let refined = duality_at(&wide, best.eigen.theta).unwrap();
    eprintln!("K=400 {:?}", refined.summary());
    assert!(refined.residual < best.residual);

    for i in 0..4096 {
        let x = i as f64 / 4096.0;
        assert!(best.w.det_b(x).re.abs() <= 1e-10);
        assert!((best.w.eval(x).det() - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn residual_stable_under_grid_refinement() {
    let cfg = DualityConfig::almost_mathieu(0.5, golden(), 100);
    let out = run_duality(&DualityConfig { theta_grid: 41, ..cfg }).unwrap();
    let c = schrodinger(golden(), out.eigen.potential.clone(), out.eigen.energy);
    let coarse = rotation_residual(&c, &out.w, 1024);
    let fine = rotation_residual(&c, &out.w, 2048);
    assert!((fine - coarse).abs() <= 0.1 * fine.max(coarse), "{coarse} vs {fine}");
}
