use eprlab_core::protocols::discriminator::{run_discriminator, DiscriminatorConfig};
use eprlab_core::protocols::GridSpec;
use eprlab_core::{spread_law, Aperture, EprParams, ParaxialGeometry, PhysicalConstants};

fn config(epr: EprParams, grid: GridSpec, delays: Vec<f64>) -> DiscriminatorConfig {
    DiscriminatorConfig {
        constants: PhysicalConstants::default(),
        grid,
        epr,
        slit: Aperture::tophat(0.0, 1.0).unwrap(),
        measurement_time: 0.0,
        delays,
        geometry: ParaxialGeometry::new(100.0, 0.0).unwrap(),
    }
}

#[test]
fn collapse_packet_spreads_like_a_free_packet() {
    // The unconditioned marginal reaches the edge of [-40, 40) by tau = 1, so
    // the domain is doubled at the same spacing.
    let grid = GridSpec {
        n: 2048,
        x_min: -80.0,
        x_max: 80.0,
    };
    let cfg = config(EprParams::new(0.1, 10.0).unwrap(), grid, vec![0.5, 1.0]);
    let r = run_discriminator(&cfg).unwrap();
    for p in &r.points {
        let expected = spread_law(0.5, p.delay, 1.0, 1.0).unwrap();
        let got = p.m1.dispersion.std_x;
        assert!(
            (got - expected).abs() / expected <= 5e-3,
            "{}: {got} vs {expected}",
            p.delay
        );
    }
}

#[test]
fn separable_source_gives_identical_m2_and_m3() {
    let cfg = config(
        EprParams::new(2.0, 2.0).unwrap(),
        GridSpec::default(),
        vec![0.0, 0.5, 1.0],
    );
    for p in &run_discriminator(&cfg).unwrap().points {
        assert!(p.m2_m3_min_fidelity >= 1.0 - 1e-9, "{}", p.m2_m3_min_fidelity);
    }
}
