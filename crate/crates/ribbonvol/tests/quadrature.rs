//! Monte Carlo integrals over the moduli space and divergence probes.

use ribbonvol::quadrature::{b11_integral, b11_special, divergence_probe, mc_integral, IntegralEstimate, Sampling};
use ribbonvol::scalar::{int, ratio};

fn agree(a: &IntegralEstimate, b: &IntegralEstimate, factor: f64) -> bool {
    let sigma = (a.std_error.powi(2) + (factor * b.std_error).powi(2)).sqrt();
    // The floor covers zero-variance estimates, which differ only by rounding.
    (a.value - factor * b.value).abs() <= 4.0 * sigma + 1e-12 * a.value.abs()
}

#[test]
fn torus_integral_matches_the_one_dimensional_reduction() {
    for s in [0.5, 1.0, 1.5] {
        let est = mc_integral(1, 1, &[int(6)], s, 200_000, 1, Sampling::Stratified).unwrap();
        let exact = b11_integral(6.0, s).unwrap();
        assert!((est.value - exact).abs() <= 4.0 * est.std_error, "s={s}: {} vs {exact}", est.value);
        assert!(!est.divergent);
    }
    assert!((b11_special(1.0).unwrap() - std::f64::consts::PI.powi(2) / 4.0).abs() < 1e-9);
}

#[test]
fn seeds_reproduce_and_agree() {
    let l = [int(4), int(6)];
    let a = mc_integral(1, 2, &l, 0.5, 50_000, 3, Sampling::Stratified).unwrap();
    let b = mc_integral(1, 2, &l, 0.5, 50_000, 3, Sampling::Stratified).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let c = mc_integral(1, 2, &l, 0.5, 50_000, 4, Sampling::Stratified).unwrap();
    assert!(agree(&a, &c, 1.0), "{} vs {}", a.value, c.value);
}

#[test]
fn integral_scales_with_the_boundary() {
    // Degree -4 integrand on a 4-dimensional cell.
    let s = 0.5;
    let small = mc_integral(1, 2, &[int(4), int(6)], s, 100_000, 5, Sampling::Stratified).unwrap();
    let large = mc_integral(1, 2, &[int(8), int(12)], s, 100_000, 6, Sampling::Stratified).unwrap();
    let factor = 2f64.powf(4.0 - 4.0 * s);
    assert!(agree(&large, &small, factor), "{} vs {}", large.value, factor * small.value);
}

#[test]
fn sampling_modes_agree() {
    let l = [ratio(7, 2), int(6)];
    for s in [0.0, 0.5] {
        let strat = mc_integral(1, 2, &l, s, 100_000, 7, Sampling::Stratified).unwrap();
        let boxed = mc_integral(1, 2, &l, s, 400_000, 8, Sampling::BoundingBox).unwrap();
        let uniform = mc_integral(1, 2, &l, s, 100_000, 9, Sampling::Uniform).unwrap();
        assert!(agree(&strat, &boxed, 1.0), "s={s}: {} vs {}", strat.value, boxed.value);
        assert!(agree(&strat, &uniform, 1.0), "s={s}: {} vs {}", strat.value, uniform.value);
    }
}

#[test]
fn divergence_is_flagged_at_the_threshold() {
    assert!(mc_integral(1, 1, &[int(6)], 2.5, 1000, 0, Sampling::Stratified).unwrap().divergent);
    let at = divergence_probe(1, 1, &[int(6)], 2.0, 24).unwrap();
    assert!(at.diverging, "ratio {}", at.shell_ratio);
    let below = divergence_probe(1, 1, &[int(6)], 1.75, 24).unwrap();
    assert!(!below.diverging, "ratio {}", below.shell_ratio);
    let l = [int(4), int(7)];
    let at = divergence_probe(1, 2, &l, 4.0 / 3.0, 24).unwrap();
    assert!(at.diverging, "ratio {}", at.shell_ratio);
    let below = divergence_probe(1, 2, &l, 0.875 * 4.0 / 3.0, 24).unwrap();
    assert!(!below.diverging, "ratio {}", below.shell_ratio);
    assert!(below.values.windows(2).all(|w| w[1] >= w[0]));
}
