//! The closed-form windowed Gaussian Fourier factor against direct adaptive
//! quadrature of its defining integral.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stokes_core::model::{
    windowed_gaussian_fourier, windowed_gaussian_fourier_quadrature, INFINITE_BEAM,
};

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

#[test]
fn closed_form_matches_quadrature_on_random_tuples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let edge = 1.0;
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let a = log_uniform(&mut rng, 1e-6, 1e2) * edge;
        let q = if i % 10 == 0 { 0.0 } else { log_uniform(&mut rng, 1e-3, 1e5) / edge };
        let c = rng.gen_range(-0.5..0.5) * edge;
        let w = if rng.gen_bool(0.3) { INFINITE_BEAM } else { log_uniform(&mut rng, 1e-2, 1e2) * edge };
        let closed = windowed_gaussian_fourier(c, q, a, w, edge).unwrap();
        let quad = windowed_gaussian_fourier_quadrature(c, q, a, w, edge).unwrap();
        let err = (closed - quad).norm();
        let ok = err <= 1e-8 * quad.norm() || err <= 1e-12;
        worst = worst.max(err / quad.norm().max(1e-4));
        assert!(ok, "A={a} q={q} c={c} w={w}: {closed} vs {quad}");
    }
    println!("worst scaled error {worst:e}");
}
