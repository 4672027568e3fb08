//! Complex error function against 60-digit mpmath tables
//! (see `oracles/gen_cerf_fixtures.py`).

use stokes_core::cerf::{erf, erf_real, faddeeva, Complex64};

fn load(name: &str) -> Vec<Vec<f64>> {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
        .collect()
}

fn rel(got: Complex64, want: Complex64) -> f64 {
    (got - want).norm() / want.norm()
}

#[test]
fn faddeeva_and_erf_match_reference() {
    let rows = load("cerf_reference.csv");
    assert_eq!(rows.len(), 10_000);
    let (mut worst_w, mut worst_erf) = (0.0f64, 0.0f64);
    for r in &rows {
        let z = Complex64::new(r[0], r[1]);
        let ew = rel(faddeeva(z), Complex64::new(r[2], r[3]));
        let ee = rel(erf(z), Complex64::new(r[4], r[5]));
        assert!(ew <= 1e-12, "w({z}): rel err {ew:e}");
        assert!(ee <= 1e-12, "erf({z}): rel err {ee:e}");
        worst_w = worst_w.max(ew);
        worst_erf = worst_erf.max(ee);
    }
    println!("worst relative error: w {worst_w:e}, erf {worst_erf:e}");
}

#[test]
fn erf_on_the_real_axis() {
    for r in load("erf_real_reference.csv") {
        let (x, want) = (r[0], r[1]);
        let got = erf(Complex64::new(x, 0.0));
        assert!(got.im.abs() <= 1e-14);
        let err = if want == 0.0 { got.re.abs() } else { ((got.re - want) / want).abs() };
        assert!(err <= 1e-13, "erf({x}) = {} vs {want}", got.re);
        assert_eq!(erf_real(x), got.re);
    }
}

#[test]
fn faddeeva_times_gaussian_is_erfc() {
    for r in load("erfc_identity_reference.csv") {
        let z = Complex64::new(r[0], r[1]);
        let lhs = faddeeva(z) * (z * z).exp();
        let want = Complex64::new(r[2], r[3]);
        assert!(rel(lhs, want) <= 1e-12, "z = {z}: {lhs} vs {want}");
    }
}
