use super::*;
use crate::analysis::{real_error_metrics, SampleSet};
use crate::topology::TreeRegistry;

fn tree(name: &str, n: usize, l: usize) -> LabeledTree {
    TreeRegistry::builtin().build(name, n, l).unwrap()
}

#[test]
#[ignore = "rewrites the shipped data file"]
fn regenerate_planewave_table() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/planewaves.csv");
    std::fs::write(path, planewave_table(PLANEWAVE_SEED, PLANEWAVE_TERMS)).unwrap();
}

#[test]
fn shipped_planewave_table_matches_its_seed() {
    assert_eq!(PLANEWAVE_TABLE, planewave_table(PLANEWAVE_SEED, PLANEWAVE_TERMS));
    let waves = PlaneWaves::fixed();
    assert_eq!(waves.k.len(), PLANEWAVE_TERMS);
}

#[test]
fn planewave_table_rejects_short_rows() {
    assert!(PlaneWaves::from_table("j,kx,ky,kz\n1,0.5,0.1\n").is_err());
    assert!(PlaneWaves::from_table("1,0.5,x,0.2\n").is_err());
}

#[test]
fn laguerre_coefficients_agree_with_recurrence() {
    let lag = Laguerre::default();
    let spec = PolynomialSpec::new(lag.coefficients(), 1);
    for i in 0..50 {
        let x = i as f64 / 50.0;
        assert!((spec.eval(x) - lag.eval(x)).abs() < 1e-10, "x = {x}");
    }
    // L_2(x) = 1 - 2x + x^2 / 2
    let l2 = Laguerre { n: 2 };
    assert_eq!(l2.coefficients(), vec![1.0, -2.0, 0.5]);
    assert!((l2.eval(0.3) - (1.0 - 0.6 + 0.045)).abs() < 1e-15);
}

#[test]
fn laguerre_network_is_exact() {
    let lag = Laguerre::default();
    let t = tree("binary-tree", 1, 12);
    let net = lag.exact_network(&t).unwrap().unwrap();
    assert_eq!(net.max_bond(), 41);
    let samples = SampleSet::for_tree(&t, 300, 1);
    let err = real_error_metrics(&net, &TargetFunction(&lag), &samples).unwrap();
    assert!(err.sup < 1e-9, "{err:?}");
}

#[test]
fn weierstrass_network_is_exact() {
    let w = Weierstrass::default();
    let t = tree("path-sequential", 1, 16);
    let net = w.exact_network(&t).unwrap().unwrap();
    assert_eq!(net.kind(), crate::scalar::ScalarKind::Real);
    assert_eq!(net.max_bond(), 50);
    let samples = SampleSet::for_tree(&t, 500, 2);
    let err = real_error_metrics(&net, &TargetFunction(&w), &samples).unwrap();
    assert!(err.sup < 1e-12, "{err:?}");
}

#[test]
fn planewaves_are_exact_with_thirty_terms() {
    let pw = PlaneWaves::fixed();
    for name in ["comb", "path-interleaved"] {
        let t = tree(name, 3, 8);
        let net = pw.exact_network(&t).unwrap().unwrap();
        assert_eq!(net.max_bond(), 30);
        let samples = SampleSet::for_tree(&t, 300, 3);
        let err = real_error_metrics(&net, &TargetFunction(&pw), &samples).unwrap();
        assert!(err.sup < 1e-10, "{name}: {err:?}");
    }
}

#[test]
fn wrong_variable_count_is_rejected() {
    let t = tree("comb", 2, 4);
    assert!(PlaneWaves::fixed().exact_network(&t).unwrap().is_err());
    assert!(Laguerre::default().exact_network(&t).unwrap().is_err());
}

#[test]
fn multinormal_peaks_at_the_mean() {
    let m = Multinormal::fixed();
    assert_eq!(m.value(&[0.5, 0.5, 0.5]), 1.0);
    let off = m.value(&[0.6, 0.5, 0.5]);
    // one unit along x: exp(-P_xx)
    let p = m.covariance.try_inverse().unwrap();
    assert!((off - (-p[(0, 0)]).exp()).abs() < 1e-14);
    assert!(m.exact_network(&tree("comb", 3, 4)).is_none());
    let meta = m.metadata();
    assert!(meta.iter().any(|(k, v)| k == "domain_map" && v == "r = 0 + 10 * x"));
}

#[test]
fn multinormal_rejects_bad_covariance() {
    let asym = [[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    assert!(Multinormal::new([0.0; 3], asym, (0.0, 1.0)).is_err());
    let indef = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    assert!(Multinormal::new([0.0; 3], indef, (0.0, 1.0)).is_err());
}

#[test]
fn cosh_and_product_networks() {
    let t = tree("comb", 3, 5);
    let samples = SampleSet::for_tree(&t, 200, 4);
    let cosh = CoshSum.exact_network(&t).unwrap().unwrap();
    assert_eq!(cosh.max_bond(), 2);
    let err = real_error_metrics(&cosh, &TargetFunction(&CoshSum), &samples).unwrap();
    assert!(err.sup < 1e-13, "{err:?}");
    let prod = Product.exact_network(&t).unwrap().unwrap();
    let err = real_error_metrics(&prod, &TargetFunction(&Product), &samples).unwrap();
    assert!(err.sup < 1e-12, "{err:?}");
    assert!(prod.max_bond() <= 9);
}

#[test]
fn registry_lookup() {
    let reg = TargetRegistry::builtin();
    let names: Vec<_> = reg.names().collect();
    assert_eq!(
        names,
        ["cosh", "laguerre", "multinormal", "planewaves", "product", "weierstrass"]
    );
    assert!(matches!(reg.get("nope"), Err(Error::UnknownName(_))));
    assert_eq!(reg.get("laguerre").unwrap().n_vars(), Some(1));
}
