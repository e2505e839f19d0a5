use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::topology::{BinaryTree, TreeGenerator, TreeRegistry};

fn all_points(tree: &LabeledTree) -> Vec<GridPoint> {
    let n = tree.max_var();
    let l = tree.levels();
    let total = n * l;
    (0..1usize << total)
        .map(|m| {
            let mut p = GridPoint::zeros(n, l);
            for var in 1..=n {
                for d in 1..=l {
                    let slot = (var - 1) * l + d - 1;
                    p.set(DigitId::new(var, d), ((m >> (total - 1 - slot)) & 1) as u8);
                }
            }
            p
        })
        .collect()
}

fn full_entry<T: Scalar>(tree: &LabeledTree, full: &DenseTensor<T>, p: &GridPoint) -> T {
    let idx: Vec<usize> = tree.vertices().iter().map(|&d| p.get(d) as usize).collect();
    full.get(&idx)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn trees() -> Vec<LabeledTree> {
    let reg = TreeRegistry::builtin();
    let mut out = Vec::new();
    for name in ["path-sequential", "binary-tree", "comb", "star", "coupled-binary"] {
        out.push(reg.build(name, 1, 4).unwrap());
        out.push(reg.build(name, 2, 3).unwrap());
    }
    out
}

#[test]
fn evaluation_matches_full_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for tree in trees() {
        let bonds: Vec<usize> = (0..tree.edges().len()).map(|e| 1 + e % 3).collect();
        let net = TreeTensorNetwork::<f64>::random(&tree, &bonds, &mut rng);
        let full = net.full_contraction().unwrap();
        for p in all_points(&tree) {
            let a = net.evaluate(&p).unwrap();
            let b = full_entry(&tree, &full, &p);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn single_vertex_network() {
    let tree = LabeledTree::new(vec![DigitId::new(1, 1)], vec![]).unwrap();
    let net = TreeTensorNetwork::rank_one(&tree, |_| [2.0, 3.0]);
    let mut p = GridPoint::zeros(1, 1);
    assert_eq!(net.evaluate(&p).unwrap(), 2.0);
    p.set(DigitId::new(1, 1), 1);
    assert_eq!(net.evaluate(&p).unwrap(), 3.0);
    assert_eq!(net.add(&net).unwrap().evaluate(&p).unwrap(), 6.0);
    assert_eq!(net.multiply(&net).unwrap().evaluate(&p).unwrap(), 9.0);
    assert_eq!(net.truncate(1, 0.0).unwrap(), net);
    assert_eq!(net.integrate_all().unwrap(), 2.5);
    assert_eq!(net.max_bond(), 1);
}

#[test]
fn incomplete_point_is_rejected() {
    let tree = TreeRegistry::builtin().build("comb", 2, 2).unwrap();
    let net = TreeTensorNetwork::<f64>::zero(&tree);
    let p = GridPoint::zeros(1, 2);
    assert!(matches!(
        net.evaluate(&p).unwrap_err(),
        Error::IncompleteGridPoint(d) if d.var == 2
    ));
}

#[test]
fn add_and_multiply_bond_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for tree in trees() {
        let ba: Vec<usize> = (0..tree.edges().len()).map(|e| 1 + e % 3).collect();
        let bb: Vec<usize> = (0..tree.edges().len()).map(|e| 1 + (e + 1) % 4).collect();
        let a = TreeTensorNetwork::<f64>::random(&tree, &ba, &mut rng);
        let b = TreeTensorNetwork::<f64>::random(&tree, &bb, &mut rng);
        let s = a.add(&b).unwrap();
        let m = a.multiply(&b).unwrap();
        for e in 0..tree.edges().len() {
            assert_eq!(s.bond_dim(e), ba[e] + bb[e]);
            assert_eq!(m.bond_dim(e), ba[e] * bb[e]);
        }
        for p in all_points(&tree).iter().step_by(5) {
            let (x, y) = (a.evaluate(p).unwrap(), b.evaluate(p).unwrap());
            assert!((s.evaluate(p).unwrap() - (x + y)).abs() < 1e-12);
            assert!((m.evaluate(p).unwrap() - x * y).abs() < 1e-12);
        }
    }
}

#[test]
fn adding_zero_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tree = TreeRegistry::builtin().build("binary-tree", 2, 3).unwrap();
    let a = TreeTensorNetwork::<f64>::random(&tree, &[2; 5], &mut rng);
    let s = a.add(&TreeTensorNetwork::zero(&tree)).unwrap();
    for p in all_points(&tree) {
        assert!((s.evaluate(&p).unwrap() - a.evaluate(&p).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn mismatched_trees_are_rejected() {
    let reg = TreeRegistry::builtin();
    let a = TreeTensorNetwork::<f64>::zero(&reg.build("comb", 2, 3).unwrap());
    let b = TreeTensorNetwork::<f64>::zero(&reg.build("path-sequential", 2, 3).unwrap());
    assert_eq!(a.add(&b).unwrap_err(), Error::TreeMismatch);
    assert_eq!(a.multiply(&b).unwrap_err(), Error::TreeMismatch);
}

#[test]
fn lossless_truncation_preserves_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for tree in trees() {
        let bonds: Vec<usize> = (0..tree.edges().len()).map(|e| 1 + e % 3).collect();
        let a = TreeTensorNetwork::<f64>::random(&tree, &bonds, &mut rng);
        let t = a.truncate(usize::MAX, 0.0).unwrap();
        for (e, &d) in bonds.iter().enumerate() {
            assert!(t.bond_dim(e) <= d);
        }
        for p in all_points(&tree) {
            let (x, y) = (t.evaluate(&p).unwrap(), a.evaluate(&p).unwrap());
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}

#[test]
fn truncation_removes_redundant_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let tree = TreeRegistry::builtin().build("path-interleaved", 2, 3).unwrap();
    let a = TreeTensorNetwork::<f64>::random(&tree, &[2; 5], &mut rng);
    let doubled = a.add(&a).unwrap();
    assert_eq!(doubled.max_bond(), 4);
    let t = doubled.truncate(2, 1e-14).unwrap();
    assert!(t.max_bond() <= 2);
    for p in all_points(&tree) {
        let y = 2.0 * a.evaluate(&p).unwrap();
        assert!((t.evaluate(&p).unwrap() - y).abs() < 1e-12 * y.abs().max(1.0));
    }
}

#[test]
fn truncation_error_shrinks_with_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let tree = TreeRegistry::builtin().build("path-sequential", 1, 8).unwrap();
    let a = TreeTensorNetwork::<f64>::random(&tree, &[6; 7], &mut rng);
    let pts = all_points(&tree);
    let exact = a.evaluate_many(&pts).unwrap();
    let mut last = f64::INFINITY;
    for chi in 1..=6 {
        let t = a.truncate(chi, 0.0).unwrap();
        let err: f64 = t
            .evaluate_many(&pts)
            .unwrap()
            .iter()
            .zip(&exact)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err <= last + 1e-12, "chi={chi}: {err} > {last}");
        last = err;
    }
    assert!(last < 1e-10);
}

#[test]
fn complex_truncation() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let tree = TreeRegistry::builtin().build("comb", 2, 3).unwrap();
    let a = TreeTensorNetwork::<Complex64>::random(&tree, &[2; 5], &mut rng);
    let t = a.add(&a).unwrap().truncate(2, 1e-14).unwrap();
    for p in all_points(&tree) {
        let y = a.evaluate(&p).unwrap() * 2.0;
        assert!((t.evaluate(&p).unwrap() - y).norm() < 1e-12 * y.norm().max(1.0));
    }
}

/// `x` as a sum of `L` rank-one digit networks.
fn identity_net(tree: &LabeledTree, var: usize) -> TreeTensorNetwork<f64> {
    let mut acc = TreeTensorNetwork::zero(tree);
    for j in 1..=tree.levels() {
        let target = tree.position(DigitId::new(var, j)).unwrap();
        let term = TreeTensorNetwork::rank_one(tree, |v| {
            if v == target {
                [0.0, 0.5f64.powi(j as i32)]
            } else {
                [1.0, 1.0]
            }
        });
        acc = acc.add(&term).unwrap();
    }
    acc
}

#[test]
fn integrals_of_one_and_x() {
    let tree = TreeRegistry::builtin().build("path-sequential", 1, 4).unwrap();
    let one = TreeTensorNetwork::rank_one(&tree, |_| [1.0, 1.0]);
    assert_eq!(one.integrate_all().unwrap(), 1.0);
    let x = identity_net(&tree, 1);
    // (1/16) Σ_{m<16} m/16
    let oracle: f64 = (0..16).map(|m| m as f64 / 16.0).sum::<f64>() / 16.0;
    assert_eq!(oracle, 15.0 / 32.0);
    assert!((x.integrate_all().unwrap() - oracle).abs() < 1e-15);
}

#[test]
fn partial_integration_against_grid_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let reg = TreeRegistry::builtin();
    for name in ["comb", "binary-tree", "path-interleaved", "star"] {
        let tree = reg.build(name, 3, 2).unwrap();
        let net = TreeTensorNetwork::<f64>::random(&tree, &vec![2; tree.edges().len()], &mut rng);
        let pts = all_points(&tree);
        for vars in [vec![1], vec![2], vec![1, 3], vec![2, 3]] {
            let red = net.partial_integrate(&vars).unwrap().into_network().unwrap();
            assert!(red.tree().variables().iter().all(|v| !vars.contains(v)));
            // brute force: average over the integrated digits
            for q in pts.iter().step_by(7) {
                let expect: f64 = pts
                    .iter()
                    .filter(|p| {
                        tree.vertices()
                            .iter()
                            .all(|&d| vars.contains(&d.var) || p.get(d) == q.get(d))
                    })
                    .map(|p| net.evaluate(p).unwrap())
                    .sum::<f64>()
                    / 4f64.powi(vars.len() as i32);
                let got = red.evaluate(q).unwrap();
                assert!((got - expect).abs() < 1e-12, "{name} {vars:?}");
            }
        }
        let total: f64 = pts.iter().map(|p| net.evaluate(p).unwrap()).sum::<f64>() / 64.0;
        assert!((net.integrate_all().unwrap() - total).abs() < 1e-12);
    }
}

#[test]
fn product_integral_factorizes() {
    let tree = TreeRegistry::builtin().build("coupled-binary", 2, 5).unwrap();
    let f = |d: DigitId| -> [f64; 2] {
        let w = (d.var * 10 + d.digit) as f64;
        [1.0 + 0.01 * w, 0.5 + 0.02 * w]
    };
    let net = TreeTensorNetwork::rank_one(&tree, |v| f(tree.vertex(v)));
    let per_var: f64 = (1..=2)
        .map(|var| {
            (1..=5)
                .map(|j| {
                    let [a, b] = f(DigitId::new(var, j));
                    0.5 * (a + b)
                })
                .product::<f64>()
        })
        .product();
    assert!(rel(net.integrate_all().unwrap(), per_var) < 1e-12);
}

#[test]
fn relabel_and_lift() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tree = TreeRegistry::builtin().build("comb", 2, 3).unwrap();
    let net = TreeTensorNetwork::<f64>::random(&tree, &[2; 5], &mut rng);
    let shifted = net.relabel(|d| DigitId::new(d.var + 2, d.digit)).unwrap();
    assert_eq!(shifted.tree().variables(), &[3, 4]);
    let back = shifted.relabel(|d| DigitId::new(d.var - 2, d.digit)).unwrap();
    assert_eq!(back, net);
    assert_eq!(net.add(&shifted).unwrap_err(), Error::TreeMismatch);

    let mut edges = tree.edge_labels();
    edges.extend(shifted.tree().edge_labels());
    edges.push((DigitId::new(1, 1), DigitId::new(3, 1)));
    let mut verts = tree.vertices().to_vec();
    verts.extend_from_slice(shifted.tree().vertices());
    let big = LabeledTree::new(verts, edges).unwrap();
    let lifted = net.lift_to(&big).unwrap();
    let lifted_t = shifted.lift_to(&big).unwrap();
    let prod = lifted.multiply(&lifted_t).unwrap();
    for p in all_points(&big).iter().step_by(97) {
        let mut px = GridPoint::zeros(2, 3);
        let mut pt = GridPoint::zeros(4, 3);
        for var in 1..=2 {
            for j in 1..=3 {
                px.set(DigitId::new(var, j), p.get(DigitId::new(var, j)));
                pt.set(DigitId::new(var + 2, j), p.get(DigitId::new(var + 2, j)));
            }
        }
        let a = net.evaluate(&px).unwrap();
        let b = shifted.evaluate(&pt).unwrap();
        assert!((lifted.evaluate(p).unwrap() - a).abs() < 1e-14);
        assert!((prod.evaluate(p).unwrap() - a * b).abs() < 1e-12);
    }
}

#[test]
fn stats_count_entries() {
    let tree = TreeRegistry::builtin().build("path-sequential", 1, 3).unwrap();
    let net = TreeTensorNetwork::rank_one(&tree, |_| [1.0, 2.0]);
    let s = net.stats();
    assert_eq!(s.memory_bytes, 48);
    assert_eq!(s.max_bond, 1);
    let two = net.add(&net).unwrap();
    assert_eq!(two.stats().max_bond, 2);
    assert_eq!(two.stats().memory_bytes, 8 * (4 + 8 + 4));
}

#[test]
fn binary_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let tree = BinaryTree.generate(2, 3).unwrap();
    let real = AnyNetwork::Real(TreeTensorNetwork::random(&tree, &[3; 5], &mut rng));
    let cplx = AnyNetwork::Complex(TreeTensorNetwork::random(&tree, &[2; 5], &mut rng));
    for net in [real, cplx] {
        let mut buf = Vec::new();
        net.write_to(&mut buf).unwrap();
        let back = AnyNetwork::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, net);
    }
    assert!(AnyNetwork::read_from(&mut &b"nope"[..]).is_err());
}

#[test]
fn real_values_of_complex_networks() {
    let tree = TreeRegistry::builtin().build("binary-tree", 2, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let bonds = vec![2; tree.edges().len()];
    let net = TreeTensorNetwork::<Complex64>::random(&tree, &bonds, &mut rng);
    let re = net.real_values();
    assert_eq!(re.max_bond(), 4);
    for p in all_points(&tree) {
        assert!((re.evaluate(&p).unwrap() - net.evaluate(&p).unwrap().re).abs() < 1e-12);
    }
}
