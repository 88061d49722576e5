//! Cross-module invariants exercised through the public API: scoring
//! symmetries, special-function identities, least-squares agreement with a
//! brute-force solver, and tree determinism/audit properties.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traitstat_core::analysis::AnalysisRow;
use traitstat_core::chaid::{grow_tree, ChaidParams, ChaidTree};
use traitstat_core::encoding::EncodedPredictors;
use traitstat_core::regress::{build_design, ols_fit, Design, DesignSpec, MissingPolicy};
use traitstat_core::scoring::{score_trait, Key, TraitScores};
use traitstat_core::statcore::{reg_inc_beta, welford_summary, Summary};
use traitstat_core::types::{Predictor, Trait};

fn keys_from(flips: &[bool; 10]) -> [Key; 10] {
    flips.map(|f| if f { Key::Minus } else { Key::Plus })
}

proptest! {
    #[test]
    fn score_range_and_symmetries(
        items in prop::array::uniform10(1i64..=5),
        flips in prop::array::uniform10(any::<bool>()),
    ) {
        let keys = keys_from(&flips);
        let s = score_trait(&items, &keys).expect("valid items score") as i64;
        prop_assert!((10..=50).contains(&s));

        // Reversing every response mirrors the score around 30.
        let reversed = items.map(|x| 6 - x);
        let r = score_trait(&reversed, &keys).unwrap() as i64;
        prop_assert_eq!(r, 60 - s);

        // Flipping every key is the same reflection.
        let flipped = keys.map(Key::flip);
        let f = score_trait(&items, &flipped).unwrap() as i64;
        prop_assert_eq!(f, 60 - s);
    }

    #[test]
    fn out_of_range_item_means_missing(
        mut items in prop::array::uniform10(1i64..=5),
        slot in 0usize..10,
        bad in prop_oneof![Just(0i64), Just(6i64), Just(-2i64), Just(99i64)],
    ) {
        items[slot] = bad;
        prop_assert!(score_trait(&items, &keys_from(&[false; 10])).is_none());
    }

    #[test]
    fn beta_symmetry(
        x in 1e-6f64..1.0,
        a in 0.5f64..30.0,
        b in 0.5f64..30.0,
    ) {
        let lhs = reg_inc_beta(x, a, b).unwrap();
        let rhs = reg_inc_beta(1.0 - x, b, a).unwrap();
        prop_assert!((lhs + rhs - 1.0).abs() <= 1e-10, "{lhs} + {rhs}");
    }

    #[test]
    fn summary_merge_is_order_independent(
        values in prop::collection::vec(-100.0f64..100.0, 2..60),
        split in 1usize..59,
    ) {
        let split = split.min(values.len() - 1);
        let left = welford_summary(values[..split].iter().copied());
        let right = welford_summary(values[split..].iter().copied());
        let merged = left.merge(&right);
        let flat = welford_summary(values.iter().copied());
        prop_assert_eq!(merged.n, flat.n);
        prop_assert!((merged.mean - flat.mean).abs() <= 1e-9);
        let (a, b) = (merged.sd().unwrap_or(0.0), flat.sd().unwrap_or(0.0));
        prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
}

/// Normal-equations solve by Gaussian elimination with partial pivoting,
/// independent of the QR path under test.
fn brute_force_betas(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let p = x[0].len();
    let m = p + 1;
    let xi = |i: usize, j: usize| if j == 0 { 1.0 } else { x[i][j - 1] };
    let mut a = vec![vec![0.0; m + 1]; m];
    for r in 0..m {
        for c in 0..m {
            a[r][c] = (0..n).map(|i| xi(i, r) * xi(i, c)).sum();
        }
        a[r][m] = (0..n).map(|i| xi(i, r) * y[i]).sum();
    }
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        for row in 0..m {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for c in col..=m {
                    a[row][c] -= factor * a[col][c];
                }
            }
        }
    }
    (0..m).map(|r| a[r][m] / a[r][r]).collect()
}

#[test]
fn ols_agrees_with_normal_equations_on_random_designs() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..40 {
        let p = rng.gen_range(1..=4);
        let n = rng.gen_range(p + 3..=40);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.gen_range(-4.0..4.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let design = Design {
            x: x.iter().flatten().copied().collect(),
            y: y.clone(),
            n,
            p,
        };
        let names: Vec<String> = (0..p).map(|i| format!("x{i}")).collect();
        let fit = ols_fit(&design, &names).unwrap();
        let oracle = brute_force_betas(&x, &y);
        for (term, expected) in fit.terms.iter().zip(&oracle) {
            assert!(
                (term.beta - expected).abs() <= 1e-8 * expected.abs().max(1.0),
                "{} vs {expected}",
                term.beta
            );
        }
    }
}

fn synth_rows(seed: u64, n: usize) -> Vec<AnalysisRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut predictors = EncodedPredictors::default();
            predictors.gender = rng.gen_range(1..=2);
            predictors.growth = rng.gen_range(0..=4);
            predictors.hand = rng.gen_range(1..=3);
            let base = 25.0
                + 3.0 * predictors.gender as f64
                + 1.2 * predictors.growth as f64
                + rng.gen_range(-4.0..4.0);
            let mut scores = TraitScores::default();
            scores.set(Trait::E, Some(base.round().clamp(10.0, 50.0) as u8));
            AnalysisRow {
                source: "synthetic".into(),
                row_index: i as u32,
                scores,
                predictors,
                country: None,
            }
        })
        .collect()
}

const BIO: [Predictor; 3] = [Predictor::Growth, Predictor::Gender, Predictor::Hand];

#[test]
fn grow_tree_is_deterministic() {
    let rows = synth_rows(7, 600);
    let params = ChaidParams::default();
    let a = grow_tree(&rows, Trait::E, &BIO, &params).unwrap();
    let b = grow_tree(&rows, Trait::E, &BIO, &params).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.to_dot(), b.to_dot());
}

/// Splits present at a stricter alpha must survive at a looser one; extra
/// splits may only appear where there was a leaf.
fn split_paths(tree: &ChaidTree) -> Vec<(Vec<usize>, String)> {
    // Key each split by the path of child positions from the root.
    fn walk(tree: &ChaidTree, id: usize, path: Vec<usize>, out: &mut Vec<(Vec<usize>, String)>) {
        let node = &tree.nodes[id];
        if let Some(split) = &node.split {
            out.push((path.clone(), format!("{:?}{:?}", split.predictor, split.groups)));
            for (slot, child) in node.child_ids.iter().enumerate() {
                let mut p = path.clone();
                p.push(slot);
                walk(tree, *child, p, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, Vec::new(), &mut out);
    out
}

#[test]
fn raising_alpha_only_adds_splits() {
    for seed in [1u64, 2, 3, 11, 42] {
        let rows = synth_rows(seed, 800);
        let strict = ChaidParams {
            alpha_split: 0.005,
            ..ChaidParams::default()
        };
        let loose = ChaidParams {
            alpha_split: 0.05,
            ..ChaidParams::default()
        };
        let t_strict = grow_tree(&rows, Trait::E, &BIO, &strict).unwrap();
        let t_loose = grow_tree(&rows, Trait::E, &BIO, &loose).unwrap();
        let strict_splits = split_paths(&t_strict);
        let loose_splits = split_paths(&t_loose);
        for s in &strict_splits {
            assert!(
                loose_splits.contains(s),
                "seed {seed}: split {s:?} vanished when alpha was raised"
            );
        }
    }
}

#[test]
fn tree_audit_mass_and_limits() {
    for seed in [5u64, 9, 21] {
        let rows = synth_rows(seed, 700);
        let params = ChaidParams::default();
        let tree = grow_tree(&rows, Trait::E, &BIO, &params).unwrap();
        let total = tree.root().n;
        for node in &tree.nodes {
            assert!(node.depth <= params.max_depth);
            if !node.child_ids.is_empty() {
                let child_sum: u64 = node.child_ids.iter().map(|c| tree.nodes[*c].n).sum();
                assert_eq!(child_sum, node.n, "children partition the parent");
                assert!(node.n >= params.min_parent as u64);
                for c in &node.child_ids {
                    assert!(tree.nodes[*c].n >= params.min_child as u64);
                }
                // Weighted child means recompose the parent mean.
                let weighted: f64 = node
                    .child_ids
                    .iter()
                    .map(|c| tree.nodes[*c].mean * tree.nodes[*c].n as f64)
                    .sum();
                assert!((weighted / node.n as f64 - node.mean).abs() <= 1e-9);
            }
        }
        let leaf_sum: u64 = tree.leaves().map(|l| l.n).sum();
        assert_eq!(leaf_sum, total);
    }
}

#[test]
fn design_policies_respect_missing_rows() {
    let mut rows = synth_rows(3, 50);
    // Erase some demographics and one score.
    rows[0].predictors.gender = 0;
    rows[1].scores.set(Trait::E, None);
    let spec_zero = DesignSpec {
        target: Trait::E,
        predictors: BIO.to_vec(),
        missing_policy: MissingPolicy::ZeroInclude,
    };
    let spec_drop = DesignSpec {
        target: Trait::E,
        predictors: BIO.to_vec(),
        missing_policy: MissingPolicy::DropRow,
    };
    let zero = build_design(&rows, &spec_zero).unwrap();
    let drop = build_design(&rows, &spec_drop).unwrap();
    assert_eq!(zero.n, 49); // missing target always excluded
    assert!(drop.n < zero.n); // zero-coded demographics excluded too
}

#[test]
fn summary_merge_with_empty_is_identity() {
    let mut s = Summary::new();
    for v in [1.0, 2.0, 5.0] {
        s.push(v);
    }
    let merged = s.merge(&Summary::new());
    assert_eq!(merged, s);
}
