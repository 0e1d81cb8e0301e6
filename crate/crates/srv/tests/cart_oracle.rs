//! Training correctness is anchored to a second, deliberately naive CART
//! implementation living in this file. Both follow the same published
//! contract — midpoint thresholds between consecutive distinct values,
//! exact-arithmetic split scores, ties to the lowest attribute then lowest
//! threshold, majority leaves with ties to the lowest class — so their
//! trees must agree byte for byte. The oracle re-derives everything by
//! brute force: no sweeps, no incremental counts, its own serializer.

use proptest::prelude::*;
use vp_dialect::{parse_response, register_ftp_dialects, DialectId, RequestContext};
use vp_srv::{extract_features, train_tree, StructureFeatures, TrainParams, FEATURE_COUNT};

// ---- independent oracle ----------------------------------------------

#[derive(Clone, Copy)]
enum ONode {
    Leaf { class: u16 },
    Split { attribute: u16, threshold: f32, left: u32, right: u32 },
}

fn oracle_train(rows: &[(Vec<f32>, u16)], max_depth: usize, min_split: usize) -> Vec<ONode> {
    let mut nodes = Vec::new();
    let all: Vec<usize> = (0..rows.len()).collect();
    oracle_build(rows, &all, 0, max_depth, min_split, &mut nodes);
    nodes
}

fn class_counts(rows: &[(Vec<f32>, u16)], idxs: &[usize]) -> std::collections::BTreeMap<u16, u64> {
    let mut counts = std::collections::BTreeMap::new();
    for &i in idxs {
        *counts.entry(rows[i].1).or_insert(0u64) += 1;
    }
    counts
}

fn oracle_build(
    rows: &[(Vec<f32>, u16)],
    idxs: &[usize],
    depth: usize,
    max_depth: usize,
    min_split: usize,
    nodes: &mut Vec<ONode>,
) -> u32 {
    let counts = class_counts(rows, idxs);
    // Majority with ties to the lowest class id (BTreeMap iterates ascending).
    let mut majority = 0u16;
    let mut majority_count = 0u64;
    for (&class, &count) in &counts {
        if count > majority_count {
            majority = class;
            majority_count = count;
        }
    }
    let here = nodes.len() as u32;
    nodes.push(ONode::Leaf { class: majority });
    if counts.len() <= 1 || depth >= max_depth || idxs.len() < min_split {
        return here;
    }

    // Exhaustively enumerate (attribute, midpoint) candidates in order and
    // keep the first strictly-best one.
    let mut best: Option<(usize, f32, [u128; 4])> = None; // (attr, thr, [A, n, B, m])
    for attribute in 0..FEATURE_COUNT {
        let mut values: Vec<f32> = idxs.iter().map(|&i| rows[i].0[attribute]).collect();
        values.sort_by(f32::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let left: Vec<usize> = idxs
                .iter()
                .copied()
                .filter(|&i| rows[i].0[attribute] < threshold)
                .collect();
            let right: Vec<usize> = idxs
                .iter()
                .copied()
                .filter(|&i| rows[i].0[attribute] >= threshold)
                .collect();
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let a: u128 = class_counts(rows, &left).values().map(|&c| u128::from(c) * u128::from(c)).sum();
            let b: u128 = class_counts(rows, &right).values().map(|&c| u128::from(c) * u128::from(c)).sum();
            let candidate = [a, left.len() as u128, b, right.len() as u128];
            // Strict improvement over the parent: A/n + B/m > P/N.
            let parent_sq: u128 = counts.values().map(|&c| u128::from(c) * u128::from(c)).sum();
            let n = candidate[1];
            let m = candidate[3];
            if (n + m) * (a * m + b * n) <= parent_sq * n * m {
                continue;
            }
            let better = match &best {
                None => true,
                Some((_, _, cur)) => fraction_gt(&candidate, cur),
            };
            if better {
                best = Some((attribute, threshold, candidate));
            }
        }
    }

    let Some((attribute, threshold, _)) = best else {
        return here;
    };
    let left_idx: Vec<usize> = idxs
        .iter()
        .copied()
        .filter(|&i| rows[i].0[attribute] < threshold)
        .collect();
    let right_idx: Vec<usize> = idxs
        .iter()
        .copied()
        .filter(|&i| rows[i].0[attribute] >= threshold)
        .collect();
    let left = oracle_build(rows, &left_idx, depth + 1, max_depth, min_split, nodes);
    let right = oracle_build(rows, &right_idx, depth + 1, max_depth, min_split, nodes);
    nodes[here as usize] = ONode::Split {
        attribute: attribute as u16,
        threshold,
        left,
        right,
    };
    here
}

/// `a[0]/a[1] + a[2]/a[3] > b[0]/b[1] + b[2]/b[3]`, exactly.
fn fraction_gt(a: &[u128; 4], b: &[u128; 4]) -> bool {
    (a[0] * a[3] + a[2] * a[1]) * (b[1] * b[3]) > (b[0] * b[3] + b[2] * b[1]) * (a[1] * a[3])
}

/// The oracle's own writer for the frozen node record layout.
fn oracle_bytes(nodes: &[ONode]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"VPDT");
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(nodes.len() as u32).to_le_bytes());
    for node in nodes {
        match *node {
            ONode::Leaf { class } => {
                out.push(0);
                out.extend_from_slice(&[0; 14]); // attribute, threshold, children
                out.extend_from_slice(&class.to_le_bytes());
            }
            ONode::Split { attribute, threshold, left, right } => {
                out.push(1);
                out.extend_from_slice(&attribute.to_le_bytes());
                out.extend_from_slice(&threshold.to_le_bytes());
                out.extend_from_slice(&left.to_le_bytes());
                out.extend_from_slice(&right.to_le_bytes());
                out.extend_from_slice(&0u16.to_le_bytes());
            }
        }
    }
    out
}

// ---- fixtures ----------------------------------------------------------

fn dialect_rows() -> Vec<(StructureFeatures, DialectId)> {
    let registry = register_ftp_dialects();
    let contexts = [
        RequestContext::new("get", "hello.txt", Some(20)),
        RequestContext::new("get", "a.bin", Some(0)),
        RequestContext::new("fetch", "notes_v2.md", Some(123_456)),
        RequestContext::new("get", "x-1.dat", Some(7)),
    ];
    let mut rows = Vec::new();
    for dialect in registry.iter() {
        for ctx in &contexts {
            for messages in [
                dialect.render_response(ctx).unwrap(),
                dialect.render_not_found(ctx).unwrap(),
            ] {
                let structure = parse_response(&messages).unwrap();
                rows.push((extract_features(&structure).unwrap(), dialect.id()));
            }
        }
    }
    rows
}

fn to_plain(rows: &[(StructureFeatures, DialectId)]) -> Vec<(Vec<f32>, u16)> {
    rows.iter()
        .map(|(f, c)| (f.0.to_vec(), c.get()))
        .collect()
}

// ---- the actual comparisons -------------------------------------------

#[test]
fn tree_matches_oracle_on_dialect_shapes() {
    let rows = dialect_rows();
    let tree = train_tree(&rows, &TrainParams::default()).unwrap();
    let oracle = oracle_train(&to_plain(&rows), 16, 2);
    assert_eq!(tree.to_bytes(), oracle_bytes(&oracle));
}

#[test]
fn training_is_deterministic() {
    let rows = dialect_rows();
    let a = train_tree(&rows, &TrainParams::default()).unwrap();
    let b = train_tree(&rows, &TrainParams::default()).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
}

#[test]
fn equal_scores_pick_the_lowest_attribute() {
    // Attributes 0 and 1 are identical, so their best splits tie exactly;
    // the tree must take attribute 0 with the midpoint threshold.
    let mut rows = Vec::new();
    for (value, class) in [(0.0f32, 1u16), (0.0, 1), (1.0, 2), (1.0, 2)] {
        let mut f = [0.0f32; FEATURE_COUNT];
        f[0] = value;
        f[1] = value;
        rows.push((StructureFeatures(f), DialectId::new(class).unwrap()));
    }
    let tree = train_tree(&rows, &TrainParams::default()).unwrap();
    match tree.nodes()[0] {
        vp_srv::Node::Split { attribute, threshold, .. } => {
            assert_eq!(attribute, 0);
            assert_eq!(threshold, 0.5);
        }
        other => panic!("expected a root split, got {other:?}"),
    }
}

#[test]
fn perfect_separation_on_held_out_shapes() {
    // Alternate rows between train and held-out so every dialect appears
    // in both; the shapes must separate perfectly.
    let rows = dialect_rows();
    let (train, held_out): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .enumerate()
        .partition(|(i, _)| i % 2 == 0);
    let train: Vec<_> = train.into_iter().map(|(_, r)| r).collect();
    let held_out: Vec<_> = held_out.into_iter().map(|(_, r)| r).collect();
    let tree = train_tree(&train, &TrainParams::default()).unwrap();
    assert_eq!(vp_srv::accuracy(&tree, &held_out), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Byte equality holds on arbitrary small-integer datasets, including
    // ones dense with score ties and impossible-to-improve nodes.
    #[test]
    fn tree_matches_oracle_on_random_data(
        raw in prop::collection::vec(
            (prop::collection::vec(0u8..=5, FEATURE_COUNT), 1u16..=15),
            1..48,
        ),
        max_depth in 1usize..=16,
    ) {
        let rows: Vec<(StructureFeatures, DialectId)> = raw
            .iter()
            .map(|(f, c)| {
                let mut arr = [0.0f32; FEATURE_COUNT];
                for (slot, &v) in arr.iter_mut().zip(f) {
                    *slot = f32::from(v);
                }
                (StructureFeatures(arr), DialectId::new(*c).unwrap())
            })
            .collect();
        let params = TrainParams { max_depth, min_samples_split: 2 };
        let tree = train_tree(&rows, &params).unwrap();
        let oracle = oracle_train(&to_plain(&rows), max_depth, 2);
        prop_assert_eq!(tree.to_bytes(), oracle_bytes(&oracle));
    }
}
