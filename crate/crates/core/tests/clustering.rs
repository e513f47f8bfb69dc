mod common;

use common::*;
use lglrr::data::{
    generate_synthetic, image_set_to_point, load_manifest, load_points, write_matrix, ImageSet, SynthSpec,
};
use lglrr::eval::{accuracy, best_matching_exhaustive, best_matching_hungarian, confusion};
use lglrr::grassmann::geodesic_distance_sq;
use lglrr::lglrr::SolverConfig;
use lglrr::numerics::Matrix;
use lglrr::pipeline::cluster_points;
use lglrr::spectral::{ncut, Affinity};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn shuffled(n: usize, r: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    perm
}

/// Blocks of random positive weights with faint noise between blocks.
fn noisy_blocks(sizes: &[usize], r: &mut ChaCha8Rng) -> (Matrix, Vec<usize>) {
    let owner: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let n = owner.len();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if owner[i] == owner[j] {
                uniform(r, 0.5, 1.0)
            } else {
                uniform(r, 0.0, 0.01)
            };
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    (a, owner)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ncut_ignores_vertex_order(seed: u64, blocks in 2usize..5) {
        let mut r = rng(seed);
        let sizes: Vec<usize> = (0..blocks).map(|_| r.random_range(3..8)).collect();
        let (a, owner) = noisy_blocks(&sizes, &mut r);
        let n = owner.len();
        let labels = ncut(&Affinity::new(a.clone()).unwrap(), blocks, 0).unwrap();
        prop_assert_eq!(accuracy(&labels, &owner).unwrap(), 1.0);

        let perm = shuffled(n, &mut r);
        let pa = Matrix::from_fn(n, n, |i, j| a[(perm[i], perm[j])]);
        let plabels = ncut(&Affinity::new(pa).unwrap(), blocks, 0).unwrap();
        let mut back = vec![0; n];
        for (i, &src) in perm.iter().enumerate() {
            back[src] = plabels[i];
        }
        prop_assert_eq!(accuracy(&back, &labels).unwrap(), 1.0);
    }

    #[test]
    fn ncut_ignores_affinity_scale(seed: u64, scale in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let (a, _) = noisy_blocks(&[5, 6, 4], &mut r);
        let labels = ncut(&Affinity::new(a.clone()).unwrap(), 3, 1).unwrap();
        let scaled = ncut(&Affinity::new(a * scale).unwrap(), 3, 1).unwrap();
        prop_assert_eq!(accuracy(&scaled, &labels).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_is_symmetric_and_relabeling_invariant(seed: u64, k in 1usize..7, n in 1usize..40) {
        let mut r = rng(seed);
        let truth: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let predicted: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let base = accuracy(&predicted, &truth).unwrap();
        prop_assert_eq!(base, permutation_accuracy(&predicted, &truth));

        let distinct = |v: &[usize]| {
            let mut s = v.to_vec();
            s.sort_unstable();
            s.dedup();
            s.len()
        };
        if distinct(&predicted) == distinct(&truth) {
            prop_assert_eq!(accuracy(&truth, &predicted).unwrap(), base);
        }

        let relabel = shuffled(k, &mut r);
        let renamed: Vec<usize> = predicted.iter().map(|&l| relabel[l] + 10).collect();
        prop_assert_eq!(accuracy(&renamed, &truth).unwrap(), base);
        let renamed_truth: Vec<usize> = truth.iter().map(|&l| relabel[l] * 3).collect();
        prop_assert_eq!(accuracy(&predicted, &renamed_truth).unwrap(), base);
    }

    #[test]
    fn matching_paths_agree(seed: u64, k in 1usize..10) {
        let mut r = rng(seed);
        let n = r.random_range(k..60);
        let truth: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let predicted: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let counts = confusion(&predicted, &truth).unwrap();
        prop_assert_eq!(best_matching_exhaustive(&counts), best_matching_hungarian(&counts));
    }
}

#[test]
fn frame_order_does_not_change_the_subspace() {
    let mut r = rng(3);
    for _ in 0..10 {
        let gamma = gaussian(40, 15, &mut r);
        let perm = shuffled(15, &mut r);
        let permuted = Matrix::from_fn(40, 15, |i, j| gamma[(i, perm[j])]);
        for normalize in [false, true] {
            let a = image_set_to_point(&ImageSet::from_stacked(&gamma, "a", None).unwrap(), 4, normalize).unwrap();
            let b = image_set_to_point(&ImageSet::from_stacked(&permuted, "b", None).unwrap(), 4, normalize).unwrap();
            assert!(geodesic_distance_sq(&a, &b).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn synthetic_generation_is_reproducible() {
    let spec = SynthSpec {
        clusters: 3,
        per_cluster: 5,
        ambient_dim: 12,
        subspace_dim: 3,
        noise_sigma: 0.1,
        seed: 17,
    };
    let (a, la) = generate_synthetic(&spec).unwrap();
    let (b, lb) = generate_synthetic(&spec).unwrap();
    assert_eq!(la, lb);
    for (x, y) in a.iter().zip(&b) {
        assert!(x.matrix().iter().zip(y.matrix().iter()).all(|(u, v)| u.to_bits() == v.to_bits()));
    }
    let other = generate_synthetic(&SynthSpec { seed: 18, ..spec }).unwrap().0;
    assert_ne!(a[0].matrix(), other[0].matrix());
}

#[test]
fn manifest_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(21);
    let mut text = String::from("# frame 6 1\n");
    let mut expected = Vec::new();
    for i in 0..4 {
        let gamma = gaussian(6, 5, &mut r);
        let name = format!("set{i}.txt");
        write_matrix(dir.path().join(&name), &gamma).unwrap();
        text.push_str(&format!("{name}\tset{i}\t{}\n", i % 2));
        expected.push(image_set_to_point(&ImageSet::from_stacked(&gamma, "x", None).unwrap(), 2, false).unwrap());
    }
    let path = dir.path().join("manifest.tsv");
    std::fs::write(&path, text).unwrap();
    let manifest = load_manifest(&path).unwrap();
    assert_eq!(manifest.labels(), Some(vec![0, 1, 0, 1]));
    let points = load_points(&manifest, 2, false).unwrap();
    for (a, b) in points.iter().zip(&expected) {
        assert!(geodesic_distance_sq(a, b).unwrap() <= 1e-12);
    }
}

#[test]
fn small_pipeline_recovers_clusters() {
    let spec = SynthSpec {
        clusters: 3,
        per_cluster: 8,
        ambient_dim: 20,
        subspace_dim: 3,
        noise_sigma: 0.05,
        seed: 4,
    };
    let (points, truth) = generate_synthetic(&spec).unwrap();
    let config = SolverConfig {
        neighbors: 7,
        ..SolverConfig::default()
    };
    let result = cluster_points(&points, &config, 3, 0, Some(&truth)).unwrap();
    assert_eq!(result.accuracy, Some(1.0));
    assert_eq!(result.predicted.len(), truth.len());
}
