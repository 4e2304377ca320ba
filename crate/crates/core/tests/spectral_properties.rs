mod common;

use ndarray::Array1;
use proptest::prelude::*;

use uav_noma::spectral::{
    normalized_laplacian, similarity_matrix, spectral_clustering, symmetric_eigen, user_features,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_spectrum_in_unit_band(seed in any::<u64>(), n in 2usize..40) {
        let (channel, _) = common::random_drop(seed, n, 8);
        let l = normalized_laplacian(&similarity_matrix(&user_features(&channel), None).unwrap());
        let eig = symmetric_eigen(&l).unwrap();
        prop_assert!(eig.eigenvalues.iter().all(|&x| (-1e-10..=2.0 + 1e-10).contains(&x)));
        prop_assert!(eig.eigenvalues[0].abs() < 1e-10);
    }

    #[test]
    fn sqrt_degree_spans_the_null_space(seed in any::<u64>(), n in 2usize..40) {
        let (channel, _) = common::random_drop(seed, n, 8);
        let g = similarity_matrix(&user_features(&channel), None).unwrap();
        let l = normalized_laplacian(&g);
        let v: Array1<f64> = g.w.sum_axis(ndarray::Axis(1)).mapv(f64::sqrt);
        let lv = l.dot(&v);
        prop_assert!(lv.iter().all(|x| x.abs() <= 1e-10 * v.dot(&v).sqrt()));
    }
}

#[test]
fn planted_split_is_the_minimum_normalized_cut() {
    for seed in 0..50 {
        let g = similarity_matrix(&common::planted_blobs(seed, 8), None).unwrap();
        assert_eq!(
            common::min_ncut_partition(&g.w),
            common::planted_partition(),
            "seed {seed}"
        );
        let got = spectral_clustering(&g, 2, seed)
            .unwrap()
            .assignment
            .partition();
        assert_eq!(got, common::planted_partition(), "seed {seed}");
    }
}
