//! Property tests for the geometric kernels and featurization.

use nalgebra::Point3;
use proptest::prelude::*;

use nbvlab::features::{f_empty, pool_with_variance, FeatureGrid, CHANNELS};
use nbvlab::geom::{chamfer, estimate_normals, voxel_downsample, PointCloud};

fn arb_point() -> impl Strategy<Value = Point3<f64>> {
    (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn arb_cloud(min: usize, max: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(arb_point(), min..max).prop_map(PointCloud::from_points)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chamfer_is_symmetric_and_zero_on_self(a in arb_cloud(1, 60), b in arb_cloud(1, 60)) {
        let ab = chamfer(&a, &b).unwrap();
        let ba = chamfer(&b, &a).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn voxel_output_is_smaller_and_contained(cloud in arb_cloud(1, 200), voxel in 0.05f64..3.0) {
        let out = voxel_downsample(&cloud, voxel).unwrap();
        prop_assert!(out.len() <= cloud.len());
        prop_assert!(!out.is_empty());
        // Each centroid lies inside its voxel's axis-aligned bounds.
        for p in &out.points {
            for a in 0..3 {
                let cell = (p[a] / voxel).floor();
                prop_assert!(p[a] >= cell * voxel - 1e-9);
                prop_assert!(p[a] <= (cell + 1.0) * voxel + 1e-9);
            }
        }
    }

    #[test]
    fn normals_are_unit_and_oriented(cloud in arb_cloud(20, 120)) {
        let origin = Point3::new(0.0, 0.0, 50.0);
        let out = estimate_normals(&cloud, 8, origin).unwrap();
        for (p, n) in out.points.iter().zip(out.normals.as_ref().unwrap()) {
            prop_assert!((n.norm() - 1.0).abs() < 1e-9);
            prop_assert!(n.dot(&(origin - p)) >= 0.0);
        }
    }

    #[test]
    fn empty_counts_partition_the_empty_pixels(occupied in prop::collection::vec((0u32..24, 0u32..24), 0..120)) {
        let res = 24u32;
        let n = res as usize * res as usize;
        let mut grid = FeatureGrid {
            res,
            data: vec![0.0; n * CHANNELS],
            empty_mask: vec![true; n],
        };
        for (u, v) in occupied {
            let i = v as usize * res as usize + u as usize;
            grid.empty_mask[i] = false;
            grid.data[i * CHANNELS + 4] = 1.0;
        }
        let (inside, outside) = f_empty(&grid);
        prop_assert_eq!(inside + outside, grid.empty_count());
    }

    #[test]
    fn pooling_means_and_variances_are_consistent(depths in prop::collection::vec(0.5f32..8.0, 256)) {
        let res = 16u32;
        let n = res as usize * res as usize;
        let mut grid = FeatureGrid {
            res,
            data: vec![0.0; n * CHANNELS],
            empty_mask: vec![false; n],
        };
        for (i, d) in depths.iter().enumerate() {
            grid.data[i * CHANNELS + 4] = *d;
        }
        let (f_p, f_v) = pool_with_variance(&grid).unwrap();
        // Fully-populated grid: pooled mean preserves the grid mean.
        let full: f64 = depths.iter().map(|&d| f64::from(d)).sum::<f64>() / n as f64;
        let pooled: f64 = f_p.data.iter().skip(4).step_by(CHANNELS).map(|&x| f64::from(x)).sum::<f64>()
            / (n as f64 / 4.0);
        prop_assert!((full - pooled).abs() < 1e-5);
        // Variances non-negative everywhere.
        prop_assert!(f_v.data.iter().all(|&x| x >= 0.0));
    }
}
