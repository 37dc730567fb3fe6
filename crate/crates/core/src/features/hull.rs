//! Empty-pixel statistics relative to the convex hull of observed pixels.

use crate::features::FeatureGrid;

/// Counts empty pixels strictly inside the convex hull of the non-empty
/// pixel coordinates (holes in the reconstruction) and the remaining empty
/// pixels (boundary pixels count as outside).
///
/// Grids with fewer than 3 non-collinear non-empty pixels have no hull:
/// every empty pixel counts as outside. Pixel coordinates are integers, so
/// hull construction and the inside test are exact.
pub fn f_empty(grid: &FeatureGrid) -> (u64, u64) {
    let res = grid.res as i64;
    let mut occupied: Vec<(i64, i64)> = Vec::new();
    for v in 0..res {
        for u in 0..res {
            if !grid.empty_mask[(v * res + u) as usize] {
                occupied.push((u, v));
            }
        }
    }
    let total_empty = (res * res) as u64 - occupied.len() as u64;
    let hull = convex_hull(&occupied);
    if hull.len() < 3 {
        return (0, total_empty);
    }
    let mut inside = 0u64;
    for v in 0..res {
        for u in 0..res {
            if !grid.empty_mask[(v * res + u) as usize] {
                continue;
            }
            if strictly_inside(&hull, (u, v)) {
                inside += 1;
            }
        }
    }
    (inside, total_empty - inside)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain convex hull, counter-clockwise, collinear points dropped.
/// Returns fewer than 3 vertices for degenerate inputs.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        // All input points collinear.
        return Vec::new();
    }
    lower
}

/// Strict interior test for a counter-clockwise convex polygon: the point
/// must lie strictly left of every edge. Boundary points fail.
fn strictly_inside(hull: &[(i64, i64)], p: (i64, i64)) -> bool {
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        if cross(a, b, p) <= 0 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::grid::CHANNELS;

    fn grid_with_occupied(res: u32, occupied: &[(u32, u32)]) -> FeatureGrid {
        let n = res as usize * res as usize;
        let mut g = FeatureGrid {
            res,
            data: vec![0.0; n * CHANNELS],
            empty_mask: vec![true; n],
        };
        for &(u, v) in occupied {
            let i = v as usize * res as usize + u as usize;
            g.empty_mask[i] = false;
            g.data[i * CHANNELS + 2] = 1.0;
            g.data[i * CHANNELS + 4] = 1.0;
        }
        g
    }

    #[test]
    fn fully_occupied_grid() {
        let res = 8;
        let all: Vec<(u32, u32)> = (0..res)
            .flat_map(|v| (0..res).map(move |u| (u, v)))
            .collect();
        let grid = grid_with_occupied(res, &all);
        assert_eq!(f_empty(&grid), (0, 0));
    }

    #[test]
    fn fully_empty_grid() {
        let grid = grid_with_occupied(8, &[]);
        assert_eq!(f_empty(&grid), (0, 64));
    }

    #[test]
    fn collinear_occupancy_has_no_hull() {
        let grid = grid_with_occupied(8, &[(1, 1), (2, 2), (3, 3), (4, 4)]);
        assert_eq!(f_empty(&grid), (0, 60));
    }

    #[test]
    fn punched_hole_counts_as_inside() {
        // Occupy a 16x16 square except a 5x5 interior hole.
        let res = 32u32;
        let mut occupied = Vec::new();
        for v in 4..20u32 {
            for u in 4..20u32 {
                let in_hole = (8..13).contains(&u) && (8..13).contains(&v);
                if !in_hole {
                    occupied.push((u, v));
                }
            }
        }
        let grid = grid_with_occupied(res, &occupied);
        let (inside, outside) = f_empty(&grid);
        assert_eq!(inside, 25);
        assert_eq!(inside + outside, grid.empty_count());
    }

    #[test]
    fn boundary_empties_count_as_outside() {
        // A diamond hull; empty pixels on its edges must count outside.
        let grid = grid_with_occupied(16, &[(8, 2), (2, 8), (8, 14), (14, 8)]);
        let (inside, outside) = f_empty(&grid);
        // Edge midpoints like (5,5) are on the hull boundary.
        assert!(inside > 0);
        assert_eq!(inside + outside, grid.empty_count());
        // Strict interior of the diamond = lattice points with L1 distance
        // from (8,8) strictly below 6.
        let mut expect_inside = 0u64;
        for v in 0..16i64 {
            for u in 0..16i64 {
                let occupied = [(8, 2), (2, 8), (8, 14), (14, 8)].contains(&(u, v));
                if !occupied && (u - 8).abs() + (v - 8).abs() < 6 {
                    expect_inside += 1;
                }
            }
        }
        assert_eq!(inside, expect_inside);
    }

    #[test]
    fn sum_invariant_over_random_grids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(41);
        for _ in 0..20 {
            let res = 24u32;
            let n = rng.gen_range(0..200);
            let occupied: Vec<(u32, u32)> = (0..n)
                .map(|_| (rng.gen_range(0..res), rng.gen_range(0..res)))
                .collect();
            let grid = grid_with_occupied(res, &occupied);
            let (inside, outside) = f_empty(&grid);
            assert_eq!(inside + outside, grid.empty_count());
        }
    }
}
