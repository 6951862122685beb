//! Parameter-space helpers for order and work-group-shape sweeps.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::config::TileShape;

/// Matrix orders swept by the order exploration.
pub const DEFAULT_ORDERS: [usize; 11] = [64, 96, 128, 192, 256, 384, 512, 640, 768, 896, 1024];
/// Matrix orders swept by the work-group-shape exploration.
pub const DEFAULT_LWS_ORDERS: [usize; 4] = [128, 256, 384, 512];
/// Work-items per work-group swept by the work-group-shape exploration.
pub const DEFAULT_LWS_TOTALS: [usize; 4] = [16, 32, 64, 128];

/// All `(s_j, s_i)` with `s_j * s_i == total`, `s_j` ascending.
pub fn enumerate_tile_shapes(total: usize) -> Vec<TileShape> {
    (1..=total).filter(|d| total.is_multiple_of(*d)).map(|s_j| TileShape::new(s_j, total / s_j)).collect()
}

/// Which shapes a work-group-shape sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapeHeuristic {
    #[default]
    Exhaustive,
    /// Only slim shapes with `s_j <= s_i`, which were observed to beat their
    /// transposes.
    PreferSlim,
}

impl ShapeHeuristic {
    pub fn admits(self, shape: TileShape) -> bool {
        match self {
            ShapeHeuristic::Exhaustive => true,
            ShapeHeuristic::PreferSlim => shape.s_j <= shape.s_i,
        }
    }

    pub fn shapes(self, total: usize) -> Vec<TileShape> {
        enumerate_tile_shapes(total).into_iter().filter(|s| self.admits(*s)).collect()
    }
}

/// Picks the shape with the highest mean. Ties go to the smaller `s_j`, then
/// the smaller total. NaN means never win.
pub fn select_winner<I>(candidates: I) -> Option<(TileShape, f64)>
where
    I: IntoIterator<Item = (TileShape, f64)>,
{
    let better = |a: &(TileShape, f64), b: &(TileShape, f64)| -> Ordering {
        a.1.partial_cmp(&b.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.0.s_j.cmp(&a.0.s_j))
            .then_with(|| b.0.total().cmp(&a.0.total()))
    };
    candidates.into_iter().filter(|c| !c.1.is_nan()).max_by(|a, b| better(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn shapes(pairs: &[(usize, usize)]) -> Vec<TileShape> {
        pairs.iter().map(|&(j, i)| TileShape::new(j, i)).collect()
    }

    #[test]
    fn divisor_pairs() {
        assert_eq!(enumerate_tile_shapes(16), shapes(&[(1, 16), (2, 8), (4, 4), (8, 2), (16, 1)]));
        assert_eq!(enumerate_tile_shapes(1), shapes(&[(1, 1)]));
        assert_eq!(enumerate_tile_shapes(32), shapes(&[(1, 32), (2, 16), (4, 8), (8, 4), (16, 2), (32, 1)]));
    }

    #[test]
    fn prefer_slim_filter() {
        assert_eq!(ShapeHeuristic::PreferSlim.shapes(16), shapes(&[(1, 16), (2, 8), (4, 4)]));
    }

    #[test]
    fn winner_and_ties() {
        let w = select_winner(vec![(TileShape::new(4, 4), 9.4535), (TileShape::new(1, 16), 11.789)]);
        assert_eq!(w, Some((TileShape::new(1, 16), 11.789)));
        let w = select_winner(vec![(TileShape::new(2, 8), 1.0), (TileShape::new(1, 16), 1.0)]);
        assert_eq!(w.unwrap().0, TileShape::new(1, 16));
        let w = select_winner(vec![(TileShape::new(1, 32), 1.0), (TileShape::new(1, 16), 1.0)]);
        assert_eq!(w.unwrap().0, TileShape::new(1, 16));
        let w = select_winner(vec![(TileShape::new(1, 16), f64::NAN), (TileShape::new(4, 4), 0.5)]);
        assert_eq!(w.unwrap().0, TileShape::new(4, 4));
        assert_eq!(select_winner(Vec::new()), None);
    }

    proptest! {
        #[test]
        fn divisor_complete(total in 1usize..500) {
            let all = enumerate_tile_shapes(total);
            let divisors = (1..=total).filter(|d| total.is_multiple_of(*d)).count();
            prop_assert_eq!(all.len(), divisors);
            prop_assert!(all.iter().all(|s| s.total() == total));
            prop_assert!(all.windows(2).all(|w| w[0].s_j < w[1].s_j));
            let slim = ShapeHeuristic::PreferSlim.shapes(total);
            prop_assert!(slim.iter().all(|s| all.contains(s)));
            prop_assert_eq!(slim.len(), divisors.div_ceil(2));
        }
    }
}
