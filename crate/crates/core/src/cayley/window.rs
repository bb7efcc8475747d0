use serde::{Deserialize, Serialize};

/// A permutation-invariant predicate on `m` points of the torus `T^n`.
///
/// Implementations receive the points `u_i / k mod 1` of a generating set in
/// arbitrary order and must not depend on that order. The window is expected
/// to be Jordan measurable with positive measure; this is not checked.
pub trait Window: Sync {
    fn contains(&self, points: &[Vec<f64>]) -> bool;
}

/// The whole configuration space.
#[derive(Clone, Copy, Debug, Default)]
pub struct FullWindow;

impl Window for FullWindow {
    fn contains(&self, _points: &[Vec<f64>]) -> bool {
        true
    }
}

/// Adapts a closure into a [`Window`].
pub struct FnWindow<F>(pub F);

impl<F> Window for FnWindow<F>
where
    F: Fn(&[Vec<f64>]) -> bool + Sync,
{
    fn contains(&self, points: &[Vec<f64>]) -> bool {
        (self.0)(points)
    }
}

/// Axis-aligned box on the lexicographically sorted point list.
///
/// Sorting first makes the predicate permutation invariant. Point `i` of the
/// sorted list must satisfy `lower[i][j] <= p[j] < upper[i][j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SortedBoxWindow {
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

impl SortedBoxWindow {
    /// Box for `n = 1`, one interval per sorted coordinate.
    pub fn intervals(bounds: &[(f64, f64)]) -> Self {
        Self {
            lower: bounds.iter().map(|&(lo, _)| vec![lo]).collect(),
            upper: bounds.iter().map(|&(_, hi)| vec![hi]).collect(),
        }
    }

    pub fn points(&self) -> usize {
        self.lower.len()
    }

    pub fn dim(&self) -> usize {
        self.lower.first().map_or(0, Vec::len)
    }

    /// Lebesgue measure of the window in `S_m \ (T^n)^m` for `n = 1`,
    /// i.e. `m!` times the volume of the box intersected with the sorted
    /// simplex. Only the two-point case is needed here.
    pub fn measure_two_points(&self) -> Option<f64> {
        if self.points() != 2 || self.dim() != 1 {
            return None;
        }
        let (a0, a1) = (self.lower[0][0].max(0.0), self.upper[0][0].min(1.0));
        let (b0, b1) = (self.lower[1][0].max(0.0), self.upper[1][0].min(1.0));
        // area of {a0<=x<a1, b0<=y<b1, x<=y}, by integrating over x
        let steps = 20_000;
        let h = (a1 - a0).max(0.0) / steps as f64;
        let mut area = 0.0;
        for i in 0..steps {
            let x = a0 + (i as f64 + 0.5) * h;
            area += (b1 - x.max(b0)).max(0.0) * h;
        }
        Some(2.0 * area)
    }
}

impl Window for SortedBoxWindow {
    fn contains(&self, points: &[Vec<f64>]) -> bool {
        if points.len() != self.points() {
            return false;
        }
        let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        sorted.iter().enumerate().all(|(i, p)| {
            p.iter()
                .enumerate()
                .all(|(j, &x)| self.lower[i][j] <= x && x < self.upper[i][j])
        })
    }
}
