//! Brute-force k-nearest-neighbor queries over a fixed reference matrix.
//! Squared Euclidean metric; distance ties break toward the smaller
//! reference index so results never depend on evaluation order.

use ndarray::{ArrayView1, ArrayView2};

pub fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub struct NeighborQuery<'a> {
    points: ArrayView2<'a, f64>,
}

impl<'a> NeighborQuery<'a> {
    pub fn new(points: ArrayView2<'a, f64>) -> Self {
        NeighborQuery { points }
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    /// The k nearest reference rows to `query`, optionally excluding one
    /// reference index (the query itself when querying within the set).
    /// Sorted by (distance, index) ascending; k is clamped to the number of
    /// candidates.
    pub fn k_nearest(
        &self,
        query: ArrayView1<'_, f64>,
        k: usize,
        exclude: Option<usize>,
    ) -> Vec<(usize, f64)> {
        let mut scored: Vec<(usize, f64)> = (0..self.points.nrows())
            .filter(|i| Some(*i) != exclude)
            .map(|i| (i, squared_distance(self.points.row(i), query)))
            .collect();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }

    /// Index of the single nearest reference row.
    pub fn nearest(&self, query: ArrayView1<'_, f64>, exclude: Option<usize>) -> Option<usize> {
        self.k_nearest(query, 1, exclude).first().map(|(i, _)| *i)
    }
}
