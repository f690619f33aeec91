//! Lloyd's k-means with k-means++ seeding. Deterministic per seed; empty
//! clusters are re-seeded to the point farthest from their centroid.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::neighbors::squared_distance;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub max_iters: usize,
    /// Stop when no centroid moves farther than this (Euclidean).
    pub shift_tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iters: 300,
            shift_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansModel {
    pub centroids: Array2<f64>,
    pub iterations_run: usize,
    pub inertia: f64,
    /// Inertia after every assignment step, in order. Non-increasing.
    pub inertia_trace: Vec<f64>,
}

fn assign(data: ArrayView2<'_, f64>, centroids: &Array2<f64>) -> (Vec<usize>, f64) {
    let mut labels = vec![0usize; data.nrows()];
    let mut inertia = 0.0;
    for (i, row) in data.outer_iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, centroid) in centroids.outer_iter().enumerate() {
            let d = squared_distance(row, centroid);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        inertia += best_d;
    }
    (labels, inertia)
}

fn plus_plus_init(data: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = data.nrows();
    let m = data.ncols();
    let mut centroids = Array2::zeros((k, m));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&data.row(first));

    let mut d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(data.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 && total.is_finite() {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // all points coincide with existing centroids
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&data.row(chosen));
        for i in 0..n {
            let d = squared_distance(data.row(i), centroids.row(c));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centroids
}

/// Run k-means over the rows of `data`. Requires 1 <= k <= n.
pub fn kmeans(data: ArrayView2<'_, f64>, k: usize, seed: u64, cfg: &KMeansConfig) -> KMeansModel {
    let n = data.nrows();
    assert!(k >= 1 && k <= n, "k must be in 1..=n, got k={k}, n={n}");
    let m = data.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(data, k, &mut rng);

    let mut trace = Vec::new();
    let mut iterations = 0usize;
    loop {
        let (labels, inertia) = assign(data, &centroids);
        trace.push(inertia);
        if iterations >= cfg.max_iters {
            break;
        }

        let mut sums = Array2::<f64>::zeros((k, m));
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            let mut row = sums.row_mut(c);
            row += &data.row(i);
            counts[c] += 1;
        }
        let mut next = centroids.clone();
        for c in 0..k {
            if counts[c] > 0 {
                let mut row = next.row_mut(c);
                row.assign(&sums.row(c));
                row /= counts[c] as f64;
            } else {
                // re-seed an empty cluster onto the point farthest from its
                // current centroid (ties toward the smaller index)
                let mut far = 0usize;
                let mut far_d = -1.0;
                for i in 0..n {
                    let d = squared_distance(data.row(i), centroids.row(c));
                    if d > far_d {
                        far_d = d;
                        far = i;
                    }
                }
                next.row_mut(c).assign(&data.row(far));
            }
        }

        let mut shift: f64 = 0.0;
        for c in 0..k {
            shift = shift.max(squared_distance(next.row(c), centroids.row(c)).sqrt());
        }
        centroids = next;
        iterations += 1;
        if shift < cfg.shift_tol {
            let (_, final_inertia) = assign(data, &centroids);
            trace.push(final_inertia);
            break;
        }
    }

    let inertia = *trace.last().expect("at least one assignment");
    KMeansModel {
        centroids,
        iterations_run: iterations,
        inertia,
        inertia_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn k1_centroid_is_column_mean() {
        let data = array![[0.0, 2.0], [2.0, 4.0], [4.0, 0.0]];
        let model = kmeans(data.view(), 1, 0, &KMeansConfig::default());
        assert_abs_diff_eq!(model.centroids[[0, 0]], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(model.centroids[[0, 1]], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn inertia_trace_non_increasing() {
        let data = ndarray::Array2::from_shape_fn((60, 3), |(i, j)| {
            ((i * 7919 + j * 104729) % 1000) as f64 / 1000.0
        });
        let model = kmeans(data.view(), 5, 3, &KMeansConfig::default());
        for w in model.inertia_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "inertia increased: {} -> {}", w[0], w[1]);
        }
        assert!(model.inertia >= 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let data = ndarray::Array2::from_shape_fn((40, 2), |(i, j)| {
            ((i * 31 + j * 17) % 97) as f64 / 97.0
        });
        let a = kmeans(data.view(), 4, 11, &KMeansConfig::default());
        let b = kmeans(data.view(), 4, 11, &KMeansConfig::default());
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.iterations_run, b.iterations_run);
    }

    #[test]
    fn k_equals_n_zero_inertia() {
        let data = array![[0.0], [1.0], [2.0]];
        let model = kmeans(data.view(), 3, 5, &KMeansConfig::default());
        assert_abs_diff_eq!(model.inertia, 0.0, epsilon = 1e-12);
    }
}
