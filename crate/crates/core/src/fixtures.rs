//! Deterministic benchmark datasets for tests, benches and the acceptance
//! suite.
//!
//! `balance_scale` is the classic balance-scale table itself: the full
//! 5^4 enumeration of (left weight, left distance, right weight, right
//! distance) labeled by comparing the two torques, binarized as balanced
//! ("B", 49 rows) against the rest ("NB", 576 rows).
//!
//! The other three generators are seeded synthetic stand-ins shaped like
//! well-known imbalanced benchmarks: they reproduce the published
//! (attributes, minority, majority) shapes exactly, and their class
//! geometry is calibrated so that undersampler behaviour (retained-majority
//! counts, achievable scores) falls in the same regime. Each dataset lives
//! near a low-rank latent structure so the reconstruction networks can fit
//! its minority class to tolerance.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;

pub const PIMA_SEED: u64 = 6;
pub const IONOSPHERE_SEED: u64 = 1;
pub const SATIMAGE_SEED: u64 = 1;

/// The complete balance-scale table: n=625, m=4, classes B (49) / NB (576).
pub fn balance_scale() -> Dataset {
    let mut features = Array2::zeros((625, 4));
    let mut labels = Vec::with_capacity(625);
    let mut row = 0;
    for lw in 1..=5u32 {
        for ld in 1..=5u32 {
            for rw in 1..=5u32 {
                for rd in 1..=5u32 {
                    features[[row, 0]] = lw as f64;
                    features[[row, 1]] = ld as f64;
                    features[[row, 2]] = rw as f64;
                    features[[row, 3]] = rd as f64;
                    labels.push(if lw * ld == rw * rd { "B" } else { "NB" }.to_string());
                    row += 1;
                }
            }
        }
    }
    Dataset::new(
        features,
        labels,
        vec![
            "left_weight".into(),
            "left_distance".into(),
            "right_weight".into(),
            "right_distance".into(),
        ],
        "class".into(),
    )
    .expect("balance table is well-formed")
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random orthonormal basis (m x m) via modified Gram-Schmidt on a seeded
/// Gaussian matrix.
fn orthonormal_basis(m: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut basis = Array2::from_shape_fn((m, m), |_| normal(rng));
    for j in 0..m {
        for prev in 0..j {
            let dot = basis.column(j).dot(&basis.column(prev));
            let prev_col = basis.column(prev).to_owned();
            let mut col = basis.column_mut(j);
            col.scaled_add(-dot, &prev_col);
        }
        let norm = basis.column(j).dot(&basis.column(j)).sqrt();
        basis.column_mut(j).mapv_inplace(|v| v / norm);
    }
    basis
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| normal(rng))
}

/// Embed latent rows through the first r columns of `basis`, optionally
/// bending the sheet into three extra directions with quadratic terms.
fn embed(z: &Array2<f64>, basis: &Array2<f64>, gamma: f64) -> Array2<f64> {
    let m = basis.nrows();
    let r = z.ncols();
    let mut out = Array2::zeros((z.nrows(), m));
    for (i, zi) in z.outer_iter().enumerate() {
        let mut x = Array1::<f64>::zeros(m);
        for (k, &zk) in zi.iter().enumerate() {
            x.scaled_add(zk, &basis.column(k));
        }
        if gamma != 0.0 && r >= 5 && m >= r + 3 {
            let q = [zi[0] * zi[1], zi[2] * zi[2] - 1.0, zi[3] * zi[4]];
            for (t, &qv) in q.iter().enumerate() {
                x.scaled_add(gamma * qv, &basis.column(r + t));
            }
        }
        out.row_mut(i).assign(&x);
    }
    out
}

fn add_noise(x: &mut Array2<f64>, sigma: f64, rng: &mut ChaCha8Rng) {
    for v in x.iter_mut() {
        *v += sigma * normal(rng);
    }
}

/// Stand-in shaped like the diabetes benchmark: m=8, minority 268 ("1"),
/// majority 500 ("0"). Both classes sit near a curved rank-5 sheet; the
/// minority has a separable main mode plus scattered points buried in the
/// majority bulk, and part of the majority consists of near-duplicate rows.
pub fn pima_like(seed: u64) -> Dataset {
    let m = 8;
    let r_lat = 5;
    let gamma = 0.25;
    let (n_maj, n_min) = (500, 268);
    let n_bury = 52;
    let n_dup = 100;
    let delta = 2.15;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = orthonormal_basis(m, &mut rng);

    // majority: base rows plus jittered duplicates of the first `n_dup`
    let z_maj = gaussian_matrix(n_maj - n_dup, r_lat, &mut rng);
    let mut x_maj = embed(&z_maj, &basis, gamma);
    add_noise(&mut x_maj, 0.3, &mut rng);
    let mut majority = Array2::zeros((n_maj, m));
    majority
        .slice_mut(ndarray::s![..n_maj - n_dup, ..])
        .assign(&x_maj);
    for i in 0..n_dup {
        for j in 0..m {
            majority[[n_maj - n_dup + i, j]] = x_maj[[i, j]] + 0.004 * normal(&mut rng);
        }
    }

    // minority: anisotropic main mode offset along two latent axes
    let mut z_main = gaussian_matrix(n_min - n_bury, r_lat, &mut rng);
    let scales = [0.55, 0.55, 0.8, 0.8, 0.8];
    for mut row in z_main.outer_iter_mut() {
        for (k, v) in row.iter_mut().enumerate() {
            *v *= scales[k];
        }
        row[0] += delta;
        row[1] += delta;
    }
    let mut z_bury = gaussian_matrix(n_bury, r_lat, &mut rng);
    z_bury.mapv_inplace(|v| v * 0.85);
    let mut z_min = Array2::zeros((n_min, r_lat));
    z_min
        .slice_mut(ndarray::s![..n_min - n_bury, ..])
        .assign(&z_main);
    z_min.slice_mut(ndarray::s![n_min - n_bury.., ..]).assign(&z_bury);
    let mut minority = embed(&z_min, &basis, gamma);
    add_noise(&mut minority, 0.012, &mut rng);

    assemble(majority, minority, "0", "1", m)
}

/// Stand-in shaped like the radar-returns benchmark: m=34, minority 126
/// ("b", diffuse) and majority 225 ("g") split into a tight clump inside
/// the minority's support and a tight clump far outside it.
pub fn ionosphere_like(seed: u64) -> Dataset {
    let m = 34;
    let r_lat = 12;
    let (n_near, n_far) = (120, 105);
    let n_min = 126;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = orthonormal_basis(m, &mut rng);

    // diffuse minority over the latent subspace
    let z_min = gaussian_matrix(n_min, r_lat, &mut rng);
    let mut minority = embed(&z_min, &basis, 0.0);
    add_noise(&mut minority, 0.02, &mut rng);

    // majority clump centers: one inside the minority ball, one far out
    // along directions orthogonal to the latent sheet
    let mut c_near = Array1::<f64>::zeros(r_lat);
    for v in c_near.iter_mut() {
        *v = normal(&mut rng);
    }
    let norm = c_near.dot(&c_near).sqrt();
    c_near.mapv_inplace(|v| v / norm * 1.2);

    let mut z_near = gaussian_matrix(n_near, r_lat, &mut rng);
    z_near.mapv_inplace(|v| v * 0.3);
    for mut row in z_near.outer_iter_mut() {
        row += &c_near;
    }
    let mut near = embed(&z_near, &basis, 0.0);
    add_noise(&mut near, 0.02, &mut rng);

    let mut z_far = gaussian_matrix(n_far, r_lat, &mut rng);
    z_far.mapv_inplace(|v| v * 0.3);
    let mut far = embed(&z_far, &basis, 0.0);
    // push the far clump out of the sheet in two orthogonal directions
    for mut row in far.outer_iter_mut() {
        row.scaled_add(2.6, &basis.column(r_lat));
        row.scaled_add(1.8, &basis.column(r_lat + 1));
    }
    add_noise(&mut far, 0.02, &mut rng);

    let mut majority = Array2::zeros((n_near + n_far, m));
    majority.slice_mut(ndarray::s![..n_near, ..]).assign(&near);
    majority.slice_mut(ndarray::s![n_near.., ..]).assign(&far);

    assemble(majority, minority, "g", "b", m)
}

/// Stand-in shaped like the satellite-image benchmark: m=36, minority 626
/// ("4") compact and well separated from a majority of 5809 ("other")
/// spread over five broad latent blobs.
pub fn satimage_like(seed: u64) -> Dataset {
    let m = 36;
    let r_lat = 12;
    let n_min = 626;
    let blob_sizes = [1162usize, 1162, 1162, 1162, 1161];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = orthonormal_basis(m, &mut rng);

    // minority direction in latent space
    let mut u_min = Array1::<f64>::zeros(r_lat);
    for v in u_min.iter_mut() {
        *v = normal(&mut rng);
    }
    let norm = u_min.dot(&u_min).sqrt();
    u_min.mapv_inplace(|v| v / norm);

    let n_maj: usize = blob_sizes.iter().sum();
    let mut z_maj = Array2::<f64>::zeros((n_maj, r_lat));
    let radii = [0.0, 1.2, 1.8, 2.4, 3.0];
    let mut row = 0;
    for (b, (&size, &radius)) in blob_sizes.iter().zip(radii.iter()).enumerate() {
        let mut dir = Array1::<f64>::zeros(r_lat);
        for v in dir.iter_mut() {
            *v = normal(&mut rng);
        }
        // keep majority centers away from the minority direction
        let along = dir.dot(&u_min);
        if along > 0.0 {
            dir.scaled_add(-2.0 * along, &u_min);
        }
        let dn = dir.dot(&dir).sqrt();
        dir.mapv_inplace(|v| v / dn * radius);
        let _ = b;
        for _ in 0..size {
            for k in 0..r_lat {
                z_maj[[row, k]] = dir[k] + normal(&mut rng);
            }
            row += 1;
        }
    }
    let mut majority = embed(&z_maj, &basis, 0.0);
    add_noise(&mut majority, 0.015, &mut rng);

    let mut z_min = gaussian_matrix(n_min, r_lat, &mut rng);
    z_min.mapv_inplace(|v| v * 0.5);
    for mut r in z_min.outer_iter_mut() {
        r.scaled_add(3.5, &u_min);
    }
    let mut minority = embed(&z_min, &basis, 0.0);
    add_noise(&mut minority, 0.015, &mut rng);

    assemble(majority, minority, "other", "4", m)
}

fn assemble(
    majority: Array2<f64>,
    minority: Array2<f64>,
    majority_label: &str,
    minority_label: &str,
    m: usize,
) -> Dataset {
    let n = majority.nrows() + minority.nrows();
    let mut features = Array2::zeros((n, m));
    features
        .slice_mut(ndarray::s![..majority.nrows(), ..])
        .assign(&majority);
    features
        .slice_mut(ndarray::s![majority.nrows().., ..])
        .assign(&minority);
    let mut labels = vec![majority_label.to_string(); majority.nrows()];
    labels.extend(vec![minority_label.to_string(); minority.nrows()]);
    let feature_names = (1..=m).map(|j| format!("f{j}")).collect();
    Dataset::new(features, labels, feature_names, "class".into())
        .expect("fixture is well-formed")
}
