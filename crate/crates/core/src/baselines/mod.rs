//! Classical undersamplers: random undersampling, the three NearMiss
//! variants, Tomek-link removal, edited nearest neighbours and its
//! iterated and cleaning-rule relatives, and cluster centroids.
//!
//! Distance-based rules operate on an internally min-max-scaled copy of the
//! data; selected indices and surviving rows always refer to the original
//! dataset. Only majority rows are ever removed.

pub mod kmeans;
pub mod neighbors;

use ndarray::Axis;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{checked_split, fit_apply_minmax, Dataset};
use crate::error::{Error, Result};
use crate::nus::ResampleOutcome;
use kmeans::{kmeans, KMeansConfig};
use neighbors::NeighborQuery;

/// How a neighbourhood disagreement triggers removal in ENN and AllKNN.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Remove a majority row when strictly more than half of its k nearest
    /// neighbours belong to the other class. Even-k vote ties keep the row.
    #[default]
    Majority,
    /// Remove a majority row when any of its k nearest neighbours belongs
    /// to the other class (the common library default, and the variant that
    /// reproduces published retained-majority counts).
    Unanimous,
}

impl SelectionRule {
    fn removes(self, enemies: usize, k: usize) -> bool {
        match self {
            SelectionRule::Majority => 2 * enemies > k,
            SelectionRule::Unanimous => enemies >= 1,
        }
    }
}

/// Uniformly keep n1 majority rows without replacement.
pub fn random_undersample(d: &Dataset, seed: u64) -> Result<ResampleOutcome> {
    let split = checked_split(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, split.n_majority(), split.n_minority());
    let kept: Vec<usize> = picks.iter().map(|i| split.majority_indices[i]).collect();
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

/// NearMiss undersampling.
///
/// * version 1: keep the n1 majority rows with the smallest mean distance
///   to their k nearest minority rows;
/// * version 2: same, but the k farthest minority rows;
/// * version 3: for each minority row keep its k nearest majority rows
///   (union, deduplicated; the kept count is data-dependent).
pub fn near_miss(d: &Dataset, version: u32, k: usize) -> Result<ResampleOutcome> {
    if !(1..=3).contains(&version) {
        return Err(Error::BadVersion(version));
    }
    let split = checked_split(d)?;
    if k == 0 {
        return Err(Error::BadK {
            k,
            reason: "k must be >= 1".into(),
        });
    }
    if version <= 2 && k > split.n_minority() {
        return Err(Error::BadK {
            k,
            reason: format!("k exceeds minority count {}", split.n_minority()),
        });
    }
    if version == 3 && k > split.n_majority() {
        return Err(Error::BadK {
            k,
            reason: format!("k exceeds majority count {}", split.n_majority()),
        });
    }

    let (scaled, _) = fit_apply_minmax(d);
    let minority = scaled.features().select(Axis(0), &split.minority_indices);
    let majority = scaled.features().select(Axis(0), &split.majority_indices);

    let kept = match version {
        1 | 2 => {
            let query = NeighborQuery::new(minority.view());
            let mut scored: Vec<(f64, usize)> = split
                .majority_indices
                .iter()
                .enumerate()
                .map(|(pos, &idx)| {
                    let mut dists: Vec<f64> = (0..minority.nrows())
                        .map(|j| {
                            neighbors::squared_distance(minority.row(j), majority.row(pos))
                        })
                        .collect();
                    dists.sort_by(f64::total_cmp);
                    let mean = if version == 1 {
                        dists[..k].iter().sum::<f64>() / k as f64
                    } else {
                        dists[dists.len() - k..].iter().sum::<f64>() / k as f64
                    };
                    (mean, idx)
                })
                .collect();
            let _ = query;
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            scored
                .iter()
                .take(split.n_minority())
                .map(|(_, idx)| *idx)
                .collect()
        }
        3 => {
            let query = NeighborQuery::new(majority.view());
            let mut kept: Vec<usize> = Vec::new();
            for &min_idx in &split.minority_indices {
                let pos_in_scaled = scaled.row(min_idx);
                for (pos, _) in query.k_nearest(pos_in_scaled, k, None) {
                    kept.push(split.majority_indices[pos]);
                }
            }
            kept.sort_unstable();
            kept.dedup();
            kept
        }
        _ => unreachable!(),
    };
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

/// Remove the majority member of every Tomek link (a cross-class pair of
/// mutual nearest neighbours).
pub fn tomek_links(d: &Dataset) -> Result<ResampleOutcome> {
    let split = checked_split(d)?;
    let (scaled, _) = fit_apply_minmax(d);
    let query = NeighborQuery::new(scaled.features());

    let nn: Vec<usize> = (0..d.n_rows())
        .map(|i| query.nearest(scaled.row(i), Some(i)).expect("n >= 2"))
        .collect();

    let mut removed = vec![false; d.n_rows()];
    for i in 0..d.n_rows() {
        let j = nn[i];
        if nn[j] == i && d.label(i) != d.label(j) {
            let majority = if d.label(i) == split.majority_label { i } else { j };
            removed[majority] = true;
        }
    }
    let kept: Vec<usize> = split
        .majority_indices
        .iter()
        .copied()
        .filter(|&i| !removed[i])
        .collect();
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

fn enn_removed_rows(
    scaled: &Dataset,
    majority_label: &str,
    rows: &[usize],
    k: usize,
    rule: SelectionRule,
) -> Vec<usize> {
    let subset = scaled.features().select(Axis(0), rows);
    let query = NeighborQuery::new(subset.view());
    let mut removed = Vec::new();
    for (pos, &idx) in rows.iter().enumerate() {
        if scaled.label(idx) != majority_label {
            continue;
        }
        let neighbors = query.k_nearest(subset.row(pos), k, Some(pos));
        let enemies = neighbors
            .iter()
            .filter(|(p, _)| scaled.label(rows[*p]) != majority_label)
            .count();
        if rule.removes(enemies, neighbors.len()) {
            removed.push(idx);
        }
    }
    removed
}

/// Edited nearest neighbours with the majority-vote rule.
pub fn enn(d: &Dataset, k: usize) -> Result<ResampleOutcome> {
    enn_with_rule(d, k, SelectionRule::Majority)
}

pub fn enn_with_rule(d: &Dataset, k: usize, rule: SelectionRule) -> Result<ResampleOutcome> {
    if k == 0 || k >= d.n_rows() {
        return Err(Error::BadK {
            k,
            reason: format!("k must satisfy 1 <= k < n = {}", d.n_rows()),
        });
    }
    let split = checked_split(d)?;
    let (scaled, _) = fit_apply_minmax(d);
    let all_rows: Vec<usize> = (0..d.n_rows()).collect();
    let removed = enn_removed_rows(&scaled, &split.majority_label, &all_rows, k, rule);
    let kept: Vec<usize> = split
        .majority_indices
        .iter()
        .copied()
        .filter(|i| !removed.contains(i))
        .collect();
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

/// Iterated ENN: apply the removal rule for k = 1, 2, .., k_max, each pass
/// running on the survivors of the previous one.
pub fn all_knn(d: &Dataset, k_max: usize) -> Result<ResampleOutcome> {
    all_knn_with_rule(d, k_max, SelectionRule::Majority)
}

pub fn all_knn_with_rule(
    d: &Dataset,
    k_max: usize,
    rule: SelectionRule,
) -> Result<ResampleOutcome> {
    if k_max == 0 {
        return Err(Error::BadK {
            k: k_max,
            reason: "k_max must be >= 1".into(),
        });
    }
    let split = checked_split(d)?;
    let (scaled, _) = fit_apply_minmax(d);
    let mut alive: Vec<usize> = (0..d.n_rows()).collect();
    for k in 1..=k_max {
        if alive.len() <= k {
            break;
        }
        let removed = enn_removed_rows(&scaled, &split.majority_label, &alive, k, rule);
        if !removed.is_empty() {
            alive.retain(|i| !removed.contains(i));
        }
    }
    let kept: Vec<usize> = alive
        .into_iter()
        .filter(|&i| d.label(i) == split.majority_label)
        .collect();
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

/// Neighbourhood cleaning rule: ENN removals plus, for every minority row
/// outvoted by its k nearest neighbours, the majority rows among those
/// neighbours.
pub fn ncr(d: &Dataset, k: usize) -> Result<ResampleOutcome> {
    if k == 0 || k >= d.n_rows() {
        return Err(Error::BadK {
            k,
            reason: format!("k must satisfy 1 <= k < n = {}", d.n_rows()),
        });
    }
    let split = checked_split(d)?;
    let (scaled, _) = fit_apply_minmax(d);
    let all_rows: Vec<usize> = (0..d.n_rows()).collect();
    let mut removed =
        enn_removed_rows(&scaled, &split.majority_label, &all_rows, k, SelectionRule::Majority);

    let query = NeighborQuery::new(scaled.features());
    for &min_idx in &split.minority_indices {
        let neighbors = query.k_nearest(scaled.row(min_idx), k, Some(min_idx));
        let enemies = neighbors
            .iter()
            .filter(|(p, _)| d.label(*p) == split.majority_label)
            .count();
        if 2 * enemies > neighbors.len() {
            for (p, _) in neighbors {
                if d.label(p) == split.majority_label {
                    removed.push(p);
                }
            }
        }
    }
    removed.sort_unstable();
    removed.dedup();
    let kept: Vec<usize> = split
        .majority_indices
        .iter()
        .copied()
        .filter(|i| removed.binary_search(i).is_err())
        .collect();
    Ok(ResampleOutcome::from_selection(d, &split, kept, None))
}

/// Replace the majority class with the centroids of a k-means run, k = n1.
/// Centroids are synthesized points, not original rows.
pub fn cluster_centroids(d: &Dataset, seed: u64) -> Result<ResampleOutcome> {
    let split = checked_split(d)?;
    let (scaled, params) = fit_apply_minmax(d);
    let majority = scaled.features().select(Axis(0), &split.majority_indices);
    let model = kmeans(
        majority.view(),
        split.n_minority(),
        seed,
        &KMeansConfig::default(),
    );
    let centroids = params.inverse_transform(model.centroids.view());
    Ok(ResampleOutcome::from_selection(
        d,
        &split,
        Vec::new(),
        Some(centroids),
    ))
}
