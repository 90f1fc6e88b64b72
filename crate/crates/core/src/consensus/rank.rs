//! Rank aggregation and rank correlation over strict attribute orders.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use crate::error::{Error, Result};

/// Borda points: position `p` (0-indexed) on a ballot earns `k - p`;
/// positions at or beyond `k` earn nothing.
pub fn borda_points(position: usize, k: usize) -> u64 {
    k.saturating_sub(position) as u64
}

/// Sum Borda points over ballots. Every item that appears on a ballot gets
/// an entry, even if its points are zero.
pub fn borda_scores<T: Ord + Clone>(ballots: &[Vec<T>], k: usize) -> BTreeMap<T, u64> {
    let mut scores = BTreeMap::new();
    for ballot in ballots {
        for (pos, item) in ballot.iter().enumerate() {
            *scores.entry(item.clone()).or_insert(0) += borda_points(pos, k);
        }
    }
    scores
}

/// Order items by score descending, then by `tie_key` ascending.
pub fn rank_by_score<T: Clone, K: Ord>(
    scores: &BTreeMap<T, u64>,
    tie_key: impl Fn(&T) -> K,
) -> Vec<T>
where
    T: Ord,
{
    let mut items: Vec<(&T, u64)> = scores.iter().map(|(t, s)| (t, *s)).collect();
    items.sort_by(|(a, sa), (b, sb)| {
        sb.cmp(sa)
            .then_with(|| tie_key(a).cmp(&tie_key(b)))
            .then_with(|| a.cmp(b))
    });
    items.into_iter().map(|(t, _)| t.clone()).collect()
}

/// Kendall's tau-a between two strict rankings, restricted to the items
/// they share: `(concordant - discordant) / C(n, 2)`.
pub fn kendall_tau<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    let mut pos_b: HashMap<&T, usize> = HashMap::new();
    for (i, item) in b.iter().enumerate() {
        pos_b.entry(item).or_insert(i);
    }
    let mut seen = std::collections::HashSet::new();
    // Positions in `b` of the shared items, listed in `a`'s order.
    let common: Vec<usize> = a
        .iter()
        .filter(|item| seen.insert(*item))
        .filter_map(|item| pos_b.get(item).copied())
        .collect();
    let n = common.len();
    if n < 2 {
        return Err(Error::InsufficientOverlap(n));
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            if common[i] < common[j] {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / pairs)
}
