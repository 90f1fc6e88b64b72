//! Independent reference implementations used to check the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use faer::{Mat, Side};

/// Reference trigram embedding: same recipe, written out longhand with the
/// hash crate called directly.
pub fn trigram_oracle(normalized: &str) -> Vec<f64> {
    let padded: Vec<char> = format!("#{normalized}#").chars().collect();
    let mut v = vec![0.0; 256];
    for w in padded.windows(3) {
        let t: String = w.iter().collect();
        let h = twox_hash::XxHash64::oneshot(0x5CA1_AB1E, t.as_bytes());
        v[(h % 256) as usize] += 1.0;
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub struct PcaOracle {
    pub scores: Vec<[f64; 2]>,
    pub explained: [f64; 2],
    /// Eigenvalues of the scatter matrix, descending, zero-padded to at
    /// least three.
    pub eigenvalues: Vec<f64>,
    pub total: f64,
}

/// PCA via a self-adjoint eigendecomposition of the n x n Gram matrix
/// C C^T of the centered rows. Its nonzero spectrum equals the scatter
/// matrix's, and the scores are u_k * sqrt(lambda_k).
pub fn pca_oracle(rows: &[Vec<f64>]) -> PcaOracle {
    let n = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let c = Mat::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
    let total: f64 = (0..n).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| c[(i, j)] * c[(i, j)]).sum();
    let gram = &c * c.transpose();
    let eig = gram.self_adjoint_eigen(Side::Lower).expect("eigendecomposition");
    let values: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut scores = vec![[0.0; 2]; n];
    let mut explained = [0.0; 2];
    for k in 0..2.min(n) {
        let idx = order[k];
        let lambda = values[idx];
        if total == 0.0 || lambda <= 1e-12 * total {
            continue;
        }
        let u = eig.U().col(idx);
        for i in 0..n {
            scores[i][k] = u[i] * lambda.sqrt();
        }
        explained[k] = lambda / total;
    }
    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| values[i].max(0.0)).collect();
    eigenvalues.resize(eigenvalues.len().max(3), 0.0);
    PcaOracle {
        scores,
        explained,
        eigenvalues,
        total,
    }
}

/// Brute-force Borda: walk every ballot position and add points.
pub fn borda_oracle(ballots: &[Vec<char>], k: usize) -> BTreeMap<char, u64> {
    let mut scores = BTreeMap::new();
    for ballot in ballots {
        for (pos, a) in ballot.iter().enumerate() {
            let pts = if pos < k { (k - pos) as u64 } else { 0 };
            *scores.entry(*a).or_insert(0) += pts;
        }
    }
    scores
}

/// Kendall tau-a by explicit pair enumeration over the common items.
pub fn kendall_oracle<T: PartialEq>(a: &[T], b: &[T]) -> Option<f64> {
    let common: Vec<&T> = a.iter().filter(|x| b.contains(x)).collect();
    let n = common.len();
    if n < 2 {
        return None;
    }
    let pos = |list: &[T], x: &T| list.iter().position(|y| y == x).unwrap();
    let mut score = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = pos(a, common[i]) as i64 - pos(a, common[j]) as i64;
            let db = pos(b, common[i]) as i64 - pos(b, common[j]) as i64;
            score += (da * db).signum();
        }
    }
    Some(score as f64 / (n * (n - 1) / 2) as f64)
}

/// Compare `project_2d` and the unit-square layout against the oracle.
/// Component signs are aligned first. When eigenvalues tie the basis is
/// not unique: a tie between the first two is checked through the 2D Gram
/// matrix, a tie between the second and third only through variances.
pub fn check_pca(rows: &[Vec<f64>], tol: f64) -> Result<(), String> {
    use axis_elicit::affinity::pca::{dominant_index, fit_unit_square, project_2d};
    let ours = project_2d(rows);
    let oracle = pca_oracle(rows);
    let n = rows.len();
    let ev = &oracle.eigenvalues;
    for k in 0..2 {
        if (ours.explained_variance[k] - oracle.explained[k]).abs() > tol {
            return Err(format!(
                "explained variance {k}: {} vs {}",
                ours.explained_variance[k], oracle.explained[k]
            ));
        }
        let l = &ours.loadings[k];
        if l.iter().any(|x| *x != 0.0) && l[dominant_index(l)] <= 0.0 {
            return Err(format!("component {k} violates the sign convention"));
        }
        let var: f64 = ours.scores.iter().map(|s| s[k] * s[k]).sum();
        let want = if oracle.explained[k] == 0.0 { 0.0 } else { ev[k] };
        if (var - want).abs() > tol {
            return Err(format!("component {k} variance {var} vs {want}"));
        }
    }
    let cross: f64 = ours.scores.iter().map(|s| s[0] * s[1]).sum();
    if cross.abs() > tol {
        return Err(format!("components not orthogonal: {cross}"));
    }
    let fitted = fit_unit_square(&ours.scores);
    if fitted.iter().flatten().any(|x| x.abs() > 1.0 + 1e-12) {
        return Err("layout outside the unit square".into());
    }

    let live = |i: usize| ev[i] > 1e-12 * oracle.total;
    let tied = |i: usize| live(i) && (ev[i] - ev[i + 1]).abs() <= 1e-8 * oracle.total;
    if tied(1) {
        return Ok(());
    }
    if tied(0) {
        let gram = |s: &[[f64; 2]], i: usize, j: usize| s[i][0] * s[j][0] + s[i][1] * s[j][1];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (gram(&ours.scores, i, j), gram(&oracle.scores, i, j));
                if (a - b).abs() > tol {
                    return Err(format!("tied spectrum: gram[{i}][{j}] {a} vs {b}"));
                }
            }
        }
        return Ok(());
    }
    let mut expected = oracle.scores.clone();
    for k in 0..2 {
        let dot: f64 = (0..n).map(|i| ours.scores[i][k] * expected[i][k]).sum();
        if dot < 0.0 {
            for row in expected.iter_mut() {
                row[k] = -row[k];
            }
        }
        for i in 0..n {
            if (ours.scores[i][k] - expected[i][k]).abs() > tol {
                return Err(format!(
                    "score[{i}][{k}]: {} vs {}",
                    ours.scores[i][k], expected[i][k]
                ));
            }
        }
    }
    let fitted_oracle = fit_unit_square(&expected);
    for i in 0..n {
        for k in 0..2 {
            if (fitted[i][k] - fitted_oracle[i][k]).abs() > tol {
                return Err(format!("layout[{i}][{k}] differs"));
            }
        }
    }
    Ok(())
}
