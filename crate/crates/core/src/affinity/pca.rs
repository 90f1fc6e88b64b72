//! Exact two-component PCA for small label sets.
//!
//! Works on the `n x n` Gram matrix of the centered rows, which is small
//! (one row per distinct label) even when the embedding dimension is not,
//! and diagonalizes it with cyclic Jacobi rotations.

/// Relative size below which an eigenvalue counts as zero.
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Raw principal-component scores, one `[pc1, pc2]` per input row.
    pub scores: Vec<[f64; 2]>,
    /// Unit loading vectors in embedding space; zero when the component is degenerate.
    pub loadings: [Vec<f64>; 2],
    pub explained_variance: [f64; 2],
}

/// Symmetric eigendecomposition by cyclic Jacobi. Returns eigenvalues in
/// descending order and the matching eigenvectors as columns.
pub fn jacobi_eigen(matrix: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (values, vectors)
}

/// Index of the largest-magnitude entry; near-ties go to the lowest index.
pub fn dominant_index(v: &[f64]) -> usize {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = max * 1e-9;
    v.iter().position(|x| x.abs() >= max - tol).unwrap_or(0)
}

fn centered(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    rows.iter()
        .map(|r| r.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect()
}

/// Project rows onto their top two principal components.
///
/// Each component's sign is fixed so that its largest-magnitude loading is
/// positive. Components with (numerically) zero variance yield zero scores.
pub fn project_2d(rows: &[Vec<f64>]) -> Projection {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let zero = Projection {
        scores: vec![[0.0, 0.0]; n],
        loadings: [vec![0.0; dim], vec![0.0; dim]],
        explained_variance: [0.0, 0.0],
    };
    if n < 2 {
        return zero;
    }
    let c = centered(rows);
    let total: f64 = c.iter().flatten().map(|x| x * x).sum();
    let raw: f64 = rows.iter().flatten().map(|x| x * x).sum();
    // Identical rows leave only rounding noise after centering.
    if total <= 1e-20 * raw {
        return zero;
    }

    if n == 2 {
        // Rank one: the only direction is the difference of the two rows.
        let mut diff: Vec<f64> = rows[0].iter().zip(&rows[1]).map(|(a, b)| a - b).collect();
        let len = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
        diff.iter_mut().for_each(|x| *x /= len);
        let sign = if diff[dominant_index(&diff)] < 0.0 { -1.0 } else { 1.0 };
        diff.iter_mut().for_each(|x| *x *= sign);
        let half = len / 2.0;
        return Projection {
            scores: vec![[sign * half, 0.0], [-sign * half, 0.0]],
            loadings: [diff, vec![0.0; dim]],
            explained_variance: [1.0, 0.0],
        };
    }

    let gram: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| c[i].iter().zip(&c[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let (values, vectors) = jacobi_eigen(&gram);

    let mut out = zero;
    for k in 0..2 {
        let lambda = values[k];
        if lambda <= RANK_TOL * total {
            continue;
        }
        let root = lambda.sqrt();
        let mut u = vectors[k].clone();
        let mut loading: Vec<f64> = (0..dim)
            .map(|d| (0..n).map(|i| c[i][d] * u[i]).sum::<f64>() / root)
            .collect();
        if loading[dominant_index(&loading)] < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
            loading.iter_mut().for_each(|x| *x = -*x);
        }
        for (i, s) in out.scores.iter_mut().enumerate() {
            s[k] = root * u[i];
        }
        out.loadings[k] = loading;
        out.explained_variance[k] = (lambda / total).clamp(0.0, 1.0);
    }
    out
}

/// Divide by the largest absolute coordinate so points fit `[-1, 1]^2`.
pub fn fit_unit_square(scores: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let max = scores
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return scores.to_vec();
    }
    scores.iter().map(|p| [p[0] / max, p[1] / max]).collect()
}
