//! PCA of the feature matrix through a singular value decomposition
//! `S = U·Σ·Vᵀ`, plus the loading-plane cosine correlation map.
//!
//! The SVD is a one-sided (Hestenes) Jacobi iteration: column pairs of `S`
//! are rotated until all are mutually orthogonal, at which point the column
//! norms are the singular values and the accumulated rotations form `V`.
//! Singular values come out nonincreasing, so component 0 is PC1.

use ndarray::Array2;

use crate::preprocess::FeatureMatrix;

/// Loading vectors shorter than this are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PcaError {
    #[error("matrix must be at least 2×2, got {rows}×{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("matrix is identically zero; variance fractions undefined")]
    ZeroMatrix,
    #[error("Jacobi SVD did not converge within {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("component index {index} out of range (k = {k})")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
}

/// Thin SVD of an `m × n` matrix with `k = min(m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    /// `m × k`, orthonormal columns.
    pub u: Array2<f64>,
    /// Length `k`, nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    /// `n × k`, orthonormal columns.
    pub v: Array2<f64>,
}

impl Svd {
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut us = self.u.clone();
        for (mut col, s) in us.columns_mut().into_iter().zip(&self.sigma) {
            col *= *s;
        }
        us.dot(&self.v.t())
    }
}

/// Computes the thin SVD of `a`, sign-fixing each right singular vector so
/// its largest-magnitude entry is positive.
pub fn svd(a: &Array2<f64>) -> Result<Svd, PcaError> {
    let (rows, cols) = a.dim();
    if rows < 2 || cols < 2 {
        return Err(PcaError::TooSmall { rows, cols });
    }
    if let Some(((row, col), _)) = a.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(PcaError::NonFiniteInput { row, col });
    }

    let (mut u, sigma, mut v) = if rows >= cols {
        jacobi_tall(a)?
    } else {
        let (u, s, v) = jacobi_tall(&a.t().to_owned())?;
        (v, s, u)
    };

    for j in 0..sigma.len() {
        let mut pivot = 0.0f64;
        for &x in v.column(j) {
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        if pivot < 0.0 {
            v.column_mut(j).mapv_inplace(|x| -x);
            u.column_mut(j).mapv_inplace(|x| -x);
        }
    }
    Ok(Svd { u, sigma, v })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One-sided Jacobi on a tall (`m ≥ n`) matrix, columns stored contiguously.
fn jacobi_tall(a: &Array2<f64>) -> Result<(Array2<f64>, Vec<f64>, Array2<f64>), PcaError> {
    let (m, n) = a.dim();
    let mut w: Vec<Vec<f64>> = a.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let tol = (m as f64) * f64::EPSILON;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(PcaError::ConvergenceFailure(MAX_SWEEPS));
    }

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let sigma_max = norms[order[0]];
    let cutoff = sigma_max * tol;
    let mut u = Array2::zeros((m, n));
    let mut vm = Array2::zeros((n, n));
    let mut sigma = Vec::with_capacity(n);
    let mut filled = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        for (i, x) in v[src].iter().enumerate() {
            vm[[i, dst]] = *x;
        }
        if s > cutoff && s > 0.0 {
            for (i, x) in w[src].iter().enumerate() {
                u[[i, dst]] = x / s;
            }
            sigma.push(s);
            filled.push(dst);
        } else {
            sigma.push(if s > 0.0 { s } else { 0.0 });
        }
    }
    complete_basis(&mut u, &filled);
    Ok((u, sigma, vm))
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Fills the columns of `u` not listed in `filled` with unit vectors
/// orthogonal to every other column (Gram–Schmidt on the standard basis).
fn complete_basis(u: &mut Array2<f64>, filled: &[usize]) {
    let (m, k) = u.dim();
    let mut basis: Vec<usize> = filled.to_vec();
    let mut candidate = 0;
    for j in (0..k).filter(|j| !filled.contains(j)) {
        while candidate < m {
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &b in &basis {
                    let col = u.column(b);
                    let proj: f64 = col.iter().zip(&e).map(|(x, y)| x * y).sum();
                    e.iter_mut().zip(col.iter()).for_each(|(y, x)| *y -= proj * x);
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 0.5 {
                for (i, x) in e.iter().enumerate() {
                    u[[i, j]] = x / norm;
                }
                basis.push(j);
                break;
            }
        }
    }
}

/// PCA of a feature matrix: loadings `V`, scores `T = U·Σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub left_vectors: Array2<f64>,
    pub singular_values: Vec<f64>,
    pub loadings: Array2<f64>,
    pub scores: Array2<f64>,
    /// `σᵢ² / Σⱼ σⱼ²`.
    pub variance_fractions: Vec<f64>,
    pub channel_names: Vec<String>,
}

impl PcaResult {
    pub fn components(&self) -> usize {
        self.singular_values.len()
    }
}

pub fn svd_decompose(matrix: &FeatureMatrix) -> Result<PcaResult, PcaError> {
    pca_of(&matrix.values, matrix.channel_names.clone())
}

/// PCA of an arbitrary matrix whose columns are named by `channel_names`.
pub fn pca_of(values: &Array2<f64>, channel_names: Vec<String>) -> Result<PcaResult, PcaError> {
    let Svd { u, sigma, v } = svd(values)?;
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Err(PcaError::ZeroMatrix);
    }
    let variance_fractions = sigma.iter().map(|s| s * s / total).collect();
    let mut scores = u.clone();
    for (mut col, s) in scores.columns_mut().into_iter().zip(&sigma) {
        col *= *s;
    }
    Ok(PcaResult {
        left_vectors: u,
        singular_values: sigma,
        loadings: v,
        scores,
        variance_fractions,
        channel_names,
    })
}

/// Each channel as a 2-vector in the plane of two chosen components.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadingPlane {
    pub channel_names: Vec<String>,
    pub components: (usize, usize),
    pub vectors: Vec<[f64; 2]>,
}

pub fn loading_plane_vectors(
    result: &PcaResult,
    components: (usize, usize),
) -> Result<LoadingPlane, PcaError> {
    let k = result.components();
    for index in [components.0, components.1] {
        if index >= k {
            return Err(PcaError::IndexOutOfRange { index, k });
        }
    }
    let vectors = result
        .loadings
        .rows()
        .into_iter()
        .map(|row| [row[components.0], row[components.1]])
        .collect();
    Ok(LoadingPlane {
        channel_names: result.channel_names.clone(),
        components,
        vectors,
    })
}

/// Pairwise cosine of the angle between loading-plane vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    pub values: Array2<f64>,
    pub channel_names: Vec<String>,
    /// Channels whose loading vector has (near) zero length.
    pub degenerate_channels: Vec<String>,
}

impl CorrelationMap {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|n| n == name)
    }

    pub fn entry(&self, a: &str, b: &str) -> Result<f64, PcaError> {
        let i = self.index_of(a).ok_or_else(|| PcaError::UnknownChannel(a.into()))?;
        let j = self.index_of(b).ok_or_else(|| PcaError::UnknownChannel(b.into()))?;
        Ok(self.values[[i, j]])
    }

    pub fn is_degenerate(&self, name: &str) -> bool {
        self.degenerate_channels.iter().any(|n| n == name)
    }

    /// Restriction to `names`, in the given order.
    pub fn submap<S: AsRef<str>>(&self, names: &[S]) -> Result<CorrelationMap, PcaError> {
        let idx = names
            .iter()
            .map(|n| {
                self.index_of(n.as_ref())
                    .ok_or_else(|| PcaError::UnknownChannel(n.as_ref().into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let values = Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| {
            self.values[[idx[a], idx[b]]]
        });
        let channel_names: Vec<String> = names.iter().map(|n| n.as_ref().to_owned()).collect();
        let degenerate_channels = channel_names
            .iter()
            .filter(|n| self.is_degenerate(n))
            .cloned()
            .collect();
        Ok(CorrelationMap {
            values,
            channel_names,
            degenerate_channels,
        })
    }
}

pub fn correlation_map(plane: &LoadingPlane) -> CorrelationMap {
    let n = plane.vectors.len();
    let norms: Vec<f64> = plane.vectors.iter().map(|v| v[0].hypot(v[1])).collect();
    let live: Vec<bool> = norms.iter().map(|&r| r >= DEGENERATE_NORM).collect();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        if !live[i] {
            continue;
        }
        values[[i, i]] = 1.0;
        for j in i + 1..n {
            if !live[j] {
                continue;
            }
            let (a, b) = (plane.vectors[i], plane.vectors[j]);
            let cos = ((a[0] * b[0] + a[1] * b[1]) / (norms[i] * norms[j])).clamp(-1.0, 1.0);
            values[[i, j]] = cos;
            values[[j, i]] = cos;
        }
    }
    CorrelationMap {
        values,
        channel_names: plane.channel_names.clone(),
        degenerate_channels: plane
            .channel_names
            .iter()
            .zip(&live)
            .filter(|(_, &l)| !l)
            .map(|(n, _)| n.clone())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn plane(vectors: Vec<[f64; 2]>) -> LoadingPlane {
        LoadingPlane {
            channel_names: (0..vectors.len()).map(|i| format!("c{i}")).collect(),
            components: (0, 1),
            vectors,
        }
    }

    #[test]
    fn identity_2x2() {
        let r = pca_of(&Array2::eye(2), vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(r.singular_values, vec![1.0, 1.0]);
        assert_eq!(r.variance_fractions, vec![0.5, 0.5]);
    }

    #[test]
    fn single_nonzero_column() {
        let a = array![[3.0, 0.0], [4.0, 0.0]];
        let s = svd(&a).unwrap();
        assert!((s.sigma[0] - 5.0).abs() < 1e-15);
        assert_eq!(s.sigma[1], 0.0);
        let utu = s.u.t().dot(&s.u);
        assert!((&utu - &Array2::<f64>::eye(2)).iter().all(|x| x.abs() < 1e-12));
        assert!((s.reconstruct() - &a).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn wide_matrix() {
        let a = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.5]];
        let s = svd(&a).unwrap();
        assert_eq!(s.u.dim(), (2, 2));
        assert_eq!(s.v.dim(), (3, 2));
        assert!((s.reconstruct() - &a).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn sign_convention_largest_loading_positive() {
        let a = array![[1.0, -3.0], [2.0, -1.0], [0.5, -2.0]];
        let s = svd(&a).unwrap();
        for col in s.v.columns() {
            let pivot = col.iter().copied().fold(0.0f64, |p, x| if x.abs() > p.abs() { x } else { p });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn input_errors() {
        assert_eq!(svd(&Array2::zeros((1, 3))), Err(PcaError::TooSmall { rows: 1, cols: 3 }));
        let mut a = Array2::<f64>::eye(3);
        a[[2, 1]] = f64::INFINITY;
        assert_eq!(svd(&a), Err(PcaError::NonFiniteInput { row: 2, col: 1 }));
        assert_eq!(
            pca_of(&Array2::zeros((3, 2)), vec!["a".into(), "b".into()]),
            Err(PcaError::ZeroMatrix)
        );
    }

    #[test]
    fn loading_plane_from_identity_loadings() {
        let r = PcaResult {
            left_vectors: Array2::eye(3),
            singular_values: vec![1.0; 3],
            loadings: Array2::eye(3),
            scores: Array2::eye(3),
            variance_fractions: vec![1.0 / 3.0; 3],
            channel_names: vec!["a".into(), "b".into(), "c".into()],
        };
        let p = loading_plane_vectors(&r, (0, 1)).unwrap();
        assert_eq!(p.vectors, vec![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        let same = loading_plane_vectors(&r, (0, 0)).unwrap();
        assert!(same.vectors.iter().all(|v| v[0] == v[1]));
        assert_eq!(
            loading_plane_vectors(&r, (0, 3)),
            Err(PcaError::IndexOutOfRange { index: 3, k: 3 })
        );
    }

    #[test]
    fn cosine_identities() {
        let m = correlation_map(&plane(vec![[1.0, 0.0], [0.0, 1.0], [-2.0, 0.0], [1.0, 1.0]]));
        assert_eq!(m.values[[0, 0]], 1.0);
        assert_eq!(m.values[[0, 1]], 0.0);
        assert_eq!(m.values[[0, 2]], -1.0);
        assert!((m.values[[3, 0]] - 0.70711).abs() < 1e-5);
        assert!(m.degenerate_channels.is_empty());
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let m = correlation_map(&plane(vec![[1.0, 0.0], [0.0, 0.0], [0.5, 0.5]]));
        assert_eq!(m.degenerate_channels, vec!["c1".to_owned()]);
        assert!(m.values.row(1).iter().all(|v| *v == 0.0));
        assert!(m.values.column(1).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn submap_and_lookup() {
        let m = correlation_map(&plane(vec![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]));
        let sub = m.submap(&["c2", "c0"]).unwrap();
        assert_eq!(sub.channel_names, vec!["c2", "c0"]);
        assert_eq!(sub.values[[0, 1]], m.entry("c2", "c0").unwrap());
        assert_eq!(m.entry("c0", "zz"), Err(PcaError::UnknownChannel("zz".into())));
    }
}
