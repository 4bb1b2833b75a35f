//! Dense, index-symmetric tensors at a single point.
//!
//! All models here live in dimension <= 7, so every tensor is a flat `Vec<f64>`
//! with the relevant symmetry enforced on write.

use nalgebra::DMatrix;

use crate::error::{GeoError, Result};
use crate::linalg;

/// Chart coordinates of a point on a manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(GeoError::InvalidParameter(format!(
                "non-finite coordinate {bad} in {coords:?}"
            )));
        }
        Ok(Point(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Copy with coordinate `k` shifted by `delta`.
    pub(crate) fn shifted(&self, k: usize, delta: f64) -> Point {
        let mut c = self.0.clone();
        c[k] += delta;
        Point(c)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Metric components `g_ij` (or the inverse `g^ij`) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTensor {
    components: DMatrix<f64>,
}

impl MetricTensor {
    /// Builds from a full matrix; only the upper triangle is read so the stored
    /// matrix is exactly symmetric.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GeoError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = m.nrows();
        let components = DMatrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] });
        Ok(MetricTensor { components })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let components = DMatrix::from_fn(dim, dim, |i, j| if i <= j { f(i, j) } else { f(j, i) });
        MetricTensor { components }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        MetricTensor {
            components: DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        MetricTensor {
            components: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.components[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.components
    }

    /// `g(u, v) = g_ij u^i v^j`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.components[(i, j)] * v[j];
            }
            acc += u[i] * row;
        }
        acc
    }

    /// `g_ij v^j`.
    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.components[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Smallest eigenvalue (cyclic Jacobi).
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::symmetric_eigenvalues(&self.components)
            .first()
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.dim() == 0 || self.min_eigenvalue() > 0.0
    }

    pub fn condition_number(&self) -> f64 {
        linalg::spd_condition_number(&self.components)
    }

    /// `det(g)` through a Cholesky factorisation; `SingularMetric` when `g` is
    /// not numerically positive definite.
    pub fn determinant(&self) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(1.0);
        }
        let chol = self
            .components
            .clone()
            .cholesky()
            .ok_or(GeoError::SingularMetric {
                condition: f64::INFINITY,
            })?;
        let l = chol.l();
        let d: f64 = (0..self.dim()).map(|i| l[(i, i)] * l[(i, i)]).product();
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(GeoError::SingularMetric {
                condition: f64::INFINITY,
            })
        }
    }

    /// Block-diagonal composition `diag(self, other)`.
    pub fn block_diag(&self, other: &MetricTensor) -> MetricTensor {
        let (n, m) = (self.dim(), other.dim());
        let mut c = DMatrix::zeros(n + m, n + m);
        c.view_mut((0, 0), (n, n)).copy_from(&self.components);
        c.view_mut((n, n), (m, m)).copy_from(&other.components);
        MetricTensor { components: c }
    }
}

/// Connection coefficients `Γ^l_ij` stored as `[l][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTensor {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelTensor {
    pub fn zeros(dim: usize) -> Self {
        ChristoffelTensor {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, l: usize, i: usize, j: usize) -> usize {
        (l * self.dim + i) * self.dim + j
    }

    /// `Γ^l_ij`.
    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize) -> f64 {
        self.data[self.idx(l, i, j)]
    }

    /// Writes `Γ^l_ij` and `Γ^l_ji`.
    pub fn set(&mut self, l: usize, i: usize, j: usize, v: f64) {
        let a = self.idx(l, i, j);
        let b = self.idx(l, j, i);
        self.data[a] = v;
        self.data[b] = v;
    }

    /// `Γ^l_ij u^i v^j` for every `l`.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|l| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.get(l, i, j) * u[i] * v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn max_abs_diff(&self, other: &ChristoffelTensor) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Largest `|Γ^l_ij - Γ^l_ji|`; zero by construction unless built through
    /// `from_raw`.
    pub fn lower_symmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(l, i, j) - self.get(l, j, i)).abs());
                }
            }
        }
        worst
    }

    pub fn block_diag(&self, other: &ChristoffelTensor) -> ChristoffelTensor {
        let (n, m) = (self.dim, other.dim);
        let mut out = ChristoffelTensor::zeros(n + m);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let k = out.idx(l, i, j);
                    out.data[k] = self.get(l, i, j);
                }
            }
        }
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let k = out.idx(n + l, n + i, n + j);
                    out.data[k] = other.get(l, i, j);
                }
            }
        }
        out
    }

    /// Applies `f` entrywise to `(self, other)`.
    pub(crate) fn zip_map(&self, other: &ChristoffelTensor, f: impl Fn(f64, f64) -> f64) -> Self {
        ChristoffelTensor {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }
}

/// Partial derivatives `∂_h Γ^l_ij`, one [`ChristoffelTensor`] per coordinate `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionDerivative {
    pub by_coordinate: Vec<ChristoffelTensor>,
}

impl ConnectionDerivative {
    pub fn zeros(dim: usize) -> Self {
        ConnectionDerivative {
            by_coordinate: vec![ChristoffelTensor::zeros(dim); dim],
        }
    }

    /// `∂_h Γ^l_ij`.
    #[inline]
    pub fn get(&self, h: usize, l: usize, i: usize, j: usize) -> f64 {
        self.by_coordinate[h].get(l, i, j)
    }

    pub fn block_diag(&self, other: &ConnectionDerivative) -> ConnectionDerivative {
        let n = self.by_coordinate.len();
        let m = other.by_coordinate.len();
        let zero_b = ChristoffelTensor::zeros(m);
        let zero_a = ChristoffelTensor::zeros(n);
        let mut by_coordinate = Vec::with_capacity(n + m);
        for t in &self.by_coordinate {
            by_coordinate.push(t.block_diag(&zero_b));
        }
        for t in &other.by_coordinate {
            by_coordinate.push(zero_a.block_diag(t));
        }
        ConnectionDerivative { by_coordinate }
    }
}

#[inline]
fn idx4(dim: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * dim + j) * dim + k) * dim + l
}

/// Residuals of the algebraic symmetries of a lowered curvature tensor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SymmetryResiduals {
    /// `max |R_ijkl + R_jikl|`
    pub antisym_first: f64,
    /// `max |R_ijkl + R_ijlk|`
    pub antisym_last: f64,
    /// `max |R_ijkl - R_klij|`
    pub pair_exchange: f64,
    /// `max |R_ijkl + R_iklj + R_iljk|`
    pub bianchi: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.antisym_first
            .max(self.antisym_last)
            .max(self.pair_exchange)
            .max(self.bianchi)
    }
}

/// Riemann tensor at a point.
///
/// Convention: `R^i_jkl = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj`
/// (so `R(∂_k, ∂_l) ∂_j = R^i_jkl ∂_i`) and `R_ijkl = g_im R^m_jkl`.
/// With it the sectional curvature of the plane spanned by `∂_1, ∂_2` is
/// `R_1212 / (g_11 g_22 − g_12²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    dim: usize,
    lowered: Vec<f64>,
    mixed: Vec<f64>,
}

impl RiemannTensor {
    pub fn zeros(dim: usize) -> Self {
        let n = dim.pow(4);
        RiemannTensor {
            dim,
            lowered: vec![0.0; n],
            mixed: vec![0.0; n],
        }
    }

    /// Builds from the lowered components, raising the first index with `g_inv`.
    pub fn from_lowered(dim: usize, lowered: Vec<f64>, g_inv: &MetricTensor) -> Self {
        let mut mixed = vec![0.0; dim.pow(4)];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let mut acc = 0.0;
                        for m in 0..dim {
                            acc += g_inv.get(i, m) * lowered[idx4(dim, m, j, k, l)];
                        }
                        mixed[idx4(dim, i, j, k, l)] = acc;
                    }
                }
            }
        }
        RiemannTensor { dim, lowered, mixed }
    }

    /// Builds from the mixed components, lowering the first index with `g`.
    pub fn from_mixed(dim: usize, mixed: Vec<f64>, g: &MetricTensor) -> Self {
        let mut lowered = vec![0.0; dim.pow(4)];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let mut acc = 0.0;
                        for m in 0..dim {
                            acc += g.get(i, m) * mixed[idx4(dim, m, j, k, l)];
                        }
                        lowered[idx4(dim, i, j, k, l)] = acc;
                    }
                }
            }
        }
        RiemannTensor { dim, lowered, mixed }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `R_ijkl`.
    #[inline]
    pub fn lowered(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.lowered[idx4(self.dim, i, j, k, l)]
    }

    /// `R^i_jkl`.
    #[inline]
    pub fn mixed(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.mixed[idx4(self.dim, i, j, k, l)]
    }

    pub fn max_abs_lowered(&self) -> f64 {
        self.lowered.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_diff_lowered(&self, other: &RiemannTensor) -> f64 {
        self.lowered
            .iter()
            .zip(&other.lowered)
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        let n = self.dim;
        let mut res = SymmetryResiduals {
            antisym_first: 0.0,
            antisym_last: 0.0,
            pair_exchange: 0.0,
            bianchi: 0.0,
        };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.lowered(i, j, k, l);
                        res.antisym_first = res.antisym_first.max((r + self.lowered(j, i, k, l)).abs());
                        res.antisym_last = res.antisym_last.max((r + self.lowered(i, j, l, k)).abs());
                        res.pair_exchange = res.pair_exchange.max((r - self.lowered(k, l, i, j)).abs());
                        let b = r + self.lowered(i, k, l, j) + self.lowered(i, l, j, k);
                        res.bianchi = res.bianchi.max(b.abs());
                    }
                }
            }
        }
        res
    }

    /// Ricci tensor `R_jl = R^i_jil`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |j, l| (0..n).map(|i| self.mixed(i, j, i, l)).sum())
    }

    pub fn block_diag(&self, other: &RiemannTensor) -> RiemannTensor {
        let (n, m) = (self.dim, other.dim);
        let d = n + m;
        let mut out = RiemannTensor::zeros(d);
        for (off, src, sd) in [(0, self, n), (n, other, m)] {
            for i in 0..sd {
                for j in 0..sd {
                    for k in 0..sd {
                        for l in 0..sd {
                            let t = idx4(d, off + i, off + j, off + k, off + l);
                            out.lowered[t] = src.lowered(i, j, k, l);
                            out.mixed[t] = src.mixed(i, j, k, l);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Riemann tensor together with its Ricci and scalar contractions.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub riemann: RiemannTensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

impl CurvatureReport {
    /// Contracts `riemann` to Ricci and scalar curvature with `g_inv`.
    pub fn from_riemann(riemann: RiemannTensor, g_inv: &MetricTensor) -> Self {
        let ricci = riemann.ricci();
        let ricci = DMatrix::from_fn(ricci.nrows(), ricci.ncols(), |i, j| 0.5 * (ricci[(i, j)] + ricci[(j, i)]));
        let n = ricci.nrows();
        let mut scalar = 0.0;
        for i in 0..n {
            for j in 0..n {
                scalar += g_inv.get(i, j) * ricci[(i, j)];
            }
        }
        CurvatureReport {
            riemann,
            ricci,
            scalar,
        }
    }

    pub fn block_diag(&self, other: &CurvatureReport) -> CurvatureReport {
        let (n, m) = (self.ricci.nrows(), other.ricci.nrows());
        let mut ricci = DMatrix::zeros(n + m, n + m);
        ricci.view_mut((0, 0), (n, n)).copy_from(&self.ricci);
        ricci.view_mut((n, n), (m, m)).copy_from(&other.ricci);
        CurvatureReport {
            riemann: self.riemann.block_diag(&other.riemann),
            ricci,
            scalar: self.scalar + other.scalar,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_storage_is_symmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 99.0, 2.0]);
        let g = MetricTensor::from_matrix(&m).unwrap();
        assert_eq!(g.get(0, 1), g.get(1, 0));
        assert_eq!(g.get(1, 0), 0.3);
    }

    #[test]
    fn christoffel_set_writes_both_lower_orders() {
        let mut c = ChristoffelTensor::zeros(3);
        c.set(2, 0, 1, 0.7);
        assert_eq!(c.get(2, 1, 0), 0.7);
        assert_eq!(c.lower_symmetry_residual(), 0.0);
    }

    #[test]
    fn non_finite_point_rejected() {
        assert!(Point::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn determinant_rejects_indefinite() {
        let g = MetricTensor::diagonal(&[1.0, -2.0]);
        assert!(matches!(g.determinant(), Err(GeoError::SingularMetric { .. })));
        assert!(!g.is_positive_definite());
    }
}
