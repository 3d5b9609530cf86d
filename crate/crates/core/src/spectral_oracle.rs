//! Dense reference computations for small instances: the matrix of `−Δ²`,
//! its full eigendecomposition by cyclic Jacobi rotations, and direct linear
//! Dirichlet solves. Used as ground truth in tests; not meant for production
//! sizes.

use crate::dynamics::BoundaryCondition;
use crate::error::{check_len, Error, Result};
use crate::hypergraph::VertexState;
use crate::operators::IncidenceSystem;

pub const MAX_DENSE_VERTICES: usize = 2000;
const MAX_SWEEPS: usize = 100;

/// `−Δ²` as a dense row-major `n × n` matrix, together with the vertex
/// measure `w_I^α` that makes it self-adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: Vec<f64>,
    weight_diagonal: Vec<f64>,
}

/// Column `j` is `−Δ²` applied to the `j`-th unit state.
pub fn dense_laplacian(sys: &IncidenceSystem<'_>) -> Result<DenseOperator> {
    let n = sys.n_vertices();
    if n > MAX_DENSE_VERTICES {
        return Err(Error::TooLarge { n_vertices: n, limit: MAX_DENSE_VERTICES });
    }
    let mut matrix = vec![0.0; n * n];
    let mut e = VertexState::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        let col = sys.p_laplacian(&e, 2.0, 0.0)?;
        for i in 0..n {
            matrix[i * n + j] = -col[i];
        }
        e[j] = 0.0;
    }
    Ok(DenseOperator { n, matrix, weight_diagonal: sys.vertex_measure().to_vec() })
}

impl DenseOperator {
    pub fn from_parts(n: usize, matrix: Vec<f64>, weight_diagonal: Vec<f64>) -> Result<Self> {
        check_len("dense matrix", n * n, matrix.len())?;
        check_len("weight diagonal", n, weight_diagonal.len())?;
        Ok(DenseOperator { n, matrix, weight_diagonal })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn weight_diagonal(&self) -> &[f64] {
        &self.weight_diagonal
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.matrix[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `S = D^{1/2} L D^{-1/2}`, symmetric whenever `L` is self-adjoint in
    /// the weighted vertex inner product.
    pub fn symmetrized(&self) -> Vec<f64> {
        let n = self.n;
        let sq: Vec<f64> = self.weight_diagonal.iter().map(|d| d.sqrt()).collect();
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = sq[i] * self.matrix[i * n + j] / sq[j];
            }
        }
        s
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.matrix[i * self.n..(i + 1) * self.n].iter().sum()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` belongs to `values[k]` and has unit norm in the weighted
    /// vertex inner product.
    pub vectors: Vec<Vec<f64>>,
    /// Orthonormal eigenvectors of the symmetrized matrix, same order.
    pub symmetric_vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl Eigen {
    /// Number of eigenvalues with magnitude at most `tol`.
    pub fn nullspace_dimension(&self, tol: f64) -> usize {
        self.values.iter().filter(|v| v.abs() <= tol).count()
    }
}

/// Full spectrum of the symmetrized operator by cyclic Jacobi rotations.
/// Stops once the off-diagonal Frobenius norm is at most
/// `1e-12 · max(1, ‖S‖_F)`.
pub fn eigendecomposition(op: &DenseOperator) -> Result<Eigen> {
    let n = op.n;
    let mut a = op.symmetrized();
    // exact symmetry before rotating
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-12 * frob.max(1.0);
    let off_norm = |a: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let inv_sqrt: Vec<f64> = op.weight_diagonal.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut symmetric_vectors = Vec::with_capacity(n);
    for &k in &order {
        values.push(a[k * n + k]);
        let u: Vec<f64> = (0..n).map(|i| v[i * n + k]).collect();
        vectors.push(u.iter().zip(&inv_sqrt).map(|(x, s)| x * s).collect());
        symmetric_vectors.push(u);
    }
    Ok(Eigen { values, vectors, symmetric_vectors, sweeps })
}

/// Solves `(−Δ² f)(v) = 0` on interior vertices with the boundary values
/// substituted, by Gaussian elimination with partial pivoting.
pub fn dirichlet_linear_solve(op: &DenseOperator, bc: &BoundaryCondition) -> Result<VertexState> {
    let n = op.n;
    let mask = bc.mask(n)?;
    let interior: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
    let m = interior.len();
    if m == 0 {
        return Err(Error::EmptyInterior);
    }
    let mut f = vec![0.0; n];
    for &(v, val) in bc.pairs() {
        f[v.index()] = val;
    }

    // augmented m × (m+1) system
    let w = m + 1;
    let mut sys = vec![0.0; m * w];
    let mut scale: f64 = 0.0;
    for (r, &i) in interior.iter().enumerate() {
        for (c, &j) in interior.iter().enumerate() {
            sys[r * w + c] = op.get(i, j);
            scale = scale.max(op.get(i, j).abs());
        }
        let mut rhs = 0.0;
        for &(v, val) in bc.pairs() {
            rhs -= op.get(i, v.index()) * val;
        }
        sys[r * w + m] = rhs;
    }
    if scale == 0.0 {
        return Err(Error::SingularSystem);
    }
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&a, &b| sys[a * w + col].abs().total_cmp(&sys[b * w + col].abs()))
            .unwrap();
        if sys[piv * w + col].abs() <= 1e-12 * scale {
            return Err(Error::SingularSystem);
        }
        if piv != col {
            for k in 0..w {
                sys.swap(piv * w + k, col * w + k);
            }
        }
        let d = sys[col * w + col];
        for r in (col + 1)..m {
            let factor = sys[r * w + col] / d;
            if factor != 0.0 {
                for k in col..w {
                    sys[r * w + k] -= factor * sys[col * w + k];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let mut s = sys[r * w + m];
        for k in (r + 1)..m {
            s -= sys[r * w + k] * x[k];
        }
        x[r] = s / sys[r * w + r];
    }
    for (r, &i) in interior.iter().enumerate() {
        f[i] = x[r];
    }
    Ok(VertexState(f))
}
