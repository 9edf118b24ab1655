//! Random-walk matrices and the manifold distance built on them.
//!
//! For an adjacency matrix `A` and walk parameter `t < 1/rho(A)`, the walk
//! matrix is `W = (I - tA)^-1 = sum_m t^m A^m`; entry `(i, j)` is the
//! discounted number of walks from `i` to `j`. Two graphs over the same,
//! order-aligned node set are compared by the Frobenius norm of the
//! difference of their walk matrices.
//!
//! Node order matters: `||W1 - W2||` compares node `i` of one graph with
//! node `i` of the other. Callers are responsible for aligning rows (raster
//! order for images, generation order for synthetic pairs); no graph matching
//! is attempted.

use std::fmt;
use std::str::FromStr;

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::graphs::{max_stable_t, spectral_radius, AdjacencyMatrix, SPECTRAL_TOL};
use crate::matrix::Matrix;

/// Safety factor applied to `1/rho` when `t` is chosen automatically.
pub const DEFAULT_SAFETY: f64 = 0.9;

/// `t * rho(A)` at or above this is rejected as unstable.
const STABILITY_MARGIN: f64 = 1.0 - 1e-9;

/// Which per-node embedding a walk matrix provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Node `i` is row `i` of `W` (outgoing walks).
    #[default]
    Rows,
    /// Node `i` is column `i` of `W` (incoming walks).
    Columns,
    /// Row and column concatenated.
    RowsAndColumns,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Rows, Variant::Columns, Variant::RowsAndColumns];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Rows => "rows",
            Variant::Columns => "columns",
            Variant::RowsAndColumns => "both",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" => Ok(Variant::Rows),
            "columns" | "cols" => Ok(Variant::Columns),
            "both" | "rows_and_columns" | "rows-and-columns" => Ok(Variant::RowsAndColumns),
            other => Err(Error::invalid(format!(
                "unknown variant {other:?} (expected rows, columns or both)"
            ))),
        }
    }
}

/// `W = (I - tA)^-1` together with the `t` that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkMatrix {
    w: Matrix,
    t: f64,
}

impl WalkMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.w.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.w.nrows() == 0
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }
}

/// Solves `(I - tA) W = I` by LU with partial pivoting.
///
/// Fails when `t * rho(A)` is not safely below one, or when the Frobenius
/// residual of the solve exceeds `1e-8 * n`.
pub fn walk_matrix(adj: &AdjacencyMatrix, t: f64) -> Result<WalkMatrix> {
    let n = adj.len();
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("walk parameter must be finite and >= 0, got {t}")));
    }
    if n == 0 {
        return Err(Error::invalid("walk matrix of an empty graph"));
    }
    let rho = spectral_radius(adj, SPECTRAL_TOL)?;
    if t * rho >= STABILITY_MARGIN {
        return Err(Error::UnstableWalk {
            t,
            spectral_radius: rho,
            product: t * rho,
        });
    }

    let system = Mat::<f64>::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - t * adj.entries()[(i, j)]
    });
    let solved = system.partial_piv_lu().solve(Mat::<f64>::identity(n, n));
    let w = Matrix::from_faer(solved.as_ref());
    if !w.is_finite() {
        return Err(Error::IllConditioned {
            residual: f64::INFINITY,
            limit: 1e-8 * n as f64,
        });
    }

    // residual W - tAW - I, using the sparsity of A
    let mut residual = 0.0;
    let mut acc = vec![0.0; n];
    for i in 0..n {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for &k in adj.row_nonzeros(i) {
            for (a, wk) in acc.iter_mut().zip(w.row(k)) {
                *a += wk;
            }
        }
        for (j, (wij, a)) in w.row(i).iter().zip(&acc).enumerate() {
            let r = wij - t * a - if i == j { 1.0 } else { 0.0 };
            residual += r * r;
        }
    }
    let residual = residual.sqrt();
    let limit = 1e-8 * n as f64;
    if residual > limit {
        return Err(Error::IllConditioned { residual, limit });
    }
    Ok(WalkMatrix { w, t })
}

/// Per-node embeddings: `W`, `W^T`, or `[W | W^T]`.
pub fn view(walk: &WalkMatrix, variant: Variant) -> Matrix {
    match variant {
        Variant::Rows => walk.w.clone(),
        Variant::Columns => walk.w.transpose(),
        Variant::RowsAndColumns => walk.w.hstack(&walk.w.transpose()),
    }
}

/// Result of comparing two graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityResult {
    pub distance: f64,
    pub t: f64,
    pub n: usize,
    pub variant: Variant,
}

impl SimilarityResult {
    /// `1 / (1 + d/n)`: a bounded score in `(0, 1]`. This is a reporting
    /// convention only; the distance itself is unbounded.
    pub fn score(&self) -> f64 {
        similarity_score(self.distance, self.n)
    }
}

pub fn similarity_score(distance: f64, n: usize) -> f64 {
    1.0 / (1.0 + distance / n.max(1) as f64)
}

/// Frobenius distance between the views of two walk matrices.
///
/// The Frobenius norm is invariant under transposition, so the columns view
/// gives the rows value and the concatenated view `sqrt(2)` times it. The sum
/// runs over `W1 - W2` in one fixed order for every variant, which makes
/// rows and columns agree bit for bit.
pub fn walk_distance(w1: &WalkMatrix, w2: &WalkMatrix, variant: Variant) -> Result<f64> {
    if w1.len() != w2.len() {
        return Err(Error::mismatch(format!("n={}", w1.len()), format!("n={}", w2.len())));
    }
    let sum: f64 = w1
        .w
        .as_slice()
        .iter()
        .zip(w2.w.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let copies = match variant {
        Variant::Rows | Variant::Columns => 1.0,
        Variant::RowsAndColumns => 2.0,
    };
    Ok((copies * sum).sqrt())
}

/// Distance between two graphs over the same node set. With `t = None` the
/// walk parameter is `max_stable_t(A1, A2, 0.9)`.
pub fn manifold_distance(
    a1: &AdjacencyMatrix,
    a2: &AdjacencyMatrix,
    t: Option<f64>,
    variant: Variant,
) -> Result<SimilarityResult> {
    if a1.len() != a2.len() {
        return Err(Error::mismatch(format!("n={}", a1.len()), format!("n={}", a2.len())));
    }
    let t = match t {
        Some(t) => t,
        None => max_stable_t(a1, a2, DEFAULT_SAFETY)?,
    };
    let w1 = walk_matrix(a1, t)?;
    let w2 = walk_matrix(a2, t)?;
    Ok(SimilarityResult {
        distance: walk_distance(&w1, &w2, variant)?,
        t,
        n: a1.len(),
        variant,
    })
}

/// Euclidean distance between the embeddings of nodes `i` and `j`.
pub fn point_distance(walk: &WalkMatrix, i: usize, j: usize, variant: Variant) -> Result<f64> {
    walk.check_index(i)?;
    walk.check_index(j)?;
    if i == j {
        return Ok(0.0);
    }
    let w = &walk.w;
    let rows = || -> f64 {
        w.row(i)
            .iter()
            .zip(w.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    let cols = || -> f64 {
        (0..w.nrows())
            .map(|k| {
                let d = w[(k, i)] - w[(k, j)];
                d * d
            })
            .sum()
    };
    let sq = match variant {
        Variant::Rows => rows(),
        Variant::Columns => cols(),
        Variant::RowsAndColumns => rows() + cols(),
    };
    Ok(sq.sqrt())
}

/// Embedding distances from every node in `queries` to every node in `refs`
/// (`|queries| x |refs|`), computed through one Gram product.
pub fn point_distances(
    walk: &WalkMatrix,
    queries: &[usize],
    refs: &[usize],
    variant: Variant,
) -> Result<Matrix> {
    for &i in queries.iter().chain(refs) {
        walk.check_index(i)?;
    }
    let n = walk.len();
    let w = &walk.w;
    // embedding of node i as a function of coordinate c
    let width = match variant {
        Variant::Rows | Variant::Columns => n,
        Variant::RowsAndColumns => 2 * n,
    };
    let coord = |i: usize, c: usize| -> f64 {
        match variant {
            Variant::Rows => w[(i, c)],
            Variant::Columns => w[(c, i)],
            Variant::RowsAndColumns if c < n => w[(i, c)],
            Variant::RowsAndColumns => w[(c - n, i)],
        }
    };
    let q = Mat::<f64>::from_fn(queries.len(), width, |r, c| coord(queries[r], c));
    let rm = Mat::<f64>::from_fn(refs.len(), width, |r, c| coord(refs[r], c));
    let gram = &q * rm.transpose();
    let sq_norm = |m: &Mat<f64>, r: usize| -> f64 { (0..width).map(|c| m[(r, c)] * m[(r, c)]).sum() };
    let qn: Vec<f64> = (0..queries.len()).map(|r| sq_norm(&q, r)).collect();
    let rn: Vec<f64> = (0..refs.len()).map(|r| sq_norm(&rm, r)).collect();
    Ok(Matrix::from_fn(queries.len(), refs.len(), |a, b| {
        if queries[a] == refs[b] {
            0.0
        } else {
            (qn[a] + rn[b] - 2.0 * gram[(a, b)]).max(0.0).sqrt()
        }
    }))
}
