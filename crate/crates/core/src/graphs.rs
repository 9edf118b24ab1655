//! k-nearest-neighbour graphs, their adjacency matrices, and the spectral
//! radius estimate that bounds the walk parameter.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::datasets::PointCloud;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default relative tolerance of [`spectral_radius`].
pub const SPECTRAL_TOL: f64 = 1e-10;
/// Power-iteration cap per component before [`spectral_radius`] falls back
/// to a dense eigenvalue solve.
pub const POWER_ITERATION_CAP: usize = 2_000;
/// Floor on the spectral radius used by [`max_stable_t`].
pub const RHO_FLOOR: f64 = 1e-12;

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `D[i][j] = ||x_i - x_j||_2`, exactly symmetric with a zero diagonal.
pub fn pairwise_euclidean(cloud: &PointCloud) -> Matrix {
    let n = cloud.len();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = squared_distance(cloud.point(i), cloud.point(j)).sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// A k-NN graph over the rows of a point cloud.
///
/// `neighbors[i]` lists the heads of the edges leaving `i`, ascending. In
/// directed mode every list has exactly `k` entries; in symmetrized mode the
/// edge relation is closed under reversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnGraph {
    k: usize,
    symmetrized: bool,
    neighbors: Vec<Vec<usize>>,
}

impl KnnGraph {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }
}

fn by_distance_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Indices of the `k` points nearest to `query` among `candidates`, nearest
/// first. Equal distances go to the lower index.
pub(crate) fn nearest_k(
    query: &[f64],
    cloud: &PointCloud,
    candidates: impl Iterator<Item = usize>,
    k: usize,
) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = candidates
        .map(|j| (squared_distance(query, cloud.point(j)), j))
        .collect();
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_distance_then_index);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_distance_then_index);
    scored.into_iter().map(|(_, j)| j).collect()
}

/// Connects every point to its `k` nearest other points.
pub fn knn_graph(cloud: &PointCloud, k: usize, symmetrize: bool) -> Result<KnnGraph> {
    let n = cloud.len();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "k must satisfy 1 <= k <= n-1, got k={k} for n={n}"
        )));
    }
    let mut neighbors: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut ns = nearest_k(cloud.point(i), cloud, (0..n).filter(|&j| j != i), k);
            ns.sort_unstable();
            ns
        })
        .collect();
    if symmetrize {
        let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, ns) in neighbors.iter().enumerate() {
            for &j in ns {
                reverse[j].push(i);
            }
        }
        for (ns, rev) in neighbors.iter_mut().zip(reverse) {
            ns.extend(rev);
            ns.sort_unstable();
            ns.dedup();
        }
    }
    Ok(KnnGraph {
        k,
        symmetrized: symmetrize,
        neighbors,
    })
}

/// A 0/1 adjacency matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: Matrix,
    symmetrized: bool,
    nonzeros: Vec<Vec<usize>>,
}

impl AdjacencyMatrix {
    /// Validates a dense 0/1 matrix. The symmetrized flag is set when the
    /// matrix is symmetric.
    pub fn from_dense(entries: Matrix) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::mismatch(
                format!("{n} rows"),
                format!("{} columns", entries.ncols()),
            ));
        }
        let mut nonzeros = vec![Vec::new(); n];
        for (i, nz) in nonzeros.iter_mut().enumerate() {
            for j in 0..n {
                let v = entries[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::invalid(format!(
                        "adjacency entry ({i},{j}) = {v} is not 0 or 1"
                    )));
                }
                if v == 1.0 {
                    if i == j {
                        return Err(Error::invalid(format!("self loop at node {i}")));
                    }
                    nz.push(j);
                }
            }
        }
        let symmetrized = entries.is_symmetric();
        Ok(AdjacencyMatrix {
            entries,
            symmetrized,
            nonzeros,
        })
    }

    pub fn zeros(n: usize) -> Self {
        AdjacencyMatrix {
            entries: Matrix::zeros(n, n),
            symmetrized: true,
            nonzeros: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_nonzeros(&self, i: usize) -> &[usize] {
        &self.nonzeros[i]
    }

    pub fn max_row_sum(&self) -> f64 {
        self.nonzeros.iter().map(Vec::len).max().unwrap_or(0) as f64
    }

    /// `y = A x` using the sparsity pattern.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.nonzeros
            .iter()
            .map(|nz| nz.iter().map(|&j| x[j]).sum())
            .collect()
    }
}

/// Dense adjacency of a graph: `entries[i][j] = 1` iff `(i, j)` is an edge.
pub fn adjacency(graph: &KnnGraph) -> AdjacencyMatrix {
    let n = graph.len();
    let mut entries = Matrix::zeros(n, n);
    for (i, j) in graph.edges() {
        entries[(i, j)] = 1.0;
    }
    AdjacencyMatrix {
        entries,
        symmetrized: graph.is_symmetrized(),
        nonzeros: graph.neighbors.clone(),
    }
}

/// Strongly connected components (iterative Tarjan), each as a list of
/// node indices.
pub fn strongly_connected_components(adj: &AdjacencyMatrix) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // (node, position in its neighbour list)
        let mut frames = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            let nbrs = adj.row_nonzeros(v);
            if *pos < nbrs.len() {
                let w = nbrs[*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                components.push(comp);
            }
        }
    }
    components
}

/// Perron root of the irreducible submatrix on `nodes` (at least two nodes).
///
/// Power iteration on `A + I`, which is primitive for irreducible `A`, from
/// the all-ones vector. The Collatz-Wielandt quotients bracket `rho + 1` and
/// both converge, so the loop stops once the bracket is relatively tight.
/// The bracket closes at the eigenvector rate, which is slow for components
/// made of weakly joined clusters; those get a dense eigenvalue solve.
fn irreducible_radius(adj: &AdjacencyMatrix, nodes: &[usize], tol: f64) -> Result<f64> {
    let m = nodes.len();
    let mut local = vec![usize::MAX; adj.len()];
    for (li, &g) in nodes.iter().enumerate() {
        local[g] = li;
    }
    let nbrs: Vec<Vec<usize>> = nodes
        .iter()
        .map(|&g| {
            adj.row_nonzeros(g)
                .iter()
                .map(|&j| local[j])
                .filter(|&j| j != usize::MAX)
                .collect()
        })
        .collect();
    let mut x = vec![1.0; m];
    for _ in 0..POWER_ITERATION_CAP {
        let y: Vec<f64> = (0..m)
            .map(|i| x[i] + nbrs[i].iter().map(|&j| x[j]).sum::<f64>())
            .collect();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= tol * hi {
            return Ok(0.5 * (hi + lo) - 1.0);
        }
        let scale = y.iter().copied().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / scale).collect();
    }
    dense_radius(&nbrs)
}

fn dense_radius(nbrs: &[Vec<usize>]) -> Result<f64> {
    let m = nbrs.len();
    let mut a = faer::Mat::<f64>::zeros(m, m);
    for (i, row) in nbrs.iter().enumerate() {
        for &j in row {
            a[(i, j)] = 1.0;
        }
    }
    let symmetric = (0..m).all(|i| nbrs[i].iter().all(|&j| nbrs[j].binary_search(&i).is_ok()));
    let failed = |_| Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        estimate: f64::NAN,
    };
    let rho = if symmetric {
        a.self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(failed)?
            .into_iter()
            .fold(0.0, |r: f64, l| r.max(l.abs()))
    } else {
        a.eigenvalues()
            .map_err(failed)?
            .into_iter()
            .fold(0.0, |r: f64, z| r.max(z.re.hypot(z.im)))
    };
    Ok(rho)
}

/// Largest eigenvalue modulus of a nonnegative 0/1 matrix with zero
/// diagonal.
///
/// Equal row sums give the answer directly (the all-ones vector is a Perron
/// vector). Otherwise the radius is the largest Perron root over the
/// strongly connected components; single-node components contribute 0.
/// The result always lies in `[min row sum, max row sum]`.
pub fn spectral_radius(adj: &AdjacencyMatrix, tol: f64) -> Result<f64> {
    let n = adj.len();
    if n == 0 {
        return Err(Error::invalid("spectral radius of an empty matrix"));
    }
    let sums: Vec<usize> = (0..n).map(|i| adj.row_nonzeros(i).len()).collect();
    let (min_row, max_row) = (
        *sums.iter().min().expect("nonempty") as f64,
        *sums.iter().max().expect("nonempty") as f64,
    );
    if min_row == max_row {
        return Ok(max_row);
    }
    let mut rho = 0.0f64;
    for comp in strongly_connected_components(adj) {
        if comp.len() > 1 {
            rho = rho.max(irreducible_radius(adj, &comp, tol)?);
        }
    }
    Ok(rho.clamp(min_row, max_row))
}

/// Walk parameter `safety / max(rho(A1), rho(A2), 1e-12)`, which keeps both
/// `I - tA` invertible with a convergent Neumann series.
pub fn max_stable_t(a1: &AdjacencyMatrix, a2: &AdjacencyMatrix, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::invalid(format!("safety must lie in (0, 1), got {safety}")));
    }
    let rho = spectral_radius(a1, SPECTRAL_TOL)?
        .max(spectral_radius(a2, SPECTRAL_TOL)?)
        .max(RHO_FLOOR);
    Ok(safety / rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [x]).collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    fn dense(rows: &[&[f64]]) -> AdjacencyMatrix {
        AdjacencyMatrix::from_dense(Matrix::from_rows(rows)).unwrap()
    }

    #[test]
    fn components_of_small_digraph() {
        // 0 <-> 1 -> 2 -> 3 -> 2, 4 isolated
        let a = dense(&[
            &[0.0, 1.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0, 0.0],
        ]);
        let mut comps = strongly_connected_components(&a);
        comps.sort();
        assert_eq!(comps, vec![vec![0, 1], vec![2, 3], vec![4]]);
        assert!((spectral_radius(&a, SPECTRAL_TOL).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nilpotent_radius_is_zero() {
        let a = dense(&[&[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(spectral_radius(&a, SPECTRAL_TOL).unwrap(), 0.0);
    }

    #[test]
    fn single_point_distance_matrix() {
        let d = pairwise_euclidean(&line(&[4.0]));
        assert_eq!(d, Matrix::zeros(1, 1));
    }

    #[test]
    fn three_four_five() {
        let c = PointCloud::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        assert_eq!(pairwise_euclidean(&c)[(0, 1)], 5.0);
    }

    #[test]
    fn three_point_knn_directed_and_symmetrized() {
        let c = line(&[0.0, 1.0, 2.5]);
        let g = knn_graph(&c, 1, false).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 0), (2, 1)]);
        let s = knn_graph(&c, 1, true).unwrap();
        assert_eq!(
            s.edges().collect::<Vec<_>>(),
            vec![(0, 1), (1, 0), (1, 2), (2, 1)]
        );
    }

    #[test]
    fn full_k_is_complete_graph() {
        let g = knn_graph(&line(&[0.0, 1.0, 5.0, 6.0]), 3, false).unwrap();
        assert_eq!(g.edge_count(), 12);
    }

    #[test]
    fn k_out_of_range() {
        let c = line(&[0.0, 1.0]);
        assert!(knn_graph(&c, 2, false).is_err());
        assert!(knn_graph(&c, 0, false).is_err());
    }

    #[test]
    fn duplicate_points_break_ties_by_index() {
        let c = line(&[0.0, 0.0, 0.0, 0.0]);
        let g = knn_graph(&c, 2, false).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(3), &[0, 1]);
    }

    #[test]
    fn adjacency_of_path() {
        let s = knn_graph(&line(&[0.0, 1.0, 2.5]), 1, true).unwrap();
        let a = adjacency(&s);
        assert_eq!(
            a.entries(),
            &Matrix::from_rows(&[[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        );
        assert!(a.is_symmetrized());
    }

    #[test]
    fn directed_row_sums_equal_k() {
        let c = line(&[0.0, 0.3, 1.7, 2.0, 4.0, 9.0]);
        let a = adjacency(&knn_graph(&c, 2, false).unwrap());
        assert!(a.entries().row_sums().iter().all(|&s| s == 2.0));
    }

    #[test]
    fn from_dense_rejects_bad_entries() {
        assert!(AdjacencyMatrix::from_dense(Matrix::from_rows(&[[1.0]])).is_err());
        assert!(AdjacencyMatrix::from_dense(Matrix::from_rows(&[[0.0, 0.5], [0.0, 0.0]])).is_err());
        assert_eq!(AdjacencyMatrix::from_dense(Matrix::zeros(3, 3)).unwrap(), AdjacencyMatrix::zeros(3));
    }

    #[test]
    fn spectral_radius_small_cases() {
        let k2 = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((spectral_radius(&k2, 1e-10).unwrap() - 1.0).abs() < 1e-9);
        let p3 = dense(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        assert!((spectral_radius(&p3, 1e-10).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert_eq!(spectral_radius(&AdjacencyMatrix::zeros(4), 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn spectral_radius_directed_cycle() {
        // permutation matrix: all eigenvalues on the unit circle
        let c3 = dense(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert!((spectral_radius(&c3, 1e-10).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectral_radius_reducible() {
        // a triangle plus an isolated edge feeding into it
        let a = dense(&[
            &[0.0, 1.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0, 0.0, 0.0],
            &[1.0, 1.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0, 1.0, 0.0],
        ]);
        assert!((spectral_radius(&a, 1e-10).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn stable_t_examples() {
        let k2 = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((max_stable_t(&k2, &k2, 0.9).unwrap() - 0.9).abs() < 1e-9);
        let p3 = dense(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let t = max_stable_t(&p3, &AdjacencyMatrix::zeros(3), 0.9).unwrap();
        assert!((t - 0.9 / 2f64.sqrt()).abs() < 1e-9);
        assert!((t - 0.63640).abs() < 1e-5);
        assert!(max_stable_t(&p3, &p3, 1.0).is_err());
        assert!(max_stable_t(&p3, &p3, 0.0).is_err());
        let tiny = max_stable_t(&p3, &p3, 1e-9).unwrap();
        assert!(tiny < 1e-8);
    }
}
