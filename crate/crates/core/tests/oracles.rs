//! Library results checked against independent, deliberately naive
//! recomputations.

use manifoldwalk::baselines::{
    cosine_distance, hausdorff_distance, procrustes_disparity, rbf_distance, wasserstein_distance,
};
use manifoldwalk::datasets::PointCloud;
use manifoldwalk::graphs::{adjacency, knn_graph, spectral_radius, AdjacencyMatrix, SPECTRAL_TOL};
use manifoldwalk::matrix::Matrix;
use manifoldwalk::similarity::{manifold_distance, walk_matrix, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::from_rows(&rows).unwrap()
}

fn random_digraph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> AdjacencyMatrix {
    let m = Matrix::from_fn(n, n, |i, j| {
        if i != j && rng.random::<f64>() < density {
            1.0
        } else {
            0.0
        }
    });
    AdjacencyMatrix::from_dense(m).unwrap()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn neumann(adj: &AdjacencyMatrix, t: f64, terms: usize) -> Vec<Vec<f64>> {
    let n = adj.len();
    let ta: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| t * adj.entries()[(i, j)]).collect())
        .collect();
    let mut power: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut sum = power.clone();
    for _ in 0..terms {
        power = matmul(&power, &ta);
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += power[i][j];
            }
        }
    }
    sum
}

#[test]
fn walk_matrix_matches_truncated_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..50 {
        let n = rng.random_range(2..=20);
        let adj = if case % 2 == 0 {
            random_digraph(&mut rng, n, 0.3)
        } else {
            let k = rng.random_range(1..n);
            adjacency(&knn_graph(&random_cloud(&mut rng, n, 3), k, case % 4 == 1).unwrap())
        };
        let rho = spectral_radius(&adj, SPECTRAL_TOL).unwrap();
        let t = if rho > 1e-12 { 0.5 / rho } else { 0.5 };
        let w = walk_matrix(&adj, t).unwrap();
        let series = neumann(&adj, t, 60);
        let mut diff = 0.0;
        for i in 0..n {
            for j in 0..n {
                diff += (w.matrix()[(i, j)] - series[i][j]).powi(2);
            }
        }
        assert!(diff.sqrt() <= 1e-6, "case {case}: {}", diff.sqrt());
    }
}

#[test]
fn spectral_radius_matches_dense_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..40 {
        let n = rng.random_range(2..=15);
        let adj = if case % 2 == 0 {
            let density = rng.random_range(0.1..0.6);
            random_digraph(&mut rng, n, density)
        } else {
            let k = rng.random_range(1..n);
            adjacency(&knn_graph(&random_cloud(&mut rng, n, 2), k, case % 4 == 1).unwrap())
        };
        let dense = faer::Mat::from_fn(n, n, |i, j| adj.entries()[(i, j)]);
        let oracle = dense
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|z| (z.re * z.re + z.im * z.im).sqrt())
            .fold(0.0, f64::max);
        let got = spectral_radius(&adj, SPECTRAL_TOL).unwrap();
        assert!((got - oracle).abs() < 1e-6, "case {case}: {got} vs {oracle}");
    }
}

#[test]
fn directed_knn_radius_is_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in [1, 3, 7, 15] {
        let adj = adjacency(&knn_graph(&random_cloud(&mut rng, 60, 3), k, false).unwrap());
        let rho = spectral_radius(&adj, SPECTRAL_TOL).unwrap();
        assert!((rho - k as f64).abs() < 1e-8, "k={k}: {rho}");
    }
}

fn brute_knn(points: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|i| {
            let mut cand: Vec<(f64, usize)> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = points[i]
                        .iter()
                        .zip(&points[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    (d, j)
                })
                .collect();
            cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut nb: Vec<usize> = cand[..k].iter().map(|c| c.1).collect();
            nb.sort_unstable();
            nb
        })
        .collect()
}

fn sorted_neighbors(g: &manifoldwalk::graphs::KnnGraph, i: usize) -> Vec<usize> {
    let mut v = g.neighbors(i).to_vec();
    v.sort_unstable();
    v
}

#[test]
fn knn_graph_matches_brute_force() {
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = rng.random_range(2..=200);
        let d = rng.random_range(1..=5);
        let k = rng.random_range(1..n.min(16));
        let cloud = random_cloud(&mut rng, n, d);
        let points: Vec<Vec<f64>> = cloud.points().map(<[f64]>::to_vec).collect();
        let g = knn_graph(&cloud, k, false).unwrap();
        let oracle = brute_knn(&points, k);
        for (i, want) in oracle.iter().enumerate() {
            assert_eq!(&sorted_neighbors(&g, i), want, "seed {seed} row {i}");
        }
        // symmetrized graph = union of both directions
        let s = knn_graph(&cloud, k, true).unwrap();
        for i in 0..n {
            let mut want: Vec<usize> = (0..n)
                .filter(|&j| oracle[i].contains(&j) || oracle[j].contains(&i))
                .collect();
            want.sort_unstable();
            assert_eq!(sorted_neighbors(&s, i), want, "seed {seed} sym row {i}");
        }
    }
}

#[test]
fn knn_ties_prefer_lower_index_on_lattice() {
    let mut rows = Vec::new();
    for y in 0..6 {
        for x in 0..6 {
            rows.push(vec![x as f64, y as f64]);
        }
    }
    let cloud = PointCloud::from_rows(&rows).unwrap();
    for k in [1, 2, 3, 5, 8] {
        let g = knn_graph(&cloud, k, false).unwrap();
        let oracle = brute_knn(&rows, k);
        for (i, want) in oracle.iter().enumerate() {
            assert_eq!(&sorted_neighbors(&g, i), want, "k {k} row {i}");
        }
    }
}

#[test]
fn two_node_closed_form() {
    let k2 = AdjacencyMatrix::from_dense(Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]])).unwrap();
    let zero = AdjacencyMatrix::zeros(2);
    let d = manifold_distance(&k2, &zero, Some(0.1), Variant::Rows).unwrap();
    // (I - tA)^-1 = [[1, t], [t, 1]] / (1 - t^2), minus the identity
    let s: f64 = 1.0 / (1.0 - 0.01);
    let closed = (2.0 * (s - 1.0).powi(2) + 2.0 * (0.1 * s).powi(2)).sqrt();
    assert!((d.distance - closed).abs() < 1e-12);
    assert!((d.distance - 0.143562).abs() < 1e-6);
}

#[test]
fn cosine_matches_scalar_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (n, d) = (rng.random_range(1..40), rng.random_range(1..5));
        let a = random_cloud(&mut rng, n, d);
        let b = random_cloud(&mut rng, n, d);
        let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
        for i in 0..n {
            for j in 0..d {
                let (x, y) = (a.point(i)[j], b.point(i)[j]);
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
        }
        let oracle = 1.0 - dot / (na.sqrt() * nb.sqrt());
        assert!((cosine_distance(&a, &b).unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn rbf_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_cloud(&mut rng, 12, 2);
    let b = random_cloud(&mut rng, 17, 2);
    let gamma = 0.7;
    let k = |p: &[f64], q: &[f64]| {
        (-gamma * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2))).exp()
    };
    let mean = |x: &PointCloud, y: &PointCloud| {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                s += k(x.point(i), y.point(j));
            }
        }
        s / (x.len() * y.len()) as f64
    };
    let oracle = mean(&a, &a) + mean(&b, &b) - 2.0 * mean(&a, &b);
    assert!((rbf_distance(&a, &b, Some(gamma)).unwrap() - oracle).abs() < 1e-12);
}

fn standardize(rows: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r[0]).sum::<f64>() / n;
    let my = rows.iter().map(|r| r[1]).sum::<f64>() / n;
    let c: Vec<[f64; 2]> = rows.iter().map(|r| [r[0] - mx, r[1] - my]).collect();
    let norm = c.iter().map(|r| r[0] * r[0] + r[1] * r[1]).sum::<f64>().sqrt();
    c.iter().map(|r| [r[0] / norm, r[1] / norm]).collect()
}

#[test]
fn procrustes_matches_rotation_grid_search() {
    let x1 = [[0.0, 0.0], [1.0, 0.2], [0.3, 1.4]];
    let x2 = [[2.0, 1.0], [2.4, 2.1], [0.9, 1.5]];
    let (a, b) = (standardize(&x1), standardize(&x2));
    // with both sides unit-norm, the optimal scale leaves 1 - tr(A^T B R)^2
    let mut best = 0.0f64;
    for step in 0..3600 {
        let th = (step as f64 * 0.1).to_radians();
        let (s, c) = th.sin_cos();
        for reflect in [1.0, -1.0] {
            let r = [[c, -s * reflect], [s, c * reflect]];
            let mut tr = 0.0;
            for i in 0..3 {
                let rb = [
                    b[i][0] * r[0][0] + b[i][1] * r[1][0],
                    b[i][0] * r[0][1] + b[i][1] * r[1][1],
                ];
                tr += a[i][0] * rb[0] + a[i][1] * rb[1];
            }
            best = best.max(tr * tr);
        }
    }
    let oracle = 1.0 - best;
    let p1 = PointCloud::from_rows(&x1).unwrap();
    let p2 = PointCloud::from_rows(&x2).unwrap();
    let got = procrustes_disparity(&p1, &p2).unwrap();
    assert!((got - oracle).abs() < 1e-4, "{got} vs {oracle}");
}

/// Minimum-cost perfect matching (Hungarian algorithm, O(n^3)).
fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let inf = f64::INFINITY;
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let (mut p, mut way) = (vec![0usize; n + 1], vec![0usize; n + 1]);
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[p[j] - 1][j - 1]).sum()
}

#[test]
fn wasserstein_matches_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = random_cloud(&mut rng, 50, 2);
    let b = random_cloud(&mut rng, 25, 4);
    let (va, vb) = (a.features().as_slice(), b.features().as_slice());
    let cost: Vec<Vec<f64>> = va
        .iter()
        .map(|x| vb.iter().map(|y| (x - y).abs()).collect())
        .collect();
    let oracle = assignment_cost(&cost) / 100.0;
    let got = wasserstein_distance(&a, &b).unwrap();
    assert!((got - oracle).abs() < 1e-9, "{got} vs {oracle}");
}

#[test]
fn hausdorff_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let a = random_cloud(&mut rng, 50, 3);
        let b = random_cloud(&mut rng, 50, 3);
        let directed = |x: &PointCloud, y: &PointCloud| {
            let mut worst = 0.0f64;
            for i in 0..x.len() {
                let mut best = f64::INFINITY;
                for j in 0..y.len() {
                    let d = (0..3)
                        .map(|c| (x.point(i)[c] - y.point(j)[c]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    best = best.min(d);
                }
                worst = worst.max(best);
            }
            worst
        };
        let oracle = directed(&a, &b).max(directed(&b, &a));
        assert!((hausdorff_distance(&a, &b).unwrap() - oracle).abs() < 1e-12);
    }
}

#[test]
fn spectral_radius_on_weakly_joined_cliques() {
    // two cliques of unequal size bridged by one undirected edge
    for (a, b) in [(12, 9), (30, 25), (40, 39)] {
        let n = a + b;
        let m = Matrix::from_fn(n, n, |i, j| {
            let same = (i < a) == (j < a);
            let bridge = (i, j) == (a - 1, a) || (i, j) == (a, a - 1);
            if i != j && (same || bridge) {
                1.0
            } else {
                0.0
            }
        });
        let adj = AdjacencyMatrix::from_dense(m).unwrap();
        let dense = faer::Mat::from_fn(n, n, |i, j| adj.entries()[(i, j)]);
        let oracle = dense
            .eigenvalues()
            .unwrap()
            .iter()
            .map(|z| (z.re * z.re + z.im * z.im).sqrt())
            .fold(0.0, f64::max);
        let got = spectral_radius(&adj, SPECTRAL_TOL).unwrap();
        assert!((got - oracle).abs() < 1e-6, "{a}+{b}: {got} vs {oracle}");
    }
}
