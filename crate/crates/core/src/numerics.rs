//! Dense symmetric linear algebra: cyclic Jacobi eigensolver, truncated
//! pivoted Cholesky and SPD solves. Everything here is deterministic:
//! identical inputs give bit-identical outputs.

use crate::error::{Error, Result};

/// Compensated (Kahan) accumulator for long floating-point sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Dense column-major matrix. Columns are the natural unit here
/// (eigenvectors, basis coefficients, Cholesky factors).
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// y = A^T x (dot of every column with x).
    pub fn transpose_apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols)
            .map(|j| dot(self.col(j), x))
            .collect()
    }

    /// y = A x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, &aij) in y.iter_mut().zip(self.col(j)) {
                    *yi += aij * xj;
                }
            }
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = KahanSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value()
}

/// Symmetric matrix in packed lower-triangular storage, so the symmetry
/// invariant holds structurally: `get(i, j)` and `get(j, i)` read the same
/// word.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(i: usize, j: usize) -> usize {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        r * (r + 1) / 2 + c
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[Self::idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[Self::idx(i, j)] = v;
    }

    pub fn norm_fro(&self) -> f64 {
        let mut acc = KahanSum::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let a = self.get(i, j);
                acc.add(a * a);
            }
        }
        acc.value().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = KahanSum::new();
                for (j, &xj) in x.iter().enumerate() {
                    acc.add(self.get(i, j) * xj);
                }
                acc.value()
            })
            .collect()
    }

    /// x^T A y.
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(&self.apply(y), x)
    }

    fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }
}

/// Eigendecomposition of a symmetric matrix: eigenvalues sorted in
/// descending order, eigenvectors as orthonormal columns in matching order.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius mass drops
/// below `1e-14 * ||A||_F`.
pub fn symmetric_eig(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let n = a.order();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let mut w = a.to_dense();
    let mut v = Matrix::identity(n);
    let norm = a.norm_fro();
    if norm == 0.0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![0.0; n],
            eigenvectors: v,
        });
    }

    let off = |w: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += w.get(i, j) * w.get(i, j);
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&w) > JACOBI_TOL * norm {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::Convergence("Jacobi eigensolver".into()));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = w.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = w.get(p, p);
                let aqq = w.get(q, q);
                // classical Jacobi rotation
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let wip = w.get(i, p);
                    let wiq = w.get(i, q);
                    w.set(i, p, c * wip - s * wiq);
                    w.set(i, q, s * wip + c * wiq);
                }
                for i in 0..n {
                    let wpi = w.get(p, i);
                    let wqi = w.get(q, i);
                    w.set(p, i, c * wpi - s * wqi);
                    w.set(q, i, s * wpi + c * wqi);
                }
                for i in 0..n {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        w.get(j, j)
            .partial_cmp(&w.get(i, i))
            .unwrap()
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| w.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.col_mut(dst).copy_from_slice(v.col(src));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Truncated pivoted Cholesky factor `A ~ P L L^T P^T`.
///
/// `l` is n-by-rank with rows in pivot order; `pivots[i]` is the original
/// index of pivoted row `i`.
#[derive(Clone, Debug)]
pub struct CholeskyTrunc {
    pub l: Matrix,
    pub rank: usize,
    pub pivots: Vec<usize>,
}

impl CholeskyTrunc {
    /// Solve `L1 z = b1` where `L1` is the leading rank-by-rank lower
    /// triangle and `b1` the right-hand side restricted to pivoted rows.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut z = vec![0.0; r];
        for i in 0..r {
            let mut s = b[i];
            for j in 0..i {
                s -= self.l.get(i, j) * z[j];
            }
            z[i] = s / self.l.get(i, i);
        }
        z
    }

    /// Solve `L1^T y = z`.
    pub fn backward_solve(&self, z: &[f64]) -> Vec<f64> {
        let r = self.rank;
        let mut y = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = z[i];
            for j in i + 1..r {
                s -= self.l.get(j, i) * y[j];
            }
            y[i] = s / self.l.get(i, i);
        }
        y
    }
}

/// Diagonal-pivoted Cholesky that stops once the next pivot falls below
/// `rel_tol` times the first pivot. A pivot below `-rel_tol * ||A||_F`
/// means the input was not positive semidefinite.
pub fn cholesky_trunc(a: &SymmetricMatrix, rel_tol: f64) -> Result<CholeskyTrunc> {
    let n = a.order();
    let mut w = a.to_dense();
    let mut pivots: Vec<usize> = (0..n).collect();
    let mut l = Matrix::zeros(n, n);
    let norm = a.norm_fro();
    let mut first_pivot = 0.0;
    let mut rank = 0;

    for step in 0..n {
        // largest remaining diagonal entry; lowest index wins ties
        let mut best = step;
        for i in step + 1..n {
            if w.get(i, i) > w.get(best, best) {
                best = i;
            }
        }
        let d = w.get(best, best);
        if d < -rel_tol * norm {
            return Err(Error::NotPositiveSemidefinite { pivot: d, step });
        }
        if step == 0 {
            first_pivot = d;
        }
        if d <= 0.0 || d < rel_tol * first_pivot {
            break;
        }
        if best != step {
            pivots.swap(step, best);
            for j in 0..n {
                let a1 = w.get(step, j);
                let a2 = w.get(best, j);
                w.set(step, j, a2);
                w.set(best, j, a1);
            }
            for i in 0..n {
                let a1 = w.get(i, step);
                let a2 = w.get(i, best);
                w.set(i, step, a2);
                w.set(i, best, a1);
            }
            for j in 0..step {
                let a1 = l.get(step, j);
                let a2 = l.get(best, j);
                l.set(step, j, a2);
                l.set(best, j, a1);
            }
        }
        let root = d.sqrt();
        l.set(step, step, root);
        for i in step + 1..n {
            l.set(i, step, w.get(i, step) / root);
        }
        for i in step + 1..n {
            let lis = l.get(i, step);
            for j in step + 1..=i {
                let v = w.get(i, j) - lis * l.get(j, step);
                w.set(i, j, v);
                w.set(j, i, v);
            }
        }
        rank = step + 1;
    }

    let mut lt = Matrix::zeros(n, rank);
    for j in 0..rank {
        for i in 0..n {
            lt.set(i, j, l.get(i, j));
        }
    }
    Ok(CholeskyTrunc {
        l: lt,
        rank,
        pivots,
    })
}

/// Solve `A x = b` for symmetric positive definite `A` by full Cholesky.
pub fn spd_solve(a: &SymmetricMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.order();
    assert_eq!(b.len(), n);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l.get(j, k) * l.get(j, k);
        }
        if d <= 0.0 {
            return Err(Error::RankDeficient(format!(
                "non-positive pivot {d:e} at column {j}"
            )));
        }
        let root = d.sqrt();
        l.set(j, j, root);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / root);
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l.get(i, j) * z[j];
        }
        z[i] = s / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for j in i + 1..n {
            s -= l.get(j, i) * x[j];
        }
        x[i] = s / l.get(i, i);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_spd(n: usize, seed: u64) -> SymmetricMatrix {
        let mut s = seed;
        let mut m = Matrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                m.set(i, j, 2.0 * splitmix(&mut s) - 1.0);
            }
        }
        // M^T M + I is comfortably SPD
        SymmetricMatrix::from_fn(n, |i, j| {
            let mut acc = 0.0;
            for k in 0..n {
                acc += m.get(k, i) * m.get(k, j);
            }
            acc + if i == j { 1.0 } else { 0.0 }
        })
    }

    #[test]
    fn eig_2x2_hand_computed() {
        // characteristic polynomial of [[2,1],[1,2]]: (2-l)^2 - 1 => 3, 1
        let a = SymmetricMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = symmetric_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v0 = e.eigenvectors.col(0);
        let v1 = e.eigenvectors.col(1);
        let inv = 1.0 / 2.0f64.sqrt();
        assert!((v0[0].abs() - inv).abs() < 1e-12);
        assert!((v0[1].abs() - inv).abs() < 1e-12);
        assert!((v0[0] * v0[1]) > 0.0);
        assert!((v1[0] * v1[1]) < 0.0);
    }

    #[test]
    fn eig_identity_and_diagonal() {
        let e = symmetric_eig(&SymmetricMatrix::identity(5)).unwrap();
        for l in &e.eigenvalues {
            assert!((l - 1.0).abs() < 1e-15);
        }
        let d = SymmetricMatrix::from_fn(3, |i, j| {
            if i == j {
                [5.0, 3.0, 1.0][i]
            } else {
                0.0
            }
        });
        let e = symmetric_eig(&d).unwrap();
        assert_eq!(e.eigenvalues, vec![5.0, 3.0, 1.0]);
        for j in 0..3 {
            let col = e.eigenvectors.col(j);
            for i in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((col[i].abs() - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn eig_invariants_on_random_instances() {
        for inst in 0..100 {
            let n = 2 + (inst % 7) * 7; // orders 2..=44
            let a = random_spd(n, 1000 + inst as u64);
            let e = symmetric_eig(&a).unwrap();
            // trace and Frobenius identities
            let tr: f64 = e.eigenvalues.iter().sum();
            assert!((tr - a.trace()).abs() <= 1e-12 * a.trace().abs().max(1.0));
            let fro2: f64 = e.eigenvalues.iter().map(|l| l * l).sum();
            let nf = a.norm_fro();
            assert!((fro2 - nf * nf).abs() <= 1e-12 * nf * nf);
            // residual and orthonormality per pair
            for j in 0..n {
                let v = e.eigenvectors.col(j);
                let av = a.apply(v);
                let mut res = 0.0f64;
                for i in 0..n {
                    res = res.max((av[i] - e.eigenvalues[j] * v[i]).abs());
                }
                assert!(res <= 1e-10 * nf);
                for j2 in 0..=j {
                    let d = dot(v, e.eigenvectors.col(j2));
                    let expected = if j2 == j { 1.0 } else { 0.0 };
                    assert!((d - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eig_is_deterministic() {
        let a = random_spd(12, 7);
        let e1 = symmetric_eig(&a).unwrap();
        let e2 = symmetric_eig(&a).unwrap();
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
    }

    #[test]
    fn cholesky_identity_full_rank() {
        let c = cholesky_trunc(&SymmetricMatrix::identity(3), 1e-10).unwrap();
        assert_eq!(c.rank, 3);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(c.l.get(i, j), expected);
            }
        }
    }

    #[test]
    fn cholesky_rank_one() {
        // v v^T with v = (1, 2, 2): pivot lands on the largest diagonal (4)
        let v = [1.0, 2.0, 2.0];
        let a = SymmetricMatrix::from_fn(3, |i, j| v[i] * v[j]);
        let c = cholesky_trunc(&a, 1e-10).unwrap();
        assert_eq!(c.rank, 1);
        // first pivot row is index 1 or 2 (both have diagonal 4); ties keep lowest
        assert_eq!(c.pivots[0], 1);
        // the single column times its pivot sign reproduces v up to order
        let scale = v[c.pivots[0]] / c.l.get(0, 0);
        for i in 0..3 {
            assert!((c.l.get(i, 0) * scale - v[c.pivots[i]]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_reconstruction_error_bound() {
        for inst in 0..100 {
            let n = 3 + (inst % 6) * 9; // up to 48
            let a = random_spd(n, 40_000 + inst as u64);
            let tol = 1e-10;
            let c = cholesky_trunc(&a, tol).unwrap();
            let mut err: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..c.rank {
                        s += c.l.get(i, k) * c.l.get(j, k);
                    }
                    err = err.max((a.get(c.pivots[i], c.pivots[j]) - s).abs());
                }
            }
            assert!(err <= n as f64 * tol * a.norm_fro());
        }
    }

    #[test]
    fn cholesky_detects_indefinite() {
        let a = SymmetricMatrix::from_fn(2, |i, j| if i == j { -1.0 } else { 0.0 });
        match cholesky_trunc(&a, 1e-10) {
            Err(Error::NotPositiveSemidefinite { .. }) => {}
            other => panic!("expected NotPositiveSemidefinite, got {other:?}"),
        }
    }

    #[test]
    fn spd_solve_identity_and_diagonal() {
        let b = vec![1.0, -2.0, 0.5];
        let x = spd_solve(&SymmetricMatrix::identity(3), &b).unwrap();
        assert_eq!(x, b);
        let a = SymmetricMatrix::from_fn(2, |i, j| {
            if i == j {
                [4.0, 9.0][i]
            } else {
                0.0
            }
        });
        let x = spd_solve(&a, &[8.0, 27.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
        assert!((x[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn spd_solve_residual_on_random_instances() {
        for inst in 0..100 {
            let n = 4 + (inst % 5) * 11; // up to 48
            let a = random_spd(n, 90_000 + inst as u64);
            let mut s = 555 + inst as u64;
            let b: Vec<f64> = (0..n).map(|_| 2.0 * splitmix(&mut s) - 1.0).collect();
            let x = spd_solve(&a, &b).unwrap();
            let ax = a.apply(&x);
            let bn = dot(&b, &b).sqrt();
            let mut r = 0.0f64;
            for i in 0..n {
                r += (ax[i] - b[i]) * (ax[i] - b[i]);
            }
            assert!(r.sqrt() <= 1e-10 * bn.max(1.0));
        }
    }

    #[test]
    fn kahan_beats_naive_on_adversarial_sum() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..10_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
