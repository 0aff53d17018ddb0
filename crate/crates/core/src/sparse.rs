//! Compressed sparse rows and a preconditioned conjugate gradient solver for
//! the symmetric positive definite systems of the finite element module.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed
    /// in input order, so the result does not depend on how they were produced.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        // stable sort keeps the summation order of duplicates fixed
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            *yi = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// Principal submatrix on `keep` (sorted), renumbered `0..keep.len()`.
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut trip = Vec::new();
        for (new_r, &r) in keep.iter().enumerate() {
            for (c, v) in self.row(r) {
                if map[c] != usize::MAX {
                    trip.push((new_r, map[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), trip)
    }
}

/// Incomplete Cholesky factor with the sparsity of the lower triangle.
struct IncompleteCholesky {
    lower: CsrMatrix,
}

impl IncompleteCholesky {
    fn new(a: &CsrMatrix) -> Option<Self> {
        let n = a.n;
        let mut trip = Vec::with_capacity(a.nnz() / 2 + n);
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    trip.push((i, j, v));
                }
            }
        }
        let mut l = CsrMatrix::from_triplets(n, trip);
        let mut diag_pos = vec![0usize; n];
        for i in 0..n {
            let (start, end) = (l.indptr[i], l.indptr[i + 1]);
            for k in start..end {
                let j = l.indices[k];
                // l_ij -= sum_{m < j} l_im l_jm over the common pattern
                let (js, je) = (l.indptr[j], l.indptr[j + 1]);
                let mut s = 0.0;
                let (mut p, mut q) = (start, js);
                while p < k && q < je {
                    let (cp, cq) = (l.indices[p], l.indices[q]);
                    if cq >= j {
                        break;
                    }
                    match cp.cmp(&cq) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            s += l.values[p] * l.values[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                if j == i {
                    let d = l.values[k] - s;
                    if d <= 0.0 || !d.is_finite() {
                        return None;
                    }
                    l.values[k] = d.sqrt();
                    diag_pos[i] = k;
                } else {
                    l.values[k] = (l.values[k] - s) / l.values[diag_pos[j]];
                }
            }
        }
        Some(IncompleteCholesky { lower: l })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let l = &self.lower;
        let n = l.n;
        // forward: L y = r
        for i in 0..n {
            let (s, e) = (l.indptr[i], l.indptr[i + 1]);
            let mut acc = r[i];
            for k in s..e - 1 {
                acc -= l.values[k] * z[l.indices[k]];
            }
            z[i] = acc / l.values[e - 1];
        }
        // backward: L^T x = y, column sweep
        for i in (0..n).rev() {
            let (s, e) = (l.indptr[i], l.indptr[i + 1]);
            z[i] /= l.values[e - 1];
            let zi = z[i];
            for k in s..e - 1 {
                z[l.indices[k]] -= l.values[k] * zi;
            }
        }
    }
}

enum Preconditioner {
    Cholesky(IncompleteCholesky),
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Cholesky(ic) => ic.apply(r, z),
            Preconditioner::Jacobi(d) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                    *zi = ri / di;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||b - A x|| / ||b||`, recomputed from scratch at the end.
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` for symmetric positive definite `A` by conjugate gradients
/// with an IC(0) preconditioner (Jacobi if the factorization breaks down).
///
/// Iterates towards `||b - A x|| <= rel_tol ||b||`. Rounding of `x` itself puts
/// a floor under the true residual near `eps ||A|| ||x||`, so iteration also
/// stops once restarts no longer reduce it; only a final residual above
/// `accept_tol` is an error.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], rel_tol: f64, accept_tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            left: b.len(),
            right: n,
        });
    }
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    let pre = match IncompleteCholesky::new(a) {
        Some(ic) => Preconditioner::Cholesky(ic),
        None => Preconditioner::Jacobi((0..n).map(|i| a.get(i, i)).collect()),
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iter = 20 * n + 100;
    let mut iterations = 0;
    // iterate slightly past the target so the recomputed residual also meets it
    let inner_tol = 0.25 * rel_tol;
    const MAX_RESTARTS: usize = 10;
    let mut restarts = 0;
    let mut last_true = f64::INFINITY;
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations = it;
        if dot(&r, &r).sqrt() <= inner_tol * bnorm {
            // the recursive residual drifts from b - A x; replace it and
            // restart from the current iterate until the true one converges
            a.matvec_into(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            let true_norm = dot(&r, &r).sqrt();
            if true_norm <= rel_tol * bnorm || restarts == MAX_RESTARTS || true_norm > 0.5 * last_true {
                break;
            }
            last_true = true_norm;
            restarts += 1;
            pre.apply(&r, &mut z);
            rz = dot(&r, &z);
            p.copy_from_slice(&z);
            continue;
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let ax = a.matvec(&x);
    let true_res = ax.iter().zip(b).map(|(u, v)| (v - u) * (v - u)).sum::<f64>().sqrt() / bnorm;
    if !(true_res <= accept_tol) {
        return Err(Error::NonConvergence {
            what: "conjugate gradients".into(),
            detail: format!("relative residual {true_res:e} after {iterations} iterations"),
        });
    }
    Ok((
        x,
        SolveStats {
            iterations,
            rel_residual: true_res,
        },
    ))
}

/// Solve a cyclic tridiagonal system with constant-pattern bands:
/// `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` with indices mod n.
pub fn solve_cyclic_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 || lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::param("cyclic system", "need n >= 3 and matching band lengths"));
    }
    // Sherman-Morrison: A = T + u v^T with u = (g, 0.., upper[n-1]), v = (1, 0.., lower[0]/g)
    let g = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= g;
    d[n - 1] -= upper[n - 1] * lower[0] / g;
    let thomas = |rhs: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut y = vec![0.0; n];
        c[0] = upper[0] / d[0];
        y[0] = rhs[0] / d[0];
        for i in 1..n {
            let m = d[i] - lower[i] * c[i - 1];
            c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
            y[i] = (rhs[i] - lower[i] * y[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            y[i] -= c[i] * y[i + 1];
        }
        y
    };
    let y = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = g;
    u[n - 1] = upper[n - 1];
    let zv = thomas(&u);
    let vy = y[0] + lower[0] / g * y[n - 1];
    let vz = zv[0] + lower[0] / g * zv[n - 1];
    let f = vy / (1.0 + vz);
    Ok(y.iter().zip(&zv).map(|(a, b)| a - f * b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = vec![];
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(1, 0), 2.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn cg_solves_laplacian() {
        let a = laplace_1d(200);
        let x0: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.matvec(&x0);
        let (x, st) = solve_spd(&a, &b, 1e-12, 1e-9).unwrap();
        assert!(st.rel_residual <= 1e-12);
        for (u, v) in x.iter().zip(&x0) {
            assert!((u - v).abs() < 1e-8);
        }
        let sub = a.submatrix(&[0, 1, 2]);
        assert_eq!(sub.get(2, 1), -1.0);
    }

    #[test]
    fn cyclic_tridiagonal() {
        let n = 9;
        let lower: Vec<f64> = (0..n).map(|i| 0.5 + 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| 0.3 + 0.02 * i as f64).collect();
        let diag = vec![3.0; n];
        let x0: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| lower[i] * x0[(i + n - 1) % n] + diag[i] * x0[i] + upper[i] * x0[(i + 1) % n])
            .collect();
        let x = solve_cyclic_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (u, v) in x.iter().zip(&x0) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
