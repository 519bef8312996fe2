//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Sorted descending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// `V f(Λ) V†`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for (k, &lam) in mapped.iter().enumerate() {
                if lam != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * lam;
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Diagonalizes `a` (assumed Hermitian) by sweeping 2x2 unitary rotations over every
/// (p, q) pair until the off-diagonal mass drops below `threshold * max(1, ‖a‖_F)`.
pub(crate) fn jacobi(a: &ComplexMatrix, threshold: f64, max_sweeps: usize) -> Result<Eigen> {
    let n = a.rows();
    let mut a = a.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);
    let stop = threshold * scale;

    let mut converged = off_diagonal_norm(&a) <= stop;
    let mut sweeps = 0;
    while !converged {
        if sweeps == max_sweeps {
            return Err(Error::Numeric(format!(
                "Jacobi eigensolver did not converge in {max_sweeps} sweeps (off-diagonal {:e})",
                off_diagonal_norm(&a)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= stop;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Eigen { values, vectors })
}

/// Zeroes `a[p][q]` with `a <- U† a U`, `v <- v U`, where `U = diag-phase · real rotation`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let phase = g / mag;

    let tau = (beta - alpha) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = phase.conj() * -s;
    let u_qq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}
