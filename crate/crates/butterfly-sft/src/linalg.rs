//! Minimal dense complex linear algebra for the small (p x p) fit operators.

use num_complex::Complex64;

/// Dense row-major complex matrix, only as big as a grid axis ever gets.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CMat {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl CMat {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                a.push(f(r, c));
            }
        }
        CMat { n, a }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.a[r * self.n + c]
    }

    /// y = A x, writing into a caller-provided buffer.
    pub fn mul_vec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let row = &self.a[r * self.n..(r + 1) * self.n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, xv) in row.iter().zip(x.iter()) {
                acc += m * xv;
            }
            y[r] = acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for c in 0..self.n {
            let mut s = 0.0;
            for r in 0..self.n {
                s += self.at(r, c).norm();
            }
            best = best.max(s);
        }
        best
    }
}

/// LU factorization with partial (row) pivoting, stored packed.
#[derive(Debug, Clone)]
pub(crate) struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct SingularMatrix;

impl Lu {
    pub fn factor(m: &CMat) -> Result<Lu, SingularMatrix> {
        let n = m.n;
        let mut lu = m.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // pivot on the largest remaining entry in column k
            let mut best = k;
            let mut best_mag = lu[k * n + k].norm_sqr();
            for r in k + 1..n {
                let mag = lu[r * n + k].norm_sqr();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return Err(SingularMatrix);
            }
            if best != k {
                for c in 0..n {
                    lu.swap(k * n + c, best * n + c);
                }
                piv.swap(k, best);
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                for c in k + 1..n {
                    let sub = factor * lu[k * n + c];
                    lu[r * n + c] -= sub;
                }
            }
        }
        Ok(Lu { n, lu, piv })
    }

    /// Solves A x = b in place; `b` must have length n.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // apply the row permutation
        let mut x: Vec<Complex64> = (0..n).map(|r| b[self.piv[r]]).collect();
        // forward substitution with unit lower triangle
        for r in 1..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc;
        }
        // back substitution
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= self.lu[r * n + c] * x[c];
            }
            x[r] = acc / self.lu[r * n + r];
        }
        b.copy_from_slice(&x);
    }

    /// Explicit inverse, used once per factorization for a condition estimate.
    pub fn inverse(&self) -> CMat {
        let n = self.n;
        let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            col.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            col[c] = Complex64::new(1.0, 0.0);
            self.solve_in_place(&mut col);
            for r in 0..n {
                inv[r * n + c] = col[r];
            }
        }
        CMat { n, a: inv }
    }
}
