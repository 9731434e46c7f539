//! Quantized Laplacian `Δ_N` on `su(N)`.
//!
//! `Δ_N W = Σ_a [X_a, [X_a, W]]` where `X_a = −i J_a` are the skew-Hermitian
//! generators of the `N`-dimensional irreducible representation of `su(2)`
//! (spin `s = (N − 1)/2`), so that `[X_1, X_2] = X_3` cyclically. On
//! traceless matrices its eigenvalues are `−l(l+1)`, `l = 1..N−1`, each with
//! multiplicity `2l + 1`.
//!
//! Writing `J_± = J_x ± i J_y` in the basis `m = s, s−1, …, −s`, the double
//! commutator becomes a three-point stencil that only couples `W_{jk}` with
//! `W_{j±1,k±1}`:
//!
//! ```text
//! (Δ_N W)_{jk} = −(2s(s+1) − 2 m_j m_k) W_{jk} + a_j a_k W_{j+1,k+1} + a_{j−1} a_{k−1} W_{j−1,k−1}
//! ```
//!
//! with `a_j = ⟨m_j| J_+ |m_{j+1}⟩`. Every diagonal `k − j = const` is thus
//! invariant and `Δ_N − σ` is inverted with one symmetric tridiagonal solve per
//! diagonal, `O(N²)` per application.

use crate::algebra::{block_commutator, Block, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuantizedLaplacian {
    n: usize,
    casimir: f64,
    m: Vec<f64>,
    ladder: Vec<f64>,
    generators: [Block; 3],
}

impl QuantizedLaplacian {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("Δ_N needs N ≥ 2, got {n}")));
        }
        let s = (n as f64 - 1.0) / 2.0;
        let m: Vec<f64> = (0..n).map(|j| s - j as f64).collect();
        let ladder: Vec<f64> = (0..n - 1)
            .map(|j| {
                let mj1 = m[j + 1];
                (s * (s + 1.0) - mj1 * (mj1 + 1.0)).sqrt()
            })
            .collect();

        let mut jp = Block::zeros(n, n);
        for (j, &a) in ladder.iter().enumerate() {
            jp[(j, j + 1)] = C64::new(a, 0.0);
        }
        let jm = jp.transpose();
        let i = C64::new(0.0, 1.0);
        let half = C64::new(0.5, 0.0);
        let x1 = (&jp + &jm) * (-i * half);
        let x2 = (&jp - &jm) * (-half);
        let x3 = Block::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            m.iter().map(|&mj| C64::new(0.0, -mj)),
        ));

        Ok(Self {
            n,
            casimir: 2.0 * s * (s + 1.0),
            m,
            ladder,
            generators: [x1, x2, x3],
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// The generators `X_1, X_2, X_3`.
    pub fn generators(&self) -> &[Block; 3] {
        &self.generators
    }

    /// `Δ_N W` through the diagonal stencil.
    pub fn apply(&self, w: &Block) -> Block {
        let n = self.n;
        assert_eq!(w.nrows(), n, "Δ_N applied to a block of the wrong size");
        let a = &self.ladder;
        Block::from_fn(n, n, |j, k| {
            let mut out = w[(j, k)] * -(self.casimir - 2.0 * self.m[j] * self.m[k]);
            if j + 1 < n && k + 1 < n {
                out += w[(j + 1, k + 1)] * (a[j] * a[k]);
            }
            if j > 0 && k > 0 {
                out += w[(j - 1, k - 1)] * (a[j - 1] * a[k - 1]);
            }
            out
        })
    }

    /// `Σ_a [X_a, [X_a, W]]` with dense generators; `O(N³)` reference path.
    pub fn apply_double_commutator(&self, w: &Block) -> Block {
        self.generators
            .iter()
            .map(|x| block_commutator(x, &block_commutator(x, w)))
            .fold(Block::zeros(self.n, self.n), |acc, t| acc + t)
    }

    /// Coefficients of the tridiagonal restriction to diagonal offset `d`.
    fn diagonal_system(&self, d: usize, shift: f64) -> (Vec<f64>, Vec<f64>) {
        let len = self.n - d;
        let diag = (0..len)
            .map(|t| -(self.casimir - 2.0 * self.m[t] * self.m[t + d]) - shift)
            .collect();
        let off = (0..len.saturating_sub(1))
            .map(|t| self.ladder[t] * self.ladder[t + d])
            .collect();
        (diag, off)
    }

    /// Prefactored solver for `(Δ_N − shift) P = W` on traceless input.
    pub fn shifted_solver(&self, shift: f64) -> Result<ShiftedLaplacianSolver> {
        if !(shift >= 0.0) {
            return Err(Error::InvalidArgument(format!("shift must be ≥ 0, got {shift}")));
        }
        let singular = shift == 0.0;
        let diagonals = (0..self.n)
            .map(|d| {
                let (mut diag, mut off) = self.diagonal_system(d, shift);
                if d == 0 && singular {
                    // The constant vector spans the kernel on the main diagonal;
                    // the leading principal block is definite.
                    diag.pop();
                    off.pop();
                }
                Tridiagonal::factor(&diag, &off)
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("singular shifted Laplacian".into()))?;
        Ok(ShiftedLaplacianSolver { n: self.n, singular, diagonals })
    }
}

/// `LDLᵀ` factors of a symmetric tridiagonal matrix.
#[derive(Clone, Debug)]
struct Tridiagonal {
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Tridiagonal {
    fn factor(diag: &[f64], off: &[f64]) -> Option<Self> {
        let len = diag.len();
        let mut d = Vec::with_capacity(len);
        let mut l = Vec::with_capacity(len.saturating_sub(1));
        for t in 0..len {
            let dt = if t == 0 { diag[0] } else { diag[t] - l[t - 1] * off[t - 1] };
            if dt == 0.0 || !dt.is_finite() {
                return None;
            }
            d.push(dt);
            if t + 1 < len {
                l.push(off[t] / dt);
            }
        }
        Some(Self { l, d })
    }

    fn solve_in_place(&self, x: &mut [C64]) {
        let len = self.d.len();
        for t in 1..len {
            let prev = x[t - 1];
            x[t] -= prev * self.l[t - 1];
        }
        for t in 0..len {
            x[t] /= self.d[t];
        }
        for t in (0..len.saturating_sub(1)).rev() {
            let next = x[t + 1];
            x[t] -= next * self.l[t];
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShiftedLaplacianSolver {
    n: usize,
    singular: bool,
    diagonals: Vec<Tridiagonal>,
}

impl ShiftedLaplacianSolver {
    /// Solves along every diagonal. With zero shift the main-diagonal right-hand
    /// side must sum to zero (traceless input) and the traceless solution is
    /// returned.
    pub fn solve(&self, w: &Block) -> Block {
        let n = self.n;
        assert_eq!(w.nrows(), n, "Laplacian solve on a block of the wrong size");
        let mut out = Block::zeros(n, n);
        let mut buf = Vec::with_capacity(n);

        // main diagonal
        buf.clear();
        buf.extend((0..n).map(|t| w[(t, t)]));
        if self.singular {
            let (head, _) = buf.split_at_mut(n - 1);
            self.diagonals[0].solve_in_place(head);
            buf[n - 1] = C64::new(0.0, 0.0);
            let mean = buf.iter().sum::<C64>() / n as f64;
            for v in buf.iter_mut() {
                *v -= mean;
            }
        } else {
            self.diagonals[0].solve_in_place(&mut buf);
        }
        for (t, v) in buf.iter().enumerate() {
            out[(t, t)] = *v;
        }

        for d in 1..n {
            let len = n - d;
            // upper diagonal (t, t+d)
            buf.clear();
            buf.extend((0..len).map(|t| w[(t, t + d)]));
            self.diagonals[d].solve_in_place(&mut buf);
            for (t, v) in buf.iter().enumerate() {
                out[(t, t + d)] = *v;
            }
            // lower diagonal (t+d, t)
            buf.clear();
            buf.extend((0..len).map(|t| w[(t + d, t)]));
            self.diagonals[d].solve_in_place(&mut buf);
            for (t, v) in buf.iter().enumerate() {
                out[(t + d, t)] = *v;
            }
        }
        out
    }
}
