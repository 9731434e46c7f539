//! Row-pivoted LU factorization of `I − hP` with reuse for `I + hP`.
//!
//! For skew-Hermitian `P` we have `(I − hP)* = I + hP`, so the factors
//! `Π(I − hP) = LU` also give `I + hP = U* L* Π` and a single factorization
//! per block serves both solves.

use super::{AlgebraElement, Block, C64};
use crate::error::{Error, Result};

/// Relative skew-Hermitian tolerance under which the adjoint identity is used.
const ADJOINT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LuBlock {
    /// Strictly lower part holds `L` (unit diagonal implied), upper part `U`.
    lu: Block,
    /// Row `i` of `ΠA` is row `perm[i]` of `A`.
    perm: Vec<usize>,
}

impl LuBlock {
    pub fn factor(a: &Block) -> Option<Self> {
        let n = a.nrows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let (piv, mag) = (k..n)
                .map(|r| (r, lu[(r, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag == 0.0 || mag <= f64::EPSILON * scale * n as f64 {
                return None;
            }
            if piv != k {
                lu.swap_rows(piv, k);
                perm.swap(piv, k);
            }
            let pivot = lu[(k, k)];
            for r in k + 1..n {
                let l = lu[(r, k)] / pivot;
                lu[(r, k)] = l;
                if l != C64::new(0.0, 0.0) {
                    for c in k + 1..n {
                        let u = lu[(k, c)];
                        lu[(r, c)] -= l * u;
                    }
                }
            }
        }
        Some(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &Block) -> Block {
        let n = self.dim();
        let mut x = Block::from_fn(n, b.ncols(), |r, c| b[(self.perm[r], c)]);
        for c in 0..x.ncols() {
            // L y = Πb
            for r in 0..n {
                let mut s = x[(r, c)];
                for k in 0..r {
                    s -= self.lu[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = s;
            }
            // U x = y
            for r in (0..n).rev() {
                let mut s = x[(r, c)];
                for k in r + 1..n {
                    s -= self.lu[(r, k)] * x[(k, c)];
                }
                x[(r, c)] = s / self.lu[(r, r)];
            }
        }
        x
    }

    /// Solves `A* X = B` from the factors of `A`.
    pub fn solve_adjoint(&self, b: &Block) -> Block {
        let n = self.dim();
        let mut w = b.clone();
        for c in 0..w.ncols() {
            // U* z = b
            for r in 0..n {
                let mut s = w[(r, c)];
                for k in 0..r {
                    s -= self.lu[(k, r)].conj() * w[(k, c)];
                }
                w[(r, c)] = s / self.lu[(r, r)].conj();
            }
            // L* v = z
            for r in (0..n).rev() {
                let mut s = w[(r, c)];
                for k in r + 1..n {
                    s -= self.lu[(k, r)].conj() * w[(k, c)];
                }
                w[(r, c)] = s;
            }
        }
        let mut x = Block::zeros(n, b.ncols());
        for (i, &p) in self.perm.iter().enumerate() {
            x.set_row(p, &w.row(i));
        }
        x
    }

    /// `Πᵀ L U`.
    pub fn reconstruct(&self) -> Block {
        let n = self.dim();
        let l = Block::from_fn(n, n, |r, c| match r.cmp(&c) {
            std::cmp::Ordering::Greater => self.lu[(r, c)],
            std::cmp::Ordering::Equal => C64::new(1.0, 0.0),
            std::cmp::Ordering::Less => C64::new(0.0, 0.0),
        });
        let u = self.lu.upper_triangle();
        let pa = l * u;
        let mut a = Block::zeros(n, n);
        for (i, &p) in self.perm.iter().enumerate() {
            a.set_row(p, &pa.row(i));
        }
        a
    }
}

/// Per-block factors of `I − hP`, plus factors of `I + hP` when `P` is not
/// skew-Hermitian.
#[derive(Clone, Debug)]
pub struct LuFactors {
    minus: Vec<LuBlock>,
    plus: Option<Vec<LuBlock>>,
}

/// Factors `I − hP_i` for every block.
pub fn lu_factor(p: &AlgebraElement, h: f64) -> Result<LuFactors> {
    let skew = p
        .blocks()
        .iter()
        .all(|b| (b + b.adjoint()).norm() <= ADJOINT_TOL * b.norm());
    let factor_all = |sign: f64| -> Result<Vec<LuBlock>> {
        p.blocks()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let n = b.nrows();
                let a = Block::identity(n, n) - b * C64::new(sign * h, 0.0);
                LuBlock::factor(&a).ok_or(Error::SingularBlock { block: i })
            })
            .collect()
    };
    let minus = factor_all(1.0)?;
    let plus = if skew { None } else { Some(factor_all(-1.0)?) };
    Ok(LuFactors { minus, plus })
}

impl LuFactors {
    /// Whether `I + hP` is handled through `(I − hP)*` rather than its own factors.
    pub fn uses_adjoint_identity(&self) -> bool {
        self.plus.is_none()
    }

    pub fn factorization_count(&self) -> usize {
        self.minus.len() + self.plus.as_ref().map_or(0, Vec::len)
    }

    pub fn blocks(&self) -> &[LuBlock] {
        &self.minus
    }

    /// `(I − hP)⁻¹ B`.
    pub fn solve_minus(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(b)?;
        Ok(b.map_blocks(|i, blk| self.minus[i].solve(blk)))
    }

    /// `(I + hP)⁻¹ B`.
    pub fn solve_plus(&self, b: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(b)?;
        Ok(b.map_blocks(|i, blk| match &self.plus {
            None => self.minus[i].solve_adjoint(blk),
            Some(plus) => plus[i].solve(blk),
        }))
    }

    /// `(I − hP)⁻¹ Y (I + hP)⁻¹`.
    pub fn sandwich(&self, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(y)?;
        Ok(y.map_blocks(|i, blk| {
            let left = self.minus[i].solve(blk);
            // M (I + hP)⁻¹ = [ (I + hP)^{-*} M* ]*
            let t = left.adjoint();
            let right = match &self.plus {
                None => self.minus[i].solve(&t),
                Some(plus) => plus[i].solve_adjoint(&t),
            };
            right.adjoint()
        }))
    }

    /// Reassembles `I − hP` from the stored factors.
    pub fn reconstruct_minus(&self) -> Vec<Block> {
        self.minus.iter().map(LuBlock::reconstruct).collect()
    }

    fn check(&self, b: &AlgebraElement) -> Result<()> {
        let ok = b.blocks().len() == self.minus.len()
            && b.blocks().iter().zip(&self.minus).all(|(x, f)| x.nrows() == f.dim());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "right-hand side of shape {} does not match the factorization",
                b.shape()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{random_normalized, BlockShape};

    fn rel(a: &Block, b: &Block) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn zero_step_gives_identity_factors() {
        let shape = BlockShape::new(vec![3, 2]).unwrap();
        let p = random_normalized(&shape, 1);
        let f = lu_factor(&p, 0.0).unwrap();
        let b = random_normalized(&shape, 2);
        assert_eq!(f.solve_minus(&b).unwrap(), b);
        assert_eq!(f.solve_plus(&b).unwrap(), b);
    }

    #[test]
    fn adjoint_solve_matches_fresh_factorization() {
        let shape = BlockShape::single(5).unwrap();
        let p = random_normalized(&shape, 3).scale(4.0);
        let h = 0.5;
        let f = lu_factor(&p, h).unwrap();
        assert!(f.uses_adjoint_identity());
        assert_eq!(f.factorization_count(), 1);

        let b = random_normalized(&shape, 4);
        let via_adjoint = f.solve_plus(&b).unwrap();
        let plus = Block::identity(5, 5) + p.block(0) * C64::new(h, 0.0);
        let fresh = LuBlock::factor(&plus).unwrap().solve(b.block(0));
        assert!(rel(via_adjoint.block(0), &fresh) < 1e-12);
        let direct = plus.clone().lu().solve(b.block(0)).unwrap();
        assert!(rel(&fresh, &direct) < 1e-12);
    }

    #[test]
    fn solve_residual_and_reconstruction() {
        let shape = BlockShape::single(5).unwrap();
        let p = random_normalized(&shape, 5).scale(3.0);
        let h = 0.5;
        let f = lu_factor(&p, h).unwrap();
        let a = Block::identity(5, 5) - p.block(0) * C64::new(h, 0.0);
        assert!(rel(&f.reconstruct_minus()[0], &a) < 1e-12);
        let b = random_normalized(&shape, 6);
        let x = f.solve_minus(&b).unwrap();
        assert!((&a * x.block(0) - b.block(0)).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn non_skew_input_gets_second_factorization() {
        let shape = BlockShape::single(4).unwrap();
        let p = AlgebraElement::identity(&shape).scale(0.3);
        let f = lu_factor(&p, 1.0).unwrap();
        assert!(!f.uses_adjoint_identity());
        let b = random_normalized(&shape, 7);
        let x = f.solve_plus(&b).unwrap();
        assert!((x.block(0) * C64::new(1.3, 0.0) - b.block(0)).norm() < 1e-14);
    }

    #[test]
    fn singular_block_is_reported() {
        let shape = BlockShape::new(vec![2, 3]).unwrap();
        let p = AlgebraElement::identity(&shape);
        assert!(matches!(lu_factor(&p, 1.0), Err(Error::SingularBlock { block: 0 })));
    }

    #[test]
    fn sandwich_solves_linear_equation() {
        let shape = BlockShape::new(vec![5, 2]).unwrap();
        let p = random_normalized(&shape, 8).scale(2.0);
        let y = random_normalized(&shape, 9);
        let h = 0.4;
        let s = lu_factor(&p, h).unwrap().sandwich(&y).unwrap();
        let back = crate::algebra::triple_product(&p, &s, h).unwrap();
        assert!((&back - &y).norm() <= 1e-12);
    }
}
