//! Reference solver in coordinates.
//!
//! Elements are expanded in a real orthonormal basis (generalized Gell-Mann
//! matrices times `i`, per block) and the cubic equation is solved by plain
//! Newton with a dense Jacobian. Slow and only meant for small dimensions, but
//! independent of the iterative schemes.
//!
//! For blocks of size `n ≥ 3` the solution basis also carries the direction
//! `iI/√n`: `Tr((I − hP)X(I + hP)) = Tr X − h²Tr(P²X)`, so a traceless `Y`
//! generally needs a solution `X` with a small trace component.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::algebra::{AlgebraElement, Block, BlockShape, C64};
use crate::error::{Error, Result};
use crate::operators::LinearOperator;
use crate::solvers::jacobian_apply;

/// Largest coordinate dimension accepted by [`oracle_solve`].
pub const SOLVE_DIM_LIMIT: usize = 200;
/// Largest coordinate dimension accepted by [`assemble_operator_matrix`].
pub const ASSEMBLE_DIM_LIMIT: usize = 4000;
pub const MAX_NEWTON_STEPS: usize = 50;
/// Relative tolerance of the finite-difference Jacobian check.
pub const JACOBIAN_CHECK_TOL: f64 = 1e-7;
const FD_STEP: f64 = 1e-5;

/// A basis element stored by its few nonzero entries.
#[derive(Clone, Debug)]
struct SparseBasis {
    block: usize,
    entries: Vec<(usize, usize, C64)>,
}

/// Real coordinates for elements of a block algebra.
#[derive(Clone, Debug)]
pub struct VectorizedProblem {
    shape: BlockShape,
    basis: Vec<SparseBasis>,
}

impl VectorizedProblem {
    /// Orthonormal basis of the traceless skew-Hermitian elements,
    /// dimension `Σ (n_i² − 1)`.
    pub fn traceless(shape: &BlockShape) -> Self {
        Self::build(shape, |_| false)
    }

    /// Basis in which the cubic equation closes: the traceless basis plus
    /// `iI/√n` for every block with `n ≥ 3`.
    pub fn solution_space(shape: &BlockShape) -> Self {
        Self::build(shape, |n| n >= 3)
    }

    fn build(shape: &BlockShape, with_identity: impl Fn(usize) -> bool) -> Self {
        let mut basis = Vec::new();
        for (b, &n) in shape.sizes().iter().enumerate() {
            let r2 = std::f64::consts::FRAC_1_SQRT_2;
            for j in 0..n {
                for k in j + 1..n {
                    basis.push(SparseBasis {
                        block: b,
                        entries: vec![(j, k, C64::new(0.0, r2)), (k, j, C64::new(0.0, r2))],
                    });
                    basis.push(SparseBasis {
                        block: b,
                        entries: vec![(j, k, C64::new(r2, 0.0)), (k, j, C64::new(-r2, 0.0))],
                    });
                }
            }
            for l in 1..n {
                let s = 1.0 / ((l * (l + 1)) as f64).sqrt();
                let mut entries: Vec<_> = (0..l).map(|m| (m, m, C64::new(0.0, s))).collect();
                entries.push((l, l, C64::new(0.0, -(l as f64) * s)));
                basis.push(SparseBasis { block: b, entries });
            }
            if with_identity(n) {
                let s = 1.0 / (n as f64).sqrt();
                basis.push(SparseBasis {
                    block: b,
                    entries: (0..n).map(|m| (m, m, C64::new(0.0, s))).collect(),
                });
            }
        }
        Self { shape: shape.clone(), basis }
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn element(&self, i: usize) -> AlgebraElement {
        let mut e = vec![0.0; self.dim()];
        e[i] = 1.0;
        self.from_coords(&DVector::from_vec(e))
    }

    /// `c_i = Re Tr(B_i* A)`.
    pub fn to_coords(&self, a: &AlgebraElement) -> Result<DVector<f64>> {
        if a.shape() != &self.shape {
            return Err(Error::ShapeMismatch { left: a.shape().clone(), right: self.shape.clone() });
        }
        Ok(DVector::from_iterator(
            self.dim(),
            self.basis.iter().map(|be| {
                let blk = a.block(be.block);
                be.entries.iter().map(|&(r, c, v)| (v.conj() * blk[(r, c)]).re).sum::<f64>()
            }),
        ))
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> AlgebraElement {
        assert_eq!(c.len(), self.dim(), "coordinate vector of the wrong length");
        let mut blocks: Vec<Block> = self.shape.sizes().iter().map(|&n| Block::zeros(n, n)).collect();
        for (be, &ci) in self.basis.iter().zip(c.iter()) {
            for &(r, col, v) in &be.entries {
                blocks[be.block][(r, col)] += v * ci;
            }
        }
        AlgebraElement::from_blocks(blocks).expect("shape is valid")
    }

    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.to_coords(&self.element(j)).expect("own shape");
            g.set_column(j, &col);
        }
        g
    }
}

/// `(I − hP)X(I + hP) − Y` written out directly, `P = LX`.
fn direct_residual(
    x: &AlgebraElement,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<AlgebraElement> {
    let p = op.apply(x)?;
    let blocks = p
        .blocks()
        .iter()
        .zip(x.blocks())
        .zip(y.blocks())
        .map(|((p, x), y)| {
            let id = Block::identity(p.nrows(), p.ncols());
            let hp = p * C64::new(h, 0.0);
            (&id - &hp) * x * (&id + &hp) - y
        })
        .collect();
    AlgebraElement::from_blocks(blocks)
}

/// Dense Jacobian in coordinates, one `jacobian_apply` per basis element.
fn dense_jacobian(
    vp: &VectorizedProblem,
    x: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<DMatrix<f64>> {
    let d = vp.dim();
    let mut j = DMatrix::zeros(d, d);
    for c in 0..d {
        let col = vp.to_coords(&jacobian_apply(x, &vp.element(c), op, h)?)?;
        j.set_column(c, &col);
    }
    Ok(j)
}

/// Central finite differences of the residual map in coordinates.
fn fd_jacobian(
    vp: &VectorizedProblem,
    x: &DVector<f64>,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<DMatrix<f64>> {
    let d = vp.dim();
    let mut j = DMatrix::zeros(d, d);
    for c in 0..d {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[c] += FD_STEP;
        xm[c] -= FD_STEP;
        let fp = vp.to_coords(&direct_residual(&vp.from_coords(&xp), y, op, h)?)?;
        let fm = vp.to_coords(&direct_residual(&vp.from_coords(&xm), y, op, h)?)?;
        j.set_column(c, &((fp - fm) / (2.0 * FD_STEP)));
    }
    Ok(j)
}

/// Relative Frobenius gap between the assembled and finite-difference
/// Jacobians at `x`.
pub fn jacobian_check(
    x: &AlgebraElement,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<f64> {
    let vp = VectorizedProblem::solution_space(x.shape());
    let exact = dense_jacobian(&vp, x, op, h)?;
    let fd = fd_jacobian(&vp, &vp.to_coords(x)?, y, op, h)?;
    Ok((&exact - &fd).norm() / exact.norm())
}

/// Exact Newton on the coordinate form of `(I − hLX)X(I + hLX) = Y`,
/// starting from `X = Y`, until the residual drops below `tol`.
pub fn oracle_solve(
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
    tol: f64,
) -> Result<AlgebraElement> {
    if op.shape() != y.shape() {
        return Err(Error::ShapeMismatch { left: y.shape().clone(), right: op.shape().clone() });
    }
    let vp = VectorizedProblem::solution_space(y.shape());
    if vp.dim() > SOLVE_DIM_LIMIT {
        return Err(Error::DimensionTooLarge { dim: vp.dim(), max: SOLVE_DIM_LIMIT });
    }
    let mut x = y.clone();
    let mut r = direct_residual(&x, y, op, h)?;
    if r.norm() <= tol {
        return Ok(x);
    }
    let mut xc = vp.to_coords(&x)?;
    for step in 0..MAX_NEWTON_STEPS {
        let jac = dense_jacobian(&vp, &x, op, h)?;
        if step == 0 {
            let fd = fd_jacobian(&vp, &xc, y, op, h)?;
            let rel_error = (&jac - &fd).norm() / jac.norm();
            if !(rel_error <= JACOBIAN_CHECK_TOL) {
                return Err(Error::OracleJacobianMismatch { rel_error });
            }
        }
        let rc = vp.to_coords(&r)?;
        let delta = jac.lu().solve(&rc).ok_or(Error::OracleNoConvergence {
            iterations: step,
            residual: r.norm(),
        })?;
        xc -= delta;
        x = vp.from_coords(&xc);
        r = direct_residual(&x, y, op, h)?;
        if r.norm() <= tol {
            return Ok(x);
        }
    }
    Err(Error::OracleNoConvergence { iterations: MAX_NEWTON_STEPS, residual: r.norm() })
}

/// Matrix of `L` in the traceless basis; symmetric when `L` is self-adjoint.
pub fn assemble_operator_matrix(op: &dyn LinearOperator) -> Result<DMatrix<f64>> {
    let vp = VectorizedProblem::traceless(op.shape());
    let d = vp.dim();
    if d > ASSEMBLE_DIM_LIMIT {
        return Err(Error::DimensionTooLarge { dim: d, max: ASSEMBLE_DIM_LIMIT });
    }
    let mut m = DMatrix::zeros(d, d);
    for c in 0..d {
        let col = vp.to_coords(&op.apply(&vp.element(c))?)?;
        m.set_column(c, &col);
    }
    Ok(m)
}

/// Sorted eigenvalues of the symmetric part of an assembled operator.
pub fn operator_spectrum(op: &dyn LinearOperator) -> Result<Vec<f64>> {
    let m = assemble_operator_matrix(op)?;
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `max |λ|` of the assembled operator.
pub fn exact_operator_norm(op: &dyn LinearOperator) -> Result<f64> {
    Ok(operator_spectrum(op)?.iter().fold(0.0, |m, v| m.max(v.abs())))
}
