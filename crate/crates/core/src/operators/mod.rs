//! Linear operators `L` acting on block algebra elements.

mod laplacian;

use crate::algebra::{random_normalized, AlgebraElement, Block, BlockShape, C64};
use crate::error::{Error, Result};

pub use laplacian::{QuantizedLaplacian, ShiftedLaplacianSolver};

pub trait LinearOperator: Send + Sync {
    fn shape(&self) -> &BlockShape;

    fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement>;

    fn label(&self) -> String;

    fn check_input(&self, x: &AlgebraElement) -> Result<()> {
        if x.shape() != self.shape() {
            return Err(Error::ShapeMismatch {
                left: self.shape().clone(),
                right: x.shape().clone(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct IdentityOperator {
    shape: BlockShape,
}

impl IdentityOperator {
    pub fn new(shape: BlockShape) -> Self {
        Self { shape }
    }
}

impl LinearOperator for IdentityOperator {
    fn shape(&self) -> &BlockShape {
        &self.shape
    }

    fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_input(x)?;
        Ok(x.clone())
    }

    fn label(&self) -> String {
        "identity".into()
    }
}

/// `factor · L`.
#[derive(Clone, Debug)]
pub struct ScaledOperator<L> {
    inner: L,
    factor: f64,
}

impl<L: LinearOperator> ScaledOperator<L> {
    pub fn new(inner: L, factor: f64) -> Self {
        Self { inner, factor }
    }
}

impl<L: LinearOperator> LinearOperator for ScaledOperator<L> {
    fn shape(&self) -> &BlockShape {
        self.inner.shape()
    }

    fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        Ok(self.inner.apply(x)?.scale(self.factor))
    }

    fn label(&self) -> String {
        format!("{}*{}", self.factor, self.inner.label())
    }
}

/// `L W = Δ_N⁻¹ W` on `su(N)`: the stream function of the quantized vorticity.
///
/// Through [`LinearOperator::apply`] the identity component of the input is
/// discarded first, so `L` is the self-adjoint pseudo-inverse on `u(N)`.
#[derive(Clone, Debug)]
pub struct EulerSphereOperator {
    shape: BlockShape,
    laplacian: QuantizedLaplacian,
    inverse: ShiftedLaplacianSolver,
}

impl EulerSphereOperator {
    pub fn new(n: usize) -> Result<Self> {
        let laplacian = QuantizedLaplacian::new(n)?;
        let inverse = laplacian.shifted_solver(0.0)?;
        Ok(Self { shape: BlockShape::single(n)?, laplacian, inverse })
    }

    pub fn size(&self) -> usize {
        self.laplacian.size()
    }

    pub fn laplacian(&self) -> &QuantizedLaplacian {
        &self.laplacian
    }

    /// `Δ_N W`.
    pub fn laplacian_apply(&self, w: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_input(w)?;
        Ok(w.map_blocks(|_, b| self.laplacian.apply(b)))
    }

    /// `P` with `Δ_N P = W`; `W` must be traceless.
    pub fn laplacian_solve(&self, w: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_input(w)?;
        w.check_traceless()?;
        Ok(w.map_blocks(|_, b| self.inverse.solve(b)))
    }
}

impl LinearOperator for EulerSphereOperator {
    fn shape(&self) -> &BlockShape {
        &self.shape
    }

    fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_input(x)?;
        let w = x.project_traceless();
        Ok(w.map_blocks(|_, b| self.inverse.solve(b)))
    }

    fn label(&self) -> String {
        format!("euler(N={})", self.size())
    }
}

/// Drift-Alfvén operator on `su(N) ⊕ su(N)`:
///
/// ```text
/// F_± = Δ_N⁻¹(W_+ + W_−) ± (1/λ) (Δ_N − 1/λ²)⁻¹ (1/λ)(W_+ − W_−)
/// ```
///
/// so that each component evolves as `Ẇ_± = [F_±, W_±]`.
#[derive(Clone, Debug)]
pub struct DriftAlfvenOperator {
    shape: BlockShape,
    lambda: f64,
    laplacian: QuantizedLaplacian,
    inverse: ShiftedLaplacianSolver,
    shifted_inverse: ShiftedLaplacianSolver,
}

impl DriftAlfvenOperator {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("λ must be positive, got {lambda}")));
        }
        let laplacian = QuantizedLaplacian::new(n)?;
        let inverse = laplacian.shifted_solver(0.0)?;
        let shifted_inverse = laplacian.shifted_solver(1.0 / (lambda * lambda))?;
        Ok(Self {
            shape: BlockShape::uniform(n, 2)?,
            lambda,
            laplacian,
            inverse,
            shifted_inverse,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn size(&self) -> usize {
        self.laplacian.size()
    }

    fn pair(&self, w_plus: &Block, w_minus: &Block) -> (Block, Block) {
        let inv_lambda = C64::new(1.0 / self.lambda, 0.0);
        let f = self.inverse.solve(&(w_plus + w_minus));
        let p = self.shifted_inverse.solve(&((w_plus - w_minus) * inv_lambda));
        let p = p * inv_lambda;
        (&f + &p, f - p)
    }

    /// `(F_+, F_−)` for traceless `W_±`.
    pub fn apply_pair(&self, w_plus: &Block, w_minus: &Block) -> Result<(Block, Block)> {
        let n = self.size();
        for w in [w_plus, w_minus] {
            if w.nrows() != n || w.ncols() != n {
                return Err(Error::InvalidArgument(format!(
                    "expected {n}x{n} blocks, got {}x{}",
                    w.nrows(),
                    w.ncols()
                )));
            }
        }
        let x = AlgebraElement::from_blocks(vec![w_plus.clone(), w_minus.clone()])?;
        x.check_traceless()?;
        Ok(self.pair(w_plus, w_minus))
    }
}

impl LinearOperator for DriftAlfvenOperator {
    fn shape(&self) -> &BlockShape {
        &self.shape
    }

    fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_input(x)?;
        let w = x.project_traceless();
        let (fp, fm) = self.pair(w.block(0), w.block(1));
        Ok(AlgebraElement::from_parts(self.shape.clone(), vec![fp, fm]))
    }

    fn label(&self) -> String {
        format!("alfven(N={}, lambda={})", self.size(), self.lambda)
    }
}

/// Nearest-neighbour coupling of a periodic Heisenberg chain on `su(2)^N`:
/// block `i` of `L S` is `(S_{i−1} + S_{i+1}) / Δx²`.
#[derive(Clone, Debug)]
pub struct SpinChainOperator {
    shape: BlockShape,
    dx: f64,
}

impl SpinChainOperator {
    pub fn new(particles: usize) -> Result<Self> {
        Self::with_spacing(particles, 1.0)
    }

    pub fn with_spacing(particles: usize, dx: f64) -> Result<Self> {
        if particles < 3 {
            return Err(Error::InvalidArgument(format!(
                "spin chain needs at least 3 particles, got {particles}"
            )));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidArgument(format!("Δx must be positive, got {dx}")));
        }
        Ok(Self { shape: BlockShape::uniform(2, particles)?, dx })
    }

    pub fn particles(&self) -> usize {
        self.shape.num_blocks()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `(1/Δx²) Σ_i Tr(S_i* S_{i+1})`, periodic.
    pub fn closed_form_hamiltonian(&self, s: &AlgebraElement) -> Result<f64> {
        self.check_input(s)?;
        let n = self.particles();
        let sum: f64 = (0..n)
            .map(|i| (s.block(i).adjoint() * s.block((i + 1) % n)).trace().re)
            .sum();
        Ok(sum / (self.dx * self.dx))
    }
}

impl LinearOperator for SpinChainOperator {
    fn shape(&self) -> &BlockShape {
        &self.shape
    }

    fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_input(x)?;
        let n = self.particles();
        let w = C64::new(1.0 / (self.dx * self.dx), 0.0);
        let blocks = (0..n)
            .map(|i| (x.block((i + n - 1) % n) + x.block((i + 1) % n)) * w)
            .collect();
        Ok(AlgebraElement::from_parts(self.shape.clone(), blocks))
    }

    fn label(&self) -> String {
        format!("chain(N={}, dx={})", self.particles(), self.dx)
    }
}

pub const OPERATOR_NORM_ITERS: usize = 200;
const OPERATOR_NORM_RTOL: f64 = 1e-10;

/// Power-iteration estimate of `‖L‖_op` (Frobenius-induced) for self-adjoint `L`.
///
/// Iterates `v ← Lv / ‖Lv‖` from a seeded random start and returns `‖Lv‖` for
/// the final unit vector, i.e. the square root of the Rayleigh quotient of
/// `L²`. This converges to the spectral radius even when `±ρ` are both
/// eigenvalues. Stops early once the estimate changes by less than `1e-10`
/// relatively. The result is a lower bound that is only as good as the
/// spectral gap allows within `iters` steps; non-convergence is not reported.
pub fn operator_norm(op: &dyn LinearOperator, seed: u64, iters: usize) -> Result<f64> {
    let mut v = random_normalized(op.shape(), seed);
    if v.norm() == 0.0 {
        return Ok(0.0);
    }
    let mut estimate = 0.0;
    for _ in 0..iters.max(1) {
        let lv = op.apply(&v)?;
        let norm = lv.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let converged = (norm - estimate).abs() <= OPERATOR_NORM_RTOL * norm;
        estimate = norm;
        v = lv.scale(1.0 / norm);
        if converged {
            break;
        }
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_normalized;

    fn self_adjoint_defect(op: &dyn LinearOperator, seed: u64) -> f64 {
        let a = random_normalized(op.shape(), seed);
        let b = random_normalized(op.shape(), seed + 1000);
        let lhs = op.apply(&a).unwrap().inner(&b).unwrap();
        let rhs = a.inner(&op.apply(&b).unwrap()).unwrap();
        (lhs - rhs).abs() / (a.norm() * b.norm())
    }

    #[test]
    fn euler_apply_and_solve() {
        let op = EulerSphereOperator::new(9).unwrap();
        let x3 = AlgebraElement::from_blocks(vec![op.laplacian().generators()[2].clone()]).unwrap();
        let lx3 = op.laplacian_apply(&x3).unwrap();
        assert!((&lx3 + &x3.scale(2.0)).norm() < 1e-12);
        let back = op.laplacian_solve(&x3.scale(-2.0)).unwrap();
        assert!((&back - &x3).norm() < 1e-12);
        let zero = AlgebraElement::zeros(op.shape());
        assert_eq!(op.laplacian_apply(&zero).unwrap().norm(), 0.0);

        let w = random_normalized(op.shape(), 5);
        let p = op.laplacian_solve(&w).unwrap();
        let res = (&op.laplacian_apply(&p).unwrap() - &w).norm() / w.norm();
        assert!(res <= 1e-10);
        let rt = op.laplacian_solve(&op.laplacian_apply(&w).unwrap()).unwrap();
        assert!((&rt - &w).norm() <= 1e-10);
    }

    #[test]
    fn euler_solve_rejects_kernel_direction() {
        let op = EulerSphereOperator::new(4).unwrap();
        let id = AlgebraElement::identity(op.shape()).scale_complex(C64::new(0.0, 1.0));
        assert!(matches!(op.laplacian_solve(&id), Err(Error::NotTraceless { .. })));
        // the operator itself annihilates the identity direction
        assert!(op.apply(&id).unwrap().norm() < 1e-14);
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let op = EulerSphereOperator::new(4).unwrap();
        let x = AlgebraElement::zeros(&BlockShape::single(5).unwrap());
        assert!(matches!(op.apply(&x), Err(Error::ShapeMismatch { .. })));
        assert!(SpinChainOperator::new(2).is_err());
        assert!(DriftAlfvenOperator::new(5, 0.0).is_err());
        assert!(DriftAlfvenOperator::new(5, -1.0).is_err());
    }

    #[test]
    fn models_are_self_adjoint() {
        let ops: Vec<Box<dyn LinearOperator>> = vec![
            Box::new(EulerSphereOperator::new(7).unwrap()),
            Box::new(DriftAlfvenOperator::new(5, 5.0).unwrap()),
            Box::new(SpinChainOperator::new(4).unwrap()),
        ];
        for op in &ops {
            for seed in 0..5 {
                assert!(self_adjoint_defect(op.as_ref(), seed) < 1e-10, "{}", op.label());
            }
        }
    }

    #[test]
    fn models_are_linear() {
        let op = DriftAlfvenOperator::new(5, 2.0).unwrap();
        let a = random_normalized(op.shape(), 1);
        let b = random_normalized(op.shape(), 2);
        let combo = a.scale(0.7).axpy(-1.3, &b).unwrap();
        let lhs = op.apply(&combo).unwrap();
        let rhs = op.apply(&a).unwrap().scale(0.7).axpy(-1.3, &op.apply(&b).unwrap()).unwrap();
        assert!((&lhs - &rhs).norm() <= 1e-12 * lhs.norm());
    }

    #[test]
    fn alfven_symmetric_and_antisymmetric_inputs() {
        let n = 5;
        let lambda = 5.0;
        let op = DriftAlfvenOperator::new(n, lambda).unwrap();
        let euler = EulerSphereOperator::new(n).unwrap();
        let w = random_normalized(&BlockShape::single(n).unwrap(), 3);
        let wb = w.block(0);

        let (fp, fm) = op.apply_pair(wb, wb).unwrap();
        let expected = euler.laplacian_solve(&w.scale(2.0)).unwrap();
        assert!((&fp - expected.block(0)).norm() < 1e-12);
        assert!((&fm - expected.block(0)).norm() < 1e-12);

        let (fp, fm) = op.apply_pair(wb, &(-wb)).unwrap();
        let shifted = euler.laplacian().shifted_solver(1.0 / (lambda * lambda)).unwrap();
        let expected = shifted.solve(&(wb * C64::new(2.0 / (lambda * lambda), 0.0)));
        assert!((&fp - &expected).norm() < 1e-12);
        assert!((&fm + &expected).norm() < 1e-12);
    }

    #[test]
    fn alfven_large_lambda_limit() {
        let n = 5;
        let op = DriftAlfvenOperator::new(n, 1e8).unwrap();
        let euler = EulerSphereOperator::new(n).unwrap();
        let x = random_normalized(op.shape(), 8);
        let f = op.apply(&x).unwrap();
        let sum = AlgebraElement::from_blocks(vec![x.block(0) + x.block(1)]).unwrap();
        let expected = euler.laplacian_solve(&sum).unwrap();
        assert!((f.block(0) - expected.block(0)).norm() < 1e-6);
        assert!((f.block(1) - expected.block(0)).norm() < 1e-6);
    }

    #[test]
    fn chain_three_particles() {
        let op = SpinChainOperator::new(3).unwrap();
        let s = random_normalized(op.shape(), 4);
        let l = op.apply(&s).unwrap();
        assert_eq!(l.block(0), &(s.block(2) + s.block(1)));
        assert_eq!(l.block(1), &(s.block(0) + s.block(2)));
        assert_eq!(l.block(2), &(s.block(1) + s.block(0)));

        let single = random_normalized(&BlockShape::single(2).unwrap(), 9);
        let constant =
            AlgebraElement::from_blocks(vec![single.block(0).clone(); 3]).unwrap();
        let op2 = SpinChainOperator::with_spacing(3, 0.5).unwrap();
        let lc = op2.apply(&constant).unwrap();
        assert!((&lc - &constant.scale(8.0)).norm() < 1e-14);
    }

    #[test]
    fn chain_self_adjoint_tight() {
        let op = SpinChainOperator::new(4).unwrap();
        for seed in 0..10 {
            assert!(self_adjoint_defect(&op, seed) < 1e-12);
        }
    }

    #[test]
    fn operator_norms() {
        let id = IdentityOperator::new(BlockShape::single(4).unwrap());
        assert!((operator_norm(&id, 1, OPERATOR_NORM_ITERS).unwrap() - 1.0).abs() < 1e-10);
        let euler = EulerSphereOperator::new(9).unwrap();
        assert!((operator_norm(&euler, 1, OPERATOR_NORM_ITERS).unwrap() - 0.5).abs() < 1e-8);
        for n in [3, 4, 8, 16] {
            let chain = SpinChainOperator::new(n).unwrap();
            let est = operator_norm(&chain, 2, 2000).unwrap();
            assert!((est - 2.0).abs() < 1e-6, "n = {n}: {est}");
        }
        let half = ScaledOperator::new(id, -0.5);
        assert!((operator_norm(&half, 3, 10).unwrap() - 0.5).abs() < 1e-12);
    }
}
