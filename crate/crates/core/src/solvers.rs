//! Iterative solvers for `(I − hLX) X (I + hLX) = Y`.
//!
//! Three schemes share one driver loop starting from `X_0 = Y` and stopping on
//! `‖X_{k+1} − X_k‖ ≤ tol`:
//!
//! * explicit fixed point `X ← F_h(X) = Y + h[LX, X] + h²(LX)X(LX)`;
//! * linear scheme `X ← (I − hLX)⁻¹ Y (I + hLX)⁻¹`, one LU per block;
//! * inexact Newton `X ← X − D̃F(X)[F(X)]` with a truncated Neumann-type
//!   inverse of the Jacobian.

use std::fmt;

use crate::algebra::{commutator, lu_factor, triple_product, AlgebraElement};
use crate::error::{Error, Result};
use crate::operators::{operator_norm, LinearOperator, OPERATOR_NORM_ITERS};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
/// Step norms above this abort the iteration as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

/// Truncations of `DF(X)⁻¹ = I + hB_1 + h²(B_1² + B_2) + O(h³)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NewtonVariant {
    /// `I + hB_1`
    V1,
    /// `I + hB_1 + h²B_2`
    #[default]
    V2,
    /// `I + hB_1 + h²B_1²`
    V3,
    /// `I + hB_1 + h²(B_1² + B_2)`
    V4,
}

impl NewtonVariant {
    pub const ALL: [NewtonVariant; 4] = [Self::V1, Self::V2, Self::V3, Self::V4];
}

impl std::str::FromStr for NewtonVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "v1" => Ok(Self::V1),
            "2" | "v2" => Ok(Self::V2),
            "3" | "v3" => Ok(Self::V3),
            "4" | "v4" => Ok(Self::V4),
            _ => Err(Error::InvalidArgument(format!("unknown Newton variant '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialGuess {
    #[default]
    Y,
    Custom(AlgebraElement),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub h: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub newton_variant: NewtonVariant,
    pub initial_guess: InitialGuess,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            newton_variant: NewtonVariant::default(),
            initial_guess: InitialGuess::Y,
        }
    }
}

impl SolverConfig {
    pub fn with_h(h: f64) -> Self {
        Self { h, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h >= 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidArgument(format!("h must be finite and ≥ 0, got {}", self.h)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Explicit,
    Linear,
    Newton,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [Self::Explicit, Self::Linear, Self::Newton];

    pub fn name(self) -> &'static str {
        match self {
            Self::Explicit => "explicit",
            Self::Linear => "linear",
            Self::Newton => "newton",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "explicit" => Ok(Self::Explicit),
            "linear" => Ok(Self::Linear),
            "newton" => Ok(Self::Newton),
            _ => Err(Error::InvalidArgument(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub converged: bool,
    pub reason: StopReason,
    pub iterations: usize,
    pub final_step_norm: f64,
    /// `‖F(X)‖ = ‖(I − hLX)X(I + hLX) − Y‖` at exit.
    pub residual_norm: f64,
    /// Step norm `‖X_{k+1} − X_k‖` of every iteration.
    pub history: Vec<f64>,
}

impl SolverReport {
    pub fn summary(&self) -> String {
        format!(
            "{:?} after {} iterations (step {:.3e}, residual {:.3e})",
            self.reason, self.iterations, self.final_step_norm, self.residual_norm
        )
    }
}

/// `F_h(X) = Y + h[LX, X] + h²(LX)X(LX)`.
pub fn fixed_point_map(
    x: &AlgebraElement,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<AlgebraElement> {
    x.check_same_shape(y)?;
    let p = op.apply(x)?;
    fixed_point_with(x, &p, y, h)
}

fn fixed_point_with(
    x: &AlgebraElement,
    p: &AlgebraElement,
    y: &AlgebraElement,
    h: f64,
) -> Result<AlgebraElement> {
    let pxp = p.matmul(x)?.matmul(p)?;
    y.axpy(h, &commutator(p, x)?)?.axpy(h * h, &pxp)
}

/// `F(X) = X − h[LX, X] − h²(LX)X(LX) − Y`.
pub fn residual(
    x: &AlgebraElement,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<AlgebraElement> {
    x.check_same_shape(y)?;
    let p = op.apply(x)?;
    residual_with(x, &p, y, h)
}

fn residual_with(
    x: &AlgebraElement,
    p: &AlgebraElement,
    y: &AlgebraElement,
    h: f64,
) -> Result<AlgebraElement> {
    Ok(&triple_product(p, x, h)? - y)
}

/// `S_h(X) = (I − hLX)⁻¹ Y (I + hLX)⁻¹`.
pub fn linear_update(
    x: &AlgebraElement,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<AlgebraElement> {
    x.check_same_shape(y)?;
    let p = op.apply(x)?;
    lu_factor(&p, h)?.sandwich(y)
}

/// Pieces of the Jacobian at a fixed `X`, with `P = LX` cached.
struct Linearization<'a> {
    op: &'a dyn LinearOperator,
    x: &'a AlgebraElement,
    p: AlgebraElement,
}

impl<'a> Linearization<'a> {
    fn new(op: &'a dyn LinearOperator, x: &'a AlgebraElement) -> Result<Self> {
        Ok(Self { op, x, p: op.apply(x)? })
    }

    /// `B_1 Z = [LZ, X] + [LX, Z]`.
    fn b1(&self, z: &AlgebraElement) -> Result<AlgebraElement> {
        let lz = self.op.apply(z)?;
        Ok(&commutator(&lz, self.x)? + &commutator(&self.p, z)?)
    }

    /// `B_2 Z = (LZ)X(LX) + (LX)Z(LX) + (LX)X(LZ)`.
    fn b2(&self, z: &AlgebraElement) -> Result<AlgebraElement> {
        let lz = self.op.apply(z)?;
        let xp = self.x.matmul(&self.p)?;
        let px = self.p.matmul(self.x)?;
        let mut out = lz.matmul(&xp)?;
        out += &self.p.matmul(z)?.matmul(&self.p)?;
        out += &px.matmul(&lz)?;
        Ok(out)
    }
}

/// `DF(X)[Z] = Z − h B_1 Z − h² B_2 Z`.
pub fn jacobian_apply(
    x: &AlgebraElement,
    z: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
) -> Result<AlgebraElement> {
    x.check_same_shape(z)?;
    let lin = Linearization::new(op, x)?;
    z.axpy(-h, &lin.b1(z)?)?.axpy(-h * h, &lin.b2(z)?)
}

/// Approximate `DF(X)⁻¹[R]` by the truncation selected by `variant`.
pub fn newton_correction(
    x: &AlgebraElement,
    r: &AlgebraElement,
    op: &dyn LinearOperator,
    h: f64,
    variant: NewtonVariant,
) -> Result<AlgebraElement> {
    x.check_same_shape(r)?;
    let lin = Linearization::new(op, x)?;
    correction_with(&lin, r, h, variant)
}

fn correction_with(
    lin: &Linearization<'_>,
    r: &AlgebraElement,
    h: f64,
    variant: NewtonVariant,
) -> Result<AlgebraElement> {
    let b1r = lin.b1(r)?;
    let mut out = r.axpy(h, &b1r)?;
    if matches!(variant, NewtonVariant::V2 | NewtonVariant::V4) {
        out = out.axpy(h * h, &lin.b2(r)?)?;
    }
    if matches!(variant, NewtonVariant::V3 | NewtonVariant::V4) {
        out = out.axpy(h * h, &lin.b1(&b1r)?)?;
    }
    Ok(out)
}

fn iterate(
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    cfg: &SolverConfig,
    mut update: impl FnMut(&AlgebraElement) -> Result<AlgebraElement>,
) -> Result<(AlgebraElement, SolverReport)> {
    cfg.validate()?;
    op.check_input(y)?;
    let mut x = match &cfg.initial_guess {
        InitialGuess::Y => y.clone(),
        InitialGuess::Custom(x0) => {
            x0.check_same_shape(y)?;
            x0.clone()
        }
    };
    let mut history = Vec::new();
    let mut reason = StopReason::MaxIterations;
    for _ in 0..cfg.max_iter {
        let next = update(&x)?;
        let step = (&next - &x).norm();
        history.push(step);
        if !step.is_finite() || step > DIVERGENCE_THRESHOLD {
            reason = StopReason::Diverged;
            // keep the last finite iterate
            if next.is_finite() {
                x = next;
            }
            break;
        }
        x = next;
        if step <= cfg.tol {
            reason = StopReason::Converged;
            break;
        }
    }
    let residual_norm = {
        let r = residual(&x, y, op, cfg.h)?;
        r.norm()
    };
    let converged = reason == StopReason::Converged;
    if converged {
        debug_assert!(
            x.skew_defect() <= 1e-11 * x.norm().max(1.0),
            "solver left the skew-Hermitian algebra"
        );
    }
    let report = SolverReport {
        converged,
        reason,
        iterations: history.len(),
        final_step_norm: history.last().copied().unwrap_or(0.0),
        residual_norm,
        history,
    };
    Ok((x, report))
}

/// Explicit fixed-point iteration `X_{k+1} = F_h(X_k)`.
pub fn solve_explicit(
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    cfg: &SolverConfig,
) -> Result<(AlgebraElement, SolverReport)> {
    let h = cfg.h;
    iterate(y, op, cfg, |x| {
        let p = op.apply(x)?;
        fixed_point_with(x, &p, y, h)
    })
}

/// Linear scheme `X_{k+1} = S_h(X_k)`.
pub fn solve_linear(
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    cfg: &SolverConfig,
) -> Result<(AlgebraElement, SolverReport)> {
    let h = cfg.h;
    iterate(y, op, cfg, |x| {
        let p = op.apply(x)?;
        lu_factor(&p, h)?.sandwich(y)
    })
}

/// Inexact Newton `X_{k+1} = X_k − D̃F(X_k)[F(X_k)]`.
pub fn solve_newton(
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    cfg: &SolverConfig,
) -> Result<(AlgebraElement, SolverReport)> {
    let h = cfg.h;
    let variant = cfg.newton_variant;
    iterate(y, op, cfg, |x| {
        let lin = Linearization::new(op, x)?;
        let f = residual_with(x, &lin.p, y, h)?;
        let corr = correction_with(&lin, &f, h, variant)?;
        Ok(x - &corr)
    })
}

pub fn solve(
    kind: SolverKind,
    y: &AlgebraElement,
    op: &dyn LinearOperator,
    cfg: &SolverConfig,
) -> Result<(AlgebraElement, SolverReport)> {
    match kind {
        SolverKind::Explicit => solve_explicit(y, op, cfg),
        SolverKind::Linear => solve_linear(y, op, cfg),
        SolverKind::Newton => solve_newton(y, op, cfg),
    }
}

/// Step-size bound `1 / (3 ‖L‖_op ‖Y‖)` below which the fixed-point map is a
/// contraction around `Y` in `su(N)`.
pub fn theorem_h_bound(y: &AlgebraElement, op: &dyn LinearOperator) -> Result<f64> {
    let norm = operator_norm(op, 0, OPERATOR_NORM_ITERS)?;
    theorem_h_bound_with_norm(y, norm)
}

pub fn theorem_h_bound_with_norm(y: &AlgebraElement, op_norm: f64) -> Result<f64> {
    let y_norm = y.norm();
    if y_norm == 0.0 {
        return Err(Error::InvalidArgument("the step-size bound is undefined for Y = 0".into()));
    }
    if !(op_norm > 0.0) {
        return Err(Error::InvalidArgument("the step-size bound needs ‖L‖ > 0".into()));
    }
    Ok(1.0 / (3.0 * op_norm * y_norm))
}
