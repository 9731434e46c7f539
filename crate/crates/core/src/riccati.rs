//! Closed-form solutions of the `su(2)` Riccati equation
//! `h²PXP + h[P,X] + Y − X = 0` for the unknown `P`.
//!
//! The equation is what the "quadratic" splitting of the cubic problem asks to
//! solve at every iteration. In `su(2)` it has two real solutions whenever it
//! has one, which is why that splitting is not a usable solver.
//!
//! Vectors map to matrices through `x ↦ Σ x_a E_a` with `E_a = −(i/2)σ_a`, so
//! that `[E_1, E_2] = E_3`. Under this map `[P, X] ↔ p × x` and
//! `PXP ↔ ¼(|p|²x − 2(p·x)p)`. Splitting `p = αx̂ + p_⊥` gives
//!
//! ```text
//! parallel:       (h²/4)(|p_⊥|² − α²) ξ + y_∥ − ξ = 0
//! perpendicular:  −(h²αξ/2) p_⊥ + hξ p_⊥ × x̂ + y_⊥ = 0
//! ```
//!
//! with `ξ = |x|`. The perpendicular map is `hξ(J − hα/2)` with `J v = v × x̂`
//! and `J² = −1` on the plane, hence always invertible. Eliminating `p_⊥`
//! leaves a quadratic in `w = h²α²/4` with exactly one root `w ≥ 0` when
//! `q ≥ c`, where `c = 1 − y_∥/ξ` and `q = |y_⊥|²/(4ξ²)`. The two branches are
//! `α = ±2√w/h`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::algebra::{AlgebraElement, Block, BlockShape, C64};
use crate::error::{Error, Result};

/// Real coordinates of an `su(2)` element.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Su2Vector(pub [f64; 3]);

impl Su2Vector {
    pub const ZERO: Self = Self([0.0; 3]);

    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self([x1, x2, x3])
    }

    pub fn dot(self, other: Self) -> f64 {
        self.0.iter().zip(other.0).map(|(a, b)| a * b).sum()
    }

    pub fn cross(self, other: Self) -> Self {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Self([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// The 2×2 block `Σ x_a E_a`.
    pub fn to_block(self) -> Block {
        let [x1, x2, x3] = self.0;
        let h = 0.5;
        Block::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, -h * x3),
                C64::new(-h * x2, -h * x1),
                C64::new(h * x2, -h * x1),
                C64::new(0.0, h * x3),
            ],
        )
    }

    /// Inverse of [`Su2Vector::to_block`] on skew-Hermitian traceless blocks
    /// (`x_a = 2 Re Tr(E_a* M)`).
    pub fn from_block(m: &Block) -> Result<Self> {
        if m.shape() != (2, 2) {
            return Err(Error::InvalidArgument(format!(
                "expected a 2×2 block, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let x1 = -(m[(0, 1)].im + m[(1, 0)].im);
        let x2 = m[(1, 0)].re - m[(0, 1)].re;
        let x3 = m[(1, 1)].im - m[(0, 0)].im;
        Ok(Self([x1, x2, x3]))
    }

    pub fn to_element(self) -> AlgebraElement {
        AlgebraElement::from_blocks(vec![self.to_block()]).expect("2×2 block")
    }

    pub fn from_element(a: &AlgebraElement) -> Result<Self> {
        if a.shape().sizes() != [2] {
            return Err(Error::InvalidArgument(format!("expected su(2), got {}", a.shape())));
        }
        Self::from_block(a.block(0))
    }
}

impl Add for Su2Vector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Su2Vector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<Su2Vector> for f64 {
    type Output = Su2Vector;
    fn mul(self, v: Su2Vector) -> Su2Vector {
        Su2Vector(v.0.map(|c| self * c))
    }
}

impl fmt::Display for Su2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.12}, {:.12}, {:.12})", self.0[0], self.0[1], self.0[2])
    }
}

/// One solution `P = p_∥ + p_⊥` of the Riccati equation.
#[derive(Clone, Copy, Debug)]
pub struct RiccatiBranch {
    pub p_parallel: Su2Vector,
    pub p_perp: Su2Vector,
    /// Frobenius norm of the matrix residual.
    pub residual: f64,
}

impl RiccatiBranch {
    pub fn p(&self) -> Su2Vector {
        self.p_parallel + self.p_perp
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RiccatiBranches {
    pub x: Su2Vector,
    pub y: Su2Vector,
    pub h: f64,
    pub plus: RiccatiBranch,
    pub minus: RiccatiBranch,
}

impl RiccatiBranches {
    /// True when both signs give the same `P` (only when `p_∥ = 0`).
    pub fn is_unique(&self) -> bool {
        (self.plus.p() - self.minus.p()).norm() <= 1e-14 * (1.0 + self.plus.p().norm())
    }

    /// `‖h(p'_⊥ − p_⊥)‖`: how far the perpendicular parts of the two
    /// `Z = I − hP` factors are apart.
    pub fn perp_gap(&self) -> f64 {
        self.h * (self.plus.p_perp - self.minus.p_perp).norm()
    }
}

/// `h²PXP + h[P,X] + Y − X`.
pub fn care_residual(
    p: &AlgebraElement,
    x: &AlgebraElement,
    y: &AlgebraElement,
    h: f64,
) -> Result<AlgebraElement> {
    p.check_same_shape(x)?;
    p.check_same_shape(y)?;
    let blocks = p
        .blocks()
        .iter()
        .zip(x.blocks())
        .zip(y.blocks())
        .map(|((p, x), y)| {
            let px = p * x;
            let c = C64::new(h, 0.0);
            &px * p * (c * c) + (&px - x * p) * c + y - x
        })
        .collect();
    AlgebraElement::from_blocks(blocks)
}

/// Both real solutions of the `su(2)` Riccati equation.
pub fn solve_su2_branches(x: Su2Vector, y: Su2Vector, h: f64) -> Result<RiccatiBranches> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h must be positive, got {h}")));
    }
    let xi = x.norm();
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidArgument("x must be a nonzero finite vector".into()));
    }
    let xhat = (1.0 / xi) * x;
    let y_par = y.dot(xhat);
    let y_perp = y - y_par * xhat;
    let c = 1.0 - y_par / xi;
    let q = y_perp.dot(y_perp) / (4.0 * xi * xi);
    if q < c {
        return Err(Error::NoRealSolution(format!(
            "need |y_⊥|²/(4|x|²) ≥ 1 − y_∥/|x|, got {q:.6e} < {c:.6e}"
        )));
    }
    // Stable root of w² + (1 + c)w + (c − q) = 0.
    let b = 1.0 + c;
    let disc = ((1.0 - c).powi(2) + 4.0 * q).sqrt();
    let w = if b > 0.0 { 2.0 * (q - c) / (b + disc) } else { (disc - b) / 2.0 };
    let w = w.max(0.0);

    let branch = |alpha: f64| -> Result<RiccatiBranch> {
        let a = h * alpha / 2.0;
        let p_perp = (1.0 / (h * xi * (1.0 + w))) * (a * y_perp + y_perp.cross(xhat));
        let p_parallel = alpha * xhat;
        let r = care_residual(
            &(p_parallel + p_perp).to_element(),
            &x.to_element(),
            &y.to_element(),
            h,
        )?;
        Ok(RiccatiBranch { p_parallel, p_perp, residual: r.norm() })
    };
    let alpha = 2.0 * w.sqrt() / h;
    Ok(RiccatiBranches { x, y, h, plus: branch(alpha)?, minus: branch(-alpha)? })
}

/// `Y = (I − hP)X(I + hP)` in vector form, used to build admissible inputs.
pub fn congruence(p: Su2Vector, x: Su2Vector, h: f64) -> Su2Vector {
    let pxp = 0.25 * (p.dot(p) * x - 2.0 * p.dot(x) * p);
    x - h * p.cross(x) - h * h * pxp
}

/// Single-block `su(2)` shape.
pub fn su2_shape() -> BlockShape {
    BlockShape::single(2).expect("valid shape")
}
