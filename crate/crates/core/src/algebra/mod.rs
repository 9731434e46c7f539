//! Block direct-sum matrix algebra.
//!
//! An [`AlgebraElement`] is a list of dense complex square blocks
//! `A = A_1 ⊕ … ⊕ A_B`. The three ambient algebras used by the models are
//! `su(N)` (one block), `su(N) ⊕ su(N)` (two blocks) and `su(2)^N`
//! (`N` blocks of size 2). All arithmetic is blockwise.

mod lu;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use lu::{lu_factor, LuBlock, LuFactors};

pub type C64 = Complex64;
pub type Block = DMatrix<C64>;

/// Relative tolerance used when validating skew-Hermitian and traceless input.
pub const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockShape {
    sizes: Vec<usize>,
}

impl BlockShape {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidShape("at least one block is required".into()));
        }
        if let Some(i) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidShape(format!("block {i} has size 0")));
        }
        Ok(Self { sizes })
    }

    /// Single block `su(n)`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `count` blocks of size `n`.
    pub fn uniform(n: usize, count: usize) -> Result<Self> {
        Self::new(vec![n; count])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    /// Real dimension of the traceless skew-Hermitian part, `Σ (n_i² − 1)`.
    pub fn traceless_dim(&self) -> usize {
        self.sizes.iter().map(|n| n * n - 1).sum()
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    shape: BlockShape,
    blocks: Vec<Block>,
}

impl AlgebraElement {
    pub fn zeros(shape: &BlockShape) -> Self {
        let blocks = shape.sizes().iter().map(|&n| Block::zeros(n, n)).collect();
        Self { shape: shape.clone(), blocks }
    }

    /// The unit of the block algebra, `I ⊕ … ⊕ I`.
    pub fn identity(shape: &BlockShape) -> Self {
        let blocks = shape.sizes().iter().map(|&n| Block::identity(n, n)).collect();
        Self { shape: shape.clone(), blocks }
    }

    pub fn from_blocks(blocks: Vec<Block>) -> Result<Self> {
        let mut sizes = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            if b.nrows() != b.ncols() {
                return Err(Error::InvalidShape(format!(
                    "block {i} is {}x{}, expected square",
                    b.nrows(),
                    b.ncols()
                )));
            }
            sizes.push(b.nrows());
        }
        let shape = BlockShape::new(sizes)?;
        Ok(Self { shape, blocks })
    }

    /// Wraps blocks already known to have `shape`.
    pub(crate) fn from_parts(shape: BlockShape, blocks: Vec<Block>) -> Self {
        debug_assert_eq!(shape.num_blocks(), blocks.len());
        Self { shape, blocks }
    }

    pub fn shape(&self) -> &BlockShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Block {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    /// Applies `f` to every block.
    pub fn map_blocks(&self, mut f: impl FnMut(usize, &Block) -> Block) -> Self {
        let blocks = self.blocks.iter().enumerate().map(|(i, b)| f(i, b)).collect();
        Self { shape: self.shape.clone(), blocks }
    }

    /// Combines matching blocks of two elements of the same shape.
    pub fn zip_blocks(
        &self,
        other: &Self,
        mut f: impl FnMut(&Block, &Block) -> Block,
    ) -> Result<Self> {
        self.check_same_shape(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Self { shape: self.shape.clone(), blocks })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_blocks(|_, b| b * C64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map_blocks(|_, b| b * s)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        let s = C64::new(s, 0.0);
        self.zip_blocks(other, |a, b| a + b * s)
    }

    /// Blockwise matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.zip_blocks(other, |a, b| a * b)
    }

    /// Blockwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.map_blocks(|_, b| b.adjoint())
    }

    pub fn trace(&self) -> Vec<C64> {
        self.blocks.iter().map(|b| b.trace()).collect()
    }

    /// `(A − A*) / 2` blockwise.
    pub fn project_skew(&self) -> Self {
        self.map_blocks(|_, b| (b - b.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Removes `Tr(A_i)/n_i · I` from every block.
    pub fn project_traceless(&self) -> Self {
        self.map_blocks(|_, b| {
            let n = b.nrows();
            let mean = b.trace() / n as f64;
            let mut out = b.clone();
            for k in 0..n {
                out[(k, k)] -= mean;
            }
            out
        })
    }

    /// `‖A + A*‖_F` summed in quadrature over blocks.
    pub fn skew_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b + b.adjoint()).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|Tr(A_i)|` over blocks.
    pub fn trace_defect(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().norm()).fold(0.0, f64::max)
    }

    /// Checks every block is skew-Hermitian to `STRUCTURE_TOL` relative to its norm.
    pub fn check_skew_hermitian(&self) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            let defect = (b + b.adjoint()).norm();
            if defect > STRUCTURE_TOL * b.norm().max(1.0) {
                return Err(Error::NotSkewHermitian { block: i, defect });
            }
        }
        Ok(())
    }

    pub fn check_traceless(&self) -> Result<()> {
        for (i, b) in self.blocks.iter().enumerate() {
            let trace = b.trace().norm();
            if trace > STRUCTURE_TOL * b.norm().max(1.0) {
                return Err(Error::NotTraceless { block: i, trace });
            }
        }
        Ok(())
    }

    /// Real pairing `Re Σ_i Tr(A_i* B_i)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum::<f64>())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

impl Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;

    /// Panics on shape mismatch; use [`AlgebraElement::axpy`] for a checked sum.
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in addition");
        let blocks = self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a + b).collect();
        AlgebraElement { shape: self.shape.clone(), blocks }
    }
}

impl Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;

    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in subtraction");
        let blocks = self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a - b).collect();
        AlgebraElement { shape: self.shape.clone(), blocks }
    }
}

impl AddAssign<&AlgebraElement> for AlgebraElement {
    fn add_assign(&mut self, rhs: &AlgebraElement) {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in addition");
        for (a, b) in self.blocks.iter_mut().zip(&rhs.blocks) {
            *a += b;
        }
    }
}

impl SubAssign<&AlgebraElement> for AlgebraElement {
    fn sub_assign(&mut self, rhs: &AlgebraElement) {
        assert_eq!(self.shape, rhs.shape, "shape mismatch in subtraction");
        for (a, b) in self.blocks.iter_mut().zip(&rhs.blocks) {
            *a -= b;
        }
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;

    fn mul(self, rhs: f64) -> AlgebraElement {
        self.scale(rhs)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        self.map_blocks(|_, b| -b)
    }
}

/// Blockwise `AB − BA`.
pub fn commutator(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.zip_blocks(b, block_commutator)
}

pub(crate) fn block_commutator(a: &Block, b: &Block) -> Block {
    a * b - b * a
}

/// Blockwise `(I − hP) X (I + hP)`.
pub fn triple_product(p: &AlgebraElement, x: &AlgebraElement, h: f64) -> Result<AlgebraElement> {
    p.zip_blocks(x, |p, x| block_triple_product(p, x, h))
}

pub(crate) fn block_triple_product(p: &Block, x: &Block, h: f64) -> Block {
    let n = p.nrows();
    let hp = p * C64::new(h, 0.0);
    let left = Block::identity(n, n) - &hp;
    let right = Block::identity(n, n) + hp;
    left * x * right
}

pub fn frobenius_inner(a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    a.inner(b)
}

pub fn frobenius_norm(a: &AlgebraElement) -> f64 {
    a.norm()
}

/// Eigenvalues of the Hermitian matrices `i·A_i`, ascending, one list per block.
pub fn hermitian_eigenvalues(a: &AlgebraElement) -> Result<Vec<Vec<f64>>> {
    a.check_skew_hermitian()?;
    let i = C64::new(0.0, 1.0);
    Ok(a.blocks
        .iter()
        .map(|b| {
            let h = b * i;
            // Symmetrize to remove rounding-level anti-Hermitian noise.
            let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
            let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev
        })
        .collect())
}

/// Seeded random traceless skew-Hermitian element with unit Frobenius norm.
///
/// Entries of every block are drawn as independent standard normals (real
/// then imaginary part, row-major, block by block) from a ChaCha8 stream, the
/// block is projected by `(A − A*)/2`, made traceless, and the whole element is
/// finally scaled to `‖A‖ = 1`.
pub fn random_normalized(shape: &BlockShape, seed: u64) -> AlgebraElement {
    let raw = random_traceless(shape, seed);
    let norm = raw.norm();
    if norm == 0.0 {
        return raw;
    }
    raw.scale(1.0 / norm)
}

/// Like [`random_normalized`] but scales every block separately to
/// Frobenius norm `block_norm`.
pub fn random_block_normalized(shape: &BlockShape, seed: u64, block_norm: f64) -> AlgebraElement {
    let raw = random_traceless(shape, seed);
    raw.map_blocks(|_, b| {
        let n = b.norm();
        if n == 0.0 {
            b.clone()
        } else {
            b * C64::new(block_norm / n, 0.0)
        }
    })
}

/// Frobenius norm of `Σ s_a E_a` for a unit vector `s`, with `E_a = −(i/2)σ_a`.
pub const UNIT_SPIN_NORM: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Random chain of unit spins in `su(2)^particles`: every block is an
/// independent random direction on the sphere.
pub fn random_unit_spins(particles: usize, seed: u64) -> Result<AlgebraElement> {
    let shape = BlockShape::uniform(2, particles)?;
    Ok(random_block_normalized(&shape, seed, UNIT_SPIN_NORM))
}

fn random_traceless(shape: &BlockShape, seed: u64) -> AlgebraElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = shape
        .sizes()
        .iter()
        .map(|&n| {
            let mut g = Block::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    g[(r, c)] = C64::new(re, im);
                }
            }
            g
        })
        .collect();
    AlgebraElement { shape: shape.clone(), blocks }
        .project_skew()
        .project_traceless()
}

/// Seeded random unitary matrix (QR of a complex Ginibre matrix).
pub fn random_unitary(n: usize, seed: u64) -> Block {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Block::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    g.qr().q()
}
