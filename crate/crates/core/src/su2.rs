//! 2×2 complex matrix algebra for single-qubit propagators.
//!
//! Everything here is plain value types: `Mat2` holds the four entries of a
//! row-major matrix, `PauliVector` the coefficients of `I, σx, σy, σz`, and
//! `QubitState` the amplitude pair `(a1, a2)`. The canonical matrix-defect
//! norm throughout the crate is the largest absolute entry.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);
const I: Complex = Complex::new(0.0, 1.0);

/// Tolerance on `‖n‖ − 1` accepted by [`pauli_exponential`].
pub const AXIS_NORM_TOLERANCE: f64 = 1e-12;

/// Largest unitarity defect [`probabilities`] will accept.
pub const PROBABILITY_UNITARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m11: Complex,
    pub m12: Complex,
    pub m21: Complex,
    pub m22: Complex,
}

impl Mat2 {
    pub const fn new(m11: Complex, m12: Complex, m21: Complex, m22: Complex) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn diag(d1: Complex, d2: Complex) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma_y() -> Self {
        Self::new(ZERO, Complex::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, Complex::new(-1.0, 0.0))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::new(self.m11.conj(), self.m21.conj(), self.m12.conj(), self.m22.conj())
    }

    pub fn det(&self) -> Complex {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex {
        self.m11 + self.m22
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    /// ‖M‖_max, the largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − B‖_max.
    pub fn max_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_norm()
    }

    /// ‖M†M − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        (self.dagger() * *self - Mat2::identity()).max_norm()
    }

    pub fn apply(&self, state: &QubitState) -> QubitState {
        QubitState {
            a1: self.m11 * state.a1 + self.m12 * state.a2,
            a2: self.m21 * state.a1 + self.m22 * state.a2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Default for Mat2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, b: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * b.m11 + self.m12 * b.m21,
            self.m11 * b.m12 + self.m12 * b.m22,
            self.m21 * b.m11 + self.m22 * b.m21,
            self.m21 * b.m12 + self.m22 * b.m22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, b: Mat2) -> Mat2 {
        Mat2::new(self.m11 + b.m11, self.m12 + b.m12, self.m21 + b.m21, self.m22 + b.m22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, b: Mat2) -> Mat2 {
        Mat2::new(self.m11 - b.m11, self.m12 - b.m12, self.m21 - b.m21, self.m22 - b.m22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.m11, self.m12, self.m21, self.m22)
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    *a * *b
}

pub fn dagger(a: &Mat2) -> Mat2 {
    a.dagger()
}

pub fn unitarity_defect(a: &Mat2) -> f64 {
    a.unitarity_defect()
}

/// Coefficients of `c0·I + cx·σx + cy·σy + cz·σz`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PauliVector {
    pub c0: Complex,
    pub cx: Complex,
    pub cy: Complex,
    pub cz: Complex,
}

impl PauliVector {
    pub const fn new(c0: Complex, cx: Complex, cy: Complex, cz: Complex) -> Self {
        Self { c0, cx, cy, cz }
    }

    /// A vector with real coefficients and no identity part.
    pub fn real(cx: f64, cy: f64, cz: f64) -> Self {
        Self::new(ZERO, cx.into(), cy.into(), cz.into())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.c0 + self.cz, self.cx - I * self.cy, self.cx + I * self.cy, self.c0 - self.cz)
    }

    pub fn from_mat(m: &Mat2) -> Self {
        Self {
            c0: (m.m11 + m.m22) * 0.5,
            cx: (m.m12 + m.m21) * 0.5,
            cy: I * (m.m12 - m.m21) * 0.5,
            cz: (m.m11 - m.m22) * 0.5,
        }
    }

    /// Euclidean length of the (σx, σy, σz) part.
    pub fn magnitude(&self) -> f64 {
        (self.cx.norm_sqr() + self.cy.norm_sqr() + self.cz.norm_sqr()).sqrt()
    }

    /// Largest absolute coefficient, identity part included.
    pub fn max_norm(&self) -> f64 {
        [self.c0, self.cx, self.cy, self.cz].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.c0 * s, self.cx * s, self.cy * s, self.cz * s)
    }

    /// Real parts of the (σx, σy, σz) coefficients.
    pub fn real_axis(&self) -> [f64; 3] {
        [self.cx.re, self.cy.re, self.cz.re]
    }
}

impl Add for PauliVector {
    type Output = PauliVector;

    fn add(self, b: PauliVector) -> PauliVector {
        PauliVector::new(self.c0 + b.c0, self.cx + b.cx, self.cy + b.cy, self.cz + b.cz)
    }
}

impl Sub for PauliVector {
    type Output = PauliVector;

    fn sub(self, b: PauliVector) -> PauliVector {
        PauliVector::new(self.c0 - b.c0, self.cx - b.cx, self.cy - b.cy, self.cz - b.cz)
    }
}

/// Amplitudes `(a1, a2)` on the "on"/"off" basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    pub a1: Complex,
    pub a2: Complex,
}

impl QubitState {
    pub const fn new(a1: Complex, a2: Complex) -> Self {
        Self { a1, a2 }
    }

    /// The "on" state `(1, 0)`.
    pub const fn ground() -> Self {
        Self::new(ONE, ZERO)
    }

    /// The "off" state `(0, 1)`.
    pub const fn excited() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn p1(&self) -> f64 {
        self.a1.norm_sqr()
    }

    pub fn p2(&self) -> f64 {
        self.a2.norm_sqr()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self::new(self.a1 / n, self.a2 / n)
    }
}

impl Default for QubitState {
    fn default() -> Self {
        Self::ground()
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `exp(i v·σ)` for a real vector `v`, via `I cos|v| + i (v·σ) sin|v|/|v|`.
pub fn exp_i_pauli(v: [f64; 3]) -> Mat2 {
    let phi = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let c = phi.cos();
    let s = sinc(phi);
    let (x, y, z) = (v[0] * s, v[1] * s, v[2] * s);
    // I c + i (x σx + y σy + z σz)
    Mat2::new(Complex::new(c, z), Complex::new(y, x), Complex::new(-y, x), Complex::new(c, -z))
}

/// `exp(i φ n·σ) = I cos φ + i (n·σ) sin φ` for a unit axis `n`.
pub fn pauli_exponential(phi: f64, n: [f64; 3]) -> Result<Mat2> {
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !phi.is_finite() || !len.is_finite() || (len - 1.0).abs() > AXIS_NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "rotation axis must be a unit vector (|n| = {len}), angle {phi}"
        )));
    }
    let (c, s) = (phi.cos(), phi.sin());
    Ok(Mat2::new(
        Complex::new(c, n[2] * s),
        Complex::new(n[1] * s, n[0] * s),
        Complex::new(-n[1] * s, n[0] * s),
        Complex::new(c, -n[2] * s),
    ))
}

/// Occupation probabilities `(P1, P2)` of `U·initial`.
pub fn probabilities(u: &Mat2, initial: &QubitState) -> Result<(f64, f64)> {
    let defect = u.unitarity_defect();
    if !(defect <= PROBABILITY_UNITARITY_TOLERANCE) {
        return Err(Error::Numerical(format!("propagator is not unitary (defect {defect:e})")));
    }
    let out = u.apply(initial);
    Ok((out.p1(), out.p2()))
}
