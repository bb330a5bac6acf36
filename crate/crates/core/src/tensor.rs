//! Complex 3×3 tensors for Green-tensor and polarizability values.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{DispersiaError, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A complex 3×3 tensor with components indexed `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexTensor3 {
    pub m: [[Complex64; 3]; 3],
}

impl Default for ComplexTensor3 {
    fn default() -> Self {
        Self::zero()
    }
}

impl ComplexTensor3 {
    pub fn zero() -> Self {
        Self {
            m: [[Complex64::new(0.0, 0.0); 3]; 3],
        }
    }

    pub fn identity() -> Self {
        Self::from_real_diagonal([1.0, 1.0, 1.0])
    }

    pub fn from_real(m: [[f64; 3]; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = Complex64::new(m[i][j], 0.0);
            }
        }
        t
    }

    pub fn from_real_diagonal(d: [f64; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.m[i][i] = Complex64::new(d[i], 0.0);
        }
        t
    }

    pub fn from_diagonal(d: [Complex64; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            t.m[i][i] = d[i];
        }
        t
    }

    /// Outer product `a bᵀ` of two real vectors.
    pub fn dyad(a: [f64; 3], b: [f64; 3]) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = Complex64::new(a[i] * b[j], 0.0);
            }
        }
        t
    }

    pub fn diagonal(&self) -> [Complex64; 3] {
        [self.m[0][0], self.m[1][1], self.m[2][2]]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut t = *self;
        for row in t.m.iter_mut() {
            for c in row.iter_mut() {
                *c = f(*c);
            }
        }
        t
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    /// Conjugate transpose `T†`.
    pub fn adjoint(&self) -> Self {
        self.transpose().conj()
    }

    /// Component-wise real part.
    pub fn re(&self) -> Self {
        self.map(|c| Complex64::new(c.re, 0.0))
    }

    /// Component-wise imaginary part, returned as a real-valued tensor.
    pub fn im(&self) -> Self {
        self.map(|c| Complex64::new(c.im, 0.0))
    }

    pub fn symmetric_part(&self) -> Self {
        (*self + self.transpose()).scale(0.5)
    }

    pub fn antisymmetric_part(&self) -> Self {
        (*self - self.transpose()).scale(0.5)
    }

    /// `(T − T†)/(2i)`, Hermitian for any `T`.
    pub fn im_construction(&self) -> Self {
        let d = *self - self.adjoint();
        d.scale_complex(Complex64::new(0.0, -0.5))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c * s)
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        self.map(|c| c * s)
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// `Tr[A·B]` without forming the product.
    pub fn trace_product(a: &Self, b: &Self) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                s += a.m[i][j] * b.m[j][i];
            }
        }
        s
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut t = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..3 {
                    s += self.m[i][k] * other.m[k][j];
                }
                t.m[i][j] = s;
            }
        }
        t
    }

    pub fn determinant(&self) -> Complex64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse via the adjugate; fails for a (numerically) singular tensor.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.determinant();
        let scale = self.max_abs().powi(3);
        if det.norm() <= 1e-300 || (scale > 0.0 && det.norm() <= 1e-14 * scale) {
            return Err(DispersiaError::Singularity(format!(
                "tensor is singular (det = {det})"
            )));
        }
        let m = &self.m;
        let mut adj = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c0, c1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let minor = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                adj.m[i][j] = minor * sign;
            }
        }
        Ok(adj.scale_complex(det.inv()))
    }

    /// Largest component modulus.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `i` times the tensor.
    pub fn times_i(&self) -> Self {
        self.scale_complex(I)
    }
}

impl Index<(usize, usize)> for ComplexTensor3 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.m[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexTensor3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.m[i][j]
    }
}

impl Add for ComplexTensor3 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexTensor3 {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += rhs.m[i][j];
            }
        }
    }
}

impl Sub for ComplexTensor3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ComplexTensor3 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<f64> for ComplexTensor3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<Complex64> for ComplexTensor3 {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self.scale_complex(rhs)
    }
}
