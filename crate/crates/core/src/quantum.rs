//! Dense complex matrices at spin-1/2 scale.
//!
//! Basis convention for two spins: `{|++>, |+->, |-+>, |-->}` with `|±>` the
//! eigenvectors of sigma_z, so [`tensor`] is a plain Kronecker product with
//! the left factor selecting the block.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::probspace::BellReport;

/// Input validation tolerance (hermiticity, trace, realness of averages).
pub const CONSTRUCTION_TOL: f64 = 1e-10;
/// Tolerance for verified identities.
pub const ASSERT_TOL: f64 = 1e-12;
/// Jacobi sweeps stop once the off-diagonal norm falls below this.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() || rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = ONE;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.entries[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.entries[i * n + j] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.cols + col]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.entries[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    m.entries[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(m)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.entries.len(),
                found: other.entries.len(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.try_sub(&other.matmul(self)?)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] to get an error.
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix shapes do not match")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix shapes do not match")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix shapes do not match")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Z,
}

pub fn pauli(which: Pauli) -> ComplexMatrix {
    let e = match which {
        Pauli::X => [0.0, 1.0, 1.0, 0.0],
        Pauli::Z => [1.0, 0.0, 0.0, -1.0],
    };
    ComplexMatrix::from_real(2, 2, &e).expect("2x2")
}

/// Kronecker product; entry `a_ij` scales the block `b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut m = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let s = a.get(ai, aj);
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    m.entries[(ai * b.rows + bi) * cols + aj * b.cols + bj] = s * b.get(bi, bj);
                }
            }
        }
    }
    m
}

/// The spin observable `cos(theta) sigma_z + sin(theta) sigma_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinObservable {
    theta: f64,
    matrix: ComplexMatrix,
}

impl SpinObservable {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Spectral projectors `(I + sigma)/2` and `(I - sigma)/2` for the
    /// eigenvalues +1 and -1.
    pub fn projectors(&self) -> (ComplexMatrix, ComplexMatrix) {
        let id = ComplexMatrix::identity(2);
        let half = Complex64::new(0.5, 0.0);
        (
            (&id + &self.matrix).scale(half),
            (&id - &self.matrix).scale(half),
        )
    }

    /// `sigma(theta) (x) I`, the observable acting on the first spin.
    pub fn on_first(&self) -> ComplexMatrix {
        tensor(&self.matrix, &ComplexMatrix::identity(2))
    }

    /// `I (x) sigma(theta)`, the observable acting on the second spin.
    pub fn on_second(&self) -> ComplexMatrix {
        tensor(&ComplexMatrix::identity(2), &self.matrix)
    }
}

/// Builds the spin observable at angle `theta`, reduced into `[0, 2pi)`.
pub fn sigma_theta(theta: f64) -> SpinObservable {
    let theta = theta.rem_euclid(TAU);
    let (s, c) = theta.sin_cos();
    let matrix = ComplexMatrix::from_real(2, 2, &[c, s, s, -c]).expect("2x2");
    SpinObservable { theta, matrix }
}

/// A validated density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > CONSTRUCTION_TOL || tr.im.abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}")));
        }
        let min_eig = spectrum(&matrix)?[0];
        if min_eig < -CONSTRUCTION_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self { matrix })
    }

    /// `|v><v|` for a unit vector `v`.
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::outer(v))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale(Complex64::new(1.0 / n as f64, 0.0)),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }
}

/// Singlet amplitudes `(0, 1/sqrt2, -1/sqrt2, 0)` in the `{++, +-, -+, --}` basis.
pub fn singlet_vector() -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), ZERO]
}

pub fn singlet_density() -> DensityOperator {
    DensityOperator {
        matrix: ComplexMatrix::outer(&singlet_vector()),
    }
}

/// `Re Tr(rho A)`; errors if the imaginary part exceeds `1e-10`.
pub fn trace_average(rho: &DensityOperator, a: &ComplexMatrix) -> Result<f64> {
    let n = rho.dim();
    if a.rows != n || a.cols != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.rows,
        });
    }
    let mut tr = ZERO;
    for i in 0..n {
        for j in 0..n {
            tr += rho.matrix.get(i, j) * a.get(j, i);
        }
    }
    if tr.im.abs() > CONSTRUCTION_TOL {
        return Err(Error::NonRealAverage { imag: tr.im });
    }
    Ok(tr.re)
}

/// Singlet correlation of `sigma(theta1) (x) I` with `I (x) sigma(theta2)`,
/// computed by explicit 4x4 trace algebra.
pub fn singlet_correlation(theta1: f64, theta2: f64) -> f64 {
    let product = &sigma_theta(theta1).on_first() * &sigma_theta(theta2).on_second();
    trace_average(&singlet_density(), &product).expect("Hermitian product of commuting observables")
}

/// Outcome probabilities `[P(++), P(+-), P(-+), P(--)]` for measuring
/// `sigma(theta)` on the first spin and `sigma(theta_prime)` on the second,
/// from projector traces against the singlet.
pub fn singlet_joint_law(theta: f64, theta_prime: f64) -> [f64; 4] {
    let (p1, m1) = sigma_theta(theta).projectors();
    let (p2, m2) = sigma_theta(theta_prime).projectors();
    let rho = singlet_density();
    let prob = |a: &ComplexMatrix, b: &ComplexMatrix| {
        trace_average(&rho, &tensor(a, b)).expect("projectors are Hermitian")
    };
    [
        prob(&p1, &p2),
        prob(&p1, &m2),
        prob(&m1, &p2),
        prob(&m1, &m2),
    ]
}

/// Ascending real eigenvalues of a Hermitian matrix.
pub fn spectrum(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let deviation = a.hermitian_deviation();
    if deviation > CONSTRUCTION_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.rows;
    let mut eig = match n {
        1 => vec![a.get(0, 0).re],
        2 => {
            let p = a.get(0, 0).re;
            let q = a.get(1, 1).re;
            let off = a.get(0, 1).norm();
            let mean = 0.5 * (p + q);
            let radius = (0.25 * (p - q) * (p - q) + off * off).sqrt();
            vec![mean - radius, mean + radius]
        }
        _ => hermitian_eigenvalues_jacobi(a),
    };
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Embeds `H = X + iY` as the real symmetric `[[X, -Y], [Y, X]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled, and diagonalises it
/// with cyclic Jacobi rotations.
fn hermitian_eigenvalues_jacobi(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows;
    let m = 2 * n;
    let mut s = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            // symmetrise to absorb sub-tolerance asymmetry
            let z = 0.5 * (h.get(i, j) + h.get(j, i).conj());
            s[i * m + j] = z.re;
            s[(i + n) * m + j + n] = z.re;
            s[(i + n) * m + j] = z.im;
            s[i * m + j + n] = -z.im;
        }
    }
    let scale = s.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| s[i * m + j] * s[i * m + j])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq == 0.0 {
                    continue;
                }
                let app = s[p * m + p];
                let aqq = s[q * m + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let akp = s[k * m + p];
                    let akq = s[k * m + q];
                    s[k * m + p] = c * akp - sn * akq;
                    s[k * m + q] = sn * akp + c * akq;
                }
                for k in 0..m {
                    let apk = s[p * m + k];
                    let aqk = s[q * m + k];
                    s[p * m + k] = c * apk - sn * aqk;
                    s[q * m + k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut doubled: Vec<f64> = (0..m).map(|i| s[i * m + i]).collect();
    doubled.sort_by(f64::total_cmp);
    doubled
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect()
}

/// The anti-correlation form of the three-term Bell inequality evaluated on
/// singlet correlations: `|E(t1,t2) - E(t3,t2)| <= 1 + E(t1,t3)`.
pub fn quantum_bell_expression(theta1: f64, theta2: f64, theta3: f64) -> BellReport {
    let delta = singlet_correlation(theta1, theta2) - singlet_correlation(theta3, theta2);
    let rhs = 1.0 + singlet_correlation(theta1, theta3);
    BellReport::from_sides(delta, rhs)
}
