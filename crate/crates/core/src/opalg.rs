//! Dense complex operator algebra.
//!
//! Every Hamiltonian, projector and pulse in the crate is an [`Operator`]: a
//! square `nalgebra` matrix of `Complex64` entries plus a small set of
//! certified tags. Tags are only ever set after the corresponding check has
//! passed, so downstream code may rely on them.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{LeoError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for exact structural identities.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance on `||U^dag U - I||_F`.
pub const UNITARY_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tags {
    pub hermitian: bool,
    pub unitary: bool,
    pub diagonal: bool,
}

/// A finite complex number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexScalar(C64);

impl ComplexScalar {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(LeoError::NonFinite(0, 0));
        }
        Ok(Self(C64::new(re, im)))
    }

    pub fn one() -> Self {
        Self(ONE)
    }

    /// Unit-modulus phase `e^{i phi}`.
    pub fn from_angle(phi: f64) -> Self {
        Self(C64::from_polar(1.0, phi))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    pub fn angle(self) -> f64 {
        self.0.arg()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Frobenius,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn matrix(self) -> Operator {
        pauli_string_from(&[self])
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    mat: CMatrix,
    tags: Tags,
}

impl Operator {
    /// Wraps a square matrix with finite entries. No tags are asserted.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(LeoError::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(LeoError::InvalidArgument("operator dimension must be positive".into()));
        }
        for j in 0..mat.ncols() {
            for i in 0..mat.nrows() {
                let z = mat[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(LeoError::NonFinite(i, j));
                }
            }
        }
        Ok(Self {
            mat,
            tags: Tags::default(),
        })
    }

    pub(crate) fn from_parts(mat: CMatrix, tags: Tags) -> Self {
        debug_assert!(mat.is_square());
        Self { mat, tags }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(
            CMatrix::identity(dim, dim),
            Tags {
                hermitian: true,
                unitary: true,
                diagonal: true,
            },
        )
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_parts(
            CMatrix::zeros(dim, dim),
            Tags {
                hermitian: true,
                unitary: false,
                diagonal: true,
            },
        )
    }

    /// Real diagonal operator.
    pub fn real_diagonal(diag: &[f64]) -> Self {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&d| C64::new(d, 0.0)));
        let unitary = diag.iter().all(|d| (d.abs() - 1.0).abs() == 0.0);
        Self::from_parts(
            CMatrix::from_diagonal(&v),
            Tags {
                hermitian: true,
                unitary,
                diagonal: true,
            },
        )
    }

    /// `|ket><bra|` outer product.
    pub fn outer(ket: &CVector, bra: &CVector) -> Self {
        Self::from_parts(ket * bra.adjoint(), Tags::default())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn tags(&self) -> Tags {
        self.tags
    }

    pub fn is_hermitian(&self) -> bool {
        self.tags.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.tags.unitary
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    /// Largest entrywise deviation `max |M - M^dag|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `||M^dag M - I||_F`.
    pub fn unitary_residual(&self) -> f64 {
        let n = self.dim();
        (self.mat.adjoint() * &self.mat - CMatrix::identity(n, n)).norm()
    }

    /// Certifies the hermitian tag (entrywise tolerance 1e-12).
    pub fn certify_hermitian(mut self) -> Result<Self> {
        let r = self.hermitian_residual();
        if r > STRUCTURAL_TOL {
            return Err(LeoError::NotHermitian(r));
        }
        self.tags.hermitian = true;
        Ok(self)
    }

    /// Certifies the unitary tag (`||M^dag M - I||_F <= 1e-10`).
    pub fn certify_unitary(mut self) -> Result<Self> {
        let r = self.unitary_residual();
        if r > UNITARY_TOL {
            return Err(LeoError::NotUnitary(r));
        }
        self.tags.unitary = true;
        Ok(self)
    }

    pub fn certify_diagonal(mut self) -> Result<Self> {
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                if i != j && self.mat[(i, j)] != ZERO {
                    return Err(LeoError::NotDiagonal);
                }
            }
        }
        self.tags.diagonal = true;
        Ok(self)
    }

    /// Sets whichever tags the matrix actually satisfies.
    pub fn with_detected_tags(self) -> Self {
        let s = match self.clone().certify_hermitian() {
            Ok(h) => h,
            Err(_) => self,
        };
        let s = match s.clone().certify_unitary() {
            Ok(u) => u,
            Err(_) => s,
        };
        match s.clone().certify_diagonal() {
            Ok(d) => d,
            Err(_) => s,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.mat.adjoint(), self.tags)
    }

    pub fn scale(&self, s: f64) -> Self {
        let tags = Tags {
            unitary: self.tags.unitary && s.abs() == 1.0,
            ..self.tags
        };
        Self::from_parts(&self.mat * C64::new(s, 0.0), tags)
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        let tags = Tags {
            hermitian: self.tags.hermitian && s.im == 0.0,
            unitary: self.tags.unitary && s.norm() == 1.0,
            diagonal: self.tags.diagonal,
        };
        Self::from_parts(&self.mat * s, tags)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `U^k` by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = Operator::identity(self.dim());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        if self.tags.unitary {
            result.tags.unitary = true;
        }
        result
    }

    /// Whether `||self - other||_F <= tol`.
    pub fn approx_eq(&self, other: &Operator, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.mat - &other.mat).norm() <= tol
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.mat)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        let tags = Tags {
            hermitian: self.tags.hermitian && rhs.tags.hermitian,
            unitary: false,
            diagonal: self.tags.diagonal && rhs.tags.diagonal,
        };
        Operator::from_parts(&self.mat + &rhs.mat, tags)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        let tags = Tags {
            hermitian: self.tags.hermitian && rhs.tags.hermitian,
            unitary: false,
            diagonal: self.tags.diagonal && rhs.tags.diagonal,
        };
        Operator::from_parts(&self.mat - &rhs.mat, tags)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        let tags = Tags {
            hermitian: false,
            unitary: false,
            diagonal: self.tags.diagonal && rhs.tags.diagonal,
        };
        Operator::from_parts(&self.mat * &rhs.mat, tags)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator::from_parts(-&self.mat, self.tags)
    }
}

/// Kronecker product `a ⊗ b`; the first factor is the most significant index.
pub fn tensor(a: &Operator, b: &Operator) -> Operator {
    let tags = Tags {
        hermitian: a.tags.hermitian && b.tags.hermitian,
        unitary: a.tags.unitary && b.tags.unitary,
        diagonal: a.tags.diagonal && b.tags.diagonal,
    };
    Operator::from_parts(a.mat.kronecker(&b.mat), tags)
}

pub fn tensor_all<'a>(ops: impl IntoIterator<Item = &'a Operator>) -> Option<Operator> {
    let mut it = ops.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, op| tensor(&acc, op)))
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

fn check_dims(a: &Operator, b: &Operator) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(LeoError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `ab - ba`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a, b)?;
    Ok(Operator::from_parts(
        &a.mat * &b.mat - &b.mat * &a.mat,
        Tags::default(),
    ))
}

/// `ab + ba`.
pub fn anticommutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a, b)?;
    let tags = Tags {
        hermitian: a.tags.hermitian && b.tags.hermitian,
        ..Tags::default()
    };
    Ok(Operator::from_parts(
        &a.mat * &b.mat + &b.mat * &a.mat,
        tags,
    ))
}

pub fn op_norm(m: &Operator, kind: NormKind) -> f64 {
    match kind {
        NormKind::Frobenius => m.mat.norm(),
        NormKind::Spectral => singular_values(m).iter().cloned().fold(0.0, f64::max),
    }
}

pub fn singular_values(m: &Operator) -> Vec<f64> {
    m.mat.clone().svd(false, false).singular_values.iter().cloned().collect()
}

/// Eigendecomposition of a hermitian matrix, eigenvalues in ascending order.
///
/// Columns of the returned matrix are the matching orthonormal eigenvectors.
pub fn hermitian_eigen(h: &Operator) -> Result<(Vec<f64>, CMatrix)> {
    if !h.tags.hermitian {
        return Err(LeoError::NotHermitian(h.hermitian_residual()));
    }
    let n = h.dim();
    if h.tags.diagonal {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h.mat[(a, a)].re.total_cmp(&h.mat[(b, b)].re));
        let mut vecs = CMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vecs[(i, col)] = ONE;
        }
        return Ok((order.iter().map(|&i| h.mat[(i, i)].re).collect(), vecs));
    }
    let eig = SymmetricEigen::try_new(h.mat.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or(LeoError::EigenDecomposition)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vecs))
}

pub fn hermitian_eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(h)?.0)
}

/// `exp(i * scale * h)` for hermitian `h`, via eigendecomposition.
pub fn hermitian_exponential(h: &Operator, scale: f64) -> Result<Operator> {
    let (values, vecs) = hermitian_eigen(h)?;
    let phases = CVector::from_iterator(
        values.len(),
        values.iter().map(|&l| C64::from_polar(1.0, scale * l)),
    );
    let mat = if h.tags.diagonal {
        // eigenvectors are a permutation; keep the result exactly diagonal
        let mut m = CMatrix::zeros(h.dim(), h.dim());
        for i in 0..h.dim() {
            m[(i, i)] = C64::from_polar(1.0, scale * h.mat[(i, i)].re);
        }
        m
    } else {
        let mut scaled = vecs.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * vecs.adjoint()
    };
    let mut u = Operator::new(mat).map_err(|_| LeoError::EigenDecomposition)?;
    u.tags.diagonal = h.tags.diagonal;
    u.certify_unitary()
}

/// Seeded random hermitian matrix of unit spectral norm.
///
/// `G` has iid standard complex normal entries (drawn row-major from a
/// ChaCha8 stream); the result is `(G + G^dag)/2` divided by its spectral norm.
pub fn random_hermitian(dim: usize, seed: u64) -> Operator {
    assert!(dim >= 1, "random_hermitian: dim must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    let mut g = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = C64::new(normal.sample(&mut rng), normal.sample(&mut rng));
        }
    }
    let m = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let h = Operator::from_parts(
        m,
        Tags {
            hermitian: true,
            ..Tags::default()
        },
    );
    let values = hermitian_eigenvalues(&h).expect("eigendecomposition of a small random matrix");
    let norm = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    h.scale(1.0 / norm)
}

/// Deterministic sub-seed derivation (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn pauli_string_from(ps: &[Pauli]) -> Operator {
    let n = ps.len();
    let dim = 1usize << n;
    let mut mat = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = col;
        let mut amp = ONE;
        for (q, p) in ps.iter().enumerate() {
            let bit = n - 1 - q;
            let b = (col >> bit) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => row ^= 1 << bit,
                Pauli::Y => {
                    row ^= 1 << bit;
                    // Y|0> = i|1>, Y|1> = -i|0>
                    amp *= if b == 0 { I } else { -I };
                }
                Pauli::Z => {
                    if b == 1 {
                        amp = -amp;
                    }
                }
            }
        }
        mat[(row, col)] = amp;
    }
    let diagonal = ps.iter().all(|p| matches!(p, Pauli::I | Pauli::Z));
    Operator::from_parts(
        mat,
        Tags {
            hermitian: true,
            unitary: true,
            diagonal,
        },
    )
}

/// Pauli string such as `"XZI"`; the leftmost letter acts on qubit 1.
pub fn pauli_string(label: &str) -> Result<Operator> {
    let ps: Option<Vec<Pauli>> = label.chars().map(Pauli::from_char).collect();
    match ps {
        Some(ps) if !ps.is_empty() => Ok(pauli_string_from(&ps)),
        _ => Err(LeoError::InvalidArgument(format!("bad pauli string `{label}`"))),
    }
}

/// Single-qubit Pauli `p` on `qubit` (0-based) of an `n`-qubit register.
pub fn pauli_on(n: usize, qubit: usize, p: Pauli) -> Operator {
    assert!(qubit < n, "qubit index out of range");
    let mut ps = vec![Pauli::I; n];
    ps[qubit] = p;
    pauli_string_from(&ps)
}

/// Every Pauli string on `n` qubits in lexicographic `I < X < Y < Z` order.
pub fn all_pauli_labels(n: usize) -> Vec<String> {
    let letters = ['I', 'X', 'Y', 'Z'];
    (0..4usize.pow(n as u32))
        .map(|mut k| {
            let mut s = vec!['I'; n];
            for q in (0..n).rev() {
                s[q] = letters[k % 4];
                k /= 4;
            }
            s.into_iter().collect()
        })
        .collect()
}

pub fn basis_vector(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = ONE;
    v
}

/// Serialized operator: `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

pub(crate) fn matrix_to_rows(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect();
    let im = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
        .collect();
    (re, im)
}

pub(crate) fn rows_to_matrix(
    re: &[Vec<f64>],
    im: &[Vec<f64>],
    rows: usize,
    cols: usize,
) -> Result<CMatrix> {
    if re.len() != rows || im.len() != rows {
        return Err(LeoError::InvalidArgument(format!(
            "expected {rows} rows in `re` and `im`"
        )));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        if re[i].len() != cols || im[i].len() != cols {
            return Err(LeoError::InvalidArgument(format!(
                "row {i} must have {cols} entries"
            )));
        }
        for j in 0..cols {
            m[(i, j)] = C64::new(re[i][j], im[i][j]);
        }
    }
    Ok(m)
}

impl From<&Operator> for OperatorJson {
    fn from(op: &Operator) -> Self {
        let (re, im) = matrix_to_rows(&op.mat);
        OperatorJson {
            dim: op.dim(),
            re,
            im,
        }
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = LeoError;

    fn try_from(j: OperatorJson) -> Result<Self> {
        let m = rows_to_matrix(&j.re, &j.im, j.dim, j.dim)?;
        Ok(Operator::new(m)?.with_detected_tags())
    }
}

impl Operator {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&OperatorJson::from(self)).expect("operator serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: OperatorJson = serde_json::from_str(s)?;
        Operator::try_from(j)
    }
}
