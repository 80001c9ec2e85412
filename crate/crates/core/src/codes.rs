//! Code subspaces and the total-spin sector decomposition of qubit registers.
//!
//! Qubit registers use the convention `|0> = spin up` (`Z = +1`), with qubit 1
//! as the most significant bit of the computational index.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LeoError, Result};
use crate::opalg::{
    basis_vector, matrix_to_rows, pauli_string, rows_to_matrix, CMatrix, CVector, Operator,
    Tags, C64, ONE, STRUCTURAL_TOL,
};

const GS_THRESHOLD: f64 = 1e-8;

/// Orthonormal columns spanning a code subspace of a larger space.
#[derive(Clone, Debug)]
pub struct CodeSubspace {
    label: String,
    basis: CMatrix,
}

impl CodeSubspace {
    /// Builds a code from an isometry; rejects non-orthonormal columns.
    pub fn new(label: impl Into<String>, basis: CMatrix) -> Result<Self> {
        if basis.ncols() == 0 || basis.ncols() > basis.nrows() {
            return Err(LeoError::InvalidArgument(format!(
                "code basis must be ambient x code with 0 < code_dim <= ambient_dim, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let k = basis.ncols();
        let r = (basis.adjoint() * &basis - CMatrix::identity(k, k)).norm();
        if r > STRUCTURAL_TOL {
            return Err(LeoError::InvalidArgument(format!(
                "code basis is not an isometry (||V^dag V - I||_F = {r:e})"
            )));
        }
        Ok(Self {
            label: label.into(),
            basis,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn code_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn complement_dim(&self) -> usize {
        self.ambient_dim() - self.code_dim()
    }

    /// The isometry `V` (columns are the code states).
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// `P = V V^dag`.
    pub fn projector(&self) -> Operator {
        let p = &self.basis * self.basis.adjoint();
        Operator::from_parts(
            hermitize(p),
            Tags {
                hermitian: true,
                ..Tags::default()
            },
        )
    }

    /// `Q = I - P`.
    pub fn complement_projector(&self) -> Operator {
        let n = self.ambient_dim();
        let q = CMatrix::identity(n, n) - &self.basis * self.basis.adjoint();
        Operator::from_parts(
            hermitize(q),
            Tags {
                hermitian: true,
                ..Tags::default()
            },
        )
    }

    /// Orthonormal basis of the complement, obtained by Gram-Schmidt on
    /// `Q e_k` in ascending `k`. Empty (zero columns) when the code is the
    /// whole space.
    pub fn complement_basis(&self) -> CMatrix {
        let n = self.ambient_dim();
        let want = self.complement_dim();
        let mut out: Vec<CVector> = self.basis.column_iter().map(|c| c.into_owned()).collect();
        let mut found = Vec::with_capacity(want);
        for k in 0..n {
            if found.len() == want {
                break;
            }
            if let Some(v) = orthonormalize(basis_vector(n, k), &out) {
                out.push(v.clone());
                found.push(v);
            }
        }
        assert_eq!(found.len(), want, "complement basis incomplete");
        let mut m = CMatrix::zeros(n, want);
        for (j, v) in found.iter().enumerate() {
            m.set_column(j, v);
        }
        m
    }

    /// `||Q psi||` for an ambient-space vector.
    pub fn leakage_amplitude(&self, psi: &CVector) -> f64 {
        let inside = &self.basis * (self.basis.adjoint() * psi);
        (psi - inside).norm()
    }

    /// Ambient vector `V c` for code coordinates `c`.
    pub fn encode(&self, coords: &CVector) -> Result<CVector> {
        if coords.len() != self.code_dim() {
            return Err(LeoError::DimensionMismatch {
                expected: self.code_dim(),
                found: coords.len(),
            });
        }
        Ok(&self.basis * coords)
    }

    /// `V ⊗ I_extra`: the same code on a register extended by `extra_dim`.
    pub fn embed(&self, extra_dim: usize) -> CodeSubspace {
        let id = CMatrix::identity(extra_dim, extra_dim);
        CodeSubspace {
            label: format!("{}(x)I{}", self.label, extra_dim),
            basis: self.basis.kronecker(&id),
        }
    }

    /// Same span (within tolerance) regardless of the chosen basis.
    pub fn same_span(&self, other: &CodeSubspace, tol: f64) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.code_dim() == other.code_dim()
            && self.projector().approx_eq(&other.projector(), tol)
    }
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Two passes of modified Gram-Schmidt against `against`; `None` if the
/// residual falls below threshold.
fn orthonormalize(mut v: CVector, against: &[CVector]) -> Option<CVector> {
    for _ in 0..2 {
        for u in against {
            let c = u.dotc(&v);
            v -= u * c;
        }
    }
    let n = v.norm();
    (n > GS_THRESHOLD).then(|| v / C64::new(n, 0.0))
}

fn real_orthonormalize(mut v: Vec<f64>, against: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for u in against {
            let c: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
        }
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > GS_THRESHOLD).then(|| v.into_iter().map(|x| x / n).collect())
}

fn columns_to_matrix(dim: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(dim, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Levels `{0, 1}` of an `n_levels` system.
pub fn bare_qubit_code(n_levels: usize) -> Result<CodeSubspace> {
    if n_levels < 2 {
        return Err(LeoError::InvalidArgument(format!(
            "bare qubit needs at least 2 levels, got {n_levels}"
        )));
    }
    let cols = [basis_vector(n_levels, 0), basis_vector(n_levels, 1)];
    Ok(CodeSubspace {
        label: format!("bare:{n_levels}"),
        basis: columns_to_matrix(n_levels, &cols),
    })
}

/// `{|01>, |10>}`, the two-qubit collective-dephasing DFS.
pub fn dfs2_dephasing() -> CodeSubspace {
    let cols = [basis_vector(4, 0b01), basis_vector(4, 0b10)];
    CodeSubspace {
        label: "dfs2".into(),
        basis: columns_to_matrix(4, &cols),
    }
}

/// Doubled half-integer (stores `2S`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(u32);

impl HalfInt {
    pub fn from_doubled(twice: u32) -> Self {
        Self(twice)
    }

    pub fn doubled(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// `S(S+1)`.
    pub fn casimir(self) -> f64 {
        let t = self.0 as f64;
        t * (t + 2.0) / 4.0
    }

    pub fn multiplet_dim(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn s_squared_real(n: usize) -> DMatrix<f64> {
    // S^2 = (3n/4) I + (1/2) sum_{i<j} sigma_i . sigma_j, real in this basis
    let dim = 1usize << n;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] += 0.75 * n as f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let bi = (s >> (n - 1 - i)) & 1;
                let bj = (s >> (n - 1 - j)) & 1;
                if bi == bj {
                    // ZZ = +1, XX + YY annihilates aligned pairs
                    m[(s, s)] += 0.5;
                } else {
                    m[(s, s)] -= 0.5;
                    // XX + YY swaps anti-aligned pair with weight 2
                    let t = s ^ (1 << (n - 1 - i)) ^ (1 << (n - 1 - j));
                    m[(t, s)] += 1.0;
                }
            }
        }
    }
    m
}

/// Total spin squared `S^2 = (1/4)(sum_i sigma_i)^2` on `n` qubits.
pub fn s_squared(n_qubits: usize) -> Result<Operator> {
    if !(1..=10).contains(&n_qubits) {
        return Err(LeoError::InvalidArgument(format!(
            "s_squared supports 1..=10 qubits, got {n_qubits}"
        )));
    }
    let r = s_squared_real(n_qubits);
    let m = r.map(|x| C64::new(x, 0.0));
    Ok(Operator::from_parts(
        m,
        Tags {
            hermitian: true,
            ..Tags::default()
        },
    ))
}

/// Collective `S_z = (1/2) sum_i Z_i`.
pub fn s_z(n_qubits: usize) -> Operator {
    let dim = 1usize << n_qubits;
    let diag: Vec<f64> = (0..dim)
        .map(|s| 0.5 * (n_qubits as f64 - 2.0 * (s as u32).count_ones() as f64))
        .collect();
    Operator::real_diagonal(&diag)
}

/// Collective Pauli sum `sum_i sigma_i^alpha` for `alpha` in `{'X','Y','Z'}`.
pub fn collective_pauli(n_qubits: usize, alpha: char) -> Result<Operator> {
    let mut acc = Operator::zeros(1 << n_qubits);
    for q in 0..n_qubits {
        let label: String = (0..n_qubits).map(|i| if i == q { alpha } else { 'I' }).collect();
        acc = &acc + &pauli_string(&label)?;
    }
    Ok(acc)
}

fn apply_lowering(n: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (s, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for q in 0..n {
            let bit = 1 << (n - 1 - q);
            if s & bit == 0 {
                out[s | bit] += a;
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug)]
pub struct SpinSector {
    pub spin: HalfInt,
    pub multiplicity: usize,
    pub block_dim: usize,
    /// `2^n x (multiplicity * block_dim)`; columns ordered by ascending `S_z`,
    /// then by multiplet copy.
    pub basis: CMatrix,
}

impl SpinSector {
    /// Column index of copy `copy` at `S_z = m` (doubled: `twice_m`).
    pub fn column_index(&self, twice_m: i32, copy: usize) -> usize {
        let s = self.spin.doubled() as i32;
        let level = ((twice_m + s) / 2) as usize;
        level * self.multiplicity + copy
    }
}

#[derive(Clone, Debug)]
pub struct SpinSectorDecomposition {
    pub n_qubits: usize,
    pub sectors: Vec<SpinSector>,
}

impl SpinSectorDecomposition {
    pub fn sector(&self, spin: HalfInt) -> Option<&SpinSector> {
        self.sectors.iter().find(|s| s.spin == spin)
    }

    /// All sector bases side by side, in sector order.
    pub fn change_of_basis(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let cols: Vec<CVector> = self
            .sectors
            .iter()
            .flat_map(|s| s.basis.column_iter().map(|c| c.into_owned()))
            .collect();
        columns_to_matrix(dim, &cols)
    }
}

/// Simultaneous `(S^2, S_z)` eigenbasis grouped into total-spin sectors.
///
/// Highest-weight states (`S_z = S`) are fixed by Gram-Schmidt on the exact
/// polynomial projector applied to computational states in ascending order;
/// the rest of each multiplet follows from the lowering operator.
pub fn spin_sector_decomposition(n_qubits: usize) -> Result<SpinSectorDecomposition> {
    if !(2..=8).contains(&n_qubits) {
        return Err(LeoError::InvalidArgument(format!(
            "spin_sector_decomposition supports 2..=8 qubits, got {n_qubits}"
        )));
    }
    let n = n_qubits;
    let dim = 1usize << n;
    let s2 = s_squared_real(n);
    let mut sectors = Vec::new();

    for twice_s in ((n % 2)..=n).step_by(2) {
        let spin = HalfInt::from_doubled(twice_s as u32);
        let ones = (n - twice_s) / 2;
        let block: Vec<usize> = (0..dim)
            .filter(|s| (*s as u32).count_ones() as usize == ones)
            .collect();
        let b = block.len();
        let a = DMatrix::from_fn(b, b, |i, j| s2[(block[i], block[j])]);

        // Lowdin projector onto S(S+1) within the S_z = S block
        let mut proj = DMatrix::<f64>::identity(b, b);
        for other in ((twice_s + 2)..=n).step_by(2) {
            let lam = HalfInt::from_doubled(other as u32).casimir();
            let factor = (&a - DMatrix::<f64>::identity(b, b) * lam) / (spin.casimir() - lam);
            proj = factor * proj;
        }

        let expected = binomial(n, ones) - if ones > 0 { binomial(n, ones - 1) } else { 0 };
        let mut highest: Vec<Vec<f64>> = Vec::with_capacity(expected);
        for k in 0..b {
            if highest.len() == expected {
                break;
            }
            let mut full = vec![0.0; dim];
            for (i, &s) in block.iter().enumerate() {
                full[s] = proj[(i, k)];
            }
            if let Some(v) = real_orthonormalize(full, &highest) {
                highest.push(v);
            }
        }
        if highest.len() != expected {
            return Err(LeoError::EigenDecomposition);
        }

        // ladders[copy][level], level 0 = S_z = S
        let ladders: Vec<Vec<Vec<f64>>> = highest
            .into_iter()
            .map(|hw| {
                let mut ladder = vec![hw];
                let mut twice_m = twice_s as i32;
                while twice_m > -(twice_s as i32) {
                    let m = twice_m as f64 / 2.0;
                    let norm = (spin.casimir() - m * (m - 1.0)).sqrt();
                    let next: Vec<f64> = apply_lowering(n, ladder.last().unwrap())
                        .into_iter()
                        .map(|x| x / norm)
                        .collect();
                    ladder.push(next);
                    twice_m -= 2;
                }
                ladder
            })
            .collect();

        let block_dim = spin.multiplet_dim();
        let mut basis = CMatrix::zeros(dim, expected * block_dim);
        // ascending S_z: level index block_dim-1 first
        for (pos, level) in (0..block_dim).rev().enumerate() {
            for (copy, ladder) in ladders.iter().enumerate() {
                let col = pos * expected + copy;
                for (r, &x) in ladder[level].iter().enumerate() {
                    basis[(r, col)] = C64::new(x, 0.0);
                }
            }
        }
        sectors.push(SpinSector {
            spin,
            multiplicity: expected,
            block_dim,
            basis,
        });
    }

    Ok(SpinSectorDecomposition { n_qubits, sectors })
}

/// Three-qubit collective DFS: the whole `S = 1/2` sector (both doublets).
pub fn dfs3_collective() -> CodeSubspace {
    let dec = spin_sector_decomposition(3).expect("n = 3 is supported");
    let sector = dec.sector(HalfInt::from_doubled(1)).expect("doublets exist");
    CodeSubspace {
        label: "dfs3".into(),
        basis: sector.basis.clone(),
    }
}

/// Four-qubit collective DFS: the two singlets.
pub fn dfs4_collective() -> CodeSubspace {
    let dec = spin_sector_decomposition(4).expect("n = 4 is supported");
    let sector = dec.sector(HalfInt::from_doubled(0)).expect("singlets exist");
    CodeSubspace {
        label: "dfs4".into(),
        basis: sector.basis.clone(),
    }
}

/// Fixed-photon-number sector of a set of bosonic modes.
///
/// States are occupation vectors in ascending lexicographic order.
#[derive(Clone, Debug)]
pub struct FockSector {
    modes: usize,
    photons: u32,
    states: Vec<Vec<u32>>,
}

impl FockSector {
    pub fn new(modes: usize, photons: u32) -> Self {
        fn fill(prefix: &mut Vec<u32>, modes: usize, left: u32, out: &mut Vec<Vec<u32>>) {
            if prefix.len() == modes - 1 {
                prefix.push(left);
                out.push(prefix.clone());
                prefix.pop();
                return;
            }
            for k in 0..=left {
                prefix.push(k);
                fill(prefix, modes, left - k, out);
                prefix.pop();
            }
        }
        assert!(modes >= 1, "need at least one mode");
        let mut states = Vec::new();
        fill(&mut Vec::new(), modes, photons, &mut states);
        Self {
            modes,
            photons,
            states,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> u32 {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.states.iter().position(|s| s == occupation)
    }

    /// Index of `b_{modes[0]}^dag b_{modes[1]}^dag ... |vac>` (0-based modes).
    pub fn index_of_created(&self, modes: &[usize]) -> Option<usize> {
        let mut occ = vec![0u32; self.modes];
        for &m in modes {
            *occ.get_mut(m)? += 1;
        }
        self.index_of(&occ)
    }

    /// Matrix of `b_k^dag b_l` on this sector (0-based modes).
    pub fn hopping(&self, k: usize, l: usize) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (col, occ) in self.states.iter().enumerate() {
            if occ[l] == 0 {
                continue;
            }
            let mut out = occ.clone();
            out[l] -= 1;
            let amp = ((occ[l] * (out[k] + 1)) as f64).sqrt();
            out[k] += 1;
            let row = self.index_of(&out).expect("photon number is conserved");
            m[(row, col)] += C64::new(amp, 0.0);
        }
        m
    }

    /// Occupation operator `n_k`.
    pub fn number(&self, k: usize) -> Operator {
        let diag: Vec<f64> = self.states.iter().map(|s| s[k] as f64).collect();
        Operator::real_diagonal(&diag)
    }
}

/// The dual-rail sector: two photons in four modes.
pub fn dual_rail_sector() -> FockSector {
    FockSector::new(4, 2)
}

/// Two dual-rail qubits in modes (1,2) and (3,4): code states
/// `b1^dag b3^dag, b1^dag b4^dag, b2^dag b3^dag, b2^dag b4^dag |vac>`.
pub fn dual_rail_code() -> CodeSubspace {
    let sector = dual_rail_sector();
    let d = sector.dim();
    let cols: Vec<CVector> = [[0, 2], [0, 3], [1, 2], [1, 3]]
        .iter()
        .map(|pair| basis_vector(d, sector.index_of_created(pair).expect("in sector")))
        .collect();
    CodeSubspace {
        label: "dual_rail".into(),
        basis: columns_to_matrix(d, &cols),
    }
}

pub const CODE_LABELS: &[&str] = &["dfs2", "dfs3", "dfs4", "dual_rail", "bare:<n_levels>"];

/// Resolves a code label such as `dfs2` or `bare:4`.
pub fn code_by_label(label: &str) -> Result<CodeSubspace> {
    let unknown = || LeoError::UnknownCode {
        label: label.to_string(),
        valid: CODE_LABELS.join(", "),
    };
    match label {
        "dfs2" => Ok(dfs2_dephasing()),
        "dfs3" => Ok(dfs3_collective()),
        "dfs4" => Ok(dfs4_collective()),
        "dual_rail" => Ok(dual_rail_code()),
        other => {
            let n = other
                .strip_prefix("bare:")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(unknown)?;
            bare_qubit_code(n)
        }
    }
}

/// `{"label", "ambient_dim", "code_dim", "basis_re", "basis_im"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CodeSubspaceJson {
    pub label: String,
    pub ambient_dim: usize,
    pub code_dim: usize,
    pub basis_re: Vec<Vec<f64>>,
    pub basis_im: Vec<Vec<f64>>,
}

impl From<&CodeSubspace> for CodeSubspaceJson {
    fn from(c: &CodeSubspace) -> Self {
        let (basis_re, basis_im) = matrix_to_rows(&c.basis);
        Self {
            label: c.label.clone(),
            ambient_dim: c.ambient_dim(),
            code_dim: c.code_dim(),
            basis_re,
            basis_im,
        }
    }
}

impl TryFrom<CodeSubspaceJson> for CodeSubspace {
    type Error = LeoError;

    fn try_from(j: CodeSubspaceJson) -> Result<Self> {
        let m = rows_to_matrix(&j.basis_re, &j.basis_im, j.ambient_dim, j.code_dim)?;
        CodeSubspace::new(j.label, m)
    }
}

impl CodeSubspace {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CodeSubspaceJson::from(self)).expect("code serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: CodeSubspaceJson = serde_json::from_str(s)?;
        CodeSubspace::try_from(j)
    }
}

/// `|vac>`-relative helper used in tests and models: unit vector for a
/// computational label like `"0110"`.
pub fn qubit_state(bits: &str) -> CVector {
    let n = bits.len();
    let index = usize::from_str_radix(bits, 2).expect("binary label");
    let mut v = CVector::zeros(1 << n);
    v[index] = ONE;
    v
}
