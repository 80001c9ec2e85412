//! Physical Hamiltonians, encoded logical operations and system-bath models.
//!
//! Units: `hbar = 1`, all couplings dimensionless. Bath operators are seeded
//! random hermitian matrices of unit spectral norm, so `g` alone sets the
//! system-bath coupling strength.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::classify::{decompose, OperatorClass, CLASS_TOL};
use crate::codes::{bare_qubit_code, dfs2_dephasing, dual_rail_code, dual_rail_sector, CodeSubspace};
use crate::error::{LeoError, Result};
use crate::opalg::{
    basis_vector, derive_seed, hermitian_exponential, op_norm, pauli_on, random_hermitian,
    tensor, CMatrix, CVector, NormKind, Operator, Pauli, C64,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCoupling {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl PairCoupling {
    pub fn heisenberg(j: f64) -> Self {
        Self { jx: j, jy: j, jz: j }
    }

    pub fn xy(j: f64) -> Self {
        Self { jx: j, jy: j, jz: 0.0 }
    }

    pub fn is_heisenberg(&self) -> bool {
        self.jx == self.jy && self.jy == self.jz
    }

    /// `Jx = ±Jy != Jz`.
    pub fn is_xxz(&self) -> bool {
        self.jx.abs() == self.jy.abs() && self.jx != self.jz
    }

    pub fn is_xy(&self) -> bool {
        self.jx == self.jy && self.jz == 0.0
    }
}

/// Exchange couplings per qubit pair `(i, j)`, `i < j`, 0-based.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExchangeCouplings {
    pairs: BTreeMap<(usize, usize), PairCoupling>,
}

impl ExchangeCouplings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_pair(mut self, i: usize, j: usize, c: PairCoupling) -> Result<Self> {
        self.set(i, j, c)?;
        Ok(self)
    }

    pub fn set(&mut self, i: usize, j: usize, c: PairCoupling) -> Result<()> {
        if i >= j {
            return Err(LeoError::InvalidArgument(format!("pair ({i}, {j}) must satisfy i < j")));
        }
        if ![c.jx, c.jy, c.jz].iter().all(|x| x.is_finite()) {
            return Err(LeoError::InvalidArgument("couplings must be finite".into()));
        }
        self.pairs.insert((i, j), c);
        Ok(())
    }

    /// Same coupling on every pair of an `n`-qubit register.
    pub fn all_pairs(n: usize, c: PairCoupling) -> Self {
        let mut pairs = BTreeMap::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.insert((i, j), c);
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(usize, usize), &PairCoupling)> {
        self.pairs.iter()
    }

    pub fn is_heisenberg(&self) -> bool {
        self.pairs.values().all(PairCoupling::is_heisenberg)
    }

    pub fn is_xxz(&self) -> bool {
        self.pairs.values().all(PairCoupling::is_xxz)
    }

    pub fn is_xy(&self) -> bool {
        self.pairs.values().all(PairCoupling::is_xy)
    }
}

fn two_site(n: usize, i: usize, j: usize, p: Pauli) -> Operator {
    &pauli_on(n, i, p) * &pauli_on(n, j, p)
}

/// `sum_{i<j} Jx X_i X_j + Jy Y_i Y_j + Jz Z_i Z_j`.
pub fn exchange_hamiltonian(n_qubits: usize, couplings: &ExchangeCouplings) -> Result<Operator> {
    if n_qubits < 2 {
        return Err(LeoError::InvalidArgument(format!(
            "exchange needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let mut h = CMatrix::zeros(1 << n_qubits, 1 << n_qubits);
    for (&(i, j), c) in couplings.pairs() {
        if j >= n_qubits {
            return Err(LeoError::InvalidArgument(format!(
                "pair ({i}, {j}) outside a {n_qubits}-qubit register"
            )));
        }
        for (p, w) in [(Pauli::X, c.jx), (Pauli::Y, c.jy), (Pauli::Z, c.jz)] {
            if w != 0.0 {
                h += two_site(n_qubits, i, j, p).matrix() * C64::new(w, 0.0);
            }
        }
    }
    // products of commuting Paulis on distinct sites are real-symmetric or
    // hermitian exactly, so the tag is certified without slack
    Operator::new(h)?.certify_hermitian()
}

#[derive(Clone, Debug)]
pub struct Dfs2LogicalOps {
    pub xbar: Operator,
    pub ybar: Operator,
    pub zbar: Operator,
}

/// `Xbar = (X1X2 + Y1Y2)/2`, `Ybar = (X2Y1 - Y2X1)/2`, `Zbar = (Z1 - Z2)/2`.
pub fn logical_ops_dfs2() -> Dfs2LogicalOps {
    let p = |q: usize, s: Pauli| pauli_on(2, q, s);
    let xbar = (&two_site(2, 0, 1, Pauli::X) + &two_site(2, 0, 1, Pauli::Y)).scale(0.5);
    let ybar = (&(&p(1, Pauli::X) * &p(0, Pauli::Y)) - &(&p(1, Pauli::Y) * &p(0, Pauli::X))).scale(0.5);
    let zbar = (&p(0, Pauli::Z) - &p(1, Pauli::Z)).scale(0.5);
    let cert = |o: Operator| o.certify_hermitian().expect("logical operators are hermitian");
    Dfs2LogicalOps {
        xbar: cert(xbar),
        ybar: cert(ybar),
        zbar: cert(zbar),
    }
}

/// `e^{i(pi/4)Xbar} e^{-i theta Zbar} e^{-i(pi/4)Xbar}`, which equals
/// `e^{-i theta Ybar}`.
pub fn recoupled_y_rotation(theta: f64) -> Result<Operator> {
    let ops = logical_ops_dfs2();
    let a = hermitian_exponential(&ops.xbar, FRAC_PI_4)?;
    let b = hermitian_exponential(&ops.zbar, -theta)?;
    let c = hermitian_exponential(&ops.xbar, -FRAC_PI_4)?;
    (&(&a * &b) * &c).certify_unitary()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathCoupling {
    /// A fresh seeded bath operator for every system term.
    #[default]
    Independent,
    /// One bath operator shared by all system terms.
    Shared,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathSpec {
    pub dim: usize,
    pub seed: u64,
    pub coupling: BathCoupling,
}

impl BathSpec {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            seed,
            coupling: BathCoupling::Independent,
        }
    }

    pub fn with_coupling(mut self, coupling: BathCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    /// Bath factor of the `term`-th system term. A one-dimensional bath is
    /// trivial (`B = 1`).
    pub fn coupling_operator(&self, term: u64) -> Operator {
        if self.dim == 1 {
            return Operator::identity(1);
        }
        let stream = match self.coupling {
            BathCoupling::Independent => 1 + term,
            BathCoupling::Shared => 1,
        };
        random_hermitian(self.dim, derive_seed(self.seed, stream))
    }

    /// Free bath Hamiltonian `H_B` (zero for a one-dimensional bath).
    pub fn free_hamiltonian(&self) -> Operator {
        if self.dim == 1 {
            return Operator::zeros(1);
        }
        random_hermitian(self.dim, derive_seed(self.seed, 0))
    }

    /// `|b_0>`, the first bath basis state.
    pub fn initial_state(&self) -> CVector {
        basis_vector(self.dim, 0)
    }
}

/// One classified system factor and the bath operator it couples to.
#[derive(Clone, Debug)]
pub struct ModelTerm {
    pub class: OperatorClass,
    pub system: Operator,
    pub bath: Operator,
}

#[derive(Clone, Debug)]
pub struct SystemBathModel {
    pub id: String,
    pub system_dim: usize,
    pub bath_dim: usize,
    pub code: CodeSubspace,
    pub h_joint: Operator,
    pub h_c: Operator,
    pub h_perp: Operator,
    pub h_l: Operator,
    /// Classified system-bath terms (already scaled by `g`); the free bath
    /// enters `h_c` and `h_perp` as `P ⊗ H_B` and `Q ⊗ H_B`.
    pub terms: Vec<ModelTerm>,
    pub h_bath: Operator,
    pub g: f64,
    pub bath_seed: u64,
    pub initial_bath_state: CVector,
}

impl SystemBathModel {
    /// Assembles `H = sum_a g S_a ⊗ B_a + I ⊗ H_B` and its classified parts.
    pub fn assemble(
        id: impl Into<String>,
        code: CodeSubspace,
        system_terms: Vec<(Operator, Operator)>,
        g: f64,
        bath: &BathSpec,
    ) -> Result<Self> {
        if !g.is_finite() {
            return Err(LeoError::InvalidArgument("coupling g must be finite".into()));
        }
        let sd = code.ambient_dim();
        let bd = bath.dim;
        let joint = sd * bd;
        let h_bath = bath.free_hamiltonian();
        let p = code.projector();
        let q = code.complement_projector();

        let mut h_joint = tensor(&Operator::identity(sd), &h_bath);
        let mut h_c = tensor(&p, &h_bath);
        let mut h_perp = tensor(&q, &h_bath);
        let mut h_l = Operator::zeros(joint);
        let mut terms = Vec::new();

        for (s, b) in system_terms {
            if s.dim() != sd || b.dim() != bd {
                return Err(LeoError::DimensionMismatch {
                    expected: sd * bd,
                    found: s.dim() * b.dim(),
                });
            }
            let s = s.scale(g);
            h_joint = &h_joint + &tensor(&s, &b);
            let dec = decompose(&s, &code)?;
            for (part, class) in [
                (dec.e_part, OperatorClass::E),
                (dec.eperp_part, OperatorClass::EPerp),
                (dec.l_part, OperatorClass::L),
            ] {
                if op_norm(&part, NormKind::Frobenius) <= CLASS_TOL {
                    continue;
                }
                let piece = tensor(&part, &b);
                match class {
                    OperatorClass::E => h_c = &h_c + &piece,
                    OperatorClass::EPerp => h_perp = &h_perp + &piece,
                    _ => h_l = &h_l + &piece,
                }
                terms.push(ModelTerm {
                    class,
                    system: part,
                    bath: b.clone(),
                });
            }
        }

        Ok(Self {
            id: id.into(),
            system_dim: sd,
            bath_dim: bd,
            code,
            h_joint,
            h_c,
            h_perp,
            h_l,
            terms,
            h_bath,
            g,
            bath_seed: bath.seed,
            initial_bath_state: bath.initial_state(),
        })
    }

    pub fn joint_dim(&self) -> usize {
        self.system_dim * self.bath_dim
    }

    /// `||H - (H_C + H_perp + H_L)||_F`.
    pub fn reconstruction_residual(&self) -> f64 {
        let sum = &(&self.h_c + &self.h_perp) + &self.h_l;
        op_norm(&(&self.h_joint - &sum), NormKind::Frobenius)
    }

    /// `H_C + H_perp`, the generator of the decoupled limit.
    pub fn decoupled_generator(&self) -> Operator {
        &self.h_c + &self.h_perp
    }
}

/// Splits `s` into its classified parts, each paired with its own bath stream.
fn per_part_terms(s: &Operator, code: &CodeSubspace, bath: &BathSpec) -> Result<Vec<(Operator, Operator)>> {
    let dec = decompose(s, code)?;
    Ok(vec![
        (dec.e_part, bath.coupling_operator(0)),
        (dec.eperp_part, bath.coupling_operator(1)),
        (dec.l_part, bath.coupling_operator(2)),
    ])
}

/// Single-particle hopping `sum a_kl c_k^dag c_l` over `n_levels` levels,
/// coupled to the bath part by part.
pub fn hopping_model(n_levels: usize, seed: u64, g: f64, bath: &BathSpec) -> Result<SystemBathModel> {
    if n_levels < 3 {
        return Err(LeoError::InvalidArgument(format!(
            "hopping model needs at least 3 levels for leakage, got {n_levels}"
        )));
    }
    let code = bare_qubit_code(n_levels)?;
    let system = random_hermitian(n_levels, seed);
    let terms = per_part_terms(&system, &code, bath)?;
    SystemBathModel::assemble(format!("hopping:{n_levels}"), code, terms, g, bath)
}

/// Second-quantized `sum_{k,l} a_kl b_k^dag b_l` on the two-photon,
/// four-mode sector.
pub fn lift_mode_hamiltonian(a: &Operator) -> Result<Operator> {
    let sector = dual_rail_sector();
    if a.dim() != sector.modes() {
        return Err(LeoError::DimensionMismatch {
            expected: sector.modes(),
            found: a.dim(),
        });
    }
    let mut h = CMatrix::zeros(sector.dim(), sector.dim());
    for k in 0..sector.modes() {
        for l in 0..sector.modes() {
            let c = a.get(k, l);
            if c != C64::new(0.0, 0.0) {
                h += sector.hopping(k, l) * c;
            }
        }
    }
    let op = Operator::new(h)?;
    if a.is_hermitian() {
        let sym = (op.matrix() + op.matrix().adjoint()) * C64::new(0.5, 0.0);
        Operator::new(sym)?.certify_hermitian()
    } else {
        Ok(op)
    }
}

/// Linear-optics model from an explicit 4x4 mode-coupling matrix.
pub fn linear_optics_from_modes(a: &Operator, g: f64, bath: &BathSpec) -> Result<SystemBathModel> {
    let h = lift_mode_hamiltonian(a)?;
    let code = dual_rail_code();
    let terms = per_part_terms(&h, &code, bath)?;
    SystemBathModel::assemble("linear_optics", code, terms, g, bath)
}

/// Linear-optics model with a seeded random mode-coupling matrix.
pub fn linear_optics_model(seed: u64, g: f64, bath: &BathSpec) -> Result<SystemBathModel> {
    linear_optics_from_modes(&random_hermitian(4, seed), g, bath)
}

/// System terms for the two-qubit DFS model; qubits are 0-based here and
/// 1-based in labels (`X1`, `Y2Z1`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dfs2Term {
    X(usize),
    Y(usize),
    /// `X_i Z_j`
    XZ(usize, usize),
    /// `Y_i Z_j`
    YZ(usize, usize),
    /// Collective dephasing `Z1 + Z2`.
    Collective,
    /// Zeeman difference `Z1 - Z2`.
    Zeeman,
}

impl Dfs2Term {
    pub fn parse(label: &str) -> Result<Self> {
        let bad = || {
            LeoError::InvalidArgument(format!(
                "bad dfs2 term `{label}` (expected X1, Y2, X1Z2, Y2Z1, Z1+Z2 or Z1-Z2)"
            ))
        };
        match label {
            "Z1+Z2" => return Ok(Dfs2Term::Collective),
            "Z1-Z2" => return Ok(Dfs2Term::Zeeman),
            _ => {}
        }
        let b = label.as_bytes();
        let qubit = |c: u8| match c {
            b'1' => Ok(0),
            b'2' => Ok(1),
            _ => Err(bad()),
        };
        match b {
            [p, q] => {
                let q = qubit(*q)?;
                match p {
                    b'X' => Ok(Dfs2Term::X(q)),
                    b'Y' => Ok(Dfs2Term::Y(q)),
                    _ => Err(bad()),
                }
            }
            [p, q, b'Z', r] => {
                let (q, r) = (qubit(*q)?, qubit(*r)?);
                if q == r {
                    return Err(bad());
                }
                match p {
                    b'X' => Ok(Dfs2Term::XZ(q, r)),
                    b'Y' => Ok(Dfs2Term::YZ(q, r)),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }

    pub fn operator(self) -> Operator {
        let p = |q, s| pauli_on(2, q, s);
        match self {
            Dfs2Term::X(q) => p(q, Pauli::X),
            Dfs2Term::Y(q) => p(q, Pauli::Y),
            Dfs2Term::XZ(i, j) => &p(i, Pauli::X) * &p(j, Pauli::Z),
            Dfs2Term::YZ(i, j) => &p(i, Pauli::Y) * &p(j, Pauli::Z),
            Dfs2Term::Collective => &p(0, Pauli::Z) + &p(1, Pauli::Z),
            Dfs2Term::Zeeman => &p(0, Pauli::Z) - &p(1, Pauli::Z),
        }
        .with_detected_tags()
    }

    pub fn is_leakage(self) -> bool {
        !matches!(self, Dfs2Term::Collective | Dfs2Term::Zeeman)
    }
}

/// `sum_a g S_a ⊗ B_a + I ⊗ H_B` on the two-qubit DFS.
pub fn dfs2_leakage_model(terms: &[Dfs2Term], g: f64, bath: &BathSpec) -> Result<SystemBathModel> {
    if terms.is_empty() {
        return Err(LeoError::InvalidArgument("dfs2 leak set is empty".into()));
    }
    let system_terms = terms
        .iter()
        .enumerate()
        .map(|(k, t)| (t.operator(), bath.coupling_operator(k as u64)))
        .collect();
    SystemBathModel::assemble("dfs2_leakage", dfs2_dephasing(), system_terms, g, bath)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Hopping,
    LinearOptics,
    Dfs2Leakage,
}

impl ModelKind {
    pub fn default_bath_dim(self) -> usize {
        match self {
            ModelKind::LinearOptics => 1,
            _ => 4,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HoppingParams {
    #[serde(default = "default_levels")]
    n_levels: usize,
    #[serde(default)]
    bath_coupling: BathCoupling,
}

fn default_levels() -> usize {
    4
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearOpticsParams {
    #[serde(default)]
    bath_coupling: BathCoupling,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Dfs2Params {
    leak_set: Vec<String>,
    #[serde(default)]
    bath_coupling: BathCoupling,
}

/// `{"model": ..., "params": {...}, "g": float, "seed": int, "bath_dim": int}`.
///
/// `seed` drives the system coefficients (hopping, linear optics) or the bath
/// (dfs2); `bath_seed` overrides the bath stream when present.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    #[serde(default = "empty_params")]
    pub params: serde_json::Value,
    pub g: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_seed: Option<u64>,
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

impl ModelConfig {
    fn params<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| LeoError::InvalidArgument(format!("model params: {e}")))
    }

    pub fn build(&self) -> Result<SystemBathModel> {
        if !self.g.is_finite() || self.g < 0.0 {
            return Err(LeoError::InvalidArgument(format!(
                "g must be finite and non-negative, got {}",
                self.g
            )));
        }
        let bath_dim = self.bath_dim.unwrap_or(self.model.default_bath_dim());
        if !(1..=64).contains(&bath_dim) {
            return Err(LeoError::InvalidArgument(format!(
                "bath_dim must be in 1..=64, got {bath_dim}"
            )));
        }
        let bath_seed = self.bath_seed.unwrap_or(self.seed);
        match self.model {
            ModelKind::Hopping => {
                let p: HoppingParams = self.params()?;
                let bath = BathSpec::new(bath_dim, bath_seed).with_coupling(p.bath_coupling);
                hopping_model(p.n_levels, self.seed, self.g, &bath)
            }
            ModelKind::LinearOptics => {
                let p: LinearOpticsParams = self.params()?;
                let bath = BathSpec::new(bath_dim, bath_seed).with_coupling(p.bath_coupling);
                linear_optics_model(self.seed, self.g, &bath)
            }
            ModelKind::Dfs2Leakage => {
                let p: Dfs2Params = self.params()?;
                let terms = p
                    .leak_set
                    .iter()
                    .map(|s| Dfs2Term::parse(s))
                    .collect::<Result<Vec<_>>>()?;
                let bath = BathSpec::new(bath_dim, bath_seed).with_coupling(p.bath_coupling);
                dfs2_leakage_model(&terms, self.g, &bath)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::leakage_norm;
    use crate::codes::{collective_pauli, qubit_state, s_squared};
    use crate::opalg::{commutator, hermitian_eigenvalues, pauli_string};

    fn frob(m: &Operator) -> f64 {
        op_norm(m, NormKind::Frobenius)
    }

    #[test]
    fn heisenberg_pair_spectrum() {
        let h = exchange_hamiltonian(2, &ExchangeCouplings::all_pairs(2, PairCoupling::heisenberg(1.0))).unwrap();
        let ev = hermitian_eigenvalues(&h).unwrap();
        for (got, want) in ev.iter().zip([-3.0, 1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn xy_pair_is_logical_x() {
        let c = ExchangeCouplings::new().with_pair(0, 1, PairCoupling::xy(0.5)).unwrap();
        assert!(c.is_xy() && !c.is_heisenberg());
        let h = exchange_hamiltonian(2, &c).unwrap();
        assert!(h.approx_eq(&logical_ops_dfs2().xbar, 1e-15));
        let zero = exchange_hamiltonian(3, &ExchangeCouplings::all_pairs(3, PairCoupling::heisenberg(0.0))).unwrap();
        assert_eq!(frob(&zero), 0.0);
        assert!(exchange_hamiltonian(1, &ExchangeCouplings::new()).is_err());
        assert!(ExchangeCouplings::new().with_pair(1, 1, PairCoupling::xy(1.0)).is_err());
    }

    #[test]
    fn coupling_predicates() {
        let xxz = PairCoupling { jx: 1.0, jy: -1.0, jz: 0.3 };
        assert!(xxz.is_xxz() && !xxz.is_heisenberg() && !xxz.is_xy());
        assert!(PairCoupling::heisenberg(2.0).is_heisenberg());
        assert!(!PairCoupling::heisenberg(2.0).is_xxz());
    }

    #[test]
    fn heisenberg_commutes_with_collective_operators() {
        for n in 2..=4 {
            let h = exchange_hamiltonian(n, &ExchangeCouplings::all_pairs(n, PairCoupling::heisenberg(0.7))).unwrap();
            assert!(frob(&commutator(&h, &s_squared(n).unwrap()).unwrap()) <= 1e-12);
            for a in ['X', 'Y', 'Z'] {
                let c = collective_pauli(n, a).unwrap();
                assert!(frob(&commutator(&h, &c).unwrap()) <= 1e-12);
            }
        }
    }

    #[test]
    fn logical_operator_actions() {
        let ops = logical_ops_dfs2();
        assert_eq!(ops.xbar.apply(&qubit_state("01")), qubit_state("10"));
        assert_eq!(ops.zbar.apply(&qubit_state("01")), qubit_state("01"));
        assert_eq!(ops.zbar.apply(&qubit_state("10")), -qubit_state("10"));
        let code = dfs2_dephasing();
        for op in [&ops.xbar, &ops.ybar, &ops.zbar] {
            let dec = decompose(op, &code).unwrap();
            assert_eq!(dec.class(), OperatorClass::E);
            let zsum = collective_pauli(2, 'Z').unwrap();
            assert!(frob(&commutator(op, &zsum).unwrap()) <= 1e-12);
        }
        // [xbar, ybar] = 2i zbar on the code
        let v = code.basis();
        let c = commutator(&ops.xbar, &ops.ybar).unwrap();
        let lhs = v.adjoint() * c.matrix() * v;
        let rhs = v.adjoint() * ops.zbar.matrix() * v * C64::new(0.0, 2.0);
        assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn recoupling_identity() {
        let ybar = logical_ops_dfs2().ybar;
        for theta in [0.0, std::f64::consts::FRAC_PI_2, 1.234] {
            let lhs = recoupled_y_rotation(theta).unwrap();
            let rhs = hermitian_exponential(&ybar, -theta).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-12), "theta = {theta}");
        }
        let id = recoupled_y_rotation(0.0).unwrap();
        assert!(id.approx_eq(&Operator::identity(4), 1e-12));
    }

    #[test]
    fn hopping_model_structure() {
        let bath = BathSpec::new(4, 7);
        let free = hopping_model(4, 7, 0.0, &bath).unwrap();
        assert!(free.h_joint.approx_eq(&tensor(&Operator::identity(4), &bath.free_hamiltonian()), 0.0));
        assert_eq!(frob(&free.h_l), 0.0);

        let m = hopping_model(4, 7, 0.3, &bath).unwrap();
        assert!(m.reconstruction_residual() <= 1e-12);
        let sys = random_hermitian(4, 7);
        assert!(leakage_norm(&sys, &m.code).unwrap() > 0.1);
        assert!(frob(&m.h_l) > 0.0);
        for t in &m.terms {
            assert_eq!(decompose(&t.system, &m.code).unwrap().class(), t.class);
        }
        let again = hopping_model(4, 7, 0.3, &bath).unwrap();
        assert_eq!(again.h_joint.matrix(), m.h_joint.matrix());
        assert!(hopping_model(2, 7, 0.3, &bath).is_err());
    }

    #[test]
    fn linear_optics_structure() {
        let bath = BathSpec::new(1, 0);
        let diag = Operator::real_diagonal(&[0.3, -0.2, 0.5, 0.1]);
        let m = linear_optics_from_modes(&diag, 1.0, &bath).unwrap();
        assert_eq!(frob(&m.h_l), 0.0);

        let mut a = CMatrix::zeros(4, 4);
        a[(0, 2)] = C64::new(0.4, 0.0);
        a[(2, 0)] = C64::new(0.4, 0.0);
        let a = Operator::new(a).unwrap().certify_hermitian().unwrap();
        let m = linear_optics_from_modes(&a, 1.0, &bath).unwrap();
        assert!(frob(&m.h_l) > 0.1);

        let h = lift_mode_hamiltonian(&random_hermitian(4, 2)).unwrap();
        assert!(h.is_hermitian());
        // total photon number is conserved by construction
        let sector = dual_rail_sector();
        let total = (0..4).fold(Operator::zeros(10), |acc, k| &acc + &sector.number(k));
        assert!(frob(&commutator(&h, &total).unwrap()) < 1e-12);

        let seeded = linear_optics_model(5, 0.2, &BathSpec::new(4, 5)).unwrap();
        assert!(seeded.reconstruction_residual() <= 1e-12);
        assert_eq!(seeded.joint_dim(), 40);
    }

    #[test]
    fn dfs2_model_terms() {
        let bath = BathSpec::new(4, 3);
        let m = dfs2_leakage_model(&[Dfs2Term::X(0)], 0.05, &bath).unwrap();
        assert_eq!(m.terms.len(), 1);
        assert_eq!(m.terms[0].class, OperatorClass::L);
        assert!(m.reconstruction_residual() <= 1e-12);

        let m = dfs2_leakage_model(&[Dfs2Term::Collective], 0.05, &bath).unwrap();
        assert_eq!(frob(&m.h_l), 0.0);

        let m = dfs2_leakage_model(&[Dfs2Term::X(0)], 0.0, &bath).unwrap();
        assert!(m.h_joint.approx_eq(&tensor(&Operator::identity(4), &m.h_bath), 0.0));
        assert!(dfs2_leakage_model(&[], 0.1, &bath).is_err());
    }

    #[test]
    fn dfs2_labels() {
        assert_eq!(Dfs2Term::parse("X1").unwrap(), Dfs2Term::X(0));
        assert_eq!(Dfs2Term::parse("Y2Z1").unwrap(), Dfs2Term::YZ(1, 0));
        assert_eq!(Dfs2Term::parse("Z1+Z2").unwrap(), Dfs2Term::Collective);
        for bad in ["", "X3", "X1Z1", "Z1", "XX", "x1"] {
            assert!(Dfs2Term::parse(bad).is_err(), "{bad}");
        }
        let xz = Dfs2Term::parse("X1Z2").unwrap().operator();
        assert!(xz.approx_eq(&pauli_string("XZ").unwrap(), 0.0));
    }

    #[test]
    fn shared_bath_reuses_one_operator() {
        let bath = BathSpec::new(4, 9).with_coupling(BathCoupling::Shared);
        assert_eq!(bath.coupling_operator(0).matrix(), bath.coupling_operator(5).matrix());
        let indep = BathSpec::new(4, 9);
        assert_ne!(indep.coupling_operator(0).matrix(), indep.coupling_operator(1).matrix());
    }

    #[test]
    fn config_builds_models() {
        let cfg: ModelConfig = serde_json::from_str(
            r#"{"model":"dfs2_leakage","params":{"leak_set":["X1","Y2Z1"]},"g":0.05,"seed":3,"bath_dim":4}"#,
        )
        .unwrap();
        let m = cfg.build().unwrap();
        assert_eq!(m.terms.len(), 2);
        assert_eq!(m.bath_seed, 3);

        let hop: ModelConfig =
            serde_json::from_str(r#"{"model":"hopping","params":{"n_levels":5},"g":0.1,"seed":1}"#).unwrap();
        assert_eq!(hop.build().unwrap().system_dim, 5);

        let bad: ModelConfig =
            serde_json::from_str(r#"{"model":"hopping","params":{"levels":5},"g":0.1,"seed":1}"#).unwrap();
        assert!(bad.build().is_err());
        let neg: ModelConfig = serde_json::from_str(r#"{"model":"linear_optics","g":-1,"seed":1}"#).unwrap();
        assert!(neg.build().is_err());
        assert!(serde_json::from_str::<ModelConfig>(r#"{"model":"spin_glass","g":1,"seed":1}"#).is_err());
    }

    #[test]
    fn dfs2_collective_term_annihilates_code() {
        let code = dfs2_dephasing();
        let v = code.basis();
        let z = Dfs2Term::Collective.operator();
        assert_eq!((z.matrix() * v).norm(), 0.0);
    }
}
