//! Leakage-elimination operators.
//!
//! An LEO for a code is, up to a global phase `e^{i phi}`, the reflection
//! `Q - P`: it is `-1` on the code and `+1` on the complement. Such an
//! operator anticommutes with the leakage part of every operator and commutes
//! with the logical and outside parts.
//!
//! Every route records the generator `G` it was built from, with the
//! convention `R = exp(-i pi G)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::decompose;
use crate::codes::{
    bare_qubit_code, code_by_label, dfs2_dephasing, dfs4_collective, dual_rail_code,
    dual_rail_sector, s_squared, CodeSubspace,
};
use crate::error::{LeoError, Result};
use crate::opalg::{
    anticommutator, commutator, hermitian_eigenvalues, hermitian_exponential, matrix_to_rows,
    op_norm, rows_to_matrix, ComplexScalar, NormKind, Operator, C64, UNITARY_TOL,
};

/// Residual tolerance for the LEO contract.
pub const LEO_TOL: f64 = 1e-10;
/// Distance to the nearest integer allowed in generalized-LEO spectra.
pub const INTEGER_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeoRoute {
    Projector,
    Canonical,
    Generalized,
    NumberOp,
    PhaseShifter,
    Exchange2dfs,
    SSquared,
}

impl LeoRoute {
    pub const ALL: [LeoRoute; 7] = [
        LeoRoute::Projector,
        LeoRoute::Canonical,
        LeoRoute::Generalized,
        LeoRoute::NumberOp,
        LeoRoute::PhaseShifter,
        LeoRoute::Exchange2dfs,
        LeoRoute::SSquared,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LeoRoute::Projector => "projector",
            LeoRoute::Canonical => "canonical",
            LeoRoute::Generalized => "generalized",
            LeoRoute::NumberOp => "number_op",
            LeoRoute::PhaseShifter => "phase_shifter",
            LeoRoute::Exchange2dfs => "exchange_2dfs",
            LeoRoute::SSquared => "s_squared",
        }
    }

    pub fn valid_labels() -> String {
        Self::ALL.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for LeoRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LeoRoute {
    type Err = LeoError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| {
                LeoError::InvalidArgument(format!(
                    "unknown route `{s}` (valid: {})",
                    Self::valid_labels()
                ))
            })
    }
}

#[derive(Clone, Debug)]
pub struct LeakageEliminationOperator {
    unitary: Operator,
    code: CodeSubspace,
    generator: Option<Operator>,
    phase: ComplexScalar,
    route: LeoRoute,
}

impl LeakageEliminationOperator {
    /// Certifies `unitary` as an LEO for `code`.
    pub fn new(
        unitary: Operator,
        code: CodeSubspace,
        generator: Option<Operator>,
        route: LeoRoute,
    ) -> Result<Self> {
        if unitary.dim() != code.ambient_dim() {
            return Err(LeoError::DimensionMismatch {
                expected: code.ambient_dim(),
                found: unitary.dim(),
            });
        }
        let unitary = if unitary.is_unitary() {
            unitary
        } else {
            unitary.certify_unitary()?
        };
        let phase = extract_phase(&unitary, &code).ok_or_else(|| {
            LeoError::InvalidArgument("operator has no well-defined LEO phase".into())
        })?;
        let residual = structural_residual(&unitary, &code, phase);
        if residual > LEO_TOL {
            return Err(LeoError::InvalidArgument(format!(
                "operator is not of the form e^(i phi)(Q - P): residual {residual:e}"
            )));
        }
        Ok(Self {
            unitary,
            code,
            generator,
            phase: ComplexScalar::new(phase.re, phase.im)?,
            route,
        })
    }

    pub fn unitary(&self) -> &Operator {
        &self.unitary
    }

    pub fn code(&self) -> &CodeSubspace {
        &self.code
    }

    pub fn generator(&self) -> Option<&Operator> {
        self.generator.as_ref()
    }

    pub fn phase(&self) -> ComplexScalar {
        self.phase
    }

    pub fn route(&self) -> LeoRoute {
        self.route
    }

    pub fn structural_residual(&self) -> f64 {
        structural_residual(&self.unitary, &self.code, self.phase.value())
    }
}

/// `e^{i phi}` read off a complement diagonal element (or minus a code
/// element when the code fills the space). `None` when that element vanishes.
pub fn extract_phase(r: &Operator, code: &CodeSubspace) -> Option<C64> {
    let z = if code.complement_dim() > 0 {
        let w = code.complement_basis();
        let w0 = w.column(0);
        w0.dotc(&(r.matrix() * w0))
    } else {
        let v0 = code.basis().column(0);
        -v0.dotc(&(r.matrix() * v0))
    };
    let n = z.norm();
    (n > 1e-12).then(|| z / n)
}

/// `||R - phase (Q - P)||_F`.
pub fn structural_residual(r: &Operator, code: &CodeSubspace, phase: C64) -> f64 {
    let reflection = &code.complement_projector() - &code.projector();
    (r.matrix() - reflection.matrix() * phase).norm()
}

/// `exp(i pi P) = Q - P`.
pub fn projector_leo(code: &CodeSubspace) -> Result<LeakageEliminationOperator> {
    let p = code.projector();
    let unitary = &code.complement_projector() - &p;
    LeakageEliminationOperator::new(unitary, code.clone(), Some(p), LeoRoute::Projector)
}

fn ensure_hermitian(op: &Operator) -> Result<Operator> {
    if op.is_hermitian() {
        Ok(op.clone())
    } else {
        op.clone().certify_hermitian()
    }
}

fn canonical_with_route(
    sigma: &Operator,
    code: &CodeSubspace,
    route: LeoRoute,
) -> Result<LeakageEliminationOperator> {
    let bad = |msg: String| LeoError::NotLogicalInvolution(msg);
    if sigma.dim() != code.ambient_dim() {
        return Err(LeoError::DimensionMismatch {
            expected: code.ambient_dim(),
            found: sigma.dim(),
        });
    }
    let sigma = ensure_hermitian(sigma).map_err(|e| bad(e.to_string()))?;
    let dec = decompose(&sigma, code)?;
    let (_, eperp, l) = dec.norms();
    if l > LEO_TOL {
        return Err(bad(format!("leakage part has norm {l:e}")));
    }
    if eperp > LEO_TOL {
        return Err(bad(format!("acts outside the code (||Q s Q|| = {eperp:e})")));
    }
    let square = &sigma * &sigma;
    let r = op_norm(&(&square - &code.projector()), NormKind::Frobenius);
    if r > LEO_TOL {
        return Err(bad(format!("square differs from the code projector by {r:e}")));
    }
    let unitary = hermitian_exponential(&sigma, PI)?;
    LeakageEliminationOperator::new(unitary, code.clone(), Some(sigma), route)
}

/// `exp(i pi sigma)` for a code-supported hermitian involution
/// (`sigma^2 = P`).
pub fn canonical_leo(sigma: &Operator, code: &CodeSubspace) -> Result<LeakageEliminationOperator> {
    canonical_with_route(sigma, code, LeoRoute::Canonical)
}

fn restricted(h: &Operator, iso: &crate::opalg::CMatrix) -> Result<Vec<f64>> {
    let block = iso.adjoint() * h.matrix() * iso;
    let sym = (&block + block.adjoint()) * C64::new(0.5, 0.0);
    hermitian_eigenvalues(&Operator::new(sym)?.certify_hermitian()?)
}

/// Parity (0 even, 1 odd) shared by all values, if they are all integers.
fn common_parity(values: &[f64]) -> std::result::Result<Option<i64>, String> {
    let mut parity = None;
    for &v in values {
        let k = v.round();
        if (v - k).abs() > INTEGER_TOL {
            return Err(format!("eigenvalue {v} is not an integer"));
        }
        let p = (k as i64).rem_euclid(2);
        match parity {
            None => parity = Some(p),
            Some(q) if q != p => return Err("block spectrum mixes parities".into()),
            _ => {}
        }
    }
    Ok(parity)
}

fn generalized_with_route(
    h: &Operator,
    code: &CodeSubspace,
    route: LeoRoute,
) -> Result<LeakageEliminationOperator> {
    let bad = |msg: String| LeoError::NotGeneralizedGenerator(msg);
    if h.dim() != code.ambient_dim() {
        return Err(LeoError::DimensionMismatch {
            expected: code.ambient_dim(),
            found: h.dim(),
        });
    }
    let h = ensure_hermitian(h).map_err(|e| bad(e.to_string()))?;
    let dec = decompose(&h, code)?;
    let l = op_norm(&dec.l_part, NormKind::Frobenius);
    if l > crate::opalg::STRUCTURAL_TOL {
        return Err(bad(format!("not block diagonal (leakage norm {l:e})")));
    }
    let inside = common_parity(&restricted(&h, code.basis())?).map_err(|m| bad(format!("code block: {m}")))?;
    let outside = if code.complement_dim() > 0 {
        common_parity(&restricted(&h, &code.complement_basis())?)
            .map_err(|m| bad(format!("complement block: {m}")))?
    } else {
        None
    };
    if inside.is_some() && inside == outside {
        return Err(bad("code and complement spectra have the same parity".into()));
    }
    let unitary = hermitian_exponential(&h, -PI)?;
    LeakageEliminationOperator::new(unitary, code.clone(), Some(h), route)
}

/// `exp(-i pi h)` for `h` block diagonal with integer spectra of opposite
/// parity on the code and on its complement.
pub fn generalized_leo(h: &Operator, code: &CodeSubspace) -> Result<LeakageEliminationOperator> {
    generalized_with_route(h, code, LeoRoute::Generalized)
}

/// `exp(-i pi (n_0 + n_1))` on a bare multilevel qubit.
pub fn number_operator_leo(n_levels: usize) -> Result<LeakageEliminationOperator> {
    let code = bare_qubit_code(n_levels)?;
    let diag: Vec<f64> = (0..n_levels).map(|k| if k < 2 { 1.0 } else { 0.0 }).collect();
    let generator = Operator::real_diagonal(&diag);
    let unitary = hermitian_exponential(&generator, -PI)?;
    LeakageEliminationOperator::new(unitary, code, Some(generator), LeoRoute::NumberOp)
}

/// `exp(-i pi (n_1 + n_2))` on the two-photon dual-rail sector.
pub fn phase_shifter_leo() -> Result<LeakageEliminationOperator> {
    let sector = dual_rail_sector();
    let generator = &sector.number(0) + &sector.number(1);
    let unitary = hermitian_exponential(&generator, -PI)?;
    LeakageEliminationOperator::new(unitary, dual_rail_code(), Some(generator), LeoRoute::PhaseShifter)
}

/// `exp(i pi Xbar)` with `Xbar = (X1 X2 + Y1 Y2)/2` on the two-qubit DFS.
pub fn exchange_2dfs_leo() -> Result<LeakageEliminationOperator> {
    let xbar = crate::models::logical_ops_dfs2().xbar;
    canonical_with_route(&xbar, &dfs2_dephasing(), LeoRoute::Exchange2dfs)
}

/// `exp(-i pi S^2 / 2)` on the four-qubit singlet DFS.
pub fn s_squared_leo() -> Result<LeakageEliminationOperator> {
    let half = s_squared(4)?.scale(0.5);
    generalized_with_route(&half, &dfs4_collective(), LeoRoute::SSquared)
}

/// Builds the default LEO of `route` for `code`.
///
/// Routes that need extra input use their canonical choice: `canonical` uses
/// the code's logical `Z` (`+1` on the first basis state, `-1` on the rest),
/// `generalized` uses the code projector.
pub fn synthesize(route: LeoRoute, code: &CodeSubspace) -> Result<LeakageEliminationOperator> {
    let require = |label: &str| -> Result<()> {
        if code.label() == label {
            Ok(())
        } else {
            Err(LeoError::InvalidArgument(format!(
                "route `{route}` targets code `{label}`, not `{}`",
                code.label()
            )))
        }
    };
    match route {
        LeoRoute::Projector => projector_leo(code),
        LeoRoute::Canonical => {
            let v = code.basis();
            let k = code.code_dim();
            let signs: Vec<f64> = (0..k).map(|i| if i == 0 { 1.0 } else { -1.0 }).collect();
            let diag = crate::opalg::CMatrix::from_diagonal(&crate::opalg::CVector::from_iterator(
                k,
                signs.iter().map(|&s| C64::new(s, 0.0)),
            ));
            let sigma = Operator::new(v * diag * v.adjoint())?;
            canonical_leo(&sigma, code)
        }
        LeoRoute::Generalized => generalized_leo(&code.projector(), code),
        LeoRoute::NumberOp => {
            if !code.label().starts_with("bare:") {
                return Err(LeoError::InvalidArgument(format!(
                    "route `number_op` targets `bare:<n>` codes, not `{}`",
                    code.label()
                )));
            }
            number_operator_leo(code.ambient_dim())
        }
        LeoRoute::PhaseShifter => {
            require("dual_rail")?;
            phase_shifter_leo()
        }
        LeoRoute::Exchange2dfs => {
            require("dfs2")?;
            exchange_2dfs_leo()
        }
        LeoRoute::SSquared => {
            require("dfs4")?;
            s_squared_leo()
        }
    }
}

/// Whether `a = e^{i theta} b` with `theta` aligned on the first entry of `a`
/// (row-major) whose modulus exceeds 1e-12.
pub fn equal_up_to_phase(a: &Operator, b: &Operator, tol: f64) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    let n = a.dim();
    for i in 0..n {
        for j in 0..n {
            let x = a.get(i, j);
            if x.norm() > 1e-12 {
                let y = b.get(i, j);
                if y.norm() <= 1e-12 {
                    return false;
                }
                let theta = C64::from_polar(1.0, x.arg() - y.arg());
                return (a.matrix() - b.matrix() * theta).norm() <= tol;
            }
        }
    }
    op_norm(b, NormKind::Frobenius) <= tol
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResidual {
    pub anticommutator_l: f64,
    pub commutator_e: f64,
    pub commutator_eperp: f64,
}

impl ProbeResidual {
    pub fn max(&self) -> f64 {
        self.anticommutator_l.max(self.commutator_e).max(self.commutator_eperp)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub unitary_residual: f64,
    /// `[re, im]` of the extracted phase; absent when no phase could be read.
    pub phase: Option<[f64; 2]>,
    pub structural_residual: f64,
    pub structural_pass: bool,
    pub max_anticommutator_l: f64,
    pub max_commutator_e: f64,
    pub max_commutator_eperp: f64,
    pub probes: Vec<ProbeResidual>,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        self.structural_residual
            .max(self.max_anticommutator_l)
            .max(self.max_commutator_e)
            .max(self.max_commutator_eperp)
    }
}

/// Checks the LEO structure of `r` for `code` and its (anti)commutation with
/// the parts of every probe. Failures are recorded, not raised.
pub fn verify_leo(r: &Operator, code: &CodeSubspace, probes: &[Operator]) -> Result<VerificationReport> {
    if r.dim() != code.ambient_dim() {
        return Err(LeoError::DimensionMismatch {
            expected: code.ambient_dim(),
            found: r.dim(),
        });
    }
    if let Some(p) = probes.iter().find(|p| p.dim() != r.dim()) {
        return Err(LeoError::DimensionMismatch {
            expected: r.dim(),
            found: p.dim(),
        });
    }
    let unitary_residual = r.unitary_residual();
    let phase = extract_phase(r, code);
    let structural_residual = match phase {
        Some(ph) => structural_residual(r, code, ph),
        None => f64::INFINITY,
    };

    let probes: Vec<ProbeResidual> = probes
        .par_iter()
        .map(|m| -> Result<ProbeResidual> {
            let dec = decompose(m, code)?;
            Ok(ProbeResidual {
                anticommutator_l: op_norm(&anticommutator(r, &dec.l_part)?, NormKind::Frobenius),
                commutator_e: op_norm(&commutator(r, &dec.e_part)?, NormKind::Frobenius),
                commutator_eperp: op_norm(&commutator(r, &dec.eperp_part)?, NormKind::Frobenius),
            })
        })
        .collect::<Result<_>>()?;

    let fold = |f: fn(&ProbeResidual) -> f64| probes.iter().map(f).fold(0.0, f64::max);
    let max_anticommutator_l = fold(|p| p.anticommutator_l);
    let max_commutator_e = fold(|p| p.commutator_e);
    let max_commutator_eperp = fold(|p| p.commutator_eperp);
    let structural_pass = structural_residual <= LEO_TOL;
    let pass = structural_pass
        && unitary_residual <= UNITARY_TOL
        && max_anticommutator_l <= LEO_TOL
        && max_commutator_e <= LEO_TOL
        && max_commutator_eperp <= LEO_TOL;

    Ok(VerificationReport {
        pass,
        unitary_residual,
        phase: phase.map(|p| [p.re, p.im]),
        structural_residual,
        structural_pass,
        max_anticommutator_l,
        max_commutator_e,
        max_commutator_eperp,
        probes,
    })
}

/// Operator JSON plus `route`, `code_label` and `phase`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LeoJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub route: LeoRoute,
    pub code_label: String,
    pub phase: [f64; 2],
}

impl From<&LeakageEliminationOperator> for LeoJson {
    fn from(leo: &LeakageEliminationOperator) -> Self {
        let (re, im) = matrix_to_rows(leo.unitary.matrix());
        let ph = leo.phase.value();
        Self {
            dim: leo.unitary.dim(),
            re,
            im,
            route: leo.route,
            code_label: leo.code.label().to_string(),
            phase: [ph.re, ph.im],
        }
    }
}

impl LeakageEliminationOperator {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&LeoJson::from(self)).expect("leo serializes")
    }

    /// Parses an LEO file; the code is looked up from `code_label` unless given.
    pub fn from_json(s: &str, code: Option<&CodeSubspace>) -> Result<Self> {
        let j: LeoJson = serde_json::from_str(s)?;
        let code = match code {
            Some(c) => c.clone(),
            None => code_by_label(&j.code_label)?,
        };
        let m = rows_to_matrix(&j.re, &j.im, j.dim, j.dim)?;
        let unitary = Operator::new(m)?.with_detected_tags();
        Self::new(unitary, code, None, j.route)
    }
}

/// Parses just the unitary out of an LEO or plain operator JSON file.
pub fn unitary_from_json(s: &str) -> Result<Operator> {
    #[derive(Deserialize)]
    struct Loose {
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }
    let j: Loose = serde_json::from_str(s)?;
    let m = rows_to_matrix(&j.re, &j.im, j.dim, j.dim)?;
    Ok(Operator::new(m)?.with_detected_tags())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{dfs3_collective, qubit_state, spin_sector_decomposition, HalfInt};
    use crate::models::logical_ops_dfs2;
    use crate::opalg::{pauli_string, random_hermitian};

    fn zz() -> Operator {
        pauli_string("ZZ").unwrap()
    }

    #[test]
    fn projector_route_examples() {
        let full = bare_qubit_code(2).unwrap();
        let leo = projector_leo(&full).unwrap();
        assert!(leo.unitary().approx_eq(&Operator::identity(2).scale(-1.0), 0.0));

        let leo = projector_leo(&dfs2_dephasing()).unwrap();
        assert!(leo.unitary().approx_eq(&zz(), 0.0));
        assert_eq!(leo.phase().value(), C64::new(1.0, 0.0));

        let leo = projector_leo(&bare_qubit_code(4).unwrap()).unwrap();
        assert!(leo
            .unitary()
            .approx_eq(&Operator::real_diagonal(&[-1.0, -1.0, 1.0, 1.0]), 0.0));
    }

    #[test]
    fn canonical_route_examples() {
        let code = dfs2_dephasing();
        let leo = canonical_leo(&logical_ops_dfs2().xbar, &code).unwrap();
        assert!(leo.unitary().approx_eq(&zz(), 1e-12));

        let zbar = logical_ops_dfs2().zbar;
        let via_z = canonical_leo(&zbar, &code).unwrap();
        assert!(equal_up_to_phase(via_z.unitary(), projector_leo(&code).unwrap().unitary(), 1e-10));

        // sigma^2 = 4P is not an involution on the code
        let doubled = logical_ops_dfs2().xbar.scale(2.0);
        assert!(matches!(
            canonical_leo(&doubled, &code),
            Err(LeoError::NotLogicalInvolution(_))
        ));
        // a leakage operator is not code-supported
        assert!(matches!(
            canonical_leo(&pauli_string("XI").unwrap(), &code),
            Err(LeoError::NotLogicalInvolution(_))
        ));
    }

    #[test]
    fn generalized_route_examples() {
        let code = dfs4_collective();
        let half = s_squared(4).unwrap().scale(0.5);
        let leo = generalized_leo(&half, &code).unwrap();
        assert!(leo.structural_residual() <= 1e-10);
        assert!((leo.phase().value() + C64::new(1.0, 0.0)).norm() < 1e-12);

        let p = code.projector();
        let via_p = generalized_leo(&p, &code).unwrap();
        assert!(equal_up_to_phase(via_p.unitary(), projector_leo(&code).unwrap().unitary(), 1e-10));

        assert!(matches!(
            generalized_leo(&p.scale(2.0), &code),
            Err(LeoError::NotGeneralizedGenerator(_))
        ));
        assert!(matches!(
            generalized_leo(&p.scale(0.5), &code),
            Err(LeoError::NotGeneralizedGenerator(_))
        ));
    }

    #[test]
    fn generalized_route_discriminates_codes() {
        let half = s_squared(4).unwrap().scale(0.5);
        let wrong = dfs2_dephasing().embed(4);
        assert!(matches!(
            generalized_leo(&half, &wrong),
            Err(LeoError::NotGeneralizedGenerator(_))
        ));
    }

    #[test]
    fn number_operator_route() {
        let two = number_operator_leo(2).unwrap();
        assert!(two.unitary().approx_eq(&Operator::identity(2).scale(-1.0), 1e-15));
        let four = number_operator_leo(4).unwrap();
        assert!(four
            .unitary()
            .approx_eq(&Operator::real_diagonal(&[-1.0, -1.0, 1.0, 1.0]), 1e-15));
        let proj = projector_leo(&bare_qubit_code(4).unwrap()).unwrap();
        assert!(equal_up_to_phase(four.unitary(), proj.unitary(), 1e-10));
        assert!(number_operator_leo(1).is_err());
    }

    #[test]
    fn phase_shifter_is_a_full_sector_reflection() {
        let leo = phase_shifter_leo().unwrap();
        let sector = dual_rail_sector();
        let code = dual_rail_code();
        let p = code.projector();
        for (i, occ) in sector.states().iter().enumerate() {
            let parity = if (occ[0] + occ[1]) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((leo.unitary().get(i, i).re - parity).abs() < 1e-15);
            let in_code = p.get(i, i).re > 0.5;
            assert_eq!(in_code, parity < 0.0, "state {occ:?}");
        }
        let b1b2 = sector.index_of_created(&[0, 1]).unwrap();
        assert!((leo.unitary().get(b1b2, b1b2).re - 1.0).abs() < 1e-15);
        assert!(leo.structural_residual() < 1e-12);
    }

    #[test]
    fn s_squared_route_spectrum() {
        let leo = s_squared_leo().unwrap();
        let dec = spin_sector_decomposition(4).unwrap();
        for sec in &dec.sectors {
            let want = if sec.spin == HalfInt::from_doubled(0) { 1.0 } else { -1.0 };
            let image = leo.unitary().matrix() * &sec.basis;
            assert!((image - &sec.basis * C64::new(want, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn verify_examples() {
        let code = dfs2_dephasing();
        let probes = vec![
            pauli_string("XI").unwrap(),
            pauli_string("XX").unwrap(),
            random_hermitian(4, 3),
        ];
        let report = verify_leo(&zz(), &code, &probes).unwrap();
        assert!(report.pass);
        assert!(report.max_residual() <= 1e-12);

        let bad = verify_leo(&pauli_string("XI").unwrap(), &code, &probes).unwrap();
        assert!(!bad.pass && !bad.structural_pass);

        let s2 = s_squared_leo().unwrap();
        let probes: Vec<Operator> = (0..20).map(|s| random_hermitian(16, s)).collect();
        assert!(verify_leo(s2.unitary(), &dfs4_collective(), &probes).unwrap().pass);
    }

    #[test]
    fn route_labels_and_synthesis() {
        for r in LeoRoute::ALL {
            assert_eq!(r.as_str().parse::<LeoRoute>().unwrap(), r);
        }
        assert!("bogus".parse::<LeoRoute>().is_err());
        assert!(synthesize(LeoRoute::SSquared, &dfs2_dephasing()).is_err());
        assert!(synthesize(LeoRoute::Projector, &dfs3_collective()).is_ok());
        assert!(synthesize(LeoRoute::Canonical, &dfs3_collective()).is_ok());
        assert_eq!(synthesize(LeoRoute::NumberOp, &bare_qubit_code(3).unwrap()).unwrap().route(), LeoRoute::NumberOp);
    }

    #[test]
    fn leo_json_round_trip() {
        let leo = s_squared_leo().unwrap();
        let back = LeakageEliminationOperator::from_json(&leo.to_json(), None).unwrap();
        assert_eq!(back.unitary().matrix(), leo.unitary().matrix());
        assert_eq!(back.route(), LeoRoute::SSquared);
        assert_eq!(back.phase(), leo.phase());
    }

    #[test]
    fn involution_property() {
        let leo = exchange_2dfs_leo().unwrap();
        let sq = leo.unitary() * leo.unitary();
        let ph = leo.phase().value();
        assert!((sq.matrix() - Operator::identity(4).matrix() * (ph * ph)).norm() <= 1e-10);
        // a code state picks up -phase
        let out = leo.unitary().apply(&qubit_state("01"));
        assert!((out + qubit_state("01") * ph).norm() < 1e-12);
    }
}
