//! Logical / outside / leakage block decomposition relative to a code.
//!
//! For a code with projector `P` and complement `Q = I - P`, any operator
//! splits as `M = PMP + QMQ + (PMQ + QMP)`. The first part acts only on the
//! code, the second only outside it, the third mixes the two.

use std::fmt;
use std::io::Write;

use crate::codes::CodeSubspace;
use crate::error::{LeoError, Result};
use crate::opalg::{all_pauli_labels, op_norm, pauli_string, CMatrix, NormKind, Operator, C64};

/// Classification threshold on part norms.
pub const CLASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub code: CodeSubspace,
    /// `P M P`
    pub e_part: Operator,
    /// `Q M Q`
    pub eperp_part: Operator,
    /// `P M Q + Q M P`
    pub l_part: Operator,
    /// Upper-right block `V^dag M W` (complement columns into code rows).
    pub d_block: CMatrix,
    /// Lower-left block `W^dag M V` (code columns into complement rows).
    pub f_block: CMatrix,
}

impl BlockDecomposition {
    pub fn reconstruct(&self) -> Operator {
        &(&self.e_part + &self.eperp_part) + &self.l_part
    }

    pub fn norms(&self) -> (f64, f64, f64) {
        (
            op_norm(&self.e_part, NormKind::Frobenius),
            op_norm(&self.eperp_part, NormKind::Frobenius),
            op_norm(&self.l_part, NormKind::Frobenius),
        )
    }

    pub fn class(&self) -> OperatorClass {
        let (e, ep, l) = self.norms();
        let nonzero = [e, ep, l].map(|x| x > CLASS_TOL);
        match nonzero {
            [false, false, false] => OperatorClass::Null,
            [true, false, false] => OperatorClass::E,
            [false, true, false] => OperatorClass::EPerp,
            [false, false, true] => OperatorClass::L,
            _ => OperatorClass::Mixed,
        }
    }
}

/// Parts of a hermitian operator are hermitian; drop the rounding asymmetry.
fn hermitized(part: Operator, hermitian: bool) -> Result<Operator> {
    if !hermitian {
        return Ok(part);
    }
    let sym = (part.matrix() + part.matrix().adjoint()) * C64::new(0.5, 0.0);
    Operator::new(sym)?.certify_hermitian()
}

fn check_dim(m: &Operator, code: &CodeSubspace) -> Result<()> {
    if m.dim() != code.ambient_dim() {
        return Err(LeoError::DimensionMismatch {
            expected: code.ambient_dim(),
            found: m.dim(),
        });
    }
    Ok(())
}

pub fn decompose(m: &Operator, code: &CodeSubspace) -> Result<BlockDecomposition> {
    check_dim(m, code)?;
    let p = code.projector();
    let q = code.complement_projector();
    let h = m.is_hermitian();

    let e_part = hermitized(&(&p * m) * &p, h)?;
    let eperp_part = hermitized(&(&q * m) * &q, h)?;
    let l_part = hermitized(&(&(&p * m) * &q) + &(&(&q * m) * &p), h)?;

    let v = code.basis();
    let w = code.complement_basis();
    let d_block = v.adjoint() * m.matrix() * &w;
    let f_block = w.adjoint() * m.matrix() * v;

    Ok(BlockDecomposition {
        code: code.clone(),
        e_part,
        eperp_part,
        l_part,
        d_block,
        f_block,
    })
}

/// Frobenius norm of the leakage part.
pub fn leakage_norm(m: &Operator, code: &CodeSubspace) -> Result<f64> {
    Ok(op_norm(&decompose(m, code)?.l_part, NormKind::Frobenius))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorClass {
    E,
    EPerp,
    L,
    Mixed,
    /// All three parts vanish (the zero operator).
    Null,
}

impl OperatorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatorClass::E => "E",
            OperatorClass::EPerp => "Eperp",
            OperatorClass::L => "L",
            OperatorClass::Mixed => "mixed",
            OperatorClass::Null => "null",
        }
    }
}

impl fmt::Display for OperatorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(m: &Operator, code: &CodeSubspace) -> Result<OperatorClass> {
    Ok(decompose(m, code)?.class())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PauliClassRow {
    pub pauli_string: String,
    pub class: OperatorClass,
    pub e_norm: f64,
    pub eperp_norm: f64,
    pub l_norm: f64,
}

/// Classifies all `4^n` Pauli strings against `code`.
pub fn classify_pauli_strings(n_qubits: usize, code: &CodeSubspace) -> Result<Vec<PauliClassRow>> {
    if n_qubits == 0 || code.ambient_dim() != 1 << n_qubits {
        return Err(LeoError::DimensionMismatch {
            expected: code.ambient_dim(),
            found: 1usize.checked_shl(n_qubits as u32).unwrap_or(0),
        });
    }
    all_pauli_labels(n_qubits)
        .into_iter()
        .map(|label| {
            let dec = decompose(&pauli_string(&label)?, code)?;
            let (e_norm, eperp_norm, l_norm) = dec.norms();
            Ok(PauliClassRow {
                class: dec.class(),
                pauli_string: label,
                e_norm,
                eperp_norm,
                l_norm,
            })
        })
        .collect()
}

/// CSV with header `pauli_string,class,e_norm,eperp_norm,l_norm`.
pub fn write_pauli_table_csv<W: Write>(rows: &[PauliClassRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "pauli_string,class,e_norm,eperp_norm,l_norm")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e}",
            r.pauli_string, r.class, r.e_norm, r.eperp_norm, r.l_norm
        )?;
    }
    Ok(())
}
