//! Flow-level verification of splitting programs.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::min_symmetric_eigenvalue;
use crate::program::{Provenance, SplitStep, SplittingProgram};
use crate::scalar::{lit, real_part, to_f64, Real};
use crate::symplectic::{affine_flow, Coordinates, FlowMatrix};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockResiduals {
    pub linear: f64,
    pub column: f64,
    pub shift: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorCheck {
    pub index: usize,
    pub kind: String,
    /// Whether the real part of the homogenized factor symbol is positive semidefinite.
    pub dissipative: bool,
    /// Smallest eigenvalue of `M̄ᵀ(−iJ)M − (−iJ)` for the homogenized factor flow.
    pub sp_plus_margin: f64,
    pub sp_plus_member: bool,
    /// Smallest eigenvalue of the matrix of a Gaussian step.
    pub psd_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub provenance: String,
    pub dim: usize,
    pub t: f64,
    pub steps: usize,
    pub tolerance: f64,
    /// Relative Frobenius residual between the composed factor flows and the target flow.
    pub flow_residual: Option<f64>,
    pub block_residuals: Option<BlockResiduals>,
    pub factors: Vec<FactorCheck>,
    pub min_psd_margin: Option<f64>,
    /// Whether every dissipative factor has a nonnegative symplectic flow.
    pub dissipative_factors_in_sp_plus: bool,
    pub iterations: Option<usize>,
    pub passed: bool,
}

fn provenance_label(p: &Provenance) -> (String, Option<usize>) {
    match p {
        Provenance::Catalog { name } => (name.clone(), None),
        Provenance::Iteration { solver, log } => (solver.clone(), Some(log.len())),
        Provenance::Custom { note } => (note.clone(), None),
    }
}

pub fn verify_program<T: Real>(prog: &SplittingProgram<T>) -> Result<SplitReport> {
    verify_program_with_tolerance(prog, DEFAULT_TOLERANCE)
}

/// Compares the product of the factor flows with the flow of the target and
/// checks each factor: the homogenized flow against the nonnegative symplectic
/// cone, and Gaussian matrices for positivity.
pub fn verify_program_with_tolerance<T: Real>(prog: &SplittingProgram<T>, tolerance: f64) -> Result<SplitReport> {
    let n = prog.dim;
    let eps = lit::<T>(1e-12);
    let mut factors = Vec::with_capacity(prog.steps.len());
    let mut min_psd: Option<f64> = None;
    let mut sp_ok = true;
    for (index, step) in prog.steps.iter().enumerate() {
        let sym = step.symbol(n);
        let h = real_part(sym.homogenize().q());
        let dissipative = min_symmetric_eigenvalue(&h) >= -eps;
        let flow = affine_flow(&sym, T::one())?;
        let dense = FlowMatrix::from_matrix(n + 1, flow.to_dense(Coordinates::Storage))?;
        let check = dense.is_nonneg_symplectic(lit::<T>(1e-10));
        if dissipative && !check.member {
            sp_ok = false;
        }
        let psd_margin = match step {
            SplitStep::GaussianX { b } | SplitStep::GaussianFourier { b } => Some(to_f64(min_symmetric_eigenvalue(b))),
            _ => None,
        };
        if let Some(m) = psd_margin {
            min_psd = Some(min_psd.map_or(m, |x: f64| x.min(m)));
        }
        factors.push(FactorCheck {
            index,
            kind: step.kind().to_string(),
            dissipative,
            sp_plus_margin: to_f64(check.margin),
            sp_plus_member: check.member,
            psd_margin,
        });
    }
    let (flow_residual, block_residuals) = match prog.target_flow()? {
        Some(tf) => {
            let r = prog.flow()?.residual(&tf);
            (
                Some(to_f64(r.relative)),
                Some(BlockResiduals { linear: to_f64(r.linear), column: to_f64(r.column), shift: to_f64(r.shift), phase: to_f64(r.phase) }),
            )
        }
        None => (None, None),
    };
    let (label, iterations) = provenance_label(&prog.provenance);
    let passed = flow_residual.is_none_or(|r| r <= tolerance) && min_psd.is_none_or(|m| m >= -1e-12);
    Ok(SplitReport {
        provenance: label,
        dim: n,
        t: to_f64(prog.t),
        steps: prog.steps.len(),
        tolerance,
        flow_residual,
        block_residuals,
        factors,
        min_psd_margin: min_psd,
        dissipative_factors_in_sp_plus: sp_ok,
        iterations,
        passed,
    })
}
