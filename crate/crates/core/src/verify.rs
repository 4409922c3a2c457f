// SPDX-License-Identifier: Apache-2.0

//! Invariant checks re-run on demand before results are emitted.
//!
//! Each check returns [`Error::Verification`] with the violated quantity on
//! failure. They are cheap at the sizes the CLI targets.

use std::sync::Arc;

use crate::crypto::{build_encryptor, elementary_encryptor, fourier_matrix, h_operator, shift_operator, Key};
use crate::error::{Error, Result};
use crate::evaluate::{circuit_to_unitary, spatial_operator, Circuit, SpatialUnitary};
use crate::fock::FockBasis;
use crate::linalg::{commutator, frobenius_diff, max_abs, max_abs_diff, unitarity_deviation, CMatrix};
use crate::pipeline::Pipeline;
use crate::secinfo::{
    average_state, block_entropy, rho_alpha_closed_form, rho_alpha_key_average, site_digits, von_neumann_entropy,
    AnalysisReport, Caps, DensityMatrix, Prior, Tolerances,
};

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Verification(what()))
    }
}

/// Projector assembly, `E_ℓ^{m+1} = I`, unitarity of `E` and `[E, L] = 0`.
pub fn verify_key(key: &Key) -> Result<()> {
    let (m, d) = (key.m(), key.d());
    let f = fourier_matrix(d)?;
    for l in 0..d {
        let col = f.column(l).into_owned();
        let err = max_abs_diff(&h_operator(d, l)?, &(&col * col.adjoint()));
        ensure(err <= 1e-10, || format!("Ĥ_{l} differs from F|{l}⟩⟨{l}|F† by {err:e}"))?;
        let el = elementary_encryptor(m, d, l)?;
        let mut p = CMatrix::identity(d, d);
        for _ in 0..=m {
            p = &el * p;
        }
        let err = max_abs_diff(&p, &CMatrix::identity(d, d));
        ensure(err <= 1e-10, || format!("E_{l}^(m+1) differs from I by {err:e}"))?;
    }
    let e = build_encryptor(key)?;
    let dev = unitarity_deviation(e.matrix());
    ensure(dev <= 1e-12, || format!("E is not unitary ({dev:e})"))?;
    let comm = max_abs(&commutator(e.matrix(), &shift_operator(d)?));
    ensure(comm <= 1e-10, || format!("[E, L] = {comm:e}"))?;
    Ok(())
}

/// Homomorphic property and commutation of the lifted operators.
pub fn verify_pipeline(basis: &Arc<FockBasis>, key: &Key, circuit: &Circuit, tol: f64) -> Result<()> {
    verify_key(key)?;
    let p = Pipeline::new(Arc::clone(basis), key, circuit)?;
    let comm = max_abs(&commutator(p.encrypt_op().matrix(), p.evaluate_op().matrix()));
    ensure(comm <= 1e-8, || format!("lifted E and U do not commute ({comm:e})"))?;
    let dev = unitarity_deviation(p.evaluate_op().matrix());
    ensure(dev <= 1e-9, || format!("lifted circuit is not unitary ({dev:e})"))?;
    for (i, state) in basis.states().iter().enumerate() {
        // plaintext inputs: one boson per spatial mode
        let layout = basis.require_layout("verification")?;
        let per_site = state
            .occupations()
            .chunks(layout.internal)
            .all(|c| c.iter().sum::<u32>() == 1);
        if !per_site {
            continue;
        }
        let psi = crate::fock::StateVector::basis_state(Arc::clone(basis), state.occupations())?;
        let f = p.run_state(&psi)?.fidelity;
        ensure(f >= 1.0 - tol, || format!("basis state {i}: fidelity {f} < 1 − {tol:e}"))?;
    }
    Ok(())
}

/// Lift of the circuit is unitary.
pub fn verify_circuit(basis: &FockBasis, circuit: &Circuit) -> Result<()> {
    let u = circuit_to_unitary(circuit)?;
    let dev = unitarity_deviation(u.matrix());
    ensure(dev <= 1e-9, || format!("circuit unitary deviates by {dev:e}"))?;
    let op = spatial_operator(&u, basis)?;
    let dev = unitarity_deviation(op.matrix());
    ensure(dev <= 1e-9, || format!("lifted circuit deviates by {dev:e}"))
}

/// Reck output recompiles to the input.
pub fn verify_reck(u: &SpatialUnitary, circuit: &Circuit, tol: f64) -> Result<()> {
    let back = circuit_to_unitary(circuit)?;
    let err = frobenius_diff(back.matrix(), u.matrix());
    ensure(err <= tol, || format!("Reck reconstruction error {err:e} > {tol:e}"))?;
    let m = u.m();
    ensure(circuit.beam_splitter_count() <= m * (m - 1) / 2, || {
        format!("{} beam splitters exceed m(m−1)/2", circuit.beam_splitter_count())
    })
}

/// Dual construction of every `ρ_α`, the entropy formula, the maximally mixed
/// uniform mixture and the bound chain of the report.
pub fn verify_analysis(report: &AnalysisReport, caps: &Caps, tol: &Tolerances) -> Result<()> {
    let (m, d) = (report.m, report.d);
    report.check().map_err(|e| Error::Verification(e.to_string()))?;
    let h = block_entropy(m, d)?;
    let dim = d.pow(m as u32);
    for i in 0..dim {
        let alpha = site_digits(i, m, d);
        let closed = rho_alpha_closed_form(&alpha, m, d, caps)?;
        let averaged = rho_alpha_key_average(&alpha, m, d, caps)?;
        let err = closed.max_abs_diff(&averaged);
        ensure(err <= 1e-10, || format!("ρ_{alpha:?}: constructions differ by {err:e}"))?;
        let s = von_neumann_entropy(&closed, tol)?;
        ensure((s - h).abs() <= 1e-8, || format!("S(ρ_{alpha:?}) = {s}, H = {h}"))?;
    }
    let mixed = average_state(&Prior::Uniform, m, d, caps)?;
    let err = mixed.max_abs_diff(&DensityMatrix::maximally_mixed(dim));
    ensure(err <= 1e-10, || format!("uniform mixture differs from I/d^m by {err:e}"))
}
