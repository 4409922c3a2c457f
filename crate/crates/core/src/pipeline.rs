// SPDX-License-Identifier: Apache-2.0

//! Encrypt → evaluate → decrypt, next to plain evaluation.

use std::sync::Arc;

use crate::crypto::{build_encryptor, Key};
use crate::error::{Error, Result};
use crate::evaluate::{circuit_to_unitary, spatial_operator, Circuit};
use crate::fock::{plaintext_to_fock, FockBasis, Operator, StateVector};

/// Fidelity threshold below which a run counts as a failure.
pub const DEFAULT_FIDELITY_TOL: f64 = 1e-9;

/// Many-body operators for one `(key, circuit)` pair on a shared basis.
#[derive(Debug, Clone)]
pub struct Pipeline {
    basis: Arc<FockBasis>,
    encrypt: Operator,
    decrypt: Operator,
    evaluate: Operator,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    /// `decrypt(evaluate(encrypt(ψ)))`
    pub homomorphic: StateVector,
    /// `evaluate(ψ)`
    pub plain: StateVector,
    /// `|⟨plain|homomorphic⟩|`
    pub fidelity: f64,
}

impl Pipeline {
    pub fn new(basis: Arc<FockBasis>, key: &Key, circuit: &Circuit) -> Result<Self> {
        if circuit.m() != key.m() {
            return Err(Error::DimensionMismatch {
                what: "circuit modes vs key m",
                expected: key.m(),
                found: circuit.m(),
            });
        }
        let encrypt = build_encryptor(key)?.fock_operator(&basis)?;
        let decrypt = encrypt.adjoint();
        let evaluate = spatial_operator(&circuit_to_unitary(circuit)?, &basis)?;
        Ok(Self {
            basis,
            encrypt,
            decrypt,
            evaluate,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn encrypt_op(&self) -> &Operator {
        &self.encrypt
    }

    pub fn evaluate_op(&self) -> &Operator {
        &self.evaluate
    }

    pub fn run_state(&self, state: &StateVector) -> Result<PipelineOutcome> {
        let cipher = state.apply(&self.encrypt)?;
        let evaluated = cipher.apply(&self.evaluate)?;
        let homomorphic = evaluated.apply(&self.decrypt)?;
        let plain = state.apply(&self.evaluate)?;
        let fidelity = homomorphic.fidelity(&plain)?;
        Ok(PipelineOutcome {
            homomorphic,
            plain,
            fidelity,
        })
    }

    pub fn run(&self, alpha: &[usize]) -> Result<PipelineOutcome> {
        self.run_state(&plaintext_to_fock(alpha, &self.basis)?)
    }

    /// `decrypt(evaluate(ψ))` against `evaluate(decrypt(ψ))` for an already
    /// encrypted state.
    pub fn order_swap_fidelity(&self, cipher: &StateVector) -> Result<f64> {
        let a = cipher.apply(&self.evaluate)?.apply(&self.decrypt)?;
        let b = cipher.apply(&self.decrypt)?.apply(&self.evaluate)?;
        a.fidelity(&b)
    }
}

/// One-shot pipeline on plaintext `alpha`.
pub fn run_pipeline(alpha: &[usize], circuit: &Circuit, key: &Key, max_dim: usize) -> Result<PipelineOutcome> {
    if alpha.len() != key.m() {
        return Err(Error::DimensionMismatch {
            what: "plaintext length vs key m",
            expected: key.m(),
            found: alpha.len(),
        });
    }
    let basis = Arc::new(FockBasis::for_scheme(key.m(), key.d(), max_dim)?);
    Pipeline::new(basis, key, circuit)?.run(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::keygen;
    use crate::fock::DEFAULT_MAX_DIM;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_key_is_trivially_homomorphic() {
        let key = Key::zero(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let circ = Circuit::random(2, 5, &mut rng);
        let out = run_pipeline(&[2, 1], &circ, &key, DEFAULT_MAX_DIM).unwrap();
        assert!((out.fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_keys_commute_with_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..5 {
            let key = keygen(3, 2, seed).unwrap();
            let circ = Circuit::random(3, 8, &mut rng);
            let basis = Arc::new(FockBasis::for_scheme(3, 2, DEFAULT_MAX_DIM).unwrap());
            let p = Pipeline::new(Arc::clone(&basis), &key, &circ).unwrap();
            let out = p.run(&[1, 0, 1]).unwrap();
            assert!(out.fidelity >= 1.0 - 1e-9);
            let cipher = plaintext_to_fock(&[0, 1, 1], &basis).unwrap().apply(p.encrypt_op()).unwrap();
            assert!(p.order_swap_fidelity(&cipher).unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let key = Key::zero(2, 2).unwrap();
        let circ = Circuit::empty(3);
        assert!(run_pipeline(&[0, 0], &circ, &key, DEFAULT_MAX_DIM).is_err());
        assert!(run_pipeline(&[0, 0, 0], &Circuit::empty(2), &key, DEFAULT_MAX_DIM).is_err());
    }
}
