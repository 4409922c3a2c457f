// SPDX-License-Identifier: Apache-2.0

//! Encryption algebra on a single `d`-level particle.
//!
//! The encryptor is diagonal in the Fourier basis `|ℓ_F⟩ = F|ℓ⟩`, with phase
//! `e^{iφ_ℓ}`, `φ_ℓ = 2πκ_ℓ/(m+1)`, on `|ℓ_F⟩` for `ℓ ≥ 1` and 1 on `|0_F⟩`.
//! It is applied identically to every particle, so it commutes with any
//! operation that only touches the spatial modes.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{lift_unchecked, FockBasis, Operator, StateVector, Structure};
use crate::linalg::{kron, kron_power, CMatrix, CVector, C64, ONE};

fn check_levels(d: usize) -> Result<()> {
    if d < 2 {
        return Err(invalid(format!("level count d must be at least 2, got {d}")));
    }
    Ok(())
}

/// Discrete Fourier transform `F = Σ (1/√d) e^{2πiαβ/d} |β⟩⟨α|`.
pub fn fourier_matrix(d: usize) -> Result<CMatrix> {
    check_levels(d)?;
    let scale = 1.0 / (d as f64).sqrt();
    Ok(CMatrix::from_fn(d, d, |beta, alpha| {
        let phase = 2.0 * PI * ((alpha * beta) % d) as f64 / d as f64;
        C64::from_polar(scale, phase)
    }))
}

/// Cyclic shift `L|α⟩ = |α+1 mod d⟩`.
pub fn shift_operator(d: usize) -> Result<CMatrix> {
    check_levels(d)?;
    let mut l = CMatrix::zeros(d, d);
    for alpha in 0..d {
        l[((alpha + 1) % d, alpha)] = ONE;
    }
    Ok(l)
}

/// `L^k` for any integer `k`.
fn shift_power(d: usize, k: i64) -> CMatrix {
    let shift = k.rem_euclid(d as i64) as usize;
    let mut l = CMatrix::zeros(d, d);
    for alpha in 0..d {
        l[((alpha + shift) % d, alpha)] = ONE;
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    /// `(L^k + L^{−k}) / 2`
    Cosine,
    /// `−(L^k − L^{−k}) / 2i`
    Sine,
}

/// Hermitian generators built from shift powers, `1 ≤ k ≤ ⌊d/2⌋`.
pub fn delta_operator(d: usize, k: usize, kind: DeltaKind) -> Result<CMatrix> {
    check_levels(d)?;
    if k == 0 || k > d / 2 {
        return Err(invalid(format!("k = {k} outside 1..={}", d / 2)));
    }
    let forward = shift_power(d, k as i64);
    let backward = shift_power(d, -(k as i64));
    Ok(match kind {
        DeltaKind::Cosine => (forward + backward) * C64::new(0.5, 0.0),
        // −(A − B)/(2i) = (A − B)·i/2
        DeltaKind::Sine => (forward - backward) * C64::new(0.0, 0.5),
    })
}

/// `η_ℓ = ((1 + (−1)^d)/2)·cos(ℓπ)`, which is `(−1)^ℓ` for even `d` and 0 otherwise.
pub fn eta(d: usize, l: usize) -> f64 {
    if d.is_multiple_of(2) {
        if l.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    } else {
        0.0
    }
}

/// `Ĥ_ℓ` assembled from the `Δ̂` generators:
///
/// ```text
/// Ĥ_ℓ = (1/d)(I − η_ℓ Δ̂_{⌊d/2⌋} + Σ_k 2c_ℓ(k) Δ̂_k + 2s_ℓ(k) Δ̂_{k+⌊d/2⌋})
/// ```
///
/// which is the Fourier-basis projector `|ℓ_F⟩⟨ℓ_F|`.
pub fn h_operator(d: usize, l: usize) -> Result<CMatrix> {
    check_levels(d)?;
    if l >= d {
        return Err(invalid(format!("ℓ = {l} outside 0..{d}")));
    }
    let half = d / 2;
    let mut h = CMatrix::identity(d, d);
    h -= delta_operator(d, half, DeltaKind::Cosine)? * C64::new(eta(d, l), 0.0);
    for k in 1..=half {
        let angle = 2.0 * PI * ((l * k) % d) as f64 / d as f64;
        h += delta_operator(d, k, DeltaKind::Cosine)? * C64::new(2.0 * angle.cos(), 0.0);
        h += delta_operator(d, k, DeltaKind::Sine)? * C64::new(2.0 * angle.sin(), 0.0);
    }
    Ok(h / C64::new(d as f64, 0.0))
}

/// Secret key `κ = (κ_1, …, κ_{d−1})`, each entry in `0..=m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawKey")]
pub struct Key {
    m: usize,
    d: usize,
    kappa: Vec<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKey {
    m: usize,
    d: usize,
    kappa: Vec<usize>,
}

impl TryFrom<RawKey> for Key {
    type Error = Error;

    fn try_from(raw: RawKey) -> Result<Self> {
        Key::new(raw.m, raw.d, raw.kappa)
    }
}

impl Key {
    pub fn new(m: usize, d: usize, kappa: Vec<usize>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("particle count m must be at least 1"));
        }
        check_levels(d)?;
        if kappa.len() != d - 1 {
            return Err(invalid(format!(
                "key for d = {d} needs {} entries, got {}",
                d - 1,
                kappa.len()
            )));
        }
        if let Some((l, &k)) = kappa.iter().enumerate().find(|(_, &k)| k > m) {
            return Err(invalid(format!("κ_{} = {k} outside 0..={m}", l + 1)));
        }
        Ok(Self { m, d, kappa })
    }

    pub fn zero(m: usize, d: usize) -> Result<Self> {
        Self::new(m, d, vec![0; d.saturating_sub(1)])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `κ_1, …, κ_{d−1}`
    pub fn kappa(&self) -> &[usize] {
        &self.kappa
    }

    /// Entry-wise `(κ + κ') mod (m+1)`.
    pub fn combine(&self, other: &Key) -> Result<Key> {
        if (self.m, self.d) != (other.m, other.d) {
            return Err(invalid("keys with different (m, d)"));
        }
        let kappa = self
            .kappa
            .iter()
            .zip(&other.kappa)
            .map(|(a, b)| (a + b) % (self.m + 1))
            .collect();
        Key::new(self.m, self.d, kappa)
    }

    /// All `(m+1)^{d−1}` keys in lexicographic order.
    pub fn all(m: usize, d: usize) -> Result<Vec<Key>> {
        let mut keys = vec![Key::zero(m, d)?];
        for slot in 0..d - 1 {
            keys = keys
                .into_iter()
                .flat_map(|k| {
                    (0..=m).map(move |v| {
                        let mut kappa = k.kappa.clone();
                        kappa[slot] = v;
                        Key { kappa, ..k.clone() }
                    })
                })
                .collect();
        }
        Ok(keys)
    }
}

/// Uniform integer in `0..n` by rejection on raw 64-bit output.
fn uniform_below(rng: &mut ChaCha20Rng, n: u64) -> u64 {
    let zone = (u64::MAX / n) * n;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

/// Draw each `κ_ℓ` uniformly on `0..=m` from ChaCha20 seeded with `seed`.
pub fn keygen(m: usize, d: usize, seed: u64) -> Result<Key> {
    if m == 0 {
        return Err(invalid("particle count m must be at least 1"));
    }
    check_levels(d)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let kappa = (1..d)
        .map(|_| uniform_below(&mut rng, m as u64 + 1) as usize)
        .collect();
    Key::new(m, d, kappa)
}

/// `E_ℓ = exp(i·2π/(m+1)·Ĥ_ℓ) = I + (e^{2πi/(m+1)} − 1)Ĥ_ℓ`.
pub fn elementary_encryptor(m: usize, d: usize, l: usize) -> Result<CMatrix> {
    let h = h_operator(d, l)?;
    let phase = C64::from_polar(1.0, 2.0 * PI / (m + 1) as f64) - ONE;
    Ok(CMatrix::identity(d, d) + h * phase)
}

/// Per-particle encryption unitary for a key.
#[derive(Debug, Clone)]
pub struct Encryptor {
    m: usize,
    d: usize,
    phases: Vec<f64>,
    matrix: CMatrix,
}

impl Encryptor {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `φ_1, …, φ_{d−1}`
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// The `d × d` unitary `E`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `I_m ⊗ E` on the `m·d` single-particle modes.
    pub fn single_particle(&self) -> CMatrix {
        kron(&CMatrix::identity(self.m, self.m), &self.matrix)
    }

    /// `E^{⊗m}` on the `d^m` site basis.
    pub fn on_sites(&self) -> CMatrix {
        kron_power(&self.matrix, self.m)
    }

    /// Fock-space lift of `I_m ⊗ E`.
    pub fn fock_operator(&self, basis: &FockBasis) -> Result<Operator> {
        self.check_basis(basis)?;
        Operator::new(
            lift_unchecked(&self.single_particle(), basis),
            Structure::InternalOnly,
        )
    }

    fn check_basis(&self, basis: &FockBasis) -> Result<()> {
        let layout = basis.require_layout("encryption")?;
        if layout.internal != self.d {
            return Err(Error::DimensionMismatch {
                what: "internal levels d",
                expected: self.d,
                found: layout.internal,
            });
        }
        if layout.spatial != self.m {
            return Err(Error::DimensionMismatch {
                what: "spatial modes m",
                expected: self.m,
                found: layout.spatial,
            });
        }
        Ok(())
    }
}

/// Assemble `E = Σ_ℓ e^{iφ_ℓ} Ĥ_ℓ` with `φ_0 = 0`.
pub fn build_encryptor(key: &Key) -> Result<Encryptor> {
    let (m, d) = (key.m, key.d);
    let phases: Vec<f64> = key
        .kappa
        .iter()
        .map(|&k| 2.0 * PI * k as f64 / (m + 1) as f64)
        .collect();
    let mut matrix = h_operator(d, 0)?;
    for (l, &phi) in phases.iter().enumerate() {
        matrix += h_operator(d, l + 1)? * C64::from_polar(1.0, phi);
    }
    Ok(Encryptor {
        m,
        d,
        phases,
        matrix,
    })
}

fn check_state_against_key(state: &StateVector, key: &Key) -> Result<()> {
    let layout = state.basis().require_layout("encryption")?;
    if layout.internal != key.d {
        return Err(Error::DimensionMismatch {
            what: "internal levels d",
            expected: key.d,
            found: layout.internal,
        });
    }
    if layout.spatial != key.m {
        return Err(Error::DimensionMismatch {
            what: "spatial modes m",
            expected: key.m,
            found: layout.spatial,
        });
    }
    Ok(())
}

/// Apply `I_m ⊗ E` to a Fock state.
pub fn encrypt(state: &StateVector, key: &Key) -> Result<StateVector> {
    check_state_against_key(state, key)?;
    let op = build_encryptor(key)?.fock_operator(state.basis())?;
    state.apply(&op)
}

/// Apply `I_m ⊗ E†` to a Fock state.
pub fn decrypt(state: &StateVector, key: &Key) -> Result<StateVector> {
    check_state_against_key(state, key)?;
    let op = build_encryptor(key)?.fock_operator(state.basis())?.adjoint();
    state.apply(&op)
}

/// Apply `E^{⊗m}` to a vector on the `d^m` site basis.
pub fn encrypt_sites(sites: &CVector, key: &Key) -> Result<CVector> {
    let enc = build_encryptor(key)?;
    let dim = key.d.pow(key.m as u32);
    if sites.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "site vector",
            expected: dim,
            found: sites.len(),
        });
    }
    Ok(enc.on_sites() * sites)
}

/// Apply `E†^{⊗m}` to a vector on the `d^m` site basis.
pub fn decrypt_sites(sites: &CVector, key: &Key) -> Result<CVector> {
    let enc = build_encryptor(key)?;
    let dim = key.d.pow(key.m as u32);
    if sites.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "site vector",
            expected: dim,
            found: sites.len(),
        });
    }
    Ok(enc.on_sites().adjoint() * sites)
}

/// Shared handle to a Fock basis for the `(m, d)` of a key.
pub fn basis_for_key(key: &Key, max_dim: usize) -> Result<Arc<FockBasis>> {
    FockBasis::for_scheme(key.m, key.d, max_dim).map(Arc::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{plaintext_to_fock, DEFAULT_MAX_DIM};
    use crate::linalg::{max_abs_diff, unitarity_deviation, ZERO};

    fn zero_matrix(d: usize) -> CMatrix {
        CMatrix::from_element(d, d, ZERO)
    }

    fn projector_oracle(d: usize, l: usize) -> CMatrix {
        let f = fourier_matrix(d).unwrap();
        let col = f.column(l).into_owned();
        &col * col.adjoint()
    }

    #[test]
    fn two_point_fourier() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = fourier_matrix(2).unwrap();
        let expected = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
        );
        assert!(max_abs_diff(&f, &expected) < 1e-15);
        assert!(fourier_matrix(1).is_err());
    }

    #[test]
    fn fourier_is_unitary_and_order_four() {
        for d in 2..=8 {
            assert!(unitarity_deviation(&fourier_matrix(d).unwrap()) < 1e-12);
        }
        let f = fourier_matrix(4).unwrap();
        let f4 = &f * &f * &f * &f;
        assert!(max_abs_diff(&f4, &CMatrix::identity(4, 4)) < 1e-10);
    }

    #[test]
    fn shift_wraps_and_has_order_d() {
        let l = shift_operator(3).unwrap();
        assert_eq!(l[(0, 2)], ONE);
        for d in 2..=6 {
            let l = shift_operator(d).unwrap();
            let mut p = CMatrix::identity(d, d);
            for _ in 0..d {
                p = &l * p;
            }
            assert!(max_abs_diff(&p, &CMatrix::identity(d, d)) < 1e-15);
        }
        assert!(shift_operator(1).is_err());
    }

    #[test]
    fn shift_is_diagonal_in_fourier_basis() {
        // L F|α⟩ = e^{−2πiα/d} F|α⟩ under the +2πi DFT convention
        for d in 2..=6 {
            let f = fourier_matrix(d).unwrap();
            let diag = f.adjoint() * shift_operator(d).unwrap() * &f;
            for r in 0..d {
                for c in 0..d {
                    let expected = if r == c {
                        C64::from_polar(1.0, -2.0 * PI * r as f64 / d as f64)
                    } else {
                        ZERO
                    };
                    assert!((diag[(r, c)] - expected).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn delta_examples() {
        let l = shift_operator(2).unwrap();
        let c = delta_operator(2, 1, DeltaKind::Cosine).unwrap();
        assert!(max_abs_diff(&c, &l) < 1e-15);
        let s = delta_operator(2, 1, DeltaKind::Sine).unwrap();
        assert!(max_abs_diff(&s, &zero_matrix(2)) < 1e-15);

        let f = fourier_matrix(3).unwrap();
        let c3 = f.adjoint() * delta_operator(3, 1, DeltaKind::Cosine).unwrap() * &f;
        for (i, v) in [1.0, -0.5, -0.5].iter().enumerate() {
            assert!((c3[(i, i)] - C64::new(*v, 0.0)).norm() < 1e-12);
        }
        assert!(delta_operator(3, 2, DeltaKind::Cosine).is_err());
        assert!(delta_operator(3, 0, DeltaKind::Sine).is_err());
    }

    #[test]
    fn deltas_are_hermitian_and_fourier_diagonal() {
        for d in 2..=7 {
            let f = fourier_matrix(d).unwrap();
            for k in 1..=d / 2 {
                for kind in [DeltaKind::Cosine, DeltaKind::Sine] {
                    let delta = delta_operator(d, k, kind).unwrap();
                    assert!(max_abs_diff(&delta, &delta.adjoint()) < 1e-15);
                    let diag = f.adjoint() * &delta * &f;
                    for a in 0..d {
                        let angle = 2.0 * PI * (a * k) as f64 / d as f64;
                        let expected = match kind {
                            DeltaKind::Cosine => angle.cos(),
                            DeltaKind::Sine => angle.sin(),
                        };
                        assert!((diag[(a, a)] - C64::new(expected, 0.0)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn eta_values() {
        for l in 0..3 {
            assert_eq!(eta(3, l), 0.0);
        }
        assert_eq!(eta(2, 1), -1.0);
        assert_eq!(eta(4, 2), 1.0);
    }

    #[test]
    fn h_is_fourier_projector() {
        for d in 2..=6 {
            for l in 0..d {
                let h = h_operator(d, l).unwrap();
                assert!(max_abs_diff(&h, &projector_oracle(d, l)) < 1e-10, "d={d} l={l}");
            }
        }
        assert!(h_operator(3, 3).is_err());
    }

    #[test]
    fn projectors_are_complete_and_orthogonal() {
        for d in 2..=6 {
            let hs: Vec<_> = (0..d).map(|l| h_operator(d, l).unwrap()).collect();
            let sum = hs.iter().fold(CMatrix::zeros(d, d), |acc, h| acc + h);
            assert!(max_abs_diff(&sum, &CMatrix::identity(d, d)) < 1e-10);
            for (i, a) in hs.iter().enumerate() {
                for (j, b) in hs.iter().enumerate() {
                    let expected = if i == j { a.clone() } else { zero_matrix(d) };
                    assert!(max_abs_diff(&(a * b), &expected) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn keygen_range_and_determinism() {
        for seed in 0..50 {
            let k = keygen(3, 2, seed).unwrap();
            assert_eq!(k.kappa().len(), 1);
            assert!(k.kappa()[0] <= 3);
            assert_eq!(k, keygen(3, 2, seed).unwrap());
        }
        assert!(keygen(0, 2, 1).is_err());
        assert!(keygen(2, 1, 1).is_err());
    }

    #[test]
    fn keygen_is_uniform() {
        // chi-square over 10^5 draws of κ_1 ∈ {0..4}, 4 degrees of freedom
        let (m, draws) = (4usize, 100_000u64);
        let mut counts = vec![0f64; m + 1];
        for seed in 0..draws {
            counts[keygen(m, 2, seed).unwrap().kappa()[0]] += 1.0;
        }
        let expected = draws as f64 / (m + 1) as f64;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // 99.9th percentile of χ²_4 is 18.47
        assert!(chi2 < 18.47, "chi2 = {chi2}, counts = {counts:?}");
        let sigma = (draws as f64 * (1.0 / 5.0) * (4.0 / 5.0)).sqrt();
        for c in &counts {
            assert!((c - expected).abs() < 3.0 * sigma + 1.0);
        }
    }

    #[test]
    fn key_validation_and_serialization() {
        assert!(Key::new(2, 3, vec![0, 3]).is_err());
        assert!(Key::new(2, 3, vec![0]).is_err());
        let k = Key::new(2, 3, vec![1, 2]).unwrap();
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(json, r#"{"m":2,"d":3,"kappa":[1,2]}"#);
        assert_eq!(serde_json::from_str::<Key>(&json).unwrap(), k);
        assert!(serde_json::from_str::<Key>(r#"{"m":2,"d":3,"kappa":[1,2],"x":1}"#).is_err());
        assert!(serde_json::from_str::<Key>(r#"{"m":2,"d":3,"kappa":[1,5]}"#).is_err());
    }

    #[test]
    fn enumerate_all_keys() {
        let keys = Key::all(2, 3).unwrap();
        assert_eq!(keys.len(), 9);
        let unique: std::collections::HashSet<_> = keys.iter().map(|k| k.kappa().to_vec()).collect();
        assert_eq!(unique.len(), 9);
    }

    #[test]
    fn encryptor_examples() {
        let e = build_encryptor(&Key::zero(3, 4).unwrap()).unwrap();
        assert!(max_abs_diff(e.matrix(), &CMatrix::identity(4, 4)) < 1e-12);

        for (m, d) in [(1, 2), (2, 3), (3, 4), (4, 5)] {
            for l in 0..d {
                let el = elementary_encryptor(m, d, l).unwrap();
                let mut p = CMatrix::identity(d, d);
                for _ in 0..=m {
                    p = &el * p;
                }
                assert!(max_abs_diff(&p, &CMatrix::identity(d, d)) < 1e-10);
            }
        }

        // Fourier-basis reflection, which for d = 2 is the Pauli X matrix
        let e = build_encryptor(&Key::new(1, 2, vec![1]).unwrap()).unwrap();
        let h1 = projector_oracle(2, 1);
        let expected = CMatrix::identity(2, 2) - h1 * C64::new(2.0, 0.0);
        assert!(max_abs_diff(e.matrix(), &expected) < 1e-12);
        assert!(max_abs_diff(e.matrix(), &shift_operator(2).unwrap()) < 1e-12);
    }

    #[test]
    fn encryptor_matches_matrix_exponential() {
        for (m, d) in [(1, 2), (2, 3), (3, 3), (2, 5)] {
            for key in Key::all(m, d).unwrap().into_iter().take(12) {
                let e = build_encryptor(&key).unwrap();
                assert!(unitarity_deviation(e.matrix()) < 1e-12);
                let mut generator = CMatrix::zeros(d, d);
                let mut product = CMatrix::identity(d, d);
                for (l, &phi) in e.phases().iter().enumerate() {
                    let h = projector_oracle(d, l + 1);
                    generator += &h * C64::new(0.0, phi);
                    let step = (&h * C64::new(0.0, 2.0 * PI / (m + 1) as f64)).exp();
                    for _ in 0..key.kappa()[l] {
                        product = &step * product;
                    }
                }
                assert!(max_abs_diff(e.matrix(), &generator.exp()) < 1e-10);
                assert!(max_abs_diff(e.matrix(), &product) < 1e-10);
            }
        }
    }

    #[test]
    fn encrypt_single_particle_flip() {
        let key = Key::new(1, 2, vec![1]).unwrap();
        let basis = basis_for_key(&key, DEFAULT_MAX_DIM).unwrap();
        let psi = plaintext_to_fock(&[0], &basis).unwrap();
        let out = encrypt(&psi, &key).unwrap();
        assert!((out.amplitude(&[1, 0]).unwrap()).norm() < 1e-12);
        assert!((out.amplitude(&[0, 1]).unwrap() - ONE).norm() < 1e-12);
        let back = decrypt(&out, &key).unwrap();
        assert!((back.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn encrypt_rejects_mismatched_key() {
        let key = Key::new(2, 3, vec![1, 1]).unwrap();
        let basis = Arc::new(FockBasis::for_scheme(2, 2, DEFAULT_MAX_DIM).unwrap());
        let psi = plaintext_to_fock(&[0, 1], &basis).unwrap();
        assert!(matches!(encrypt(&psi, &key), Err(Error::DimensionMismatch { .. })));
        assert!(encrypt_sites(&CVector::zeros(3), &key).is_err());
    }
}
