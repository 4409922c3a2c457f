// SPDX-License-Identifier: Apache-2.0

//! Information-theoretic analysis of the key-averaged ciphertext.
//!
//! Everything here lives on the `d^m` site space: one particle per spatial
//! mode, internal level `α_x` on site `x`, with site 1 the most significant
//! digit of the basis index. Evaluation commutes with encryption, so the
//! information content of the ensemble is fixed at encryption time.
//!
//! In the Fourier frame the key average keeps only those `|β⟩⟨β'|` whose
//! symbol histograms agree. The blocks are labelled by *ordered*
//! compositions `λ = (λ_0, …, λ_{d−1})` of `m`: `λ_j` counts how often
//! symbol `j` occurs, and the block dimension is the multinomial `R_λ`.
//! Unordered integer partitions would not reproduce `Σ_λ R_λ = d^m`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use nalgebra::SymmetricEigen;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::crypto::{build_encryptor, fourier_matrix, Key};
use crate::error::{invalid, Error, Result};
use crate::fock::descending_compositions;
use crate::linalg::{kron_power, CMatrix, CVector, C64, ONE};

/// Default cap on the site-space dimension `d^m`.
pub const DEFAULT_MAX_SITE_DIM: usize = 1024;
/// Default cap on the number of keys averaged explicitly.
pub const DEFAULT_MAX_KEYS: u128 = 1_000_000;
/// Above this particle count multinomials are computed with big integers.
pub const BIG_INTEGER_THRESHOLD: usize = 20;

/// Numerical thresholds used by the density-matrix checks and the entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    /// Eigenvalues below `−psd` are an error.
    pub psd: f64,
    /// Eigenvalues at or below this are treated as exact zeros.
    pub zero_floor: f64,
    /// Allowed violation of `χ ≤ log₂ m!`.
    pub bound_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
            zero_floor: 1e-12,
            bound_slack: 1e-8,
        }
    }
}

/// Limits on the work the analysis will attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_site_dim: usize,
    pub max_keys: u128,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_site_dim: DEFAULT_MAX_SITE_DIM,
            max_keys: DEFAULT_MAX_KEYS,
        }
    }
}

impl Caps {
    fn site_dim(&self, m: usize, d: usize) -> Result<usize> {
        check_md(m, d)?;
        let dim = (d as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
        if dim > self.max_site_dim as u128 {
            return Err(Error::DimensionCap {
                what: "site space d^m",
                dimension: dim,
                cap: self.max_site_dim as u128,
            });
        }
        Ok(dim as usize)
    }

    fn key_count(&self, m: usize, d: usize) -> Result<()> {
        let count = ((m + 1) as u128)
            .checked_pow((d - 1) as u32)
            .unwrap_or(u128::MAX);
        if count > self.max_keys {
            return Err(Error::DimensionCap {
                what: "key count (m+1)^(d-1)",
                dimension: count,
                cap: self.max_keys,
            });
        }
        Ok(())
    }
}

fn check_md(m: usize, d: usize) -> Result<()> {
    if m == 0 {
        return Err(invalid("particle count m must be at least 1"));
    }
    if d < 2 {
        return Err(invalid(format!("level count d must be at least 2, got {d}")));
    }
    Ok(())
}

/// Ordered `d`-tuple of counts summing to `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(invalid("composition needs at least one part"));
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.0.len()
    }
}

/// All compositions of `m` into `d` parts, lexicographically descending.
pub fn compositions(m: usize, d: usize) -> Result<Vec<Composition>> {
    check_md(m, d)?;
    Ok(descending_compositions(m, d)
        .into_iter()
        .map(|v| Composition(v.into_iter().map(|n| n as usize).collect()))
        .collect())
}

/// `m! / ∏ λ_j!` in u64, built as a product of binomials.
pub fn multinomial(lambda: &Composition) -> Result<u64> {
    let mut acc: u128 = 1;
    let mut seen: u128 = 0;
    for &part in &lambda.0 {
        // acc *= C(seen + part, part)
        for i in 1..=part as u128 {
            seen += 1;
            acc = acc
                .checked_mul(seen)
                .ok_or_else(|| Error::MultinomialOverflow(lambda.0.clone()))?
                / i;
        }
    }
    u64::try_from(acc).map_err(|_| Error::MultinomialOverflow(lambda.0.clone()))
}

/// `m! / ∏ λ_j!` with arbitrary precision.
pub fn multinomial_big(lambda: &Composition) -> BigUint {
    let mut acc = BigUint::one();
    let mut seen = 0u64;
    for &part in &lambda.0 {
        for i in 1..=part as u64 {
            seen += 1;
            acc = acc * seen / i;
        }
    }
    acc
}

fn log2_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.log2() + shift as f64
}

/// `log₂ R_λ`, switching to big integers above [`BIG_INTEGER_THRESHOLD`].
pub fn log2_multinomial(lambda: &Composition) -> f64 {
    if lambda.total() <= BIG_INTEGER_THRESHOLD {
        if let Ok(r) = multinomial(lambda) {
            return (r as f64).log2();
        }
    }
    log2_big(&multinomial_big(lambda))
}

/// Number of positions of `beta` equal to `l`.
pub fn lee_weight(beta: &[usize], l: usize) -> usize {
    beta.iter().filter(|&&b| b == l).count()
}

/// Symbol histogram `(wt_0(β), …, wt_{d−1}(β))`.
pub fn histogram(beta: &[usize], d: usize) -> Composition {
    let mut counts = vec![0; d];
    for &b in beta {
        counts[b] += 1;
    }
    Composition(counts)
}

/// Site-basis index of `α`, first site most significant.
pub fn site_index(alpha: &[usize], d: usize) -> usize {
    alpha.iter().fold(0, |acc, &a| acc * d + a)
}

/// Inverse of [`site_index`].
pub fn site_digits(mut index: usize, m: usize, d: usize) -> Vec<usize> {
    let mut digits = vec![0; m];
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    digits
}

fn check_plaintext(alpha: &[usize], m: usize, d: usize) -> Result<()> {
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            what: "plaintext length",
            expected: m,
            found: alpha.len(),
        });
    }
    if let Some(&a) = alpha.iter().find(|&&a| a >= d) {
        return Err(invalid(format!("plaintext symbol {a} outside 0..{d}")));
    }
    Ok(())
}

/// `(1/(m+1)) Σ_{κ=0}^{m} e^{2πiκ(w−w')/(m+1)}`, which is `δ_{w,w'}` for `w, w' ≤ m`.
pub fn key_phase_average(m: usize, w: usize, w_prime: usize) -> C64 {
    let diff = w as f64 - w_prime as f64;
    let sum: C64 = (0..=m)
        .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 * diff / (m + 1) as f64))
        .sum();
    sum / (m + 1) as f64
}

/// `|Ψ_λ^α⟩ = R_λ^{−1/2} Σ_{hist(β)=λ} e^{−2πi α·β/d} |β⟩`, in the Fourier frame.
pub fn psi_lambda(alpha: &[usize], lambda: &Composition, d: usize) -> Result<CVector> {
    let m = alpha.len();
    check_md(m, d)?;
    check_plaintext(alpha, m, d)?;
    if lambda.d() != d || lambda.total() != m {
        return Err(invalid(format!(
            "composition {:?} is not in P_({m},{d})",
            lambda.0
        )));
    }
    let dim = d.pow(m as u32);
    let r = multinomial(lambda)? as f64;
    let scale = 1.0 / r.sqrt();
    let mut psi = CVector::zeros(dim);
    for index in 0..dim {
        let beta = site_digits(index, m, d);
        if histogram(&beta, d) != *lambda {
            continue;
        }
        let dot: usize = alpha.iter().zip(&beta).map(|(a, b)| a * b).sum();
        psi[index] = C64::from_polar(scale, -2.0 * PI * (dot % d) as f64 / d as f64);
    }
    Ok(psi)
}

/// Hermitian, unit-trace, positive semidefinite matrix on the site space.
#[derive(Debug, Clone)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates the matrix against `tol`.
    pub fn new(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let rho = Self(matrix);
        rho.validate(tol)?;
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    pub fn pure(psi: &CVector) -> Self {
        Self(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let adj = self.0.adjoint();
        self.0
            .iter()
            .zip(adj.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !self.0.is_square() {
            return Err(Error::Validation("density matrix must be square".into()));
        }
        let herm = self.hermiticity_error();
        if herm > tol.hermitian {
            return Err(Error::Validation(format!(
                "density matrix not Hermitian: max |ρ − ρ†| = {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > tol.trace {
            return Err(Error::Validation(format!("density matrix trace {tr} ≠ 1")));
        }
        if let Some(&low) = self.eigenvalues().first() {
            if low < -tol.psd {
                return Err(Error::Validation(format!(
                    "density matrix has eigenvalue {low:e} below −{:e}",
                    tol.psd
                )));
            }
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        crate::linalg::max_abs_diff(&self.0, &other.0)
    }
}

/// Key-average of `E^{⊗m}|α⟩⟨α|E†^{⊗m}` over all `(m+1)^{d−1}` keys.
pub fn rho_alpha_key_average(alpha: &[usize], m: usize, d: usize, caps: &Caps) -> Result<DensityMatrix> {
    let dim = caps.site_dim(m, d)?;
    caps.key_count(m, d)?;
    check_plaintext(alpha, m, d)?;
    let keys = Key::all(m, d)?;
    let mut rho = CMatrix::zeros(dim, dim);
    for key in &keys {
        let e = build_encryptor(key)?;
        // E^{⊗m}|α⟩ = ⊗_x E|α_x⟩
        let mut psi = CVector::from_element(1, ONE);
        for &a in alpha {
            let col = e.matrix().column(a).into_owned();
            psi = psi.kronecker(&col);
        }
        rho += &psi * psi.adjoint();
    }
    rho /= C64::new(keys.len() as f64, 0.0);
    Ok(DensityMatrix(rho))
}

/// `Σ_λ (R_λ/d^m)|Ψ_λ^α⟩⟨Ψ_λ^α|` rotated back by `F^{⊗m}` conjugation.
pub fn rho_alpha_closed_form(alpha: &[usize], m: usize, d: usize, caps: &Caps) -> Result<DensityMatrix> {
    let dim = caps.site_dim(m, d)?;
    check_plaintext(alpha, m, d)?;
    let frame = fourier_frame(alpha, m, d, dim)?;
    let f = kron_power(&fourier_matrix(d)?, m);
    Ok(DensityMatrix(&f * frame * f.adjoint()))
}

fn fourier_frame(alpha: &[usize], m: usize, d: usize, dim: usize) -> Result<CMatrix> {
    let mut frame = CMatrix::zeros(dim, dim);
    let total = dim as f64;
    for lambda in compositions(m, d)? {
        let weight = multinomial(&lambda)? as f64 / total;
        let psi = psi_lambda(alpha, &lambda, d)?;
        frame += (&psi * psi.adjoint()) * C64::new(weight, 0.0);
    }
    Ok(frame)
}

/// `−Σ p log₂ p` over positive entries.
pub fn shannon_entropy(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Von Neumann entropy in bits from the eigenvalues, after validation.
pub fn von_neumann_entropy(rho: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    let herm = rho.hermiticity_error();
    if herm > tol.hermitian {
        return Err(Error::Validation(format!(
            "density matrix not Hermitian: max |ρ − ρ†| = {herm:e}"
        )));
    }
    let ev = rho.eigenvalues();
    if let Some(&low) = ev.first() {
        if low < -tol.psd {
            return Err(Error::Validation(format!(
                "density matrix has eigenvalue {low:e} below −{:e}",
                tol.psd
            )));
        }
    }
    Ok(shannon_entropy(ev.into_iter().filter(|&v| v > tol.zero_floor)))
}

/// One ciphertext block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub lambda: Composition,
    #[serde(rename = "R")]
    pub r: u64,
    pub weight: f64,
}

/// `(λ, R_λ, R_λ/d^m)` for every composition.
pub fn block_table(m: usize, d: usize) -> Result<Vec<Block>> {
    let total = (d as f64).powi(m as i32);
    compositions(m, d)?
        .into_iter()
        .map(|lambda| {
            let r = multinomial(&lambda)?;
            Ok(Block {
                weight: r as f64 / total,
                r,
                lambda,
            })
        })
        .collect()
}

/// `H({R_λ/d^m})` in bits, evaluated from the multinomials alone.
pub fn block_entropy(m: usize, d: usize) -> Result<f64> {
    check_md(m, d)?;
    let log_total = m as f64 * (d as f64).log2();
    let mut h = 0.0;
    for lambda in compositions(m, d)? {
        let log_r = log2_multinomial(&lambda);
        let w = (log_r - log_total).exp2();
        h -= w * (log_r - log_total);
    }
    Ok(h)
}

/// `Σ_λ (R_λ/d^m) log₂ R_λ` in bits.
pub fn intermediate_bound(m: usize, d: usize) -> Result<f64> {
    check_md(m, d)?;
    let log_total = m as f64 * (d as f64).log2();
    Ok(compositions(m, d)?
        .iter()
        .map(|lambda| {
            let log_r = log2_multinomial(lambda);
            (log_r - log_total).exp2() * log_r
        })
        .sum())
}

/// `log₂ m!` by direct summation of `log₂ k`.
pub fn log2_factorial(m: usize) -> f64 {
    (2..=m).fold(0.0, |acc, k| acc + (k as f64).log2())
}

/// Exact and asymptotic information gap for `m` particles of `d` levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    /// `m log₂ d − log₂ m!`
    pub exact_bits: f64,
    /// `m log₂(d/m) + m / ln 2`
    pub asymptotic_bits: f64,
    /// `asymptotic − exact`
    pub difference_bits: f64,
}

pub fn gap_estimate(m: usize, d: usize) -> Result<GapEstimate> {
    check_md(m, d)?;
    let (mf, df) = (m as f64, d as f64);
    let exact_bits = mf * df.log2() - log2_factorial(m);
    let asymptotic_bits = mf * (df / mf).log2() + mf / LN_2;
    Ok(GapEstimate {
        exact_bits,
        asymptotic_bits,
        difference_bits: asymptotic_bits - exact_bits,
    })
}

/// A priori distribution over plaintexts.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Uniform,
    /// Sparse weights; absent plaintexts have probability zero.
    Weights(BTreeMap<Vec<usize>, f64>),
}

impl Prior {
    pub fn point(alpha: Vec<usize>) -> Self {
        Prior::Weights(BTreeMap::from([(alpha, 1.0)]))
    }

    /// Random weights over all `d^m` plaintexts, uniform on the simplex.
    pub fn random<R: Rng + ?Sized>(m: usize, d: usize, rng: &mut R) -> Self {
        let dim = d.pow(m as u32);
        let raw: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        Prior::Weights(
            raw.into_iter()
                .enumerate()
                .map(|(i, w)| (site_digits(i, m, d), w / total))
                .collect(),
        )
    }

    /// The support as `(α, p_α)` pairs in site order.
    pub fn support(&self, m: usize, d: usize) -> Result<Vec<(Vec<usize>, f64)>> {
        check_md(m, d)?;
        match self {
            Prior::Uniform => {
                let dim = d.pow(m as u32);
                Ok((0..dim)
                    .map(|i| (site_digits(i, m, d), 1.0 / dim as f64))
                    .collect())
            }
            Prior::Weights(map) => {
                let mut total = 0.0;
                let mut out = Vec::with_capacity(map.len());
                for (alpha, &p) in map {
                    check_plaintext(alpha, m, d)?;
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::Validation(format!(
                            "prior weight {p} for {alpha:?} is not a non-negative number"
                        )));
                    }
                    total += p;
                    if p > 0.0 {
                        out.push((alpha.clone(), p));
                    }
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "prior weights sum to {total}, not 1"
                    )));
                }
                out.sort_by_key(|(a, _)| site_index(a, d));
                Ok(out)
            }
        }
    }
}

fn format_plaintext(alpha: &[usize]) -> String {
    alpha
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl Serialize for Prior {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Prior::Uniform => serializer.serialize_str("uniform"),
            Prior::Weights(map) => {
                let named: BTreeMap<String, f64> = map
                    .iter()
                    .map(|(a, &p)| (format_plaintext(a), p))
                    .collect();
                named.serialize(serializer)
            }
        }
    }
}

impl<'de> Deserialize<'de> for Prior {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Tag(String),
            Map(BTreeMap<String, f64>),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Tag(s) if s == "uniform" => Ok(Prior::Uniform),
            Raw::Tag(s) => Err(serde::de::Error::custom(format!(
                "unknown prior \"{s}\"; expected \"uniform\" or a map"
            ))),
            Raw::Map(map) => {
                let mut weights = BTreeMap::new();
                for (k, p) in map {
                    let alpha = k
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|e| serde::de::Error::custom(format!("plaintext \"{k}\": {e}")))?;
                    weights.insert(alpha, p);
                }
                Ok(Prior::Weights(weights))
            }
        }
    }
}

/// Entropies, Holevo quantity and bounds for one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub m: usize,
    pub d: usize,
    pub blocks: Vec<Block>,
    /// `Σ_α p_α S(ρ_α)`
    #[serde(rename = "S_rho_alpha_bits")]
    pub s_rho_alpha_bits: f64,
    /// `max_α S(ρ_α) − min_α S(ρ_α)` over the support
    #[serde(rename = "S_rho_alpha_spread_bits")]
    pub s_rho_alpha_spread_bits: f64,
    /// `H({R_λ/d^m})`
    #[serde(rename = "block_entropy_bits")]
    pub block_entropy_bits: f64,
    #[serde(rename = "S_rho_bar_bits")]
    pub s_rho_bar_bits: f64,
    pub chi_bits: f64,
    /// `Σ_λ (R_λ/d^m) log₂ R_λ`
    pub intermediate_bound_bits: f64,
    pub bound_log2_mfact_bits: f64,
    /// `m log₂ d − χ`
    pub gap_chi_bits: f64,
    /// `m log₂ d − log₂ m!`
    pub gap_exact_bits: f64,
    pub gap_asymptotic_bits: f64,
    pub prior: Prior,
    pub tolerances: Tolerances,
}

impl AnalysisReport {
    /// Checks `χ ≤ Σ_λ (R_λ/d^m) log₂ R_λ ≤ log₂ m!` and non-negative entropies.
    pub fn check(&self) -> Result<()> {
        let slack = self.tolerances.bound_slack;
        if self.chi_bits > self.intermediate_bound_bits + slack {
            return Err(Error::Validation(format!(
                "χ = {} exceeds Σ w log₂ R = {}",
                self.chi_bits, self.intermediate_bound_bits
            )));
        }
        if self.intermediate_bound_bits > self.bound_log2_mfact_bits + slack {
            return Err(Error::Validation(format!(
                "Σ w log₂ R = {} exceeds log₂ m! = {}",
                self.intermediate_bound_bits, self.bound_log2_mfact_bits
            )));
        }
        for (name, v) in [
            ("S(ρ_α)", self.s_rho_alpha_bits),
            ("S(ρ̄)", self.s_rho_bar_bits),
            ("χ", self.chi_bits),
        ] {
            if v < -slack {
                return Err(Error::Validation(format!("{name} = {v} is negative")));
            }
        }
        Ok(())
    }
}

/// Holevo analysis of the ensemble `{ρ_α, p_α}` built from the closed form.
pub fn holevo(prior: &Prior, m: usize, d: usize, caps: &Caps, tol: &Tolerances) -> Result<AnalysisReport> {
    let dim = caps.site_dim(m, d)?;
    let support = prior.support(m, d)?;
    if support.is_empty() {
        return Err(Error::Validation("prior has empty support".into()));
    }
    let f = kron_power(&fourier_matrix(d)?, m);
    let f_adj = f.adjoint();
    let mut frame_bar = CMatrix::zeros(dim, dim);
    let mut mean_s = 0.0;
    let (mut s_min, mut s_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (alpha, p) in &support {
        let frame = fourier_frame(alpha, m, d, dim)?;
        let rho = DensityMatrix::new(&f * &frame * &f_adj, tol)?;
        let s = von_neumann_entropy(&rho, tol)?;
        mean_s += p * s;
        s_min = s_min.min(s);
        s_max = s_max.max(s);
        frame_bar += frame * C64::new(*p, 0.0);
    }
    let rho_bar = DensityMatrix::new(&f * frame_bar * &f_adj, tol)?;
    let s_bar = von_neumann_entropy(&rho_bar, tol)?;
    let chi = s_bar - mean_s;
    let gap = gap_estimate(m, d)?;
    let encoded = m as f64 * (d as f64).log2();
    let report = AnalysisReport {
        m,
        d,
        blocks: block_table(m, d)?,
        s_rho_alpha_bits: mean_s,
        s_rho_alpha_spread_bits: s_max - s_min,
        block_entropy_bits: block_entropy(m, d)?,
        s_rho_bar_bits: s_bar,
        chi_bits: chi,
        intermediate_bound_bits: intermediate_bound(m, d)?,
        bound_log2_mfact_bits: log2_factorial(m),
        gap_chi_bits: encoded - chi,
        gap_exact_bits: gap.exact_bits,
        gap_asymptotic_bits: gap.asymptotic_bits,
        prior: prior.clone(),
        tolerances: *tol,
    };
    Ok(report)
}

/// `Σ_α p_α ρ_α` from the closed form, in the computational frame.
pub fn average_state(prior: &Prior, m: usize, d: usize, caps: &Caps) -> Result<DensityMatrix> {
    let dim = caps.site_dim(m, d)?;
    let mut frame_bar = CMatrix::zeros(dim, dim);
    for (alpha, p) in prior.support(m, d)? {
        frame_bar += fourier_frame(&alpha, m, d, dim)? * C64::new(p, 0.0);
    }
    let f = kron_power(&fourier_matrix(d)?, m);
    Ok(DensityMatrix(&f * frame_bar * f.adjoint()))
}
