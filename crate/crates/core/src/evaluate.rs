// SPDX-License-Identifier: Apache-2.0

//! Linear-optical evaluation on the spatial modes.
//!
//! Gates act on spatial modes `1..=m` and leave the internal levels alone, so
//! a circuit with unitary `U` acts on a particle as `U ⊗ I_d`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::{lift_unchecked, FockBasis, Operator, StateVector, Structure};
use crate::linalg::{check_unitary, kron, CMatrix, C64, NORM_TOL, ONE, UNITARY_TOL, ZERO};

/// Single-particle matrix of `Ĉ_{x,y} = Σ_σ a†_{x,σ} a_{y,σ}`: `|x⟩⟨y| ⊗ I_d`.
pub fn c_generator(m: usize, d: usize, x: usize, y: usize) -> Result<CMatrix> {
    check_mode(m, x)?;
    check_mode(m, y)?;
    let mut c = CMatrix::zeros(m * d, m * d);
    for s in 0..d {
        c[((x - 1) * d + s, (y - 1) * d + s)] = ONE;
    }
    Ok(c)
}

fn check_mode(m: usize, x: usize) -> Result<()> {
    if x == 0 || x > m {
        return Err(invalid(format!("mode {x} outside 1..={m}")));
    }
    Ok(())
}

/// An `m × m` unitary on the spatial modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialUnitary(CMatrix);

impl SpatialUnitary {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid(format!(
                "spatial unitary must be square, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_unitary(&matrix, UNITARY_TOL)?;
        Ok(Self(matrix))
    }

    pub fn identity(m: usize) -> Self {
        Self(CMatrix::identity(m, m))
    }

    pub fn m(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Single-particle action `U ⊗ I_d`.
    pub fn with_internal(&self, d: usize) -> CMatrix {
        kron(&self.0, &CMatrix::identity(d, d))
    }
}

/// `e^{iθ}` on mode `x`, identity elsewhere.
pub fn phase_shifter(m: usize, x: usize, theta: f64) -> Result<SpatialUnitary> {
    check_mode(m, x)?;
    let mut u = CMatrix::identity(m, m);
    u[(x - 1, x - 1)] = C64::from_polar(1.0, theta);
    Ok(SpatialUnitary(u))
}

/// `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]` on rows/columns `(x, y)`.
pub fn beam_splitter(m: usize, x: usize, y: usize, theta: f64, phi: f64) -> Result<SpatialUnitary> {
    check_mode(m, x)?;
    check_mode(m, y)?;
    if x == y {
        return Err(invalid(format!("beam splitter needs two distinct modes, got {x} twice")));
    }
    let (c, s) = (theta.cos(), theta.sin());
    let (a, b) = (x - 1, y - 1);
    let mut u = CMatrix::identity(m, m);
    u[(a, a)] = C64::new(c, 0.0);
    u[(a, b)] = -C64::from_polar(s, -phi);
    u[(b, a)] = C64::from_polar(s, phi);
    u[(b, b)] = C64::new(c, 0.0);
    Ok(SpatialUnitary(u))
}

/// A phase shifter or a two-mode beam splitter. Modes are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Gate {
    #[serde(rename = "ps")]
    PhaseShifter { mode: usize, theta: f64 },
    #[serde(rename = "bs")]
    BeamSplitter { modes: [usize; 2], theta: f64, phi: f64 },
}

impl Gate {
    pub fn validate(&self, m: usize) -> Result<()> {
        match *self {
            Gate::PhaseShifter { mode, theta } => {
                check_mode(m, mode)?;
                if !theta.is_finite() {
                    return Err(invalid("phase-shifter angle must be finite"));
                }
            }
            Gate::BeamSplitter {
                modes: [x, y],
                theta,
                phi,
            } => {
                check_mode(m, x)?;
                check_mode(m, y)?;
                if x >= y {
                    return Err(invalid(format!(
                        "beam-splitter modes must satisfy x < y, got ({x}, {y})"
                    )));
                }
                if !theta.is_finite() || !phi.is_finite() {
                    return Err(invalid("beam-splitter angles must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn unitary(&self, m: usize) -> Result<SpatialUnitary> {
        self.validate(m)?;
        match *self {
            Gate::PhaseShifter { mode, theta } => phase_shifter(m, mode, theta),
            Gate::BeamSplitter {
                modes: [x, y],
                theta,
                phi,
            } => beam_splitter(m, x, y, theta, phi),
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::PhaseShifter { mode, theta } => Gate::PhaseShifter {
                mode,
                theta: -theta,
            },
            Gate::BeamSplitter { modes, theta, phi } => Gate::BeamSplitter {
                modes,
                theta: -theta,
                phi,
            },
        }
    }
}

/// Ordered gate list on `m` spatial modes; the first gate acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawCircuit")]
pub struct Circuit {
    m: usize,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCircuit {
    m: usize,
    gates: Vec<Gate>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        Circuit::new(raw.m, raw.gates)
    }
}

impl Circuit {
    pub fn new(m: usize, gates: Vec<Gate>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("circuit needs at least one mode"));
        }
        for g in &gates {
            g.validate(m)?;
        }
        Ok(Self { m, gates })
    }

    pub fn empty(m: usize) -> Self {
        Self {
            m,
            gates: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.m)?;
        self.gates.push(gate);
        Ok(())
    }

    /// The circuit that undoes this one.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            m: self.m,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn beam_splitter_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::BeamSplitter { .. }))
            .count()
    }

    pub fn phase_shifter_count(&self) -> usize {
        self.gates.len() - self.beam_splitter_count()
    }

    /// Random circuit of `depth` layers, each a beam splitter on a random pair
    /// followed by a phase shifter on a random mode.
    pub fn random<R: Rng + ?Sized>(m: usize, depth: usize, rng: &mut R) -> Circuit {
        let mut gates = Vec::with_capacity(2 * depth);
        for _ in 0..depth {
            if m >= 2 {
                let x = rng.random_range(1..m);
                let y = rng.random_range(x + 1..=m);
                gates.push(Gate::BeamSplitter {
                    modes: [x, y],
                    theta: rng.random_range(0.0..2.0 * PI),
                    phi: rng.random_range(0.0..2.0 * PI),
                });
            }
            gates.push(Gate::PhaseShifter {
                mode: rng.random_range(1..=m),
                theta: rng.random_range(0.0..2.0 * PI),
            });
        }
        Circuit { m, gates }
    }
}

/// `G_k ⋯ G_2 G_1` for gates listed `G_1, …, G_k`.
pub fn circuit_to_unitary(circuit: &Circuit) -> Result<SpatialUnitary> {
    let m = circuit.m;
    let mut u = CMatrix::identity(m, m);
    for gate in &circuit.gates {
        u = gate.unitary(m)?.0 * u;
    }
    Ok(SpatialUnitary(u))
}

/// Largest mode count accepted by [`reck_decompose`].
pub const MAX_RECK_MODES: usize = 8;

/// Triangular mesh synthesis.
///
/// Nearest-neighbour beam splitters null the sub-diagonal of `U` column by
/// column, bottom-up, leaving a diagonal of phases. The returned circuit
/// applies those phases first and then the inverted nulling gates in reverse,
/// for `m(m−1)/2` beam splitters and `m` phase shifters.
pub fn reck_decompose(u: &SpatialUnitary) -> Result<Circuit> {
    let m = u.m();
    if m == 0 || m > MAX_RECK_MODES {
        return Err(invalid(format!(
            "Reck synthesis supports 1..={MAX_RECK_MODES} modes, got {m}"
        )));
    }
    check_unitary(&u.0, UNITARY_TOL)?;
    let mut w = u.0.clone();
    let mut nulling = Vec::with_capacity(m * (m - 1) / 2);
    for col in 0..m {
        for row in (col + 1..m).rev() {
            let (a, b) = (row - 1, row);
            let (ua, ub) = (w[(a, col)], w[(b, col)]);
            let (theta, phi) = if ub == ZERO {
                (0.0, 0.0)
            } else {
                // e^{iφ} sin θ · u_a + cos θ · u_b = 0
                let theta = ub.norm().atan2(ua.norm());
                let phi = if ua == ZERO {
                    0.0
                } else {
                    ub.arg() - ua.arg() + PI
                };
                (theta, phi)
            };
            let t = beam_splitter(m, a + 1, b + 1, theta, phi)?;
            w = &t.0 * w;
            w[(b, col)] = ZERO;
            nulling.push(Gate::BeamSplitter {
                modes: [a + 1, b + 1],
                theta,
                phi,
            });
        }
    }
    let mut gates: Vec<Gate> = (0..m)
        .map(|x| Gate::PhaseShifter {
            mode: x + 1,
            theta: w[(x, x)].arg(),
        })
        .collect();
    gates.extend(nulling.iter().rev().map(Gate::inverse));
    Circuit::new(m, gates)
}

/// Fock-space lift of `U ⊗ I_d` on a scheme basis.
pub fn spatial_operator(u: &SpatialUnitary, basis: &FockBasis) -> Result<Operator> {
    let layout = basis.require_layout("evaluation")?;
    if layout.spatial != u.m() {
        return Err(Error::DimensionMismatch {
            what: "spatial modes m",
            expected: layout.spatial,
            found: u.m(),
        });
    }
    Operator::new(
        lift_unchecked(&u.with_internal(layout.internal), basis),
        Structure::SpatialOnly,
    )
}

/// Apply `U ⊗ I_d` to a Fock state with internal dimension `d`.
pub fn evaluate_fock(state: &StateVector, u: &SpatialUnitary, d: usize) -> Result<StateVector> {
    let layout = state.basis().require_layout("evaluation")?;
    if layout.internal != d {
        return Err(Error::DimensionMismatch {
            what: "internal levels d",
            expected: layout.internal,
            found: d,
        });
    }
    state.apply(&spatial_operator(u, state.basis())?)
}

/// Which labels outcomes are histogrammed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum View {
    /// Full occupation vector over all `m·d` modes.
    Joint,
    /// Particle count per spatial mode, internal labels summed out.
    SpatialMarginal,
}

fn outcome_label(basis: &FockBasis, index: usize, view: View) -> Result<Vec<u32>> {
    let occ = basis.state(index).occupations();
    match view {
        View::Joint => Ok(occ.to_vec()),
        View::SpatialMarginal => {
            let layout = basis.require_layout("spatial-marginal view")?;
            Ok(occ
                .chunks(layout.internal)
                .map(|c| c.iter().sum())
                .collect())
        }
    }
}

fn check_normalized(state: &StateVector) -> Result<f64> {
    let norm2 = state.norm_squared();
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(Error::Validation(format!(
            "cannot sample an unnormalized state (norm² = {norm2})"
        )));
    }
    Ok(norm2)
}

/// Exact outcome probabilities, keyed by outcome label.
pub fn outcome_distribution(state: &StateVector, view: View) -> Result<BTreeMap<Vec<u32>, f64>> {
    check_normalized(state)?;
    let mut out = BTreeMap::new();
    for (i, p) in state.probabilities().into_iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        *out.entry(outcome_label(state.basis(), i, view)?).or_insert(0.0) += p;
    }
    Ok(out)
}

/// Draw `shots` outcomes by inverse CDF over `|amplitude|²`.
///
/// Shot `i` takes its uniform variate from ChaCha20 stream `i` of `seed`, so
/// the histogram depends only on `(state, shots, seed, view)`.
pub fn sample_output(
    state: &StateVector,
    shots: u64,
    seed: u64,
    view: View,
) -> Result<BTreeMap<Vec<u32>, u64>> {
    let total = check_normalized(state)?;
    let mut cdf = Vec::with_capacity(state.basis().dimension());
    let mut acc = 0.0;
    for p in state.probabilities() {
        acc += p;
        cdf.push(acc);
    }
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    let base = ChaCha20Rng::seed_from_u64(seed);
    for shot in 0..shots {
        let mut rng = base.clone();
        rng.set_stream(shot);
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * total;
        // first index with cdf > u, skipping zero-probability entries
        let mut i = cdf.partition_point(|&c| c <= u);
        if i >= cdf.len() {
            i = cdf.len() - 1;
            while i > 0 && cdf[i] == cdf[i - 1] {
                i -= 1;
            }
        }
        *counts.entry(i).or_insert(0) += 1;
    }
    let mut out = BTreeMap::new();
    for (i, n) in counts {
        *out.entry(outcome_label(state.basis(), i, view)?).or_insert(0) += n;
    }
    Ok(out)
}

/// Convenience: build a scheme basis and wrap it.
pub fn scheme_basis(m: usize, d: usize, max_dim: usize) -> Result<Arc<FockBasis>> {
    FockBasis::for_scheme(m, d, max_dim).map(Arc::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{plaintext_to_fock, DEFAULT_MAX_DIM};
    use crate::linalg::{frobenius_diff, haar_unitary, max_abs_diff, unitarity_deviation};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn c_generator_properties() {
        let (m, d) = (3, 2);
        let cxx = c_generator(m, d, 2, 2).unwrap();
        let expo = (&cxx * c(0.0, 0.7)).exp();
        for i in 0..m * d {
            let expected = if i / d == 1 { C64::from_polar(1.0, 0.7) } else { ONE };
            assert!((expo[(i, i)] - expected).norm() < 1e-12);
        }
        let c12 = c_generator(m, d, 1, 2).unwrap();
        let c21 = c_generator(m, d, 2, 1).unwrap();
        assert_eq!(c12.adjoint(), c21);
        assert!(c_generator(m, d, 0, 1).is_err());
        assert!(c_generator(m, d, 1, 4).is_err());
    }

    #[test]
    fn c_generator_exponential_is_balanced_mixer() {
        let gen = c_generator(2, 2, 1, 2).unwrap() + c_generator(2, 2, 2, 1).unwrap();
        let u = (gen * c(0.0, PI / 4.0)).exp();
        let s = FRAC_1_SQRT_2;
        let mixer = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]);
        let expected = kron(&mixer, &CMatrix::identity(2, 2));
        assert!(max_abs_diff(&u, &expected) < 1e-12);
    }

    #[test]
    fn gate_examples() {
        for m in 2..=4 {
            let id = CMatrix::identity(m, m);
            assert!(max_abs_diff(phase_shifter(m, 1, 0.0).unwrap().matrix(), &id) < 1e-15);
            assert!(max_abs_diff(beam_splitter(m, 1, m, 0.0, 1.3).unwrap().matrix(), &id) < 1e-15);
        }
        let s = FRAC_1_SQRT_2;
        let bs = beam_splitter(2, 1, 2, PI / 4.0, 0.0).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(-s, 0.0), c(s, 0.0), c(s, 0.0)]);
        assert!(max_abs_diff(bs.matrix(), &expected) < 1e-15);

        let p = phase_shifter(3, 2, 0.9).unwrap().0 * phase_shifter(3, 2, -0.9).unwrap().0;
        assert!(max_abs_diff(&p, &CMatrix::identity(3, 3)) < 1e-12);
        assert!(beam_splitter(3, 2, 2, 0.1, 0.0).is_err());
        assert!(phase_shifter(3, 4, 0.1).is_err());
    }

    #[test]
    fn circuit_composition() {
        assert_eq!(
            circuit_to_unitary(&Circuit::empty(3)).unwrap().0,
            CMatrix::identity(3, 3)
        );
        let g = Gate::BeamSplitter {
            modes: [1, 3],
            theta: 0.4,
            phi: 1.1,
        };
        let single = Circuit::new(3, vec![g.clone()]).unwrap();
        assert_eq!(
            circuit_to_unitary(&single).unwrap(),
            g.unitary(3).unwrap()
        );

        // first gate acts first
        let a = Gate::PhaseShifter { mode: 1, theta: 0.3 };
        let b = Gate::BeamSplitter {
            modes: [1, 2],
            theta: 0.8,
            phi: 0.2,
        };
        let two = Circuit::new(2, vec![a.clone(), b.clone()]).unwrap();
        let expected = b.unitary(2).unwrap().0 * a.unitary(2).unwrap().0;
        assert!(max_abs_diff(circuit_to_unitary(&two).unwrap().matrix(), &expected) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in 2..=5 {
            let circ = Circuit::random(m, 10, &mut rng);
            let mut gates = circ.gates().to_vec();
            gates.extend(circ.inverse().gates().iter().cloned());
            let round = circuit_to_unitary(&Circuit::new(m, gates).unwrap()).unwrap();
            assert!(max_abs_diff(round.matrix(), &CMatrix::identity(m, m)) < 1e-10);
        }
    }

    #[test]
    fn circuit_validation() {
        assert!(Circuit::new(2, vec![Gate::PhaseShifter { mode: 3, theta: 0.0 }]).is_err());
        assert!(Circuit::new(
            3,
            vec![Gate::BeamSplitter {
                modes: [2, 1],
                theta: 0.0,
                phi: 0.0
            }]
        )
        .is_err());
        assert!(Circuit::new(2, vec![Gate::PhaseShifter { mode: 1, theta: f64::NAN }]).is_err());
    }

    #[test]
    fn circuit_json_format() {
        let json = r#"{"m":2,"gates":[{"kind":"ps","mode":1,"theta":0.5},{"kind":"bs","modes":[1,2],"theta":0.25,"phi":-1.0}]}"#;
        let circ: Circuit = serde_json::from_str(json).unwrap();
        assert_eq!(circ.gates().len(), 2);
        assert_eq!(serde_json::to_string(&circ).unwrap(), json);
        assert!(serde_json::from_str::<Circuit>(
            r#"{"m":2,"gates":[{"kind":"ps","mode":1,"theta":0.5,"extra":1}]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<Circuit>(r#"{"m":2,"gates":[],"x":0}"#).is_err());
        assert!(serde_json::from_str::<Circuit>(
            r#"{"m":2,"gates":[{"kind":"ps","mode":5,"theta":0.5}]}"#
        )
        .is_err());
    }

    #[test]
    fn reck_identity_and_single_splitter() {
        for m in 1..=5 {
            let circ = reck_decompose(&SpatialUnitary::identity(m)).unwrap();
            let back = circuit_to_unitary(&circ).unwrap();
            assert!(frobenius_diff(back.matrix(), &CMatrix::identity(m, m)) < 1e-10);
        }
        let bs = beam_splitter(4, 2, 3, 0.7, -0.4).unwrap();
        let circ = reck_decompose(&bs).unwrap();
        assert!(frobenius_diff(circuit_to_unitary(&circ).unwrap().matrix(), bs.matrix()) < 1e-10);
    }

    #[test]
    fn reck_gate_counts_and_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for m in 2..=8 {
            for _ in 0..10 {
                let u = SpatialUnitary::new(haar_unitary(m, &mut rng)).unwrap();
                let circ = reck_decompose(&u).unwrap();
                assert_eq!(circ.beam_splitter_count(), m * (m - 1) / 2);
                assert_eq!(circ.phase_shifter_count(), m);
                let back = circuit_to_unitary(&circ).unwrap();
                assert!(frobenius_diff(back.matrix(), u.matrix()) < 1e-8);
            }
        }
        assert!(reck_decompose(&SpatialUnitary::identity(9)).is_err());
    }

    #[test]
    fn reck_handles_permutations() {
        // exchanging modes exercises the u_a = 0 branch
        let m = 3;
        let mut p = CMatrix::zeros(m, m);
        p[(0, 2)] = ONE;
        p[(1, 0)] = c(0.0, 1.0);
        p[(2, 1)] = -ONE;
        let u = SpatialUnitary::new(p).unwrap();
        let back = circuit_to_unitary(&reck_decompose(&u).unwrap()).unwrap();
        assert!(frobenius_diff(back.matrix(), u.matrix()) < 1e-12);
    }

    #[test]
    fn non_unitary_inputs_rejected() {
        let bad = CMatrix::from_element(2, 2, ONE);
        assert!(matches!(SpatialUnitary::new(bad), Err(Error::NotUnitary { .. })));
    }

    fn hom_output(alpha: &[usize]) -> StateVector {
        let basis = scheme_basis(2, 2, DEFAULT_MAX_DIM).unwrap();
        let input = plaintext_to_fock(alpha, &basis).unwrap();
        let bs = beam_splitter(2, 1, 2, PI / 4.0, 0.0).unwrap();
        evaluate_fock(&input, &bs, 2).unwrap()
    }

    fn coincidence(state: &StateVector) -> f64 {
        outcome_distribution(state, View::SpatialMarginal)
            .unwrap()
            .get(&vec![1, 1])
            .copied()
            .unwrap_or(0.0)
    }

    #[test]
    fn hong_ou_mandel() {
        let same = hom_output(&[0, 0]);
        assert!(coincidence(&same) <= 1e-12);
        assert!((same.norm_squared() - 1.0).abs() < 1e-12);
        let orthogonal = hom_output(&[0, 1]);
        assert!((coincidence(&orthogonal) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn evaluate_identity_and_mismatch() {
        let basis = scheme_basis(3, 2, DEFAULT_MAX_DIM).unwrap();
        let input = plaintext_to_fock(&[1, 0, 1], &basis).unwrap();
        let out = evaluate_fock(&input, &SpatialUnitary::identity(3), 2).unwrap();
        assert!((out.fidelity(&input).unwrap() - 1.0).abs() < 1e-15);
        assert!(evaluate_fock(&input, &SpatialUnitary::identity(2), 2).is_err());
        assert!(evaluate_fock(&input, &SpatialUnitary::identity(3), 3).is_err());
    }

    #[test]
    fn evaluation_preserves_norm_and_internal_numbers() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (m, d) = (3, 2);
        let basis = scheme_basis(m, d, DEFAULT_MAX_DIM).unwrap();
        let u = SpatialUnitary::new(haar_unitary(m, &mut rng)).unwrap();
        let op = spatial_operator(&u, &basis).unwrap();
        assert!(unitarity_deviation(op.matrix()) < 1e-9);
        for sigma in 0..d {
            let number = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
                basis.dimension(),
                basis.states().iter().map(|s| {
                    let n: u32 = (0..m).map(|x| s.occupations()[x * d + sigma]).sum();
                    C64::new(f64::from(n), 0.0)
                }),
            ));
            let comm = crate::linalg::commutator(op.matrix(), &number);
            assert!(comm.iter().all(|z| z.norm() < 1e-9));
        }
    }

    #[test]
    fn sampling_basis_state_and_hom() {
        let basis = scheme_basis(2, 2, DEFAULT_MAX_DIM).unwrap();
        let input = plaintext_to_fock(&[1, 0], &basis).unwrap();
        let hist = sample_output(&input, 100, 3, View::Joint).unwrap();
        assert_eq!(hist.len(), 1);
        assert_eq!(hist[&vec![0, 1, 1, 0]], 100);

        let hom = hom_output(&[0, 0]);
        let hist = sample_output(&hom, 10_000, 17, View::Joint).unwrap();
        assert_eq!(hist.values().sum::<u64>(), 10_000);
        assert!(!hist.contains_key(&vec![1, 0, 1, 0]));
        let marg = sample_output(&hom, 10_000, 17, View::SpatialMarginal).unwrap();
        assert!(!marg.contains_key(&vec![1, 1]));
        assert_eq!(sample_output(&hom, 500, 9, View::Joint).unwrap(), sample_output(&hom, 500, 9, View::Joint).unwrap());
    }

    #[test]
    fn sampling_balanced_state_concentrates() {
        let basis = Arc::new(FockBasis::enumerate(1, 2, DEFAULT_MAX_DIM).unwrap());
        let s = FRAC_1_SQRT_2;
        let psi = StateVector::new(
            Arc::clone(&basis),
            crate::linalg::CVector::from_vec(vec![c(s, 0.0), c(0.0, s)]),
        )
        .unwrap();
        let shots = 10_000u64;
        let hist = sample_output(&psi, shots, 2024, View::Joint).unwrap();
        let heads = hist.get(&vec![1, 0]).copied().unwrap_or(0) as f64;
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((heads - 5000.0).abs() <= 4.0 * sigma, "heads = {heads}");
    }

    #[test]
    fn sampling_rejects_unnormalized() {
        let basis = Arc::new(FockBasis::enumerate(1, 2, DEFAULT_MAX_DIM).unwrap());
        let psi = StateVector::unnormalized(basis, crate::linalg::CVector::from_vec(vec![ONE, ONE])).unwrap();
        assert!(matches!(sample_output(&psi, 10, 0, View::Joint), Err(Error::Validation(_))));
    }
}
