// SPDX-License-Identifier: Apache-2.0

//! Occupation-number basis for identical bosons and the lift of
//! single-particle unitaries to the many-body space.
//!
//! Single-particle modes carry a spatial label `x ∈ 1..=m` and an internal
//! level `σ ∈ 0..d`. They are flattened spatial-major, `(x − 1)·d + σ`, so
//! that a spatial operator `U ⊗ I_d` is block structured.
//!
//! A unitary `u` on `M` modes acts on an occupation state `|n⟩` through
//!
//! ```text
//! ⟨n'|Û|n⟩ = per(u[n', n]) / sqrt(∏ n_i! ∏ n'_j!)
//! ```
//!
//! where `u[n', n]` repeats row `j` `n'_j` times and column `i` `n_i` times.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{check_unitary, CMatrix, CVector, C64, NORM_TOL, ONE, UNITARY_TOL, ZERO};

/// Default cap on the Fock-space dimension.
pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT_SIZE: usize = 16;

/// A single-particle mode: spatial site (1-based) and internal level (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLabel {
    pub spatial: usize,
    pub internal: usize,
}

impl ModeLabel {
    pub fn new(spatial: usize, internal: usize, m: usize, d: usize) -> Result<Self> {
        if spatial == 0 || spatial > m {
            return Err(invalid(format!("spatial mode {spatial} outside 1..={m}")));
        }
        if internal >= d {
            return Err(invalid(format!("internal level {internal} outside 0..{d}")));
        }
        Ok(Self { spatial, internal })
    }

    pub fn flat_index(&self, d: usize) -> usize {
        (self.spatial - 1) * d + self.internal
    }

    pub fn from_flat(index: usize, d: usize) -> Self {
        Self {
            spatial: index / d + 1,
            internal: index % d,
        }
    }
}

/// Occupation numbers over all single-particle modes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState(Vec<u32>);

impl OccupationState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn particles(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    /// Mode indices with multiplicity, e.g. `(2,0,1)` gives `[0,0,2]`.
    pub fn mode_list(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
            .collect()
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Optional spatial × internal interpretation of the mode set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub spatial: usize,
    pub internal: usize,
}

/// Number of ways to put `particles` bosons in `modes` modes, `C(M+m−1, m)`.
/// Saturates at `u128::MAX`.
pub fn fock_dimension(particles: usize, modes: usize) -> u128 {
    if modes == 0 {
        return u128::from(particles == 0);
    }
    let n = (modes + particles - 1) as u128;
    let k = particles.min(modes - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        match acc.checked_mul(n - i) {
            Some(v) => acc = v / (i + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Every length-`modes` vector of non-negative integers summing to `total`,
/// in lexicographically descending order.
pub fn descending_compositions(total: usize, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: usize, slot: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let parts = current.len();
        if slot + 1 == parts {
            current[slot] = remaining as u32;
            out.push(current.clone());
            return;
        }
        for n in (0..=remaining).rev() {
            current[slot] = n as u32;
            rec(remaining - n, slot + 1, current, out);
        }
    }
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    let mut current = vec![0; parts];
    rec(total, 0, &mut current, &mut out);
    out
}

/// Canonically ordered occupation basis of a fixed particle number.
#[derive(Debug, Clone)]
pub struct FockBasis {
    particles: usize,
    modes: usize,
    layout: Option<Layout>,
    states: Vec<OccupationState>,
    index: HashMap<Vec<u32>, usize>,
    // sqrt(∏ n_i!) per state
    norms: Vec<f64>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.particles == other.particles
            && self.modes == other.modes
            && self.layout == other.layout
    }
}

impl FockBasis {
    /// Enumerate all occupation vectors of `particles` bosons in `modes` modes.
    pub fn enumerate(particles: usize, modes: usize, max_dim: usize) -> Result<Self> {
        if particles == 0 {
            return Err(invalid("particle count must be at least 1"));
        }
        if modes == 0 {
            return Err(invalid("mode count must be at least 1"));
        }
        let dimension = fock_dimension(particles, modes);
        if dimension > max_dim as u128 {
            return Err(Error::DimensionCap {
                what: "Fock basis",
                dimension,
                cap: max_dim as u128,
            });
        }
        let states: Vec<OccupationState> = descending_compositions(particles, modes)
            .into_iter()
            .map(OccupationState)
            .collect();
        debug_assert_eq!(states.len() as u128, dimension);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.0.clone(), i))
            .collect();
        let norms = states
            .iter()
            .map(|s| s.0.iter().map(|&n| factorial_f64(n)).product::<f64>().sqrt())
            .collect();
        Ok(Self {
            particles,
            modes,
            layout: None,
            states,
            index,
            norms,
        })
    }

    /// Basis for `m` particles over `m` spatial modes with `d` internal levels.
    pub fn for_scheme(m: usize, d: usize, max_dim: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("internal level count must be at least 1"));
        }
        let mut basis = Self::enumerate(m, m * d, max_dim)?;
        basis.layout = Some(Layout {
            spatial: m,
            internal: d,
        });
        Ok(basis)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn layout(&self) -> Option<Layout> {
        self.layout
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &OccupationState {
        &self.states[i]
    }

    pub fn index_of(&self, occupations: &[u32]) -> Option<usize> {
        self.index.get(occupations).copied()
    }

    pub(crate) fn norm_factor(&self, i: usize) -> f64 {
        self.norms[i]
    }

    /// Returns the `(m, d)` layout or an error naming the caller.
    pub fn require_layout(&self, what: &str) -> Result<Layout> {
        self.layout
            .ok_or_else(|| invalid(format!("{what} needs a basis with spatial × internal layout")))
    }
}

fn factorial_f64(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Complex amplitudes over a shared [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: CVector,
    normalized: bool,
}

impl StateVector {
    /// Build a normalized state; fails if `Σ|a|²` is off by more than 1e−9.
    pub fn new(basis: Arc<FockBasis>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                what: "state amplitudes",
                expected: basis.dimension(),
                found: amplitudes.len(),
            });
        }
        let norm2 = amplitudes.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "state norm² = {norm2} differs from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(Self {
            basis,
            amplitudes,
            normalized: true,
        })
    }

    /// Build a state without a normalization check; it stays flagged as such.
    pub fn unnormalized(basis: Arc<FockBasis>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                what: "state amplitudes",
                expected: basis.dimension(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            basis,
            amplitudes,
            normalized: false,
        })
    }

    pub fn basis_state(basis: Arc<FockBasis>, occupations: &[u32]) -> Result<Self> {
        let i = basis.index_of(occupations).ok_or_else(|| {
            invalid(format!("occupation {occupations:?} is not in the basis"))
        })?;
        let mut amplitudes = CVector::zeros(basis.dimension());
        amplitudes[i] = ONE;
        Ok(Self {
            basis,
            amplitudes,
            normalized: true,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Option<C64> {
        self.basis.index_of(occupations).map(|i| self.amplitudes[i])
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|⟨self|other⟩|`; the bases must agree.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        if *self.basis != *other.basis {
            return Err(invalid("fidelity between states on different bases"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm())
    }

    /// Apply an operator, keeping the normalization flag.
    pub fn apply(&self, op: &Operator) -> Result<Self> {
        if op.dimension() != self.basis.dimension() {
            return Err(Error::DimensionMismatch {
                what: "operator",
                expected: self.basis.dimension(),
                found: op.dimension(),
            });
        }
        Ok(Self {
            basis: Arc::clone(&self.basis),
            amplitudes: op.matrix() * &self.amplitudes,
            normalized: self.normalized,
        })
    }
}

/// What an operator is known to act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    SpatialOnly,
    InternalOnly,
    General,
}

/// Dense square operator with an optional structure tag.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: CMatrix,
    structure: Structure,
}

impl Operator {
    pub fn new(matrix: CMatrix, structure: Structure) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid(format!(
                "operator must be square, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, structure })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            structure: self.structure,
        }
    }

    pub fn compose(&self, other: &Operator) -> Result<Self> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                what: "operator product",
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        let structure = if self.structure == other.structure {
            self.structure
        } else {
            Structure::General
        };
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            structure,
        })
    }
}

/// Permanent by Ryser's inclusion–exclusion formula with Gray-code subset
/// order, `O(2^n · n)`.
pub fn permanent(a: &CMatrix) -> Result<C64> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(invalid(format!(
            "permanent of a non-square {}×{} matrix",
            n,
            a.ncols()
        )));
    }
    if n > MAX_PERMANENT_SIZE {
        return Err(invalid(format!(
            "permanent size {n} exceeds {MAX_PERMANENT_SIZE}"
        )));
    }
    Ok(ryser(a))
}

fn ryser(a: &CMatrix) -> C64 {
    let n = a.nrows();
    if n == 0 {
        return ONE;
    }
    let mut row_sums = vec![ZERO; n];
    let mut total = ZERO;
    let mut gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        if gray & (1 << bit) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, bit)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, bit)];
            }
        }
        let prod: C64 = row_sums.iter().product();
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Lift a unitary on the basis modes to the many-body space.
pub fn lift_single_particle_unitary(u: &CMatrix, basis: &FockBasis) -> Result<Operator> {
    if u.nrows() != basis.modes() || u.ncols() != basis.modes() {
        return Err(Error::DimensionMismatch {
            what: "single-particle unitary",
            expected: basis.modes(),
            found: u.nrows().max(u.ncols()),
        });
    }
    check_unitary(u, UNITARY_TOL)?;
    Ok(Operator {
        matrix: lift_unchecked(u, basis),
        structure: Structure::General,
    })
}

/// Many-body matrix of `u` without a unitarity check. The summation order
/// inside each element is fixed, so the result is reproducible.
pub(crate) fn lift_unchecked(u: &CMatrix, basis: &FockBasis) -> CMatrix {
    let dim = basis.dimension();
    let m = basis.particles();
    let lists: Vec<Vec<usize>> = basis.states().iter().map(|s| s.mode_list()).collect();
    let mut out = CMatrix::zeros(dim, dim);
    let mut sub = CMatrix::zeros(m, m);
    for (col, cols) in lists.iter().enumerate() {
        for (row, rows) in lists.iter().enumerate() {
            let mut any = false;
            for (r, &ri) in rows.iter().enumerate() {
                for (c, &ci) in cols.iter().enumerate() {
                    let v = u[(ri, ci)];
                    any |= v != ZERO;
                    sub[(r, c)] = v;
                }
            }
            if !any {
                continue;
            }
            let norm = basis.norm_factor(row) * basis.norm_factor(col);
            out[(row, col)] = ryser(&sub) / norm;
        }
    }
    out
}

/// Embed a plaintext `α ∈ Z_d^m` as one boson per spatial mode, the boson in
/// mode `x` carrying internal level `α_x`.
pub fn plaintext_to_fock(alpha: &[usize], basis: &Arc<FockBasis>) -> Result<StateVector> {
    let layout = basis.require_layout("plaintext embedding")?;
    let (m, d) = (layout.spatial, layout.internal);
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            what: "plaintext length",
            expected: m,
            found: alpha.len(),
        });
    }
    if basis.particles() != m {
        return Err(invalid(format!(
            "plaintext embedding needs {m} particles, basis has {}",
            basis.particles()
        )));
    }
    let mut occupations = vec![0u32; m * d];
    for (x, &a) in alpha.iter().enumerate() {
        let label = ModeLabel::new(x + 1, a, m, d)?;
        occupations[label.flat_index(d)] = 1;
    }
    StateVector::basis_state(Arc::clone(basis), &occupations)
}
