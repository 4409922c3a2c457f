// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use qhe_core::crypto::{keygen as generate_key, Key};
use qhe_core::evaluate::{circuit_to_unitary, reck_decompose, sample_output, spatial_operator, Circuit, View};
use qhe_core::fock::{plaintext_to_fock, FockBasis, StateVector, DEFAULT_MAX_DIM};
use qhe_core::io::{from_json, to_json, HistogramFile, RunReport, StateFile, UnitaryFile};
use qhe_core::pipeline::{run_pipeline, DEFAULT_FIDELITY_TOL};
use qhe_core::secinfo::{holevo, Caps, Prior, Tolerances};
use qhe_core::{crypto, verify};

use crate::output::{emit, read_text, sig12, CliError, CliResult};
use crate::{Common, StateInput, ViewArg};

const RECK_TOL: f64 = 1e-8;

fn load<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Summary lines go to stdout when the artifact went to a file, stderr otherwise.
fn note(common: &Common, line: &str) {
    if common.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn max_dim(common: &Common) -> usize {
    common.max_dim.unwrap_or(DEFAULT_MAX_DIM)
}

fn tolerance(common: &Common, default: f64) -> CliResult<f64> {
    match common.tolerance {
        None => Ok(default),
        Some(t) if t.is_finite() && t >= 0.0 => Ok(t),
        Some(t) => Err(CliError::usage(format!("--tolerance must be finite and non-negative, got {t}"))),
    }
}

fn require(value: Option<usize>, flag: &str) -> CliResult<usize> {
    value.ok_or_else(|| CliError::usage(format!("{flag} is required")))
}

/// A flag value, if given, must agree with the value an input file carries.
fn agree(field: &str, flag: Option<usize>, source: &str, value: usize) -> CliResult<()> {
    match flag {
        Some(v) if v != value => Err(CliError::usage(format!(
            "field `{field}`: {source} has {value}, command line has {v}"
        ))),
        _ => Ok(()),
    }
}

fn parse_plaintext(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("plaintext symbol `{}` is not a non-negative integer", s.trim())))
        })
        .collect()
}

fn check_plaintext(alpha: &[usize], m: usize, d: usize, source: &str) -> CliResult<()> {
    if alpha.len() != m {
        return Err(CliError::usage(format!(
            "field `m`: {source} has {m}, plaintext has {} symbols",
            alpha.len()
        )));
    }
    if let Some(&a) = alpha.iter().find(|&&a| a >= d) {
        return Err(CliError::usage(format!(
            "field `d`: {source} has {d}, plaintext symbol {a} needs d > {a}"
        )));
    }
    Ok(())
}

/// Resolve a state input on the `(m, d)` fixed by `dims` or by the flags.
fn load_state(input: &StateInput, dims: Option<(usize, usize, &str)>, common: &Common) -> CliResult<StateVector> {
    match (&input.state, &input.plaintext) {
        (Some(path), None) => {
            let file: StateFile = load(path)?;
            let (m, d) = (file.basis.m, file.basis.d);
            if let Some((km, kd, source)) = dims {
                if (km, kd) != (m, d) {
                    let field = if km != m { "m" } else { "d" };
                    let (a, b) = if km != m { (km, m) } else { (kd, d) };
                    return Err(CliError::usage(format!("field `{field}`: {source} has {a}, state file has {b}")));
                }
            }
            agree("m", common.m, "state file", m)?;
            agree("d", common.d, "state file", d)?;
            Ok(file.to_state(max_dim(common))?)
        }
        (None, Some(text)) => {
            let alpha = parse_plaintext(text)?;
            let (m, d, source) = match dims {
                Some((m, d, source)) => {
                    agree("m", common.m, source, m)?;
                    agree("d", common.d, source, d)?;
                    (m, d, source)
                }
                None => (common.m.unwrap_or(alpha.len()), require(common.d, "-d")?, "command line"),
            };
            check_plaintext(&alpha, m, d, source)?;
            let basis = Arc::new(FockBasis::for_scheme(m, d, max_dim(common))?);
            Ok(plaintext_to_fock(&alpha, &basis)?)
        }
        _ => Err(CliError::usage("exactly one of --state or --plaintext is required")),
    }
}

fn fingerprint(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))[..16].to_string()
}

pub fn keygen(common: &Common) -> CliResult<()> {
    let m = require(common.m, "-m")?;
    let d = require(common.d, "-d")?;
    let key = generate_key(m, d, common.seed.unwrap_or(0))?;
    if common.verify {
        verify::verify_key(&key)?;
    }
    let text = to_json(&key)?;
    emit(common.out.as_deref(), &text)?;
    note(common, &format!("fingerprint {}", fingerprint(&text)));
    Ok(())
}

pub fn crypt(input: &StateInput, key_path: &Path, common: &Common, encrypt: bool) -> CliResult<()> {
    let key: Key = load(key_path)?;
    if common.verify {
        verify::verify_key(&key)?;
    }
    let state = load_state(input, Some((key.m(), key.d(), "key")), common)?;
    let out = if encrypt {
        crypto::encrypt(&state, &key)?
    } else {
        crypto::decrypt(&state, &key)?
    };
    emit(common.out.as_deref(), &to_json(&StateFile::from_state(&out)?)?)
}

pub fn evaluate(input: &StateInput, circuit_path: &Path, common: &Common) -> CliResult<()> {
    let circuit: Circuit = load(circuit_path)?;
    agree("m", common.m, "circuit", circuit.m())?;
    let common = Common {
        m: Some(circuit.m()),
        ..common.clone()
    };
    let state = load_state(input, None, &common)?;
    let layout = state.basis().require_layout("evaluation")?;
    agree("m", Some(layout.spatial), "circuit", circuit.m())?;
    if common.verify {
        verify::verify_circuit(state.basis(), &circuit)?;
    }
    let op = spatial_operator(&circuit_to_unitary(&circuit)?, state.basis())?;
    emit(common.out.as_deref(), &to_json(&StateFile::from_state(&state.apply(&op)?)?)?)
}

pub fn run(plaintext: &str, circuit_path: &Path, key_path: &Path, common: &Common) -> CliResult<()> {
    let key: Key = load(key_path)?;
    let circuit: Circuit = load(circuit_path)?;
    let tol = tolerance(common, DEFAULT_FIDELITY_TOL)?;
    agree("m", common.m, "key", key.m())?;
    agree("d", common.d, "key", key.d())?;
    if circuit.m() != key.m() {
        return Err(CliError::usage(format!(
            "field `m`: key has {}, circuit has {}",
            key.m(),
            circuit.m()
        )));
    }
    let alpha = parse_plaintext(plaintext)?;
    check_plaintext(&alpha, key.m(), key.d(), "key")?;
    if common.verify {
        let basis = Arc::new(FockBasis::for_scheme(key.m(), key.d(), max_dim(common))?);
        verify::verify_circuit(&basis, &circuit)?;
        verify::verify_pipeline(&basis, &key, &circuit, tol)?;
    }
    let outcome = run_pipeline(&alpha, &circuit, &key, max_dim(common))?;
    let passed = outcome.fidelity >= 1.0 - tol;
    let report = RunReport {
        m: key.m(),
        d: key.d(),
        plaintext: alpha,
        key: key.clone(),
        homomorphic: StateFile::from_state(&outcome.homomorphic)?,
        plain: StateFile::from_state(&outcome.plain)?,
        fidelity: outcome.fidelity,
        tolerance: tol,
        passed,
    };
    emit(common.out.as_deref(), &to_json(&report)?)?;
    note(common, &format!("fidelity {}", sig12(outcome.fidelity)));
    if passed {
        Ok(())
    } else {
        Err(CliError::verification(format!(
            "fidelity {} below 1 − {tol:e}",
            sig12(outcome.fidelity)
        )))
    }
}

pub fn analyze(prior: Option<&Path>, common: &Common) -> CliResult<()> {
    let m = require(common.m, "-m")?;
    let d = require(common.d, "-d")?;
    let prior = match prior {
        Some(p) => load::<Prior>(p)?,
        None => Prior::Uniform,
    };
    let mut caps = Caps::default();
    if let Some(cap) = common.max_dim {
        caps.max_site_dim = cap;
    }
    let tol = Tolerances::default();
    let report = holevo(&prior, m, d, &caps, &tol)?;
    if common.verify {
        verify::verify_analysis(&report, &caps, &tol)?;
    }
    emit(common.out.as_deref(), &to_json(&report)?)?;
    note(
        common,
        &format!(
            "chi_bits {}  bound_log2_mfact_bits {}  gap_exact_bits {}  gap_asymptotic_bits {}",
            sig12(report.chi_bits),
            sig12(report.bound_log2_mfact_bits),
            sig12(report.gap_exact_bits),
            sig12(report.gap_asymptotic_bits)
        ),
    );
    Ok(())
}

pub fn sample(
    input: &StateInput,
    circuit_path: Option<&Path>,
    key_path: Option<&Path>,
    shots: u64,
    view: ViewArg,
    common: &Common,
) -> CliResult<()> {
    let key: Option<Key> = key_path.map(load).transpose()?;
    let circuit: Option<Circuit> = circuit_path.map(load).transpose()?;
    if let (Some(k), Some(c)) = (&key, &circuit) {
        if k.m() != c.m() {
            return Err(CliError::usage(format!("field `m`: key has {}, circuit has {}", k.m(), c.m())));
        }
    }
    let dims = key.as_ref().map(|k| (k.m(), k.d(), "key"));
    let common_m = Common {
        m: common.m.or(circuit.as_ref().map(Circuit::m)),
        ..common.clone()
    };
    let mut state = load_state(input, dims, &common_m)?;
    if let Some(k) = &key {
        if common.verify {
            verify::verify_key(k)?;
        }
        state = crypto::encrypt(&state, k)?;
    }
    if let Some(c) = &circuit {
        let layout = state.basis().require_layout("sampling")?;
        agree("m", Some(layout.spatial), "circuit", c.m())?;
        if common.verify {
            verify::verify_circuit(state.basis(), c)?;
        }
        state = state.apply(&spatial_operator(&circuit_to_unitary(c)?, state.basis())?)?;
    }
    let view = match view {
        ViewArg::Joint => View::Joint,
        ViewArg::Spatial => View::SpatialMarginal,
    };
    let seed = common.seed.unwrap_or(0);
    let counts = sample_output(&state, shots, seed, view)?;
    emit(common.out.as_deref(), &to_json(&HistogramFile::new(view, shots, seed, counts))?)
}

pub fn reck(unitary_path: &Path, common: &Common) -> CliResult<()> {
    let file: UnitaryFile = load(unitary_path)?;
    let u = file.to_unitary()?;
    agree("m", common.m, "unitary file", u.m())?;
    let tol = tolerance(common, RECK_TOL)?;
    let circuit = reck_decompose(&u)?;
    // recompilation is always checked; --verify adds nothing here
    verify::verify_reck(&u, &circuit, tol)?;
    emit(common.out.as_deref(), &to_json(&circuit)?)
}
