//! Model files: the JSON schema the front end reads, validation into library
//! objects, and canonical re-serialization.

use crate::algebra::{builtin_dimer, builtin_su2, close_from_representation, ClosureReport, LieAlgebra};
use crate::error::{Error, Result};
use crate::fastmod::DoubleFourierHamiltonian;
use crate::fourier::FourierOperator;
use crate::linalg::CMat;
use crate::numeric::{EnvelopeFn, NumericModel};
use crate::scalar::{rationalize, GaussRational, Rational};
use crate::symbolic::{parse_expr, print_expr, Atom, AtomContext, EnvelopeExpr};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Builtin {
        builtin: String,
    },
    Matrices {
        /// One matrix per generator, rows of [re, im] pairs.
        matrices: Vec<Vec<Vec<[f64; 2]>>>,
        #[serde(default)]
        include_identity: bool,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
pub struct FastSpec {
    /// Envelope-to-drive frequency ratio as an exact rational "p/q".
    pub omega_ratio: String,
    /// Entries keyed "n,j": complex coefficient array, one [re, im] pair per
    /// generator. Values are snapped to rationals at load.
    pub entries: BTreeMap<String, Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct SimulateSpec {
    pub steps: Option<usize>,
    /// Initial state amplitudes, [re, im] per basis vector.
    pub initial: Option<Vec<[f64; 2]>>,
    pub order: Option<usize>,
    pub micromotion: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct OracleSpec {
    pub cutoff: Option<i64>,
    pub s_max: Option<f64>,
    pub target: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct TaskSpec {
    pub engine: Option<String>,
    pub order: Option<usize>,
    pub steps: Option<usize>,
    pub omega: Option<f64>,
    pub theta: Option<f64>,
    pub t_in: Option<f64>,
    pub t_fn: Option<f64>,
    pub simulate: SimulateSpec,
    pub oracle: OracleSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModelFile {
    pub algebra: AlgebraSpec,
    /// Parameter names with optional numeric bindings.
    #[serde(default)]
    pub parameters: BTreeMap<String, Option<f64>>,
    /// Envelope functions (named time dependences) for numeric mode.
    #[serde(default)]
    pub envelopes: BTreeMap<String, EnvelopeFn>,
    /// Harmonic index (as decimal string) -> list of (generator label,
    /// expression). Negative harmonics may be omitted; they are filled by
    /// conjugation.
    #[serde(default)]
    pub fourier: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast: Option<FastSpec>,
    #[serde(default)]
    pub task: TaskSpec,
}

/// A validated model: parsed expressions over a constructed algebra.
#[derive(Clone, Debug)]
pub struct ValidatedModel {
    pub alg: Arc<LieAlgebra>,
    pub closure: ClosureReport,
    pub fourier: FourierOperator,
    pub fast: Option<DoubleFourierHamiltonian>,
    pub ctx: AtomContext,
    pub file: ModelFile,
}

fn parse_rational(s: &str) -> Result<Rational> {
    let parts: Vec<&str> = s.split('/').collect();
    let err = || Error::Model(format!("cannot parse rational `{s}` (expected p or p/q)"));
    match parts.as_slice() {
        [p] => Ok(Rational::from_integer(
            p.trim().parse::<i64>().map_err(|_| err())?.into(),
        )),
        [p, q] => {
            let num: i64 = p.trim().parse().map_err(|_| err())?;
            let den: i64 = q.trim().parse().map_err(|_| err())?;
            if den == 0 {
                return Err(err());
            }
            Ok(Rational::new(BigInt::from(num), BigInt::from(den)))
        }
        _ => Err(err()),
    }
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: ModelFile = serde_json::from_str(&text)?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<ValidatedModel> {
        let (alg, closure) = match &self.algebra {
            AlgebraSpec::Builtin { builtin } => match builtin.as_str() {
                "su2" => (builtin_su2(), ClosureReport::exact()),
                "dimer" => (builtin_dimer(), ClosureReport::exact()),
                other => {
                    return Err(Error::Model(format!(
                        "unknown builtin algebra `{other}` (have: su2, dimer)"
                    )))
                }
            },
            AlgebraSpec::Matrices {
                matrices,
                include_identity,
            } => {
                let mats: Vec<CMat> = matrices
                    .iter()
                    .map(|rows| CMat::from_rows(&rows.iter().map(|r| r.iter().map(|c| (c[0], c[1])).collect()).collect::<Vec<_>>()))
                    .collect();
                close_from_representation(&mats, *include_identity)?
            }
        };

        let ctx = AtomContext::new(
            self.parameters.keys().cloned(),
            self.envelopes.keys().cloned(),
        );

        // Band = largest |harmonic| present.
        let mut band = 0i64;
        for key in self.fourier.keys() {
            let n: i64 = key
                .trim()
                .parse()
                .map_err(|_| Error::Model(format!("bad harmonic index `{key}`")))?;
            band = band.max(n.abs());
        }
        let mut fourier = FourierOperator::zero(alg.clone(), band);
        for (key, entries) in &self.fourier {
            let n: i64 = key.trim().parse().unwrap();
            for (label, expr_str) in entries {
                if alg.label_index(label).is_none() {
                    return Err(Error::Model(format!(
                        "generator label `{label}` (harmonic {n}) does not exist in the algebra"
                    )));
                }
                let expr = parse_expr(expr_str, &ctx).map_err(|e| match e {
                    Error::Parse { line, col, msg } => Error::Parse {
                        line,
                        col,
                        msg: format!("in harmonic {n}, generator {label}: {msg}"),
                    },
                    other => other,
                })?;
                fourier.set_entry(n, label, expr)?;
            }
        }
        fourier.hermitian_complete()?;

        let fast = match &self.fast {
            None => None,
            Some(spec) => Some(build_fast(spec, &alg)?),
        };

        // Every envelope atom used must have a declared envelope function
        // (bindings may still be absent for parameters; those only block
        // numeric evaluation, not symbolic work).
        Ok(ValidatedModel {
            alg,
            closure,
            fourier,
            fast,
            ctx,
            file: self.clone(),
        })
    }
}

fn build_fast(spec: &FastSpec, alg: &Arc<LieAlgebra>) -> Result<DoubleFourierHamiltonian> {
    let rho = parse_rational(&spec.omega_ratio)?;
    let mut band = 1i64;
    let mut env_bound = 0i64;
    let mut parsed: Vec<(i64, i64, &Vec<[f64; 2]>)> = Vec::new();
    for (key, coeffs) in &spec.entries {
        let parts: Vec<&str> = key.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Model(format!(
                "fast entry key `{key}` must be \"n,j\""
            )));
        }
        let n: i64 = parts[0].trim().parse().map_err(|_| {
            Error::Model(format!("bad drive harmonic in fast entry `{key}`"))
        })?;
        let j: i64 = parts[1].trim().parse().map_err(|_| {
            Error::Model(format!("bad envelope harmonic in fast entry `{key}`"))
        })?;
        band = band.max(n.abs());
        env_bound = env_bound.max(j.abs());
        parsed.push((n, j, coeffs));
    }
    let mut fast = DoubleFourierHamiltonian::new(alg.clone(), band, env_bound, rho)?;
    for (n, j, coeffs) in parsed {
        if coeffs.len() != alg.dim() {
            return Err(Error::LengthMismatch {
                expected: alg.dim(),
                got: coeffs.len(),
            });
        }
        let vec: Vec<EnvelopeExpr> = coeffs
            .iter()
            .map(|c| {
                EnvelopeExpr::constant(GaussRational::new(
                    rationalize(c[0], 1 << 20),
                    rationalize(c[1], 1 << 20),
                ))
            })
            .collect();
        fast.set_entry(n, j, vec)?;
    }
    fast.hermitian_complete()?;
    Ok(fast)
}

impl ValidatedModel {
    /// Canonical form of the model: expressions re-printed from their parsed
    /// representation, Hermitian completion applied.
    pub fn canonical_file(&self) -> ModelFile {
        let mut file = self.file.clone();
        let mut fourier = BTreeMap::new();
        for n in -self.fourier.band()..=self.fourier.band() {
            let Some(v) = self.fourier.component(n) else { continue };
            let mut entries = Vec::new();
            for (l, e) in v.iter().enumerate() {
                if !e.is_zero() {
                    entries.push((self.alg.labels()[l].clone(), print_expr(e)));
                }
            }
            if !entries.is_empty() {
                fourier.insert(n.to_string(), entries);
            }
        }
        file.fourier = fourier;
        file
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(&self.canonical_file()).expect("model serialization")
    }

    /// All envelope names referenced anywhere in the harmonics.
    fn used_envelopes(&self) -> Vec<String> {
        let mut names = std::collections::BTreeSet::new();
        for n in -self.fourier.band()..=self.fourier.band() {
            if let Some(v) = self.fourier.component(n) {
                for e in v {
                    for a in e.atoms() {
                        if let Atom::Envelope { name, .. } = a {
                            names.insert(name.clone());
                        }
                    }
                }
            }
        }
        names.into_iter().collect()
    }

    /// Bind everything and produce a numeric model. `omega`/`theta` override
    /// the task block when given.
    pub fn numeric_model(
        &self,
        omega: Option<f64>,
        theta: Option<f64>,
    ) -> Result<NumericModel> {
        let omega = omega
            .or(self.file.task.omega)
            .ok_or_else(|| Error::MissingBinding("omega".into()))?;
        if omega <= 0.0 {
            return Err(Error::Model("omega must be positive".into()));
        }
        let theta = theta.or(self.file.task.theta).unwrap_or(0.0);
        let mut params = std::collections::HashMap::new();
        for (name, value) in &self.file.parameters {
            let v = value.ok_or_else(|| Error::MissingBinding(name.clone()))?;
            params.insert(name.clone(), v);
        }
        let mut envelopes = std::collections::HashMap::new();
        for name in self.used_envelopes() {
            let f = self
                .file
                .envelopes
                .get(&name)
                .ok_or_else(|| Error::MissingBinding(name.clone()))?;
            envelopes.insert(name, f.clone());
        }
        if self.alg.rep().is_none() {
            return Err(Error::MissingRep);
        }
        Ok(NumericModel {
            alg: self.alg.clone(),
            fourier: self.fourier.clone(),
            params,
            envelopes,
            omega,
            theta,
            t_in: self.file.task.t_in.unwrap_or(0.0),
            t_fn: self.file.task.t_fn.unwrap_or(10.0),
        })
    }
}
