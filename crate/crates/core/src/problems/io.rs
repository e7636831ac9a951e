//! JSON representation of problem instances.
//!
//! ```text
//! {
//!   "format": "nbk-problem/1",
//!   "kind": "QuadraticSystem" | "LinearSimplexSystem" | "LSDProblem",
//!   "n": <equations>, "d": <unknowns>,
//!   "payload": { ... },
//!   "known_solution": [..] | null,
//!   "generator": { "seed": <u64>, "family": "...", <parameters> } | null
//! }
//! ```
//!
//! Payloads store matrices as nested row-major arrays:
//! `QuadraticSystem {A: [n][d][d], b: [n][d], c: [n]}`, `LinearSimplexSystem {A: [n][d], b: [n]}`,
//! `LSDProblem {r, m, A: [m][m], pairs: [[i, j], ..]}` with zero-based pairs.
//! Floats are written in shortest round-trip form, so a load after a save reproduces the
//! instance exactly.

use serde::{Deserialize, Serialize};

use super::{EntryDistribution, GeneratorInfo, GeneratorParams, Matrix, NonlinearProblem, ProblemData};
use crate::error::{Error, Result};

pub const PROBLEM_FORMAT: &str = "nbk-problem/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemFile {
    pub format: String,
    pub kind: String,
    pub n: usize,
    pub d: usize,
    pub payload: Payload,
    pub known_solution: Option<Vec<f64>>,
    pub generator: Option<GeneratorRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Quadratic {
        #[serde(rename = "A")]
        a: Vec<Vec<Vec<f64>>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
    Lsd {
        r: usize,
        m: usize,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        pairs: Vec<(usize, usize)>,
    },
    Linear {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorRecord {
    pub seed: u64,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

impl GeneratorRecord {
    fn from_info(info: &GeneratorInfo) -> Self {
        let mut rec = GeneratorRecord {
            seed: info.seed,
            family: String::new(),
            n: None,
            d: None,
            s: None,
            dist: None,
            r: None,
            m: None,
        };
        match info.params {
            GeneratorParams::Quadratic { n, d, s } => {
                rec.family = "quadratic".into();
                (rec.n, rec.d, rec.s) = (Some(n), Some(d), Some(s));
            }
            GeneratorParams::LinearSimplex { n, d, dist } => {
                rec.family = "linear_simplex".into();
                (rec.n, rec.d, rec.dist) = (Some(n), Some(d), Some(dist.as_str().into()));
            }
            GeneratorParams::LinearGaussian { n, d } => {
                rec.family = "linear_gaussian".into();
                (rec.n, rec.d) = (Some(n), Some(d));
            }
            GeneratorParams::Lsd { r, m } => {
                rec.family = "lsd".into();
                (rec.r, rec.m) = (Some(r), Some(m));
            }
        }
        rec
    }

    fn to_info(&self) -> Result<GeneratorInfo> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("generator record lacks `{name}`")))
        };
        let params = match self.family.as_str() {
            "quadratic" => GeneratorParams::Quadratic { n: need(self.n, "n")?, d: need(self.d, "d")?, s: need(self.s, "s")? },
            "linear_simplex" => {
                let dist = self.dist.as_deref().and_then(EntryDistribution::parse).ok_or_else(|| {
                    Error::Config(format!("unknown entry distribution {:?}", self.dist))
                })?;
                GeneratorParams::LinearSimplex { n: need(self.n, "n")?, d: need(self.d, "d")?, dist }
            }
            "linear_gaussian" => GeneratorParams::LinearGaussian { n: need(self.n, "n")?, d: need(self.d, "d")? },
            "lsd" => GeneratorParams::Lsd { r: need(self.r, "r")?, m: need(self.m, "m")? },
            other => return Err(Error::Config(format!("unknown generator family `{other}`"))),
        };
        Ok(GeneratorInfo { seed: self.seed, params })
    }
}

fn kind_name(data: &ProblemData) -> &'static str {
    match data {
        ProblemData::Quadratic { .. } => "QuadraticSystem",
        ProblemData::Linear { .. } => "LinearSimplexSystem",
        ProblemData::Lsd { .. } => "LSDProblem",
    }
}

impl ProblemFile {
    pub fn from_problem(p: &NonlinearProblem) -> Self {
        let payload = match p.data() {
            ProblemData::Quadratic { a, b, c } => Payload::Quadratic {
                a: a.iter().map(Matrix::to_rows).collect(),
                b: b.clone(),
                c: c.clone(),
            },
            ProblemData::Linear { a, b } => Payload::Linear { a: a.to_rows(), b: b.clone() },
            ProblemData::Lsd { r, m, a, pairs } => Payload::Lsd { r: *r, m: *m, a: a.to_rows(), pairs: pairs.clone() },
        };
        ProblemFile {
            format: PROBLEM_FORMAT.into(),
            kind: kind_name(p.data()).into(),
            n: p.n(),
            d: p.d(),
            payload,
            known_solution: p.known_solution().map(<[f64]>::to_vec),
            generator: p.generator().map(GeneratorRecord::from_info),
        }
    }

    pub fn into_problem(self) -> Result<NonlinearProblem> {
        if self.format != PROBLEM_FORMAT {
            return Err(Error::Config(format!("unsupported problem format `{}`", self.format)));
        }
        let data = match self.payload {
            Payload::Quadratic { a, b, c } => ProblemData::Quadratic {
                a: a.iter().map(|m| Matrix::from_rows(m)).collect::<Result<_>>()?,
                b,
                c,
            },
            Payload::Linear { a, b } => ProblemData::Linear { a: Matrix::from_rows(&a)?, b },
            Payload::Lsd { r, m, a, pairs } => ProblemData::Lsd { r, m, a: Matrix::from_rows(&a)?, pairs },
        };
        if kind_name(&data) != self.kind {
            return Err(Error::Config(format!("payload does not match kind `{}`", self.kind)));
        }
        let mut p = NonlinearProblem::new(data, self.known_solution)?;
        if (p.n(), p.d()) != (self.n, self.d) {
            return Err(Error::Config(format!(
                "declared shape ({}, {}) differs from payload shape ({}, {})",
                self.n,
                self.d,
                p.n(),
                p.d()
            )));
        }
        if let Some(g) = self.generator {
            p = p.with_generator(g.to_info()?);
        }
        Ok(p)
    }
}

impl NonlinearProblem {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ProblemFile::from_problem(self)).expect("problem serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(s).map_err(|e| Error::Config(format!("problem JSON: {e}")))?;
        file.into_problem()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{gen_linear_gaussian, gen_linear_simplex, gen_lsd, gen_quadratic};
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for p in [
            gen_quadratic(4, 3, 2, 5).unwrap(),
            gen_linear_simplex(6, 4, EntryDistribution::Unif09_1, 5).unwrap(),
            gen_linear_gaussian(6, 4, 5).unwrap(),
            gen_lsd(3, 4, 5).unwrap(),
        ] {
            let back = NonlinearProblem::from_json(&p.to_json()).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn problems_without_generator_round_trip() {
        let p = NonlinearProblem::new(
            ProblemData::Linear { a: Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap(), b: vec![3.0] },
            None,
        )
        .unwrap();
        assert_eq!(NonlinearProblem::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn rejects_mismatched_documents() {
        let p = gen_lsd(2, 2, 1).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        v["kind"] = "QuadraticSystem".into();
        assert!(NonlinearProblem::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        v["n"] = 7.into();
        assert!(NonlinearProblem::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        v["format"] = "other".into();
        assert!(NonlinearProblem::from_json(&v.to_string()).is_err());
    }
}
