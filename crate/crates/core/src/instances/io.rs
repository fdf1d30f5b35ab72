//! JSON-lines instance files.
//!
//! Every file starts with a header record carrying a `type` tag (`sbm`, `csp`
//! or `goldreich`), optionally followed by metadata records, then one record
//! per edge, clause or constraint:
//!
//! ```text
//! {"type":"sbm","n1":4,"n2":4,"delta":1.5,"p":0.2,"seed":7}
//! {"delta":1.5,"p_equiv":0.2,"n2_nominal":4,"indexer_size":3}   (reduced graphs only)
//! {"truth_u":[1,-1,...],"truth_v":[...]}                        (optional)
//! {"i":0,"j":3}
//!
//! {"type":"csp","n":10,"k":3,"m":2,"seed":1,"weights":[0,1,1,1,1,1,1,1]}
//! {"sigma":[1,-1,...]}                                          (optional)
//! {"vars":[3,0,7],"signs":[1,-1,1]}
//!
//! {"type":"goldreich","n":10,"k":3,"m":2,"seed":1,"predicate":[...]}
//! {"sigma":[...]}                                               (optional)
//! {"vars":[3,0,7],"value":-1}
//! ```

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    BipartiteGraph, GoldreichInstance, HiddenPartition, InstanceError, Literal, PlantedCspInstance,
    PlantingDistribution,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {message}")]
    Layout { line: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(#[from] InstanceError),
    #[error("empty file")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Header {
    Sbm { n1: usize, n2: usize, delta: f64, p: f64, seed: u64 },
    Csp { n: usize, k: usize, m: usize, seed: u64, weights: Vec<f64> },
    Goldreich { n: usize, k: usize, m: usize, seed: u64, predicate: Vec<i8> },
}

/// Extra record written for graphs produced by reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionSidecar {
    pub delta: f64,
    pub p_equiv: f64,
    pub n2_nominal: usize,
    pub indexer_size: usize,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Record {
    Header(Header),
    Sidecar(ReductionSidecar),
    Truth { truth_u: Vec<i8>, truth_v: Vec<i8> },
    Sigma { sigma: Vec<i8> },
    Edge { i: usize, j: usize },
    Clause { vars: Vec<usize>, signs: Vec<i8> },
    Constraint { vars: Vec<usize>, value: i8 },
}

#[derive(Serialize)]
struct TruthRecord<'a> {
    truth_u: &'a [i8],
    truth_v: &'a [i8],
}

#[derive(Serialize)]
struct SigmaRecord<'a> {
    sigma: &'a [i8],
}

#[derive(Serialize)]
struct EdgeRecord {
    i: usize,
    j: usize,
}

#[derive(Serialize)]
struct ClauseRecord {
    vars: Vec<usize>,
    signs: Vec<i8>,
}

#[derive(Serialize)]
struct ConstraintRecord<'a> {
    vars: &'a [usize],
    value: i8,
}

/// A block model graph as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmFile {
    pub delta: f64,
    pub p: f64,
    pub seed: u64,
    pub reduction: Option<ReductionSidecar>,
    pub truth: Option<HiddenPartition>,
    pub graph: BipartiteGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspFile {
    pub seed: u64,
    pub distribution: PlantingDistribution,
    pub instance: PlantedCspInstance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldreichFile {
    pub seed: u64,
    pub instance: GoldreichInstance,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceFile {
    Sbm(SbmFile),
    Csp(CspFile),
    Goldreich(GoldreichFile),
}

fn line<W: Write, T: Serialize>(w: &mut W, record: &T) -> Result<(), FormatError> {
    serde_json::to_writer(&mut *w, record).map_err(|e| FormatError::Json { line: 0, source: e })?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_sbm<W: Write>(w: &mut W, file: &SbmFile) -> Result<(), FormatError> {
    let g = &file.graph;
    line(w, &Header::Sbm { n1: g.n1, n2: g.n2, delta: file.delta, p: file.p, seed: file.seed })?;
    if let Some(sidecar) = &file.reduction {
        line(w, sidecar)?;
    }
    if let Some(truth) = &file.truth {
        line(w, &TruthRecord { truth_u: &truth.u, truth_v: &truth.v })?;
    }
    for &(i, j) in &g.edges {
        line(w, &EdgeRecord { i, j })?;
    }
    Ok(())
}

pub fn write_csp<W: Write>(w: &mut W, file: &CspFile) -> Result<(), FormatError> {
    let inst = &file.instance;
    line(
        w,
        &Header::Csp {
            n: inst.n,
            k: inst.k,
            m: inst.clauses.len(),
            seed: file.seed,
            weights: file.distribution.weights().to_vec(),
        },
    )?;
    if let Some(sigma) = &inst.sigma {
        line(w, &SigmaRecord { sigma })?;
    }
    for clause in &inst.clauses {
        line(
            w,
            &ClauseRecord {
                vars: clause.iter().map(|l| l.var).collect(),
                signs: clause.iter().map(|l| l.sign).collect(),
            },
        )?;
    }
    Ok(())
}

pub fn write_goldreich<W: Write>(w: &mut W, file: &GoldreichFile) -> Result<(), FormatError> {
    let inst = &file.instance;
    line(
        w,
        &Header::Goldreich {
            n: inst.n,
            k: inst.k(),
            m: inst.constraints.len(),
            seed: file.seed,
            predicate: inst.predicate.clone(),
        },
    )?;
    if let Some(sigma) = &inst.sigma {
        line(w, &SigmaRecord { sigma })?;
    }
    for (vars, value) in &inst.constraints {
        line(w, &ConstraintRecord { vars, value: *value })?;
    }
    Ok(())
}

pub fn write_instance<W: Write>(w: &mut W, file: &InstanceFile) -> Result<(), FormatError> {
    match file {
        InstanceFile::Sbm(f) => write_sbm(w, f),
        InstanceFile::Csp(f) => write_csp(w, f),
        InstanceFile::Goldreich(f) => write_goldreich(w, f),
    }
}

/// Reads any of the three file kinds and validates the result.
pub fn read_instance<R: BufRead>(r: R) -> Result<InstanceFile, FormatError> {
    let mut records = Vec::new();
    for (idx, text) in r.lines().enumerate() {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&text).map_err(|e| FormatError::Json { line: idx + 1, source: e })?;
        records.push((idx + 1, rec));
    }
    let mut iter = records.into_iter();
    let (_, first) = iter.next().ok_or(FormatError::Empty)?;
    let header = match first {
        Record::Header(h) => h,
        _ => return Err(FormatError::Layout { line: 1, message: "first record must be a header".into() }),
    };
    let unexpected = |line: usize, what: &str| FormatError::Layout { line, message: format!("unexpected {what} record") };

    match header {
        Header::Sbm { n1, n2, delta, p, seed } => {
            let mut file = SbmFile {
                delta,
                p,
                seed,
                reduction: None,
                truth: None,
                graph: BipartiteGraph { n1, n2, edges: Vec::new() },
            };
            for (ln, rec) in iter {
                match rec {
                    Record::Sidecar(s) if file.reduction.is_none() && file.graph.edges.is_empty() => {
                        file.reduction = Some(s)
                    }
                    Record::Truth { truth_u, truth_v } if file.truth.is_none() && file.graph.edges.is_empty() => {
                        file.truth = Some(HiddenPartition { u: truth_u, v: truth_v })
                    }
                    Record::Edge { i, j } => file.graph.edges.push((i, j)),
                    _ => return Err(unexpected(ln, "non-edge")),
                }
            }
            file.graph.validate()?;
            if let Some(truth) = &file.truth {
                truth.validate()?;
                if truth.u.len() != n1 || truth.v.len() > n2 {
                    return Err(InstanceError::PartitionShape { u: truth.u.len(), v: truth.v.len(), n1, n2 }.into());
                }
            }
            Ok(InstanceFile::Sbm(file))
        }
        Header::Csp { n, k, m, seed, weights } => {
            let distribution = PlantingDistribution::new(weights)?;
            if distribution.k() != k {
                return Err(FormatError::Layout { line: 1, message: format!("k = {k} but weights imply {}", distribution.k()) });
            }
            let mut instance = PlantedCspInstance { n, k, sigma: None, clauses: Vec::with_capacity(m) };
            for (ln, rec) in iter {
                match rec {
                    Record::Sigma { sigma } if instance.sigma.is_none() && instance.clauses.is_empty() => {
                        instance.sigma = Some(sigma)
                    }
                    Record::Clause { vars, signs } => {
                        if vars.len() != signs.len() {
                            return Err(FormatError::Layout { line: ln, message: "vars and signs differ in length".into() });
                        }
                        instance.clauses.push(vars.into_iter().zip(signs).map(|(v, s)| Literal::new(v, s)).collect());
                    }
                    _ => return Err(unexpected(ln, "non-clause")),
                }
            }
            check_count(m, instance.clauses.len())?;
            instance.validate()?;
            Ok(InstanceFile::Csp(CspFile { seed, distribution, instance }))
        }
        Header::Goldreich { n, k, m, seed, predicate } => {
            let mut instance = GoldreichInstance { n, predicate, sigma: None, constraints: Vec::with_capacity(m) };
            if instance.predicate.len() != 1 << k {
                return Err(FormatError::Layout { line: 1, message: format!("predicate table must have 2^{k} entries") });
            }
            for (ln, rec) in iter {
                match rec {
                    Record::Sigma { sigma } if instance.sigma.is_none() && instance.constraints.is_empty() => {
                        instance.sigma = Some(sigma)
                    }
                    Record::Constraint { vars, value } => instance.constraints.push((vars, value)),
                    _ => return Err(unexpected(ln, "non-constraint")),
                }
            }
            check_count(m, instance.constraints.len())?;
            if let Some(sigma) = &instance.sigma {
                if sigma.len() != n {
                    return Err(InstanceError::LengthMismatch(sigma.len(), n).into());
                }
                super::check_signs(sigma)?;
            }
            instance.validate()?;
            Ok(InstanceFile::Goldreich(GoldreichFile { seed, instance }))
        }
    }
}

fn check_count(header: usize, found: usize) -> Result<(), FormatError> {
    if header != found {
        return Err(FormatError::Layout { line: 1, message: format!("header says m = {header}, found {found} records") });
    }
    Ok(())
}
