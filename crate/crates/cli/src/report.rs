use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::failure::Failure;

/// One row of the run/bench CSV. Column order is the header
/// `instance,algo,k,seed,value,opt,ratio,queries,max_support,ms`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub algo: String,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub value: Option<f64>,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub queries: Option<u64>,
    pub max_support: Option<usize>,
    pub ms: Option<u64>,
}

impl RunReport {
    /// Set `opt` and the matching ratio. A zero optimum gives ratio 1.
    pub fn with_opt(mut self, opt: Option<f64>) -> Self {
        self.opt = opt;
        self.ratio = match (self.value, opt) {
            (Some(v), Some(o)) if o > 0.0 => Some(v / o),
            (Some(_), Some(_)) => Some(1.0),
            _ => None,
        };
        self
    }
}

pub const HEADER: [&str; 10] = [
    "instance",
    "algo",
    "k",
    "seed",
    "value",
    "opt",
    "ratio",
    "queries",
    "max_support",
    "ms",
];

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_reports(out: Box<dyn Write>, rows: &[RunReport]) -> Result<(), Failure> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
