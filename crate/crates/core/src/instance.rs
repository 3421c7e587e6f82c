//! Instance files and seeded instance generators.
//!
//! An instance is a JSON object tagged by `"type"`:
//!
//! ```json
//! {"type": "table",    "n": 2, "values": [0, 1, 1, 3]}
//! {"type": "cut",      "n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]]}
//! {"type": "coverage", "n": 2, "sets": [[0, 1], [1, 2]], "weights": [1, 1, 1]}
//! {"type": "modular",  "n": 3, "weights": [2, -1, 3]}
//! ```
//!
//! `values[m]` is `f` of the set whose bitmask is `m`. For coverage, element
//! `i` covers the universe items listed in `sets[i]`, and `weights` gives one
//! weight per universe item (all ones when omitted).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::oracle::{
    table_is_submodular, CoverageFunction, CutFunction, ModularFunction, SetFunction, TableFunction, ValueOracle,
};
use crate::prng::SplitMix64;
use crate::set::ElementSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Instance {
    Table {
        n: usize,
        values: Vec<f64>,
    },
    Cut {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    Coverage {
        n: usize,
        sets: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Modular {
        n: usize,
        weights: Vec<f64>,
    },
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Table { n, .. }
            | Instance::Cut { n, .. }
            | Instance::Coverage { n, .. }
            | Instance::Modular { n, .. } => *n,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Instance::Table { .. } => "table",
            Instance::Cut { .. } => "cut",
            Instance::Coverage { .. } => "coverage",
            Instance::Modular { .. } => "modular",
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(text).map_err(|e| invalid(format!("instance JSON: {e}")))?;
        inst.build()?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instances always serialize")
    }

    /// Validates the instance and builds its set function.
    pub fn function(&self) -> Result<Box<dyn SetFunction>> {
        self.build()
    }

    pub fn oracle(&self) -> Result<ValueOracle> {
        Ok(ValueOracle::from_arc(self.build()?.into()))
    }

    fn build(&self) -> Result<Box<dyn SetFunction>> {
        let func: Box<dyn SetFunction> = match self {
            Instance::Table { values, .. } => Box::new(TableFunction::new(values.clone())?),
            Instance::Cut { n, edges } => Box::new(CutFunction::new(*n, edges.clone())?),
            Instance::Coverage { sets, weights, .. } => {
                let universe = sets.iter().flatten().map(|&i| i + 1).max().unwrap_or(0);
                let weights = weights.clone().unwrap_or_else(|| vec![1.0; universe]);
                Box::new(CoverageFunction::new(sets.clone(), weights)?)
            }
            Instance::Modular { weights, .. } => Box::new(ModularFunction::new(weights.clone())?),
        };
        if func.ground_size() != self.n() {
            return Err(invalid(format!(
                "declared n = {} but the {} data describes {} elements",
                self.n(),
                self.family(),
                func.ground_size()
            )));
        }
        Ok(func)
    }
}

/// Random non-negative submodular table on `n <= 16` elements.
///
/// Generator (all draws from [`SplitMix64`] seeded with `seed`):
///
/// 1. weighted coverage: a universe of `2n` items with weights `U[0,1)`;
///    element `u` covers each item independently with probability 0.3;
/// 2. plus an undirected cut: each pair is an edge with probability 0.5 and
///    weight `U[0,1)`;
/// 3. plus `c * sqrt(|S ∩ W|)` for a random subset `W` (each element w.p.
///    0.5) and `c = U[0,2)`;
/// 4. plus a modular term with weights `U[-1.5, 0.5)`;
/// 5. tabulate, then shift by `-min f` if the minimum is negative.
///
/// Each term is submodular and shifting by a constant preserves
/// submodularity. The table is still checked exhaustively and redrawn
/// (continuing the same stream) if the check ever fails.
pub fn random_submodular_table(n: usize, seed: u64) -> TableFunction {
    assert!(n <= crate::oracle::MAX_CHECK_N, "generator is limited to n <= 16");
    let mut rng = SplitMix64::new(seed);
    loop {
        let values = draw_submodular_values(n, &mut rng);
        if table_is_submodular(&values, n) && values.iter().all(|&v| v >= 0.0) {
            return TableFunction::new(values).expect("generated table is well formed");
        }
    }
}

fn draw_submodular_values(n: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let universe = 2 * n;
    let item_w: Vec<f64> = (0..universe).map(|_| rng.next_f64()).collect();
    let covers: Vec<ElementSet> = (0..n)
        .map(|_| (0..universe).filter(|_| rng.bernoulli(0.3)).collect())
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.bernoulli(0.5) {
                edges.push((u, v, rng.next_f64()));
            }
        }
    }
    let concave_support: ElementSet = (0..n).filter(|_| rng.bernoulli(0.5)).collect();
    let concave_scale = rng.uniform(0.0, 2.0);
    let modular: Vec<f64> = (0..n).map(|_| rng.uniform(-1.5, 0.5)).collect();

    let mut values: Vec<f64> = (0..1u64 << n)
        .map(|m| {
            let s = ElementSet::from_mask(m);
            let covered = s.iter().fold(ElementSet::EMPTY, |acc, u| acc.union(&covers[u]));
            let coverage: f64 = covered.iter().map(|i| item_w[i]).sum();
            let cut: f64 = edges
                .iter()
                .filter(|(u, v, _)| s.contains(*u) != s.contains(*v))
                .map(|e| e.2)
                .sum();
            let concave = concave_scale * (s.intersection(&concave_support).len() as f64).sqrt();
            let linear: f64 = s.iter().map(|u| modular[u]).sum();
            coverage + cut + concave + linear
        })
        .collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        for v in &mut values {
            *v -= min;
        }
    }
    values
}

/// Random undirected cut instance with `U[0,1)` weights and edge density `p`.
pub fn random_cut(n: usize, p: f64, seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.bernoulli(p) {
                edges.push((u, v, rng.next_f64()));
            }
        }
    }
    Instance::Cut { n, edges }
}

/// Random weighted coverage instance: `n` sets over `universe` items.
pub fn random_coverage(n: usize, universe: usize, p: f64, seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let sets = (0..n)
        .map(|_| (0..universe).filter(|_| rng.bernoulli(p)).collect())
        .collect();
    let weights = (0..universe).map(|_| rng.next_f64()).collect();
    Instance::Coverage {
        n,
        sets,
        weights: Some(weights),
    }
}
