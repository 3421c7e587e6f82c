/// Accounting collected during one run of a deterministic algorithm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    /// Every oracle query issued by the run.
    pub queries: u64,
    /// Queries made before the first iteration (values of the initial state).
    pub setup_queries: u64,
    /// Fresh queries per iteration, `iteration_queries[i - 1]` for iteration `i`.
    pub iteration_queries: Vec<u64>,
    /// `|D_i|` for `i = 0, 1, ...`.
    pub support_sizes: Vec<usize>,
    pub max_support: usize,
    /// Per-distribution potential: `E[f(X) + f(Y)]` for the unconstrained
    /// algorithm, `E[f(S)]` for the cardinality one; index `i` is `D_i`.
    pub expectations: Vec<f64>,
}

impl RunStats {
    pub(crate) fn record(&mut self, support: usize, expectation: f64) {
        self.support_sizes.push(support);
        self.max_support = self.max_support.max(support);
        self.expectations.push(expectation);
    }
}
