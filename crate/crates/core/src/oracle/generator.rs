use crate::error::{Error, Result};
use crate::model::{transitions_with, ModelParams, QueueState, RuleSet};

/// Truncated generator in compressed-row form.
///
/// States are indexed `phase * (N + 1) + count`. Rows of states the policy
/// excludes are empty. Arrivals at level `N` are dropped, so every row sums
/// to zero.
#[derive(Clone, Debug)]
pub struct Generator {
    pub params: ModelParams,
    pub n_trunc: usize,
    pub rules: RuleSet,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

pub fn build_generator(params: &ModelParams, n_trunc: usize) -> Result<Generator> {
    build_generator_with(params, n_trunc, params.rules())
}

/// Same as [`build_generator`] with an explicit rule set, so the one-server
/// and multi-server rules can be compared at `c = 1`.
pub fn build_generator_with(params: &ModelParams, n_trunc: usize, rules: RuleSet) -> Result<Generator> {
    let c = params.servers;
    if n_trunc < c.max(10) {
        return Err(Error::InvalidConfig(format!(
            "n_trunc = {n_trunc} must be at least max(servers, 10) = {}",
            c.max(10)
        )));
    }
    let levels = n_trunc + 1;
    let mut row_start = Vec::with_capacity((c + 1) * levels + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_start.push(0);
    for j in 0..=c {
        for n in 0..=n_trunc {
            let s = QueueState::new(j, n);
            if params.is_valid_state(s) {
                let mut row: Vec<(usize, f64)> = transitions_with(params, rules, s)?
                    .into_iter()
                    .filter(|t| t.to.count <= n_trunc)
                    .map(|t| (t.to.phase * levels + t.to.count, t.rate))
                    .collect();
                // Summing in column order keeps the diagonal independent of
                // the order the rule set lists transitions.
                row.sort_by_key(|(k, _)| *k);
                let out: f64 = row.iter().map(|(_, r)| r).sum();
                row.push((j * levels + n, -out));
                row.sort_by_key(|(k, _)| *k);
                for (k, r) in row {
                    cols.push(k);
                    vals.push(r);
                }
            }
            row_start.push(cols.len());
        }
    }
    Ok(Generator {
        params: *params,
        n_trunc,
        rules,
        row_start,
        cols,
        vals,
    })
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn index(&self, s: QueueState) -> usize {
        s.phase * (self.n_trunc + 1) + s.count
    }

    pub fn state(&self, index: usize) -> QueueState {
        QueueState::new(index / (self.n_trunc + 1), index % (self.n_trunc + 1))
    }

    pub fn is_valid(&self, index: usize) -> bool {
        self.params.is_valid_state(self.state(index))
    }

    /// Nonzero entries of a row as `(column, rate)`, diagonal included.
    pub fn row(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[index]..self.row_start[index + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn entry(&self, from: QueueState, to: QueueState) -> f64 {
        let k = self.index(to);
        self.row(self.index(from)).find(|(c, _)| *c == k).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `x Q` for a row vector `x` in linear-index order.
    pub fn left_multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (k, v) in self.row(i) {
                    y[k] += xi * v;
                }
            }
        }
        y
    }

    /// Entry-for-entry equality of structure and values.
    pub fn same_entries(&self, other: &Generator) -> bool {
        self.n_trunc == other.n_trunc
            && self.row_start == other.row_start
            && self.cols == other.cols
            && self.vals == other.vals
    }
}
