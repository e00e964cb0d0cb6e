//! A finite model of DNR propagation through a nonempty Π⁰₁ class Q.
//!
//! Q is a set of leaves of a fixed depth, and the oracle table gives the value
//! of the n-th diagonal computation relative to each leaf (or none when it
//! diverges). The run builds g one value at a time so that
//! Q_{g↾n} = {Z ∈ Q : g(i) ≠ {i}^Z(i) for all i < n} never empties, then reads off
//! a witness Z relative to which g avoids the diagonal.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePiClass {
    depth: usize,
    leaves: Vec<BitString>,
}

impl FinitePiClass {
    /// Leaves are sorted and deduplicated; all must have length `depth`.
    pub fn new(depth: usize, leaves: impl IntoIterator<Item = BitString>) -> Result<Self> {
        let mut leaves: Vec<BitString> = leaves.into_iter().collect();
        leaves.sort();
        leaves.dedup();
        if leaves.is_empty() {
            return Err(Error::Precondition("class has no leaves".into()));
        }
        if let Some(bad) = leaves.iter().find(|l| l.len() != depth) {
            return Err(Error::Precondition(format!(
                "leaf {bad} does not have length {depth}"
            )));
        }
        Ok(FinitePiClass { depth, leaves })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaves(&self) -> &[BitString] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn position(&self, leaf: &BitString) -> Option<usize> {
        self.leaves.binary_search(leaf).ok()
    }
}

/// values[n][k] = {n}^Z(n) for the k-th leaf Z of the class, `None` if divergent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTable {
    values: Vec<Vec<Option<u64>>>,
}

impl OracleTable {
    pub fn new(values: Vec<Vec<Option<u64>>>) -> Self {
        OracleTable { values }
    }

    /// Builds a table aligned to `q`; missing entries diverge.
    pub fn from_entries(
        q: &FinitePiClass,
        indices: usize,
        entries: &BTreeMap<(usize, BitString), Option<u64>>,
    ) -> Result<Self> {
        let mut values = vec![vec![None; q.len()]; indices];
        for ((n, leaf), v) in entries {
            if *n >= indices {
                return Err(Error::Precondition(format!("index {n} is not below N = {indices}")));
            }
            let k = q
                .position(leaf)
                .ok_or_else(|| Error::Precondition(format!("{leaf} is not a leaf of the class")))?;
            values[*n][k] = *v;
        }
        Ok(OracleTable { values })
    }

    /// N, the number of diagonal indices.
    pub fn indices(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, n: usize, leaf: usize) -> Option<u64> {
        self.values[n][leaf]
    }

    fn check(&self, q: &FinitePiClass) -> Result<()> {
        if self.values.iter().any(|row| row.len() != q.len()) {
            return Err(Error::Precondition("oracle table is not aligned with the class".into()));
        }
        Ok(())
    }
}

/// Positions of the leaves Z with T(n, Z) ≠ σ(n) for every n < |σ|; a divergent
/// T(n, Z) differs from every value.
pub fn restrict_class(q: &FinitePiClass, t: &OracleTable, sigma: &[u64]) -> Result<Vec<usize>> {
    t.check(q)?;
    if sigma.len() > t.indices() {
        return Err(Error::Precondition(format!(
            "history of length {} exceeds N = {}",
            sigma.len(),
            t.indices()
        )));
    }
    Ok(restrict(t, 0..q.len(), sigma))
}

fn restrict(t: &OracleTable, from: impl Iterator<Item = usize>, sigma: &[u64]) -> Vec<usize> {
    from.filter(|&k| {
        sigma
            .iter()
            .enumerate()
            .all(|(n, &v)| t.value(n, k) != Some(v))
    })
    .collect()
}

fn diagonal_on(t: &OracleTable, n: usize, leaves: &[usize]) -> Option<u64> {
    let first = t.value(n, leaves[0])?;
    leaves
        .iter()
        .all(|&k| t.value(n, k) == Some(first))
        .then_some(first)
}

/// m if T(n, Z) = m for every Z ∈ Q_σ, otherwise undefined. An empty Q_σ is
/// rejected since every m would qualify.
pub fn derived_diagonal(
    q: &FinitePiClass,
    t: &OracleTable,
    n: usize,
    sigma: &[u64],
) -> Result<Option<u64>> {
    if n >= t.indices() {
        return Err(Error::Precondition(format!("index {n} is not below N = {}", t.indices())));
    }
    let leaves = restrict_class(q, t, sigma)?;
    if leaves.is_empty() {
        return Err(Error::Precondition(format!("Q_σ is empty for σ = {sigma:?}")));
    }
    Ok(diagonal_on(t, n, &leaves))
}

/// Stand-in for a DNR function: any value other than the defined diagonal.
pub fn avoid(m: Option<u64>) -> u64 {
    match m {
        Some(m) => m + 1,
        None => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationRun {
    pub g: Vec<u64>,
    /// diagonal value seen at each step
    pub diagonal: Vec<Option<u64>>,
    /// Q_{g↾n} for n = 0..=N, as leaf positions
    pub chain: Vec<Vec<usize>>,
    pub witness: BitString,
}

impl PropagationRun {
    pub fn chain_leaves<'a>(&'a self, q: &'a FinitePiClass) -> impl Iterator<Item = Vec<&'a BitString>> + 'a {
        self.chain
            .iter()
            .map(move |c| c.iter().map(|&k| &q.leaves()[k]).collect())
    }
}

pub fn run_propagation(q: &FinitePiClass, t: &OracleTable) -> Result<PropagationRun> {
    t.check(q)?;
    let n_max = t.indices();
    let mut g = Vec::with_capacity(n_max);
    let mut diagonal = Vec::with_capacity(n_max);
    let mut chain = Vec::with_capacity(n_max + 1);
    let mut current: Vec<usize> = (0..q.len()).collect();
    for n in 0..n_max {
        let m = diagonal_on(t, n, &current);
        let v = avoid(m);
        let next: Vec<usize> = current
            .iter()
            .copied()
            .filter(|&k| t.value(n, k) != Some(v))
            .collect();
        g.push(v);
        diagonal.push(m);
        chain.push(std::mem::replace(&mut current, next));
        if current.is_empty() {
            return Err(Error::Invariant(format!(
                "Q_g↾{} is empty with g = {g:?}",
                n + 1
            )));
        }
    }
    let witness = q.leaves()[current[0]].clone();
    chain.push(current);
    Ok(PropagationRun {
        g,
        diagonal,
        chain,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WitnessReport {
    /// each recorded chain element equals Q_{g↾n} recomputed from scratch
    pub chain_matches: bool,
    pub nested: bool,
    pub witness_in_chain: bool,
    /// T(n, witness) undefined or ≠ g(n) for all n < N
    pub avoids: bool,
    /// g(n) differs from the derived diagonal wherever that is defined
    pub diagonal_avoided: bool,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.chain_matches && self.nested && self.witness_in_chain && self.avoids && self.diagonal_avoided
    }
}

pub fn verify_witness(run: &PropagationRun, q: &FinitePiClass, t: &OracleTable) -> WitnessReport {
    let n_max = t.indices();
    if t.check(q).is_err() || run.g.len() != n_max || run.chain.len() != n_max + 1 {
        return WitnessReport::default();
    }
    let chain_matches = (0..=n_max).all(|n| restrict(t, 0..q.len(), &run.g[..n]) == run.chain[n]);
    let nested = run
        .chain
        .windows(2)
        .all(|p| p[1].iter().all(|k| p[0].contains(k)));
    let pos = q.position(&run.witness);
    let witness_in_chain = pos.is_some_and(|k| run.chain.iter().all(|c| c.contains(&k)));
    let avoids = pos.is_some_and(|k| (0..n_max).all(|n| t.value(n, k) != Some(run.g[n])));
    let diagonal_avoided = (0..n_max).all(|n| {
        let leaves = restrict(t, 0..q.len(), &run.g[..n]);
        leaves.is_empty() || diagonal_on(t, n, &leaves) != Some(run.g[n])
    });
    WitnessReport {
        chain_matches,
        nested,
        witness_in_chain,
        avoids,
        diagonal_avoided,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepReport {
    pub instances: u64,
    pub failures: u64,
    /// a description of the first failing instance
    pub first_failure: Option<String>,
}

/// Every class of depth ≤ `max_depth`, every N ≤ `max_n`, and every table with
/// values in {0..=vmax} ∪ {undefined} on the class leaves.
pub fn exhaustive_sweep(max_depth: usize, max_n: usize, vmax: u64) -> Result<SweepReport> {
    let mut report = SweepReport::default();
    let choices: Vec<Option<u64>> = std::iter::once(None).chain((0..=vmax).map(Some)).collect();
    for depth in 0..=max_depth {
        if depth > 4 {
            return Err(Error::TooLarge(format!("sweep depth {depth} > 4")));
        }
        let all: Vec<BitString> = BitString::all_of_length(depth).collect();
        for mask in 1u32..(1 << all.len()) {
            let leaves = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, l)| l.clone());
            let q = FinitePiClass::new(depth, leaves)?;
            for n in 0..=max_n {
                let cells = n * q.len();
                let mut digits = vec![0usize; cells];
                loop {
                    let values = (0..n)
                        .map(|i| (0..q.len()).map(|k| choices[digits[i * q.len() + k]]).collect())
                        .collect();
                    let t = OracleTable::new(values);
                    report.instances += 1;
                    let ok = match run_propagation(&q, &t) {
                        Ok(run) => verify_witness(&run, &q, &t).passed(),
                        Err(_) => false,
                    };
                    if !ok {
                        report.failures += 1;
                        report
                            .first_failure
                            .get_or_insert_with(|| format!("class {:?}, table {:?}", q.leaves(), t.values));
                    }
                    // odometer over the cells
                    let mut i = 0;
                    while i < cells {
                        digits[i] += 1;
                        if digits[i] < choices.len() {
                            break;
                        }
                        digits[i] = 0;
                        i += 1;
                    }
                    if i == cells {
                        break;
                    }
                }
            }
        }
    }
    Ok(report)
}
