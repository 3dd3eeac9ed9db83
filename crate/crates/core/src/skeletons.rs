//! Skeleton generators: 1-factorization motifs for full connectivity,
//! star and line motifs for constrained hardware, and random sequential
//! skeletons with one CNOT per layer.

use std::collections::BTreeSet;

use rand::Rng;

use crate::circuit::{CnotLayer, Dressing, Skeleton};
use crate::error::{Error, Result};
use crate::params::{self, JacobianMode, RankOptions};

/// Undirected coupling graph of a device.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingGraph {
    n_qubits: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl CouplingGraph {
    pub fn new(n_qubits: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on qubit {a}")));
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::QubitOutOfRange { index: a.max(b), n_qubits });
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n_qubits, edges: set })
    }

    pub fn complete(n_qubits: usize) -> Self {
        let edges = (0..n_qubits).flat_map(|a| (a + 1..n_qubits).map(move |b| (a, b))).collect();
        Self { n_qubits, edges }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Whether every CNOT of `skeleton` lies on an edge.
    pub fn admits(&self, skeleton: &Skeleton) -> bool {
        skeleton.n_qubits() <= self.n_qubits
            && skeleton.cnot_layers().iter().all(|l| l.pairs.iter().all(|&(c, t)| self.contains(c, t)))
    }
}

/// Round-robin (circle method) 1-factorization of `K_n`: `n - 1` perfect
/// matchings that together use every pair exactly once.
pub fn one_factorization(n: usize) -> Result<Vec<CnotLayer>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddQubitCount(n));
    }
    let m = n - 1;
    let rounds = (0..m)
        .map(|r| {
            let mut pairs = vec![(r.min(m), r.max(m))];
            for k in 1..n / 2 {
                let a = (r + k) % m;
                let b = (r + m - k) % m;
                pairs.push((a.min(b), a.max(b)));
            }
            pairs.sort_unstable();
            CnotLayer::new(pairs)
        })
        .collect();
    Ok(rounds)
}

/// `l = ceil((4^n - 1 - n) / (2n))` single-qubit layers for full connectivity.
pub fn required_layers(n: usize) -> usize {
    assert!(n >= 1, "need at least one qubit");
    let numer = (1u128 << (2 * n)) - 1 - n as u128;
    let denom = 2 * n as u128;
    numer.div_ceil(denom) as usize
}

/// Full-connectivity skeleton with `s_layers` single-qubit layers whose CNOT
/// layers cycle through the 1-factorization in generation order.
pub fn full_skeleton_with_layers(n: usize, s_layers: usize) -> Result<Skeleton> {
    if s_layers == 0 {
        return Err(Error::InvalidArgument("need at least one single-qubit layer".into()));
    }
    let matchings = one_factorization(n)?;
    let layers = (0..s_layers - 1).map(|k| matchings[k % matchings.len()].clone()).collect();
    Skeleton::new(n, layers, Dressing::Full)
}

/// Full-connectivity skeleton at [`required_layers`] depth.
pub fn full_skeleton(n: usize) -> Result<Skeleton> {
    full_skeleton_with_layers(n, required_layers(n))
}

/// Star motif: layer `k` couples `center` (control) to `leaves[k mod #leaves]`.
pub fn star_skeleton(n_qubits: usize, center: usize, leaves: &[usize], cnot_layers: usize) -> Result<Skeleton> {
    if leaves.is_empty() {
        return Err(Error::InvalidArgument("star needs at least one leaf".into()));
    }
    let layers = (0..cnot_layers).map(|k| CnotLayer::single(center, leaves[k % leaves.len()])).collect();
    Skeleton::new(n_qubits, layers, Dressing::SupportOnly)
}

/// Star on `n` qubits centered at qubit 0.
pub fn star_skeleton_default(n: usize, cnot_layers: usize) -> Result<Skeleton> {
    if n < 2 {
        return Err(Error::InvalidArgument("star needs at least two qubits".into()));
    }
    let leaves: Vec<usize> = (1..n).collect();
    star_skeleton(n, 0, &leaves, cnot_layers)
}

/// Nearest-neighbour line: layers alternate `{(0,1),(2,3),...}` and
/// `{(1,2),(3,4),...}`. With two qubits every layer is `{(0,1)}`.
pub fn line_skeleton(n: usize, cnot_layers: usize) -> Result<Skeleton> {
    if n < 2 {
        return Err(Error::InvalidArgument("line needs at least two qubits".into()));
    }
    let pairs_from = |start: usize| (start..n.saturating_sub(1)).step_by(2).map(|a| (a, a + 1)).collect::<Vec<_>>();
    let even = CnotLayer::new(pairs_from(0));
    let odd = CnotLayer::new(pairs_from(1));
    let layers = (0..cnot_layers)
        .map(|k| if k % 2 == 1 && !odd.pairs.is_empty() { odd.clone() } else { even.clone() })
        .collect();
    Skeleton::new(n, layers, Dressing::SupportOnly)
}

/// Greedy motif for an arbitrary coupling graph: each layer is a maximal
/// matching built from the least recently used edges.
pub fn graph_skeleton(graph: &CouplingGraph, cnot_layers: usize) -> Result<Skeleton> {
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    if edges.is_empty() {
        return Err(Error::InvalidArgument("coupling graph has no edges".into()));
    }
    let mut last_used = vec![0usize; edges.len()];
    let mut layers = Vec::with_capacity(cnot_layers);
    for k in 0..cnot_layers {
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&e| (last_used[e], e));
        let mut busy = vec![false; graph.n_qubits()];
        let mut pairs = Vec::new();
        for e in order {
            let (a, b) = edges[e];
            if !busy[a] && !busy[b] {
                busy[a] = true;
                busy[b] = true;
                pairs.push((a, b));
                last_used[e] = k + 1;
            }
        }
        pairs.sort_unstable();
        layers.push(CnotLayer::new(pairs));
    }
    Skeleton::new(graph.n_qubits(), layers, Dressing::SupportOnly)
}

/// One CNOT per layer on a uniformly random unordered pair (smaller index
/// is the control), dressed on the touched qubits after each CNOT.
pub fn sequential_random_skeleton<R: Rng + ?Sized>(n: usize, n_cnots: usize, rng: &mut R) -> Result<Skeleton> {
    if n < 2 {
        return Err(Error::InvalidArgument("sequential skeletons need at least two qubits".into()));
    }
    let pairs = all_pairs(n);
    let layers = (0..n_cnots)
        .map(|_| {
            let (a, b) = pairs[rng.random_range(0..pairs.len())];
            CnotLayer::single(a, b)
        })
        .collect();
    Skeleton::new(n, layers, Dressing::SupportOnly)
}

/// Sequential skeleton from an explicit list of pairs.
pub fn sequential_skeleton(n: usize, pairs: &[(usize, usize)]) -> Result<Skeleton> {
    Skeleton::new(n, pairs.iter().map(|&(a, b)| CnotLayer::single(a, b)).collect(), Dressing::SupportOnly)
}

/// Unordered pairs `(a, b)`, `a < b`, in lexicographic order.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Smallest number of CNOT layers at which `generator` yields a skeleton
/// whose numeric effective-parameter count reaches `4^n - 1`.
pub fn required_layers_constrained<F>(n: usize, generator: F) -> Result<usize>
where
    F: Fn(usize) -> Result<Skeleton>,
{
    let required = params::required_parameters(n);
    let options = RankOptions { mode: JacobianMode::Analytic, ..RankOptions::default() };
    let adequate = |layers: usize| -> Result<bool> {
        Ok(params::effective_parameters_numeric(&generator(layers)?, &options)?.effective >= required)
    };
    if adequate(0)? {
        return Ok(0);
    }
    // exponential search for an adequate depth, then bisect; the rank call
    // fails with BudgetExceeded if no depth within budget is adequate
    let (mut lo, mut hi) = (0, 1);
    while !adequate(hi)? {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if adequate(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
