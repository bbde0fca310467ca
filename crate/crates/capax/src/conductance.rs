//! Arc-indexed conductances of a chain.
//!
//! `c(x, y) = mu(x) r(x, y)` and the adjoint conductances satisfy
//! `c*(x, y) = c(y, x)` identically, so each unordered pair stores the two
//! directed products once. The symmetric part `c_s` defines the arc set
//! (an arc exists iff `c_s > 0`) and the inner-product weights for flows;
//! the antisymmetric part `c_a` is divergence free by stationarity.

use std::collections::HashMap;

use crate::chain::ChainModel;

/// One undirected arc `lo < hi` with both directed conductances.
#[derive(Debug, Clone, Copy)]
pub struct Arc {
    pub lo: usize,
    pub hi: usize,
    /// `c(lo, hi)`
    pub c_fwd: f64,
    /// `c(hi, lo)`
    pub c_bwd: f64,
    pub c_s: f64,
    /// `c_a(lo, hi)`; the reverse orientation flips the sign.
    pub c_a: f64,
}

#[derive(Debug, Clone)]
pub struct ConductanceGraph {
    n: usize,
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    index: HashMap<(usize, usize), usize>,
    mu: Vec<f64>,
}

impl ConductanceGraph {
    pub fn of(chain: &ChainModel) -> Self {
        let n = chain.n();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut arcs: Vec<Arc> = Vec::new();
        for x in 0..n {
            for &(y, r) in chain.out_edges(x) {
                let c = chain.mu(x) * r;
                let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                let id = *index.entry((lo, hi)).or_insert_with(|| {
                    arcs.push(Arc { lo, hi, c_fwd: 0.0, c_bwd: 0.0, c_s: 0.0, c_a: 0.0 });
                    arcs.len() - 1
                });
                if x == lo {
                    arcs[id].c_fwd = c;
                } else {
                    arcs[id].c_bwd = c;
                }
            }
        }
        for a in arcs.iter_mut() {
            a.c_s = 0.5 * (a.c_fwd + a.c_bwd);
            a.c_a = 0.5 * (a.c_fwd - a.c_bwd);
        }
        // canonical order: by (lo, hi)
        let mut order: Vec<usize> = (0..arcs.len()).collect();
        order.sort_unstable_by_key(|&i| (arcs[i].lo, arcs[i].hi));
        let arcs: Vec<Arc> = order.iter().map(|&i| arcs[i]).collect();
        let mut index = HashMap::with_capacity(arcs.len());
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (id, a) in arcs.iter().enumerate() {
            index.insert((a.lo, a.hi), id);
            adj[a.lo].push(id);
            adj[a.hi].push(id);
        }

        let graph = ConductanceGraph { n, arcs, adj, index, mu: chain.mu_vec().to_vec() };
        // div c_a = 0 at every state is implied by stationarity; broken input
        // would mean a bug upstream.
        for x in 0..n {
            let div: f64 = graph.adj[x]
                .iter()
                .map(|&id| {
                    let a = &graph.arcs[id];
                    if a.lo == x { a.c_a } else { -a.c_a }
                })
                .sum();
            let scale = chain.m(x);
            assert!(
                div.abs() <= chain.tolerances().divergence * scale,
                "antisymmetric conductance has divergence {div:.3e} at state {x} (scale {scale:.3e})"
            );
        }
        graph
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.mu[x]
    }

    /// Arc ids incident to `x`, in canonical order.
    pub fn incident(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    /// Arc id for the unordered pair, if `c_s(x, y) > 0`.
    pub fn arc_id(&self, x: usize, y: usize) -> Option<usize> {
        let key = if x < y { (x, y) } else { (y, x) };
        self.index.get(&key).copied()
    }

    pub fn c(&self, x: usize, y: usize) -> f64 {
        match self.arc_id(x, y) {
            None => 0.0,
            Some(id) => {
                let a = &self.arcs[id];
                if a.lo == x { a.c_fwd } else { a.c_bwd }
            }
        }
    }

    /// Adjoint conductance: `c*(x, y) = c(y, x)`.
    pub fn c_star(&self, x: usize, y: usize) -> f64 {
        self.c(y, x)
    }

    pub fn c_s(&self, x: usize, y: usize) -> f64 {
        self.arc_id(x, y).map_or(0.0, |id| self.arcs[id].c_s)
    }

    pub fn c_a(&self, x: usize, y: usize) -> f64 {
        match self.arc_id(x, y) {
            None => 0.0,
            Some(id) => {
                let a = &self.arcs[id];
                if a.lo == x { a.c_a } else { -a.c_a }
            }
        }
    }
}
