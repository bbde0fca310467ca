//! Canonical representation of a finite-state continuous-time Markov chain.
//!
//! A [`ChainModel`] stores sparse jump rates `r(x, y) > 0`, holding rates
//! `lambda(x) = sum_y r(x, y)`, and a strictly positive stationary measure
//! `mu`. Everything else in the crate (time reversal, symmetrization,
//! conductances, the discrete skeleton) is derived from these three pieces.
//!
//! Construction validates irreducibility and stationarity; instances are
//! immutable afterwards.

use crate::error::{Error, Result};
use crate::solver::SparseLu;
use crate::tol::Tolerances;

#[derive(Debug, Clone)]
pub struct ChainModel {
    labels: Vec<String>,
    out: Vec<Vec<(usize, f64)>>,
    holding: Vec<f64>,
    mu: Vec<f64>,
    normalized: bool,
    tol: Tolerances,
}

/// Discrete-time skeleton: jump probabilities `p(x, y) = r(x, y) / lambda(x)`
/// together with its stationary measure `M(x) = mu(x) * lambda(x)`.
pub struct Skeleton {
    pub p: Vec<Vec<(usize, f64)>>,
    pub m: Vec<f64>,
}

impl ChainModel {
    /// Build a chain from `(from, to, rate)` triples over states `0..n`.
    ///
    /// Duplicate arcs are summed, zero rates dropped. When `mu` is omitted
    /// the stationary measure is solved for and normalized to a probability;
    /// a supplied `mu` is kept verbatim (it may be unnormalized) and checked
    /// against the balance equations.
    pub fn from_triples(
        n: usize,
        triples: &[(usize, usize, f64)],
        mu: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::from_triples_with(n, triples, mu, None, Tolerances::default())
    }

    pub fn from_triples_with(
        n: usize,
        triples: &[(usize, usize, f64)],
        mu: Option<Vec<f64>>,
        labels: Option<Vec<String>>,
        tol: Tolerances,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::ParseError("a chain needs at least two states".into()));
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != n {
                    return Err(Error::ParseError(format!(
                        "{} labels for {} states",
                        l.len(),
                        n
                    )));
                }
                l
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };

        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triples.len());
        for &(x, y, r) in triples {
            if x >= n || y >= n {
                return Err(Error::ParseError(format!(
                    "arc ({x}, {y}) outside state range 0..{n}"
                )));
            }
            if x == y {
                return Err(Error::ParseError(format!("self-loop rate at state {x}")));
            }
            if r < 0.0 || !r.is_finite() {
                return Err(Error::NegativeRate { from: x, to: y, rate: r });
            }
            if r > 0.0 {
                sorted.push((x, y, r));
            }
        }
        sorted.sort_unstable_by_key(|&(x, y, _)| (x, y));

        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (x, y, r) in sorted {
            match out[x].last_mut() {
                Some(last) if last.0 == y => last.1 += r,
                _ => out[x].push((y, r)),
            }
        }
        let holding: Vec<f64> = out
            .iter()
            .map(|edges| edges.iter().map(|&(_, r)| r).sum())
            .collect();

        check_strongly_connected(&out, n)?;

        let (mu, normalized) = match mu {
            Some(m) => {
                if m.len() != n {
                    return Err(Error::ParseError(format!(
                        "mu has {} entries for {} states",
                        m.len(),
                        n
                    )));
                }
                if let Some(i) = m.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
                    return Err(Error::ParseError(format!(
                        "mu must be strictly positive, got {} at state {i}",
                        m[i]
                    )));
                }
                let sum: f64 = m.iter().sum();
                let normalized = (sum - 1.0).abs() <= 1e-12 * sum.max(1.0);
                (m, normalized)
            }
            None => (solve_stationary(&out, &holding, n)?, true),
        };

        let chain = ChainModel { labels, out, holding, mu, normalized, tol };
        if let Some((state, residual)) = chain.worst_balance_residual() {
            if residual > tol.stationarity {
                return Err(Error::NotStationary { state, residual });
            }
        }
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    /// Outgoing arcs of `x`, sorted by target state.
    pub fn out_edges(&self, x: usize) -> &[(usize, f64)] {
        &self.out[x]
    }

    pub fn rate(&self, x: usize, y: usize) -> f64 {
        match self.out[x].binary_search_by_key(&y, |&(t, _)| t) {
            Ok(i) => self.out[x][i].1,
            Err(_) => 0.0,
        }
    }

    pub fn holding(&self, x: usize) -> f64 {
        self.holding[x]
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.mu[x]
    }

    pub fn mu_vec(&self) -> &[f64] {
        &self.mu
    }

    /// `M(x) = mu(x) * lambda(x)`, the skeleton's stationary weight.
    pub fn m(&self, x: usize) -> f64 {
        self.mu[x] * self.holding[x]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Largest relative balance residual `|sum_x mu(x) r(x,y) - mu(y) lambda(y)|`.
    pub fn worst_balance_residual(&self) -> Option<(usize, f64)> {
        let n = self.n();
        let mut inflow = vec![0.0; n];
        for x in 0..n {
            for &(y, r) in &self.out[x] {
                inflow[y] += self.mu[x] * r;
            }
        }
        (0..n)
            .map(|y| {
                let m = self.mu[y] * self.holding[y];
                (y, (inflow[y] - m).abs() / m)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Time-reversed chain: `r*(y, x) = mu(x) r(x, y) / mu(y)`, same measure.
    pub fn adjoint(&self) -> ChainModel {
        let n = self.n();
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for x in 0..n {
            for &(y, r) in &self.out[x] {
                out[y].push((x, self.mu[x] * r / self.mu[y]));
            }
        }
        for edges in out.iter_mut() {
            edges.sort_unstable_by_key(|&(t, _)| t);
        }
        let holding = out
            .iter()
            .map(|edges| edges.iter().map(|&(_, r)| r).sum())
            .collect();
        ChainModel {
            labels: self.labels.clone(),
            out,
            holding,
            mu: self.mu.clone(),
            normalized: self.normalized,
            tol: self.tol,
        }
    }

    /// Reversible chain with rates `(r + r*) / 2`; its conductances are `c_s`.
    pub fn symmetrize(&self) -> ChainModel {
        let n = self.n();
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for x in 0..n {
            for &(y, r) in &self.out[x] {
                out[x].push((y, 0.5 * r));
                out[y].push((x, 0.5 * self.mu[x] * r / self.mu[y]));
            }
        }
        for edges in out.iter_mut() {
            edges.sort_unstable_by_key(|&(t, _)| t);
            let mut w = 0;
            for i in 0..edges.len() {
                if w > 0 && edges[w - 1].0 == edges[i].0 {
                    edges[w - 1].1 += edges[i].1;
                } else {
                    edges[w] = edges[i];
                    w += 1;
                }
            }
            edges.truncate(w);
        }
        let holding = out
            .iter()
            .map(|edges| edges.iter().map(|&(_, r)| r).sum())
            .collect();
        ChainModel {
            labels: self.labels.clone(),
            out,
            holding,
            mu: self.mu.clone(),
            normalized: self.normalized,
            tol: self.tol,
        }
    }

    pub fn conductances(&self) -> crate::conductance::ConductanceGraph {
        crate::conductance::ConductanceGraph::of(self)
    }

    pub fn skeleton(&self) -> Skeleton {
        let p = self
            .out
            .iter()
            .enumerate()
            .map(|(x, edges)| {
                edges
                    .iter()
                    .map(|&(y, r)| (y, r / self.holding[x]))
                    .collect()
            })
            .collect();
        let m = (0..self.n()).map(|x| self.m(x)).collect();
        Skeleton { p, m }
    }

    /// `(L f)(x) = sum_y r(x, y) [f(y) - f(x)]`.
    pub fn apply_generator(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|x| {
                self.out[x]
                    .iter()
                    .map(|&(y, r)| r * (f[y] - f[x]))
                    .sum()
            })
            .collect()
    }

    /// `(L* f)(x)` computed from in-arcs without materializing the adjoint.
    pub fn apply_adjoint_generator(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut acc = vec![0.0; n];
        for x in 0..n {
            for &(y, r) in &self.out[x] {
                acc[y] += self.mu[x] * r * (f[x] - f[y]);
            }
        }
        for y in 0..n {
            acc[y] /= self.mu[y];
        }
        acc
    }

    /// Dirichlet form `<f, (-L) f>_mu`.
    pub fn dirichlet_form(&self, f: &[f64]) -> f64 {
        let mut d = 0.0;
        for x in 0..self.n() {
            for &(y, r) in &self.out[x] {
                let df = f[y] - f[x];
                d += 0.5 * self.mu[x] * r * df * df;
            }
        }
        d
    }

    pub fn inner_mu(&self, f: &[f64], g: &[f64]) -> f64 {
        (0..self.n()).map(|x| self.mu[x] * f[x] * g[x]).sum()
    }

    /// Largest relative deviation between the rate tables of two chains with
    /// the same state count; infinite if the arc sets differ.
    pub fn max_rate_rel_dev(&self, other: &ChainModel) -> f64 {
        assert_eq!(self.n(), other.n());
        let mut worst = 0.0f64;
        for x in 0..self.n() {
            let (a, b) = (&self.out[x], &other.out[x]);
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            for (&(ya, ra), &(yb, rb)) in a.iter().zip(b.iter()) {
                if ya != yb {
                    return f64::INFINITY;
                }
                worst = worst.max(crate::tol::rel_dev(ra, rb));
            }
        }
        worst
    }

    pub fn max_mu_rel_dev(&self, other: &ChainModel) -> f64 {
        self.mu
            .iter()
            .zip(other.mu.iter())
            .map(|(&a, &b)| crate::tol::rel_dev(a, b))
            .fold(0.0, f64::max)
    }
}

fn check_strongly_connected(out: &[Vec<(usize, f64)>], n: usize) -> Result<()> {
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, edges) in out.iter().enumerate() {
        for &(y, _) in edges {
            inc[y].push(x);
        }
    }
    let reach = |next: &dyn Fn(usize) -> Vec<usize>| -> Vec<bool> {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in next(x) {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    let fwd = reach(&|x| out[x].iter().map(|&(y, _)| y).collect());
    if let Some(s) = fwd.iter().position(|&b| !b) {
        return Err(Error::NotIrreducible { state: s, direction: "from state 0" });
    }
    let bwd = reach(&|x| inc[x].clone());
    if let Some(s) = bwd.iter().position(|&b| !b) {
        return Err(Error::NotIrreducible { state: s, direction: "towards state 0" });
    }
    Ok(())
}

/// Null vector of the transposed rate matrix, with one row replaced by the
/// normalization constraint; direct sparse solve, no iteration to tune.
fn solve_stationary(out: &[Vec<(usize, f64)>], holding: &[f64], n: usize) -> Result<Vec<f64>> {
    let pinned = n - 1;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for x in 0..n {
        if x != pinned {
            triplets.push((x, x, -holding[x]));
        }
        for &(y, r) in &out[x] {
            if y != pinned {
                triplets.push((y, x, r));
            }
        }
    }
    for j in 0..n {
        triplets.push((pinned, j, 1.0));
    }
    let lu = SparseLu::factor(n, &triplets)?;
    let mut rhs = vec![0.0; n];
    rhs[pinned] = 1.0;
    let mu = lu.solve(&rhs)?;
    if mu.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::SingularSystem(
            "stationary measure solve produced non-positive entries".into(),
        ));
    }
    let sum: f64 = mu.iter().sum();
    Ok(mu.into_iter().map(|v| v / sum).collect())
}
