//! Equilibrium potentials and the probabilistic capacity route.
//!
//! All hitting probabilities are invariant under time change, so they are
//! solved on the discrete skeleton; holding rates only enter through
//! `M(x) = mu(x) lambda(x)`.

use crate::chain::ChainModel;
use crate::conductance::ConductanceGraph;
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::solver::SparseLu;

/// Equilibrium potentials for a set pair `(A, B)`:
/// `v(x) = P_x[T_A < T_B]`, `v_star` the same for the time-reversed chain,
/// and `f = (v + v_star) / 2`, the optimizer of the min-max principle.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub v: Vec<f64>,
    pub v_star: Vec<f64>,
    pub f: Vec<f64>,
}

pub(crate) fn validate_pair(n: usize, a: &[usize], b: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sa: Vec<usize> = a.to_vec();
    let mut sb: Vec<usize> = b.to_vec();
    sa.sort_unstable();
    sa.dedup();
    sb.sort_unstable();
    sb.dedup();
    for &x in sa.iter().chain(sb.iter()) {
        if x >= n {
            return Err(Error::ParseError(format!("state {x} out of range 0..{n}")));
        }
    }
    let mut i = 0;
    let mut j = 0;
    while i < sa.len() && j < sb.len() {
        match sa[i].cmp(&sb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return Err(Error::SetsIntersect(sa[i])),
        }
    }
    Ok((sa, sb))
}

/// Solve `L v = 0` off `A u B` with `v = 1` on `A`, `v = 0` on `B`.
pub(crate) fn solve_harmonic(chain: &ChainModel, a: &[usize], b: &[usize]) -> Result<Vec<f64>> {
    let n = chain.n();
    let (a, b) = validate_pair(n, a, b)?;
    let mut kind = vec![0u8; n]; // 0 interior, 1 in A, 2 in B
    for &x in &a {
        kind[x] = 1;
    }
    for &x in &b {
        kind[x] = 2;
    }
    let interior: Vec<usize> = (0..n).filter(|&x| kind[x] == 0).collect();
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in interior.iter().enumerate() {
        pos[x] = i;
    }

    let mut v = vec![0.0; n];
    for &x in &a {
        v[x] = 1.0;
    }
    if !interior.is_empty() {
        let m = interior.len();
        let mut triplets = Vec::new();
        let mut rhs = vec![0.0; m];
        for (i, &x) in interior.iter().enumerate() {
            triplets.push((i, i, -chain.holding(x)));
            for &(y, r) in chain.out_edges(x) {
                match kind[y] {
                    0 => triplets.push((i, pos[y], r)),
                    1 => rhs[i] -= r,
                    _ => {}
                }
            }
        }
        let lu = SparseLu::factor(m, &triplets)?;
        let sol = lu.solve(&rhs)?;
        for (i, &x) in interior.iter().enumerate() {
            v[x] = sol[i];
        }
        // harmonicity is re-checked after the solve; a silent failure here
        // would poison every downstream capacity
        let lv = chain.apply_generator(&v);
        for &x in &interior {
            let allowed = chain.tolerances().harmonicity * chain.holding(x);
            if lv[x].abs() > allowed {
                return Err(Error::SingularSystem(format!(
                    "harmonicity residual {:.3e} at state {x} exceeds {allowed:.3e}",
                    lv[x]
                )));
            }
        }
        for &x in &interior {
            if v[x] < -1e-9 || v[x] > 1.0 + 1e-9 {
                return Err(Error::SingularSystem(format!(
                    "potential {} at state {x} escapes [0, 1]",
                    v[x]
                )));
            }
            v[x] = v[x].clamp(0.0, 1.0);
        }
    }
    Ok(v)
}

pub fn equilibrium_potential(
    chain: &ChainModel,
    a: &[usize],
    b: &[usize],
) -> Result<PotentialSolution> {
    let (sa, sb) = validate_pair(chain.n(), a, b)?;
    let v = solve_harmonic(chain, &sa, &sb)?;
    let v_star = solve_harmonic(&chain.adjoint(), &sa, &sb)?;
    let f = v.iter().zip(v_star.iter()).map(|(&x, &y)| 0.5 * (x + y)).collect();
    Ok(PotentialSolution { a: sa, b: sb, v, v_star, f })
}

/// One-step escape rate `sum_y r(x, y) (1 - v(y))`, which is
/// `lambda(x) P_x[T_B < T_A^+]` for `x` in `A`.
fn escape_rate(chain: &ChainModel, x: usize, v: &[f64]) -> f64 {
    chain
        .out_edges(x)
        .iter()
        .map(|&(y, r)| r * (1.0 - v[y]))
        .sum()
}

pub(crate) fn capacity_from_potential(chain: &ChainModel, a: &[usize], v: &[f64]) -> f64 {
    a.iter().map(|&x| chain.mu(x) * escape_rate(chain, x, v)).sum()
}

/// Capacity by the probabilistic route:
/// `Cap(A, B) = sum_{x in A} M(x) P_x[T_A^+ > T_B^+]`.
pub fn capacity_prob(chain: &ChainModel, a: &[usize], b: &[usize]) -> Result<f64> {
    let (sa, sb) = validate_pair(chain.n(), a, b)?;
    let v = solve_harmonic(chain, &sa, &sb)?;
    let cap = capacity_from_potential(chain, &sa, &v);
    if !(cap > 0.0) {
        return Err(Error::SingularSystem(format!(
            "capacity {cap} is not positive for an irreducible chain"
        )));
    }
    Ok(cap)
}

/// The same capacity computed from the time-reversed chain started in `B`;
/// agrees with [`capacity_prob`] by the symmetry of capacities.
pub fn capacity_prob_reversed(chain: &ChainModel, a: &[usize], b: &[usize]) -> Result<f64> {
    capacity_prob(&chain.adjoint(), b, a)
}

/// Green function of the skeleton killed on `B`, `G_B = (I - P_killed)^{-1}`.
pub struct KilledGreen {
    interior: Vec<usize>,
    pos: Vec<usize>,
    lu: SparseLu,
    holding: Vec<f64>,
    m: Vec<f64>,
}

pub fn green_killed(chain: &ChainModel, b: &[usize]) -> Result<KilledGreen> {
    let n = chain.n();
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut killed = vec![false; n];
    for &x in b {
        if x >= n {
            return Err(Error::ParseError(format!("state {x} out of range 0..{n}")));
        }
        killed[x] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&x| !killed[x]).collect();
    if interior.is_empty() {
        return Err(Error::NotProperSubset);
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in interior.iter().enumerate() {
        pos[x] = i;
    }
    let m = interior.len();
    let mut triplets = Vec::new();
    for (i, &x) in interior.iter().enumerate() {
        triplets.push((i, i, 1.0));
        for &(y, r) in chain.out_edges(x) {
            if !killed[y] {
                triplets.push((i, pos[y], -r / chain.holding(x)));
            }
        }
    }
    let lu = SparseLu::factor(m, &triplets)?;
    Ok(KilledGreen {
        interior,
        pos,
        lu,
        holding: (0..n).map(|x| chain.holding(x)).collect(),
        m: (0..n).map(|x| chain.m(x)).collect(),
    })
}

impl KilledGreen {
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// `G_B(., y)` over the interior states, in `interior()` order.
    pub fn column(&self, y: usize) -> Result<Vec<f64>> {
        let j = self.require(y)?;
        let mut rhs = vec![0.0; self.interior.len()];
        rhs[j] = 1.0;
        self.lu.solve(&rhs)
    }

    /// Expected number of visits to `y` before absorption, starting at `x`.
    pub fn entry(&self, x: usize, y: usize) -> Result<f64> {
        let i = self.require(x)?;
        Ok(self.column(y)?[i])
    }

    /// Continuous-time occupation density `E_x[time at y] = G_B(x, y) / lambda(y)`.
    pub fn entry_ct(&self, x: usize, y: usize) -> Result<f64> {
        Ok(self.entry(x, y)? / self.holding[y])
    }

    /// Full matrix `G[x][y]` over interior states (both in `interior()` order).
    pub fn dense(&self) -> Result<Vec<Vec<f64>>> {
        let m = self.interior.len();
        let mut rhs = Vec::with_capacity(m);
        for j in 0..m {
            let mut e = vec![0.0; m];
            e[j] = 1.0;
            rhs.push(e);
        }
        let cols = self.lu.solve_columns(&rhs)?;
        let mut g = vec![vec![0.0; m]; m];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..m {
                g[i][j] = col[i];
            }
        }
        Ok(g)
    }

    fn require(&self, x: usize) -> Result<usize> {
        let p = self.pos.get(x).copied().unwrap_or(usize::MAX);
        if p == usize::MAX {
            Err(Error::ParseError(format!("state {x} is not interior")))
        } else {
            Ok(p)
        }
    }

    pub fn m(&self, x: usize) -> f64 {
        self.m[x]
    }
}

/// Harmonic measure (normalized charge distribution) on `A`:
/// `nu(a) = M(a) P_a[T_B^+ < T_A^+] / Cap(A, B)`. States of `A` with no exit
/// toward `B` carry zero mass.
pub fn harmonic_measure(
    chain: &ChainModel,
    a: &[usize],
    b: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let (sa, sb) = validate_pair(chain.n(), a, b)?;
    let v = solve_harmonic(chain, &sa, &sb)?;
    let weights: Vec<f64> = sa
        .iter()
        .map(|&x| chain.mu(x) * escape_rate(chain, x, &v))
        .collect();
    let cap: f64 = weights.iter().sum();
    if !(cap > 0.0) {
        return Err(Error::SingularSystem("zero capacity".into()));
    }
    Ok(sa.iter().zip(weights).map(|(&x, w)| (x, w / cap)).collect())
}

/// Expected net crossings per arc for the skeleton started from the harmonic
/// measure of the reversed chain and killed at `B`, normalized by capacity:
/// the flow `Cap(A, B)^{-1} (v*(x) c(x, y) - v*(y) c(y, x))`.
pub fn current(
    chain: &ChainModel,
    graph: &ConductanceGraph,
    a: &[usize],
    b: &[usize],
) -> Result<Flow> {
    let (sa, sb) = validate_pair(chain.n(), a, b)?;
    let adjoint = chain.adjoint();
    let v_star = solve_harmonic(&adjoint, &sa, &sb)?;
    // normalize by the adjoint-route capacity so the flux out of A is exactly 1
    let cap = capacity_from_potential(&adjoint, &sa, &v_star);
    if !(cap > 0.0) {
        return Err(Error::SingularSystem("zero capacity".into()));
    }
    let values = graph
        .arcs()
        .iter()
        .map(|arc| (v_star[arc.lo] * arc.c_fwd - v_star[arc.hi] * arc.c_bwd) / cap)
        .collect();
    Ok(Flow::from_values(values))
}

/// Capacity of a single state against an absorbing class:
/// `Cap(x) = M(x) / G_B(x, x) = mu(x) / G_ct(x, x)`.
pub fn point_capacity(chain: &ChainModel, absorbing: &[usize], x: usize) -> Result<f64> {
    let green = green_killed(chain, absorbing)?;
    let gxx = green.entry(x, x)?;
    Ok(chain.m(x) / gxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{random_dense_chain, seeded_rng, trajectory_rng};
    use crate::montecarlo::{estimate_escape, SimConfig};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn two_state() -> ChainModel {
        ChainModel::from_triples(2, &[(0, 1, 1.0), (1, 0, 2.0)], None).unwrap()
    }

    fn one_way_cycle(n: usize) -> ChainModel {
        let triples: Vec<_> = (0..n).map(|x| (x, (x + 1) % n, 1.0)).collect();
        ChainModel::from_triples(n, &triples, None).unwrap()
    }

    fn path_chain(n: usize) -> ChainModel {
        let mut triples = Vec::new();
        for x in 0..n - 1 {
            triples.push((x, x + 1, 1.0));
            triples.push((x + 1, x, 1.0));
        }
        ChainModel::from_triples(n, &triples, Some(vec![1.0; n])).unwrap()
    }

    /// Simulated `P_x[T_A < T_B]` on the skeleton.
    fn hitting_probability_mc(
        chain: &ChainModel,
        x: usize,
        a: &[usize],
        b: &[usize],
        samples: u64,
        seed: u64,
    ) -> f64 {
        let sk = chain.skeleton();
        let mut hits = 0u64;
        for t in 0..samples {
            let mut rng = trajectory_rng(seed, t);
            let mut s = x;
            loop {
                if a.contains(&s) {
                    hits += 1;
                    break;
                }
                if b.contains(&s) {
                    break;
                }
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let edges = &sk.p[s];
                let mut next = edges[edges.len() - 1].0;
                for &(y, p) in edges {
                    acc += p;
                    if u < acc {
                        next = y;
                        break;
                    }
                }
                s = next;
            }
        }
        hits as f64 / samples as f64
    }

    #[test]
    fn two_state_potential_is_indicator() {
        let chain = two_state();
        let sol = equilibrium_potential(&chain, &[0], &[1]).unwrap();
        assert_eq!(sol.v, vec![1.0, 0.0]);
        assert_eq!(sol.v_star, vec![1.0, 0.0]);
    }

    #[test]
    fn one_way_cycle_potential_vanishes_past_the_target() {
        let chain = one_way_cycle(3);
        let sol = equilibrium_potential(&chain, &[0], &[2]).unwrap();
        assert_eq!(sol.v[1], 0.0);
    }

    #[test]
    fn random_chain_potential_matches_simulation() {
        let chain = random_dense_chain(10, 101);
        let (a, b) = (vec![0], vec![9]);
        let sol = equilibrium_potential(&chain, &a, &b).unwrap();
        let samples = 100_000u64;
        for x in 1..9 {
            let p_hat = hitting_probability_mc(&chain, x, &a, &b, samples, 4242 + x as u64);
            let sigma = (sol.v[x] * (1.0 - sol.v[x]) / samples as f64).sqrt();
            assert!(
                (p_hat - sol.v[x]).abs() <= 3.0 * sigma + 1e-12,
                "state {x}: mc {p_hat} vs exact {}",
                sol.v[x]
            );
        }
    }

    #[test]
    fn capacity_of_two_state_chain() {
        let cap = capacity_prob(&two_state(), &[0], &[1]).unwrap();
        assert_relative_eq!(cap, 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn capacity_of_one_way_cycle() {
        let cap = capacity_prob(&one_way_cycle(3), &[0], &[1]).unwrap();
        assert_relative_eq!(cap, 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn capacity_matches_monte_carlo_escape() {
        let chain = random_dense_chain(10, 202);
        let (a, b) = (vec![0], vec![9]);
        let cap = capacity_prob(&chain, &a, &b).unwrap();
        let cfg = SimConfig::for_chain(&chain, 7, 1_000_000);
        let est = estimate_escape(&chain, &a, &b, &cfg).unwrap();
        let sigma = est.capacity.half_width_95 / 1.96;
        assert!(
            (est.capacity.mean - cap).abs() <= 3.0 * sigma,
            "mc {} vs exact {cap}",
            est.capacity.mean
        );
    }

    #[test]
    fn reversed_route_agrees() {
        for chain in [two_state(), one_way_cycle(3), random_dense_chain(10, 303)] {
            let (a, b) = (vec![0], vec![1]);
            let cap = capacity_prob(&chain, &a, &b).unwrap();
            let rev = capacity_prob_reversed(&chain, &a, &b).unwrap();
            assert_relative_eq!(cap, rev, max_relative = 1e-10);
        }
    }

    #[test]
    fn capacity_is_symmetric_over_random_pairs() {
        let mut rng = seeded_rng(11);
        let chain = random_dense_chain(12, 404);
        for _ in 0..100 {
            let (a, b) = crate::gen::random_disjoint_sets(12, 3, &mut rng);
            let ab = capacity_prob(&chain, &a, &b).unwrap();
            let ba = capacity_prob(&chain, &b, &a).unwrap();
            assert!((ab - ba).abs() <= 1e-10 * ab);
        }
    }

    #[test]
    fn capacity_is_monotone_in_both_sets() {
        let chain = random_dense_chain(12, 505);
        let cap = capacity_prob(&chain, &[0], &[5]).unwrap();
        let bigger_a = capacity_prob(&chain, &[0, 1], &[5]).unwrap();
        let bigger_b = capacity_prob(&chain, &[0], &[5, 6]).unwrap();
        assert!(cap <= bigger_a * (1.0 + 1e-10));
        assert!(cap <= bigger_b * (1.0 + 1e-10));
    }

    #[test]
    fn exhaustion_limit_converges_monotonically() {
        // capacities against B u K^c decrease to Cap(A, B) as K fills the space
        let chain = random_dense_chain(200, 606);
        let (a, b) = (vec![0, 1], vec![2, 3]);
        let exact = capacity_prob(&chain, &a, &b).unwrap();
        let mut previous = f64::INFINITY;
        for n in [20usize, 60, 120, 160, 200] {
            let mut b_n = b.clone();
            for x in n..200 {
                b_n.push(x);
            }
            let cap_n = capacity_prob(&chain, &a, &b_n).unwrap();
            assert!(cap_n <= previous * (1.0 + 1e-12));
            assert!(cap_n >= exact * (1.0 - 1e-12));
            previous = cap_n;
        }
        assert_relative_eq!(previous, exact, max_relative = 1e-12);
    }

    #[test]
    fn green_single_interior_state() {
        let chain = one_way_cycle(3);
        let g = green_killed(&chain, &[1, 2]).unwrap();
        assert_relative_eq!(g.entry(0, 0).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn green_one_way_cycle_counts_single_visit() {
        let chain = one_way_cycle(3);
        let g = green_killed(&chain, &[2]).unwrap();
        assert_relative_eq!(g.entry(0, 1).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(g.entry(0, 0).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(g.entry(1, 0).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn green_row_sums_match_simulated_absorption_times() {
        let chain = random_dense_chain(8, 707);
        let b = vec![7];
        let g = green_killed(&chain, &b).unwrap();
        let dense = g.dense().unwrap();
        let sk = chain.skeleton();
        let samples = 50_000u64;
        for (i, &x) in g.interior().iter().enumerate().take(3) {
            let exact: f64 = dense[i].iter().sum();
            let mut total = 0.0;
            let mut total_sq = 0.0;
            for t in 0..samples {
                let mut rng = trajectory_rng(808 + x as u64, t);
                let mut s = x;
                let mut steps = 0.0;
                while s != 7 {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let edges = &sk.p[s];
                    let mut next = edges[edges.len() - 1].0;
                    for &(y, p) in edges {
                        acc += p;
                        if u < acc {
                            next = y;
                            break;
                        }
                    }
                    s = next;
                    steps += 1.0;
                }
                total += steps;
                total_sq += steps * steps;
            }
            let mean = total / samples as f64;
            let var = (total_sq - samples as f64 * mean * mean) / (samples as f64 - 1.0);
            let sigma = (var / samples as f64).sqrt();
            assert!(
                (mean - exact).abs() <= 3.0 * sigma,
                "state {x}: mc {mean} vs exact {exact}"
            );
        }
    }

    #[test]
    fn green_satisfies_reversal_symmetry() {
        let chain = random_dense_chain(9, 909);
        let b = vec![8];
        let g = green_killed(&chain, &b).unwrap();
        let g_star = green_killed(&chain.adjoint(), &b).unwrap();
        for &x in g.interior() {
            for &y in g.interior() {
                let lhs = chain.m(x) * g.entry(x, y).unwrap();
                let rhs = chain.m(y) * g_star.entry(y, x).unwrap();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn green_entries_are_nonnegative() {
        let chain = random_dense_chain(10, 111);
        let g = green_killed(&chain, &[0, 5]).unwrap();
        for row in g.dense().unwrap() {
            for v in row {
                assert!(v >= -1e-13);
            }
        }
    }

    #[test]
    fn harmonic_measure_of_singleton_is_delta() {
        let chain = random_dense_chain(6, 121);
        let nu = harmonic_measure(&chain, &[2], &[4]).unwrap();
        assert_eq!(nu.len(), 1);
        assert_relative_eq!(nu[0].1, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn harmonic_measure_uniform_under_symmetry() {
        // two-way 4-cycle: A = {0, 2} and B = {1, 3} are exchangeable
        let mut triples = Vec::new();
        for x in 0..4usize {
            triples.push((x, (x + 1) % 4, 1.0));
            triples.push(((x + 1) % 4, x, 1.0));
        }
        let chain = ChainModel::from_triples(4, &triples, None).unwrap();
        let nu = harmonic_measure(&chain, &[0, 2], &[1, 3]).unwrap();
        assert_relative_eq!(nu[0].1, 0.5, max_relative = 1e-12);
        assert_relative_eq!(nu[1].1, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn harmonic_measure_matches_escape_frequencies() {
        let chain = random_dense_chain(10, 131);
        let (a, b) = (vec![0, 1, 2], vec![8, 9]);
        let nu = harmonic_measure(&chain, &a, &b).unwrap();
        let cfg = SimConfig::for_chain(&chain, 5, 200_000);
        let est = estimate_escape(&chain, &a, &b, &cfg).unwrap();
        let total: f64 = est
            .per_state
            .iter()
            .enumerate()
            .map(|(i, (x, e))| {
                assert_eq!(*x, a[i]);
                chain.m(*x) * e.mean
            })
            .sum();
        for (i, (x, e)) in est.per_state.iter().enumerate() {
            let nu_hat = chain.m(*x) * e.mean / total;
            // delta method on the ratio; 3 sigma of the numerator dominates
            let sigma = chain.m(*x) * e.half_width_95 / 1.96 / total;
            assert!(
                (nu_hat - nu[i].1).abs() <= 3.0 * sigma + 1e-12,
                "state {x}: {nu_hat} vs {}",
                nu[i].1
            );
        }
    }

    #[test]
    fn current_on_reversible_chain_is_gradient_of_potential() {
        let chain = path_chain(5);
        let graph = chain.conductances();
        let sol = equilibrium_potential(&chain, &[0], &[4]).unwrap();
        let cap = capacity_prob(&chain, &[0], &[4]).unwrap();
        let i = current(&chain, &graph, &[0], &[4]).unwrap();
        let psi = crate::flow::gradient_flow(&graph, &sol.v);
        for (id, arc) in graph.arcs().iter().enumerate() {
            assert_relative_eq!(
                i.values()[id],
                psi.values()[id] / cap,
                max_relative = 1e-10,
                epsilon = 1e-13
            );
            let _ = arc;
        }
    }

    #[test]
    fn series_graph_carries_unit_current() {
        let chain = path_chain(3);
        let graph = chain.conductances();
        let i = current(&chain, &graph, &[0], &[2]).unwrap();
        for arc in [(0, 1), (1, 2)] {
            let id = graph.arc_id(arc.0, arc.1).unwrap();
            assert_relative_eq!(i.values()[id], 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn current_is_conserved_and_has_unit_flux() {
        let chain = random_dense_chain(12, 141);
        let graph = chain.conductances();
        let (a, b) = (vec![0, 1], vec![10, 11]);
        let i = current(&chain, &graph, &a, &b).unwrap();
        let div = crate::flow::divergence(&graph, &i);
        for x in 2..10 {
            assert!(div[x].abs() <= 1e-10, "divergence {} at {x}", div[x]);
        }
        let flux_a: f64 = a.iter().map(|&x| div[x]).sum();
        let flux_b: f64 = b.iter().map(|&x| div[x]).sum();
        assert_relative_eq!(flux_a, 1.0, max_relative = 1e-10);
        assert_relative_eq!(flux_b, -1.0, max_relative = 1e-10);
    }

    #[test]
    fn last_exit_decomposition_reconstructs_potential() {
        let chain = random_dense_chain(9, 151);
        let (a, b) = (vec![0, 1], vec![8]);
        let sol = equilibrium_potential(&chain, &a, &b).unwrap();
        let g_star = green_killed(&chain.adjoint(), &b).unwrap();
        let sk = chain.skeleton();
        // escape probabilities P_a[tau_B^+ < tau_A^+]
        let esc: Vec<f64> = a
            .iter()
            .map(|&s| escape_rate(&chain, s, &sol.v) / chain.holding(s))
            .collect();
        for &x in g_star.interior() {
            let mut rhs = 0.0;
            for (i, &s) in a.iter().enumerate() {
                rhs += g_star.entry(s, x).unwrap() * sk.m[s] * esc[i];
            }
            rhs /= sk.m[x];
            assert_relative_eq!(rhs, sol.v[x], max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn point_capacity_no_return_state() {
        // state 0 leaves at total rate 1 and never returns before absorption
        let chain = ChainModel::from_triples(
            3,
            &[(0, 1, 0.4), (0, 2, 0.6), (1, 0, 1.0), (2, 0, 2.0), (1, 2, 0.5)],
            None,
        )
        .unwrap();
        let green = green_killed(&chain, &[1, 2]).unwrap();
        assert_relative_eq!(green.entry(0, 0).unwrap(), 1.0, max_relative = 1e-14);
        let cap = point_capacity(&chain, &[1, 2], 0).unwrap();
        assert_relative_eq!(cap, chain.m(0), max_relative = 1e-14);
        // lambda(0) = 1, so this is also mu(0)
        assert_relative_eq!(cap, chain.mu(0), max_relative = 1e-12);
    }

    #[test]
    fn point_capacity_matches_series_resistors_in_1d() {
        // walk on -(n+1)..=(n+1): the ends absorb, capacity of the middle is
        // two unit-resistor strings of length n+1 in parallel
        let n = 6usize;
        let len = 2 * (n + 1) + 1;
        let chain = path_chain(len);
        let mid = n + 1;
        let cap = point_capacity(&chain, &[0, len - 1], mid).unwrap();
        assert_relative_eq!(cap, 2.0 / (n as f64 + 1.0), max_relative = 1e-12);
        // and it agrees with the escape-probability route
        let via_prob = capacity_prob(&chain, &[mid], &[0, len - 1]).unwrap();
        assert_relative_eq!(cap, via_prob, max_relative = 1e-10);
    }

    #[test]
    fn point_capacity_3d_box_matches_simulated_no_return() {
        let (chain, index) = crate::recurrence::simple_walk_3d_truncation(10).unwrap();
        let dagger = index.dagger();
        let origin = index.state_of(0, 0, 0);
        let cap = point_capacity(&chain, &[dagger], origin).unwrap();
        let cfg = SimConfig::for_chain(&chain, 99, 40_000);
        let est = crate::montecarlo::estimate_return(&chain, origin, &[dagger], &cfg).unwrap();
        let exact_p = cap / chain.m(origin);
        let sigma = est.half_width_95 / 1.96;
        assert!(
            (est.mean - exact_p).abs() <= 3.0 * sigma,
            "mc {} vs exact {exact_p}",
            est.mean
        );
    }

    #[test]
    fn degenerate_a_state_gets_zero_harmonic_mass() {
        // state 1 only leads back into A = {0, 1}, never toward B first
        let chain = ChainModel::from_triples(
            3,
            &[(0, 1, 1.0), (0, 2, 1.0), (1, 0, 1.0), (2, 0, 1.0)],
            None,
        )
        .unwrap();
        let nu = harmonic_measure(&chain, &[0, 1], &[2]).unwrap();
        assert_relative_eq!(nu[0].1, 1.0, max_relative = 1e-14);
        assert_relative_eq!(nu[1].1, 0.0, epsilon = 1e-300);
    }
}
