//! Collapsing state subsets to single points.
//!
//! Collapsing preserves hitting distributions, capacities, adjoints and
//! Dirichlet pairings, which is what makes the two-point reduction behind the
//! min-max and flow capacity routes exact. Two fresh-state weight
//! conventions exist and are never mixed: an interior set keeps its measure
//! mass, while a collapsed exterior gets weight one.

use crate::chain::ChainModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CollapseMap {
    /// Collapsed subsets, each sorted ascending.
    pub collapsed_sets: Vec<Vec<usize>>,
    /// Index of the fresh point for each collapsed set, in the output chain.
    pub fresh_states: Vec<usize>,
    /// Parent state -> collapsed state.
    pub index_map: Vec<usize>,
    /// Number of states of the collapsed chain.
    pub n_collapsed: usize,
}

impl CollapseMap {
    /// Pull a function on the collapsed chain back to the parent states.
    pub fn lift(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n_collapsed);
        self.index_map.iter().map(|&i| f[i]).collect()
    }

    /// Push a parent function that is constant on every collapsed set down to
    /// the collapsed chain; non-constant input is a boundary violation.
    pub fn push(&self, f_parent: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(f_parent.len(), self.index_map.len());
        let mut out = vec![f64::NAN; self.n_collapsed];
        for (parent, &collapsed) in self.index_map.iter().enumerate() {
            let v = f_parent[parent];
            if out[collapsed].is_nan() {
                out[collapsed] = v;
            } else if out[collapsed] != v {
                return Err(Error::BadBoundary(format!(
                    "function is not constant on the set collapsed to state {collapsed}"
                )));
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy)]
enum FreshWeight {
    /// Fresh point keeps the collapsed set's measure mass.
    SetMass,
    /// Fresh point gets weight 1 (collapsed-exterior convention).
    One,
}

fn validate_sets(n: usize, groups: &[&[usize]]) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; n];
    let mut sorted_groups = Vec::with_capacity(groups.len());
    let mut total = 0usize;
    for set in groups {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut s: Vec<usize> = set.to_vec();
        s.sort_unstable();
        s.dedup();
        for &x in &s {
            if x >= n {
                return Err(Error::ParseError(format!("state {x} out of range 0..{n}")));
            }
            if seen[x] {
                return Err(Error::SetsIntersect(x));
            }
            seen[x] = true;
        }
        total += s.len();
        sorted_groups.push(s);
    }
    if total >= n {
        return Err(Error::NotProperSubset);
    }
    Ok(sorted_groups)
}

/// Shared construction: survivors keep their parent order, one fresh point is
/// appended per group. Rates within a group are discarded (they change no
/// hitting probability), cross rates follow the collapse formulas.
fn build_collapsed(
    chain: &ChainModel,
    groups: &[&[usize]],
    labels: &[&str],
    weight: FreshWeight,
) -> Result<(ChainModel, CollapseMap)> {
    let n = chain.n();
    let groups = validate_sets(n, groups)?;
    let k = groups.len();

    let mut group_of = vec![usize::MAX; n];
    for (g, set) in groups.iter().enumerate() {
        for &x in set {
            group_of[x] = g;
        }
    }
    let mut index_map = vec![usize::MAX; n];
    let mut survivors = Vec::with_capacity(n);
    for x in 0..n {
        if group_of[x] == usize::MAX {
            index_map[x] = survivors.len();
            survivors.push(x);
        }
    }
    let n_new = survivors.len() + k;
    for x in 0..n {
        if group_of[x] != usize::MAX {
            index_map[x] = survivors.len() + group_of[x];
        }
    }

    let mass: Vec<f64> = groups
        .iter()
        .map(|set| set.iter().map(|&z| chain.mu(z)).sum())
        .collect();
    let coef: Vec<f64> = match weight {
        FreshWeight::SetMass => mass.iter().map(|&m| 1.0 / m).collect(),
        FreshWeight::One => vec![1.0; k],
    };

    let mut triples: Vec<(usize, usize, f64)> = Vec::new();
    // survivor rows: copy, aggregating arcs into each group
    for (new_x, &x) in survivors.iter().enumerate() {
        let mut to_group = vec![0.0; k];
        for &(y, r) in chain.out_edges(x) {
            let g = group_of[y];
            if g == usize::MAX {
                triples.push((new_x, index_map[y], r));
            } else {
                to_group[g] += r;
            }
        }
        for (g, &r) in to_group.iter().enumerate() {
            if r > 0.0 {
                triples.push((new_x, survivors.len() + g, r));
            }
        }
    }
    // fresh rows: measure-weighted outflow of the set, members in sorted order
    for (g, set) in groups.iter().enumerate() {
        let mut flux = vec![0.0; n_new];
        for &z in set {
            for &(y, r) in chain.out_edges(z) {
                if group_of[y] != g {
                    flux[index_map[y]] += chain.mu(z) * r;
                }
            }
        }
        for (target, &f) in flux.iter().enumerate() {
            if f > 0.0 {
                triples.push((survivors.len() + g, target, f * coef[g]));
            }
        }
    }

    let mut mu = Vec::with_capacity(n_new);
    for &x in &survivors {
        mu.push(chain.mu(x));
    }
    for g in 0..k {
        mu.push(match weight {
            FreshWeight::SetMass => mass[g],
            FreshWeight::One => 1.0,
        });
    }
    let mut new_labels: Vec<String> = survivors.iter().map(|&x| chain.label(x).to_string()).collect();
    for g in 0..k {
        new_labels.push(labels[g].to_string());
    }

    let collapsed = ChainModel::from_triples_with(
        n_new,
        &triples,
        Some(mu),
        Some(new_labels),
        chain.tolerances(),
    )?;
    let fresh_states = (0..k).map(|g| survivors.len() + g).collect();
    let map = CollapseMap { collapsed_sets: groups, fresh_states, index_map, n_collapsed: n_new };
    Ok((collapsed, map))
}

/// Collapse one subset to a fresh point labeled `"@A"`; the point keeps the
/// set's measure mass.
pub fn collapse_set(chain: &ChainModel, a: &[usize]) -> Result<(ChainModel, CollapseMap)> {
    build_collapsed(chain, &[a], &["@A"], FreshWeight::SetMass)
}

/// Collapse two disjoint subsets to fresh points `"@A"`, `"@B"` in one pass.
///
/// The rate tables are computed by formulas symmetric in the two sets, so
/// `collapse_pair(chain, a, b)` and `collapse_pair(chain, b, a)` agree
/// bit-for-bit after swapping the two fresh points.
pub fn collapse_pair(
    chain: &ChainModel,
    a: &[usize],
    b: &[usize],
) -> Result<(ChainModel, CollapseMap)> {
    build_collapsed(chain, &[a, b], &["@A", "@B"], FreshWeight::SetMass)
}

/// Collapse the complement of `keep` to a fresh point `"@d"` of weight one.
pub fn collapse_exterior(chain: &ChainModel, keep: &[usize]) -> Result<(ChainModel, CollapseMap)> {
    let n = chain.n();
    if keep.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut kept = vec![false; n];
    for &x in keep {
        if x >= n {
            return Err(Error::ParseError(format!("state {x} out of range 0..{n}")));
        }
        kept[x] = true;
    }
    let exterior: Vec<usize> = (0..n).filter(|&x| !kept[x]).collect();
    if exterior.is_empty() {
        return Err(Error::NotProperSubset);
    }
    build_collapsed(chain, &[&exterior], &["@d"], FreshWeight::One)
}
