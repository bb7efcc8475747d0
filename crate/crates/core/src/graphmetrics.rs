//! Exact metric parameters of Cayley graphs of `Z^m / Lambda` (the
//! approximate torus graphs) and, for cross-checking, of `Z^n / Sigma` with
//! an arbitrary generating set.
//!
//! Group elements are addressed by a mixed-radix index over Smith
//! coordinates `Z^m / Lambda = Z/l_1 + ... + Z/l_m`, so a BFS is a sweep over
//! one flat `u32` array. Cayley graphs are vertex transitive, so distances
//! from the identity determine the diameter, the girth and every distance
//! moment.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::{GeneratingSet, IntegerLattice};
use crate::intlinalg::{snf, IntMatrix, LinalgError};

/// Largest group order a profile will allocate for.
pub const DEFAULT_MEMORY_BUDGET: u64 = 100_000_000;

const UNSEEN: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("group of order {order} exceeds the memory budget of {budget} vertices")]
    MemoryBudgetExceeded { order: u64, budget: u64 },
    #[error("{unreached} vertices unreachable from the identity")]
    Disconnected { unreached: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Distances from the identity to every group element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceProfile {
    /// Smith divisors `(l_1, ..., l_m)`; the index of an element with
    /// coordinates `c` is the row-major position of `c` in this box.
    pub shape: Vec<i64>,
    pub distances: Vec<u32>,
    pub directed: bool,
}

impl DistanceProfile {
    pub fn order(&self) -> usize {
        self.distances.len()
    }

    pub fn coords(&self, mut index: usize) -> Vec<i64> {
        let mut c = vec![0; self.shape.len()];
        for t in (0..self.shape.len()).rev() {
            let r = self.shape[t] as usize;
            c[t] = (index % r) as i64;
            index /= r;
        }
        c
    }

    pub fn index_of(&self, coords: &[i64]) -> usize {
        coords
            .iter()
            .zip(&self.shape)
            .fold(0usize, |acc, (&c, &r)| acc * r as usize + c.rem_euclid(r) as usize)
    }

    pub fn sorted_distances(&self) -> Vec<u32> {
        let mut d = self.distances.clone();
        d.sort_unstable();
        d
    }

    /// Raw little-endian `u32` dump of the distance array.
    pub fn write_raw<W: Write>(&self, mut w: W) -> io::Result<()> {
        for d in &self.distances {
            w.write_all(&d.to_le_bytes())?;
        }
        Ok(())
    }
}

/// `Z/r_1 + ... + Z/r_k` (nontrivial factors only) with generator images.
struct SmithGroup {
    shape: Vec<i64>,
    radices: Vec<usize>,
    strides: Vec<usize>,
    order: usize,
    generators: Vec<Vec<usize>>,
}

impl SmithGroup {
    /// The group `Z^d / M Z^d` with the images of the given integer vectors.
    fn new(relations: &IntMatrix, generators: &[Vec<i64>], budget: u64) -> Result<Self, GraphError> {
        let s = snf(relations)?;
        let order: u64 = s.d.iter().map(|&x| x as u64).product();
        if order > budget {
            return Err(GraphError::MemoryBudgetExceeded { order, budget });
        }
        let active: Vec<usize> = (0..s.d.len()).filter(|&t| s.d[t] > 1).collect();
        let radices: Vec<usize> = active.iter().map(|&t| s.d[t] as usize).collect();
        let mut strides = vec![1usize; radices.len()];
        for t in (0..radices.len().saturating_sub(1)).rev() {
            strides[t] = strides[t + 1] * radices[t + 1];
        }
        let generators = generators
            .iter()
            .map(|g| {
                let image = s.left.checked_mul_vec(g)?;
                Ok(active
                    .iter()
                    .map(|&t| image[t].rem_euclid(s.d[t]) as usize)
                    .collect())
            })
            .collect::<Result<Vec<Vec<usize>>, LinalgError>>()?;
        Ok(Self { shape: s.d, radices, strides, order: order as usize, generators })
    }

    /// Edge steps: `+g`, plus `-g` when undirected; zero and repeated steps dropped.
    fn steps(&self, directed: bool) -> Vec<Vec<usize>> {
        let mut steps: Vec<Vec<usize>> = Vec::new();
        for g in &self.generators {
            let neg: Vec<usize> =
                g.iter().zip(&self.radices).map(|(&x, &r)| (r - x) % r).collect();
            let candidates = if directed { vec![g.clone()] } else { vec![g.clone(), neg] };
            for c in candidates {
                if c.iter().any(|&x| x != 0) && !steps.contains(&c) {
                    steps.push(c);
                }
            }
        }
        steps
    }

    /// Index offsets for the cyclic case, where a step is a single addition.
    fn cyclic_steps(&self, steps: &[Vec<usize>]) -> Option<Vec<usize>> {
        (self.radices.len() == 1).then(|| steps.iter().map(|s| s[0]).collect())
    }

    #[inline]
    fn decode(&self, mut v: usize, coords: &mut [usize]) {
        for t in (0..self.radices.len()).rev() {
            coords[t] = v % self.radices[t];
            v /= self.radices[t];
        }
    }

    #[inline]
    fn shift(&self, coords: &[usize], step: &[usize]) -> usize {
        let mut idx = 0;
        for t in 0..coords.len() {
            let mut c = coords[t] + step[t];
            if c >= self.radices[t] {
                c -= self.radices[t];
            }
            idx += c * self.strides[t];
        }
        idx
    }

    /// Visits neighbours of `v` along `steps`.
    #[inline]
    fn for_each_neighbour(
        &self,
        v: usize,
        steps: &[Vec<usize>],
        cyclic: Option<&[usize]>,
        coords: &mut [usize],
        mut f: impl FnMut(usize),
    ) {
        match cyclic {
            Some(offsets) => {
                let n = self.order;
                for &s in offsets {
                    let w = v + s;
                    f(if w >= n { w - n } else { w });
                }
            }
            None => {
                self.decode(v, coords);
                for s in steps {
                    f(self.shift(coords, s));
                }
            }
        }
    }

    fn bfs(&self, directed: bool) -> Result<Vec<u32>, GraphError> {
        let steps = self.steps(directed);
        let cyclic = self.cyclic_steps(&steps);
        let mut dist = vec![UNSEEN; self.order];
        let mut coords = vec![0usize; self.radices.len()];
        let mut frontier = vec![0usize];
        let mut next = Vec::new();
        dist[0] = 0;
        let mut level = 0u32;
        let mut seen = 1usize;
        while !frontier.is_empty() {
            level += 1;
            for &v in &frontier {
                self.for_each_neighbour(v, &steps, cyclic.as_deref(), &mut coords, |w| {
                    if dist[w] == UNSEEN {
                        dist[w] = level;
                        next.push(w);
                    }
                });
            }
            seen += next.len();
            std::mem::swap(&mut frontier, &mut next);
            next.clear();
        }
        if seen != self.order {
            return Err(GraphError::Disconnected { unreached: self.order - seen });
        }
        Ok(dist)
    }

    /// Length of the shortest directed cycle through the identity.
    fn first_return(&self) -> Result<u32, GraphError> {
        if self.generators.iter().any(|g| g.iter().all(|&x| x == 0)) {
            return Ok(1);
        }
        let steps = self.steps(true);
        let cyclic = self.cyclic_steps(&steps);
        let mut seen = vec![false; self.order];
        let mut coords = vec![0usize; self.radices.len()];
        let mut frontier = vec![0usize];
        let mut next = Vec::new();
        seen[0] = true;
        let mut level = 0u32;
        // every vertex is visited at most once, so this terminates within
        // `order` layers; a return must occur since generators have finite order
        while !frontier.is_empty() {
            level += 1;
            let mut returned = false;
            for &v in &frontier {
                self.for_each_neighbour(v, &steps, cyclic.as_deref(), &mut coords, |w| {
                    if w == 0 {
                        returned = true;
                    } else if !seen[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                });
                if returned {
                    return Ok(level);
                }
            }
            std::mem::swap(&mut frontier, &mut next);
            next.clear();
        }
        Err(GraphError::Disconnected { unreached: 0 })
    }
}

fn standard_basis(m: usize) -> Vec<Vec<i64>> {
    IntMatrix::identity(m).columns()
}

/// Distances in the approximate torus graph `C(Z^m / Lambda, I)` (or the
/// digraph when `directed`).
pub fn distance_profile(lambda: &IntegerLattice, directed: bool) -> Result<DistanceProfile, GraphError> {
    distance_profile_with_budget(lambda, directed, DEFAULT_MEMORY_BUDGET)
}

pub fn distance_profile_with_budget(
    lambda: &IntegerLattice,
    directed: bool,
    budget: u64,
) -> Result<DistanceProfile, GraphError> {
    let group = SmithGroup::new(&lambda.basis.h, &standard_basis(lambda.m), budget)?;
    let distances = group.bfs(directed)?;
    Ok(DistanceProfile { shape: group.shape, distances, directed })
}

/// Distances in `C(Z^n / Sigma, s)` computed on the group itself.
pub fn direct_cayley_profile(s: &GeneratingSet, directed: bool) -> Result<DistanceProfile, GraphError> {
    direct_cayley_profile_with_budget(s, directed, DEFAULT_MEMORY_BUDGET)
}

pub fn direct_cayley_profile_with_budget(
    s: &GeneratingSet,
    directed: bool,
    budget: u64,
) -> Result<DistanceProfile, GraphError> {
    let group = SmithGroup::new(s.quotient.sigma(), &s.elements(), budget)?;
    let distances = group.bfs(directed)?;
    Ok(DistanceProfile { shape: group.shape, distances, directed })
}

/// Largest distance from the identity, which by vertex transitivity is the
/// diameter.
pub fn diameter(p: &DistanceProfile) -> u32 {
    p.distances.iter().copied().max().unwrap_or(0)
}

/// Girth of the approximate torus digraph: the smallest `sum k_i` over
/// nonzero `k >= 0` in `Lambda`.
pub fn girth_directed(lambda: &IntegerLattice) -> Result<u32, GraphError> {
    girth_directed_with_budget(lambda, DEFAULT_MEMORY_BUDGET)
}

pub fn girth_directed_with_budget(lambda: &IntegerLattice, budget: u64) -> Result<u32, GraphError> {
    SmithGroup::new(&lambda.basis.h, &standard_basis(lambda.m), budget)?.first_return()
}

/// Girth of `C^+(Z^n / Sigma, s)`, computed on the group itself.
pub fn direct_girth(s: &GeneratingSet) -> Result<u32, GraphError> {
    SmithGroup::new(s.quotient.sigma(), &s.elements(), DEFAULT_MEMORY_BUDGET)?.first_return()
}

/// `(mean over x of d(0, x)^alpha)^(1/alpha)`.
///
/// Panics unless `alpha > 0`.
pub fn moment(p: &DistanceProfile, alpha: f64) -> f64 {
    assert!(alpha > 0.0, "moment order must be positive");
    let n = p.distances.len() as f64;
    if alpha == 1.0 {
        let total: u64 = p.distances.iter().map(|&d| u64::from(d)).sum();
        return total as f64 / n;
    }
    let total: f64 = p.distances.iter().map(|&d| f64::from(d).powf(alpha)).sum();
    (total / n).powf(1.0 / alpha)
}

/// JSON summary of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub shape: Vec<i64>,
    pub directed: bool,
    pub diameter: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub girth: Option<u32>,
    pub moments: BTreeMap<String, f64>,
}

impl ProfileSummary {
    pub fn new(p: &DistanceProfile, girth: Option<u32>, alphas: &[f64]) -> Self {
        Self {
            shape: p.shape.clone(),
            directed: p.directed,
            diameter: diameter(p),
            girth: if p.directed { girth } else { None },
            moments: alphas.iter().map(|&a| (a.to_string(), moment(p, a))).collect(),
        }
    }
}
