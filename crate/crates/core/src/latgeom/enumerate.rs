use super::reduce::{gram_schmidt, lll};
use super::{LatgeomError, NormBall, RealLattice, MAX_DIM};

/// Default limit on enumeration nodes per query.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

/// Componentwise slack accepted as non-negative in the directed case.
pub(crate) const FEASIBILITY_TOL: f64 = 1e-9;

type Vector = [f64; MAX_DIM];

/// An LLL-reduced basis with the triangular factor used by enumeration.
///
/// Queries minimise the gauge of `x + v` over lattice vectors `v`. Since the
/// gauge dominates the Euclidean norm, every candidate lies in a Euclidean
/// ball of radius equal to the best value found, which shrinks as the search
/// proceeds.
#[derive(Clone, Debug)]
pub struct ReducedLattice {
    m: usize,
    /// `cols[j][k]` is coordinate `k` of basis vector `j`.
    cols: [Vector; MAX_DIM],
    /// `r[i][j] = <b_j, q_i>` for `j >= i`.
    r: [Vector; MAX_DIM],
    /// Unit Gram-Schmidt directions.
    q: [Vector; MAX_DIM],
    /// A lattice vector with every component at least one basis length.
    positive: Vector,
    covolume: f64,
    budget: u64,
}

struct Search<'a> {
    lat: &'a ReducedLattice,
    x: Vector,
    y: Vector,
    z: [i64; MAX_DIM],
    directed: bool,
    exclude_zero: bool,
    best: f64,
    best_w: Option<Vector>,
    nodes: u64,
}

impl<'a> Search<'a> {
    fn radius_sq(&self) -> f64 {
        let r = self.best * (1.0 + 1e-9) + 1e-12;
        r * r
    }

    fn point(&self) -> Vector {
        let mut w = self.x;
        for j in 0..self.lat.m {
            let zj = self.z[j] as f64;
            if zj != 0.0 {
                for k in 0..self.lat.m {
                    w[k] += zj * self.lat.cols[j][k];
                }
            }
        }
        w
    }

    fn leaf(&mut self) {
        let m = self.lat.m;
        if self.exclude_zero && self.z[..m].iter().all(|&c| c == 0) {
            return;
        }
        let w = self.point();
        if let Some(value) = gauge(&w[..m], self.directed) {
            if value < self.best {
                self.best = value;
                self.best_w = Some(w);
            }
        }
    }

    fn descend(&mut self, i: usize, partial: f64) -> Result<(), LatgeomError> {
        let lat = self.lat;
        let mut s = self.y[i];
        for j in i + 1..lat.m {
            s += lat.r[i][j] * self.z[j] as f64;
        }
        let rii = lat.r[i][i];
        let center = -s / rii;
        if i == 0 {
            return self.innermost(center, partial);
        }
        let c0 = center.round() as i64;
        // walk outward from the centre; |t| grows monotonically on each side
        let (mut up, mut down) = (c0, c0 - 1);
        let (mut up_open, mut down_open) = (true, true);
        while up_open || down_open {
            let take_up = up_open
                && (!down_open || (up as f64 - center).abs() <= (center - down as f64).abs());
            let zi = if take_up { up } else { down };
            let t = rii * (zi as f64 - center);
            let np = partial + t * t;
            if np > self.radius_sq() {
                if take_up {
                    up_open = false;
                } else {
                    down_open = false;
                }
                continue;
            }
            if take_up {
                up += 1;
            } else {
                down -= 1;
            }
            self.nodes += 1;
            if self.nodes > lat.budget {
                return Err(LatgeomError::EnumerationBudgetExceeded { nodes: self.nodes });
            }
            self.z[i] = zi;
            self.descend(i - 1, np)?;
        }
        Ok(())
    }

    /// Solves the last coordinate exactly. Along the line `p + z b_0` the
    /// gauge is convex and piecewise linear in `z`, so the integer optimum
    /// is an end of the admissible range or next to a breakpoint.
    fn innermost(&mut self, center: f64, partial: f64) -> Result<(), LatgeomError> {
        let lat = self.lat;
        let m = lat.m;
        let slack = self.radius_sq() - partial;
        if slack < 0.0 {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > lat.budget {
            return Err(LatgeomError::EnumerationBudgetExceeded { nodes: self.nodes });
        }
        let half = slack.sqrt() / lat.r[0][0];
        let (mut lo, mut hi) = ((center - half).ceil(), (center + half).floor());
        self.z[0] = 0;
        let p = self.point();
        let b = &lat.cols[0];
        if self.directed {
            for k in 0..m {
                let edge = (-FEASIBILITY_TOL - p[k]) / b[k];
                if b[k] > 0.0 {
                    lo = lo.max(edge.ceil());
                } else if b[k] < 0.0 {
                    hi = hi.min(edge.floor());
                } else if p[k] < -FEASIBILITY_TOL {
                    return Ok(());
                }
            }
        }
        if lo > hi {
            return Ok(());
        }
        let rest_zero = self.exclude_zero && self.z[1..m].iter().all(|&c| c == 0);
        let mut candidates = [0.0; 2 * MAX_DIM + 4];
        let mut count = 0;
        let mut push = |t: f64| {
            candidates[count] = t.clamp(lo, hi);
            count += 1;
        };
        push(lo);
        push(hi);
        if rest_zero {
            // zero is excluded and the gauge of z b_0 is |z| times a constant
            push(-1.0);
            push(1.0);
        }
        if !self.directed {
            for k in 0..m {
                if b[k] != 0.0 {
                    let t = -p[k] / b[k];
                    push(t.floor());
                    push(t.ceil());
                }
            }
        }
        for &t in &candidates[..count] {
            self.z[0] = t as i64;
            self.leaf();
        }
        Ok(())
    }
}

/// `sum |w_i|`, or `sum w_i` when directed and `w >= 0` (`None` otherwise).
pub(crate) fn gauge(w: &[f64], directed: bool) -> Option<f64> {
    if directed {
        if w.iter().any(|&c| c < -FEASIBILITY_TOL) {
            return None;
        }
        Some(w.iter().sum())
    } else {
        Some(w.iter().map(|c| c.abs()).sum())
    }
}

impl ReducedLattice {
    pub fn new(l: &RealLattice) -> Result<Self, LatgeomError> {
        let m = l.dim();
        if m == 0 || m > MAX_DIM {
            return Err(LatgeomError::UnsupportedDimension { m });
        }
        let mut cols: Vec<Vec<f64>> = (0..m).map(|j| l.basis().column(j).iter().copied().collect()).collect();
        lll(&mut cols);
        let gs = gram_schmidt(&cols);
        if gs.norm_sq.iter().any(|&n| !(n > 0.0) || !n.is_finite()) {
            return Err(LatgeomError::Singular);
        }
        let mut out = Self {
            m,
            cols: [[0.0; MAX_DIM]; MAX_DIM],
            r: [[0.0; MAX_DIM]; MAX_DIM],
            q: [[0.0; MAX_DIM]; MAX_DIM],
            positive: [0.0; MAX_DIM],
            covolume: gs.norm_sq.iter().map(|n| n.sqrt()).product(),
            budget: DEFAULT_NODE_BUDGET,
        };
        for j in 0..m {
            out.cols[j][..m].copy_from_slice(&cols[j]);
            let norm = gs.norm_sq[j].sqrt();
            for k in 0..m {
                out.q[j][k] = gs.star[j][k] / norm;
            }
            out.r[j][j] = norm;
            for i in 0..j {
                out.r[i][j] = gs.mu[j][i] * gs.norm_sq[i].sqrt();
            }
        }
        // nearest-plane error is at most half the sum of Gram-Schmidt
        // lengths per component, so a target at twice the basis length sum
        // rounds to a strictly positive vector
        let t = 2.0 * cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>();
        let mut target = [0.0; MAX_DIM];
        target[..m].fill(t);
        let z = out.nearest_plane(&target);
        let error = out.combine(&target, &z);
        for k in 0..m {
            out.positive[k] = target[k] - error[k];
        }
        debug_assert!(out.positive[..m].iter().all(|&c| c > 0.0));
        Ok(out)
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// Reduced basis vectors.
    pub fn basis_columns(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|j| self.cols[j][..self.m].to_vec()).collect()
    }

    /// `x + B z`.
    fn combine(&self, x: &Vector, z: &[i64; MAX_DIM]) -> Vector {
        let mut w = *x;
        for j in 0..self.m {
            for k in 0..self.m {
                w[k] += z[j] as f64 * self.cols[j][k];
            }
        }
        w
    }

    fn project(&self, x: &Vector) -> Vector {
        let mut y = [0.0; MAX_DIM];
        for i in 0..self.m {
            y[i] = (0..self.m).map(|k| x[k] * self.q[i][k]).sum();
        }
        y
    }

    /// Coefficients `z` making `x + B z` short (Babai's nearest plane).
    fn nearest_plane(&self, x: &Vector) -> [i64; MAX_DIM] {
        let y = self.project(x);
        let mut z = [0i64; MAX_DIM];
        for i in (0..self.m).rev() {
            let mut s = y[i];
            for j in i + 1..self.m {
                s += self.r[i][j] * z[j] as f64;
            }
            z[i] = (-s / self.r[i][i]).round() as i64;
        }
        z
    }

    fn to_vector(&self, x: &[f64]) -> Result<Vector, LatgeomError> {
        if x.len() != self.m {
            return Err(LatgeomError::DimensionMismatch { expected: self.m, got: x.len() });
        }
        let mut v = [0.0; MAX_DIM];
        v[..self.m].copy_from_slice(x);
        Ok(v)
    }

    fn run(&self, x: Vector, directed: bool, exclude_zero: bool, start: Vector) -> Result<(f64, Vector), LatgeomError> {
        let best = gauge(&start[..self.m], directed).expect("initial point feasible");
        let mut search = Search {
            lat: self,
            x,
            y: self.project(&x),
            z: [0; MAX_DIM],
            directed,
            exclude_zero,
            best,
            best_w: None,
            nodes: 0,
        };
        search.descend(self.m - 1, 0.0)?;
        Ok((search.best, search.best_w.unwrap_or(start)))
    }

    /// Minimiser of the gauge over `x + Lambda`, with its value.
    pub fn closest(&self, x: &[f64], ball: NormBall) -> Result<(f64, Vec<f64>), LatgeomError> {
        let x = self.to_vector(x)?;
        let z = self.nearest_plane(&x);
        let mut start = self.combine(&x, &z);
        if ball.is_directed() {
            let shift = (0..self.m)
                .map(|k| (-start[k] / self.positive[k]).ceil())
                .fold(0.0f64, f64::max);
            for k in 0..self.m {
                start[k] += shift * self.positive[k];
            }
        }
        let (value, w) = self.run(x, ball.is_directed(), false, start)?;
        Ok((value, w[..self.m].to_vec()))
    }

    pub fn torus_distance(&self, x: &[f64], ball: NormBall) -> Result<f64, LatgeomError> {
        self.closest(x, ball).map(|(d, _)| d)
    }

    /// Nonzero `v` in the lattice with `v >= 0` minimising `sum v_i`.
    pub fn shortest_positive_vector(&self) -> Result<(f64, Vec<f64>), LatgeomError> {
        let origin = [0.0; MAX_DIM];
        let (value, w) = self.run(origin, true, true, self.positive)?;
        Ok((value, w[..self.m].to_vec()))
    }

    /// Point with basis coordinates `t`.
    pub fn point_at(&self, t: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.m];
        for j in 0..self.m {
            for k in 0..self.m {
                x[k] += t[j] * self.cols[j][k];
            }
        }
        x
    }
}
