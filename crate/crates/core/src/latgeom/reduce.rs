/// Gram-Schmidt data of a column basis: `b_j = b*_j + sum_{i<j} mu[j][i] b*_i`.
pub(crate) struct GramSchmidt {
    pub star: Vec<Vec<f64>>,
    pub norm_sq: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn gram_schmidt(cols: &[Vec<f64>]) -> GramSchmidt {
    let m = cols.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut norm_sq = Vec::with_capacity(m);
    let mut mu = vec![vec![0.0; m]; m];
    for j in 0..m {
        let mut v = cols[j].clone();
        for i in 0..j {
            mu[j][i] = dot(&cols[j], &star[i]) / norm_sq[i];
            for (vk, sk) in v.iter_mut().zip(&star[i]) {
                *vk -= mu[j][i] * sk;
            }
        }
        norm_sq.push(dot(&v, &v));
        star.push(v);
    }
    GramSchmidt { star, norm_sq, mu }
}

const MAX_SWAPS: usize = 100_000;

/// LLL reduction of a column basis in place (`delta = 0.99`).
///
/// Only integer multiples of basis vectors are added, so the lattice is
/// unchanged, and integer bases stay exactly integer below `2^53`.
pub(crate) fn lll(cols: &mut [Vec<f64>]) {
    const DELTA: f64 = 0.99;
    let m = cols.len();
    let mut k = 1;
    let mut swaps = 0;
    while k < m && swaps < MAX_SWAPS {
        let mut gs = gram_schmidt(cols);
        for j in (0..k).rev() {
            let q = gs.mu[k][j].round();
            if q != 0.0 {
                let (head, tail) = cols.split_at_mut(k);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a -= q * b;
                }
                for i in 0..j {
                    gs.mu[k][i] -= q * gs.mu[j][i];
                }
                gs.mu[k][j] -= q;
            }
        }
        let lhs = gs.norm_sq[k];
        let rhs = (DELTA - gs.mu[k][k - 1].powi(2)) * gs.norm_sq[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            swaps += 1;
            k = (k - 1).max(1);
        }
    }
}
