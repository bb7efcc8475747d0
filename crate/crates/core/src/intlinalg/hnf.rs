use serde::{Deserialize, Serialize};

use super::matrix::{narrow, WideMatrix};
use super::{IntMatrix, LinalgError};

/// Column-style Hermite normal form of a full-column-rank matrix.
///
/// `h` is lower triangular (column echelon for non-square input) with a
/// strictly positive pivot in every column, and every entry to the left of a
/// pivot lies in `[0, pivot)`. When present, `transform` is the unimodular
/// `U` with `a * U = h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnfBasis {
    pub h: IntMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<IntMatrix>,
}

impl HnfBasis {
    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// Diagonal of a square HNF; its product is the index of the lattice.
    pub fn pivots(&self) -> Vec<i64> {
        (0..self.h.cols()).map(|i| self.h[(i, i)]).collect()
    }

    /// `|det h|` for square `h`, i.e. the index of the column lattice in `Z^m`.
    pub fn index(&self) -> Result<i64, LinalgError> {
        assert!(self.h.is_square());
        self.pivots().into_iter().try_fold(1i64, |acc, p| {
            acc.checked_mul(p).ok_or(LinalgError::Overflow)
        })
    }

    /// Whether `v` lies in the column lattice of a square basis.
    pub fn contains(&self, v: &[i64]) -> bool {
        canonical_residue(v, self).is_ok_and(|r| r.iter().all(|&x| x == 0))
    }
}

/// Output of the echelon reduction shared by `hnf` and `integer_kernel`.
pub(crate) struct Echelon {
    pub h: WideMatrix,
    pub transform: Option<WideMatrix>,
    pub rank: usize,
}

/// Reduces `a` by unimodular column operations to canonical column echelon
/// form. The first `rank` columns of the result are the echelon basis and the
/// remaining columns are zero.
pub(crate) fn column_echelon(a: &IntMatrix, track: bool) -> Result<Echelon, LinalgError> {
    let mut h = WideMatrix::from(a);
    let mut u = track.then(|| WideMatrix::identity(a.cols()));
    let (rows, cols) = (a.rows(), a.cols());

    let col_op = |h: &mut WideMatrix,
                      u: &mut Option<WideMatrix>,
                      dst: usize,
                      src: usize,
                      q: i128|
     -> Result<(), LinalgError> {
        h.col_axpy(dst, src, q)?;
        if let Some(u) = u.as_mut() {
            u.col_axpy(dst, src, q)?;
        }
        Ok(())
    };

    let mut p = 0;
    for i in 0..rows {
        if p == cols {
            break;
        }
        // gcd-reduce row i over columns p.., keeping the smallest entry at p
        loop {
            let Some(jmin) = (p..cols)
                .filter(|&j| h[(i, j)] != 0)
                .min_by_key(|&j| h[(i, j)].unsigned_abs())
            else {
                break;
            };
            h.swap_cols(p, jmin);
            if let Some(u) = u.as_mut() {
                u.swap_cols(p, jmin);
            }
            let mut clean = true;
            for j in p + 1..cols {
                if h[(i, j)] != 0 {
                    let q = h[(i, j)] / h[(i, p)];
                    col_op(&mut h, &mut u, j, p, q)?;
                    clean &= h[(i, j)] == 0;
                }
            }
            if clean {
                break;
            }
        }
        if h[(i, p)] == 0 {
            continue;
        }
        if h[(i, p)] < 0 {
            h.negate_col(p);
            if let Some(u) = u.as_mut() {
                u.negate_col(p);
            }
        }
        let pivot = h[(i, p)];
        for j in 0..p {
            let q = h[(i, j)].div_euclid(pivot);
            col_op(&mut h, &mut u, j, p, q)?;
        }
        p += 1;
    }
    Ok(Echelon { h, transform: u, rank: p })
}

/// Canonical Hermite normal form of a matrix with full column rank.
pub fn hnf(a: &IntMatrix) -> Result<HnfBasis, LinalgError> {
    hnf_impl(a, false)
}

/// As [`hnf`], also returning the unimodular transform `U` with `a * U = h`.
pub fn hnf_with_transform(a: &IntMatrix) -> Result<HnfBasis, LinalgError> {
    hnf_impl(a, true)
}

fn hnf_impl(a: &IntMatrix, track: bool) -> Result<HnfBasis, LinalgError> {
    let e = column_echelon(a, track)?;
    if e.rank < a.cols() {
        return Err(LinalgError::RankDeficient { rank: e.rank, cols: a.cols() });
    }
    Ok(HnfBasis {
        h: e.h.to_int()?,
        transform: e.transform.map(|u| u.to_int()).transpose()?,
    })
}

/// HNF of the lattice spanned by the columns of `generators`, which may
/// contain redundant columns. The span must have full rank in `Z^rows`; the
/// result is square.
pub fn span_hnf(generators: &IntMatrix) -> Result<HnfBasis, LinalgError> {
    let e = column_echelon(generators, false)?;
    let rows = generators.rows();
    if e.rank < rows {
        return Err(LinalgError::RankDeficient { rank: e.rank, cols: rows });
    }
    let keep: Vec<usize> = (0..rows).collect();
    let h = e.h.to_int()?.select_cols(&keep);
    Ok(HnfBasis { h, transform: None })
}

/// Integer basis of `{x in Z^cols : a x = 0}`, one basis vector per column.
pub fn integer_kernel(a: &IntMatrix) -> Result<IntMatrix, LinalgError> {
    let e = column_echelon(a, true)?;
    let u = e.transform.expect("transform tracked").to_int()?;
    let kernel_cols: Vec<usize> = (e.rank..a.cols()).collect();
    Ok(u.select_cols(&kernel_cols))
}

/// Canonical representative of `v + L` where `L` is the column lattice of a
/// square HNF basis: the unique `r` with `0 <= r[i] < h[i][i]`.
pub fn canonical_residue(v: &[i64], basis: &HnfBasis) -> Result<Vec<i64>, LinalgError> {
    let h = &basis.h;
    assert!(h.is_square(), "canonical residues need a square basis");
    assert_eq!(v.len(), h.rows());
    let m = h.rows();
    let mut r: Vec<i128> = v.iter().map(|&x| i128::from(x)).collect();
    for i in 0..m {
        let pivot = i128::from(h[(i, i)]);
        let q = r[i].div_euclid(pivot);
        if q != 0 {
            for (k, rk) in r.iter_mut().enumerate().skip(i) {
                *rk -= q * i128::from(h[(k, i)]);
            }
        }
    }
    r.into_iter().map(narrow).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn assert_canonical(h: &IntMatrix) {
        for i in 0..h.rows() {
            assert!(h[(i, i)] > 0);
            for j in i + 1..h.cols() {
                assert_eq!(h[(i, j)], 0, "upper entry nonzero");
            }
            for j in 0..i {
                assert!((0..h[(i, i)]).contains(&h[(i, j)]), "entry not reduced");
            }
        }
    }

    /// All lattice points with coordinates in `[-r, r]`, by enumerating
    /// integer combinations of the columns in a generous coefficient box.
    fn lattice_points_in_box(basis: &IntMatrix, r: i64, coeff: i64) -> BTreeSet<Vec<i64>> {
        assert_eq!(basis.rows(), 2);
        let mut out = BTreeSet::new();
        for c0 in -coeff..=coeff {
            for c1 in -coeff..=coeff {
                let v = basis.checked_mul_vec(&[c0, c1]).unwrap();
                if v.iter().all(|x| x.abs() <= r) {
                    out.insert(v);
                }
            }
        }
        out
    }

    #[test]
    fn identity_is_its_own_hnf() {
        let b = hnf_with_transform(&IntMatrix::identity(2)).unwrap();
        assert_eq!(b.h, IntMatrix::identity(2));
        assert_eq!(b.transform.unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn hnf_matches_box_enumeration() {
        for cols in [vec![vec![2, 0], vec![1, 3]], vec![vec![4, 2], vec![2, 4]]] {
            let a = IntMatrix::from_cols(&cols);
            let b = hnf_with_transform(&a).unwrap();
            assert_canonical(&b.h);
            let det = a.determinant().unwrap().abs();
            assert_eq!(b.index().unwrap(), det);
            assert_eq!(a.checked_mul(b.transform.as_ref().unwrap()).unwrap(), b.h);
            // both bases span the same points of [-6,6]^2
            let lhs = lattice_points_in_box(&a, 6, 40);
            let rhs = lattice_points_in_box(&b.h, 6, 40);
            assert_eq!(lhs, rhs);
        }
        let b = hnf(&IntMatrix::from_cols(&[vec![2, 0], vec![1, 3]])).unwrap();
        assert_eq!(b.h, IntMatrix::from_rows(&[vec![1, 0], vec![3, 6]]));
        let b = hnf(&IntMatrix::from_cols(&[vec![4, 2], vec![2, 4]])).unwrap();
        assert_eq!(b.index().unwrap(), 12);
    }

    #[test]
    fn rank_deficient_input_is_rejected() {
        let a = IntMatrix::from_cols(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(hnf(&a), Err(LinalgError::RankDeficient { rank: 1, cols: 2 }));
    }

    #[test]
    fn non_square_full_column_rank() {
        let a = IntMatrix::from_cols(&[vec![2, 4, 6]]);
        let b = hnf(&a).unwrap();
        assert_eq!(b.h, IntMatrix::from_cols(&[vec![2, 4, 6]]));
        let a = IntMatrix::from_cols(&[vec![0, -3, 1]]);
        assert_eq!(hnf(&a).unwrap().h.col(0), vec![0, 3, -1]);
    }

    #[test]
    fn span_hnf_drops_redundant_generators() {
        let g = IntMatrix::from_cols(&[vec![5, 0], vec![0, 5], vec![1, 2], vec![10, 10]]);
        let b = span_hnf(&g).unwrap();
        assert_canonical(&b.h);
        assert_eq!(b.index().unwrap(), 5);
    }

    #[test]
    fn kernel_of_small_row() {
        let a = IntMatrix::from_rows(&[vec![1, 2, 5]]);
        let k = integer_kernel(&a).unwrap();
        assert_eq!((k.rows(), k.cols()), (3, 2));
        assert!(a.checked_mul(&k).unwrap().entries().iter().all(|&x| x == 0));
        // brute force: every kernel vector in [-6,6]^3 is an integer combination
        let basis = span_of(&k);
        for x in -6..=6i64 {
            for y in -6..=6i64 {
                for z in -6..=6i64 {
                    if x + 2 * y + 5 * z == 0 {
                        assert!(basis.contains(&vec![x, y, z]), "missing {x},{y},{z}");
                    }
                }
            }
        }
        assert!(basis.contains(&vec![1, 2, -1]));
        assert!(basis.contains(&vec![5, 0, -1]));
    }

    /// Enumerates small combinations of kernel basis columns.
    fn span_of(k: &IntMatrix) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        for c0 in -30..=30 {
            for c1 in -30..=30 {
                out.insert(k.checked_mul_vec(&[c0, c1]).unwrap());
            }
        }
        out
    }

    #[test]
    fn kernel_trivial_cases() {
        let a = IntMatrix::from_rows(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]);
        let k = integer_kernel(&a).unwrap();
        let cols: BTreeSet<_> = k.columns().into_iter().map(|c| c.iter().map(|x| x.abs()).collect::<Vec<_>>()).collect();
        assert_eq!(cols, BTreeSet::from([vec![0, 0, 1, 0], vec![0, 0, 0, 1]]));

        let z = IntMatrix::zeros(2, 3);
        assert_eq!(integer_kernel(&z).unwrap(), IntMatrix::identity(3));
    }

    #[test]
    fn residue_examples() {
        let five = hnf(&IntMatrix::scalar(2, 5)).unwrap();
        assert_eq!(canonical_residue(&[5, 0], &five).unwrap(), vec![0, 0]);
        assert_eq!(canonical_residue(&[7, 3], &five).unwrap(), vec![2, 3]);
        assert_eq!(canonical_residue(&[-1, -7], &five).unwrap(), vec![4, 3]);
    }

    #[test]
    fn residue_against_coset_enumeration() {
        let basis = hnf(&IntMatrix::from_cols(&[vec![5, 0], vec![3, 1]])).unwrap();
        assert_eq!(basis.index().unwrap(), 5);
        let lattice = lattice_points_in_box(&IntMatrix::from_cols(&[vec![5, 0], vec![3, 1]]), 30, 40);
        let in_lattice = |v: &[i64]| lattice.contains(v);
        let v = [4i64, 4];
        let r = canonical_residue(&v, &basis).unwrap();
        assert!(in_lattice(&[r[0] - v[0], r[1] - v[1]]));
        // exactly one point of the canonical box lies in the coset of v
        let reps: Vec<Vec<i64>> = (0..basis.h[(0, 0)])
            .flat_map(|a| (0..basis.h[(1, 1)]).map(move |b| vec![a, b]))
            .filter(|w| in_lattice(&[w[0] - v[0], w[1] - v[1]]))
            .collect();
        assert_eq!(reps, vec![r.clone()]);
        // the canonical box has exactly index-many cosets
        let mut cosets = BTreeSet::new();
        for a in -6..6 {
            for b in -6..6 {
                cosets.insert(canonical_residue(&[a, b], &basis).unwrap());
            }
        }
        assert_eq!(cosets.len(), 5);
        assert_eq!(canonical_residue(&r, &basis).unwrap(), r);
    }
}
