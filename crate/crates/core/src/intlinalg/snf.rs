use serde::{Deserialize, Serialize};

use super::matrix::{checked_add, narrow, WideMatrix};
use super::{IntMatrix, LinalgError};

/// `left * a * right = diag(d)` with `d[i] | d[i+1]`.
///
/// `d` has `min(rows, cols)` entries; trailing zeros mark rank deficiency.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfDecomposition {
    pub d: Vec<i64>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.d.iter().take_while(|&&x| x != 0).count()
    }
}

/// Smith normal form by gcd-driven row and column reduction.
///
/// The pivot is always the smallest nonzero entry available, which keeps
/// coefficient growth in check for the small matrices used here.
pub fn snf(a: &IntMatrix) -> Result<SnfDecomposition, LinalgError> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut s = WideMatrix::from(a);
    let mut left = WideMatrix::identity(rows);
    let mut right = WideMatrix::identity(cols);
    let diag_len = rows.min(cols);

    for t in 0..diag_len {
        // bring the smallest nonzero entry of the trailing block to (t, t)
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| s[(i, j)] != 0)
            .min_by_key(|&(i, j)| s[(i, j)].unsigned_abs())
        else {
            break;
        };
        s.swap_rows(t, pi);
        left.swap_rows(t, pi);
        s.swap_cols(t, pj);
        right.swap_cols(t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if s[(i, t)] != 0 {
                    let q = s[(i, t)] / s[(t, t)];
                    s.row_axpy(i, t, q)?;
                    left.row_axpy(i, t, q)?;
                    dirty |= s[(i, t)] != 0;
                }
            }
            for j in t + 1..cols {
                if s[(t, j)] != 0 {
                    let q = s[(t, j)] / s[(t, t)];
                    s.col_axpy(j, t, q)?;
                    right.col_axpy(j, t, q)?;
                    dirty |= s[(t, j)] != 0;
                }
            }
            if dirty {
                // a remainder smaller than the pivot survived; promote it
                let best_row = (t + 1..rows)
                    .filter(|&i| s[(i, t)] != 0)
                    .min_by_key(|&i| s[(i, t)].unsigned_abs());
                let best_col = (t + 1..cols)
                    .filter(|&j| s[(t, j)] != 0)
                    .min_by_key(|&j| s[(t, j)].unsigned_abs());
                let row_val = best_row.map(|i| s[(i, t)].unsigned_abs());
                let col_val = best_col.map(|j| s[(t, j)].unsigned_abs());
                match (row_val, col_val) {
                    (Some(rv), cv) if cv.is_none_or(|cv| rv <= cv) => {
                        let i = best_row.unwrap();
                        s.swap_rows(t, i);
                        left.swap_rows(t, i);
                    }
                    _ => {
                        let j = best_col.unwrap();
                        s.swap_cols(t, j);
                        right.swap_cols(t, j);
                    }
                }
                continue;
            }
            // row and column t are clear; enforce divisibility of the rest
            let pivot = s[(t, t)];
            let offender = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| s[(i, j)] % pivot != 0));
            match offender {
                Some(i) => {
                    // row t += row i
                    for j in 0..cols {
                        s[(t, j)] = checked_add(s[(t, j)], s[(i, j)])?;
                    }
                    for j in 0..rows {
                        left[(t, j)] = checked_add(left[(t, j)], left[(i, j)])?;
                    }
                }
                None => break,
            }
        }
        if s[(t, t)] < 0 {
            s.negate_row(t);
            left.negate_row(t);
        }
    }

    let d = (0..diag_len).map(|i| narrow(s[(i, i)])).collect::<Result<_, _>>()?;
    Ok(SnfDecomposition { d, left: left.to_int()?, right: right.to_int()? })
}
