//! Row reduction over F_q. Arithmetic is exact, so plain Gaussian
//! elimination with any nonzero pivot computes ranks reliably.

use crate::field::{FieldCtx, FqElement};

/// Rank of a row-major matrix over F_q; rows may have any common length.
pub(crate) fn rank(rows: &mut [Vec<FqElement>], ctx: &FieldCtx) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let pivot = (rank..nrows).find(|&i| !ctx.is_zero(&rows[i][col]));
        let Some(pivot) = pivot else { continue };
        rows.swap(rank, pivot);
        let inv = ctx
            .inv(&rows[rank][col])
            .expect("pivot is nonzero by construction");
        for j in col..ncols {
            rows[rank][j] = ctx.mul(&rows[rank][j], &inv);
        }
        for i in 0..nrows {
            if i == rank || ctx.is_zero(&rows[i][col]) {
                continue;
            }
            let factor = rows[i][col];
            for j in col..ncols {
                let t = ctx.mul(&factor, &rows[rank][j]);
                rows[i][j] = ctx.sub(&rows[i][j], &t);
            }
        }
        rank += 1;
    }
    rank
}
