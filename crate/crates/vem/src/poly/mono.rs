//! Graded multi-index bookkeeping for scaled monomial bases.
//!
//! Multi-indices are ordered by total degree, ties broken lexicographically on
//! the exponent tuple, so in 2D the sequence starts
//! `(0,0), (0,1), (1,0), (0,2), (1,1), (2,0), …`.

/// Dimension of the polynomial space of total degree ≤ `k` in `dim` variables.
pub fn space_dim(k: i64, dim: usize) -> usize {
    if k < 0 {
        return 0;
    }
    let k = k as usize;
    match dim {
        1 => k + 1,
        2 => (k + 1) * (k + 2) / 2,
        3 => (k + 1) * (k + 2) * (k + 3) / 6,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// All multi-indices of total degree ≤ `k` in graded order.
pub fn indices(k: usize, dim: usize) -> Vec<[u8; 3]> {
    let mut out = Vec::with_capacity(space_dim(k as i64, dim));
    for d in 0..=k {
        match dim {
            2 => {
                for a1 in 0..=d {
                    out.push([a1 as u8, (d - a1) as u8, 0]);
                }
            }
            3 => {
                for a1 in 0..=d {
                    for a2 in 0..=(d - a1) {
                        out.push([a1 as u8, a2 as u8, (d - a1 - a2) as u8]);
                    }
                }
            }
            _ => panic!("unsupported dimension {dim}"),
        }
    }
    out
}

/// Position of a multi-index in the graded ordering.
pub fn position(alpha: [u8; 3], dim: usize) -> usize {
    let d = (alpha[0] + alpha[1] + alpha[2]) as usize;
    let below = if d == 0 { 0 } else { space_dim(d as i64 - 1, dim) };
    match dim {
        2 => below + alpha[0] as usize,
        3 => {
            // Indices of degree d with smaller a1, plus offset within a1 block.
            let a1 = alpha[0] as usize;
            let mut off = 0;
            for b1 in 0..a1 {
                off += d - b1 + 1;
            }
            below + off + alpha[1] as usize
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn total_degree(alpha: [u8; 3]) -> usize {
    (alpha[0] + alpha[1] + alpha[2]) as usize
}

pub fn add(a: [u8; 3], b: [u8; 3]) -> [u8; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_match_closed_forms() {
        assert_eq!(space_dim(3, 2), 10);
        assert_eq!(space_dim(3, 3), 20);
        assert_eq!(space_dim(-1, 2), 0);
        assert_eq!(space_dim(0, 3), 1);
    }

    #[test]
    fn positions_are_inverse_of_enumeration() {
        for dim in [2, 3] {
            let idx = indices(6, dim);
            assert_eq!(idx.len(), space_dim(6, dim));
            for (i, &a) in idx.iter().enumerate() {
                assert_eq!(position(a, dim), i, "alpha {a:?} dim {dim}");
            }
        }
    }
}
