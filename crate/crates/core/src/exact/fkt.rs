//! Pfaffian count of dimer covers on open grids.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

/// Number of dimer covers of the open `w x h` grid via a Kasteleyn
/// orientation: horizontal edges point right, vertical edges point up in even
/// columns and down in odd ones. Every face then has an odd number of
/// clockwise edges, so the Pfaffian of the signed adjacency matrix counts
/// covers exactly.
pub fn fkt_count(w: usize, h: usize) -> Result<u128> {
    if w == 0 || h == 0 {
        return invalid("grid sides must be positive");
    }
    let n = w * h;
    if n % 2 == 1 {
        return Ok(0);
    }
    let id = |x: usize, y: usize| y * w + x;
    let mut a = vec![vec![BigInt::zero(); n]; n];
    let mut orient = |u: usize, v: usize| {
        a[u][v] = BigInt::from(1);
        a[v][u] = BigInt::from(-1);
    };
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                orient(id(x, y), id(x + 1, y));
            }
            if y + 1 < h {
                if x % 2 == 0 {
                    orient(id(x, y), id(x, y + 1));
                } else {
                    orient(id(x, y + 1), id(x, y));
                }
            }
        }
    }
    let det = bareiss_det(a);
    if det.is_negative() {
        return invalid("skew determinant came out negative");
    }
    let root = det.sqrt();
    if &root * &root != det {
        return invalid("skew determinant is not a perfect square");
    }
    root.to_u128().ok_or_else(|| crate::error::Error::InvalidArgument("count overflows u128".into()))
}

/// Fraction-free Gaussian elimination.
fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grids() {
        assert_eq!(fkt_count(2, 3).unwrap(), 3);
        assert_eq!(fkt_count(4, 4).unwrap(), 36);
        assert_eq!(fkt_count(3, 3).unwrap(), 0);
        assert_eq!(fkt_count(1, 2).unwrap(), 1);
    }

    #[test]
    fn determinant() {
        let m = vec![
            vec![BigInt::from(0), BigInt::from(2)],
            vec![BigInt::from(3), BigInt::from(1)],
        ];
        assert_eq!(bareiss_det(m), BigInt::from(-6));
    }
}
