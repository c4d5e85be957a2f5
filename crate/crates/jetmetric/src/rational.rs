//! Exact rational scalars and their canonical string form.
//!
//! `Rational` is `num_rational::BigRational`: arbitrary precision, always
//! reduced, positive denominator. All engine I/O writes fractions as
//! `"<num>/<den>"` and accepts plain integers on input.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid fraction string {0:?}")]
pub struct ParseRationalError(pub String);

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical `"<num>/<den>"` rendering used in every report and JSON file.
pub fn fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    let err = || ParseRationalError(s.to_string());
    match s.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().map_err(|_| err())?;
            let den: BigInt = den.trim().parse().map_err(|_| err())?;
            if den.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(num))
        }
    }
}

/// Exact determinant of a small square matrix of rationals by Gaussian
/// elimination with exact pivoting.
pub fn det_rational(mat: &[Vec<Rational>]) -> Rational {
    let n = mat.len();
    debug_assert!(mat.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<Rational>> = mat.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return Rational::zero(),
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= p.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &p;
            for c in col..n {
                let sub = &factor * &m[col][c];
                m[r][c] -= sub;
            }
        }
    }
    det
}

/// Exact inverse of a small square rational matrix, if invertible.
pub fn invert_rational(mat: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = mat.len();
    let mut m: Vec<Vec<Rational>> = mat.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot, col);
        inv.swap(pivot, col);
        let p = m[col][col].clone();
        for c in 0..n {
            m[col][c] /= p.clone();
            inv[col][c] /= p.clone();
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..n {
                let s = &factor * &m[col][c];
                m[r][c] -= s;
                let s = &factor * &inv[col][c];
                inv[r][c] -= s;
            }
        }
    }
    Some(inv)
}

/// Sign of a permutation given as a slice of distinct values; parity of the
/// inversion count.
pub fn permutation_sign<T: Ord>(perm: &[T]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn abs(r: &Rational) -> Rational {
    if r.is_negative() {
        -r.clone()
    } else {
        r.clone()
    }
}
