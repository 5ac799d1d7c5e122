//! Componentwise extension to ℝⁿ: ⊞ on vectors, the Hadamard product,
//! copositivity, orthants and the sign-flip map Ψ_K, the order `|x| ≤ |y|`
//! and the idempotent inner product.

use crate::error::{check_all_finite, check_same_dim, Error, Result};
use crate::scalar::{boxplus_unchecked, nary_unchecked, Tolerance};

/// A closed orthant `{x : ε_i x_i ≥ 0}` given by its sign pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orthant {
    signs: Vec<i8>,
}

impl Orthant {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Empty("orthant needs at least one coordinate"));
        }
        if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("orthant sign must be +1 or -1, got {bad}")));
        }
        Ok(Orthant { signs })
    }

    /// ℝ₊ⁿ.
    pub fn positive(n: usize) -> Self {
        Orthant { signs: vec![1; n] }
    }

    /// The orthant containing `x`, zero coordinates counted as positive.
    pub fn of(x: &[f64]) -> Self {
        Orthant {
            signs: x.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect(),
        }
    }

    /// A common orthant for a copositive pair: the sign of `x_i` when nonzero,
    /// else the sign of `y_i`, else +1.
    pub fn of_pair(x: &[f64], y: &[f64]) -> Result<Self> {
        check_same_dim(x, y)?;
        if !copositive_unchecked(x, y) {
            return Err(Error::Domain("vectors are not copositive".into()));
        }
        Ok(Orthant {
            signs: x
                .iter()
                .zip(y)
                .map(|(&a, &b)| {
                    if a < 0.0 || (a == 0.0 && b < 0.0) {
                        -1
                    } else {
                        1
                    }
                })
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, &v)| self.sign(i) * v >= 0.0)
    }
}

/// Componentwise `x ⊞ y`.
pub fn vec_boxplus(x: &[f64], y: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    check_same_dim(x, y)?;
    check_all_finite(x, "vec_boxplus")?;
    check_all_finite(y, "vec_boxplus")?;
    Ok(x.iter().zip(y).map(|(&a, &b)| boxplus_unchecked(a, b, tol)).collect())
}

/// Coordinate `k` is the n-ary fold of `(x_{1,k}, …, x_{m,k})`.
pub fn vec_nary_boxplus(xs: &[Vec<f64>], tol: Tolerance) -> Result<Vec<f64>> {
    let first = xs.first().ok_or(Error::Empty("vector fold needs at least one vector"))?;
    for x in xs {
        check_same_dim(first, x)?;
        check_all_finite(x, "vec_nary_boxplus")?;
    }
    let all: Vec<usize> = (0..xs.len()).collect();
    let mut column = vec![0.0; xs.len()];
    (0..first.len())
        .map(|k| {
            for (slot, x) in column.iter_mut().zip(xs) {
                *slot = x[k];
            }
            nary_unchecked(&column, &all, tol)
        })
        .collect()
}

/// Hadamard product `x ⊡ y`.
pub fn boxdot(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_same_dim(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).collect())
}

pub(crate) fn copositive_unchecked(x: &[f64], y: &[f64]) -> bool {
    x.iter()
        .zip(y)
        .all(|(&a, &b)| !((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)))
}

/// `x ⊡ y ∈ ℝ₊ⁿ`.
pub fn is_copositive(x: &[f64], y: &[f64]) -> Result<bool> {
    check_same_dim(x, y)?;
    Ok(copositive_unchecked(x, y))
}

/// `Ψ_K(x) = (ε_1 x_1, …, ε_n x_n)`; an involution.
pub fn psi_k(x: &[f64], k: &Orthant) -> Result<Vec<f64>> {
    if x.len() != k.dim() {
        return Err(Error::DimensionMismatch { left: x.len(), right: k.dim() });
    }
    Ok(x.iter().enumerate().map(|(i, &v)| k.sign(i) * v).collect())
}

/// `x ⩽ y ⟺ |x| ≤ |y|` coordinatewise.
pub fn semilattice_leq(x: &[f64], y: &[f64]) -> Result<bool> {
    check_same_dim(x, y)?;
    Ok(x.iter().zip(y).all(|(a, b)| a.abs() <= b.abs()))
}

/// `⟨x, y⟩_∞`: the n-ary fold of the coordinate products.
pub fn inner_product_infty(x: &[f64], y: &[f64], tol: Tolerance) -> Result<f64> {
    let products = boxdot(x, y)?;
    if products.is_empty() {
        return Err(Error::Empty("inner product needs n >= 1"));
    }
    check_all_finite(&products, "inner_product_infty")?;
    let all: Vec<usize> = (0..products.len()).collect();
    nary_unchecked(&products, &all, tol)
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}
