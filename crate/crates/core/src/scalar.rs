//! The idempotent, commutative, non-associative operation ⊞ on ℝ and its
//! n-ary extension.
//!
//! `x ⊞ y` keeps the operand of larger magnitude; operands of equal magnitude
//! average, so `x ⊞ x = x` and `x ⊞ (-x) = 0`. The n-ary fold is *not* a
//! left fold of the binary operation (that would depend on the bracketing):
//! symmetric occurrences are cancelled first by counting, and the result is
//! read off the surviving (residual) entries.

use std::fmt;

use crate::error::{check_all_finite, check_finite, Error, Result};

/// Threshold below which two magnitudes count as equal.
///
/// `tie_eps == 0` is bit-exact comparison, which is the right choice for
/// exactly representable inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tolerance {
    tie_eps: f64,
}

impl Tolerance {
    pub const EXACT: Tolerance = Tolerance { tie_eps: 0.0 };

    pub fn new(tie_eps: f64) -> Result<Self> {
        if !(tie_eps.is_finite() && tie_eps >= 0.0) {
            return Err(Error::Domain(format!(
                "tie tolerance must be finite and nonnegative, got {tie_eps}"
            )));
        }
        Ok(Tolerance { tie_eps })
    }

    pub fn tie_eps(&self) -> f64 {
        self.tie_eps
    }

    #[inline]
    pub fn ties(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tie_eps
    }
}

/// A subset of `{0, .., n-1}`, kept sorted and free of duplicates.
///
/// Indices are zero-based here; the CLI converts to one-based on output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn without(&self, index: usize) -> Self {
        IndexSet(self.0.iter().copied().filter(|&i| i != index).collect())
    }

    /// Fails if any member is `>= dim`.
    pub fn check_within(&self, dim: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= dim => Err(Error::IndexOutOfRange { index: last, dim }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut members: Vec<usize> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        IndexSet(members)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[inline]
pub(crate) fn boxplus_unchecked(x: f64, y: f64, tol: Tolerance) -> f64 {
    let (ax, ay) = (x.abs(), y.abs());
    if ax > ay + tol.tie_eps {
        x
    } else if ay > ax + tol.tie_eps {
        y
    } else {
        0.5 * (x + y)
    }
}

/// `x ⊞ y`: the larger-magnitude operand; `(x + y) / 2` on a magnitude tie.
pub fn boxplus(x: f64, y: f64, tol: Tolerance) -> Result<f64> {
    check_finite(x, "boxplus")?;
    check_finite(y, "boxplus")?;
    Ok(boxplus_unchecked(x, y, tol))
}

/// `Card{i ∈ I : x_i ≈ α} − Card{i ∈ I : x_i ≈ −α}`.
pub fn xi(x: &[f64], set: &IndexSet, alpha: f64, tol: Tolerance) -> Result<i64> {
    set.check_within(x.len())?;
    Ok(xi_unchecked(x, set.as_slice(), alpha, tol))
}

fn xi_unchecked(x: &[f64], set: &[usize], alpha: f64, tol: Tolerance) -> i64 {
    set.iter().fold(0i64, |acc, &i| {
        let v = x[i];
        // For alpha = 0 both tests hit and the contribution nets to zero.
        acc + i64::from(tol.ties(v, alpha)) - i64::from(tol.ties(v, -alpha))
    })
}

/// Indices of `I` that survive symmetric cancellation: `{ j ∈ I : ξ_I(x_j) ≠ 0 }`.
pub fn residual_index_set(x: &[f64], set: &IndexSet, tol: Tolerance) -> Result<IndexSet> {
    set.check_within(x.len())?;
    Ok(residual_unchecked(x, set.as_slice(), tol))
}

fn residual_unchecked(x: &[f64], set: &[usize], tol: Tolerance) -> IndexSet {
    IndexSet(
        set.iter()
            .copied()
            .filter(|&j| xi_unchecked(x, set, x[j], tol) != 0)
            .collect(),
    )
}

/// The n-ary fold `Ϝ_I(x)` over a nonempty index set.
pub fn nary_boxplus(x: &[f64], set: &IndexSet, tol: Tolerance) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Empty("n-ary boxplus needs a nonempty index set"));
    }
    set.check_within(x.len())?;
    check_all_finite(x, "nary_boxplus")?;
    nary_unchecked(x, set.as_slice(), tol)
}

/// `Ϝ` over all entries of `values`.
pub fn boxplus_all(values: &[f64], tol: Tolerance) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("n-ary boxplus needs at least one value"));
    }
    check_all_finite(values, "boxplus_all")?;
    let all: Vec<usize> = (0..values.len()).collect();
    nary_unchecked(values, &all, tol)
}

pub(crate) fn nary_unchecked(x: &[f64], set: &[usize], tol: Tolerance) -> Result<f64> {
    let residual = residual_unchecked(x, set, tol);
    if residual.is_empty() {
        return Ok(0.0);
    }
    let top = residual
        .iter()
        .map(|j| x[j].abs())
        .fold(0.0_f64, f64::max);
    let balance = xi_unchecked(x, set, top, tol);
    let values = residual.iter().map(|j| x[j]);
    match balance.signum() {
        1 => Ok(values.fold(f64::NEG_INFINITY, f64::max)),
        -1 => Ok(values.fold(f64::INFINITY, f64::min)),
        _ => Err(Error::InvariantViolation(format!(
            "nonempty residual set {residual} with zero balance at magnitude {top}"
        ))),
    }
}

/// `Λ(x)_i = x_i ⊞ Ϝ_{[n]∖{i}}(x)`, with the fold over an empty set taken as 0.
pub fn lambda_map(x: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Empty("lambda map needs n >= 1"));
    }
    check_all_finite(x, "lambda_map")?;
    let n = x.len();
    (0..n)
        .map(|i| {
            let rest: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let others = if rest.is_empty() {
                0.0
            } else {
                nary_unchecked(x, &rest, tol)?
            };
            Ok(boxplus_unchecked(x[i], others, tol))
        })
        .collect()
}

/// `u ⌣ v`: the larger-magnitude operand, ties resolved to the minimum.
pub fn smile(u: f64, v: f64, tol: Tolerance) -> Result<f64> {
    check_finite(u, "smile")?;
    check_finite(v, "smile")?;
    let (au, av) = (u.abs(), v.abs());
    Ok(if au > av + tol.tie_eps {
        u
    } else if av > au + tol.tie_eps {
        v
    } else {
        u.min(v)
    })
}

/// `u_1 ⌣ ⋯ ⌣ u_m`. Zero entries belong to neither sign class and are
/// skipped; an all-zero input gives 0.
pub fn smile_fold(u: &[f64], tol: Tolerance) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::Empty("smile fold needs at least one value"));
    }
    check_all_finite(u, "smile_fold")?;
    let pos_max = u.iter().copied().filter(|&v| v > 0.0).fold(None, |m: Option<f64>, v| {
        Some(m.map_or(v, |m| m.max(v)))
    });
    let neg_min = u.iter().copied().filter(|&v| v < 0.0).fold(None, |m: Option<f64>, v| {
        Some(m.map_or(v, |m| m.min(v)))
    });
    Ok(match (pos_max, neg_min) {
        (None, None) => 0.0,
        (Some(p), None) => p,
        (None, Some(n)) => n,
        (Some(p), Some(n)) => {
            if p > -n + tol.tie_eps {
                p
            } else {
                n
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX: Tolerance = Tolerance::EXACT;

    fn set(members: &[usize]) -> IndexSet {
        members.iter().copied().collect()
    }

    #[test]
    fn boxplus_basic_cases() {
        assert_eq!(boxplus(1.0, 1.0, EX).unwrap(), 1.0);
        assert_eq!(boxplus(1.0, -1.0, EX).unwrap(), 0.0);
        assert_eq!(boxplus(4.0, -3.0, EX).unwrap(), 4.0);
        assert_eq!(boxplus(2.0, -3.0, EX).unwrap(), -3.0);
    }

    #[test]
    fn boxplus_tie_branch_averages() {
        let tol = Tolerance::new(1e-6).unwrap();
        let got = boxplus(0.7, 0.700_000_000_1, tol).unwrap();
        assert!((got - 0.700_000_000_05).abs() < 1e-15, "{got}");
        // Exact comparison picks the larger operand instead.
        assert_eq!(boxplus(0.7, 0.700_000_000_1, EX).unwrap(), 0.700_000_000_1);
    }

    #[test]
    fn boxplus_rejects_non_finite() {
        assert!(matches!(
            boxplus(f64::NAN, 1.0, EX),
            Err(Error::NonFinite { .. })
        ));
        assert!(boxplus(1.0, f64::INFINITY, EX).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(-1.0).is_err());
        assert!(Tolerance::new(f64::NAN).is_err());
        assert_eq!(Tolerance::new(0.0).unwrap(), Tolerance::EXACT);
    }

    #[test]
    fn xi_counts_signed_occurrences() {
        let x = [2.0, 3.0, -2.0, -3.0, 1.5, -3.0, 3.0, -0.5];
        assert_eq!(xi(&x, &IndexSet::full(8), 3.0, EX).unwrap(), 0);
        assert_eq!(xi(&x, &IndexSet::empty(), 3.0, EX).unwrap(), 0);
        assert_eq!(xi(&[1.0, 1.0, -1.0], &IndexSet::full(3), 1.0, EX).unwrap(), 1);
        assert!(xi(&x, &set(&[8]), 1.0, EX).is_err());
    }

    #[test]
    fn residual_set_cases() {
        let x = [2.0, 3.0, -2.0, -3.0, 1.5, -3.0, 3.0, -0.5];
        assert_eq!(
            residual_index_set(&x, &IndexSet::full(8), EX).unwrap(),
            set(&[4, 7])
        );
        let same = [2.5; 4];
        assert_eq!(
            residual_index_set(&same, &IndexSet::full(4), EX).unwrap(),
            IndexSet::full(4)
        );
        assert!(residual_index_set(&[1.0, -1.0], &IndexSet::full(2), EX)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn nary_worked_examples() {
        let x = [2.0, 3.0, -2.0, -3.0, 1.5, -3.0, 3.0, -0.5];
        assert_eq!(nary_boxplus(&x, &IndexSet::full(8), EX).unwrap(), 1.5);
        let x = [4.0, -3.0, -4.0, 2.0, 3.0, 2.0, -2.0];
        assert_eq!(nary_boxplus(&x, &IndexSet::full(7), EX).unwrap(), 2.0);
        for a in [-7.25, 0.0, 3.0] {
            assert_eq!(nary_boxplus(&[a], &IndexSet::full(1), EX).unwrap(), a);
        }
    }

    #[test]
    fn nary_matches_binary_on_pairs() {
        for &(x, y) in &[(1.0, 1.0), (1.0, -1.0), (4.0, -3.0), (2.0, -3.0), (0.0, -2.0)] {
            assert_eq!(
                boxplus_all(&[x, y], EX).unwrap(),
                boxplus(x, y, EX).unwrap()
            );
        }
    }

    #[test]
    fn nary_errors() {
        assert!(matches!(
            nary_boxplus(&[1.0], &IndexSet::empty(), EX),
            Err(Error::Empty(_))
        ));
        assert!(boxplus_all(&[], EX).is_err());
        assert!(boxplus_all(&[1.0, f64::NAN], EX).is_err());
    }

    #[test]
    fn nary_on_subset() {
        let x = [5.0, -5.0, 1.0];
        assert_eq!(nary_boxplus(&x, &set(&[0, 1]), EX).unwrap(), 0.0);
        assert_eq!(nary_boxplus(&x, &set(&[0, 1, 2]), EX).unwrap(), 1.0);
        assert_eq!(nary_boxplus(&x, &set(&[1, 2]), EX).unwrap(), -5.0);
    }

    #[test]
    fn lambda_examples() {
        let x = [4.0, -3.0, -4.0, 2.0, 3.0, 2.0, -2.0];
        assert_eq!(
            lambda_map(&x, EX).unwrap(),
            vec![0.0, 0.0, 0.0, 2.0, 0.0, 2.0, 0.0]
        );
        assert_eq!(lambda_map(&[-6.5], EX).unwrap(), vec![-6.5]);
        assert_eq!(lambda_map(&[1.0, -1.0], EX).unwrap(), vec![0.0, 0.0]);
        assert!(lambda_map(&[], EX).is_err());
    }

    #[test]
    fn smile_examples() {
        assert_eq!(smile(3.0, -3.0, EX).unwrap(), -3.0);
        assert_eq!(smile(1.0, 5.0, EX).unwrap(), 5.0);
        assert_eq!(smile(-4.0, 2.0, EX).unwrap(), -4.0);
        assert_eq!(smile(5.0, 1.0, EX).unwrap(), 5.0);
        assert!(smile(f64::NAN, 0.0, EX).is_err());
    }

    #[test]
    fn smile_bridges_to_boxplus_on_grid() {
        for a in -6..=6 {
            for b in -6..=6 {
                let (u, v) = (a as f64 * 0.5, b as f64 * 0.5);
                let bridged = 0.5 * (smile(u, v, EX).unwrap() - smile(-u, -v, EX).unwrap());
                assert_eq!(bridged, boxplus(u, v, EX).unwrap(), "u={u} v={v}");
            }
        }
    }

    #[test]
    fn smile_fold_examples() {
        assert_eq!(smile_fold(&[2.0, -1.0, 1.0], EX).unwrap(), 2.0);
        assert_eq!(smile_fold(&[2.0, -2.0], EX).unwrap(), -2.0);
        assert_eq!(smile_fold(&[-3.0, -1.0], EX).unwrap(), -3.0);
        assert_eq!(smile_fold(&[0.0, 0.0], EX).unwrap(), 0.0);
        assert_eq!(smile_fold(&[0.0, -0.5, 0.0], EX).unwrap(), -0.5);
        assert!(smile_fold(&[], EX).is_err());
    }

    #[test]
    fn smile_fold_agrees_with_pairwise_smile() {
        // ⌣ is associative, so any left fold must match the closed form.
        let cases: [&[f64]; 4] = [
            &[2.0, -1.0, 1.0],
            &[-3.0, 3.0, 1.0, -2.0],
            &[0.5, -0.25, 0.75],
            &[-1.0, -4.0, 4.0, 4.0],
        ];
        for u in cases {
            let folded = u[1..]
                .iter()
                .fold(u[0], |acc, &v| smile(acc, v, EX).unwrap());
            assert_eq!(folded, smile_fold(u, EX).unwrap(), "{u:?}");
        }
    }

    #[test]
    fn index_set_helpers() {
        let s: IndexSet = [3, 1, 3, 0].into_iter().collect();
        assert_eq!(s.as_slice(), &[0, 1, 3]);
        assert!(s.contains(3) && !s.contains(2));
        assert_eq!(s.without(1).as_slice(), &[0, 3]);
        assert_eq!(s.to_string(), "{0,1,3}");
        assert!(s.check_within(3).is_err());
        assert!(s.check_within(4).is_ok());
    }
}
