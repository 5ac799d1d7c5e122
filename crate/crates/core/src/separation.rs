//! B-forms `x ↦ a_1 x_1 ⌣ ⋯ ⌣ a_n x_n` on an orthant, their sublevel sets,
//! and separation of copositive finitely generated B-convex sets by the
//! idempotent inner product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_all_finite, check_same_dim, Error, Result};
use crate::hull::combination_set_sample;
use crate::scalar::{smile_fold, Tolerance};
use crate::vector::{inner_product_infty, psi_k, Orthant};

/// Samples per set used by [`search_separator`] to screen candidates.
pub const SEARCH_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct BForm {
    pub a: Vec<f64>,
    pub orthant: Orthant,
}

impl BForm {
    pub fn new(a: Vec<f64>, orthant: Orthant) -> Result<Self> {
        check_all_finite(&a, "BForm")?;
        if a.len() != orthant.dim() {
            return Err(Error::DimensionMismatch { left: a.len(), right: orthant.dim() });
        }
        Ok(BForm { a, orthant })
    }

    /// On ℝ₊ⁿ.
    pub fn positive(a: Vec<f64>) -> Result<Self> {
        let n = a.len();
        BForm::new(a, Orthant::positive(n))
    }

    /// `(a_i x'_i)` with `x' = Ψ_K(x)`.
    fn terms(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_same_dim(&self.a, x)?;
        check_all_finite(x, "bform_eval")?;
        if !self.orthant.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} is outside the orthant {:?}",
                self.orthant.signs()
            )));
        }
        let xp = psi_k(x, &self.orthant)?;
        Ok(self.a.iter().zip(&xp).map(|(a, v)| a * v).collect())
    }
}

/// `f(x) = a_1 x'_1 ⌣ ⋯ ⌣ a_n x'_n` with `x' = Ψ_K(x)`.
pub fn bform_eval(f: &BForm, x: &[f64], tol: Tolerance) -> Result<f64> {
    smile_fold(&f.terms(x)?, tol)
}

/// `f(x) ≤ c`, evaluated directly and through the max-inequality form
///
/// * `c ≥ 0`: `max_{I₊} a_i x_i ≤ max{ max_{I₋} −a_i x_i, c }`,
/// * `c < 0`: `max{ max_{I₊} a_i x_i, −c } ≤ max_{I₋} −a_i x_i`,
///
/// where `I₊`, `I₋` index the positive and negative terms. A disagreement
/// away from the boundary `f(x) = c` is reported as an invariant violation.
pub fn sublevel_check(f: &BForm, x: &[f64], c: f64, tol: Tolerance) -> Result<bool> {
    crate::error::check_finite(c, "sublevel_check")?;
    let terms = f.terms(x)?;
    let value = smile_fold(&terms, tol)?;
    let direct = value <= c;

    let pos = terms.iter().copied().filter(|&u| u > 0.0).fold(f64::NEG_INFINITY, f64::max);
    let neg = terms
        .iter()
        .copied()
        .filter(|&u| u < 0.0)
        .map(f64::abs)
        .fold(f64::NEG_INFINITY, f64::max);
    let eps = tol.tie_eps();
    // A negative term within eps of the top positive one wins the tie.
    let negative_dominates = neg.is_finite() && pos <= neg + eps;
    let reformulated = if c >= 0.0 {
        pos <= c || negative_dominates
    } else {
        negative_dominates && -c <= neg
    };

    if direct != reformulated && (value - c).abs() > eps {
        return Err(Error::InvariantViolation(format!(
            "sublevel test disagrees at f(x) = {value}, c = {c}: direct {direct}, max form {reformulated}"
        )));
    }
    Ok(direct)
}

/// `⟨a, x⟩_∞ − f(x)` on ℝ₊ⁿ; nonnegative, and zero when no term `a_i x_i`
/// is negative.
pub fn regularization_gap(a: &[f64], x: &[f64], tol: Tolerance) -> Result<f64> {
    let f = BForm::positive(a.to_vec())?;
    let value = bform_eval(&f, x, tol)?;
    Ok(inner_product_infty(a, x, tol)? - value)
}

/// `ℬ[generators]` for generators in a common orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedBSet {
    pub orthant: Orthant,
    pub generators: Vec<Vec<f64>>,
}

impl GeneratedBSet {
    pub fn new(orthant: Orthant, generators: Vec<Vec<f64>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Empty("a generated set needs at least one generator"));
        }
        for g in &generators {
            if g.len() != orthant.dim() {
                return Err(Error::DimensionMismatch { left: g.len(), right: orthant.dim() });
            }
            check_all_finite(g, "GeneratedBSet")?;
            if !orthant.contains(g) {
                return Err(Error::Domain(format!(
                    "generator {g:?} is outside the orthant {:?}",
                    orthant.signs()
                )));
            }
        }
        Ok(GeneratedBSet { orthant, generators })
    }

    /// The generators followed by `samples` combination points.
    pub fn sample(&self, samples: usize, seed: u64, tol: Tolerance) -> Result<Vec<Vec<f64>>> {
        let mut points = self.generators.clone();
        points.extend(combination_set_sample(&self.generators, samples, seed, tol)?);
        Ok(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparatorCheck {
    pub separated: bool,
    pub sup_c1: f64,
    pub inf_c2: f64,
    /// `inf_c2 − sup_c1`.
    pub gap: f64,
}

fn same_orthant(c1: &GeneratedBSet, c2: &GeneratedBSet) -> Result<()> {
    if c1.orthant != c2.orthant {
        return Err(Error::Domain(format!(
            "sets live in different orthants {:?} and {:?}",
            c1.orthant.signs(),
            c2.orthant.signs()
        )));
    }
    Ok(())
}

fn second_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

fn extremes(a: &[f64], points: &[Vec<f64>], tol: Tolerance) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        let v = inner_product_infty(a, p, tol)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Estimates `sup_{C1} ⟨a, ·⟩_∞` and `inf_{C2} ⟨a, ·⟩_∞` over the generators
/// plus `samples` combination points of each set.
pub fn verify_separator(
    a: &[f64],
    c1: &GeneratedBSet,
    c2: &GeneratedBSet,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<SeparatorCheck> {
    same_orthant(c1, c2)?;
    if a.len() != c1.orthant.dim() {
        return Err(Error::DimensionMismatch { left: a.len(), right: c1.orthant.dim() });
    }
    check_all_finite(a, "verify_separator")?;
    let p1 = c1.sample(samples, seed, tol)?;
    let p2 = c2.sample(samples, second_seed(seed), tol)?;
    let (_, sup_c1) = extremes(a, &p1, tol)?;
    let (inf_c2, _) = extremes(a, &p2, tol)?;
    Ok(SeparatorCheck {
        separated: sup_c1 < inf_c2 - tol.tie_eps(),
        sup_c1,
        inf_c2,
        gap: inf_c2 - sup_c1,
    })
}

/// Deterministic candidate coefficients: the signed axes, then the grid
/// `{0, ±2^k : −2 ≤ k ≤ 2}ⁿ` (while small enough to list), then seeded
/// random directions in `[−1, 1]ⁿ`.
fn candidates(n: usize, seed: u64) -> impl Iterator<Item = Vec<f64>> {
    let axes = (0..n).flat_map(move |i| {
        [1.0, -1.0].into_iter().map(move |s| {
            let mut a = vec![0.0; n];
            a[i] = s;
            a
        })
    });

    let levels: Vec<f64> = std::iter::once(0.0)
        .chain((-2..=2).flat_map(|k| [2f64.powi(k), -(2f64.powi(k))]))
        .collect();
    let grid_size = (levels.len() as u64).checked_pow(n as u32).filter(|&s| s <= 100_000);
    let grid = (0..grid_size.unwrap_or(0)).filter_map(move |mut code| {
        let mut a = Vec::with_capacity(n);
        for _ in 0..n {
            a.push(levels[(code % levels.len() as u64) as usize]);
            code /= levels.len() as u64;
        }
        // Axis multiples were already tried; skip them and the zero vector.
        (a.iter().filter(|v| **v != 0.0).count() >= 2).then_some(a)
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = std::iter::repeat_with(move || {
        (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect::<Vec<f64>>()
    });

    axes.chain(grid).chain(random)
}

/// The first of `budget` candidates that separates `C1` from `C2` when
/// checked with [`SEARCH_SAMPLES`] samples per set. `None` means nothing
/// was found, not that the sets are inseparable.
pub fn search_separator(
    c1: &GeneratedBSet,
    c2: &GeneratedBSet,
    budget: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<Option<Vec<f64>>> {
    search_separator_with(c1, c2, budget, SEARCH_SAMPLES, seed, tol)
}

/// [`search_separator`] with an explicit per-set sample count.
pub fn search_separator_with(
    c1: &GeneratedBSet,
    c2: &GeneratedBSet,
    budget: usize,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<Option<Vec<f64>>> {
    same_orthant(c1, c2)?;
    let n = c1.orthant.dim();
    let p1 = c1.sample(samples, seed, tol)?;
    let p2 = c2.sample(samples, second_seed(seed), tol)?;
    for a in candidates(n, seed).take(budget) {
        let (_, sup) = extremes(&a, &p1, tol)?;
        let (inf, _) = extremes(&a, &p2, tol)?;
        if sup < inf - tol.tie_eps() {
            return Ok(Some(a));
        }
    }
    Ok(None)
}
