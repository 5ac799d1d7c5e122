//! Finite-exponent counterpart of the limit objects.
//!
//! With `q = 2p + 1`, the odd power `λ ↦ λ^q` is a bijection of ℝ and the
//! Hölder sum `(Σ x_i^q)^{1/q}` tends to the n-ary ⊞-fold as `p → ∞`. This
//! module evaluates those sums without forming `x^q` (which overflows near
//! `p = 150` for `|x| > 10`), builds `γ^(p)` and `Co^p(x, y)` from them, and
//! measures Hausdorff distances to the limit hull.
//!
//! Nothing here calls the combinatorial fold of [`crate::scalar`], so it can
//! serve as an independent reference for it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_all_finite, check_same_dim, Error, Result};
use crate::hull::{co_infinity, ExtReal};
use crate::scalar::{IndexSet, Tolerance};
use crate::vector::euclidean_distance;

pub const MAX_P: u32 = 500;

/// The exponent `q = 2p + 1` for `p ≤ MAX_P`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PIndex(u32);

impl PIndex {
    pub fn new(p: u32) -> Result<Self> {
        if p > MAX_P {
            return Err(Error::Domain(format!("p = {p} exceeds the cap {MAX_P}")));
        }
        Ok(PIndex(p))
    }

    pub fn p(self) -> u32 {
        self.0
    }

    pub fn exponent(self) -> i32 {
        2 * self.0 as i32 + 1
    }
}

/// `sign · exp(ln_mag)`, for quantities like `Σ x_i^q` that do not fit in an f64.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogReal {
    pub sign: i8,
    /// Natural log of the magnitude; meaningless when `sign == 0`.
    pub ln_mag: f64,
}

impl SignedLogReal {
    pub const ZERO: SignedLogReal = SignedLogReal { sign: 0, ln_mag: f64::NEG_INFINITY };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            SignedLogReal {
                sign: if v > 0.0 { 1 } else { -1 },
                ln_mag: v.abs().ln(),
            }
        }
    }

    /// May overflow to ±∞ or underflow to ±0.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.ln_mag.exp()
        }
    }

    /// The real odd root `v^{1/q}`.
    pub fn odd_root(self, q: i32) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * (self.ln_mag / f64::from(q)).exp()
        }
    }
}

/// Removes pairs `{a, −a}` by exact (bitwise) magnitude matching and returns
/// the survivors as `(signed value, multiplicity)`.
fn cancel_symmetric_pairs(values: &[f64]) -> Vec<(f64, usize)> {
    let mut mags: Vec<(u64, bool)> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| (v.abs().to_bits(), *v > 0.0))
        .collect();
    mags.sort_unstable();
    let mut out = Vec::new();
    let mut k = 0;
    while k < mags.len() {
        let bits = mags[k].0;
        let (mut pos, mut neg) = (0usize, 0usize);
        while k < mags.len() && mags[k].0 == bits {
            if mags[k].1 {
                pos += 1;
            } else {
                neg += 1;
            }
            k += 1;
        }
        let m = f64::from_bits(bits);
        if pos > neg {
            out.push((m, pos - neg));
        } else if neg > pos {
            out.push((-m, neg - pos));
        }
    }
    out
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// `(M, s)` with `Σ v_i^q = s · M^q`, `|s| ≤ count`; `None` when the sum
/// vanishes.
fn scaled_power_sum(values: &[f64], q: i32) -> Option<(f64, f64)> {
    let survivors = cancel_symmetric_pairs(values);
    let top = survivors.iter().fold(0.0_f64, |m, (v, _)| m.max(v.abs()));
    if top == 0.0 {
        return None;
    }
    let s = compensated_sum(
        survivors
            .iter()
            .map(|&(v, c)| v.signum() * c as f64 * (v.abs() / top).powi(q)),
    );
    if s == 0.0 {
        None
    } else {
        Some((top, s))
    }
}

/// `Σ_{i∈I} x_i^q` in signed-log form.
pub fn holder_power_sum(x: &[f64], set: &IndexSet, p: PIndex) -> Result<SignedLogReal> {
    let picked = pick(x, set)?;
    let q = p.exponent();
    Ok(match scaled_power_sum(&picked, q) {
        None => SignedLogReal::ZERO,
        Some((top, s)) => SignedLogReal {
            sign: if s > 0.0 { 1 } else { -1 },
            ln_mag: f64::from(q) * top.ln() + s.abs().ln(),
        },
    })
}

fn pick(x: &[f64], set: &IndexSet) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::Empty("Hölder sum needs a nonempty index set"));
    }
    set.check_within(x.len())?;
    check_all_finite(x, "holder_sum")?;
    Ok(set.iter().map(|i| x[i]).collect())
}

fn holder_unchecked(values: &[f64], q: i32) -> f64 {
    match scaled_power_sum(values, q) {
        None => 0.0,
        Some((top, s)) => s.signum() * top * s.abs().powf(1.0 / f64::from(q)),
    }
}

/// `(Σ_{i∈I} x_i^{2p+1})^{1/(2p+1)}`, exactly 0 when symmetric pairs cancel.
pub fn holder_sum(x: &[f64], set: &IndexSet, p: PIndex) -> Result<f64> {
    let picked = pick(x, set)?;
    Ok(holder_unchecked(&picked, p.exponent()))
}

/// [`holder_sum`] over all entries.
pub fn holder_sum_all(x: &[f64], p: PIndex) -> Result<f64> {
    holder_sum(x, &IndexSet::full(x.len()), p)
}

/// `(wx x ⊕_p wy y) / (wx ⊕_p wy)` with `a ⊕_p b = (a^q + b^q)^{1/q}`.
fn weighted_gamma_p(x: &[f64], y: &[f64], wx: f64, wy: f64, q: i32) -> Vec<f64> {
    let norm = holder_unchecked(&[wx, wy], q);
    x.iter()
        .zip(y)
        .map(|(&a, &b)| holder_unchecked(&[wx * a, wy * b], q) / norm)
        .collect()
}

/// `γ^(p)(x, y, t) = (1 ⊕_p t)⁻¹ x ⊕_p t (1 ⊕_p t)⁻¹ y`, with `γ^(p)(x, y, +∞) = y`.
pub fn gamma_p(x: &[f64], y: &[f64], t: ExtReal, p: PIndex) -> Result<Vec<f64>> {
    check_same_dim(x, y)?;
    check_all_finite(x, "gamma_p")?;
    check_all_finite(y, "gamma_p")?;
    match t {
        ExtReal::Infinity => Ok(y.to_vec()),
        ExtReal::Finite(t) if t.is_finite() && t >= 0.0 => {
            let m = t.max(1.0);
            Ok(weighted_gamma_p(x, y, 1.0 / m, t / m, p.exponent()))
        }
        ExtReal::Finite(t) => Err(Error::Domain(format!(
            "parameter must lie in [0, +inf], got {t}"
        ))),
    }
}

/// The order-p i-intermediate point `γ^(p)(x, y, |x_i / y_i|)`. Coordinate
/// `i` is exactly 0.
pub fn intermediate_point_p(x: &[f64], y: &[f64], i: usize, p: PIndex) -> Result<Vec<f64>> {
    check_same_dim(x, y)?;
    if i >= x.len() {
        return Err(Error::IndexOutOfRange { index: i, dim: x.len() });
    }
    check_all_finite(x, "intermediate_point_p")?;
    check_all_finite(y, "intermediate_point_p")?;
    if !((x[i] > 0.0 && y[i] < 0.0) || (x[i] < 0.0 && y[i] > 0.0)) {
        return Err(Error::Domain(format!(
            "coordinate {i} does not change sign between x and y"
        )));
    }
    Ok(weighted_gamma_p(x, y, y[i].abs(), x[i].abs(), p.exponent()))
}

/// Points of `γ^(p)(x, y, ·)` near the breakpoint `τ = |x_i / y_i|` at which
/// coordinate `i` (and every coordinate with the same ratio) takes the
/// fraction `±rho` of its endpoint magnitude.
///
/// For large `q` the crossing happens within a relative window of about
/// `rho^q` around `τ`, far below f64 resolution, so the point is evaluated
/// from `δ = t / τ − 1` directly instead of from `t`.
fn crossing_point(x: &[f64], y: &[f64], i: usize, rho: f64, after: bool, q: i32) -> Vec<f64> {
    let qf = f64::from(q);
    let rq = rho.powi(q);
    // (1 + δ)^q = 1 ∓ rho^q
    let ln1p_delta = if after { rq.ln_1p() / qf } else { (-rq).ln_1p() / qf };

    let wx = y[i].abs();
    let ln_wy = x[i].abs().ln() + ln1p_delta;
    let wy = ln_wy.exp();
    // D = (wx^q + wy^q)^{1/q}, from logs.
    let (ln_hi, ln_lo) = if wx.ln() >= ln_wy { (wx.ln(), ln_wy) } else { (ln_wy, wx.ln()) };
    let ln_d = ln_hi + (qf * (ln_lo - ln_hi)).exp().ln_1p() / qf;
    let d = ln_d.exp();
    // (1 − (1 + δ)^q)^{1/q} = ±rho, taken directly since rho^q may underflow.
    let root_u = if after { -rho } else { rho };

    (0..x.len())
        .map(|j| {
            let c = wx * x[j].abs();
            let tied = (x[j] > 0.0) != (y[j] > 0.0)
                && x[j] != 0.0
                && y[j] != 0.0
                && c == x[i].abs() * y[j].abs();
            if tied {
                x[j].signum() * c * root_u / d
            } else {
                holder_unchecked(&[wx * x[j], wy * y[j]], q) / d
            }
        })
        .collect()
}

/// `γ^(p)` on the parameter `θ ∈ [0, 2]`: `t = θ` on `[0, 1]` and
/// `1/t = 2 − θ` on `[1, 2]`.
fn gamma_p_theta(x: &[f64], y: &[f64], theta: f64, q: i32) -> Vec<f64> {
    if theta <= 1.0 {
        weighted_gamma_p(x, y, 1.0, theta, q)
    } else {
        weighted_gamma_p(x, y, 2.0 - theta, 1.0, q)
    }
}

/// Seeded sample of `Co^p(x, y) = γ^(p)(x, y, [0, +∞])`.
///
/// Starts from `count` stratified jittered parameters plus the endpoints and
/// breakpoints, then bisects parameter intervals whose images are more than
/// twice the mean spacing apart (at most `count` extra points). For large
/// `p` the curve moves through each copositive coordinate's switch within a
/// relative window of about `1/(2p+1)`, which a fixed grid steps over.
/// Sign changes are faster still and are filled analytically (see
/// [`crossing_point`]), together with the order-p intermediate points.
pub fn co_p_sample(x: &[f64], y: &[f64], p: PIndex, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_same_dim(x, y)?;
    check_all_finite(x, "co_p_sample")?;
    check_all_finite(y, "co_p_sample")?;
    if count < 2 {
        return Err(Error::Domain(format!("Co^p sample needs count >= 2, got {count}")));
    }
    let q = p.exponent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut thetas: Vec<f64> = vec![0.0, 2.0];
    thetas.extend((0..count).map(|j| 2.0 * (j as f64 + rng.random::<f64>()) / count as f64));
    let conflicting: Vec<usize> = (0..x.len())
        .filter(|&i| (x[i] > 0.0 && y[i] < 0.0) || (x[i] < 0.0 && y[i] > 0.0))
        .collect();
    for &i in &conflicting {
        let tau = x[i].abs() / y[i].abs();
        thetas.push(if tau <= 1.0 { tau } else { 2.0 - 1.0 / tau });
    }
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();

    let mut curve: Vec<(f64, Vec<f64>)> = thetas
        .into_iter()
        .map(|th| (th, gamma_p_theta(x, y, th, q)))
        .collect();
    let length: f64 = curve.windows(2).map(|w| euclidean_distance(&w[0].1, &w[1].1)).sum();
    let gap = 2.0 * length / count as f64;
    let mut budget = count;
    let mut refined = Vec::with_capacity(curve.len());
    let mut stack: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut iter = curve.drain(..);
    let mut prev = iter.next().expect("curve has its endpoints");
    for next in iter {
        stack.push(next);
        while let Some(right) = stack.pop() {
            let mid = 0.5 * (prev.0 + right.0);
            let splittable = mid > prev.0 && mid < right.0;
            if budget > 0 && splittable && euclidean_distance(&prev.1, &right.1) > gap {
                budget -= 1;
                let point = gamma_p_theta(x, y, mid, q);
                stack.push(right);
                stack.push((mid, point));
            } else {
                refined.push(std::mem::replace(&mut prev, right));
            }
        }
    }
    refined.push(prev);

    let mut out: Vec<Vec<f64>> = refined.into_iter().map(|(_, point)| point).collect();
    for &i in &conflicting {
        out.push(intermediate_point_p(x, y, i, p)?);
        let crossing = (count / 4).max(16);
        for k in 1..=crossing {
            let rho = k as f64 / (crossing + 1) as f64;
            out.push(crossing_point(x, y, i, rho, false, q));
            out.push(crossing_point(x, y, i, rho, true, q));
        }
    }
    Ok(out)
}

/// Euclidean Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("Hausdorff distance needs two nonempty sets"));
    }
    for p in a.iter().chain(b) {
        check_same_dim(&a[0], p)?;
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// `sup_{p∈a} dist(p, b)`. The scan for each `p` starts at the previous
/// nearest neighbour and stops as soon as some point is closer than the
/// running supremum, since `p` can then no longer raise it.
fn directed(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut sup = 0.0_f64;
    let mut hint = 0;
    for p in a {
        let mut best = f64::INFINITY;
        let start = hint;
        for off in 0..b.len() {
            let k = (start + off) % b.len();
            let d = euclidean_distance(p, &b[k]);
            if d < best {
                best = d;
                hint = k;
                if best <= sup {
                    break;
                }
            }
        }
        sup = sup.max(best);
    }
    sup
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub p: u32,
    pub hausdorff: f64,
}

/// Hausdorff distance between a `count`-point sample of `Co^p(x, y)` and a
/// `count`-point sample of `Co^∞(x, y)` for each `p`, in ascending `p`.
pub fn convergence_sweep(
    x: &[f64],
    y: &[f64],
    ps: &[PIndex],
    count: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<Vec<ConvergenceRow>> {
    let limit = co_infinity(x, y, tol)?.dense_sample(count);
    let mut ps = ps.to_vec();
    ps.sort_unstable();
    ps.dedup();
    ps.into_iter()
        .map(|p| {
            let sample = co_p_sample(x, y, p, count, seed)?;
            Ok(ConvergenceRow {
                p: p.p(),
                hausdorff: hausdorff_distance(&sample, &limit)?,
            })
        })
        .collect()
}
