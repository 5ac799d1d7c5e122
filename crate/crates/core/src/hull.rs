//! Limit convex hull `Co^∞(x, y)` of two points.
//!
//! The hull is the chain of B-segments between consecutive intermediate
//! points `γ(x, y, t*)`, where `t*` runs over the ratios `|x_i / y_i|` of the
//! sign-conflicting coordinates. Membership can be decided segment by segment
//! or through the four-parameter description `t x ⊞ r x ⊞ s y ⊞ w y`; the two
//! routes share no code beyond the scalar fold, so they cross-check each
//! other.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_all_finite, check_same_dim, Error, Result};
use crate::scalar::{boxplus_unchecked, nary_unchecked, IndexSet, Tolerance};
use crate::vector::{copositive_unchecked, euclidean_distance, norm_inf, vec_nary_boxplus, Orthant};

/// A parameter in `[0, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn finite(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("parameter must lie in [0, +inf], got {t}")));
        }
        if t.is_infinite() {
            return Ok(ExtReal::Infinity);
        }
        Ok(ExtReal::Finite(t))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            ExtReal::Finite(t) => t,
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    fn validate(self) -> Result<f64> {
        match self {
            ExtReal::Finite(t) if !(t.is_finite() && t >= 0.0) => Err(Error::Domain(format!(
                "parameter must lie in [0, +inf], got {t}"
            ))),
            other => Ok(other.as_f64()),
        }
    }
}

/// `γ(x, y, t) = max{1, t}⁻¹ (x ⊞ t y)`, with `γ(x, y, +∞) = y`.
pub fn gamma(x: &[f64], y: &[f64], t: ExtReal, tol: Tolerance) -> Result<Vec<f64>> {
    check_same_dim(x, y)?;
    check_all_finite(x, "gamma")?;
    check_all_finite(y, "gamma")?;
    let t = t.validate()?;
    if t.is_infinite() {
        return Ok(y.to_vec());
    }
    let m = t.max(1.0);
    Ok(x.iter()
        .zip(y)
        .map(|(&a, &b)| boxplus_unchecked(a, t * b, tol) / m)
        .collect())
}

/// `I(x, y) = { i : x_i y_i < 0 }`.
pub fn sign_conflict_set(x: &[f64], y: &[f64]) -> Result<IndexSet> {
    check_same_dim(x, y)?;
    Ok(conflicts(x, y).collect())
}

fn conflicts<'a>(x: &'a [f64], y: &'a [f64]) -> impl Iterator<Item = usize> + 'a {
    (0..x.len()).filter(move |&i| (x[i] > 0.0 && y[i] < 0.0) || (x[i] < 0.0 && y[i] > 0.0))
}

/// `(|y_i| x ⊞ |x_i| y) / max{|x_i|, |y_i|}`: the value of γ at `t = |x_i / y_i|`
/// written so that coordinate `i` cancels exactly.
fn weighted_point(x: &[f64], y: &[f64], i: usize, tol: Tolerance) -> Vec<f64> {
    let (wx, wy) = (y[i].abs(), x[i].abs());
    let m = wx.max(wy);
    x.iter()
        .zip(y)
        .map(|(&a, &b)| boxplus_unchecked(wx * a, wy * b, tol) / m)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakPoint {
    pub t: ExtReal,
    /// Coordinates vanishing at this breakpoint; empty for the endpoints.
    pub sources: Vec<usize>,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntermediateSequence {
    pub breakpoints: Vec<BreakPoint>,
}

/// Breakpoints `0 = t_0 < t*_1 < ⋯ < +∞` with their γ points. Coordinates
/// whose ratios coincide (within `tol`) share one breakpoint.
pub fn intermediate_sequence(x: &[f64], y: &[f64], tol: Tolerance) -> Result<IntermediateSequence> {
    check_same_dim(x, y)?;
    check_all_finite(x, "intermediate_sequence")?;
    check_all_finite(y, "intermediate_sequence")?;

    let mut ratios: Vec<(f64, usize)> = conflicts(x, y).map(|i| (x[i].abs() / y[i].abs(), i)).collect();
    if let Some(&(r, i)) = ratios.iter().find(|(r, _)| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Domain(format!(
            "ratio |x_{i}/y_{i}| = {r} is not representable"
        )));
    }
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut breakpoints = vec![BreakPoint {
        t: ExtReal::Finite(0.0),
        sources: Vec::new(),
        point: x.to_vec(),
    }];
    let mut k = 0;
    while k < ratios.len() {
        let (lead_ratio, lead) = ratios[k];
        let mut sources = vec![lead];
        k += 1;
        while k < ratios.len() && tol.ties(ratios[k].0, lead_ratio) {
            sources.push(ratios[k].1);
            k += 1;
        }
        let mut point = weighted_point(x, y, lead, tol);
        for &i in &sources {
            point[i] = 0.0;
        }
        sources.sort_unstable();
        breakpoints.push(BreakPoint {
            t: ExtReal::Finite(lead_ratio),
            sources,
            point,
        });
    }
    breakpoints.push(BreakPoint {
        t: ExtReal::Infinity,
        sources: Vec::new(),
        point: y.to_vec(),
    });

    for pair in breakpoints.windows(2) {
        if !copositive_unchecked(&pair[0].point, &pair[1].point) {
            return Err(Error::InvariantViolation(format!(
                "consecutive intermediate points {:?} and {:?} are not copositive",
                pair[0].point, pair[1].point
            )));
        }
    }
    Ok(IntermediateSequence { breakpoints })
}

/// `Co^∞(x, y)` as a chain of copositive B-segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseHull {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub breakpoints: Vec<BreakPoint>,
    /// Index pairs into `breakpoints`. A hull of a single point has the one
    /// degenerate segment `(0, 0)`.
    pub segments: Vec<(usize, usize)>,
}

impl PiecewiseHull {
    pub fn segment(&self, m: usize) -> (&[f64], &[f64]) {
        let (a, b) = self.segments[m];
        (&self.breakpoints[a].point, &self.breakpoints[b].point)
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Vertices of the hull as a polyline in ℝⁿ, from `x` to `y`.
    ///
    /// Each B-segment is itself piecewise linear: in its orthant it runs
    /// from `u` to `u ∨ v` and on to `v`, bending where one coordinate of the
    /// moving endpoint overtakes the fixed one.
    pub fn polyline(&self) -> Vec<Vec<f64>> {
        let mut vertices: Vec<Vec<f64>> = vec![self.x.clone()];
        for m in 0..self.segment_count() {
            let (u, v) = self.segment(m);
            for p in segment_polyline(u, v).into_iter().skip(1) {
                if vertices.last() != Some(&p) {
                    vertices.push(p);
                }
            }
        }
        vertices
    }

    /// `count` points spread evenly by arc length along the hull, plus every
    /// polyline vertex.
    pub fn dense_sample(&self, count: usize) -> Vec<Vec<f64>> {
        let vertices = self.polyline();
        if vertices.len() == 1 {
            return vertices;
        }
        let lengths: Vec<f64> = vertices
            .windows(2)
            .map(|w| euclidean_distance(&w[0], &w[1]))
            .collect();
        let total: f64 = lengths.iter().sum();
        let mut out = vertices.clone();
        if count < 2 || total == 0.0 {
            return out;
        }
        let mut edge = 0;
        let mut start = 0.0;
        for j in 0..count {
            let target = total * j as f64 / (count - 1) as f64;
            while edge + 1 < lengths.len() && start + lengths[edge] < target {
                start += lengths[edge];
                edge += 1;
            }
            let frac = if lengths[edge] > 0.0 {
                ((target - start) / lengths[edge]).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (a, b) = (&vertices[edge], &vertices[edge + 1]);
            out.push(a.iter().zip(b).map(|(p, q)| p + frac * (q - p)).collect());
        }
        out
    }
}

/// Vertices of `ℬ[u, v]` for a copositive pair, from `u` to `v`.
fn segment_polyline(u: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    let k = Orthant::of_pair(u, v).expect("hull segments are copositive");
    let up: Vec<f64> = u.iter().enumerate().map(|(i, a)| k.sign(i) * a).collect();
    let vp: Vec<f64> = v.iter().enumerate().map(|(i, a)| k.sign(i) * a).collect();

    let mut rising: Vec<f64> = (0..up.len())
        .filter(|&i| vp[i] > 0.0)
        .map(|i| up[i] / vp[i])
        .filter(|&s| s > 0.0 && s < 1.0)
        .collect();
    rising.sort_by(f64::total_cmp);
    let mut falling: Vec<f64> = (0..up.len())
        .filter(|&i| up[i] > 0.0)
        .map(|i| vp[i] / up[i])
        .filter(|&t| t > 0.0 && t < 1.0)
        .collect();
    falling.sort_by(|a, b| b.total_cmp(a));

    let join = |t: f64, s: f64| -> Vec<f64> {
        (0..up.len())
            .map(|i| k.sign(i) * (t * up[i]).max(s * vp[i]))
            .collect()
    };
    let mut out = vec![u.to_vec()];
    for s in rising.into_iter().chain(std::iter::once(1.0)) {
        out.push(join(1.0, s));
    }
    for t in falling.into_iter().chain(std::iter::once(0.0)) {
        out.push(join(t, 1.0));
    }
    out.push(v.to_vec());
    out.dedup();
    out
}

/// Builds `Co^∞(x, y)` from the intermediate sequence, merging consecutive
/// breakpoints that carry the same point.
pub fn co_infinity(x: &[f64], y: &[f64], tol: Tolerance) -> Result<PiecewiseHull> {
    let seq = intermediate_sequence(x, y, tol)?;
    let mut breakpoints: Vec<BreakPoint> = Vec::with_capacity(seq.breakpoints.len());
    for bp in seq.breakpoints {
        if breakpoints.last().map(|last| last.point == bp.point) != Some(true) {
            breakpoints.push(bp);
        }
    }
    let segments = if breakpoints.len() == 1 {
        vec![(0, 0)]
    } else {
        (0..breakpoints.len() - 1).map(|m| (m, m + 1)).collect()
    };
    Ok(PiecewiseHull {
        x: x.to_vec(),
        y: y.to_vec(),
        breakpoints,
        segments,
    })
}

fn slack(tol: Tolerance, vectors: &[&[f64]]) -> f64 {
    let scale = vectors.iter().fold(0.0_f64, |m, v| m.max(norm_inf(v)));
    tol.tie_eps() + 1e-12 * scale
}

/// Whether `z ∈ ℬ[u, v] = { t u ⊞ s v : t, s ∈ [0, 1], max{t, s} = 1 }`.
pub fn segment_membership(z: &[f64], u: &[f64], v: &[f64], tol: Tolerance) -> Result<bool> {
    check_same_dim(u, v)?;
    check_same_dim(z, u)?;
    check_all_finite(z, "segment_membership")?;
    check_all_finite(u, "segment_membership")?;
    check_all_finite(v, "segment_membership")?;
    let k = Orthant::of_pair(u, v)?;
    let eps = slack(tol, &[z, u, v]);
    Ok(segment_contains(z, u, v, &k, eps))
}

fn segment_contains(z: &[f64], u: &[f64], v: &[f64], k: &Orthant, eps: f64) -> bool {
    let n = z.len();
    let flip = |w: &[f64]| -> Vec<f64> { (0..n).map(|i| k.sign(i) * w[i]).collect() };
    let (zp, up, vp) = (flip(z), flip(u), flip(v));
    if zp.iter().any(|&c| c < -eps) {
        return false;
    }
    // One of the two parameters equals 1; the other is either 0, 1, or
    // pinned by a coordinate where the scaled point is the larger one.
    let fixed_first = |fixed: &[f64], moving: &[f64]| -> bool {
        let candidates = [0.0, 1.0]
            .into_iter()
            .chain((0..n).filter(|&i| moving[i] > 0.0).map(|i| zp[i] / moving[i]));
        for s in candidates {
            if !s.is_finite() {
                continue;
            }
            let s = s.clamp(0.0, 1.0);
            if (0..n).all(|i| (zp[i] - fixed[i].max(s * moving[i])).abs() <= eps) {
                return true;
            }
        }
        false
    };
    fixed_first(&up, &vp) || fixed_first(&vp, &up)
}

/// Whether `z` lies on some segment of the hull.
pub fn hull_membership(z: &[f64], hull: &PiecewiseHull, tol: Tolerance) -> Result<bool> {
    check_same_dim(z, &hull.x)?;
    check_all_finite(z, "hull_membership")?;
    for m in 0..hull.segment_count() {
        let (u, v) = hull.segment(m);
        let k = Orthant::of_pair(u, v)?;
        if segment_contains(z, u, v, &k, slack(tol, &[z, u, v])) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether `z = t x ⊞ r x ⊞ s y ⊞ w y` for some `t, r, s, w ≥ 0` with
/// maximum 1, the fold taken coordinatewise over four terms.
///
/// The fold only depends on `T = max{t, r}`, `S = max{s, w}` and the two
/// smaller weights, and the smaller weights only matter on coordinates where
/// `T |x_k| = S |y_k|` with opposite signs. So either `r = t, w = s` (the
/// one-parameter family `x ⊞ τ y`, normalized), or `S / T = |x_i / y_i|` for
/// a conflicting coordinate `i` and one of the smaller weights is free. Both
/// families are searched over a finite candidate set, and each candidate is
/// verified by evaluating the fold.
pub fn four_term_membership(z: &[f64], x: &[f64], y: &[f64], tol: Tolerance) -> Result<bool> {
    check_same_dim(x, y)?;
    check_same_dim(z, x)?;
    check_all_finite(z, "four_term_membership")?;
    check_all_finite(x, "four_term_membership")?;
    check_all_finite(y, "four_term_membership")?;
    let n = z.len();
    let eps = slack(tol, &[z, x, y]);
    let all4 = [0usize, 1, 2, 3];

    // Weights need not be normalized: the fold is homogeneous, so the result
    // is divided by the largest weight.
    let fits = |w: [f64; 4]| -> bool {
        let m = w.iter().fold(0.0_f64, |a, &b| a.max(b));
        if !(m > 0.0 && m.is_finite()) || w.iter().any(|&c| c.is_nan() || c < 0.0) {
            return false;
        }
        (0..n).all(|k| {
            let terms = [w[0] * x[k], w[1] * x[k], w[2] * y[k], w[3] * y[k]];
            match nary_unchecked(&terms, &all4, tol) {
                Ok(v) => (v / m - z[k]).abs() <= eps,
                Err(_) => false,
            }
        })
    };

    // Family 1: r = t, w = s.
    let mut taus: Vec<f64> = vec![1.0];
    let mut exact: Vec<[f64; 4]> = vec![[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]];
    for k in 0..n {
        if x[k] != 0.0 && y[k] != 0.0 {
            let (ax, ay) = (x[k].abs(), y[k].abs());
            exact.push([ay, ay, ax, ax]);
            taus.push(ax / ay);
        }
        let a = z[k] / y[k];
        if a.is_finite() && a > 0.0 {
            exact.push([1.0, 1.0, a, a]);
            taus.push(a);
        }
        let b = z[k] / x[k];
        if b.is_finite() && b > 0.0 {
            exact.push([b, b, 1.0, 1.0]);
            taus.push(1.0 / b);
        }
    }
    if exact.into_iter().any(fits) {
        return Ok(true);
    }
    taus.retain(|t| t.is_finite() && *t > 0.0);
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let mut interior: Vec<f64> = taus.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    interior.push(0.5 * taus[0]);
    interior.push(2.0 * taus[taus.len() - 1]);
    if interior.into_iter().any(|tau| fits([1.0, 1.0, tau, tau])) {
        return Ok(true);
    }

    // Family 2: a cancelling coordinate i fixes S / T; the smaller weight on
    // one side is free.
    for i in conflicts(x, y) {
        let (big_t, big_s) = (y[i].abs(), x[i].abs());
        let m = big_t.max(big_s);
        let mut lambdas = vec![0.0, big_t];
        let mut mus = vec![0.0, big_s];
        for k in 0..n {
            lambdas.push(z[k] * m / x[k]);
            mus.push(z[k] * m / y[k]);
        }
        let found = lambdas
            .into_iter()
            .filter(|l| l.is_finite())
            .any(|l| fits([big_t, l.clamp(0.0, big_t), big_s, 0.0]))
            || mus
                .into_iter()
                .filter(|u| u.is_finite())
                .any(|u| fits([big_t, 0.0, big_s, u.clamp(0.0, big_s)]));
        if found {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Seeded sample of `{ ⊞_i t_i x_i : t ∈ [0, 1]^m, max_i t_i = 1 }`.
///
/// Draws are sequential, so a larger `count` extends a smaller one.
pub fn combination_set_sample(
    xs: &[Vec<f64>],
    count: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<Vec<Vec<f64>>> {
    if xs.is_empty() {
        return Err(Error::Empty("combination set needs at least one generator"));
    }
    for x in xs {
        check_same_dim(&xs[0], x)?;
        check_all_finite(x, "combination_set_sample")?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scaled: Vec<Vec<f64>> = xs.to_vec();
    (0..count)
        .map(|_| {
            let mut weights: Vec<f64> = (0..xs.len()).map(|_| rng.random::<f64>()).collect();
            let (arg, top) = weights
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, w)| if w > best.1 { (i, w) } else { best });
            for w in weights.iter_mut() {
                *w = if top > 0.0 { *w / top } else { 0.0 };
            }
            weights[arg] = 1.0;
            for ((dst, src), w) in scaled.iter_mut().zip(xs).zip(&weights) {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = w * s;
                }
            }
            vec_nary_boxplus(&scaled, tol)
        })
        .collect()
}

/// A continuous map `[0, 1] → Co^∞(x, y)` onto the hull with `0 ↦ x` and
/// `1 ↦ y`. The unit interval is cut into one equal piece per segment, and
/// piece `m` runs through `γ(u_m, v_m, σ / (1 − σ))`.
pub fn path_eval(x: &[f64], y: &[f64], s: f64, tol: Tolerance) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("path parameter must lie in [0, 1], got {s}")));
    }
    let hull = co_infinity(x, y, tol)?;
    path_eval_on(&hull, s, tol)
}

/// [`path_eval`] on a hull that is already built.
pub fn path_eval_on(hull: &PiecewiseHull, s: f64, tol: Tolerance) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("path parameter must lie in [0, 1], got {s}")));
    }
    let pieces = hull.segment_count();
    let scaled = s * pieces as f64;
    let m = (scaled.floor() as usize).min(pieces - 1);
    let sigma = (scaled - m as f64).clamp(0.0, 1.0);
    let (u, v) = hull.segment(m);
    let t = if sigma >= 1.0 {
        ExtReal::Infinity
    } else {
        ExtReal::Finite(sigma / (1.0 - sigma))
    };
    gamma(u, v, t, tol)
}

/// Outcome of [`closure_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureProbe {
    pub pairs_tested: usize,
    pub points_tested: usize,
    /// Points of `Co^∞(a, b)` for hull points `a, b` that fell outside
    /// `Co^∞(x, y)`.
    pub escapes: Vec<Vec<f64>>,
}

/// Experimental check of whether `Co^∞(x, y)` contains `Co^∞(a, b)` for
/// sampled hull points `a, b`. Reports what it finds and claims nothing.
pub fn closure_probe(
    x: &[f64],
    y: &[f64],
    pairs: usize,
    points_per_pair: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<ClosureProbe> {
    let hull = co_infinity(x, y, tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ClosureProbe {
        pairs_tested: 0,
        points_tested: 0,
        escapes: Vec::new(),
    };
    for _ in 0..pairs {
        let a = path_eval_on(&hull, rng.random::<f64>(), tol)?;
        let b = path_eval_on(&hull, rng.random::<f64>(), tol)?;
        let inner = co_infinity(&a, &b, tol)?;
        report.pairs_tested += 1;
        for p in inner.dense_sample(points_per_pair) {
            report.points_tested += 1;
            if !hull_membership(&p, &hull, tol)? {
                report.escapes.push(p);
            }
        }
    }
    Ok(report)
}
