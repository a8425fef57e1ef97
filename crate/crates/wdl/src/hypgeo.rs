//! Discs, the Poincaré metric, contraction factors and winding numbers of
//! sampled closed curves.

use crate::error::{Error, Result};
use crate::scale::LogScaled;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Complex64,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Complex64, radius: f64) -> Result<Disc> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("disc radius {radius} must be positive")));
        }
        Ok(Disc { center, radius })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// A point of the open unit disc.
///
/// Points closer than 1/4 to the boundary fixed point 1 are stored through
/// `v = 1 - w`, which keeps orbits converging to 1 resolvable long after
/// `w` itself rounds to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiscPoint {
    Interior(Complex64),
    NearOne(Complex64),
}

const CHART_SWITCH: f64 = 0.25;

impl DiscPoint {
    pub fn new(w: Complex64) -> DiscPoint {
        DiscPoint::Interior(w).normalized()
    }

    pub fn from_one_minus(v: Complex64) -> DiscPoint {
        DiscPoint::NearOne(v).normalized()
    }

    fn normalized(self) -> DiscPoint {
        match self {
            DiscPoint::Interior(w) if (1.0 - w).norm() < CHART_SWITCH => DiscPoint::NearOne(1.0 - w),
            DiscPoint::NearOne(v) if v.norm() >= CHART_SWITCH => DiscPoint::Interior(1.0 - v),
            p => p,
        }
    }

    pub fn value(&self) -> Complex64 {
        match *self {
            DiscPoint::Interior(w) => w,
            DiscPoint::NearOne(v) => 1.0 - v,
        }
    }

    pub fn one_minus(&self) -> Complex64 {
        match *self {
            DiscPoint::Interior(w) => 1.0 - w,
            DiscPoint::NearOne(v) => v,
        }
    }

    pub fn is_near_one(&self) -> bool {
        matches!(self, DiscPoint::NearOne(_))
    }

    /// `1 - |w|^2`.
    pub fn one_minus_norm_sqr(&self) -> f64 {
        match *self {
            DiscPoint::Interior(w) => {
                let r = w.norm();
                (1.0 - r) * (1.0 + r)
            }
            DiscPoint::NearOne(v) => 2.0 * v.re - v.norm_sqr(),
        }
    }

    /// `1 - |w|`.
    pub fn edge_gap(&self) -> f64 {
        match *self {
            DiscPoint::Interior(w) => 1.0 - w.norm(),
            DiscPoint::NearOne(v) => self.one_minus_norm_sqr() / (1.0 + (1.0 - v).norm()),
        }
    }

    pub fn translate(&self, e: Complex64) -> DiscPoint {
        match *self {
            DiscPoint::Interior(w) => DiscPoint::Interior(w + e),
            DiscPoint::NearOne(v) => DiscPoint::NearOne(v - e),
        }
        .normalized()
    }

    /// `self - other`, exact in whichever chart both points share.
    pub fn difference(&self, other: &DiscPoint) -> Complex64 {
        match (self, other) {
            (DiscPoint::Interior(a), DiscPoint::Interior(b)) => a - b,
            _ => other.one_minus() - self.one_minus(),
        }
    }
}

fn check_unit(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{z} is not inside the unit disc")))
    }
}

/// Poincaré distance between two points of the unit disc.
pub fn hyp_dist_unit(z: Complex64, w: Complex64) -> Result<f64> {
    check_unit(z)?;
    check_unit(w)?;
    hyp_dist_points(&DiscPoint::new(z), &DiscPoint::new(w))
}

/// Poincaré distance, evaluated through `v = 1 - w` when either point sits
/// near 1 so that the pseudo-hyperbolic quotient keeps full precision.
pub fn hyp_dist_points(a: &DiscPoint, b: &DiscPoint) -> Result<f64> {
    let ga = a.one_minus_norm_sqr();
    let gb = b.one_minus_norm_sqr();
    if !(ga > 0.0) || !(gb > 0.0) {
        return Err(Error::Domain("point not inside the unit disc".into()));
    }
    let num = a.difference(b).norm();
    if num == 0.0 {
        return Ok(0.0);
    }
    let den = match (a, b) {
        (DiscPoint::Interior(z), DiscPoint::Interior(w)) => (1.0 - w.conj() * z).norm(),
        _ => {
            let (v1, v2) = (a.one_minus(), b.one_minus());
            (v1 + v2.conj() - v2.conj() * v1).norm()
        }
    };
    let q = num / den;
    if q < 0.5 {
        return Ok(2.0 * q.atanh());
    }
    // 1 - q from (1-|a|^2)(1-|b|^2) = den^2 - num^2
    let one_minus_q = ga * gb / (den * (den + num));
    Ok(q.ln_1p() - one_minus_q.ln())
}

pub fn hyp_dist_disc(d: &Disc, z: Complex64, w: Complex64) -> Result<f64> {
    if !d.contains(z) || !d.contains(w) {
        return Err(Error::Domain(format!("points must lie inside D({}, {})", d.center, d.radius)));
    }
    hyp_dist_unit((z - d.center) / d.radius, (w - d.center) / d.radius)
}

/// `c(s, R) = (1 - s^2) / (R - s^2/R)`.
pub fn contraction_factor(s: f64, big_r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) || !(big_r >= 1.0) || !big_r.is_finite() {
        return Err(Error::Domain(format!("contraction factor needs 0 <= s < 1 <= R, got s={s}, R={big_r}")));
    }
    let s2 = s * s;
    Ok((1.0 - s2) / (big_r - s2 / big_r))
}

/// `1 - c(s, R)` from the gaps `1 - s` and `R - 1`, using
/// `1 - c = (R - 1)(R + s^2) / ((R - s)(R + s))`.
pub fn contraction_defect(s_gap: LogScaled, r_gap: LogScaled) -> Result<LogScaled> {
    let sg = s_gap.to_f64();
    if !s_gap.is_positive() || sg > 1.0 || r_gap.sign() == crate::scale::Sign::Negative {
        return Err(Error::Domain("contraction defect needs 0 < 1-s <= 1 and R >= 1".into()));
    }
    let s = 1.0 - sg;
    let big_r = 1.0 + r_gap.to_f64();
    let r_minus_s = r_gap + s_gap;
    Ok(r_gap * LogScaled::from_f64((big_r + s * s) / (big_r + s)) / r_minus_s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    points: Vec<Complex64>,
    closed: bool,
}

impl SampledCurve {
    pub fn new(points: Vec<Complex64>, closed: bool) -> Result<SampledCurve> {
        if points.len() < 8 {
            return Err(Error::Domain(format!("curve needs at least 8 samples, got {}", points.len())));
        }
        let n = points.len();
        let last = if closed { n } else { n - 1 };
        for i in 0..last {
            if points[i] == points[(i + 1) % n] {
                return Err(Error::Domain(format!("consecutive samples {i} coincide")));
            }
        }
        Ok(SampledCurve { points, closed })
    }

    pub fn closed(points: Vec<Complex64>) -> Result<SampledCurve> {
        SampledCurve::new(points, true)
    }

    pub fn circle(center: Complex64, radius: f64, n: usize) -> Result<SampledCurve> {
        SampledCurve::from_fn(n, |t| center + Complex64::from_polar(radius, t))
    }

    /// Closed curve through `f(2πk/n)`, `k = 0..n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<SampledCurve> {
        let pts = (0..n).map(|k| f(2.0 * PI * k as f64 / n as f64)).collect();
        SampledCurve::closed(pts)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> SampledCurve {
        let mut p = self.points.clone();
        p.reverse();
        SampledCurve { points: p, closed: self.closed }
    }

    pub fn rotated(&self, k: usize) -> SampledCurve {
        let mut p = self.points.clone();
        let len = p.len();
        p.rotate_left(k % len);
        SampledCurve { points: p, closed: self.closed }
    }

    /// Length of the bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = bbox(&self.points);
        (hi - lo).norm()
    }

    fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }
}

impl Serialize for SampledCurve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.points.iter().map(|p| [p.re, p.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledCurve {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let pts = pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        SampledCurve::closed(pts).map_err(serde::de::Error::custom)
    }
}

fn bbox(points: &[Complex64]) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.re = lo.re.min(p.re);
        lo.im = lo.im.min(p.im);
        hi.re = hi.re.max(p.re);
        hi.im = hi.im.max(p.im);
    }
    (lo, hi)
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = ((p - a) * ab.conj()).re / ab.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_distance(a0: Complex64, a1: Complex64, b0: Complex64, b1: Complex64) -> f64 {
    let d1 = cross(a1 - a0, b0 - a0);
    let d2 = cross(a1 - a0, b1 - a0);
    let d3 = cross(b1 - b0, a0 - b0);
    let d4 = cross(b1 - b0, a1 - b0);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

const PROXIMITY_REL: f64 = 1e-9;
const MAX_STEP: f64 = 0.9 * PI;

/// Winding number of a closed sampled curve about `p`.
pub fn winding_number(c: &SampledCurve, p: Complex64) -> Result<i64> {
    if !c.closed {
        return Err(Error::Domain("winding number needs a closed curve".into()));
    }
    let tol = PROXIMITY_REL * c.diameter().max(f64::MIN_POSITIVE);
    let mut total = 0.0;
    let mut max_step: f64 = 0.0;
    let mut nearest = f64::INFINITY;
    for (a, b) in c.segments() {
        nearest = nearest.min(point_segment_distance(p, a, b));
        let (u, v) = (a - p, b - p);
        let step = cross(u, v).atan2((u * v.conj()).re);
        max_step = max_step.max(step.abs());
        total += step;
    }
    if nearest <= tol {
        return Err(Error::Proximity { distance: nearest, tolerance: tol });
    }
    let turns = total / (2.0 * PI);
    let k = turns.round();
    let residual = (turns - k).abs();
    if residual >= 0.1 || max_step > MAX_STEP {
        return Err(Error::Ambiguity { residual, max_step });
    }
    Ok(k as i64)
}

pub fn winds_around_disc(c: &SampledCurve, d: &Disc, k: i64) -> Result<bool> {
    let closest = c.points.iter().map(|z| (z - d.center).norm()).fold(f64::INFINITY, f64::min);
    if closest <= d.radius {
        return Ok(false);
    }
    Ok(winding_number(c, d.center)? == k)
}

/// Whether the two sampled curves stay at least `tol` apart.
pub fn curves_disjoint(a: &SampledCurve, b: &SampledCurve, tol: f64) -> bool {
    let sa: Vec<_> = a.segments().collect();
    let sb: Vec<_> = b.segments().collect();
    let all: Vec<Complex64> = a.points.iter().chain(b.points.iter()).copied().collect();
    let (lo, hi) = bbox(&all);
    let cells = ((sa.len() + sb.len()) as f64).sqrt().ceil().clamp(1.0, 2048.0) as usize;
    let w = ((hi.re - lo.re) / cells as f64).max(f64::MIN_POSITIVE);
    let h = ((hi.im - lo.im) / cells as f64).max(f64::MIN_POSITIVE);
    let cell_range = |p: Complex64, q: Complex64| {
        let ix = |x: f64| (((x - lo.re) / w).floor().max(0.0) as usize).min(cells - 1);
        let iy = |y: f64| (((y - lo.im) / h).floor().max(0.0) as usize).min(cells - 1);
        let (x0, x1) = (ix(p.re.min(q.re) - tol), ix(p.re.max(q.re) + tol));
        let (y0, y1) = (iy(p.im.min(q.im) - tol), iy(p.im.max(q.im) + tol));
        (x0, x1, y0, y1)
    };
    let mut grid: Vec<Vec<u32>> = vec![Vec::new(); cells * cells];
    for (i, &(p, q)) in sa.iter().enumerate() {
        let (x0, x1, y0, y1) = cell_range(p, q);
        for x in x0..=x1 {
            for y in y0..=y1 {
                grid[x * cells + y].push(i as u32);
            }
        }
    }
    for &(p, q) in &sb {
        let (x0, x1, y0, y1) = cell_range(p, q);
        for x in x0..=x1 {
            for y in y0..=y1 {
                for &i in &grid[x * cells + y] {
                    let (r, s) = sa[i as usize];
                    if segments_distance(p, q, r, s) <= tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// `outer` surrounds `inner`: the curves are disjoint and inner samples have
/// winding number `degree` with respect to `outer`.
///
/// Disjointness puts all of `inner` in one complementary component of
/// `outer`, so the winding number is tested on a spread of samples.
pub fn surrounds(outer: &SampledCurve, inner: &SampledCurve, degree: i64) -> Result<bool> {
    if !outer.closed || !inner.closed {
        return Err(Error::Domain("surrounds needs closed curves".into()));
    }
    let tol = PROXIMITY_REL * outer.diameter().max(inner.diameter());
    if !curves_disjoint(outer, inner, tol) {
        return Ok(false);
    }
    let n = inner.len();
    for i in (0..n).step_by((n / 8).max(1)) {
        if winding_number(outer, inner.points[i])? != degree {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of checking an inequality over a grid of samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub name: String,
    pub checks: usize,
    /// Least slack over all samples; negative means some sample failed.
    pub min_margin: f64,
    pub failures: usize,
    /// The sample attaining `min_margin`.
    pub worst: String,
}

impl SweepReport {
    pub fn new(name: &str) -> SweepReport {
        SweepReport { name: name.into(), checks: 0, min_margin: f64::INFINITY, failures: 0, worst: String::new() }
    }

    /// Records one sample; `strict` demands a positive margin.
    pub fn record(&mut self, margin: f64, strict: bool, sample: impl FnOnce() -> String) {
        self.checks += 1;
        let ok = if strict { margin > 0.0 } else { margin >= 0.0 };
        if !ok || margin.is_nan() {
            self.failures += 1;
        }
        if margin < self.min_margin || margin.is_nan() {
            self.min_margin = margin;
            self.worst = sample();
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

/// The two disc comparisons for `|z|, |w| <= s < r < 1 < R`:
/// `dist_{D_R} >= c(s,R) dist_D` and `dist_{D_r} <= dist_D / c(s/r, 1/r)`;
/// the real-axis bounds `log((1-r)/(1-s)) <= dist_D(r,s) <= 2 log((1-r)/(1-s))`;
/// and Möbius invariance of `dist_D`.
///
/// `grid` samples per axis of `(s, r, R)`, cycling through `pairs` random
/// point pairs.
pub fn hyperbolic_estimate_sweep(grid: usize, pairs: usize, seed: u64) -> Result<Vec<SweepReport>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let unit_point = |rng: &mut rand_chacha::ChaCha8Rng| {
        let r: f64 = rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen::<f64>() * 2.0 * PI)
    };
    let pts: Vec<(Complex64, Complex64)> = (0..pairs.max(1)).map(|_| (unit_point(&mut rng), unit_point(&mut rng))).collect();
    let mut outer = SweepReport::new("contraction_outer");
    let mut inner = SweepReport::new("contraction_inner");
    let mut factor = SweepReport::new("factor_in_unit_interval");
    let g = grid as f64 + 1.0;
    let mut idx = 0;
    for i in 1..=grid {
        let s = i as f64 / g;
        for j in 1..=grid {
            let r = s + (1.0 - s) * j as f64 / g;
            for k in 1..=grid {
                let big_r = 1.0 + k as f64 / g;
                let c_out = contraction_factor(s, big_r)?;
                let c_in = contraction_factor(s / r, 1.0 / r)?;
                factor.record(c_out.min(1.0 - c_out), true, || format!("s={s}, R={big_r}"));
                let (z0, w0) = pts[idx % pts.len()];
                idx += 1;
                let (z, w) = (z0 * s, w0 * s);
                let d = hyp_dist_unit(z, w)?;
                let scale = d.max(1e-300);
                let d_out = hyp_dist_unit(z / big_r, w / big_r)?;
                outer.record((d_out - c_out * d) / scale, false, || format!("s={s}, R={big_r}, z={z}, w={w}"));
                let d_in = hyp_dist_unit(z / r, w / r)?;
                inner.record((d / c_in - d_in) / scale, false, || format!("s={s}, r={r}, z={z}, w={w}"));
            }
        }
    }
    let mut real = SweepReport::new("real_axis_bounds");
    for i in 1..=grid {
        for j in i + 1..=grid {
            let (a, b) = (i as f64 / g, j as f64 / g);
            let d = hyp_dist_unit(Complex64::new(a, 0.0), Complex64::new(b, 0.0))?;
            let l = ((1.0 - a) / (1.0 - b)).ln();
            real.record((d - l).min(2.0 * l - d), false, || format!("r={a}, s={b}"));
        }
    }
    let mut mobius = SweepReport::new("mobius_invariance");
    for (z, w) in &pts {
        let a = unit_point(&mut rng) * 0.99;
        let rot = Complex64::from_polar(1.0, rng.gen::<f64>() * 2.0 * PI);
        let t = |p: Complex64| rot * (p - a) / (1.0 - a.conj() * p);
        let d = hyp_dist_unit(*z, *w)?;
        let dt = hyp_dist_unit(t(*z), t(*w))?;
        mobius.record(1e-10 - (dt - d).abs() / d.max(1.0), false, || format!("z={z}, w={w}, a={a}"));
    }
    Ok(vec![outer, inner, factor, real, mobius])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn near_one_chart_keeps_tiny_gaps() {
        let a = DiscPoint::from_one_minus(c(1e-30, 0.0));
        let b = DiscPoint::from_one_minus(c(2e-30, 0.0));
        // dist(1-x, 1-2x) -> log 2 as x -> 0
        let d = hyp_dist_points(&a, &b).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-12);
        assert!((a.edge_gap() - 1e-30).abs() < 1e-44);
    }

    #[test]
    fn chart_switching_round_trips() {
        let p = DiscPoint::new(c(0.9, 0.0));
        assert!(p.is_near_one());
        let q = p.translate(c(-0.5, 0.0));
        assert!(!q.is_near_one());
        assert!((q.value() - c(0.4, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn contraction_defect_matches_direct_formula() {
        let (s, r) = (0.7, 1.3);
        let d = contraction_defect(LogScaled::from_f64(1.0 - s), LogScaled::from_f64(r - 1.0)).unwrap();
        let direct = 1.0 - contraction_factor(s, r).unwrap();
        assert!((d.to_f64() - direct).abs() < 1e-15);
    }

    #[test]
    fn proximity_is_reported() {
        let circle = SampledCurve::circle(c(0.0, 0.0), 1.0, 64).unwrap();
        assert!(matches!(winding_number(&circle, c(1.0, 0.0)), Err(Error::Proximity { .. })));
    }

    #[test]
    fn open_curves_are_rejected() {
        let pts: Vec<_> = (0..10).map(|k| c(k as f64, 0.0)).collect();
        let open = SampledCurve::new(pts, false).unwrap();
        assert!(winding_number(&open, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn crossing_curves_do_not_surround() {
        let a = SampledCurve::circle(c(0.0, 0.0), 1.0, 128).unwrap();
        let b = SampledCurve::circle(c(0.5, 0.0), 1.0, 128).unwrap();
        assert!(!surrounds(&a, &b, 1).unwrap());
    }
}
