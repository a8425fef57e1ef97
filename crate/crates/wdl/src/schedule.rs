//! The inductive choice of scales `α_n`, the radii of `γ_m` and `Γ_m`, and the
//! error budgets `ε_m`, plus verifiers for the properties they must satisfy.
//!
//! Radii are stored as local gaps: `1 - r̂_m` and `R̂_m - 1`, where hats denote
//! division by `ρ_m`.

use crate::blaschke::{BlaschkeProduct, Family, Side};
use crate::error::{Error, Result};
use crate::hypgeo::{surrounds, SampledCurve};
use crate::model::{ell, phase_of, Center, Displacement, Frame, PerturbationKind, PerturbationModel, Phase};
use crate::scale::LogScaled;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub const SCHEMA: &str = "wdl/1";

/// Certified lower bound for `|b|` on `γ` when checking the winding condition.
pub const WINDING_MARGIN: f64 = 0.51;

/// Fraction of the admissible Case-1 distances actually used.
pub const CASE_ONE_FRACTION: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseOneLog {
    pub n: usize,
    pub image_gap_in: LogScaled,
    pub image_gap_out: LogScaled,
    pub dist_c: LogScaled,
    pub alpha: LogScaled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseThreeLog {
    /// Level of the G-disc being entered.
    pub n: usize,
    pub r_half: LogScaled,
    pub r_dist_squared: LogScaled,
    /// The unsquared distance, the alternative reading of the inner bound.
    pub r_dist: LogScaled,
    pub r_gap: LogScaled,
    pub bisection_steps: usize,
    pub min_modulus: f64,
    pub big_r_half: LogScaled,
    pub big_r_dist: LogScaled,
    /// The squared distance, the alternative reading of the outer bound.
    pub big_r_dist_squared: LogScaled,
    pub big_r_pole: Option<LogScaled>,
    pub big_r_gap: LogScaled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    family: Family,
    depth: usize,
    samples: usize,
    alpha: Vec<LogScaled>,
    gap_in: Vec<LogScaled>,
    gap_out: Vec<LogScaled>,
    eps: Vec<LogScaled>,
    products: Vec<BlaschkeProduct>,
    pub case_one: Vec<CaseOneLog>,
    pub case_three: Vec<CaseThreeLog>,
}

fn oob(what: &str, i: u64) -> Error {
    Error::Domain(format!("{what} index {i} beyond schedule depth"))
}

/// Largest gap `g <= g_max` (to relative 1e-10) on which the winding
/// condition is certified: all zeros inside `|z| = 1 - g` and
/// `min |b| >= WINDING_MARGIN` there.
fn winding_gap(b: &BlaschkeProduct, g_max: LogScaled) -> Result<(LogScaled, usize)> {
    let ok = |g: LogScaled| b.zeros_inside(g) == b.degree() && b.min_modulus_bound(g) >= WINDING_MARGIN;
    if ok(g_max) {
        return Ok((g_max, 0));
    }
    let mut hi = g_max;
    let mut lo = g_max;
    let mut steps = 0;
    while !ok(lo) {
        hi = lo;
        lo = lo.ldexp(-8.0);
        steps += 1;
        if steps > 4000 {
            return Err(Error::Infeasible(format!("winding condition unattainable below gap {g_max}")));
        }
    }
    while hi.log2_magnitude() - lo.log2_magnitude() > 1e-10 / std::f64::consts::LN_2 {
        let mid = LogScaled::from_log2(0.5 * (hi.log2_magnitude() + lo.log2_magnitude()));
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok((lo, steps))
}

impl Schedule {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// `ℓ_N`, the last step index with stored radii.
    pub fn steps(&self) -> u64 {
        self.gap_in.len() as u64 - 1
    }

    pub fn alphas(&self) -> &[LogScaled] {
        &self.alpha
    }

    pub fn alpha(&self, n: usize) -> Result<LogScaled> {
        self.alpha.get(n).copied().ok_or_else(|| oob("alpha", n as u64))
    }

    pub fn product(&self, n: usize) -> Result<&BlaschkeProduct> {
        self.products.get(n).ok_or_else(|| oob("product", n as u64))
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.products.iter().map(|b| b.degree()).collect()
    }

    pub fn frame(&self, m: u64) -> Result<Frame> {
        Frame::at(m, &self.alpha)
    }

    /// `ρ_m`.
    pub fn rho(&self, m: u64) -> Result<LogScaled> {
        Ok(self.frame(m)?.scale)
    }

    /// `1 - r̂_m`.
    pub fn gap_in(&self, m: u64) -> Result<LogScaled> {
        self.gap_in.get(m as usize).copied().ok_or_else(|| oob("radius", m))
    }

    /// `R̂_m - 1`.
    pub fn gap_out(&self, m: u64) -> Result<LogScaled> {
        self.gap_out.get(m as usize).copied().ok_or_else(|| oob("radius", m))
    }

    pub fn rhat(&self, m: u64) -> Result<f64> {
        Ok(1.0 - self.gap_in(m)?.to_f64())
    }

    pub fn big_rhat(&self, m: u64) -> Result<f64> {
        Ok(1.0 + self.gap_out(m)?.to_f64())
    }

    /// `δ_m = R_m - r_m` in absolute units.
    pub fn delta(&self, m: u64) -> Result<LogScaled> {
        Ok((self.gap_in(m)? + self.gap_out(m)?) * self.rho(m)?)
    }

    /// `ε_m` in absolute units.
    pub fn eps(&self, m: u64) -> Result<LogScaled> {
        self.eps.get(m as usize).copied().ok_or_else(|| oob("eps", m))
    }

    /// `ε_m / ρ_{m+1}`.
    pub fn eps_rel(&self, m: u64) -> Result<LogScaled> {
        Ok(self.eps(m)? / self.rho(m + 1)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let log2 = |v: &[LogScaled]| v.iter().map(|x| x.log2_magnitude()).collect::<Vec<_>>();
        let wire = ScheduleWire {
            schema: SCHEMA,
            family: self.family.id(),
            depth: self.depth,
            samples: self.samples,
            steps: self.steps(),
            alpha_log2: log2(&self.alpha),
            rhat: self.gap_in.iter().map(|g| 1.0 - g.to_f64()).collect(),
            big_rhat: self.gap_out.iter().map(|g| 1.0 + g.to_f64()).collect(),
            rgap_log2: log2(&self.gap_in),
            big_rgap_log2: log2(&self.gap_out),
            eps_log2: log2(&self.eps),
            eps_rel_log2: (0..self.eps.len() as u64)
                .map(|m| self.eps_rel(m).map(|e| e.log2_magnitude()))
                .collect::<Result<_>>()?,
            degrees: self.degrees(),
            case_one: &self.case_one,
            case_three: &self.case_three,
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }
}

#[derive(Serialize)]
struct ScheduleWire<'a> {
    schema: &'static str,
    family: String,
    depth: usize,
    samples: usize,
    steps: u64,
    alpha_log2: Vec<f64>,
    rhat: Vec<f64>,
    #[serde(rename = "Rhat")]
    big_rhat: Vec<f64>,
    rgap_log2: Vec<f64>,
    #[serde(rename = "Rgap_log2")]
    big_rgap_log2: Vec<f64>,
    eps_log2: Vec<f64>,
    eps_rel_log2: Vec<f64>,
    degrees: Vec<usize>,
    case_one: &'a [CaseOneLog],
    case_three: &'a [CaseThreeLog],
}

/// Entering `G_n` from `Δ_n` whose local gaps are `(g_in, g_out)` at scale `alpha`.
fn case_three(n: usize, b: &BlaschkeProduct, g_in: LogScaled, g_out: LogScaled, alpha: LogScaled) -> Result<CaseThreeLog> {
    // the Δ → G step is a pure rescaling, so dist(φ(γ), ∂G) = g_in in G units
    let r_half = (alpha * g_in).half();
    let r_dist_squared = g_in.square();
    let (r_gap, bisection_steps) = winding_gap(b, r_half.min(r_dist_squared))?;
    let big_r_half = (alpha * g_out).half();
    // strictly inside the pole distance, so b_n stays analytic on the closed V'
    let big_r_pole = b.pole_margin().map(|p| p.scale(CASE_ONE_FRACTION));
    let mut big_r_gap = big_r_half.min(g_out);
    if let Some(p) = big_r_pole {
        big_r_gap = big_r_gap.min(p);
    }
    Ok(CaseThreeLog {
        n,
        r_half,
        r_dist_squared,
        r_dist: g_in,
        r_gap,
        bisection_steps,
        min_modulus: b.min_modulus_bound(r_gap),
        big_r_half,
        big_r_dist: g_out,
        big_r_dist_squared: g_out.square(),
        big_r_pole,
        big_r_gap,
    })
}

/// Builds the schedule to depth `N`, i.e. through step `ℓ_N`.
pub fn build_schedule(family: Family, depth: usize, samples: usize) -> Result<Schedule> {
    if depth < 1 {
        return Err(Error::Domain("schedule depth must be at least 1".into()));
    }
    let products = (0..=depth).map(|n| family.product(n)).collect::<Result<Vec<_>>>()?;
    let last = ell(depth as u64)? as usize;
    let mut gap_in = vec![LogScaled::ZERO; last + 1];
    let mut gap_out = vec![LogScaled::ZERO; last + 1];
    let mut alpha = vec![LogScaled::ONE];
    let mut case_one = Vec::new();
    let mut case_three_logs = Vec::new();

    let twelfth = LogScaled::from_f64(1.0 / 12.0);
    gap_in[0] = twelfth;
    gap_out[0] = twelfth;
    let c3 = case_three(0, &products[0], gap_in[0], gap_out[0], LogScaled::ONE)?;
    gap_in[1] = c3.r_gap;
    gap_out[1] = c3.big_r_gap;
    case_three_logs.push(c3);

    for n in 0..depth {
        let ln = ell(n as u64)? as usize;
        let b = &products[n];
        let image_gap_in = b.image_gap(gap_in[ln], Side::Inner, samples);
        let image_gap_out = b.image_gap(gap_out[ln], Side::Outer, samples);
        let f = LogScaled::from_f64(CASE_ONE_FRACTION);
        let dist_c = f * (gap_in[ln] / LogScaled::from_f64(6.0)).min(image_gap_in.half());
        let a = f * (gap_out[ln] / LogScaled::from_f64(6.0)).min(dist_c).min(image_gap_out.half());
        alpha.push(a);
        case_one.push(CaseOneLog { n, image_gap_in, image_gap_out, dist_c, alpha: a });
        // absolute offsets α^2 are α in the local units of scale α
        gap_in[ln + 1] = a;
        gap_out[ln + 1] = a;
        for k in 1..=n + 1 {
            gap_in[ln + k + 1] = gap_in[ln + k].half();
            gap_out[ln + k + 1] = gap_out[ln + k].half();
        }
        let lg = ln + n + 3;
        let c3 = case_three(n + 1, &products[n + 1], gap_in[lg - 1], gap_out[lg - 1], a)?;
        gap_in[lg] = c3.r_gap;
        gap_out[lg] = c3.big_r_gap;
        case_three_logs.push(c3);
    }

    let mut sched = Schedule {
        family,
        depth,
        samples,
        alpha,
        gap_in,
        gap_out,
        eps: Vec::new(),
        products,
        case_one,
        case_three: case_three_logs,
    };
    let mut eps = Vec::with_capacity(last);
    // ε_0 from its defining minimum; φ is a translation on Δ_0
    let e0 = sched.gap_in(0)?.min(sched.gap_out(0)?).min(sched.gap_in(1)? + sched.gap_out(1)?);
    eps.push(e0.ldexp(-2.0));
    for m in 1..last as u64 {
        let n = match phase_of(m) {
            Phase::Delta { n } => n - 1,
            p => p.level(),
        };
        let k = m - ell(n)?;
        // δ_{ℓ_n+1} / 2^{k+2}, which is α_{n+1}^2 / 2^{k+1}
        eps.push(sched.delta(ell(n)? + 1)?.ldexp(-(k as f64) - 2.0));
    }
    sched.eps = eps;
    Ok(sched)
}

/// The three candidates defining `ε_m`, in the local units of `V_{m+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsBreakdown {
    pub m: u64,
    pub inner: LogScaled,
    pub outer: LogScaled,
    pub delta: LogScaled,
    /// `¼ min{...}` in absolute units.
    pub value: LogScaled,
    pub attained_by_delta: bool,
}

pub fn eps_definition(sched: &Schedule, m: u64, samples: usize) -> Result<EpsBreakdown> {
    if m >= sched.steps() {
        return Err(oob("eps", m));
    }
    let (inner, outer) = match phase_of(m) {
        Phase::G { n } => {
            let b = sched.product(n as usize)?;
            (b.image_gap(sched.gap_in(m)?, Side::Inner, samples), b.image_gap(sched.gap_out(m)?, Side::Outer, samples))
        }
        _ => (sched.gap_in(m)?, sched.gap_out(m)?),
    };
    let delta = sched.gap_in(m + 1)? + sched.gap_out(m + 1)?;
    let least = inner.min(outer).min(delta);
    Ok(EpsBreakdown {
        m,
        inner,
        outer,
        delta,
        value: least.ldexp(-2.0) * sched.rho(m + 1)?,
        attained_by_delta: delta <= inner.min(outer),
    })
}

/// One sample of a curve near the unit circle in some frame: argument
/// `theta`, signed radial offset `1 - |p|` (positive inside) and an optional
/// displacement.
#[derive(Clone, Copy, Debug)]
struct RadialSample {
    theta: f64,
    offset: LogScaled,
    disp: Displacement,
}

/// Maps samples through `1 - |p| = g_ref · dev ↦ radius 3 - (2/π) atan(dev)`.
/// The map is a homeomorphism of the punctured plane onto an annulus, so
/// winding and disjointness are preserved while offsets of size `g_ref`
/// become order-one.
fn magnify(samples: &[RadialSample], g_ref: LogScaled) -> Result<(SampledCurve, Vec<f64>)> {
    let mut pts = Vec::with_capacity(samples.len());
    let mut devs = Vec::with_capacity(samples.len());
    for s in samples {
        // u = 1 - p/e^{iθ} = big · v with |v| of order one
        let big = s.offset.abs().max(s.disp.scale);
        let mut v = Complex64::new(if big.is_zero() { 0.0 } else { (s.offset / big).to_f64() }, 0.0);
        if !s.disp.scale.is_zero() {
            v -= s.disp.dir * Complex64::from_polar(1.0, -s.theta) * (s.disp.scale / big).to_f64();
        }
        let bf = big.to_f64();
        let one_minus = 1.0 - v * bf;
        let shape = (2.0 * v.re - bf * v.norm_sqr()) / (1.0 + one_minus.norm());
        let dev = if big.is_zero() || shape == 0.0 { 0.0 } else { (big / g_ref).to_f64() * shape };
        let angle = s.theta + one_minus.arg();
        devs.push(dev);
        pts.push(Complex64::from_polar(3.0 - (2.0 / PI) * dev.atan(), angle));
    }
    // drop exact repeats, which only arise from coincident sample angles
    let mut dedup: Vec<Complex64> = Vec::with_capacity(pts.len());
    for p in pts {
        if dedup.last() != Some(&p) {
            dedup.push(p);
        }
    }
    while dedup.len() > 1 && dedup.first() == dedup.last() {
        dedup.pop();
    }
    Ok((SampledCurve::closed(dedup)?, devs))
}

fn circle_samples(n: usize, offset: LogScaled) -> Vec<RadialSample> {
    (0..n)
        .map(|k| RadialSample { theta: 2.0 * PI * k as f64 / n as f64, offset, disp: Displacement::NONE })
        .collect()
}

/// Samples of `f(γ_m)` (`side = Inner`) or `f(Γ_m)` (`Outer`) in the local
/// units of `V_{m+1}`.
fn image_samples(sched: &Schedule, m: u64, side: Side, model: &PerturbationModel, n: usize) -> Result<Vec<RadialSample>> {
    let frame = sched.frame(m)?;
    let g = if side == Side::Inner { sched.gap_in(m)? } else { sched.gap_out(m)? };
    let gf = g.to_f64();
    let signed = if side == Side::Inner { gf } else { -gf };
    let sign = |x: LogScaled| if side == Side::Inner { x } else { -x };
    let at = |t: f64, offset: LogScaled, theta: f64| -> Result<RadialSample> {
        let w = Complex64::from_polar(1.0 - signed, t);
        let disp = model.displacement(sched, &frame, w)?;
        Ok(RadialSample { theta, offset, disp })
    };
    match frame.phase {
        Phase::G { n: level } => {
            let b = sched.product(level as usize)?;
            b.adapted_angles(n)
                .into_iter()
                .map(|t| at(t, sign(b.radial_defect(t, g, side)), b.on_circle(t, signed).arg()))
                .collect()
        }
        _ => (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                at(t, sign(g), t)
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurroundFailure {
    pub m: u64,
    pub draw: u64,
    /// `"inner"`: `γ_{m+1}` surrounds the image of `γ_m`; `"outer"`: the image
    /// of `Γ_m` surrounds `Γ_{m+1}`.
    pub curve: &'static str,
    pub margin: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurroundReport {
    pub family: String,
    pub through_m: u64,
    pub draws: u64,
    pub samples: usize,
    pub envelope_fraction: f64,
    pub checks: usize,
    /// Least radial margin over all checks, in units of the target gap.
    pub min_margin: f64,
    pub failures: Vec<SurroundFailure>,
    pub passed: bool,
}

fn check_step(sched: &Schedule, m: u64, model: &PerturbationModel, samples: usize, curve: &'static str) -> (bool, f64, Option<String>) {
    let mut n = samples;
    let mut last_err = None;
    for _ in 0..4 {
        let res = (|| -> Result<(bool, f64)> {
            let degree = match phase_of(m) {
                Phase::G { n } => sched.product(n as usize)?.degree() as i64,
                _ => 1,
            };
            if curve == "inner" {
                let g_ref = sched.gap_in(m + 1)?;
                let (target, _) = magnify(&circle_samples(n, g_ref), g_ref)?;
                let (image, devs) = magnify(&image_samples(sched, m, Side::Inner, model, n)?, g_ref)?;
                let margin = devs.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
                Ok((surrounds(&target, &image, 1)?, margin))
            } else {
                let g_ref = sched.gap_out(m + 1)?;
                let (target, _) = magnify(&circle_samples(n, -g_ref), g_ref)?;
                let (image, devs) = magnify(&image_samples(sched, m, Side::Outer, model, n)?, g_ref)?;
                let margin = -1.0 - devs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((surrounds(&image, &target, degree)?, margin))
            }
        })();
        match res {
            Ok((ok, margin)) => return (ok, margin, None),
            Err(e @ Error::Ambiguity { .. }) | Err(e @ Error::Proximity { .. }) => {
                last_err = Some(e.to_string());
                n *= 2;
            }
            Err(e) => return (false, f64::NAN, Some(e.to_string())),
        }
    }
    (false, f64::NAN, last_err)
}

/// Checks that `γ_{m+1}` surrounds `f(γ_m)` and `f(Γ_m)` surrounds `Γ_{m+1}`
/// for every `m <= through_m`, where `f` is the model map plus each draw's
/// displacement.
pub fn verify_surrounds(
    sched: &Schedule,
    model: &PerturbationModel,
    draws: u64,
    samples: usize,
    through_m: Option<u64>,
) -> Result<SurroundReport> {
    let through = through_m.unwrap_or(sched.steps() - 1);
    if through >= sched.steps() {
        return Err(Error::Domain(format!("surround check through m = {through} needs depth beyond ℓ_N")));
    }
    let draws = match model.kind {
        PerturbationKind::SeededRandom { .. } => draws.max(1),
        _ => 1,
    };
    let jobs: Vec<(u64, u64, &'static str)> = (0..draws)
        .flat_map(|d| (0..=through).flat_map(move |m| [(d, m, "inner"), (d, m, "outer")]))
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(d, m, curve)| {
            let (ok, margin, error) = check_step(sched, m, &model.draw(d), samples, curve);
            (d, m, curve, ok, margin, error)
        })
        .collect();
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for (draw, m, curve, ok, margin, error) in results {
        if margin.is_finite() {
            min_margin = min_margin.min(margin);
        }
        if !ok {
            failures.push(SurroundFailure { m, draw, curve, margin, error });
        }
    }
    failures.sort_by_key(|f| (f.m, f.draw));
    Ok(SurroundReport {
        family: sched.family().id(),
        through_m: through,
        draws,
        samples,
        envelope_fraction: model.envelope_fraction,
        checks: jobs.len(),
        min_margin,
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisjointnessItem {
    /// Position index: both discs lie in `D_k`.
    pub k: usize,
    /// Level of the earlier disc; the later one is at level `n + 1`.
    pub n: usize,
    /// `(4α_{n+1} - 2α_{n+1}) - (4α_{n+2} + 2α_{n+2})`.
    pub literal_margin: LogScaled,
    /// `α_{n+1} - 6α_{n+2}`.
    pub hypothesis_margin: LogScaled,
    /// Gap between the two `V'` discs using the stored outer radii.
    pub radius_margin: Option<LogScaled>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisjointnessReport {
    pub items: Vec<DisjointnessItem>,
    pub disjoint: bool,
}

fn disjointness_items(alpha: &[LogScaled]) -> Vec<DisjointnessItem> {
    let mut items = Vec::new();
    let six = LogScaled::from_f64(6.0);
    for n in 0..alpha.len().saturating_sub(2) {
        let (a1, a2) = (alpha[n + 1], alpha[n + 2]);
        for k in 0..=n + 1 {
            items.push(DisjointnessItem {
                k,
                n,
                literal_margin: a1.scale(2.0) - six * a2,
                hypothesis_margin: a1 - six * a2,
                radius_margin: None,
            });
        }
    }
    items
}

/// Pairwise disjointness of the `V'` discs that share a `D_k`, from a bare
/// list of scales.
pub fn verify_disjointness_alphas(alpha: &[LogScaled]) -> DisjointnessReport {
    let items = disjointness_items(alpha);
    let disjoint = items.iter().all(|i| i.literal_margin.is_positive() && i.hypothesis_margin.is_positive());
    DisjointnessReport { items, disjoint }
}

pub fn verify_disjointness(sched: &Schedule) -> Result<DisjointnessReport> {
    let mut items = disjointness_items(sched.alphas());
    for it in &mut items {
        let m1 = ell(it.n as u64)? + it.k as u64 + 1;
        let m2 = ell(it.n as u64 + 1)? + it.k as u64 + 1;
        let (a1, a2) = (sched.alpha(it.n + 1)?, sched.alpha(it.n + 2)?);
        let r1 = LogScaled::from_f64(3.0) - sched.gap_out(m1)?;
        let r2 = LogScaled::from_f64(5.0) + sched.gap_out(m2)?;
        it.radius_margin = Some(r1 * a1 - r2 * a2);
    }
    let disjoint = items.iter().all(|i| {
        i.literal_margin.is_positive()
            && i.hypothesis_margin.is_positive()
            && i.radius_margin.is_none_or(|r| r.is_positive())
    });
    Ok(DisjointnessReport { items, disjoint })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawReport {
    pub eps_closed_form_max_rel_err: f64,
    pub eps0: f64,
    pub halving_exact: bool,
    pub offsets_exact: bool,
    pub ratio_ok: bool,
    pub square_ratio_ok: bool,
    pub radii_ordered: bool,
    pub initial_radii_ok: bool,
    pub containments_ok: bool,
    pub pole_caps_ok: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Closed forms, halving laws, scale ratios and containments.
pub fn verify_laws(sched: &Schedule) -> Result<LawReport> {
    let mut failures = Vec::new();
    let mut max_rel: f64 = 0.0;
    let depth = sched.depth() as u64;
    for n in 0..depth {
        let a2 = sched.alpha(n as usize + 1)?.square();
        for k in 0..=n + 2 {
            let m = ell(n)? + k;
            if m >= sched.steps() {
                continue;
            }
            let expect = a2.ldexp(-(k as f64) - 1.0);
            max_rel = max_rel.max(sched.eps(m)?.rel_diff(expect));
        }
    }
    if max_rel > 1e-9 {
        failures.push(format!("eps closed form off by {max_rel:.3e}"));
    }
    let eps0 = sched.eps(0)?.to_f64();
    if !(eps0 <= 1.0 / 24.0) {
        failures.push(format!("eps_0 = {eps0} exceeds 1/24"));
    }

    let mut halving_exact = true;
    let mut offsets_exact = true;
    let mut containments_ok = true;
    let mut pole_caps_ok = true;
    for n in 0..depth {
        let ln = ell(n)?;
        let a = sched.alpha(n as usize + 1)?;
        // local offsets α at scale α are α^2 absolute
        if sched.gap_in(ln + 1)? != a || sched.gap_out(ln + 1)? != a {
            offsets_exact = false;
            failures.push(format!("offsets at m = {} differ from α_{}^2", ln + 1, n + 1));
        }
        for k in 1..=n + 1 {
            let m = ln + k + 1;
            if sched.gap_in(m)? != sched.gap_in(m - 1)?.half() || sched.gap_out(m)? != sched.gap_out(m - 1)?.half() {
                halving_exact = false;
                failures.push(format!("gaps at m = {m} are not halved"));
            }
        }
        for k in 0..=n {
            let m = ln + k + 1;
            // V' ⊂ D(9k, 6α_{n+1}) ⊂ D_k
            let inside = sched.big_rhat(m)? <= 2.0 && a.scale(6.0) <= sched.alpha(k as usize)?;
            if !inside {
                containments_ok = false;
                failures.push(format!("V'_{m} not inside D(9k, 6α) ⊂ D_k"));
            }
        }
        if sched.big_rhat(ell(n + 1)? - 1)? > 2.0 {
            containments_ok = false;
            failures.push(format!("V' at Δ_{} exceeds Δ'", n + 1));
        }
    }
    for n in 0..=depth {
        let m = ell(n)?;
        let b = sched.product(n as usize)?;
        if sched.big_rhat(m)? > 1.25 {
            containments_ok = false;
            failures.push(format!("V' at G_{n} exceeds G'"));
        }
        if let Some(p) = b.pole_margin() {
            if sched.gap_out(m)? >= p {
                pole_caps_ok = false;
                failures.push(format!("outer radius at G_{n} reaches a pole"));
            }
        }
    }

    let mut ratio_ok = true;
    let mut square_ratio_ok = true;
    for n in 0..depth as usize {
        let (a0, a1) = (sched.alpha(n)?, sched.alpha(n + 1)?);
        if a1.scale(6.0) > a0 {
            ratio_ok = false;
            failures.push(format!("α_{}/α_{n} > 1/6", n + 1));
        }
        if n >= 1 && a1.scale(6.0) > a0.square() {
            square_ratio_ok = false;
            failures.push(format!("α_{} > α_{n}^2/6", n + 1));
        }
    }
    let mut radii_ordered = true;
    for m in 0..=sched.steps() {
        let (gi, go) = (sched.gap_in(m)?, sched.gap_out(m)?);
        if !(gi.is_positive() && go.is_positive() && gi < LogScaled::ONE) {
            radii_ordered = false;
            failures.push(format!("radii at m = {m} are not ordered"));
        }
    }
    let (r0, big_r0) = (sched.rhat(0)?, sched.big_rhat(0)?);
    let initial_radii_ok = r0 > 5.0 / 6.0 && r0 < 1.0 && big_r0 > 1.0 && big_r0 < 7.0 / 6.0;
    if !initial_radii_ok {
        failures.push("initial radii outside (5/6, 1) and (1, 7/6)".into());
    }
    Ok(LawReport {
        eps_closed_form_max_rel_err: max_rel,
        eps0,
        halving_exact,
        offsets_exact,
        ratio_ok,
        square_ratio_ok,
        radii_ordered,
        initial_radii_ok,
        containments_ok,
        pole_caps_ok,
        passed: failures.is_empty(),
        failures,
    })
}

/// The arc `L_n` just outside `Γ_{ℓ_n}`: radius `R_{ℓ_n} + δ^2/2` about `κ_n`,
/// omitting the sector `|arg| > π - δ^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReefArc {
    pub n: usize,
    pub center: Center,
    /// `radius - 1` in the units of `G_n`.
    pub radius_gap: LogScaled,
    pub angular_gap: LogScaled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReefReport {
    pub arcs: Vec<ReefArc>,
    /// `max dist(z, L_n) / dist(γ_{ℓ_n}, Γ_{ℓ_n})` over sampled `z ∈ Γ_{ℓ_n}`.
    pub ratios: Vec<LogScaled>,
    pub positive: bool,
    pub decreasing: bool,
}

pub fn build_reefs(sched: &Schedule, samples: usize) -> Result<ReefReport> {
    let mut arcs = Vec::new();
    let mut ratios = Vec::new();
    for n in 0..=sched.depth() {
        let m = ell(n as u64)?;
        let delta = sched.delta(m)?;
        let d2 = delta.square();
        let h = d2.half();
        let big_r = sched.big_rhat(m)?;
        let center = sched.frame(m)?.center;
        arcs.push(ReefArc { n, center, radius_gap: sched.gap_out(m)? + h, angular_gap: d2 });
        // z = R e^{iψ}: inside the arc's sector the distance is h; past the end
        // at angle π - δ^2 + x δ^2 it is the chord to the endpoint
        let hf = h.to_f64();
        let mut worst = LogScaled::ONE.half();
        for j in 0..=samples {
            let x = j as f64 / samples as f64;
            let half_angle = 0.5 * x * d2.to_f64();
            let sinc = if half_angle == 0.0 { 1.0 } else { half_angle.sin() / half_angle };
            let v = (0.25 + big_r * (big_r + hf) * (x * sinc).powi(2)).sqrt();
            worst = worst.max(LogScaled::from_f64(v));
        }
        ratios.push(d2 * worst / delta);
    }
    let positive = ratios.iter().all(|r| r.is_positive());
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    Ok(ReefReport { arcs, ratios, positive, decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_gaps_follow_the_midpoint_choice() {
        let s = build_schedule(Family::Square, 1, 256).unwrap();
        assert_eq!(s.rhat(0).unwrap(), 11.0 / 12.0);
        assert_eq!(s.big_rhat(0).unwrap(), 13.0 / 12.0);
        // min((1/12)/2, (1/12)^2) = 1/144 already certifies the winding
        assert_eq!(s.gap_in(1).unwrap().to_f64(), 1.0 / 144.0);
    }

    #[test]
    fn eps_breakdown_at_g_phase_matches_budget() {
        let s = build_schedule(Family::Par13, 3, 512).unwrap();
        for n in 0..3u64 {
            let m = ell(n).unwrap();
            let e = eps_definition(&s, m, 512).unwrap();
            let expect = s.alpha(n as usize + 1).unwrap().square().half();
            assert!(e.value.rel_diff(expect) < 1e-9, "n = {n}");
            assert!(e.attained_by_delta);
        }
    }

    #[test]
    fn magnify_keeps_reference_circle_at_unit_deviation() {
        let g = LogScaled::from_log2(-3000.0);
        let (_, devs) = magnify(&circle_samples(16, g), g).unwrap();
        assert!(devs.iter().all(|d| (d - 1.0).abs() < 1e-15));
    }
}
