//! Finite-orbit classification of orbit pairs, asymptotic fits, the `k_n`,
//! `K_n` bracket and the six worked examples.

use crate::blaschke::{semi_from_gap, Family};
use crate::error::{Error, Result};
use crate::hypgeo::{contraction_defect, hyp_dist_points, DiscPoint};
use crate::model::{ell, orbit, start_point, Frame, LocalPoint, OrbitTrace, PerturbationModel};
use crate::scale::LogScaled;
use crate::schedule::{build_schedule, Schedule, SCHEMA};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;

/// Distances below this are treated as this value before taking logarithms.
const LOG_FLOOR: f64 = 1e-300;

pub const DEFAULT_WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperbolicClass {
    Contracting,
    SemiContracting,
    EventuallyIsometric,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    Bungee,
    Converging,
    Inconclusive,
}

impl fmt::Display for HyperbolicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HyperbolicClass::Contracting => "contracting",
            HyperbolicClass::SemiContracting => "semi_contracting",
            HyperbolicClass::EventuallyIsometric => "eventually_isometric",
            HyperbolicClass::Inconclusive => "inconclusive",
        })
    }
}

impl fmt::Display for BoundaryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryClass::Bungee => "bungee",
            BoundaryClass::Converging => "converging",
            BoundaryClass::Inconclusive => "inconclusive",
        })
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

fn check_positive(series: &[(f64, f64)]) -> Result<()> {
    for (i, &(x, y)) in series.iter().enumerate() {
        if !(y > 0.0) {
            return Err(Error::NonPositive { index: i, value: y });
        }
        if !(x > 0.0) {
            return Err(Error::NonPositive { index: i, value: x });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub constant: f64,
    /// Root-mean-square residual in `ln value`.
    pub residual: f64,
}

/// Least squares for `value ≈ constant · n^exponent` on log-log axes.
pub fn fit_power_law(series: &[(f64, f64)]) -> Result<PowerLawFit> {
    if series.len() < 20 {
        return Err(Error::InsufficientData { needed: 20, have: series.len() });
    }
    check_positive(series)?;
    let xs: Vec<f64> = series.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1.ln()).collect();
    let (exponent, intercept, residual) = least_squares(&xs, &ys);
    Ok(PowerLawFit { exponent, constant: intercept.exp(), residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeometricFit {
    /// Mean of consecutive ratios.
    pub ratio: f64,
    /// `max - min` of the consecutive ratios.
    pub spread: f64,
    /// The last consecutive ratio.
    pub last_ratio: f64,
}

pub fn fit_geometric(series: &[f64]) -> Result<GeometricFit> {
    if series.len() < 20 {
        return Err(Error::InsufficientData { needed: 20, have: series.len() });
    }
    for (i, &v) in series.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositive { index: i, value: v });
        }
    }
    let ratios: Vec<f64> = series.windows(2).map(|w| w[1] / w[0]).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(GeometricFit {
        ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
        spread: hi - lo,
        last_ratio: *ratios.last().expect("at least 19 ratios"),
    })
}

fn second_half(v: &[f64]) -> &[f64] {
    &v[v.len() / 2..]
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicEvidence {
    /// Slope of `ln dist` against `n` over the whole series.
    pub log_slope: f64,
    pub first: f64,
    pub last: f64,
    /// `last / first`.
    pub decay: f64,
    /// Minimum over the second half.
    pub liminf: f64,
    /// `max - min` over the last `window` values.
    pub tail_spread: f64,
    pub max_degree: usize,
}

/// Decides from the G-phase hyperbolic distances `dist_{G_n}` of an orbit
/// pair and the degrees `d_n`.
pub fn classify_hyperbolic_series(
    distances: &[f64],
    degrees: &[usize],
    window: usize,
) -> Result<(HyperbolicClass, HyperbolicEvidence)> {
    let window = window.max(2);
    if distances.len() < window {
        return Err(Error::InsufficientData { needed: window, have: distances.len() });
    }
    let xs: Vec<f64> = (0..distances.len()).map(|n| n as f64).collect();
    let ys: Vec<f64> = distances.iter().map(|d| d.max(LOG_FLOOR).ln()).collect();
    let (log_slope, _, _) = least_squares(&xs, &ys);
    let first = distances[0];
    let last = *distances.last().expect("nonempty");
    let tail = &distances[distances.len() - window..];
    let tail_spread = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max) - min_of(tail);
    let max_degree = degrees.iter().copied().max().unwrap_or(1);
    let ev = HyperbolicEvidence {
        log_slope,
        first,
        last,
        decay: if first > 0.0 { last / first } else { f64::NAN },
        liminf: min_of(second_half(distances)),
        tail_spread,
        max_degree,
    };
    let class = if log_slope < -0.01 && last < 0.1 * first {
        HyperbolicClass::Contracting
    } else if max_degree == 1 && tail_spread <= 1e-9 {
        HyperbolicClass::EventuallyIsometric
    } else if max_degree > 1 && ev.liminf > 0.05 {
        HyperbolicClass::SemiContracting
    } else {
        HyperbolicClass::Inconclusive
    };
    Ok((class, ev))
}

/// `dist_{G_n}` between the two traces at every shared G-phase.
pub fn gphase_distances(a: &OrbitTrace, b: &OrbitTrace) -> Result<Vec<f64>> {
    let (pa, pb) = (a.gphase_points(), b.gphase_points());
    pa.iter().zip(&pb).map(|((_, x), (_, y))| hyp_dist_points(x, y)).collect()
}

pub fn classify_hyperbolic(
    a: &OrbitTrace,
    b: &OrbitTrace,
    sched: &Schedule,
    window: usize,
) -> Result<(HyperbolicClass, HyperbolicEvidence)> {
    let d = gphase_distances(a, b)?;
    classify_hyperbolic_series(&d, &sched.degrees()[..d.len().min(sched.degrees().len())], window)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryEvidence {
    /// Slope of `ln gap` against `ln n` over the second half.
    pub loglog_slope: f64,
    pub first: f64,
    pub last: f64,
    pub liminf: f64,
}

/// Decides from the G-phase gaps `dist(f^{ℓ_n}(z), ∂G_n)`.
pub fn classify_boundary_series(gaps: &[f64], window: usize) -> Result<(BoundaryClass, BoundaryEvidence)> {
    let window = window.max(4);
    if gaps.len() < window {
        return Err(Error::InsufficientData { needed: window, have: gaps.len() });
    }
    let start = (gaps.len() / 2).max(1);
    let xs: Vec<f64> = (start..gaps.len()).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = gaps[start..].iter().map(|g| g.max(LOG_FLOOR).ln()).collect();
    let (loglog_slope, _, _) = least_squares(&xs, &ys);
    let ev = BoundaryEvidence {
        loglog_slope,
        first: gaps[0],
        last: *gaps.last().expect("nonempty"),
        liminf: min_of(second_half(gaps)),
    };
    let class = if loglog_slope < -0.25 && ev.last < ev.first {
        BoundaryClass::Converging
    } else if loglog_slope > -0.05 && ev.liminf > 0.05 {
        BoundaryClass::Bungee
    } else {
        BoundaryClass::Inconclusive
    };
    Ok((class, ev))
}

pub fn boundary_gaps(trace: &OrbitTrace) -> Vec<f64> {
    trace.gphase_records().iter().map(|r| r.edge_gap).collect()
}

pub fn classify_boundary(trace: &OrbitTrace, window: usize) -> Result<(BoundaryClass, BoundaryEvidence)> {
    classify_boundary_series(&boundary_gaps(trace), window)
}

/// `(n, value)` samples.
pub type Series = Vec<(f64, f64)>;

/// Samples `(n, 1 - b^n(0))` and `(n, b^{n+1}(0) - b^n(0))` at roughly
/// `points` log-spaced `n` in `[lo, hi]`.
pub fn orbit_of_zero_series(family: Family, lo: usize, hi: usize, points: usize) -> Result<(Series, Series)> {
    let b = family.product(0)?;
    let mut wanted: Vec<usize> = (0..points)
        .map(|i| {
            let t = i as f64 / (points.max(2) - 1) as f64;
            ((lo as f64).ln() + t * ((hi as f64).ln() - (lo as f64).ln())).exp().round() as usize
        })
        .collect();
    wanted.dedup();
    let mut gaps = Vec::new();
    let mut steps = Vec::new();
    let mut p = DiscPoint::new(Complex64::new(0.0, 0.0));
    let mut next = wanted.iter().peekable();
    for n in 0..=hi {
        let q = b.evaluate_point(&p)?;
        if next.peek() == Some(&&n) {
            next.next();
            gaps.push((n as f64, p.one_minus().re));
            steps.push((n as f64, p.one_minus().re - q.one_minus().re));
        }
        p = q;
    }
    Ok((gaps, steps))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParabolicRates {
    pub gap: PowerLawFit,
    pub step: PowerLawFit,
}

/// Power-law fits of `1 - b^n(0)` and of its consecutive differences.
pub fn parabolic_rates(family: Family, lo: usize, hi: usize) -> Result<ParabolicRates> {
    let (gaps, steps) = orbit_of_zero_series(family, lo, hi, 200)?;
    Ok(ParabolicRates { gap: fit_power_law(&gaps)?, step: fit_power_law(&steps)? })
}

/// Geometric fit of `1 - b^n(0)` for `n` in `[n - 20, n]`.
pub fn attracting_rate(family: Family, n: usize) -> Result<GeometricFit> {
    let lo = n.saturating_sub(20);
    let (gaps, _) = orbit_of_zero_series(family, lo.max(1), n, n - lo.max(1) + 1)?;
    let series: Vec<f64> = gaps.iter().map(|p| p.1).collect();
    fit_geometric(&series)
}

/// `k_n < 1 < K_n` with `1 - k_n` and `K_n - 1` kept in log-scaled form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KnBracket {
    pub n: usize,
    /// `1 - s`.
    pub s_gap: LogScaled,
    pub k_defect: LogScaled,
    pub big_k_excess: LogScaled,
    pub k: f64,
    pub big_k: f64,
}

/// With `s = 1 - ¾ dist(φ(γ_{ℓ_n-1}), ∂G_n)`: `k_n = c(s, R̂_{ℓ_n})` and
/// `K_n = 1/c(s/r̂_{ℓ_n}, 1/r̂_{ℓ_n})`.
pub fn kn_kn_bracket(sched: &Schedule, n: usize) -> Result<KnBracket> {
    let m = ell(n as u64)?;
    // the Δ → G step is a rescaling, so the entry gap is the Δ-frame gap
    let entry = sched.gap_in(m - 1)?;
    let s_gap = entry.scale(0.75);
    let r_gap = sched.gap_in(m)?;
    if !(r_gap < s_gap) {
        return Err(Error::Domain(format!("s >= r at n = {n}: schedule inconsistent")));
    }
    let k_defect = contraction_defect(s_gap, sched.gap_out(m)?)?;
    let r = LogScaled::ONE - r_gap;
    // 1 - s/r = (s_gap - r_gap)/r and 1/r - 1 = r_gap/r
    let inner = contraction_defect((s_gap - r_gap) / r, r_gap / r)?;
    let big_k_excess = inner / (LogScaled::ONE - inner);
    Ok(KnBracket {
        n,
        s_gap,
        k_defect,
        big_k_excess,
        k: 1.0 - k_defect.to_f64(),
        big_k: 1.0 + big_k_excess.to_f64(),
    })
}

/// How an example's start point is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Start {
    /// An absolute real point in `Δ_0`.
    Absolute { z: f64 },
    /// The point `x` near 4 with `f(x) = κ_0 + target`.
    Preimage { target: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleSpec {
    pub id: &'static str,
    pub title: &'static str,
    pub family: Family,
    pub starts: [Start; 2],
    pub expected: (HyperbolicClass, BoundaryClass),
    pub markers: &'static [&'static str],
}

pub fn examples() -> [ExampleSpec; 6] {
    use BoundaryClass::*;
    use HyperbolicClass::*;
    [
        ExampleSpec {
            id: "1a",
            title: "contracting, bungee: b(z) = z^2",
            family: Family::Square,
            starts: [Start::Absolute { z: 4.0 }, Start::Absolute { z: 4.0 + 1.0 / 24.0 }],
            expected: (Contracting, Bungee),
            markers: &["phi_doubly_exponential", "f_within_quarter"],
        },
        ExampleSpec {
            id: "1b",
            title: "contracting, converging: parabolic b, a = 1/3",
            family: Family::Par13,
            starts: [Start::Preimage { target: 0.0 }, Start::Preimage { target: 1.0 / 9.0 }],
            expected: (Contracting, Converging),
            markers: &["gap_bound"],
        },
        ExampleSpec {
            id: "2a",
            title: "semi-contracting, bungee: semi family",
            family: Family::SemiSequence,
            starts: [Start::Absolute { z: 4.0 }, Start::Absolute { z: 19.0 / 4.0 }],
            expected: (SemiContracting, Bungee),
            markers: &["separation", "f4_within_quarter", "phi_lower_bound", "lambda_products"],
        },
        ExampleSpec {
            id: "2b",
            title: "semi-contracting, converging: attracting b, a = 1/2",
            family: Family::Att12,
            starts: [Start::Preimage { target: 0.0 }, Start::Preimage { target: 0.25 }],
            expected: (SemiContracting, Converging),
            markers: &["hyperbolic_gap"],
        },
        ExampleSpec {
            id: "3a",
            title: "eventually isometric, bungee: b(z) = z",
            family: Family::Identity,
            starts: [Start::Absolute { z: 4.0 }, Start::Absolute { z: 4.25 }],
            expected: (EventuallyIsometric, Bungee),
            markers: &["deviation_half"],
        },
        ExampleSpec {
            id: "3b",
            title: "eventually isometric, converging: Möbius b",
            family: Family::Att56,
            starts: [Start::Preimage { target: 0.0 }, Start::Preimage { target: 0.25 }],
            expected: (EventuallyIsometric, Converging),
            markers: &["deviation_geometric", "phi_above_five_sixths"],
        },
    ]
}

pub fn example(id: &str) -> Result<ExampleSpec> {
    examples().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownId(id.into()))
}

/// Solves `w + e_0(w) = target` for the first step's displacement `e_0` by
/// fixed-point iteration; `e_0` is a contraction with tiny Lipschitz constant.
fn preimage_start(sched: &Schedule, model: &PerturbationModel, target: f64) -> Result<LocalPoint> {
    let frame = Frame::at(0, sched.alphas())?;
    let t = Complex64::new(target, 0.0);
    let mut w = t;
    for _ in 0..200 {
        let next = t - model.displacement(sched, &frame, w)?.value();
        let done = (next - w).norm() <= 1e-17;
        w = next;
        if done {
            return Ok(LocalPoint::new(frame, w));
        }
    }
    Err(Error::Infeasible(format!("no preimage of κ_0 + {target} found")))
}

fn start(sched: &Schedule, model: &PerturbationModel, s: Start) -> Result<LocalPoint> {
    match s {
        Start::Absolute { z } => start_point(sched, Complex64::new(z, 0.0)),
        Start::Preimage { target } => preimage_start(sched, model, target),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Marker {
    pub name: String,
    pub passed: bool,
    /// Least slack of the marker's inequality over the run.
    pub margin: f64,
    pub detail: String,
}

impl Marker {
    fn new(name: &str, margin: f64, detail: impl Into<String>) -> Marker {
        Marker { name: name.into(), passed: margin >= 0.0, margin, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub schema: &'static str,
    pub id: String,
    pub family: String,
    pub depth: usize,
    pub model: PerturbationModel,
    pub expected: (HyperbolicClass, BoundaryClass),
    pub hyperbolic_class: HyperbolicClass,
    pub boundary_class: BoundaryClass,
    pub hyperbolic_evidence: HyperbolicEvidence,
    pub boundary_evidence: BoundaryEvidence,
    pub gphase_distances: Vec<f64>,
    pub boundary_gaps: Vec<f64>,
    pub kn_kn: Vec<KnBracket>,
    pub markers: Vec<Marker>,
    pub classes_match: bool,
    pub passed: bool,
}

impl ClassificationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn inconclusive(&self) -> bool {
        self.hyperbolic_class == HyperbolicClass::Inconclusive || self.boundary_class == BoundaryClass::Inconclusive
    }
}

fn gpoints(t: &OrbitTrace) -> Vec<DiscPoint> {
    t.gphase_points().into_iter().map(|(_, p)| p).collect()
}

fn markers_for(
    spec: &ExampleSpec,
    sched: &Schedule,
    f: [&OrbitTrace; 2],
    phi: [&OrbitTrace; 2],
    distances: &[f64],
) -> Result<Vec<Marker>> {
    let (fa, fb) = (gpoints(f[0]), gpoints(f[1]));
    let (pa, pb) = (gpoints(phi[0]), gpoints(phi[1]));
    let depth = fa.len() - 1;
    let mut out = Vec::new();
    match spec.id {
        "1a" => {
            // |w| <= (1/12)^{2^n}, compared in log2
            let mut margin = f64::INFINITY;
            for (n, p) in pb.iter().enumerate() {
                let lw = p.value().norm().log2();
                let bound = -(2f64.powi(n as i32)) * 12f64.log2();
                if lw.is_finite() {
                    margin = margin.min(bound - lw);
                }
            }
            out.push(Marker::new("phi_doubly_exponential", margin, "log2 (1/12)^(2^n) - log2 |phi^l_n(z) - k_n|"));
            let worst = fa.iter().chain(&fb).map(|p| p.value().norm()).fold(0.0, f64::max);
            out.push(Marker::new("f_within_quarter", 0.25 - worst, format!("max |f^l_n(z) - k_n| = {worst:.3e}")));
        }
        "1b" => {
            let b = sched.product(0)?;
            let mut r = vec![DiscPoint::new(Complex64::new(0.0, 0.0))];
            for _ in 0..depth + 2 {
                r.push(b.evaluate_point(r.last().expect("nonempty"))?);
            }
            let step = |n: usize| r[n + 1].difference(&r[n]).norm();
            let mut margin = f64::INFINITY;
            let mut rel = f64::INFINITY;
            for n in 1..=depth {
                let bound = 0.1 * step(n + 1) + 1.1 * step(n);
                let gap = fb[n].difference(&fa[n]).norm();
                margin = margin.min(bound - gap);
                rel = rel.min((bound - gap) / bound);
            }
            out.push(Marker::new("gap_bound", margin, format!("least relative slack {rel:.3e}")));
        }
        "2a" => {
            let sep = fa.iter().zip(&fb).map(|(x, y)| y.difference(x).norm()).fold(f64::INFINITY, f64::min);
            out.push(Marker::new("separation", sep - 1.0 / 12.0, format!("min |f^l_n(19/4) - f^l_n(4)| = {sep:.6}")));
            let w4 = fa.iter().map(|p| p.value().norm()).fold(0.0, f64::max);
            out.push(Marker::new("f4_within_quarter", 0.25 - w4, format!("max |f^l_n(4) - k_n| = {w4:.3e}")));
            let low = pb.iter().map(|p| p.value().re).fold(f64::INFINITY, f64::min);
            out.push(Marker::new("phi_lower_bound", low - 2.0 / 3.0, format!("min phi^l_n(19/4) - k_n = {low:.6}")));
            let (prod, dil) = lambda_products(60)?;
            out.push(Marker::new(
                "lambda_products",
                (prod - 8.0 / 9.0).min(4.0 / 3.0 - dil),
                format!("prod lambda >= {prod:.6}, prod 2/(1+lambda) <= {dil:.6}"),
            ));
        }
        "2b" => {
            let tail = second_half(distances);
            let least = min_of(tail);
            let target = (27.0f64 / 22.0).ln();
            out.push(Marker::new("hyperbolic_gap", least - target, format!("min over second half {least:.6}")));
        }
        "3a" => {
            let dev = fa.iter().zip(&pa).map(|(x, y)| x.difference(y).norm()).fold(0.0, f64::max);
            out.push(Marker::new("deviation_half", 0.5 - dev, format!("max |f^l_n(4) - phi^l_n(4)| = {dev:.3e}")));
        }
        "3b" => {
            // phi[1] is the φ-orbit of 4 here
            let mut margin = f64::INFINITY;
            for n in 0..=depth.min(30) {
                let dev = fa[n].difference(&pb[n]).norm();
                margin = margin.min(2f64.powi(-(n as i32)) - dev);
            }
            out.push(Marker::new("deviation_geometric", margin, "2^-n - |f^l_n(x) - phi^l_n(4)|"));
            let low = pb.iter().skip(1).map(|p| p.value().re).fold(f64::INFINITY, f64::min);
            out.push(Marker::new("phi_above_five_sixths", low - 5.0 / 6.0, format!("min phi^l_n(4) - k_n = {low:.6}")));
        }
        _ => return Err(Error::UnknownId(spec.id.into())),
    }
    Ok(out)
}

/// Lower bound for `∏ λ_j` and upper bound for `∏ 2/(1+λ_j)` over all `j`
/// for the semi sequence, from `terms` exact factors and the tail bound
/// `1 - λ_j <= 4^{-(j+2)}`.
pub fn lambda_products(terms: usize) -> Result<(f64, f64)> {
    let mut prod = 1.0;
    let mut dil = 1.0;
    for j in 0..terms {
        let sf = semi_from_gap(Family::semi_gap(j))?;
        prod *= sf.lambda;
        dil *= 2.0 / (1.0 + sf.lambda);
    }
    let tail = 4f64.powi(-(terms as i32 + 2)) * 4.0 / 3.0;
    Ok((prod * (1.0 - tail), dil * tail.exp()))
}

/// Builds the schedule, runs both f-orbits and φ-orbits, classifies and
/// evaluates the example's markers.
pub fn run_example(spec: &ExampleSpec, depth: usize, model: &PerturbationModel) -> Result<ClassificationReport> {
    if depth < 10 {
        return Err(Error::Domain(format!("examples need depth >= 10, got {depth}")));
    }
    let sched = build_schedule(spec.family, depth, 1024)?;
    run_example_on(spec, &sched, model)
}

pub fn run_example_on(spec: &ExampleSpec, sched: &Schedule, model: &PerturbationModel) -> Result<ClassificationReport> {
    let steps = sched.steps();
    let zero = PerturbationModel::zero();
    let sa = start(sched, model, spec.starts[0])?;
    let sb = start(sched, model, spec.starts[1])?;
    let fa = orbit(&sa, steps, model, sched)?;
    let fb = orbit(&sb, steps, model, sched)?;
    let phi_a = orbit(&start(sched, &zero, spec.starts[0])?, steps, &zero, sched)?;
    let phi_b = if spec.id == "3b" {
        orbit(&start_point(sched, Complex64::new(4.0, 0.0))?, steps, &zero, sched)?
    } else {
        orbit(&start(sched, &zero, spec.starts[1])?, steps, &zero, sched)?
    };
    let distances = gphase_distances(&fa, &fb)?;
    let (hyperbolic_class, hyperbolic_evidence) = classify_hyperbolic(&fa, &fb, sched, DEFAULT_WINDOW)?;
    let (boundary_class, boundary_evidence) = classify_boundary(&fa, DEFAULT_WINDOW)?;
    let kn_kn = (1..=sched.depth()).map(|n| kn_kn_bracket(sched, n)).collect::<Result<Vec<_>>>()?;
    let markers = markers_for(spec, sched, [&fa, &fb], [&phi_a, &phi_b], &distances)?;
    let classes_match = (hyperbolic_class, boundary_class) == spec.expected;
    let passed = classes_match && markers.iter().all(|m| m.passed);
    Ok(ClassificationReport {
        schema: SCHEMA,
        id: spec.id.into(),
        family: spec.family.id(),
        depth: sched.depth(),
        model: *model,
        expected: spec.expected,
        hyperbolic_class,
        boundary_class,
        hyperbolic_evidence,
        boundary_evidence,
        boundary_gaps: boundary_gaps(&fa),
        gphase_distances: distances,
        kn_kn,
        markers,
        classes_match,
        passed,
    })
}

fn pair(h: HyperbolicClass, b: BoundaryClass) -> String {
    format!("{h}, {b}")
}

fn markers_cell(r: &ClassificationReport) -> String {
    r.markers.iter().map(|m| format!("{}:{}", m.name, if m.passed { "pass" } else { "fail" })).collect::<Vec<_>>().join(" ")
}

/// One row per report: id, expected pair, observed pair, markers.
pub fn summary_csv(reports: &[ClassificationReport]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["id", "family", "expected", "observed", "markers", "passed"])?;
    for r in reports {
        wtr.write_record([
            r.id.clone(),
            r.family.clone(),
            pair(r.expected.0, r.expected.1),
            pair(r.hyperbolic_class, r.boundary_class),
            markers_cell(r),
            r.passed.to_string(),
        ])?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn summary_markdown(reports: &[ClassificationReport]) -> String {
    let mut s = String::from("| id | family | expected | observed | markers | passed |\n|---|---|---|---|---|---|\n");
    for r in reports {
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.id,
            r.family,
            pair(r.expected.0, r.expected.1),
            pair(r.hyperbolic_class, r.boundary_class),
            markers_cell(r),
            if r.passed { "yes" } else { "no" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_recovers_synthetic_exponent() {
        let s: Vec<(f64, f64)> = (1..=40).map(|n| (n as f64, 3.0 / (n as f64).sqrt())).collect();
        let fit = fit_power_law(&s).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.constant - 3.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn geometric_recovers_ratio() {
        let s: Vec<f64> = (0..30).map(|n| (2.0f64 / 3.0).powi(n)).collect();
        let fit = fit_geometric(&s).unwrap();
        assert!((fit.ratio - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn fits_reject_short_and_nonpositive() {
        assert!(matches!(fit_geometric(&[1.0; 5]), Err(Error::InsufficientData { .. })));
        let mut s = vec![1.0; 25];
        s[3] = 0.0;
        assert!(matches!(fit_geometric(&s), Err(Error::NonPositive { index: 3, .. })));
    }

    #[test]
    fn boundary_rules_on_synthetic_series() {
        let conv: Vec<f64> = (0..31).map(|n| 0.5 / ((n + 1) as f64).sqrt()).collect();
        assert_eq!(classify_boundary_series(&conv, 10).unwrap().0, BoundaryClass::Converging);
        let bungee = vec![0.9; 31];
        assert_eq!(classify_boundary_series(&bungee, 10).unwrap().0, BoundaryClass::Bungee);
        let slow: Vec<f64> = (0..31).map(|n| 0.04 + 0.0 * n as f64).collect();
        assert_eq!(classify_boundary_series(&slow, 10).unwrap().0, BoundaryClass::Inconclusive);
    }

    #[test]
    fn hyperbolic_rules_on_synthetic_series() {
        let flat = vec![0.7; 31];
        assert_eq!(classify_hyperbolic_series(&flat, &[1; 31], 10).unwrap().0, HyperbolicClass::EventuallyIsometric);
        assert_eq!(classify_hyperbolic_series(&flat, &[2; 31], 10).unwrap().0, HyperbolicClass::SemiContracting);
        let decay: Vec<f64> = (0..31).map(|n| 0.5f64.powi(n)).collect();
        assert_eq!(classify_hyperbolic_series(&decay, &[2; 31], 10).unwrap().0, HyperbolicClass::Contracting);
        assert!(classify_hyperbolic_series(&flat[..5], &[1; 5], 10).is_err());
    }

    #[test]
    fn lambda_product_bounds() {
        let (p, d) = lambda_products(60).unwrap();
        assert!(p >= 8.0 / 9.0 && d <= 4.0 / 3.0);
    }
}
