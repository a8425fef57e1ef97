//! The model map in local frames.
//!
//! Step `m` carries the disc `V_m = D(ζ_m, ρ_m)`. A point is stored as the
//! unit-scale coordinate `w` with absolute position `ζ_m + ρ_m w`; the map
//! acts on `w` as the identity except on G-phases, where it applies `b_n`.

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::hypgeo::{DiscPoint, SweepReport};
use crate::scale::LogScaled;
use crate::schedule::Schedule;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// `ℓ_n = 1 + 3n + n(n-1)/2`.
pub fn ell(n: u64) -> Result<u64> {
    let overflow = || Error::Overflow(format!("ell({n})"));
    let tri = n.checked_mul(n.saturating_sub(1)).ok_or_else(overflow)? / 2;
    3u64.checked_mul(n).and_then(|t| t.checked_add(1)).and_then(|t| t.checked_add(tri)).ok_or_else(overflow)
}

/// `ℓ_0 = 1`, `ℓ_{n+1} = ℓ_n + n + 3`.
pub fn ell_recurrence(n: u64) -> Result<u64> {
    let mut l: u64 = 1;
    for i in 0..n {
        l = l.checked_add(i + 3).ok_or_else(|| Error::Overflow(format!("ell({n})")))?;
    }
    Ok(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phase {
    /// `m = ℓ_n - 1`, the disc `Δ_n`.
    Delta { n: u64 },
    /// `m = ℓ_n`, the disc `G_n`.
    G { n: u64 },
    /// `m = ℓ_n + k + 1`, `0 <= k <= n`, inside `D_k`.
    D { n: u64, k: u64 },
}

impl Phase {
    pub fn level(&self) -> u64 {
        match *self {
            Phase::Delta { n } | Phase::G { n } | Phase::D { n, .. } => n,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Delta { n } => write!(f, "Delta({n})"),
            Phase::G { n } => write!(f, "G({n})"),
            Phase::D { n, k } => write!(f, "D({n},{k})"),
        }
    }
}

pub fn phase_of(m: u64) -> Phase {
    // largest n with ℓ_n - 1 <= m
    let mut n = ((2.0 * m as f64 + 6.25).sqrt() - 2.5).floor().max(0.0) as u64;
    while n > 0 && ell(n).map_or(true, |l| l - 1 > m) {
        n -= 1;
    }
    while ell(n + 1).is_ok_and(|l| l - 1 <= m) {
        n += 1;
    }
    let l = ell(n).expect("n bounded by m");
    if m + 1 == l {
        Phase::Delta { n }
    } else if m == l {
        Phase::G { n }
    } else {
        Phase::D { n, k: m - l - 1 }
    }
}

pub fn phase_index(p: Phase) -> Result<u64> {
    match p {
        Phase::Delta { n } => Ok(ell(n)? - 1),
        Phase::G { n } => ell(n),
        Phase::D { n, k } if k <= n => Ok(ell(n)? + k + 1),
        Phase::D { n, k } if k == n + 1 => Ok(ell(n + 1)? - 1),
        Phase::D { n, k } => Err(Error::Domain(format!("D({n},{k}) is not a phase"))),
    }
}

/// `ζ_m = integer + 4 α`, with `α` the scale named by `alpha_index`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Center {
    pub integer: u64,
    pub alpha_coeff: f64,
    pub alpha_index: u64,
    pub alpha: LogScaled,
}

impl Center {
    pub fn approx(&self) -> f64 {
        self.integer as f64 + self.alpha_coeff * self.alpha.to_f64()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub m: u64,
    pub phase: Phase,
    pub center: Center,
    pub scale: LogScaled,
}

fn alpha_at(alphas: &[LogScaled], i: u64) -> Result<LogScaled> {
    alphas
        .get(i as usize)
        .copied()
        .ok_or_else(|| Error::Domain(format!("scale α_{i} not available (depth {})", alphas.len() as i64 - 1)))
}

impl Frame {
    pub fn at(m: u64, alphas: &[LogScaled]) -> Result<Frame> {
        let phase = phase_of(m);
        let (center, scale) = match phase {
            Phase::Delta { n } => {
                let a = alpha_at(alphas, n)?;
                (Center { integer: 9 * n, alpha_coeff: 4.0, alpha_index: n, alpha: a }, a)
            }
            Phase::G { n } => {
                let a = alpha_at(alphas, n)?;
                (Center { integer: 9 * n + 3, alpha_coeff: 4.0, alpha_index: n, alpha: a }, LogScaled::ONE)
            }
            Phase::D { n, k } => {
                let a = alpha_at(alphas, n + 1)?;
                (Center { integer: 9 * k, alpha_coeff: 4.0, alpha_index: n + 1, alpha: a }, a)
            }
        };
        Ok(Frame { m, phase, center, scale })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalPoint {
    pub frame: Frame,
    pub point: DiscPoint,
}

impl LocalPoint {
    pub fn new(frame: Frame, w: Complex64) -> LocalPoint {
        LocalPoint { frame, point: DiscPoint::new(w) }
    }

    pub fn w(&self) -> Complex64 {
        self.point.value()
    }

    /// Best-effort absolute position and the exact frame scale. The position
    /// loses all local detail once `ρ_m < 1e-16 |ζ_m|`.
    pub fn to_absolute(&self) -> (Complex64, LogScaled) {
        let z = self.frame.center.approx() + self.w() * self.frame.scale.to_f64();
        (z, self.frame.scale)
    }
}

/// Radius in local units on which the map's branch for this frame is valid.
fn validity_limit(p: &LocalPoint, alphas: &[LogScaled], b: &BlaschkeProduct) -> Result<f64> {
    Ok(match p.frame.phase {
        Phase::Delta { .. } => 2.0,
        Phase::G { .. } => {
            let pole = b.pole_margin().map_or(f64::INFINITY, |g| 1.0 + g.to_f64());
            pole.min(1.25)
        }
        Phase::D { n, k } => {
            // the translation branch holds on D_k = D(9k, α_k)
            let ratio = (alpha_at(alphas, k)? / alpha_at(alphas, n + 1)?).to_f64();
            let shifted = (p.w() + 4.0).norm();
            if shifted >= ratio {
                return Err(Error::Region { m: p.frame.m, modulus: shifted, limit: ratio });
            }
            f64::INFINITY
        }
    })
}

/// One step of the model map in local coordinates. `b` is used only on G-phases.
pub fn phi_local(p: &LocalPoint, alphas: &[LogScaled], b: &BlaschkeProduct) -> Result<LocalPoint> {
    let limit = validity_limit(p, alphas, b)?;
    let modulus = p.w().norm();
    if !(modulus < limit) {
        return Err(Error::Region { m: p.frame.m, modulus, limit });
    }
    let frame = Frame::at(p.frame.m + 1, alphas)?;
    let point = match p.frame.phase {
        Phase::G { .. } => b.evaluate_point(&p.point)?,
        _ => p.point,
    };
    Ok(LocalPoint { frame, point })
}

/// The model map in absolute coordinates with scales as `f64`; only usable
/// while the scales stay well above machine epsilon.
pub fn phi_absolute(z: Complex64, alphas: &[f64], products: &[BlaschkeProduct]) -> Result<Complex64> {
    for n in 0..alphas.len() {
        let a = alphas[n];
        let nf = n as f64;
        let an = 9.0 * nf + 4.0 * a;
        let kappa = an + 3.0;
        if (z - 9.0 * nf).norm() < a {
            return Ok(z + 9.0);
        }
        if (z - an).norm() < 2.0 * a {
            return Ok((z - an) / a + kappa);
        }
        if (z - kappa).norm() < 1.25 {
            let next = *alphas
                .get(n + 1)
                .ok_or_else(|| Error::Domain(format!("α_{} needed for the G-branch", n + 1)))?;
            let b = products.get(n).ok_or_else(|| Error::Domain(format!("b_{n} not supplied")))?;
            return Ok(next * b.evaluate(z - kappa)? + 4.0 * next);
        }
    }
    Err(Error::Domain(format!("{z} lies in no branch of the model map")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationKind {
    Zero,
    SeededRandom { seed: u64, real_only: bool },
    ExtremalRadial { outward: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationModel {
    pub kind: PerturbationKind,
    pub envelope_fraction: f64,
}

/// A displacement `scale * dir` in target-frame local units, `|dir| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Displacement {
    pub scale: LogScaled,
    pub dir: Complex64,
}

impl Displacement {
    pub const NONE: Displacement = Displacement { scale: LogScaled::ZERO, dir: Complex64::new(0.0, 0.0) };

    pub fn value(&self) -> Complex64 {
        self.dir * self.scale.to_f64()
    }

    pub fn magnitude(&self) -> LogScaled {
        self.scale.scale(self.dir.norm())
    }
}

pub const DEFAULT_ENVELOPE: f64 = 0.9;

impl PerturbationModel {
    pub fn zero() -> PerturbationModel {
        PerturbationModel { kind: PerturbationKind::Zero, envelope_fraction: DEFAULT_ENVELOPE }
    }

    pub fn seeded(seed: u64) -> PerturbationModel {
        PerturbationModel {
            kind: PerturbationKind::SeededRandom { seed, real_only: false },
            envelope_fraction: DEFAULT_ENVELOPE,
        }
    }

    pub fn seeded_real(seed: u64) -> PerturbationModel {
        PerturbationModel {
            kind: PerturbationKind::SeededRandom { seed, real_only: true },
            envelope_fraction: DEFAULT_ENVELOPE,
        }
    }

    pub fn extremal(outward: bool) -> PerturbationModel {
        PerturbationModel { kind: PerturbationKind::ExtremalRadial { outward }, envelope_fraction: DEFAULT_ENVELOPE }
    }

    pub fn with_envelope(self, envelope_fraction: f64) -> PerturbationModel {
        PerturbationModel { envelope_fraction, ..self }
    }

    /// The model for draw `i`: seeds advance, other kinds are unchanged.
    pub fn draw(self, i: u64) -> PerturbationModel {
        match self.kind {
            PerturbationKind::SeededRandom { seed, real_only } => PerturbationModel {
                kind: PerturbationKind::SeededRandom { seed: seed.wrapping_add(i), real_only },
                ..self
            },
            _ => self,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == PerturbationKind::Zero || self.envelope_fraction == 0.0
    }

    /// The admissible displacement bound at `w` in target-frame local units,
    /// before the envelope fraction: `ε_m/ρ_{m+1}`, and on D-phases also the
    /// quadratic pin `(ε_{ℓ_k+k+1}/α_k^2) α_{n+1} |4 + w|^2`.
    pub fn envelope(sched: &Schedule, frame: &Frame, w: Complex64) -> Result<LogScaled> {
        let base = sched.eps_rel(frame.m)?;
        match frame.phase {
            Phase::D { n, k } => {
                let pin = sched.eps(ell(k)? + k + 1)? / sched.alpha(k as usize)?.square()
                    * sched.alpha(n as usize + 1)?;
                Ok(base.min(pin.scale((w + 4.0).norm_sqr())))
            }
            _ => Ok(base),
        }
    }

    pub fn displacement(&self, sched: &Schedule, frame: &Frame, w: Complex64) -> Result<Displacement> {
        if self.is_zero() {
            return Ok(Displacement::NONE);
        }
        let bound = PerturbationModel::envelope(sched, frame, w)?.scale(self.envelope_fraction);
        let dir = match self.kind {
            PerturbationKind::Zero => return Ok(Displacement::NONE),
            PerturbationKind::SeededRandom { seed, real_only } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(frame.m);
                let t: f64 = rng.gen();
                let u: f64 = rng.gen();
                let angle = |rng: &mut ChaCha8Rng| {
                    if real_only {
                        if rng.gen::<bool>() {
                            0.0
                        } else {
                            PI
                        }
                    } else {
                        rng.gen::<f64>() * 2.0 * PI
                    }
                };
                let c0 = Complex64::from_polar(t, angle(&mut rng));
                let c1 = Complex64::from_polar((1.0 - t) * u, angle(&mut rng));
                let h = c0 + c1 * w / 2.0;
                if h.norm() > 1.0 {
                    h / h.norm()
                } else {
                    h
                }
            }
            PerturbationKind::ExtremalRadial { outward } => {
                let r = w.norm();
                let radial = if r > 0.0 { w / r } else { Complex64::new(1.0, 0.0) };
                if outward {
                    radial
                } else {
                    -radial
                }
            }
        };
        if self.kind_is_real() {
            return Ok(Displacement { scale: bound, dir: Complex64::new(dir.re, 0.0) });
        }
        Ok(Displacement { scale: bound, dir })
    }

    fn kind_is_real(&self) -> bool {
        matches!(self.kind, PerturbationKind::SeededRandom { real_only: true, .. })
    }
}

/// The model step followed by the model's displacement.
pub fn perturbed_step(p: &LocalPoint, model: &PerturbationModel, sched: &Schedule) -> Result<LocalPoint> {
    let b = sched.product(p.frame.phase.level() as usize)?;
    let mut q = phi_local(p, sched.alphas(), b)?;
    let d = model.displacement(sched, &p.frame, p.w())?;
    if !d.scale.is_zero() {
        q.point = q.point.translate(d.value());
    }
    Ok(q)
}

/// The start point `z` (absolute, near `a_0 = 4`) in the frame of `Δ_0`.
pub fn start_point(sched: &Schedule, z: Complex64) -> Result<LocalPoint> {
    Ok(LocalPoint::new(Frame::at(0, sched.alphas())?, z - 4.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitRecord {
    pub m: u64,
    pub phase: Phase,
    pub point: DiscPoint,
    /// `1 - |w|`.
    pub edge_gap: f64,
    /// `R̂_m - |w|`.
    pub boundary_gap: f64,
    /// `ε_m/ρ_{m+1}` for the step leaving this record; zero at the last record.
    pub eps_rel: LogScaled,
}

#[derive(Serialize)]
struct RecordWire {
    m: u64,
    n: u64,
    phase: String,
    w: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    one_minus_w: Option<[f64; 2]>,
    boundary_gap: f64,
    eps_rel: f64,
    eps_rel_log2: Option<f64>,
}

impl OrbitRecord {
    fn wire(&self) -> RecordWire {
        let w = self.point.value();
        let one_minus_w = match self.point {
            DiscPoint::NearOne(v) => Some([v.re, v.im]),
            DiscPoint::Interior(_) => None,
        };
        let l = self.eps_rel.log2_magnitude();
        RecordWire {
            m: self.m,
            n: self.phase.level(),
            phase: self.phase.to_string(),
            w: [w.re, w.im],
            one_minus_w,
            boundary_gap: self.boundary_gap,
            eps_rel: self.eps_rel.to_f64(),
            eps_rel_log2: l.is_finite().then_some(l),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace {
    pub family: String,
    pub model: PerturbationModel,
    pub records: Vec<OrbitRecord>,
}

impl OrbitTrace {
    /// `(n, point)` at every G-phase.
    pub fn gphase_points(&self) -> Vec<(u64, DiscPoint)> {
        self.records
            .iter()
            .filter_map(|r| match r.phase {
                Phase::G { n } => Some((n, r.point)),
                _ => None,
            })
            .collect()
    }

    pub fn gphase_records(&self) -> Vec<&OrbitRecord> {
        self.records.iter().filter(|r| matches!(r.phase, Phase::G { .. })).collect()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(&r.wire())?);
            out.push('\n');
        }
        Ok(out)
    }

    /// CSV of the G-phase subsequence.
    pub fn gphase_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["n", "m", "w_re", "w_im", "one_minus_w_re", "one_minus_w_im", "edge_gap", "boundary_gap"])?;
        for r in self.gphase_records() {
            let w = r.point.value();
            let v = r.point.one_minus();
            wtr.write_record(&[
                r.phase.level().to_string(),
                r.m.to_string(),
                w.re.to_string(),
                w.im.to_string(),
                v.re.to_string(),
                v.im.to_string(),
                r.edge_gap.to_string(),
                r.boundary_gap.to_string(),
            ])?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn record(p: &LocalPoint, sched: &Schedule) -> Result<OrbitRecord> {
    let m = p.frame.m;
    let edge_gap = p.point.edge_gap();
    let boundary_gap = sched.gap_out(m)?.to_f64() + edge_gap;
    let eps_rel = if m < sched.steps() { sched.eps_rel(m)? } else { LogScaled::ZERO };
    Ok(OrbitRecord { m, phase: p.frame.phase, point: p.point, edge_gap, boundary_gap, eps_rel })
}

/// Iterates the perturbed map `steps` times from `start`, failing if the orbit
/// leaves the tracked discs `D(ζ_m, R_m)`.
pub fn orbit(start: &LocalPoint, steps: u64, model: &PerturbationModel, sched: &Schedule) -> Result<OrbitTrace> {
    let last = start.frame.m + steps;
    if last > sched.steps() {
        return Err(Error::Domain(format!("orbit to step {last} exceeds schedule depth (ℓ_N = {})", sched.steps())));
    }
    let r0 = sched.rhat(start.frame.m)?;
    if !(start.w().norm() < r0) {
        return Err(Error::Region { m: start.frame.m, modulus: start.w().norm(), limit: r0 });
    }
    let mut p = *start;
    let mut records = Vec::with_capacity(steps as usize + 1);
    records.push(record(&p, sched)?);
    for _ in 0..steps {
        p = perturbed_step(&p, model, sched)?;
        let r = record(&p, sched)?;
        if !(r.boundary_gap > 0.0) {
            return Err(Error::Region { m: r.m, modulus: p.w().norm(), limit: sched.big_rhat(r.m)? });
        }
        records.push(r);
    }
    Ok(OrbitTrace { family: sched.family().id(), model: *model, records })
}

/// `|f^{n+3}(z) - φ^{n+3}(z')|` against `α_{n+1} + |b_n(z) - b_n(z')|`, for
/// local G-phase coordinates `z`, `z'` at level `n`; both sides in `G_{n+1}`
/// units. `holds` allows a rounding slack of `HOP_ROUNDING` per step, since
/// for large `n` the `α_{n+1}` term is below double precision and the two
/// sides agree to the last bit in exact arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HopCheck {
    pub n: u64,
    pub deviation: f64,
    pub bound: f64,
    pub holds: bool,
}

pub const HOP_ROUNDING: f64 = 16.0 * f64::EPSILON;

pub fn hop_check(sched: &Schedule, n: u64, z: Complex64, zp: Complex64, model: &PerturbationModel) -> Result<HopCheck> {
    let frame = Frame::at(ell(n)?, sched.alphas())?;
    let steps = n + 3;
    let f = orbit(&LocalPoint::new(frame, z), steps, model, sched)?;
    let phi = orbit(&LocalPoint::new(frame, zp), steps, &PerturbationModel::zero(), sched)?;
    let a = f.records.last().expect("nonempty").point;
    let b_ = phi.records.last().expect("nonempty").point;
    let deviation = a.difference(&b_).norm();
    let b = sched.product(n as usize)?;
    let bound = sched.alpha(n as usize + 1)?.to_f64() + (b.evaluate(z)? - b.evaluate(zp)?).norm();
    let slack = HOP_ROUNDING * steps as f64;
    Ok(HopCheck { n, deviation, bound, holds: deviation <= bound + slack })
}

/// Accumulated error along one D-run: for `1 <= j <= n+2`,
/// `|f^j(z) - φ^j(z)|` against `Σ_{i<j} ε_{ℓ_n+i}`, both divided by `α_{n+1}`.
pub fn run_error_check(sched: &Schedule, n: u64, z: Complex64, model: &PerturbationModel) -> Result<Vec<(f64, f64)>> {
    let frame = Frame::at(ell(n)?, sched.alphas())?;
    let steps = n + 2;
    let f = orbit(&LocalPoint::new(frame, z), steps, model, sched)?;
    let phi = orbit(&LocalPoint::new(frame, z), steps, &PerturbationModel::zero(), sched)?;
    let alpha = sched.alpha(n as usize + 1)?;
    let mut sum = LogScaled::ZERO;
    let mut out = Vec::new();
    for j in 1..=steps as usize {
        sum = sum + sched.eps(ell(n)? + j as u64 - 1)?;
        let dev = f.records[j].point.difference(&phi.records[j].point).norm();
        out.push((dev, (sum / alpha).to_f64()));
    }
    Ok(out)
}

/// Hop checks for every level `n < N`, with `draws` seeded pairs `z, z'`
/// drawn uniformly from `D(0, r̂_{ℓ_n})` and the model advanced per draw.
pub fn hop_sweep(sched: &Schedule, model: &PerturbationModel, draws: u64, seed: u64) -> Result<SweepReport> {
    let mut rep = SweepReport::new(&format!("hop_bound_{}", sched.family()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for d in 0..draws {
        let m = model.draw(d);
        for n in 0..sched.depth() as u64 {
            let r = sched.rhat(ell(n)?)?;
            let mut point = || Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen::<f64>() * 2.0 * PI);
            let (z, zp) = (point(), point());
            let h = hop_check(sched, n, z, zp, &m)?;
            let slack = HOP_ROUNDING * (n + 3) as f64;
            rep.record(h.bound + slack - h.deviation, false, || format!("n={n}, draw={d}, z={z}, z'={zp}"));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_partition_small() {
        let expect = [
            Phase::Delta { n: 0 },
            Phase::G { n: 0 },
            Phase::D { n: 0, k: 0 },
            Phase::Delta { n: 1 },
            Phase::G { n: 1 },
            Phase::D { n: 1, k: 0 },
            Phase::D { n: 1, k: 1 },
            Phase::Delta { n: 2 },
            Phase::G { n: 2 },
        ];
        for (m, p) in expect.iter().enumerate() {
            assert_eq!(phase_of(m as u64), *p);
            assert_eq!(phase_index(*p).unwrap(), m as u64);
        }
    }

    #[test]
    fn delta_alias() {
        assert_eq!(phase_index(Phase::D { n: 3, k: 4 }).unwrap(), phase_index(Phase::Delta { n: 4 }).unwrap());
        assert!(phase_index(Phase::D { n: 3, k: 5 }).is_err());
    }

    #[test]
    fn ell_overflow_is_reported() {
        assert!(matches!(ell(u64::MAX / 2), Err(Error::Overflow(_))));
    }
}
