//! Finite Blaschke products in factored form, the named families used by the
//! construction, and validators for the inequalities the examples rely on.
//!
//! A zero `a` is stored as a unit direction and the modulus gap `1 - |a|`,
//! so zeros within `1e-16` of the circle keep their geometry.

use crate::error::{Error, Result};
use crate::hypgeo::{DiscPoint, SweepReport};
use crate::scale::LogScaled;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    dir: Complex64,
    gap: f64,
}

impl Zero {
    pub fn new(a: Complex64) -> Result<Zero> {
        let r = a.norm();
        if !(r < 1.0) || !r.is_finite() {
            return Err(Error::Domain(format!("zero {a} not inside the unit disc")));
        }
        let dir = if r == 0.0 { Complex64::new(1.0, 0.0) } else { a / r };
        Ok(Zero { dir, gap: 1.0 - r })
    }

    /// Zero at `(1 - gap) * dir`.
    pub fn from_gap(dir: Complex64, gap: f64) -> Result<Zero> {
        if !(gap > 0.0 && gap <= 1.0) {
            return Err(Error::Domain(format!("modulus gap {gap} outside (0, 1]")));
        }
        Ok(Zero { dir: dir / dir.norm(), gap })
    }

    pub fn value(&self) -> Complex64 {
        self.dir * (1.0 - self.gap)
    }

    pub fn modulus_gap(&self) -> f64 {
        self.gap
    }

    pub fn direction(&self) -> Complex64 {
        self.dir
    }

    /// `1 - |a|^2`.
    fn weight(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }

    /// The factor at `z = (1 - g) dir e^{iθ}`, with `g < 0` outside the circle.
    fn at_polar(&self, theta: f64, g: f64) -> Complex64 {
        let c = 1.0 - self.gap;
        let em1 = Complex64::new(-2.0 * (theta / 2.0).sin().powi(2), theta.sin());
        let rho = 1.0 - g;
        // rho e^{iθ} - c and 1 - c rho e^{iθ}, both free of cancellation
        let num = em1 * rho + (self.gap - g);
        let one_minus_c_rho = self.gap + g - self.gap * g;
        let den = Complex64::new(one_minus_c_rho, 0.0) - em1 * (c * rho);
        self.dir * num / den
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The circle `|z| = 1 - g`; defects measure `1 - |b|`.
    Inner,
    /// The circle `|z| = 1 + g`; defects measure `|b| - 1`.
    Outer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Attracting,
    Parabolic,
    Repelling,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub location: Complex64,
    pub multiplier: f64,
    pub kind: FixedPointKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Zero>,
    rotation: f64,
}

fn ln_one_minus(u: Complex64) -> Complex64 {
    let re = 0.5 * (u.norm_sqr() - 2.0 * u.re).ln_1p();
    let im = (-u.im).atan2(1.0 - u.re);
    Complex64::new(re, im)
}

fn expm1_c(s: Complex64) -> Complex64 {
    let (sin, cos) = s.im.sin_cos();
    let half = (s.im / 2.0).sin();
    Complex64::new(s.re.exp_m1() * cos - 2.0 * half * half, s.re.exp() * sin)
}

impl BlaschkeProduct {
    pub fn new(zeros: &[Complex64], rotation: f64) -> Result<BlaschkeProduct> {
        let zeros = zeros.iter().map(|&a| Zero::new(a)).collect::<Result<Vec<_>>>()?;
        BlaschkeProduct::from_zeros(zeros, rotation)
    }

    pub fn from_zeros(zeros: Vec<Zero>, rotation: f64) -> Result<BlaschkeProduct> {
        if zeros.is_empty() {
            return Err(Error::Domain("a Blaschke product needs at least one zero".into()));
        }
        if !rotation.is_finite() {
            return Err(Error::Domain("rotation must be finite".into()));
        }
        Ok(BlaschkeProduct { zeros, rotation: rotation.rem_euclid(2.0 * PI) })
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn evaluate(&self, w: Complex64) -> Result<Complex64> {
        if !(w.norm() <= 1.0 + 1e-9) {
            return Err(Error::Domain(format!("{w} lies outside the closed unit disc")));
        }
        let mut p = Complex64::from_polar(1.0, self.rotation);
        for z in &self.zeros {
            let a = z.value();
            p *= (w - a) / (1.0 - a.conj() * w);
        }
        Ok(p)
    }

    /// `1 - b(1 - v)`, accurate when `v` is small.
    pub fn one_minus_image(&self, v: Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for z in &self.zeros {
            let a = z.value();
            let one_plus_a = (1.0 + z.dir) - z.dir * z.gap;
            let num = Complex64::new(0.0, 2.0 * a.im) + v * one_plus_a.conj();
            let den = (1.0 - a.conj()) + a.conj() * v;
            s += ln_one_minus(num / den);
        }
        // 1 - e^{iθ} e^{s}
        let rot = Complex64::new(0.0, self.rotation);
        -expm1_c(rot + s)
    }

    pub fn evaluate_point(&self, p: &DiscPoint) -> Result<DiscPoint> {
        match p {
            DiscPoint::Interior(w) => Ok(DiscPoint::new(self.evaluate(*w)?)),
            DiscPoint::NearOne(v) => Ok(DiscPoint::from_one_minus(self.one_minus_image(*v))),
        }
    }

    pub fn iterate(&self, w: Complex64, n: usize) -> Result<Complex64> {
        if !(w.norm() < 1.0) {
            return Err(Error::Domain(format!("{w} not inside the unit disc")));
        }
        Ok(self.iterate_point(&DiscPoint::new(w), n)?.value())
    }

    pub fn iterate_point(&self, p: &DiscPoint, n: usize) -> Result<DiscPoint> {
        let mut q = *p;
        for _ in 0..n {
            q = self.evaluate_point(&q)?;
        }
        Ok(q)
    }

    pub fn fixes_one(&self) -> bool {
        self.one_minus_image(Complex64::new(0.0, 0.0)).norm() <= 1e-12
    }

    pub fn multiplier_at_one(&self) -> Result<FixedPointReport> {
        if !self.fixes_one() {
            return Err(Error::Domain("1 is not a fixed point".into()));
        }
        let multiplier: f64 = self
            .zeros
            .iter()
            .map(|z| z.weight() / ((1.0 + z.dir * (z.gap - 1.0)).norm_sqr()))
            .sum();
        let kind = if (multiplier - 1.0).abs() <= 1e-12 {
            FixedPointKind::Parabolic
        } else if multiplier < 1.0 {
            FixedPointKind::Attracting
        } else {
            FixedPointKind::Repelling
        };
        Ok(FixedPointReport { location: Complex64::new(1.0, 0.0), multiplier, kind })
    }

    /// `|b'(e^{it})| = Σ (1 - |a|^2) / |e^{it} - a|^2`.
    pub fn boundary_derivative(&self, t: f64) -> f64 {
        self.zeros
            .iter()
            .map(|z| {
                let th = t - z.dir.arg();
                let em1 = Complex64::new(-2.0 * (th / 2.0).sin().powi(2), th.sin());
                z.weight() / (em1 + z.gap).norm_sqr()
            })
            .sum()
    }

    /// `b((1 - g) e^{it})` for signed `g` (negative outside the circle).
    pub fn on_circle(&self, t: f64, g: f64) -> Complex64 {
        let mut p = Complex64::from_polar(1.0, self.rotation);
        for z in &self.zeros {
            p *= z.at_polar(t - z.dir.arg(), g);
        }
        p
    }

    /// `1 - |b|` on `|z| = 1 - g` (inner) or `|b| - 1` on `|z| = 1 + g` (outer),
    /// at the point of argument `t`.
    pub fn radial_defect(&self, t: f64, g: LogScaled, side: Side) -> LogScaled {
        let gf = g.to_f64();
        if gf < 1e-280 {
            return g.scale(self.boundary_derivative(t));
        }
        let one_minus_z2 = match side {
            Side::Inner => gf * (2.0 - gf),
            Side::Outer => -gf * (2.0 + gf),
        };
        let signed = if side == Side::Inner { gf } else { -gf };
        let mut log_prod = 0.0;
        for z in &self.zeros {
            let c = 1.0 - z.gap;
            let rho = 1.0 - signed;
            let one_minus_c_rho = z.gap + signed - z.gap * signed;
            let th = t - z.dir.arg();
            let den = one_minus_c_rho * one_minus_c_rho + 4.0 * c * rho * (th / 2.0).sin().powi(2);
            let u = z.weight() * one_minus_z2 / den;
            log_prod += (-u).ln_1p();
        }
        // x = 1 - |b|^2
        let x = -log_prod.exp_m1();
        let d = x / (1.0 + (1.0 - x).sqrt());
        LogScaled::from_f64(if side == Side::Inner { d } else { -d })
    }

    /// Uniform angles, refined near zeros close to the circle where the
    /// boundary image sweeps fast.
    pub fn adapted_angles(&self, n: usize) -> Vec<f64> {
        let mut t: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        for z in &self.zeros {
            if z.gap >= 0.25 {
                continue;
            }
            let k = z.gap / (2.0 - z.gap);
            let phi = z.dir.arg();
            let m = n / 2;
            for j in 0..m {
                let sigma = -PI + 2.0 * PI * (j as f64 + 0.5) / m as f64;
                let theta = 2.0 * (k * (sigma / 2.0).tan()).atan();
                t.push((phi + theta).rem_euclid(2.0 * PI));
            }
        }
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t.dedup();
        t
    }

    /// Least radial defect of the image of the circle `|z| = 1 ∓ g`; for the
    /// inner side this is `dist(b(|z| = 1-g), ∂D)`.
    pub fn image_gap(&self, g: LogScaled, side: Side, samples: usize) -> LogScaled {
        let linear = g.to_f64() < 1e-280;
        let f = |t: f64| -> f64 {
            if linear {
                self.boundary_derivative(t)
            } else {
                self.radial_defect(t, g, side).to_f64()
            }
        };
        let mut n = samples.max(64);
        let mut best = minimize_periodic(&f, &self.adapted_angles(n));
        while n < 1 << 16 {
            n *= 2;
            let next = minimize_periodic(&f, &self.adapted_angles(n));
            let settled = (next - best).abs() <= 1e-12 * best.abs();
            best = best.min(next);
            if settled {
                break;
            }
        }
        if linear {
            g.scale(best)
        } else {
            LogScaled::from_f64(best)
        }
    }

    /// Lower bound for `|b|` on `|z| = 1 - g`: `Π (r - |a|)/(1 - |a| r)`.
    pub fn min_modulus_bound(&self, g: LogScaled) -> f64 {
        let gf = g.to_f64();
        self.zeros
            .iter()
            .map(|z| {
                if z.gap <= gf {
                    0.0
                } else {
                    (z.gap - gf) / (z.gap + gf - z.gap * gf)
                }
            })
            .product()
    }

    /// Number of zeros inside `|z| < 1 - g`.
    pub fn zeros_inside(&self, g: LogScaled) -> usize {
        let gf = g.to_f64();
        self.zeros.iter().filter(|z| z.gap > gf).count()
    }

    /// `1/max|a| - 1`, the room left before the nearest pole; `None` when all
    /// zeros sit at the origin.
    pub fn pole_margin(&self) -> Option<LogScaled> {
        let g = self.zeros.iter().map(|z| z.gap).fold(1.0, f64::min);
        if g >= 1.0 {
            None
        } else {
            Some(LogScaled::from_f64(g / (1.0 - g)))
        }
    }

    pub fn to_wire(&self) -> ProductWire {
        ProductWire {
            zeros: self.zeros.iter().map(|z| [z.value().re, z.value().im]).collect(),
            modulus_gaps: self.zeros.iter().map(|z| z.gap).collect(),
            rotation: self.rotation,
            degree: self.degree(),
        }
    }
}

/// Minimum of a smooth periodic function sampled at sorted `angles`, polished
/// by golden-section search around the best sample.
fn minimize_periodic(f: &impl Fn(f64) -> f64, angles: &[f64]) -> f64 {
    let vals: Vec<f64> = angles.iter().map(|&t| f(t)).collect();
    let (i, &v) = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonempty angle grid");
    let n = angles.len();
    let lo = if i == 0 { angles[n - 1] - 2.0 * PI } else { angles[i - 1] };
    let hi = if i + 1 == n { angles[0] + 2.0 * PI } else { angles[i + 1] };
    let (mut a, mut b) = (lo, hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    v.min(f1).min(f2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductWire {
    pub zeros: Vec<[f64; 2]>,
    pub modulus_gaps: Vec<f64>,
    pub rotation: f64,
    pub degree: usize,
}

impl Serialize for BlaschkeProduct {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlaschkeProduct {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ProductWire::deserialize(d)?;
        let zeros = w
            .zeros
            .iter()
            .zip(w.modulus_gaps.iter().map(Some).chain(std::iter::repeat(None)))
            .map(|(&[re, im], gap)| {
                let a = Complex64::new(re, im);
                match gap {
                    Some(&g) => Zero::from_gap(if a.norm() > 0.0 { a } else { Complex64::new(1.0, 0.0) }, g),
                    None => Zero::new(a),
                }
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        BlaschkeProduct::from_zeros(zeros, w.rotation).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRatioCheck {
    pub holds: bool,
    pub margin: f64,
    pub lhs: f64,
    pub rhs: f64,
}

fn par13_real(x: f64) -> f64 {
    let q = (3.0 * x + 1.0) / (3.0 + x);
    q * q
}

/// `|b(x) - b(r)| / |x - r| < (b(b(r)) - b(r)) / (b(r) - r)` for
/// `b = ((z + 1/3)/(1 + z/3))^2`.
pub fn check_cross_ratio_inequality(r: f64, x: f64) -> Result<CrossRatioCheck> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r = {r} outside (0, 1)")));
    }
    let br = par13_real(r);
    if !(x > 0.0 && x < br) || x == r {
        return Err(Error::Domain(format!("x = {x} outside (0, b(r)) or equal to r")));
    }
    let lhs = (par13_real(x) - br).abs() / (x - r).abs();
    let rhs = (par13_real(br) - br) / (br - r);
    let margin = rhs - lhs;
    Ok(CrossRatioCheck { holds: margin > 0.0, margin, lhs, rhs })
}

/// The degree-two product `μ̃(μ(z)^2)` with `μ(z) = (z+s)/(1+sz)` and
/// `μ̃(w) = (w - s^2)/(1 - s^2 w)`, which factors as `z (z + λ)/(1 + λ z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiFamily {
    pub product: BlaschkeProduct,
    pub s: f64,
    pub lambda: f64,
    /// `1 - λ = (1 - s)^2 / (1 + s^2)`.
    pub lambda_gap: f64,
}

pub fn semi_family(s: f64) -> Result<(BlaschkeProduct, f64)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s = {s} outside (0, 1)")));
    }
    let f = semi_from_gap(1.0 - s)?;
    Ok((f.product, f.lambda))
}

/// Semi family parametrized by `1 - s`, which stays exact as `s → 1`.
pub fn semi_from_gap(s_gap: f64) -> Result<SemiFamily> {
    if !(s_gap > 0.0 && s_gap < 1.0) {
        return Err(Error::Domain(format!("1 - s = {s_gap} outside (0, 1)")));
    }
    let s = 1.0 - s_gap;
    let lambda_gap = s_gap * s_gap / (1.0 + s * s);
    let lambda = 2.0 * s / (1.0 + s * s);
    let zeros = vec![
        Zero::new(Complex64::new(0.0, 0.0))?,
        Zero::from_gap(Complex64::new(-1.0, 0.0), lambda_gap)?,
    ];
    let product = BlaschkeProduct::from_zeros(zeros, 0.0)?;
    // composed form loses about log10(1/(1-s)) digits near the circle
    let tol = 1e-12 * (1e-3 / s_gap).max(1.0);
    for z in [
        Complex64::new(0.3, 0.0),
        Complex64::new(-0.6, 0.2),
        Complex64::new(0.0, 0.9),
        Complex64::new(0.95, -0.1),
    ] {
        let diff = (semi_composed(s, z) - product.evaluate(z)?).norm();
        if diff > tol {
            return Err(Error::Inconsistent(format!(
                "semi family at s = {s}: factored and composed forms differ by {diff:.3e} at {z}"
            )));
        }
    }
    Ok(SemiFamily { product, s, lambda, lambda_gap })
}

/// `μ̃(μ(z)^2)` evaluated literally.
pub fn semi_composed(s: f64, z: Complex64) -> Complex64 {
    let mu = (z + s) / (1.0 + s * z);
    let w = mu * mu;
    let s2 = s * s;
    (w - s2) / (1.0 - s2 * w)
}

/// `x (x + λ)/(1 + λ x)` with `λ = 2s/(1+s^2)`.
pub fn semi_closed_form(s: f64, x: f64) -> f64 {
    let lambda = 2.0 * s / (1.0 + s * s);
    x * (x + lambda) / (1.0 + lambda * x)
}

/// The cross-ratio inequality on `r = k/(nr+1)`, `k = 1..=nr`, with `nx`
/// equally spaced `x` in `(0, b(r))` for each `r`.
pub fn cross_ratio_sweep(nr: usize, nx: usize) -> Result<SweepReport> {
    let mut rep = SweepReport::new("cross_ratio");
    for k in 1..=nr {
        let r = k as f64 / (nr as f64 + 1.0);
        let br = par13_real(r);
        for j in 1..=nx {
            let x = br * j as f64 / (nx as f64 + 1.0);
            if x == r {
                continue;
            }
            let c = check_cross_ratio_inequality(r, x)?;
            rep.record(c.margin, true, || format!("r={r}, x={x}"));
        }
    }
    Ok(rep)
}

/// The semi family on an `ns × nx` grid of `(s, x)`: agreement of the closed
/// form with the composition, `λx <= b(x) <= x`, and
/// `λ(y-x) <= b(y)-b(x) <= 2(y-x)/(1+λ)` for grid pairs `x < y`.
pub fn semi_sweep(ns: usize, nx: usize) -> Result<Vec<SweepReport>> {
    let mut agree = SweepReport::new("semi_closed_form");
    let mut bounds = SweepReport::new("semi_value_bounds");
    let mut lipschitz = SweepReport::new("semi_difference_bounds");
    for i in 1..=ns {
        let s = i as f64 / (ns as f64 + 1.0);
        let lambda = 2.0 * s / (1.0 + s * s);
        let xs: Vec<f64> = (0..=nx).map(|j| j as f64 / (nx as f64 + 1.0)).collect();
        let bx: Vec<f64> = xs.iter().map(|&x| semi_closed_form(s, x)).collect();
        for (&x, &b) in xs.iter().zip(&bx).skip(1) {
            let composed = semi_composed(s, Complex64::new(x, 0.0));
            agree.record(1e-12 - (composed - b).norm(), false, || format!("s={s}, x={x}"));
            bounds.record((b - lambda * x).min(x - b) / x, false, || format!("s={s}, x={x}"));
        }
        for a in 0..xs.len() {
            for c in a + 1..xs.len() {
                let (dx, db) = (xs[c] - xs[a], bx[c] - bx[a]);
                let m = (db - lambda * dx).min(2.0 * dx / (1.0 + lambda) - db) / dx;
                lipschitz.record(m, false, || format!("s={s}, x={}, y={}", xs[a], xs[c]));
            }
        }
    }
    Ok(vec![agree, bounds, lipschitz])
}

/// The named product families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `z^2`
    Square,
    /// `((z + 1/3)/(1 + z/3))^2`, parabolic at 1
    Par13,
    /// `((z + 1/2)/(1 + z/2))^2`, attracting at 1
    Att12,
    /// `z`
    Identity,
    /// `(z + 5/6)/(1 + 5z/6)`
    Att56,
    /// The semi family at a fixed `s`.
    Semi(f64),
    /// The semi family with `s_n = 1 - 2^{-(n+2)}`.
    SemiSequence,
}

impl Family {
    pub const SIX: [Family; 6] =
        [Family::Square, Family::Par13, Family::SemiSequence, Family::Att12, Family::Identity, Family::Att56];

    pub fn id(&self) -> String {
        match self {
            Family::Square => "square".into(),
            Family::Par13 => "par13".into(),
            Family::Att12 => "att12".into(),
            Family::Identity => "identity".into(),
            Family::Att56 => "att56".into(),
            Family::Semi(s) => format!("semi({s})"),
            Family::SemiSequence => "semi".into(),
        }
    }

    /// `1 - s_n` for the semi sequence.
    pub fn semi_gap(n: usize) -> f64 {
        2f64.powi(-(n as i32 + 2))
    }

    /// The product `b_n` used at level `n`.
    pub fn product(&self, n: usize) -> Result<BlaschkeProduct> {
        let real = |a: f64| Complex64::new(a, 0.0);
        match *self {
            Family::Square => BlaschkeProduct::new(&[real(0.0), real(0.0)], 0.0),
            Family::Par13 => BlaschkeProduct::new(&[real(-1.0 / 3.0), real(-1.0 / 3.0)], 0.0),
            Family::Att12 => BlaschkeProduct::new(&[real(-0.5), real(-0.5)], 0.0),
            Family::Identity => BlaschkeProduct::new(&[real(0.0)], 0.0),
            Family::Att56 => BlaschkeProduct::new(&[real(-5.0 / 6.0)], 0.0),
            Family::Semi(s) => semi_family(s).map(|(b, _)| b),
            Family::SemiSequence => semi_from_gap(Family::semi_gap(n)).map(|f| f.product),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl Serialize for Family {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.id())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        let s = s.trim();
        Ok(match s {
            "square" => Family::Square,
            "par13" => Family::Par13,
            "att12" => Family::Att12,
            "identity" => Family::Identity,
            "att56" => Family::Att56,
            "semi" => Family::SemiSequence,
            _ => {
                let inner = s
                    .strip_prefix("semi(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::UnknownId(s.into()))?;
                let v: f64 = inner.parse().map_err(|_| Error::UnknownId(s.into()))?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::Domain(format!("semi parameter {v} outside (0, 1)")));
                }
                Family::Semi(v)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_minus_image_matches_direct_evaluation() {
        let b = Family::Par13.product(0).unwrap();
        let v = c(0.1, 0.05);
        let direct = 1.0 - b.evaluate(1.0 - v).unwrap();
        assert!((b.one_minus_image(v) - direct).norm() < 1e-15);
    }

    #[test]
    fn near_one_iteration_resolves_attracting_rate() {
        let b = Family::Att56.product(0).unwrap();
        let p = b.iterate_point(&DiscPoint::new(c(0.0, 0.0)), 200).unwrap();
        // 1/v' = 11/v - 5 for v = 1 - w, so 1 - b^n(0) = 2/(11^n + 1)
        let expect = 2.0 * (-200.0 * 11f64.ln()).exp();
        assert!((p.one_minus().re / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_defect_regimes_agree() {
        let b = semi_from_gap(1.0 / 64.0).unwrap().product;
        let g = LogScaled::from_f64(1e-270);
        let t = 3.0;
        let exact = b.radial_defect(t, g, Side::Inner);
        let linear = g.scale(b.boundary_derivative(t));
        assert!(exact.rel_diff(linear) < 1e-9);
    }

    #[test]
    fn on_circle_matches_evaluate() {
        let b = Family::Att12.product(0).unwrap();
        for t in [0.0, 1.0, 2.5, 4.0] {
            let z = Complex64::from_polar(0.9, t);
            assert!((b.on_circle(t, 0.1) - b.evaluate(z).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn family_ids_round_trip() {
        for f in Family::SIX {
            assert_eq!(f.id().parse::<Family>().unwrap(), f);
        }
        assert_eq!("semi(0.5)".parse::<Family>().unwrap(), Family::Semi(0.5));
        assert!("cubic".parse::<Family>().is_err());
    }

    #[test]
    fn product_json_round_trip() {
        let b = semi_from_gap(1e-20).unwrap().product;
        let s = serde_json::to_string(&b).unwrap();
        let back: BlaschkeProduct = serde_json::from_str(&s).unwrap();
        assert_eq!(back.zeros()[1].modulus_gap(), b.zeros()[1].modulus_gap());
    }
}
