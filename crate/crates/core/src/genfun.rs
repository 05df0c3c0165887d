//! Monotone generating functions.
//!
//! A squeezed state of one chiral sector is fixed by a strictly increasing C¹
//! map `f`: its modes are `e^{-iω f(x)}` instead of the plane waves `e^{-iωx}`.
//! Everything observable in this crate (flux, correlators, mode overlaps) is a
//! functional of `f` and its first three derivatives, so a state is stored as
//! a piecewise description of `f` with closed-form derivatives per piece and
//! an explicit list of the kinks where `f''` jumps.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::GaussLegendre;
use crate::PI;

/// Relative tolerance for C⁰/C¹ matching at segment boundaries.
pub const MATCH_TOL: f64 = 1e-12;

/// A half-open interval `[lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const WHOLE_LINE: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    /// Closed-interval membership, used for pole checks.
    pub fn touches(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_whole_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }
}

/// Coefficients of `f(x) = (c + d x)/(a + b x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        MobiusParams { a, b, c, d }
    }

    pub fn determinant(&self) -> f64 {
        self.d * self.a - self.b * self.c
    }

    pub fn pole(&self) -> Option<f64> {
        (self.b != 0.0).then(|| -self.a / self.b)
    }

    /// Parameters of `self ∘ other`.
    pub fn compose(&self, other: &MobiusParams) -> MobiusParams {
        let (p, q) = (self, other);
        MobiusParams {
            d: p.d * q.d + p.c * q.b,
            c: p.d * q.c + p.c * q.a,
            b: p.b * q.d + p.a * q.b,
            a: p.b * q.c + p.a * q.a,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.c + self.d * x) / (self.a + self.b * x)
    }

    fn jet(&self, x: f64) -> Jet {
        let den = self.a + self.b * x;
        let r = 1.0 / den;
        let g1 = self.determinant() * r * r;
        let br = self.b * r;
        Jet::new(
            (self.c + self.d * x) * r,
            g1,
            -2.0 * br * g1,
            6.0 * br * br * g1,
        )
    }
}

/// Parameters of a compensated shock pair: a negative flux `-E_n` at `x_i`
/// followed by its positive compensation at `x_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockParams {
    #[serde(rename = "E_n")]
    pub e_n: f64,
    pub x_i: f64,
    pub x_f: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl ShockParams {
    pub fn new(e_n: f64, x_i: f64, x_f: f64, hbar: f64) -> Self {
        ShockParams { e_n, x_i, x_f, hbar }
    }

    pub fn length(&self) -> f64 {
        self.x_f - self.x_i
    }

    /// `sqrt(ε) = 12π E_n / ħ`, the reciprocal length scale of the middle branch.
    pub fn rate(&self) -> f64 {
        12.0 * PI * self.e_n / self.hbar
    }

    pub fn epsilon(&self) -> f64 {
        self.rate().powi(2)
    }

    /// `12π E_n l / ħ`; admissible shocks keep this strictly below one.
    pub fn coupling(&self) -> f64 {
        self.rate() * self.length()
    }

    fn check(&self) -> Result<()> {
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(Error::InvalidParameter(format!("hbar must be positive, got {}", self.hbar)));
        }
        if !(self.e_n >= 0.0) || !self.e_n.is_finite() {
            return Err(Error::InvalidParameter(format!("E_n must be non-negative, got {}", self.e_n)));
        }
        if !(self.x_i <= self.x_f) || !self.x_i.is_finite() || !self.x_f.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite x_i <= x_f, got x_i = {}, x_f = {}",
                self.x_i, self.x_f
            )));
        }
        admissible(self.e_n, self.length(), self.hbar)
    }
}

/// Rejects `E_n · l >= ħ/(12π)`.
pub fn admissible(e_n: f64, l: f64, hbar: f64) -> Result<()> {
    let limit = hbar / (12.0 * PI);
    let product = e_n * l;
    if product >= limit || 12.0 * PI * product / hbar >= 1.0 {
        return Err(Error::InadmissibleShock { product, limit });
    }
    Ok(())
}

pub type NumericFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type AnalyticFn = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;

/// Closed form of one piece of a generating function.
#[derive(Clone)]
pub enum SegmentForm {
    /// `offset + slope · x`
    Affine { offset: f64, slope: f64 },
    Moebius(MobiusParams),
    /// `value + gain · u/(1 - rate · u)` with `u = x - anchor`.
    ReciprocalShift { anchor: f64, value: f64, gain: f64, rate: f64 },
    /// Convolution of a base function with a smooth compact bump.
    Mollified(Arc<Mollified>),
    /// A plain closure, differentiated by fourth-order central differences.
    Numeric(NumericFn),
    /// A closure over jets; derivatives are exact.
    Analytic(AnalyticFn),
}

impl fmt::Debug for SegmentForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentForm::Affine { offset, slope } => write!(f, "Affine({offset} + {slope} x)"),
            SegmentForm::Moebius(p) => write!(f, "Moebius({p:?})"),
            SegmentForm::ReciprocalShift { anchor, value, gain, rate } => {
                write!(f, "ReciprocalShift(anchor {anchor}, value {value}, gain {gain}, rate {rate})")
            }
            SegmentForm::Mollified(m) => write!(f, "Mollified(width {})", m.width),
            SegmentForm::Numeric(_) => write!(f, "Numeric(<closure>)"),
            SegmentForm::Analytic(_) => write!(f, "Analytic(<closure>)"),
        }
    }
}

impl SegmentForm {
    pub fn name(&self) -> &'static str {
        match self {
            SegmentForm::Affine { .. } => "affine",
            SegmentForm::Moebius(_) => "moebius",
            SegmentForm::ReciprocalShift { .. } => "reciprocal-shift",
            SegmentForm::Mollified(_) => "mollified",
            SegmentForm::Numeric(_) => "numeric",
            SegmentForm::Analytic(_) => "analytic",
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, SegmentForm::Affine { .. })
            || matches!(self, SegmentForm::Moebius(p) if p.b == 0.0)
    }

    /// Möbius-type forms, whose Schwarzian vanishes identically.
    pub fn is_projective(&self) -> bool {
        matches!(
            self,
            SegmentForm::Affine { .. } | SegmentForm::Moebius(_) | SegmentForm::ReciprocalShift { .. }
        )
    }

    /// Schwarzian of the closed form; exactly zero for projective forms.
    pub fn schwarzian(&self, x: f64) -> (Jet, f64) {
        let j = self.jet(x);
        let s = if self.is_projective() { 0.0 } else { j.schwarzian() };
        (j, s)
    }

    /// Evaluates the closed form at `x`, ignoring the segment's interval.
    pub fn jet(&self, x: f64) -> Jet {
        match self {
            SegmentForm::Affine { offset, slope } => Jet::new(offset + slope * x, *slope, 0.0, 0.0),
            SegmentForm::Moebius(p) => p.jet(x),
            SegmentForm::ReciprocalShift { anchor, value, gain, rate } => {
                let u = x - anchor;
                let w = 1.0 / (1.0 - rate * u);
                let g1 = gain * w * w;
                Jet::new(
                    value + gain * u * w,
                    g1,
                    2.0 * rate * w * g1,
                    6.0 * rate * rate * w * w * g1,
                )
            }
            SegmentForm::Mollified(m) => m.jet(x),
            SegmentForm::Numeric(f) => finite_difference_jet(f.as_ref(), x),
            SegmentForm::Analytic(f) => f(Jet::var(x)),
        }
    }
}

/// Steps for the first, second and third derivative stencils, relative to
/// `max(1, |x|)`. Each balances O(h⁴) truncation against O(ε/hᵏ) rounding.
const FD_STEPS: [f64; 3] = [1e-3, 2e-3, 5e-3];

fn finite_difference_jet(f: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64) -> Jet {
    let scale = x.abs().max(1.0);
    let h1 = FD_STEPS[0] * scale;
    let d1 = (-f(x + 2.0 * h1) + 8.0 * f(x + h1) - 8.0 * f(x - h1) + f(x - 2.0 * h1)) / (12.0 * h1);
    let h2 = FD_STEPS[1] * scale;
    let f0 = f(x);
    let d2 = (-f(x + 2.0 * h2) + 16.0 * f(x + h2) - 30.0 * f0 + 16.0 * f(x - h2) - f(x - 2.0 * h2))
        / (12.0 * h2 * h2);
    let h3 = FD_STEPS[2] * scale;
    let d3 = (-f(x + 3.0 * h3) + 8.0 * f(x + 2.0 * h3) - 13.0 * f(x + h3) + 13.0 * f(x - h3)
        - 8.0 * f(x - 2.0 * h3)
        + f(x - 3.0 * h3))
        / (8.0 * h3 * h3 * h3);
    Jet::new(f0, d1, d2, d3)
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub interval: Interval,
    pub form: SegmentForm,
}

impl Segment {
    pub fn new(interval: Interval, form: SegmentForm) -> Self {
        Segment { interval, form }
    }
}

/// A strictly increasing C¹ map of one light-cone coordinate.
#[derive(Debug, Clone)]
pub struct GeneratingFunction {
    segments: Vec<Segment>,
    kinks: Vec<f64>,
}

impl GeneratingFunction {
    /// Assemble from contiguous segments. Every kink must sit on a segment
    /// boundary, since each closed form is smooth inside its own interval.
    pub fn from_segments(segments: Vec<Segment>, mut kinks: Vec<f64>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Malformed("no segments".into()));
        }
        for s in &segments {
            if s.interval.is_empty() || s.interval.lo.is_nan() || s.interval.hi.is_nan() {
                return Err(Error::Malformed(format!(
                    "empty segment interval [{}, {})",
                    s.interval.lo, s.interval.hi
                )));
            }
        }
        for w in segments.windows(2) {
            if w[0].interval.hi != w[1].interval.lo {
                return Err(Error::Malformed(format!(
                    "segments not contiguous: [.., {}) then [{}, ..)",
                    w[0].interval.hi, w[1].interval.lo
                )));
            }
        }
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        for &k in &kinks {
            if !segments.windows(2).any(|w| w[0].interval.hi == k) {
                return Err(Error::Malformed(format!("kink {k} is not a segment boundary")));
            }
        }
        Ok(GeneratingFunction { segments, kinks })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.segments[0].interval.lo, self.segments[self.segments.len() - 1].interval.hi)
    }

    /// Interior segment boundaries (a superset of the kinks).
    pub fn boundaries(&self) -> Vec<f64> {
        self.segments.windows(2).map(|w| w[0].interval.hi).collect()
    }

    pub fn is_kink(&self, x: f64) -> bool {
        self.kinks.iter().any(|&k| (x - k).abs() <= 1e-14 * k.abs().max(1.0))
    }

    /// Slopes of the affine tails, if both tails are affine.
    pub fn asymptotic_slopes(&self) -> Option<(f64, f64)> {
        let slope = |s: &Segment| match &s.form {
            SegmentForm::Affine { slope, .. } => Some(*slope),
            SegmentForm::Moebius(p) if p.b == 0.0 => Some(p.d / p.a),
            _ => None,
        };
        let first = &self.segments[0];
        let last = &self.segments[self.segments.len() - 1];
        if !self.domain().is_whole_line() {
            return None;
        }
        Some((slope(first)?, slope(last)?))
    }

    fn index_of(&self, x: f64) -> Result<usize> {
        let d = self.domain();
        if !d.contains(x) {
            return Err(Error::DomainViolation { x, lo: d.lo, hi: d.hi });
        }
        Ok(self.segments.partition_point(|s| s.interval.hi <= x))
    }

    /// `f` and its first three derivatives at `x`. At a segment boundary the
    /// right-hand segment is used.
    pub fn jet(&self, x: f64) -> Result<Jet> {
        Ok(self.segments[self.index_of(x)?].form.jet(x))
    }

    /// One-sided jets `(left, right)` at a segment boundary or interior point.
    pub fn one_sided(&self, x: f64) -> Result<(Jet, Jet)> {
        let i = self.index_of(x)?;
        let right = self.segments[i].form.jet(x);
        let left = if i > 0 && self.segments[i].interval.lo == x {
            self.segments[i - 1].form.jet(x)
        } else {
            right
        };
        Ok((left, right))
    }

    /// One-sided `(jet, schwarzian)` pairs `(left, right)` at `x`.
    pub fn one_sided_schwarzian(&self, x: f64) -> Result<((Jet, f64), (Jet, f64))> {
        let i = self.index_of(x)?;
        let right = self.segments[i].form.schwarzian(x);
        let left = if i > 0 && self.segments[i].interval.lo == x {
            self.segments[i - 1].form.schwarzian(x)
        } else {
            right
        };
        Ok((left, right))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.v)
    }

    pub fn slope(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.d1)
    }

    /// Evaluate without the domain check; points outside the domain use the
    /// nearest end segment's closed form.
    pub(crate) fn jet_extended(&self, x: f64) -> Jet {
        let i = self.segments.partition_point(|s| s.interval.hi <= x).min(self.segments.len() - 1);
        self.segments[i].form.jet(x)
    }

    /// Hull of all non-affine segments, i.e. where the flux can be nonzero.
    pub fn active_region(&self) -> Option<Interval> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.segments.iter().filter(|s| !s.form.is_affine()) {
            lo = lo.min(s.interval.lo);
            hi = hi.max(s.interval.hi);
        }
        for &k in &self.kinks {
            lo = lo.min(k);
            hi = hi.max(k);
        }
        (lo <= hi).then_some(Interval::new(lo, hi))
    }

    /// Solve `f(x) = y` by bracketing and bisection.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let d = self.domain();
        let start = if d.contains(0.0) { 0.0 } else if d.lo.is_finite() { d.lo } else { d.hi - 1.0 };
        let mut lo = start;
        let mut hi = start;
        let mut step = 1.0;
        let fail = || Error::DomainViolation { x: y, lo: d.lo, hi: d.hi };
        while self.value(lo)? > y {
            lo = (start - step).max(d.lo);
            step *= 2.0;
            if step > 1e15 || (lo == d.lo && self.value(lo)? > y) {
                return Err(fail());
            }
        }
        step = 1.0;
        while self.value(hi)? < y {
            let next = start + step;
            hi = if next < d.hi { next } else { 0.5 * (hi + d.hi) };
            step *= 2.0;
            if step > 1e15 {
                return Err(fail());
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid)? < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// The vacuum: `f(x) = x`.
pub fn make_identity() -> GeneratingFunction {
    make_affine(0.0, 1.0).expect("unit slope is increasing")
}

pub fn make_affine(offset: f64, slope: f64) -> Result<GeneratingFunction> {
    if !(slope > 0.0) {
        return Err(Error::NonMonotone { x: 0.0, slope });
    }
    GeneratingFunction::from_segments(
        vec![Segment::new(Interval::WHOLE_LINE, SegmentForm::Affine { offset, slope })],
        vec![],
    )
}

/// `f(x) = (c + d x)/(a + b x)` on a pole-free interval.
pub fn make_moebius(p: MobiusParams, domain: Interval) -> Result<GeneratingFunction> {
    let det = p.determinant();
    if !(det > 0.0) {
        return Err(Error::NonMonotone { x: f64::NAN, slope: det });
    }
    if let Some(pole) = p.pole() {
        if domain.touches(pole) {
            return Err(Error::PoleInDomain { pole });
        }
    }
    GeneratingFunction::from_segments(vec![Segment::new(domain, SegmentForm::Moebius(p))], vec![])
}

/// The three-branch shock profile: identity left of `x_i`, a reciprocal-shift
/// (Möbius) branch on `[x_i, x_f)`, and a steeper affine branch after `x_f`.
pub fn make_shock(s: &ShockParams) -> Result<GeneratingFunction> {
    s.check()?;
    let k = s.rate();
    let l = s.length();
    if k == 0.0 || l == 0.0 {
        // ε = 0, or the two shocks coincide and cancel
        return Ok(make_identity());
    }
    let middle = SegmentForm::ReciprocalShift { anchor: s.x_i, value: s.x_i, gain: 1.0, rate: k };
    let end = middle.jet(s.x_f);
    let slope = 1.0 / (1.0 - k * l).powi(2);
    GeneratingFunction::from_segments(
        vec![
            Segment::new(
                Interval::new(f64::NEG_INFINITY, s.x_i),
                SegmentForm::Affine { offset: 0.0, slope: 1.0 },
            ),
            Segment::new(Interval::new(s.x_i, s.x_f), middle),
            Segment::new(
                Interval::new(s.x_f, f64::INFINITY),
                SegmentForm::Affine { offset: end.v - slope * s.x_f, slope },
            ),
        ],
        vec![s.x_i, s.x_f],
    )
}

/// `ρ = E_n / (ħ/(12π) - E_n L)`.
pub fn eta_rho(e_n: f64, l: f64, hbar: f64) -> f64 {
    e_n / (hbar / (12.0 * PI) - e_n * l)
}

/// The minimum-energy generator compatible with a negative shock `-E_n` at the
/// origin and no other flux before `L`: affine for `x < 0`, reciprocal-shift on
/// `[0, L)`, identity for `x >= L`.
pub fn make_f_eta(e_n: f64, l: f64, hbar: f64) -> Result<GeneratingFunction> {
    if !(hbar > 0.0) || !(l > 0.0) || !(e_n >= 0.0) || !l.is_finite() || !e_n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need E_n >= 0, L > 0, hbar > 0 (got {e_n}, {l}, {hbar})"
        )));
    }
    admissible(e_n, l, hbar)?;
    let rho = eta_rho(e_n, l, hbar);
    if rho == 0.0 {
        return Ok(make_identity());
    }
    let middle = SegmentForm::ReciprocalShift { anchor: l, value: l, gain: 1.0, rate: rho };
    let at0 = middle.jet(0.0);
    let slope = 1.0 / (rho * l + 1.0).powi(2);
    GeneratingFunction::from_segments(
        vec![
            Segment::new(
                Interval::new(f64::NEG_INFINITY, 0.0),
                SegmentForm::Affine { offset: at0.v, slope },
            ),
            Segment::new(Interval::new(0.0, l), middle),
            Segment::new(Interval::new(l, f64::INFINITY), SegmentForm::Affine { offset: 0.0, slope: 1.0 }),
        ],
        vec![0.0, l],
    )
}

/// Convolution `∫ f(x - y) φ_w(y) dy` with the bump
/// `φ_w(y) ∝ exp(-1/(1 - (y/w)²))` supported on `[-w, w]`.
#[derive(Debug, Clone)]
pub struct Mollified {
    pub base: GeneratingFunction,
    pub width: f64,
}

/// Panels per bump width in the convolution rule.
const MOLLIFIER_PANELS: f64 = 16.0;

fn bump_norm() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| GaussLegendre::g16().composite(|u| bump(u).0, -1.0, 1.0, 128))
}

/// `ψ(u) = exp(-1/(1-u²))` with its first two derivatives.
fn bump(u: f64) -> (f64, f64, f64) {
    let s = 1.0 - u * u;
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let psi = (-1.0 / s).exp();
    if psi == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let g1 = -2.0 * u / (s * s);
    let g2 = -2.0 / (s * s) - 8.0 * u * u / (s * s * s);
    (psi, psi * g1, psi * (g1 * g1 + g2))
}

impl Mollified {
    pub fn jet(&self, x: f64) -> Jet {
        let w = self.width;
        let mut cuts = vec![-w, w];
        for b in self.base.boundaries() {
            let y = x - b;
            if y > -w && y < w {
                cuts.push(y);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let centre = self.base.jet_extended(x).d1;
        let rule = GaussLegendre::g16();
        let (mut v0, mut v1, mut v2, mut v3) = (0.0, 0.0, 0.0, 0.0);
        for piece in cuts.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            if b <= a {
                continue;
            }
            let panels = ((MOLLIFIER_PANELS * (b - a) / (2.0 * w)).ceil() as usize).max(1);
            rule.for_each_node(a, b, panels, |y, wt| {
                let (p0, p1, p2) = bump(y / w);
                if p0 == 0.0 {
                    return;
                }
                let g = self.base.jet_extended(x - y);
                let dev = g.d1 - centre;
                v0 += wt * g.v * p0;
                v1 += wt * g.d1 * p0;
                v2 += wt * dev * p1;
                v3 += wt * dev * p2;
            });
        }
        let z = bump_norm();
        Jet::new(v0 / (w * z), v1 / (w * z), v2 / (w * w * z), v3 / (w * w * w * z))
    }
}

/// Smooth `f` by convolution with a bump of half-width `width`. Affine
/// stretches farther than `width` from any non-affine piece are kept exactly;
/// everything else becomes a single mollified segment per connected stretch.
/// The result is C^∞ and kink-free.
pub fn mollify(f: &GeneratingFunction, width: f64) -> Result<GeneratingFunction> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidParameter(format!("mollifier width must be positive, got {width}")));
    }
    let base = Arc::new(Mollified { base: f.clone(), width });
    let domain = f.domain();
    // exact affine stretches: [lo + w, hi - w] of affine segments, except at the domain ends
    let mut keep: Vec<Segment> = Vec::new();
    for s in f.segments() {
        if !s.form.is_affine() {
            continue;
        }
        let lo_cut = if s.interval.lo == domain.lo { s.interval.lo } else { s.interval.lo + width };
        let hi_cut = if s.interval.hi == domain.hi { s.interval.hi } else { s.interval.hi - width };
        if hi_cut > lo_cut {
            keep.push(Segment::new(Interval::new(lo_cut, hi_cut), s.form.clone()));
        }
    }
    let mut segments = Vec::new();
    let mut cursor = domain.lo;
    for s in keep {
        if s.interval.lo > cursor {
            segments.push(Segment::new(
                Interval::new(cursor, s.interval.lo),
                SegmentForm::Mollified(base.clone()),
            ));
        }
        cursor = s.interval.hi;
        segments.push(s);
    }
    if cursor < domain.hi {
        segments.push(Segment::new(Interval::new(cursor, domain.hi), SegmentForm::Mollified(base)));
    }
    GeneratingFunction::from_segments(segments, vec![])
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub min_slope: f64,
    pub min_slope_at: f64,
    pub max_c0_mismatch: f64,
    pub max_c1_mismatch: f64,
    pub asymptotics_ok: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn sample_points(iv: Interval) -> Vec<f64> {
    const DECADES: [f64; 8] = [0.0, 1e-3, 1e-1, 1.0, 1e1, 1e2, 1e4, 1e6];
    match (iv.lo.is_finite(), iv.hi.is_finite()) {
        (true, true) => {
            let n = 64;
            (0..=n).map(|i| iv.lo + iv.len() * i as f64 / n as f64).collect()
        }
        (true, false) => DECADES.iter().map(|d| iv.lo + d).collect(),
        (false, true) => DECADES.iter().map(|d| iv.hi - d).collect(),
        (false, false) => DECADES.iter().flat_map(|d| [-d, *d]).collect(),
    }
}

/// Check monotonicity on a dense sample (plus every segment endpoint), C⁰/C¹
/// matching at every boundary, and divergence of whole-line generators.
pub fn validate(f: &GeneratingFunction) -> ValidationReport {
    let mut report = ValidationReport {
        min_slope: f64::INFINITY,
        min_slope_at: f64::NAN,
        max_c0_mismatch: 0.0,
        max_c1_mismatch: 0.0,
        asymptotics_ok: true,
        failures: Vec::new(),
    };
    for s in f.segments() {
        for x in sample_points(s.interval) {
            let j = s.form.jet(x);
            if !j.v.is_finite() || !j.d1.is_finite() {
                report.failures.push(format!("non-finite value at x = {x}"));
                continue;
            }
            if j.d1 < report.min_slope {
                report.min_slope = j.d1;
                report.min_slope_at = x;
            }
        }
    }
    if !(report.min_slope > 0.0) {
        report.failures.push(format!(
            "not strictly increasing: f' = {} at x = {}",
            report.min_slope, report.min_slope_at
        ));
    }
    for w in f.segments().windows(2) {
        let b = w[0].interval.hi;
        let l = w[0].form.jet(b);
        let r = w[1].form.jet(b);
        let c0 = (l.v - r.v).abs() / l.v.abs().max(r.v.abs()).max(1.0);
        let c1 = (l.d1 - r.d1).abs() / l.d1.abs().max(r.d1.abs()).max(1.0);
        report.max_c0_mismatch = report.max_c0_mismatch.max(c0);
        report.max_c1_mismatch = report.max_c1_mismatch.max(c1);
        if !(c0 <= MATCH_TOL) {
            report.failures.push(format!("C0 violation at x = {b}: jump {}", r.v - l.v));
        }
        if !(c1 <= MATCH_TOL) {
            report.failures.push(format!("C1 violation at x = {b}: slope jump {}", r.d1 - l.d1));
        }
    }
    let d = f.domain();
    if d.is_whole_line() {
        let tails = [(&f.segments()[0], -1.0), (&f.segments()[f.segments().len() - 1], 1.0)];
        for (seg, side) in tails {
            let ok = match &seg.form {
                SegmentForm::Affine { slope, .. } => *slope > 0.0,
                SegmentForm::Moebius(p) if p.b == 0.0 => p.d / p.a > 0.0,
                form => {
                    let (x1, x2) = (side * 1e6, side * 2e6);
                    let (y1, y2) = (form.jet(x1).v, form.jet(x2).v);
                    let secant = (y2 - y1) / (x2 - x1);
                    y1.is_finite() && y2.is_finite() && secant > 1e-9
                }
            };
            if !ok {
                report.asymptotics_ok = false;
                let end = if side < 0.0 { "-inf" } else { "+inf" };
                report.failures.push(format!("f does not diverge towards {end}"));
            }
        }
    }
    report
}

/// JSON form of a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDoc {
    pub interval: [Option<f64>; 2],
    pub form: String,
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<GenFunDocument>>,
}

/// JSON document for a generating function; infinite interval ends are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenFunDocument {
    pub segments: Vec<SegmentDoc>,
    #[serde(default)]
    pub kinks: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
}

fn end_to_doc(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl GeneratingFunction {
    pub fn to_document(&self, hbar: Option<f64>) -> Result<GenFunDocument> {
        let mut segments = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            let (coeffs, base) = match &s.form {
                SegmentForm::Affine { offset, slope } => (vec![*offset, *slope], None),
                SegmentForm::Moebius(p) => (vec![p.a, p.b, p.c, p.d], None),
                SegmentForm::ReciprocalShift { anchor, value, gain, rate } => {
                    (vec![*anchor, *value, *gain, *rate], None)
                }
                SegmentForm::Mollified(m) => (vec![m.width], Some(Box::new(m.base.to_document(None)?))),
                SegmentForm::Numeric(_) => return Err(Error::NotSerializable("numeric")),
                SegmentForm::Analytic(_) => return Err(Error::NotSerializable("analytic")),
            };
            segments.push(SegmentDoc {
                interval: [end_to_doc(s.interval.lo), end_to_doc(s.interval.hi)],
                form: s.form.name().to_string(),
                coeffs,
                base,
            });
        }
        Ok(GenFunDocument { segments, kinks: self.kinks.clone(), hbar })
    }

    pub fn from_document(doc: &GenFunDocument) -> Result<Self> {
        // mollified segments of one document share a single base
        let mut shared: Option<Arc<Mollified>> = None;
        let mut segments = Vec::with_capacity(doc.segments.len());
        for s in &doc.segments {
            let lo = s.interval[0].unwrap_or(f64::NEG_INFINITY);
            let hi = s.interval[1].unwrap_or(f64::INFINITY);
            let need = |n: usize| -> Result<()> {
                if s.coeffs.len() != n {
                    return Err(Error::Malformed(format!(
                        "form `{}` takes {n} coefficients, got {}",
                        s.form,
                        s.coeffs.len()
                    )));
                }
                Ok(())
            };
            let c = &s.coeffs;
            let form = match s.form.as_str() {
                "affine" => {
                    need(2)?;
                    SegmentForm::Affine { offset: c[0], slope: c[1] }
                }
                "moebius" => {
                    need(4)?;
                    SegmentForm::Moebius(MobiusParams::new(c[0], c[1], c[2], c[3]))
                }
                "reciprocal-shift" => {
                    need(4)?;
                    SegmentForm::ReciprocalShift { anchor: c[0], value: c[1], gain: c[2], rate: c[3] }
                }
                "mollified" => {
                    need(1)?;
                    let base_doc = s
                        .base
                        .as_ref()
                        .ok_or_else(|| Error::Malformed("mollified segment without `base`".into()))?;
                    let m = match &shared {
                        Some(m) if m.width == c[0] => m.clone(),
                        _ => {
                            if !(c[0] > 0.0) {
                                return Err(Error::Malformed("mollifier width must be positive".into()));
                            }
                            let m = Arc::new(Mollified { base: GeneratingFunction::from_document(base_doc)?, width: c[0] });
                            shared = Some(m.clone());
                            m
                        }
                    };
                    SegmentForm::Mollified(m)
                }
                other => return Err(Error::Malformed(format!("unknown segment form `{other}`"))),
            };
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Malformed("non-finite coefficient".into()));
            }
            segments.push(Segment::new(Interval::new(lo, hi), form));
        }
        GeneratingFunction::from_segments(segments, doc.kinks.clone())
    }

    pub fn to_json(&self, hbar: Option<f64>) -> Result<String> {
        let doc = self.to_document(hbar)?;
        serde_json::to_string(&doc).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<(Self, Option<f64>)> {
        let doc: GenFunDocument = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Ok((GeneratingFunction::from_document(&doc)?, doc.hbar))
    }
}
