//! Mode functions, Klein–Gordon overlaps of wavepackets, correlators, and the
//! point-splitting estimate of the flux.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::GeneratingFunction;
use crate::quadrature::GaussLegendre;
use crate::PI;

fn amplitude(omega: f64, hbar: f64) -> f64 {
    (hbar / (4.0 * PI * omega)).sqrt()
}

/// `sqrt(ħ/4πω) e^{-iω xp}`.
pub fn plane_mode(omega: f64, xp: f64, hbar: f64) -> Complex64 {
    Complex64::from_polar(amplitude(omega, hbar), -omega * xp)
}

/// `sqrt(ħ/4πω) e^{-iω f(x)}`.
pub fn deformed_mode(f: &GeneratingFunction, omega: f64, x: f64, hbar: f64) -> Result<Complex64> {
    Ok(plane_mode(omega, f.value(x)?, hbar))
}

/// In-mode of a perfect mirror at `x = 0`: `Θ(x) [m(t + x) - m(t - x)]`.
pub fn mirror_mode(
    omega: f64,
    t: f64,
    x: f64,
    hbar: f64,
    generator: Option<&GeneratingFunction>,
) -> Result<Complex64> {
    if x <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = |u: f64| match generator {
        Some(f) => deformed_mode(f, omega, u, hbar),
        None => Ok(plane_mode(omega, u, hbar)),
    };
    Ok(m(t + x)? - m(t - x)?)
}

/// Which half of the mode basis a packet is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    /// superposition of `v_ω`
    Positive,
    /// superposition of `v_ω*`
    Conjugate,
}

/// A Gaussian superposition `∫ g(ω) v_ω dω` with
/// `g(ω) = (2πσ²)^{-1/4} exp(-(ω - ω₀)²/(4σ²))`, so `∫ g² = 1`.
#[derive(Debug, Clone)]
pub struct Wavepacket {
    pub center_omega: f64,
    pub bandwidth: f64,
    pub sector: Sector,
    pub generator: Option<GeneratingFunction>,
}

/// Frequency range kept on each side of the centre, in bandwidths.
const OMEGA_SPAN: f64 = 12.0;
/// Half-width of the kept range of `y = f(x)`, in units of `1/σ`.
const Y_SPAN: f64 = 6.0;

impl Wavepacket {
    pub fn new(
        center_omega: f64,
        bandwidth: f64,
        sector: Sector,
        generator: Option<GeneratingFunction>,
    ) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if !(center_omega >= 8.0 * bandwidth) || !center_omega.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "center_omega = {center_omega} must be at least 8 bandwidths ({})",
                8.0 * bandwidth
            )));
        }
        Ok(Wavepacket { center_omega, bandwidth, sector, generator })
    }

    pub fn weight(&self, omega: f64) -> f64 {
        let s = self.bandwidth;
        (2.0 * PI * s * s).powf(-0.25) * (-(omega - self.center_omega).powi(2) / (4.0 * s * s)).exp()
    }

    fn omega_range(&self) -> (f64, f64) {
        let half = OMEGA_SPAN * self.bandwidth;
        ((self.center_omega - half).max(0.0), self.center_omega + half)
    }
}

/// Closed-form overlap of two packets sharing a generator. The substitution
/// `y = f(x)` removes the generator, leaving `±∫ g₁ g₂ dω` within a sector
/// and zero across sectors.
pub fn packet_overlap_closed_form(p1: &Wavepacket, p2: &Wavepacket) -> Complex64 {
    if p1.sector != p2.sector {
        return Complex64::new(0.0, 0.0);
    }
    let (s, t) = (p1.bandwidth * p1.bandwidth, p2.bandwidth * p2.bandwidth);
    let norm = (2.0 * PI * s).powf(-0.25) * (2.0 * PI * t).powf(-0.25);
    let d = p1.center_omega - p2.center_omega;
    let v = norm * (4.0 * PI * s * t / (s + t)).sqrt() * (-d * d / (4.0 * (s + t))).exp();
    let sign = match p1.sector {
        Sector::Positive => 1.0,
        Sector::Conjugate => -1.0,
    };
    Complex64::new(sign * v, 0.0)
}

/// Frequency nodes with `g(ω) sqrt(ħ/4πω)` folded into the weights.
struct PacketTable {
    omegas: Vec<f64>,
    weights: Vec<f64>,
}

impl PacketTable {
    fn new(p: &Wavepacket, y_max: f64, hbar: f64) -> Self {
        let (lo, hi) = p.omega_range();
        // about two panels per oscillation of e^{-iωy} over the kept range of y
        let panels = ((hi - lo) * y_max / PI).ceil() as usize + 8;
        let mut omegas = Vec::with_capacity(16 * panels);
        let mut weights = Vec::with_capacity(16 * panels);
        GaussLegendre::g16().for_each_node(lo, hi, panels, |w, wt| {
            omegas.push(w);
            weights.push(wt * p.weight(w) * amplitude(w, hbar));
        });
        PacketTable { omegas, weights }
    }

    /// Positive-sector profile `Ψ(y)` and `Ψ'(y)`.
    fn profile(&self, y: f64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for (&w, &a) in self.omegas.iter().zip(&self.weights) {
            let e = Complex64::from_polar(a, -w * y);
            v += e;
            d += e * Complex64::new(0.0, -w);
        }
        (v, d)
    }
}

fn map_inverse(f: Option<&GeneratingFunction>, y: f64) -> Result<f64> {
    match f {
        None => Ok(y),
        Some(f) => f
            .inverse(y)
            .map_err(|e| Error::TruncationFailure(format!("cannot bracket f^-1({y}): {e}"))),
    }
}

fn map_forward(f: Option<&GeneratingFunction>, x: f64) -> Result<(f64, f64)> {
    match f {
        None => Ok((x, 1.0)),
        Some(f) => {
            let j = f.jet(x)?;
            Ok((j.v, j.d1))
        }
    }
}

/// Quadrature nodes in `x` covering `f(x) ∈ [-y_max, y_max]`: panels uniform
/// in `y`, mapped back through `f⁻¹`, split at kinks.
fn x_nodes(f: Option<&GeneratingFunction>, y_max: f64, omega_max: f64) -> Result<Vec<(f64, f64)>> {
    let panels = ((2.0 * y_max * omega_max / (2.0 * PI)).ceil() as usize).max(8);
    let mut cuts = Vec::with_capacity(panels + 1);
    for k in 0..=panels {
        let y = -y_max + 2.0 * y_max * k as f64 / panels as f64;
        cuts.push(map_inverse(f, y)?);
    }
    if let Some(f) = f {
        let (lo, hi) = (cuts[0], cuts[panels]);
        cuts.extend(f.kinks().iter().copied().filter(|&k| k > lo && k < hi));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
    }
    let mut nodes = Vec::with_capacity(16 * cuts.len());
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            GaussLegendre::g16().for_each_node(w[0], w[1], 1, |x, wt| nodes.push((x, wt)));
        }
    }
    Ok(nodes)
}

fn same_kind(p: &Wavepacket, q: &Wavepacket) -> Result<()> {
    if p.generator.is_some() != q.generator.is_some() {
        return Err(Error::InvalidParameter(
            "packets must share a generator kind (both plane or both deformed)".into(),
        ));
    }
    Ok(())
}

/// Klein–Gordon matrix `(i/ħ) ∫ [ψ_j* ∂ψ_k - ∂ψ_j* ψ_k] dx` for packets that
/// share the first packet's generator.
pub fn gram_matrix(packets: &[Wavepacket], hbar: f64) -> Result<Vec<Vec<Complex64>>> {
    if packets.is_empty() {
        return Ok(Vec::new());
    }
    for p in &packets[1..] {
        same_kind(&packets[0], p)?;
    }
    let sigma_min = packets.iter().map(|p| p.bandwidth).fold(f64::INFINITY, f64::min);
    let omega_max = packets.iter().map(|p| p.omega_range().1).fold(0.0, f64::max);
    let y_max = Y_SPAN / sigma_min;
    let grid_gen = packets[0].generator.as_ref();
    let nodes = x_nodes(grid_gen, y_max, omega_max)?;
    let (x_lo, x_hi) = (nodes[0].0, nodes[nodes.len() - 1].0);

    let mut fields: Vec<Vec<(Complex64, Complex64)>> = Vec::with_capacity(packets.len());
    for p in packets {
        let gen = p.generator.as_ref();
        // every packet must have decayed at both ends of the shared range
        let (y_lo, _) = map_forward(gen, x_lo)?;
        let (y_hi, _) = map_forward(gen, x_hi)?;
        let need = 0.99 * Y_SPAN / p.bandwidth;
        if y_lo > -need || y_hi < need {
            return Err(Error::TruncationFailure(format!(
                "packet at ω₀ = {} not contained in x ∈ [{x_lo}, {x_hi}]",
                p.center_omega
            )));
        }
        let table = PacketTable::new(p, y_max.max(y_lo.abs()).max(y_hi.abs()), hbar);
        let mut vals = Vec::with_capacity(nodes.len());
        for &(x, _) in &nodes {
            let (y, fp) = map_forward(gen, x)?;
            let (v, d) = table.profile(y);
            let (v, d) = (v, d * fp);
            vals.push(match p.sector {
                Sector::Positive => (v, d),
                Sector::Conjugate => (v.conj(), d.conj()),
            });
        }
        fields.push(vals);
    }
    let i_over_hbar = Complex64::new(0.0, 1.0 / hbar);
    let n = packets.len();
    let mut g = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &(_, wt)) in nodes.iter().enumerate() {
                let (vj, dj) = fields[j][m];
                let (vk, dk) = fields[k][m];
                acc += (vj.conj() * dk - dj.conj() * vk) * wt;
            }
            g[j][k] = i_over_hbar * acc;
        }
    }
    Ok(g)
}

/// Numerical Klein–Gordon product of two packets.
pub fn kg_inner(p1: &Wavepacket, p2: &Wavepacket, hbar: f64) -> Result<Complex64> {
    same_kind(p1, p2)?;
    Ok(gram_matrix(&[p1.clone(), p2.clone()], hbar)?[0][1])
}

/// `⟨∂φ(x₁) ∂φ(x₂)⟩ = -(ħ/4π) f'(x₁) f'(x₂) / (f(x₁) - f(x₂))²`.
pub fn two_point(f: &GeneratingFunction, x1: f64, x2: f64, hbar: f64) -> Result<f64> {
    if x1 == x2 {
        return Err(Error::CoincidentPoints { x: x1 });
    }
    let a = f.jet(x1)?;
    let b = f.jet(x2)?;
    let d = a.v - b.v;
    if d == 0.0 {
        return Err(Error::CoincidentPoints { x: x1 });
    }
    Ok(-hbar / (4.0 * PI) * a.d1 * b.d1 / (d * d))
}

/// The mode sum regularized by `e^{-ω δ_c}`:
/// `(ħ/4π) f₁' f₂' Re[1/(δ_c + iΔf)²]`. Tends to [`two_point`] as `δ_c → 0`.
pub fn damped_two_point(f: &GeneratingFunction, x1: f64, x2: f64, cutoff: f64, hbar: f64) -> Result<f64> {
    let a = f.jet(x1)?;
    let b = f.jet(x2)?;
    let d = a.v - b.v;
    let c2 = cutoff * cutoff;
    let den = c2 + d * d;
    if den == 0.0 {
        return Err(Error::CoincidentPoints { x: x1 });
    }
    Ok(hbar / (4.0 * PI) * a.d1 * b.d1 * (c2 - d * d) / (den * den))
}

/// Four-point function of the Gaussian state by Wick pairing.
pub fn wick_four_point(f: &GeneratingFunction, xs: [f64; 4], hbar: f64) -> Result<f64> {
    for i in 0..4 {
        for j in i + 1..4 {
            if xs[i] == xs[j] {
                return Err(Error::CoincidentPoints { x: xs[i] });
            }
        }
    }
    let g = |i: usize, j: usize| two_point(f, xs[i], xs[j], hbar);
    Ok(g(0, 1)? * g(2, 3)? + g(0, 2)? * g(1, 3)? + g(0, 3)? * g(1, 2)?)
}

/// `⟨∂φ(x)⟩`. Every state here is annihilated by its own mode operators, so
/// the unpaired mode sum has no c-number part.
pub fn one_point(_f: &GeneratingFunction, _x: f64, _hbar: f64) -> f64 {
    0.0
}

/// Point-splitting configuration. Offsets are in units of the local length
/// scale `|f'/f''|` clamped to `[1e-4, 1]`. A zero cutoff takes the damping
/// limit analytically; a positive one uses [`damped_two_point`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitParams {
    pub cutoff_delta: f64,
    pub split_offsets: Vec<f64>,
    pub extrapolation_order: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams { cutoff_delta: 0.0, split_offsets: vec![1e-2, 5e-3, 2.5e-3], extrapolation_order: 3 }
    }
}

impl SplitParams {
    fn check(&self) -> Result<()> {
        let o = &self.split_offsets;
        if o.is_empty() || !o.iter().all(|&d| d > self.cutoff_delta && d.is_finite()) {
            return Err(Error::InvalidParameter("split offsets must be finite and exceed the cutoff".into()));
        }
        if !o.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("split offsets must be strictly decreasing".into()));
        }
        if self.extrapolation_order == 0 || self.extrapolation_order > o.len() {
            return Err(Error::InvalidParameter(format!(
                "extrapolation order {} needs that many offsets (have {})",
                self.extrapolation_order,
                o.len()
            )));
        }
        if !(self.cutoff_delta >= 0.0) {
            return Err(Error::InvalidParameter("cutoff must be non-negative".into()));
        }
        Ok(())
    }
}

/// Outcome of [`point_split_flux`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSplit {
    pub value: f64,
    /// vacuum-subtracted correlator at each offset
    pub estimates: Vec<f64>,
    /// absolute offsets actually used
    pub offsets: Vec<f64>,
}

/// Polynomial extrapolation of `(h_i, a_i)` to `h = 0` (Neville).
fn extrapolate_to_zero(h: &[f64], a: &[f64]) -> f64 {
    let mut p = a.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
    }
    p[0]
}

/// Flux from the coincidence limit of the vacuum-subtracted correlator
/// `⟨∂φ(x+δ)∂φ(x)⟩_f - ⟨∂φ(x+δ)∂φ(x)⟩_vac`, extrapolated to `δ → 0`.
pub fn point_split_flux(f: &GeneratingFunction, x: f64, sp: &SplitParams, hbar: f64) -> Result<PointSplit> {
    sp.check()?;
    if f.is_kink(x) {
        return Err(Error::KinkEvaluation { x });
    }
    let j = f.jet(x)?;
    if !(j.d1 > 0.0) {
        return Err(Error::NonMonotone { x, slope: j.d1 });
    }
    let scale = if j.d2 == 0.0 { 1.0 } else { (j.d1 / j.d2).abs().clamp(1e-4, 1.0) };
    // offsets exactly representable as (x + δ) - x
    let offsets: Vec<f64> = sp.split_offsets.iter().map(|d| (x + d * scale) - x).collect();
    let reach = x + offsets[0];
    if let Some(&k) = f.kinks().iter().find(|&&k| k > x && k <= reach) {
        return Err(Error::KinkEvaluation { x: k });
    }
    let ident = crate::genfun::make_identity();
    let mut estimates = Vec::with_capacity(offsets.len());
    for &d in &offsets {
        let e = if sp.cutoff_delta > 0.0 {
            let c = sp.cutoff_delta * scale;
            damped_two_point(f, x + d, x, c, hbar)? - damped_two_point(&ident, x + d, x, c, hbar)?
        } else {
            let b = f.jet(x + d)?;
            // Δf as ∫ f' over [x, x+δ]; differencing values loses ε|f|/δ
            let mut df = 0.0;
            let mut bad = None;
            GaussLegendre::g16().for_each_node(x, x + d, 1, |t, w| match f.jet(t) {
                Ok(jt) => df += w * jt.d1,
                Err(e) => bad = Some(e),
            });
            if let Some(e) = bad {
                return Err(e);
            }
            -hbar / (4.0 * PI) * (b.d1 * j.d1 / (df * df) - 1.0 / (d * d))
        };
        estimates.push(e);
    }
    let n = sp.extrapolation_order;
    let (h, a) = (&offsets[..n], &estimates[..n]);
    if a.len() >= 3 {
        let d1 = (a[1] - a[0]).abs();
        let d2 = (a[2] - a[1]).abs();
        // rounding in the subtraction of two O(1/δ²) terms
        let dmin = h[2];
        let floor = 64.0 * f64::EPSILON * hbar / (4.0 * PI * dmin * dmin) * (1.0 + j.v.abs() / (dmin * j.d1));
        if d2 > d1 && d2 > 1e-6 * a[2].abs() + floor {
            return Err(Error::ExtrapolationDivergence { estimates: estimates.clone() });
        }
    }
    let value = extrapolate_to_zero(h, a) + 0.0;
    Ok(PointSplit { value, estimates, offsets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::flux_density;
    use crate::genfun::*;
    use crate::jet::Jet;
    use std::sync::Arc;

    fn analytic(g: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> GeneratingFunction {
        let g: AnalyticFn = Arc::new(g);
        GeneratingFunction::from_segments(vec![Segment::new(Interval::WHOLE_LINE, SegmentForm::Analytic(g))], vec![]).unwrap()
    }

    #[test]
    fn plane_mode_at_origin() {
        let m = plane_mode(1.0, 0.0, 1.0);
        assert!((m.re - 0.282_094_8).abs() < 1e-7);
        assert_eq!(m.im, 0.0);
        assert!((plane_mode(3.0, 1.7, 1.0).norm() - plane_mode(3.0, -4.0, 1.0).norm()).abs() < 1e-15);
    }

    #[test]
    fn mirror_mode_values() {
        let m = mirror_mode(1.0, 0.0, PI / 2.0, 1.0, None).unwrap();
        let want = -2.0 * (1.0 / (4.0 * PI)).sqrt();
        assert!(m.re.abs() < 1e-15 && (m.im - want).abs() < 1e-15);
        assert_eq!(mirror_mode(2.0, 0.3, 0.0, 1.0, None).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(mirror_mode(2.0, 0.3, -1.0, 1.0, None).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn vacuum_two_point() {
        let id = make_identity();
        assert!((two_point(&id, 1.0, 0.0, 1.0).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-16);
        let twice = make_affine(0.0, 2.0).unwrap();
        assert!((two_point(&twice, 0.0, 1.0, 1.0).unwrap() + 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert_eq!(two_point(&id, 0.5, 0.5, 1.0), Err(Error::CoincidentPoints { x: 0.5 }));
    }

    #[test]
    fn damped_correlator_tends_to_two_point() {
        let f = analytic(|x| x.sinh() + x * 2.0);
        let exact = two_point(&f, 0.4, -0.1, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for c in [1e-1, 1e-2, 1e-3, 1e-4] {
            let err = (damped_two_point(&f, 0.4, -0.1, c, 1.0).unwrap() - exact).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-6 * exact.abs());
    }

    #[test]
    fn wick_pairings() {
        let id = make_identity();
        let g = |d: f64| -1.0 / (4.0 * PI * d * d);
        let want = g(1.0) * g(1.0) + g(2.0) * g(2.0) + g(3.0) * g(1.0);
        let got = wick_four_point(&id, [0.0, 1.0, 2.0, 3.0], 1.0).unwrap();
        assert!((got - want).abs() < 1e-16);
        let perm = wick_four_point(&id, [2.0, 0.0, 3.0, 1.0], 1.0).unwrap();
        assert!((perm - got).abs() < 1e-16);
    }

    #[test]
    fn point_split_on_exponential() {
        let f = analytic(|x| x.exp());
        let ps = point_split_flux(&f, 0.0, &SplitParams::default(), 1.0).unwrap();
        let want = 1.0 / (48.0 * PI);
        assert!(((ps.value - want) / want).abs() < 1e-6, "{ps:?}");
        let id = make_identity();
        assert!(point_split_flux(&id, 0.3, &SplitParams::default(), 1.0).unwrap().value.abs() < 1e-10);
    }

    #[test]
    fn point_split_matches_schwarzian_on_blends() {
        let gens = [
            analytic(|x| x.sinh() + x),
            analytic(|x| x + (x * 3.0).tanh() * 0.4),
            analytic(|x| x * 1.5 + x.atan()),
        ];
        for f in &gens {
            for x in [-0.7, 0.1, 0.45] {
                let a = flux_density(f, x, 1.0).unwrap();
                let o = point_split_flux(f, x, &SplitParams::default(), 1.0).unwrap().value;
                assert!((o - a).abs() / a.abs().max(1e-12) < 1e-4, "x = {x}: {o} vs {a}");
            }
        }
    }

    #[test]
    fn point_split_refuses_kinks() {
        let f = make_shock(&ShockParams::new(0.01, 0.0, 1.0, 1.0)).unwrap();
        assert!(matches!(point_split_flux(&f, 0.0, &SplitParams::default(), 1.0), Err(Error::KinkEvaluation { .. })));
        let v = point_split_flux(&f, 0.5, &SplitParams::default(), 1.0).unwrap().value;
        assert!(v.abs() < 1e-8);
    }

    #[test]
    fn packet_norms_and_orthogonality() {
        let p = Wavepacket::new(10.0, 1.0, Sector::Positive, None).unwrap();
        let q = Wavepacket::new(30.0, 1.0, Sector::Positive, None).unwrap();
        let c = Wavepacket::new(10.0, 1.0, Sector::Conjugate, None).unwrap();
        let g = gram_matrix(&[p.clone(), q, c.clone()], 1.0).unwrap();
        assert!((g[0][0] - 1.0).norm() < 1e-6, "{:?}", g[0][0]);
        assert!((g[1][1] - 1.0).norm() < 1e-6);
        assert!((g[2][2] + 1.0).norm() < 1e-6);
        assert!(g[0][1].norm() < 1e-6 && g[0][2].norm() < 1e-6 && g[1][2].norm() < 1e-6);
        assert!(Wavepacket::new(5.0, 1.0, Sector::Positive, None).is_err());
        // nearby centres: match the Gaussian overlap
        let r = Wavepacket::new(12.0, 1.5, Sector::Positive, None).unwrap();
        let num = kg_inner(&p, &r, 1.0).unwrap();
        let cf = packet_overlap_closed_form(&p, &r);
        assert!((num - cf).norm() < 1e-6, "{num} vs {cf}");
    }

    #[test]
    fn deformed_packets_keep_their_overlaps() {
        let f = make_shock(&ShockParams::new(0.01, -0.5, 0.5, 1.0)).unwrap();
        let p = Wavepacket::new(10.0, 1.0, Sector::Positive, Some(f.clone())).unwrap();
        let r = Wavepacket::new(11.0, 1.0, Sector::Positive, Some(f)).unwrap();
        let num = kg_inner(&p, &r, 1.0).unwrap();
        let cf = packet_overlap_closed_form(&p, &r);
        assert!((num - cf).norm() < 1e-6, "{num} vs {cf}");
        let plain = Wavepacket::new(10.0, 1.0, Sector::Positive, None).unwrap();
        assert!(kg_inner(&p, &plain, 1.0).is_err());
    }
}
