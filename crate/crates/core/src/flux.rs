//! Renormalized energy flux `⟨T⟩ = -(ħ/24π) S(f)` of a squeezed state,
//! with the distributional terms carried by kinks of `f`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genfun::{GeneratingFunction, Interval, SegmentForm};
use crate::jet::Jet;
use crate::quadrature::{integrate, QuadOptions};
use crate::{fmt17, PI};

fn check_slope(j: &Jet, x: f64) -> Result<()> {
    if !(j.d1 > 0.0) {
        return Err(Error::NonMonotone { x, slope: j.d1 });
    }
    Ok(())
}

/// `f'''/f' - 3/2 (f''/f')²` at `x`.
pub fn schwarzian(f: &GeneratingFunction, x: f64) -> Result<f64> {
    if f.is_kink(x) {
        return Err(Error::KinkEvaluation { x });
    }
    let (_, (j, s)) = f.one_sided_schwarzian(x)?;
    check_slope(&j, x)?;
    Ok(s)
}

fn density_of(s: f64, hbar: f64) -> f64 {
    let t = -hbar / (24.0 * PI) * s;
    if t == 0.0 {
        0.0
    } else {
        t
    }
}

/// Smooth flux density at a non-kink point.
pub fn flux_density(f: &GeneratingFunction, x: f64, hbar: f64) -> Result<f64> {
    Ok(-hbar / (24.0 * PI) * schwarzian(f, x)? + 0.0)
}

/// A point-supported contribution `weight · δ(x - location)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaTerm {
    pub location: f64,
    pub weight: f64,
}

/// Weights `-(ħ/24π) (f''(x⁺) - f''(x⁻)) / f'(x)` at each declared kink.
pub fn delta_terms(f: &GeneratingFunction, hbar: f64) -> Vec<DeltaTerm> {
    f.kinks()
        .iter()
        .map(|&x| {
            let (l, r) = f.one_sided(x).expect("kinks lie inside the domain");
            DeltaTerm { location: x, weight: -hbar / (24.0 * PI) * (r.d2 - l.d2) / r.d1 }
        })
        .collect()
}

/// Flux of one state: a smooth density plus delta terms.
#[derive(Debug, Clone)]
pub struct FluxProfile {
    pub generator: GeneratingFunction,
    pub hbar: f64,
    pub deltas: Vec<DeltaTerm>,
    pub domain: Interval,
}

pub fn flux_profile(f: &GeneratingFunction, hbar: f64) -> Result<FluxProfile> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    Ok(FluxProfile { generator: f.clone(), hbar, deltas: delta_terms(f, hbar), domain: f.domain() })
}

impl FluxProfile {
    /// Smooth density; at a kink the two one-sided limits are averaged.
    pub fn density(&self, x: f64) -> Result<f64> {
        let ((_, sl), (r, sr)) = self.generator.one_sided_schwarzian(x)?;
        check_slope(&r, x)?;
        if self.generator.is_kink(x) {
            Ok(0.5 * (density_of(sl, self.hbar) + density_of(sr, self.hbar)))
        } else {
            Ok(density_of(sr, self.hbar))
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|&x| Ok((x, self.density(x)?))).collect()
    }

    /// CSV with header `x,density`.
    pub fn to_csv(&self, xs: &[f64]) -> Result<String> {
        let mut out = String::from("x,density\n");
        for (x, d) in self.sample(xs)? {
            out.push_str(&format!("{},{}\n", fmt17(x), fmt17(d)));
        }
        Ok(out)
    }

    /// Sidecar `{"deltas":[[x,w],...]}`.
    pub fn deltas_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.deltas.iter().map(|d| [d.location, d.weight]).collect();
        serde_json::json!({ "deltas": pairs }).to_string()
    }
}

/// Integral of the flux over `interval`: the smooth density by adaptive
/// quadrature, plus every delta inside, with half weight on an endpoint.
/// Möbius-type segments carry no density and are skipped, so infinite ranges
/// are exact whenever both tails are affine.
pub fn total_energy(p: &FluxProfile, interval: Interval) -> Result<f64> {
    let (a, b) = (interval.lo, interval.hi);
    if !(a <= b) {
        return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    let opts = QuadOptions::default();
    let mut total = 0.0;
    for seg in p.generator.segments() {
        if seg.form.is_projective() {
            continue;
        }
        let lo = seg.interval.lo.max(a);
        let hi = seg.interval.hi.min(b);
        if !(hi > lo) {
            continue;
        }
        let form: &SegmentForm = &seg.form;
        let hbar = p.hbar;
        let mut slope_fail = None;
        let r = integrate(
            |x| {
                let (j, s) = form.schwarzian(x);
                if !(j.d1 > 0.0) && slope_fail.is_none() {
                    slope_fail = Some((x, j.d1));
                }
                density_of(s, hbar)
            },
            lo,
            hi,
            &[],
            opts,
        )?;
        if let Some((x, slope)) = slope_fail {
            return Err(Error::NonMonotone { x, slope });
        }
        total += r.value;
    }
    for d in &p.deltas {
        if d.location > a && d.location < b {
            total += d.weight;
        } else if d.location == a || d.location == b {
            total += 0.5 * d.weight;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::*;
    use std::sync::Arc;

    #[test]
    fn exponential_density() {
        let exp: NumericFn = Arc::new(f64::exp);
        let f = GeneratingFunction::from_segments(vec![Segment::new(Interval::WHOLE_LINE, SegmentForm::Numeric(exp))], vec![])
            .unwrap();
        let t = flux_density(&f, 0.0, 1.0).unwrap();
        assert!((t - 1.0 / (48.0 * PI)).abs() < 1e-8);
        assert!((t - 0.006_631_46).abs() < 1e-8);
    }

    #[test]
    fn kink_evaluation_is_rejected() {
        let f = make_shock(&ShockParams::new(0.01, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(flux_density(&f, 0.0, 1.0), Err(Error::KinkEvaluation { x: 0.0 }));
        assert_eq!(flux_density(&f, 0.5, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn shock_deltas_and_total() {
        let f = make_shock(&ShockParams::new(0.01, 0.0, 1.0, 1.0)).unwrap();
        let d = delta_terms(&f, 1.0);
        assert_eq!(d.len(), 2);
        assert!((d[0].weight + 0.01).abs() < 1e-15);
        let pos = 0.01 / (1.0 - 12.0 * PI * 0.01);
        assert!((d[1].weight - pos).abs() < 1e-15);
        assert!((d[1].weight - 0.016_051_1).abs() < 1e-7);
        let p = flux_profile(&f, 1.0).unwrap();
        let e = total_energy(&p, Interval::WHOLE_LINE).unwrap();
        assert!((e - (pos - 0.01)).abs() < 1e-15);
        // half weight at an endpoint
        let half = total_energy(&p, Interval::new(0.0, 0.5)).unwrap();
        assert!((half + 0.005).abs() < 1e-15);
        assert_eq!(p.density(1.0).unwrap(), 0.0);
    }

    #[test]
    fn f_eta_deltas() {
        let f = make_f_eta(0.01, 1.0, 1.0).unwrap();
        let d = delta_terms(&f, 1.0);
        assert!((d[0].weight + 0.01).abs() < 1e-15);
        assert!((d[1].weight - 0.01 / (1.0 - 12.0 * PI * 0.01)).abs() < 1e-15);
    }

    #[test]
    fn mollified_windows_approach_weights() {
        let s = ShockParams::new(0.01, 0.0, 1.0, 1.0);
        let f = make_shock(&s).unwrap();
        let w = s.length() / 100.0;
        let g = mollify(&f, w).unwrap();
        let p = flux_profile(&g, 1.0).unwrap();
        assert!(p.deltas.is_empty());
        let neg = total_energy(&p, Interval::new(-5.0 * w, 5.0 * w)).unwrap();
        let pos = total_energy(&p, Interval::new(1.0 - 5.0 * w, 1.0 + 5.0 * w)).unwrap();
        let want = delta_terms(&f, 1.0);
        assert!(((neg - want[0].weight) / want[0].weight).abs() < 0.01, "{neg}");
        assert!(((pos - want[1].weight) / want[1].weight).abs() < 0.01, "{pos}");
        let whole = total_energy(&p, Interval::WHOLE_LINE).unwrap();
        let exact = want[0].weight + want[1].weight;
        assert!(((whole - exact) / exact).abs() < 0.01, "{whole} vs {exact}");
    }

    #[test]
    fn csv_and_sidecar() {
        let f = make_shock(&ShockParams::new(0.01, 0.0, 1.0, 1.0)).unwrap();
        let p = flux_profile(&f, 1.0).unwrap();
        let csv = p.to_csv(&[-1.0, 0.5]).unwrap();
        assert!(csv.starts_with("x,density\n"));
        assert_eq!(csv.lines().count(), 3);
        let v: serde_json::Value = serde_json::from_str(&p.deltas_json()).unwrap();
        assert_eq!(v["deltas"][0][0], 0.0);
        assert!((v["deltas"][0][1].as_f64().unwrap() + 0.01).abs() < 1e-15);
    }
}
