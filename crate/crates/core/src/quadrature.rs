//! Numerical integration.
//!
//! [`integrate`] is a globally adaptive Gauss–Kronrod (7/15) integrator that
//! accepts forced breakpoints and semi-infinite or infinite ranges. The
//! breakpoints are where generating functions have kinks, so no panel ever
//! straddles a discontinuity of the integrand's derivative.
//!
//! [`GaussLegendre`] provides fixed composite rules for integrands that are
//! evaluated millions of times (mollifier convolutions, wavepacket overlaps)
//! and whose smoothness is known in advance.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]` (endpoints may be infinite), splitting first at
/// every breakpoint strictly inside the range.
pub fn integrate<F>(mut f: F, a: f64, b: f64, breakpoints: &[f64], opts: QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    if a > b {
        let r = integrate(f, b, a, breakpoints, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b && p.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut total = QuadResult { value: 0.0, error: 0.0, intervals: 0 };
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let r = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => adapt(&mut f, lo, hi, opts)?,
            // x = lo + t/(1-t), t in [0, 1)
            (true, false) => adapt(
                &mut |t: f64| {
                    let s = 1.0 - t;
                    f(lo + t / s) / (s * s)
                },
                0.0,
                1.0,
                opts,
            )?,
            // x = hi - t/(1-t)
            (false, true) => adapt(
                &mut |t: f64| {
                    let s = 1.0 - t;
                    f(hi - t / s) / (s * s)
                },
                0.0,
                1.0,
                opts,
            )?,
            // x = t/(1-t^2), t in (-1, 1)
            (false, false) => adapt(
                &mut |t: f64| {
                    let s = 1.0 - t * t;
                    f(t / s) * (1.0 + t * t) / (s * s)
                },
                -1.0,
                1.0,
                opts,
            )?,
        };
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    Ok(total)
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    let (v, e) = kronrod15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut value = v;
    let mut error = e;
    let mut count = 1;
    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure { lo: a, hi: b, estimate: value, error });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult { value, error, intervals: count });
        }
        if count >= opts.max_intervals {
            return Err(Error::QuadratureFailure { lo: a, hi: b, estimate: value, error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel cannot be split further in floating point
            return Err(Error::QuadratureFailure { lo: a, hi: b, estimate: value, error });
        }
        let (v1, e1) = kronrod15(f, worst.a, mid);
        let (v2, e2) = kronrod15(f, mid, worst.b);
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
        if count % 64 == 0 {
            // resum to keep the running totals free of drift
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes via Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// The shared 16-point rule.
    pub fn g16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Composite rule: `panels` equal panels on `[a, b]`, calling `visit(x, w)`
    /// for every node with its weight.
    pub fn for_each_node<V: FnMut(f64, f64)>(&self, a: f64, b: f64, panels: usize, mut visit: V) {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                visit(c + 0.5 * h * x, 0.5 * h * w);
            }
        }
    }

    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let mut s = 0.0;
        self.for_each_node(a, b, panels, |x, w| s += w * f(x));
        s
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_on_high_degree_polynomials() {
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7), -1.0, 1.0, &[], QuadOptions::default()).unwrap();
        assert!((r.value - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], QuadOptions::default()).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
        assert_eq!(r.intervals, 2);
    }

    #[test]
    fn infinite_ranges() {
        let opts = QuadOptions::default();
        let g = integrate(|x: f64| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &[], opts).unwrap();
        assert!((g.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        let e = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &[], opts).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        let l = integrate(|x: f64| 1.0 / (1.0 + x * x), f64::NEG_INFINITY, 0.0, &[], opts).unwrap();
        assert!((l.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn non_integrable_reports_failure() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, &[], QuadOptions::default());
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x| x, 1.0, 0.0, &[], QuadOptions::default()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        for n in [1, 2, 5, 16, 33] {
            let g = GaussLegendre::new(n);
            let w: f64 = g.weights.iter().sum();
            assert!((w - 2.0).abs() < 1e-13, "n = {n}");
            // x^(2n-2) is the highest even power integrated exactly
            let k = 2 * n as i32 - 2;
            let q = g.composite(|x| x.powi(k), -1.0, 1.0, 1);
            assert!((q - 2.0 / (k as f64 + 1.0)).abs() < 1e-12, "n = {n}");
        }
    }
}
