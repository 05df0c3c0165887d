//! Invariant suites behind `squeezeflux verify`. Each suite evaluates a set
//! of named checks and reports tolerance, observed value and outcome.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::*;
use crate::error::{Error, Result};
use crate::flux::*;
use crate::genfun::*;
use crate::jet::Jet;
use crate::modes::*;
use crate::{fmt17, PI};

pub const SUITES: [&str; 6] = ["modes", "conformal", "oracle", "shock", "minimizer", "chain"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `observed <= tolerance`.
    pub fn at_most(name: &str, observed: f64, tolerance: f64) -> Check {
        Check { name: name.into(), tolerance, observed, passed: observed <= tolerance }
    }

    /// Passes when `observed < bound`.
    pub fn below(name: &str, observed: f64, bound: f64) -> Check {
        Check { name: name.into(), tolerance: bound, observed, passed: observed < bound }
    }

    fn failed(name: &str, err: &Error) -> Check {
        eprintln!("check {name}: {err}");
        Check { name: format!("{name} ({})", err.kind()), tolerance: 0.0, observed: f64::NAN, passed: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub hbar: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Collects checks; a library error inside a check becomes a failed check.
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, r: Result<Check>) {
        match r {
            Ok(c) => self.0.push(c),
            Err(e) => self.0.push(Check::failed(name, &e)),
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

pub fn run_suite(name: &str, seed: u64, hbar: f64) -> Result<SuiteReport> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::InvalidParameter(format!("hbar must be positive, got {hbar}")));
    }
    let checks = match name {
        "modes" => modes_suite(seed, hbar),
        "conformal" => conformal_suite(seed, hbar),
        "oracle" => oracle_suite(seed, hbar),
        "shock" => shock_suite(seed, hbar),
        "minimizer" => minimizer_suite(seed, hbar),
        "chain" => chain_suite(seed, hbar),
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown suite `{other}` (known: {})",
                SUITES.join(", ")
            )))
        }
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite: name.into(), seed, hbar, passed, checks })
}

fn analytic(g: impl Fn(Jet) -> Jet + Send + Sync + 'static) -> GeneratingFunction {
    let g: AnalyticFn = Arc::new(g);
    GeneratingFunction::from_segments(vec![Segment::new(Interval::WHOLE_LINE, SegmentForm::Analytic(g))], vec![])
        .expect("single segment")
}

/// `e^x` through the finite-difference path.
pub fn exponential_numeric() -> GeneratingFunction {
    let g: NumericFn = Arc::new(f64::exp);
    GeneratingFunction::from_segments(vec![Segment::new(Interval::WHOLE_LINE, SegmentForm::Numeric(g))], vec![])
        .expect("single segment")
}

/// Smooth non-Möbius generators for the point-splitting comparison.
pub fn smooth_test_generators() -> Vec<(&'static str, GeneratingFunction)> {
    vec![
        ("exp", exponential_numeric()),
        ("sinh_plus_x", analytic(|x| x.sinh() + x)),
        ("tanh_step", analytic(|x| x + (x * 3.0).tanh() * 0.4)),
        ("atan_blend", analytic(|x| x * 1.5 + x.atan())),
        // x + 0.3 ln(1 + e^{2x}), a softplus ramp between slopes 1 and 1.6
        ("softplus_ramp", analytic(|x| x + ((x * 2.0).exp() + 1.0).ln() * 0.3)),
    ]
}

fn random_shock(r: &mut ChaCha8Rng, hbar: f64) -> ShockParams {
    let x_i = r.gen_range(-2.0..1.0);
    let l = r.gen_range(0.05..3.0);
    let coupling = r.gen_range(0.01..0.95);
    ShockParams::new(coupling * hbar / (12.0 * PI * l), x_i, x_i + l, hbar)
}

fn random_moebius(r: &mut ChaCha8Rng) -> Result<GeneratingFunction> {
    let p = MobiusParams::new(1.0, r.gen_range(-0.3..0.3), r.gen_range(-1.0..1.0), r.gen_range(0.5..2.0));
    make_moebius(p, Interval::new(-2.0, 2.0))
}

// ---------------------------------------------------------------------------

fn max_matrix_error(g: &[Vec<Complex64>], want: impl Fn(usize, usize) -> Complex64) -> f64 {
    let mut m: f64 = 0.0;
    for (j, row) in g.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            m = m.max((v - want(j, k)).norm());
        }
    }
    m
}

/// Five same-sector packets of unit bandwidth at well-separated centres.
pub fn separated_packets(sector: Sector, generator: Option<GeneratingFunction>) -> Vec<Wavepacket> {
    [10.0, 30.0, 50.0, 70.0, 90.0]
        .iter()
        .map(|&c| Wavepacket::new(c, 1.0, sector, generator.clone()).expect("valid packet"))
        .collect()
}

fn gram_checks(out: &mut Checks, label: &str, generator: Option<GeneratingFunction>, hbar: f64) {
    let mut packets = separated_packets(Sector::Positive, generator.clone());
    packets.extend(separated_packets(Sector::Conjugate, generator));
    let g = gram_matrix(&packets, hbar);
    let g = match g {
        Ok(g) => g,
        Err(e) => {
            out.0.push(Check::failed(&format!("{label}_gram"), &e));
            return;
        }
    };
    let ident = |s: f64| move |j: usize, k: usize| Complex64::new(if j == k { s } else { 0.0 }, 0.0);
    let block = |rows: std::ops::Range<usize>, cols: std::ops::Range<usize>| -> Vec<Vec<Complex64>> {
        rows.map(|j| g[j][cols.clone()].to_vec()).collect()
    };
    let pos = max_matrix_error(&block(0..5, 0..5), ident(1.0));
    let conj = max_matrix_error(&block(5..10, 5..10), ident(-1.0));
    let mixed = max_matrix_error(&block(0..5, 5..10), ident(0.0)).max(max_matrix_error(&block(5..10, 0..5), ident(0.0)));
    let closed = max_matrix_error(&g, |j, k| packet_overlap_closed_form(&packets[j], &packets[k]));
    out.0.push(Check::at_most(&format!("{label}_gram_positive_is_identity"), pos, 1e-6));
    out.0.push(Check::at_most(&format!("{label}_gram_conjugate_is_minus_identity"), conj, 1e-6));
    out.0.push(Check::at_most(&format!("{label}_gram_mixed_sectors_vanish"), mixed, 1e-6));
    out.0.push(Check::at_most(&format!("{label}_gram_matches_closed_form"), closed, 1e-6));
}

fn modes_suite(seed: u64, hbar: f64) -> Vec<Check> {
    let mut out = Checks(Vec::new());
    let mut r = rng(seed, 1);
    let m = plane_mode(1.0, 0.0, hbar);
    let want = (hbar / (4.0 * PI)).sqrt();
    out.0.push(Check::at_most("plane_mode_origin", (m - Complex64::new(want, 0.0)).norm() / want, 1e-15));

    let id = make_identity();
    let shock = random_shock(&mut r, hbar);
    let f = make_shock(&shock);
    out.add(
        "deformed_modes_reduce_to_plane",
        (|| {
            let f = f.clone()?;
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let omega = r.gen_range(0.1..50.0);
                let x = r.gen_range(-10.0..10.0);
                worst = worst.max((deformed_mode(&id, omega, x, hbar)? - plane_mode(omega, x, hbar)).norm());
                let xl = shock.x_i - r.gen_range(0.0..5.0) - 1e-9;
                worst = worst.max((deformed_mode(&f, omega, xl, hbar)? - plane_mode(omega, xl, hbar)).norm());
            }
            Ok(Check::at_most("deformed_modes_reduce_to_plane", worst, 0.0))
        })(),
    );
    out.add(
        "mirror_mode_vanishes_at_boundary",
        (|| {
            let f = f.clone()?;
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let omega = r.gen_range(0.01..100.0);
                let t = r.gen_range(-50.0..50.0);
                worst = worst.max(mirror_mode(omega, t, 0.0, hbar, None)?.norm());
                worst = worst.max(mirror_mode(omega, t, 0.0, hbar, Some(&f))?.norm());
            }
            Ok(Check::at_most("mirror_mode_vanishes_at_boundary", worst, f64::EPSILON))
        })(),
    );
    out.add(
        "mirror_mode_half_period",
        mirror_mode(1.0, 0.0, PI / 2.0, hbar, None).map(|m| {
            let want = Complex64::new(0.0, -2.0 * (hbar / (4.0 * PI)).sqrt());
            Check::at_most("mirror_mode_half_period", (m - want).norm(), 1e-15)
        }),
    );
    gram_checks(&mut out, "plane", None, hbar);
    match make_shock(&ShockParams::new(0.5 * hbar / (12.0 * PI), -0.5, 0.5, hbar)) {
        Ok(g) => gram_checks(&mut out, "deformed", Some(g), hbar),
        Err(e) => out.0.push(Check::failed("deformed_gram", &e)),
    }
    out.add(
        "nearby_packet_overlap",
        (|| {
            let a = Wavepacket::new(20.0, 1.0, Sector::Positive, None)?;
            let b = Wavepacket::new(21.5, 1.3, Sector::Positive, None)?;
            let num = kg_inner(&a, &b, hbar)?;
            Ok(Check::at_most("nearby_packet_overlap", (num - packet_overlap_closed_form(&a, &b)).norm(), 1e-6))
        })(),
    );
    let one = (0..10).map(|i| one_point(&id, i as f64, hbar).abs()).fold(0.0, f64::max);
    out.0.push(Check::at_most("one_point_vanishes", one, 0.0));
    out.0
}

fn conformal_suite(seed: u64, hbar: f64) -> Vec<Check> {
    let mut out = Checks(Vec::new());
    let mut r = rng(seed, 2);
    let id = make_identity();
    let run = |r: &mut ChaCha8Rng| -> Result<(f64, f64, f64, f64)> {
        let (mut e2, mut e4, mut ef, mut ec): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..50 {
            let f = random_moebius(r)?;
            let g = random_moebius(r)?;
            for _ in 0..3 {
                let (a, b): (f64, f64) = (r.gen_range(-1.9..1.9), r.gen_range(-1.9..1.9));
                if (a - b).abs() < 1e-3 {
                    continue;
                }
                e2 = e2.max(rel(two_point(&f, a, b, hbar)?, two_point(&id, a, b, hbar)?));
                ef = ef.max(flux_density(&f, a, hbar)?.abs());
            }
            for _ in 0..2 {
                let mut xs = [0.0; 4];
                for (i, x) in xs.iter_mut().enumerate() {
                    *x = -1.9 + 0.95 * i as f64 + r.gen_range(0.0..0.9);
                }
                e4 = e4.max(rel(wick_four_point(&f, xs, hbar)?, wick_four_point(&id, xs, hbar)?));
            }
            // f ∘ g wherever g lands inside f's domain
            for _ in 0..3 {
                let x = r.gen_range(-1.9..1.9);
                let inner = g.jet(x)?;
                if let Ok(outer) = f.jet(inner.v) {
                    let c = inner.chain(outer.v, outer.d1, outer.d2, outer.d3);
                    ec = ec.max(c.schwarzian().abs());
                }
            }
        }
        Ok((e2, e4, ef, ec))
    };
    match run(&mut r) {
        Ok((e2, e4, ef, ec)) => {
            out.0.push(Check::at_most("two_point_equals_vacuum", e2, 1e-10));
            out.0.push(Check::at_most("four_point_equals_vacuum", e4, 1e-10));
            out.0.push(Check::at_most("moebius_flux_vanishes", ef, 1e-10));
            out.0.push(Check::at_most("composition_schwarzian_vanishes", ec, 1e-10));
        }
        Err(e) => out.0.push(Check::failed("conformal", &e)),
    }
    out.add(
        "affine_two_point",
        make_affine(0.0, 2.0)
            .and_then(|f| two_point(&f, 0.0, 1.0, hbar))
            .map(|v| Check::at_most("affine_two_point", rel(v, -hbar / (4.0 * PI)), 1e-15)),
    );
    out.add(
        "pole_rejected",
        Ok(Check::at_most(
            "pole_rejected",
            match make_moebius(MobiusParams::new(1.0, -1.0, 0.0, 1.0), Interval::new(0.0, 2.0)) {
                Err(Error::PoleInDomain { .. }) => 0.0,
                _ => 1.0,
            },
            0.0,
        )),
    );
    out.0
}

/// One row of the point-splitting comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub generator: String,
    pub x: f64,
    pub analytic_flux: f64,
    pub oracle_flux: f64,
    pub rel_err: f64,
    pub offsets_used: usize,
}

/// Point-splitting vs Schwarzian on the smooth generators at seeded points.
pub fn oracle_rows(seed: u64, hbar: f64) -> Result<Vec<OracleRow>> {
    let mut r = rng(seed, 3);
    let sp = SplitParams::default();
    let mut rows = Vec::new();
    for (name, f) in smooth_test_generators() {
        let mut xs = vec![0.0];
        xs.extend((0..4).map(|_| r.gen_range(-1.0..1.0)));
        for x in xs {
            let a = flux_density(&f, x, hbar)?;
            let o = point_split_flux(&f, x, &sp, hbar)?;
            rows.push(OracleRow {
                generator: name.to_string(),
                x,
                analytic_flux: a,
                oracle_flux: o.value,
                rel_err: (o.value - a).abs() / a.abs().max(1e-12),
                offsets_used: sp.extrapolation_order,
            });
        }
    }
    Ok(rows)
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut s = String::from("x,analytic_flux,oracle_flux,rel_err,offsets_used\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(r.x),
            fmt17(r.analytic_flux),
            fmt17(r.oracle_flux),
            fmt17(r.rel_err),
            r.offsets_used
        ));
    }
    s
}

fn oracle_suite(seed: u64, hbar: f64) -> Vec<Check> {
    let mut out = Checks(Vec::new());
    match oracle_rows(seed, hbar) {
        Ok(rows) => {
            for (name, _) in smooth_test_generators() {
                let worst = rows.iter().filter(|r| r.generator == name).map(|r| r.rel_err).fold(0.0, f64::max);
                out.0.push(Check::at_most(&format!("point_split_vs_schwarzian_{name}"), worst, 1e-4));
            }
            let exp0 = rows.iter().find(|r| r.generator == "exp" && r.x == 0.0).map(|r| r.oracle_flux);
            let want = hbar / (48.0 * PI);
            out.0.push(Check::at_most("exp_origin_equals_hbar_over_48pi", exp0.map_or(f64::NAN, |v| rel(v, want)), 1e-4));
        }
        Err(e) => out.0.push(Check::failed("point_split_rows", &e)),
    }
    let sp = SplitParams::default();
    out.add(
        "identity_split_vanishes",
        point_split_flux(&make_identity(), 0.37, &sp, hbar)
            .map(|p| Check::at_most("identity_split_vanishes", p.value.abs(), 1e-10)),
    );
    let mut r = rng(seed, 4);
    out.add(
        "moebius_split_vanishes",
        (|| {
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let f = random_moebius(&mut r)?;
                worst = worst.max(point_split_flux(&f, r.gen_range(-1.5..1.5), &sp, hbar)?.value.abs());
            }
            Ok(Check::at_most("moebius_split_vanishes", worst / hbar, 1e-8))
        })(),
    );
    out.add(
        "damped_correlator_limit",
        (|| {
            let f = analytic(|x| x.sinh() + x);
            let exact = two_point(&f, 0.3, 0.1, hbar)?;
            let damped = damped_two_point(&f, 0.3, 0.1, 1e-5, hbar)?;
            Ok(Check::at_most("damped_correlator_limit", rel(damped, exact), 1e-6))
        })(),
    );
    out.0
}

/// Windowed integrals `(x_k - 5w, x_k + 5w)` of the mollified flux against the
/// two delta weights; returns the worse relative error.
pub fn mollified_window_error(s: &ShockParams, w: f64) -> Result<f64> {
    let f = make_shock(s)?;
    let want = delta_terms(&f, s.hbar);
    let p = flux_profile(&mollify(&f, w)?, s.hbar)?;
    let mut worst: f64 = 0.0;
    for d in &want {
        let got = total_energy(&p, Interval::new(d.location - 5.0 * w, d.location + 5.0 * w))?;
        worst = worst.max(rel(got, d.weight));
    }
    Ok(worst)
}

/// Observed order of `sup |mollify(f, w) - f|` on `[-1, 1]` between `w` and `w/2`.
pub fn mollifier_order(f: &GeneratingFunction, w: f64) -> Result<f64> {
    let sup = |w: f64| -> Result<f64> {
        let g = mollify(f, w)?;
        let mut m: f64 = 0.0;
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            m = m.max((g.value(x)? - f.value(x)?).abs());
        }
        Ok(m)
    };
    Ok((sup(w)? / sup(0.5 * w)?).log2())
}

fn shock_suite(seed: u64, hbar: f64) -> Vec<Check> {
    let mut out = Checks(Vec::new());
    let mut r = rng(seed, 5);
    let shocks: Vec<ShockParams> = (0..100).map(|_| random_shock(&mut r, hbar)).collect();
    let run = || -> Result<Vec<Check>> {
        let (mut law, mut coupling, mut neg_total, mut c1, mut schw) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let mut invalid = 0usize;
        for s in &shocks {
            let f = make_shock(s)?;
            let d = delta_terms(&f, hbar);
            let k = s.coupling();
            law = law.max(rel(d[0].weight, -s.e_n)).max(rel(d[1].weight, s.e_n / (1.0 - k)));
            coupling = coupling.max(s.e_n / qi_max_negative_energy(s.length(), hbar)?);
            let total = total_energy(&flux_profile(&f, hbar)?, Interval::WHOLE_LINE)?;
            neg_total = neg_total.max(-total);
            let rep = validate(&f);
            invalid += usize::from(!rep.passed());
            c1 = c1.max(rep.max_c1_mismatch);
            for i in 1..20 {
                let x = s.x_i + s.length() * i as f64 / 20.0;
                schw = schw.max(f.segments()[1].form.jet(x).schwarzian().abs());
            }
        }
        Ok(vec![
            Check::at_most("delta_weight_law", law, 1e-10),
            Check::below("uncertainty_relation", coupling, 1.0),
            Check::at_most("total_energy_non_negative", neg_total, 1e-9),
            Check::at_most("validate_failures", invalid as f64, 0.0),
            Check::at_most("c1_matching", c1, 1e-12),
            Check::at_most("middle_branch_schwarzian", schw, 1e-10),
        ])
    };
    match run() {
        Ok(c) => out.0.extend(c),
        Err(e) => out.0.push(Check::failed("random_shocks", &e)),
    }
    let marginal = make_shock(&ShockParams::new(hbar / (12.0 * PI), 0.0, 1.0, hbar));
    out.0.push(Check::at_most(
        "marginal_shock_rejected",
        if matches!(marginal, Err(Error::InadmissibleShock { .. })) { 0.0 } else { 1.0 },
        0.0,
    ));
    // mollifier limit on the first few random shocks, at l/100 or, near the
    // marginal coupling, at a width well inside the curved branch
    for (i, s) in shocks.iter().take(6).enumerate() {
        let k = s.coupling();
        let l = s.length() * (3.0 * (1.0 - k) / k).min(1.0);
        out.add(
            &format!("mollified_windows_{i}"),
            (|| {
                let errs = [mollified_window_error(s, l / 10.0)?, mollified_window_error(s, l / 30.0)?, mollified_window_error(s, l / 100.0)?];
                let non_monotone = errs.windows(2).filter(|w| !(w[1] < w[0])).count();
                if non_monotone > 0 {
                    return Ok(Check { name: format!("mollified_windows_{i}_monotone"), tolerance: 0.0, observed: non_monotone as f64, passed: false });
                }
                Ok(Check::at_most(&format!("mollified_windows_{i}"), errs[2], 0.01))
            })(),
        );
    }
    out.add(
        "mollified_total_energy",
        (|| {
            let s = ShockParams::new(0.01 * hbar, 0.0, 1.0, hbar);
            let f = make_shock(&s)?;
            let exact = total_energy(&flux_profile(&f, hbar)?, Interval::WHOLE_LINE)?;
            let smooth = total_energy(&flux_profile(&mollify(&f, s.length() / 100.0)?, hbar)?, Interval::WHOLE_LINE)?;
            Ok(Check::at_most("mollified_total_energy", rel(smooth, exact), 0.01))
        })(),
    );
    out.add(
        "mollifier_order",
        mollifier_order(&analytic(|x| x + (x * 3.0).tanh() * 0.4), 0.1)
            .map(|o| Check { name: "mollifier_order".into(), tolerance: 1.9, observed: o, passed: o >= 1.9 }),
    );
    out.0
}

/// `n` seeded admissible problems with couplings `12π E_n L/ħ` in `[0.05, 0.6]`.
pub fn random_problems(seed: u64, hbar: f64, n: usize) -> Vec<MinimizerProblem> {
    let mut r = rng(seed, 6);
    (0..n)
        .map(|_| {
            let l = r.gen_range(0.2..5.0);
            let coupling = r.gen_range(0.05..0.6);
            MinimizerProblem::new(coupling * hbar / (12.0 * PI * l), l, hbar)
        })
        .collect()
}

fn minimizer_suite(seed: u64, hbar: f64) -> Vec<Check> {
    let mut out = Checks(Vec::new());
    let p = MinimizerProblem::new(0.01 * hbar, 1.0, hbar);
    out.add(
        "consistency_triangle",
        (|| {
            let a = min_compensation_energy(&p)?;
            let b = compensation_lower_bound(p.e_n, p.l, hbar)?;
            let c = f_eta_delta_weight(p.e_n, p.l, hbar)?;
            Ok(Check::at_most("consistency_triangle", rel(a, b).max(rel(c, a)), 1e-12))
        })(),
    );
    out.add(
        "zero_delay_minimum",
        min_compensation_energy(&MinimizerProblem::new(p.e_n, 0.0, hbar))
            .map(|v| Check::at_most("zero_delay_minimum", rel(v, p.e_n), 0.0)),
    );
    out.add(
        "eta_profile",
        (|| {
            let f = make_f_eta(p.e_n, p.l, hbar)?;
            let r = eta_from_f(&f, p.l)?;
            let rho = eta_rho(p.e_n, p.l, hbar);
            let e0 = eta_left_limit(&f, 0.0)?;
            let err = r.eta_at_l.abs().max(rel(e0, (rho * p.l + 1.0).powi(2) - 1.0));
            let tail = if r.right_tail_identity { 0.0 } else { 1.0 };
            Ok(Check::at_most("eta_profile", err.max(tail), 1e-12))
        })(),
    );
    out.add(
        "casimir_shift",
        (|| {
            let f = make_f_eta(p.e_n, p.l, hbar)?;
            let rho = eta_rho(p.e_n, p.l, hbar);
            let want = -hbar / (12.0 * PI) * rho * rho * p.l;
            Ok(Check::at_most("casimir_shift", rel(casimir_shift(&f, p.l, hbar)?, want), 1e-10))
        })(),
    );
    match min_compensation_energy(&p).and_then(|c| Ok((c, numeric_min_oracle(&p, seed)?))) {
        Ok((closed, r)) => {
            out.0.push(Check::at_most("oracle_reference_not_below", closed - r.energy, 1e-6));
            out.0.push(Check::at_most("oracle_reference_within_half_percent", r.energy / closed - 1.0, 0.005));
        }
        Err(e) => out.0.push(Check::failed("oracle_reference_problem", &e)),
    }
    out.add(
        "oracle_from_minimizer_improvements",
        (|| {
            let fam = OracleFamily::new(p)?;
            let r = oracle_from_start(&p, &fam.minimizer_parameters())?;
            Ok(Check::at_most("oracle_from_minimizer_improvements", r.improvement_steps as f64, 0.0))
        })(),
    );
    out.add(
        "oracle_zero_energy",
        numeric_min_oracle(&MinimizerProblem::new(0.0, 1.0, hbar), seed)
            .map(|r| Check::at_most("oracle_zero_energy", r.energy.abs() / hbar, 1e-9)),
    );
    let run = || -> Result<(f64, f64)> {
        let (mut below, mut over): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for q in random_problems(seed, hbar, 20) {
            let closed = min_compensation_energy(&q)?;
            let r = numeric_min_oracle(&q, seed)?;
            below = below.max(closed - r.energy);
            over = over.max(r.energy / closed - 1.0);
        }
        Ok((below, over))
    };
    match run() {
        Ok((below, over)) => {
            out.0.push(Check::at_most("oracle_never_below_closed_form", below, 1e-6));
            out.0.push(Check::at_most("oracle_within_half_percent", over, 0.005));
        }
        Err(e) => out.0.push(Check::failed("oracle_random_problems", &e)),
    }
    out.0
}

fn chain_suite(seed: u64, hbar: f64) -> Vec<Check> {
    let mut out = Checks(Vec::new());
    out.add(
        "main_bound",
        gedanken_chain(1.0, hbar, 2).map(|c| Check::at_most("main_bound", rel(c.bound_total, hbar / (6.0 * PI)), 1e-12)),
    );
    out.add(
        "single_polarization_bound",
        switching_bound(1.0, hbar, 1).map(|b| Check::at_most("single_polarization_bound", rel(b, hbar / (12.0 * PI)), 1e-12)),
    );
    out.add(
        "chain_steps",
        (|| {
            let c = gedanken_chain(1.0, hbar, 2)?;
            let step = |n: &str| c.steps.iter().find(|s| s.name == n).map(|s| s.value).unwrap_or(f64::NAN);
            let e_ref = c.witness.e_n;
            // optimal |x_i| saturates E_n (|x_i| + |x_f|) = ħ/(12π)
            let sat = rel(e_ref * (step("optimal_abs_x_i") + step("min_abs_x_f")), hbar / (12.0 * PI));
            let xf = (c.witness.x_f - 1.0).abs();
            Ok(Check::at_most("chain_steps", sat.max(xf).max(step("E_n_independence")), 1e-12))
        })(),
    );
    let mut r = rng(seed, 7);
    out.add(
        "chain_soundness",
        (|| {
            let mut worst: f64 = 0.0;
            for _ in 0..20 {
                let t = 10f64.powf(r.gen_range(-2.0..2.0));
                let c = gedanken_chain(t, hbar, 1)?;
                worst = worst.max((c.bound_per_pol * 2.0 - switching_bound(t, hbar, 2)?).abs());
                worst = worst.max(if c.passed() { 0.0 } else { 1.0 });
            }
            Ok(Check::at_most("chain_soundness", worst, 0.0))
        })(),
    );
    out.add(
        "t_s_scaling",
        (|| {
            let b1 = switching_bound(1.0, hbar, 2)?;
            let e = rel(switching_bound(0.5, hbar, 2)?, 2.0 * b1).max(rel(switching_bound(10.0, hbar, 2)?, 0.1 * b1));
            Ok(Check::at_most("t_s_scaling", e, 1e-15))
        })(),
    );
    out.add(
        "monotonicity",
        (|| {
            let mut bad = 0;
            let e_n = 0.01 * hbar;
            let mut prev = compensation_lower_bound(e_n, 0.0, hbar)?;
            for i in 1..50 {
                let v = compensation_lower_bound(e_n, 2.6 * i as f64 / 50.0, hbar)?;
                bad += usize::from(!(v > prev));
                prev = v;
            }
            let mut prev = switching_bound(0.01, hbar, 2)?;
            for i in 1..50 {
                let v = switching_bound(0.01 * 1.2f64.powi(i), hbar, 2)?;
                bad += usize::from(!(v < prev));
                prev = v;
            }
            Ok(Check::at_most("monotonicity", bad as f64, 0.0))
        })(),
    );
    out.add(
        "hbar_covariance",
        (|| {
            let mut worst: f64 = 0.0;
            for _ in 0..10 {
                let k = 10f64.powf(r.gen_range(-1.0..1.0));
                let l = r.gen_range(0.1..3.0);
                let u = r.gen_range(0.05..0.9);
                let e = |h: f64| u * h / (12.0 * PI * l);
                worst = worst
                    .max(rel(qi_max_negative_energy(l, k * hbar)?, k * qi_max_negative_energy(l, hbar)?))
                    .max(rel(switching_bound(l, k * hbar, 2)?, k * switching_bound(l, hbar, 2)?))
                    .max(rel(
                        min_compensation_energy(&MinimizerProblem::new(e(k * hbar), l, k * hbar))?,
                        k * min_compensation_energy(&MinimizerProblem::new(e(hbar), l, hbar))?,
                    ));
            }
            Ok(Check::at_most("hbar_covariance", worst, 1e-14))
        })(),
    );
    out.add(
        "scenario_timeline",
        (|| {
            let s = GedankenScenario { t_s: 1.0, x_i: -1.0, x_f: 1.5, e_n: 0.001 * hbar, polarizations: 2, hbar };
            let t = scenario_timeline(&s)?;
            let names: Vec<&str> = t.events.iter().map(|e| e.name.as_str()).collect();
            let mut bad = usize::from(names != ["reflection", "switch_on", "switch_off", "transmission"]);
            bad += usize::from(t.events.windows(2).any(|w| w[0].t > w[1].t));
            let z = scenario_timeline(&GedankenScenario { x_i: 0.0, ..s })?;
            bad += usize::from(z.outgoing.window_energy_min != s.e_n || z.quiet_interval[0] != z.quiet_interval[1]);
            bad += usize::from(!matches!(
                scenario_timeline(&GedankenScenario { x_f: 0.5, ..s }),
                Err(Error::ScenarioOrderViolation(_))
            ));
            bad += usize::from(!matches!(
                scenario_timeline(&GedankenScenario { e_n: 0.05 * hbar, ..s }),
                Err(Error::InadmissibleShock { .. })
            ));
            Ok(Check::at_most("scenario_timeline", bad as f64, 0.0))
        })(),
    );
    out.0
}
