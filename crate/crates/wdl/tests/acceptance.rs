//! Acceptance criteria 1 to 13. Runs as a plain binary so every criterion
//! prints one PASS/FAIL line; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use wdl::blaschke::{cross_ratio_sweep, semi_sweep};
use wdl::classify::{
    attracting_rate, examples, kn_kn_bracket, parabolic_rates, run_example_on, BoundaryClass, HyperbolicClass,
};
use wdl::hypgeo::hyperbolic_estimate_sweep;
use wdl::model::{ell, ell_recurrence, hop_sweep, phase_index, phase_of, PerturbationModel};
use wdl::schedule::{build_reefs, verify_disjointness, verify_disjointness_alphas, verify_surrounds};
use wdl::{build_schedule, Family, LogScaled, Phase};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn run(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> wdl::Result<Outcome>) -> bool {
    let t = Instant::now();
    let res = f();
    let elapsed = t.elapsed();
    let (mut passed, mut detail) = match res {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; exceeded {limit:.0?}");
        }
    }
    println!("{} {id:>2} {name}: {detail} ({elapsed:.2?})", if passed { "PASS" } else { "FAIL" });
    passed
}

fn c1_itinerary() -> wdl::Result<Outcome> {
    if ell(1)? != 4 || phase_of(4) != (Phase::G { n: 1 }) {
        return Ok(outcome(false, "ell_1 != 4"));
    }
    let mut l: u64 = 1;
    for n in 0..=1_000_000u64 {
        if ell(n)? != l {
            return Ok(outcome(false, format!("closed form differs from recurrence at n = {n}")));
        }
        l += n + 3;
    }
    if ell_recurrence(1000)? != ell(1000)? {
        return Ok(outcome(false, "ell_recurrence(1000) disagrees"));
    }
    for m in 0..5000 {
        if phase_index(phase_of(m))? != m {
            return Ok(outcome(false, format!("phase of m = {m} does not round-trip")));
        }
    }
    Ok(outcome(true, "ell_1 = 4; closed form = recurrence for n <= 10^6"))
}

fn c2_eps_closed_form() -> wdl::Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut eps0_max: f64 = 0.0;
    for family in Family::SIX {
        let s = build_schedule(family, 20, 1024)?;
        for n in 0..20u64 {
            let a = s.alpha(n as usize + 1)?.log2_magnitude();
            for k in 0..=n + 2 {
                let m = ell(n)? + k;
                if m >= s.steps() {
                    continue;
                }
                // relative error of the value is |Δ log2| ln 2
                let expect = 2.0 * a - (k as f64 + 1.0);
                worst = worst.max((s.eps(m)?.log2_magnitude() - expect).abs() * std::f64::consts::LN_2);
            }
        }
        eps0_max = eps0_max.max(s.eps(0)?.to_f64());
    }
    Ok(outcome(
        worst <= 1e-9 && eps0_max <= 1.0 / 24.0,
        format!("max rel err {worst:.2e}, max eps_0 {eps0_max:.6} over six families"),
    ))
}

fn c3_surrounds() -> wdl::Result<Outcome> {
    let through = ell(8)?;
    let scheds = Family::SIX.iter().map(|&f| build_schedule(f, 9, 1024)).collect::<wdl::Result<Vec<_>>>()?;
    let mut checks = 0;
    let mut failures = 0;
    let mut margin = f64::INFINITY;
    for s in &scheds {
        let r = verify_surrounds(s, &PerturbationModel::zero(), 1, 4096, Some(through))?;
        checks += r.checks;
        failures += r.failures.len();
        margin = margin.min(r.min_margin);
    }
    // 100 seeded draws, dealt round-robin over the families
    for d in 0..100u64 {
        let s = &scheds[d as usize % scheds.len()];
        let r = verify_surrounds(s, &PerturbationModel::seeded(1000 + d), 1, 4096, Some(through))?;
        checks += r.checks;
        failures += r.failures.len();
        margin = margin.min(r.min_margin);
    }
    let mut control_caught = 0;
    for s in &scheds {
        let loud = PerturbationModel::extremal(true).with_envelope(8.0);
        if !verify_surrounds(s, &loud, 1, 1024, Some(through))?.passed {
            control_caught += 1;
        }
    }
    Ok(outcome(
        failures == 0 && control_caught == scheds.len(),
        format!(
            "{checks} checks through m = {through}, {failures} failures, min margin {margin:.3}; envelope 8 caught in {control_caught}/6"
        ),
    ))
}

fn c4_disjointness() -> wdl::Result<Outcome> {
    let mut pairs = 0;
    let mut least = f64::INFINITY;
    let mut ok = true;
    for family in Family::SIX {
        let r = verify_disjointness(&build_schedule(family, 20, 1024)?)?;
        ok &= r.disjoint;
        pairs += r.items.len();
        for it in &r.items {
            least = least.min(it.literal_margin.log2_magnitude());
        }
    }
    let fifth: Vec<LogScaled> = (0..20).map(|i| LogScaled::from_f64(5f64.powi(-i))).collect();
    let control = !verify_disjointness_alphas(&fifth).disjoint;
    Ok(outcome(
        ok && control,
        format!("{pairs} pairs disjoint: {ok}; least log2 margin {least:.1}; ratio 1/5 control detected: {control}"),
    ))
}

fn c5_hyperbolic() -> wdl::Result<Outcome> {
    let reports = hyperbolic_estimate_sweep(50, 10_000, 5)?;
    let ok = reports.iter().all(|r| r.passed());
    let detail = reports.iter().map(|r| format!("{} {:.2e}", r.name, r.min_margin)).collect::<Vec<_>>().join(", ");
    Ok(outcome(ok, detail))
}

fn c6_cross_ratio() -> wdl::Result<Outcome> {
    let r = cross_ratio_sweep(99, 999)?;
    Ok(outcome(r.passed() && r.min_margin > 0.0, format!("{} checks, min margin {:.3e}", r.checks, r.min_margin)))
}

fn c7_semi() -> wdl::Result<Outcome> {
    let reports = semi_sweep(100, 100)?;
    let ok = reports.iter().all(|r| r.passed());
    let detail = reports.iter().map(|r| format!("{} {:.2e}", r.name, r.min_margin)).collect::<Vec<_>>().join(", ");
    Ok(outcome(ok, detail))
}

fn c8_parabolic() -> wdl::Result<Outcome> {
    let p = parabolic_rates(Family::Par13, 1000, 100_000)?;
    let (g, d) = (p.gap.exponent, p.step.exponent);
    Ok(outcome(
        (-0.55..=-0.45).contains(&g) && (-1.6..=-1.4).contains(&d),
        format!("gap exponent {g:.4}, step exponent {d:.4}"),
    ))
}

fn c9_attracting() -> wdl::Result<Outcome> {
    let a = attracting_rate(Family::Att12, 200)?.last_ratio;
    let b = attracting_rate(Family::Att56, 200)?.last_ratio;
    Ok(outcome(
        (a - 2.0 / 3.0).abs() <= 1e-6 && (b - 1.0 / 11.0).abs() <= 1e-6,
        format!("att12 ratio {a:.10}, att56 ratio {b:.10}"),
    ))
}

fn c10_hops() -> wdl::Result<Outcome> {
    let mut checks = 0;
    let mut failures = 0;
    for family in Family::SIX {
        let s = build_schedule(family, 20, 1024)?;
        let r = hop_sweep(&s, &PerturbationModel::seeded(77), 100, 9)?;
        checks += r.checks;
        failures += r.failures;
    }
    Ok(outcome(failures == 0, format!("{checks} hops, {failures} violations")))
}

fn c11_examples() -> wdl::Result<Outcome> {
    use BoundaryClass::*;
    use HyperbolicClass::*;
    let want = [
        ("1a", Contracting, Bungee),
        ("1b", Contracting, Converging),
        ("2a", SemiContracting, Bungee),
        ("2b", SemiContracting, Converging),
        ("3a", EventuallyIsometric, Bungee),
        ("3b", EventuallyIsometric, Converging),
    ];
    let mut runs = 0;
    let mut bad = Vec::new();
    for spec in examples() {
        let (_, h, b) = want.iter().find(|w| w.0 == spec.id).copied().expect("known id");
        let sched = build_schedule(spec.family, 30, 1024)?;
        for seed in 0..10 {
            let r = run_example_on(&spec, &sched, &PerturbationModel::seeded(seed))?;
            runs += 1;
            if (r.hyperbolic_class, r.boundary_class) != (h, b) || !r.passed {
                bad.push(format!("{} seed {seed}", spec.id));
            }
        }
    }
    Ok(outcome(bad.is_empty(), format!("{runs} runs at depth 30, mismatches: {bad:?}")))
}

fn c12_bracket() -> wdl::Result<Outcome> {
    let mut ok = true;
    let mut worst = LogScaled::ZERO;
    for family in Family::SIX {
        let s = build_schedule(family, 20, 1024)?;
        for n in 1..=20 {
            let b = kn_kn_bracket(&s, n)?;
            ok &= b.k_defect.is_positive() && b.big_k_excess.is_positive();
            if n > 15 {
                worst = worst.max(b.k_defect).max(b.big_k_excess);
            }
        }
    }
    Ok(outcome(
        ok && worst <= LogScaled::from_f64(0.05),
        format!("k < 1 < K throughout: {ok}; final-quarter distance from 1 <= 2^{:.1}", worst.log2_magnitude()),
    ))
}

fn c13_reefs() -> wdl::Result<Outcome> {
    let mut ok = true;
    for family in Family::SIX {
        let r = build_reefs(&build_schedule(family, 12, 1024)?, 1024)?;
        ok &= r.positive && r.decreasing;
    }
    Ok(outcome(ok, "ratio sequences positive and decreasing for n <= 12"))
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "itinerary", Some(Duration::from_millis(100)), c1_itinerary),
        run(2, "eps closed form", Some(secs(1)), c2_eps_closed_form),
        run(3, "surrounds", Some(secs(60)), c3_surrounds),
        run(4, "disjointness", Some(secs(1)), c4_disjointness),
        run(5, "hyperbolic estimates", Some(secs(10)), c5_hyperbolic),
        run(6, "cross-ratio inequality", Some(secs(5)), c6_cross_ratio),
        run(7, "semi family", Some(secs(5)), c7_semi),
        run(8, "parabolic rates", Some(secs(5)), c8_parabolic),
        run(9, "attracting rates", Some(secs(1)), c9_attracting),
        run(10, "hop bound under perturbation", Some(secs(60)), c10_hops),
        run(11, "six-example classification", Some(secs(300)), c11_examples),
        run(12, "k_n/K_n bracket", None, c12_bracket),
        run(13, "reef condition", None, c13_reefs),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
