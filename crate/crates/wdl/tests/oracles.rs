//! Values recomputed independently of the library's own code paths.

use serde_json::Value;
use wdl::blaschke::semi_family;
use wdl::classify::{kn_kn_bracket, orbit_of_zero_series};
use wdl::hypgeo::contraction_factor;
use wdl::model::ell;
use wdl::{build_schedule, Family};

const LOG2_09: f64 = -0.15200309344504995;

fn log2_of(v: &Value) -> f64 {
    v["log2"].as_f64().expect("nonzero LogScaled")
}

#[test]
fn att56_orbit_of_zero_has_closed_form() {
    // b(z) = (z + 5/6)/(1 + 5z/6) fixes ±1, so (1 - b^n(0))/(1 + b^n(0)) = 11^{-n}
    let (gaps, _) = orbit_of_zero_series(Family::Att56, 1, 12, 12).unwrap();
    for (n, g) in gaps {
        let oracle = 2.0 / (11f64.powi(n as i32) + 1.0);
        assert!((g - oracle).abs() <= 1e-14 * oracle.max(1e-3), "n = {n}: {g} vs {oracle}");
    }
}

#[test]
fn square_and_identity_scales_follow_case_one() {
    // image gaps of |z| = 1 ∓ g: identity gives g, z^2 gives 2g ∓ g^2
    for family in [Family::Identity, Family::Square] {
        let s = build_schedule(family, 6, 1024).unwrap();
        for n in 0..6 {
            let m = ell(n as u64).unwrap();
            let gi = s.gap_in(m).unwrap().to_f64();
            let go = s.gap_out(m).unwrap().to_f64();
            if gi < 1e-150 {
                break;
            }
            let (ii, io) = match family {
                Family::Identity => (gi, go),
                _ => (2.0 * gi - gi * gi, 2.0 * go + go * go),
            };
            let dist_c = 0.9 * (gi / 6.0).min(ii / 2.0);
            let oracle = 0.9 * (go / 6.0).min(dist_c).min(io / 2.0);
            let got = s.alpha(n + 1).unwrap().to_f64();
            assert!((got - oracle).abs() <= 1e-6 * oracle, "{family} n = {n}: {got} vs {oracle}");
        }
    }
}

#[test]
fn deep_par13_scale_matches_logged_recurrence() {
    let s = build_schedule(Family::Par13, 60, 1024).unwrap();
    let json: Value = serde_json::from_str(&s.to_json().unwrap()).unwrap();
    let alphas: Vec<f64> = json["alpha_log2"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let gap_out: Vec<f64> = json["Rgap_log2"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let gap_in: Vec<f64> = json["rgap_log2"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let six = 6f64.log2();
    for entry in json["case_one"].as_array().unwrap() {
        let n = entry["n"].as_u64().unwrap();
        let m = ell(n).unwrap() as usize;
        let dist_c = LOG2_09 + (gap_in[m] - six).min(log2_of(&entry["image_gap_in"]) - 1.0);
        let oracle = LOG2_09 + (gap_out[m] - six).min(dist_c).min(log2_of(&entry["image_gap_out"]) - 1.0);
        let got = alphas[n as usize + 1];
        assert!((got - oracle).abs() <= 1e-9 * oracle.abs(), "n = {n}: {got} vs {oracle}");
    }
    let a60 = alphas[60];
    assert!(a60.is_finite() && a60 < -1e17, "log2 α_60 = {a60}");
}

#[test]
fn first_bracket_matches_direct_factors() {
    for family in Family::SIX {
        let s = build_schedule(family, 3, 1024).unwrap();
        let b = kn_kn_bracket(&s, 1).unwrap();
        let m = ell(1).unwrap();
        let sv = 1.0 - b.s_gap.to_f64();
        let r = s.rhat(m).unwrap();
        let k = contraction_factor(sv, s.big_rhat(m).unwrap()).unwrap();
        let big_k = 1.0 / contraction_factor(sv / r, 1.0 / r).unwrap();
        let (dk, dbk) = (1.0 - k, big_k - 1.0);
        assert!((b.k_defect.to_f64() - dk).abs() <= 1e-6 * dk, "{family}: {} vs {dk}", b.k_defect.to_f64());
        assert!((b.big_k_excess.to_f64() - dbk).abs() <= 1e-6 * dbk, "{family}: {} vs {dbk}", b.big_k_excess.to_f64());
    }
}

#[test]
fn hand_values() {
    assert!((contraction_factor(0.5, 2.0).unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(contraction_factor(0.0, 1.0).unwrap(), 1.0);
    let (_, lambda) = semi_family(0.75).unwrap();
    assert!((lambda - 0.96).abs() < 1e-15);
    assert_eq!(ell(1).unwrap(), 4);
    assert_eq!(ell(2).unwrap(), 8);
    assert_eq!(ell(3).unwrap(), 13);
}
