use num_complex::Complex64;
use wdl::model::{orbit, phi_absolute, phi_local, run_error_check, start_point, Frame, LocalPoint};
use wdl::{build_schedule, ell, Family, PerturbationModel, Phase};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn local_frames_agree_with_absolute_map() {
    for family in Family::SIX {
        let s = build_schedule(family, 4, 1024).unwrap();
        let alphas: Vec<f64> = s.alphas().iter().map(|a| a.to_f64()).collect();
        let products: Vec<_> = (0..=4).map(|n| s.product(n).unwrap().clone()).collect();
        for m in 0..=ell(3).unwrap() {
            let frame = Frame::at(m, s.alphas()).unwrap();
            for w in [c(0.0, 0.0), c(0.3, 0.2), c(-0.5, -0.1), c(0.1, -0.6)] {
                let p = LocalPoint::new(frame, w);
                let b = s.product(frame.phase.level() as usize).unwrap();
                let (local, _) = phi_local(&p, s.alphas(), b).unwrap().to_absolute();
                let z = p.to_absolute().0;
                let direct = phi_absolute(z, &alphas, &products).unwrap();
                let err = (local - direct).norm() / direct.norm();
                // rounding of z itself, magnified by the Δ rescaling 1/α_n
                let conditioning = match frame.phase {
                    Phase::Delta { .. } => 4.0 * f64::EPSILON * z.norm() / (frame.scale.to_f64() * direct.norm()),
                    _ => 0.0,
                };
                assert!(err <= 1e-12 + conditioning, "{family} m = {m} w = {w}: {local} vs {direct}");
            }
        }
    }
}

#[test]
fn hand_checked_frames() {
    let s = build_schedule(Family::Square, 6, 1024).unwrap();
    assert_eq!(LocalPoint::new(Frame::at(1, s.alphas()).unwrap(), c(0.0, 0.0)).to_absolute().0, c(7.0, 0.0));
    assert_eq!(LocalPoint::new(Frame::at(0, s.alphas()).unwrap(), c(1.0, 0.0)).to_absolute().0, c(5.0, 0.0));
    let f = Frame::at(ell(5).unwrap() + 1, s.alphas()).unwrap();
    assert_eq!(f.phase, Phase::D { n: 5, k: 0 });
    assert_eq!(f.scale, s.alpha(6).unwrap());
}

#[test]
fn real_starts_stay_real() {
    for family in Family::SIX {
        let s = build_schedule(family, 10, 1024).unwrap();
        for seed in 0..4 {
            let t = orbit(&start_point(&s, c(4.3, 0.0)).unwrap(), s.steps(), &PerturbationModel::seeded_real(seed), &s)
                .unwrap();
            for r in &t.records {
                assert!(r.point.value().im.abs() <= 1e-14, "{family} m = {}", r.m);
            }
        }
    }
}

#[test]
fn errors_accumulate_within_the_budget() {
    for family in Family::SIX {
        let s = build_schedule(family, 10, 1024).unwrap();
        for seed in 0..5 {
            let model = PerturbationModel::seeded(seed);
            for n in 0..10 {
                for z in [c(0.0, 0.0), c(0.4, -0.3)] {
                    for (j, (dev, bound)) in run_error_check(&s, n, z, &model).unwrap().into_iter().enumerate() {
                        assert!(dev <= bound * (1.0 + 1e-12), "{family} n = {n} j = {}: {dev} > {bound}", j + 1);
                    }
                }
            }
        }
    }
}

#[test]
fn par13_centre_orbit_iterates_b() {
    let s = build_schedule(Family::Par13, 12, 1024).unwrap();
    let t = orbit(&start_point(&s, c(4.0, 0.0)).unwrap(), s.steps(), &PerturbationModel::zero(), &s).unwrap();
    let b = Family::Par13.product(0).unwrap();
    for (n, p) in t.gphase_points() {
        let want = b.iterate(c(0.0, 0.0), n as usize).unwrap();
        assert!((p.value() - want).norm() <= 1e-14, "n = {n}");
    }
}

#[test]
fn semi_orbit_of_nineteen_quarters_stays_right() {
    let s = build_schedule(Family::SemiSequence, 20, 1024).unwrap();
    let t = orbit(&start_point(&s, c(4.75, 0.0)).unwrap(), s.steps(), &PerturbationModel::zero(), &s).unwrap();
    for (n, p) in t.gphase_points() {
        assert!(p.value().re >= 2.0 / 3.0, "n = {n}: {}", p.value().re);
    }
}
