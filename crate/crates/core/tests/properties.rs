//! Randomized invariants of the numerics, the planar lemma and the chains.

use std::f64::consts::TAU;

use proptest::prelude::*;

use superdecay::assembly::{harmonic_half_cylinder, PackingMode, Side, TimelineKind};
use superdecay::parabolic::parabolic_chain;
use superdecay::planarlemma::{matrix_jet, vector_field_add, vector_field_remove, PlanarParams, Variant};
use superdecay::scalarcore::{theta, LogScalar};
use superdecay::verifier::{verify_decay, verify_residual, QuasiSampler, Tolerances};
use superdecay::{BuildParams, ConstructionFile};

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Strict packing needs `k_1 >= 2^12`; smaller offsets use flexible packing.
fn mode_for(n0: u32) -> PackingMode {
    if n0 >= 12 {
        PackingMode::Strict
    } else {
        PackingMode::Flexible
    }
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..-1e-6, 1e-6..1e6]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn logscalar_matches_f64_arithmetic(a in nonzero(), b in nonzero()) {
        let (x, y) = (LogScalar::from_f64(a), LogScalar::from_f64(b));
        prop_assert!(close((x * y).to_f64(), a * b, 1e-12));
        prop_assert!(close((x / y).to_f64(), a / b, 1e-12));
        // Sums that cancel lose relative accuracy exactly as in f64.
        let scale = a.abs().max(b.abs());
        prop_assert!(((x + y).to_f64() - (a + b)).abs() <= 1e-12 * scale);
        prop_assert!(((x - y).to_f64() - (a - b)).abs() <= 1e-12 * scale);
        prop_assert_eq!(x + y, y + x);
        prop_assert!((x - x).is_zero());
    }

    #[test]
    fn logscalar_survives_huge_exponents(l1 in -1e7..1e7_f64, l2 in -1e7..1e7_f64) {
        let (x, y) = (LogScalar::exp(l1), LogScalar::exp(l2));
        prop_assert!(close((x * y).logmag(), l1 + l2, 1e-15));
        let sum = x + y;
        prop_assert!(sum.logmag() >= l1.max(l2));
        prop_assert!(sum.logmag() <= l1.max(l2) + std::f64::consts::LN_2 + 1e-12);
        prop_assert_eq!(x.cmp_abs(y), l1.total_cmp(&l2));
    }

    #[test]
    fn logscalar_json_round_trip(sign in prop_oneof![Just(-1i8), Just(1i8)], l in -1e9..1e9_f64) {
        let x = LogScalar::new(sign, l);
        let back: LogScalar = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn theta_is_a_symmetric_monotone_step(t in 0.0..1.0_f64, dt in 1e-9..0.5_f64) {
        prop_assert!((theta(t) + theta(1.0 - t) - 1.0).abs() <= 1e-15);
        prop_assert!(theta((t + dt).min(1.0)) <= theta(t));
        prop_assert!((0.0..=1.0).contains(&theta(t)));
    }

    #[test]
    fn planar_identities_hold(
        k in 1.0..40.0_f64,
        ratio in 1.0..=2.0_f64,
        s in -10.0..10.0_f64,
        x in 0.0..TAU,
        y in 0.0..TAU,
    ) {
        let kp = k * ratio;
        let p = PlanarParams::new(k, kp, s).unwrap();
        let (sp, _) = (k * x).sin_cos();
        let (sq, _) = (kp * y).sin_cos();
        let add = matrix_jet(Variant::Add, &p, x, y).value.apply([-k * sp, -s * kp * sq]);
        let rem = matrix_jet(Variant::Remove, &p, x, y).value.apply([-s * k * sp, -kp * sq]);
        let (va, vr) = (vector_field_add(&p, x, y), vector_field_remove(&p, x, y));
        let tol = 1e-12 * (1.0 + s.abs());
        for i in 0..2 {
            prop_assert!((add[i] - va[i]).abs() <= tol);
            prop_assert!((rem[i] - vr[i]).abs() <= tol);
        }
    }

    #[test]
    fn quasi_sampler_is_deterministic(seed in any::<u64>(), stream in 0..64u64, i in 0..100_000usize) {
        let (a, b) = (QuasiSampler::<3>::new(seed, stream), QuasiSampler::<3>::new(seed, stream));
        let p = a.point(i);
        prop_assert_eq!(p, b.point(i));
        prop_assert!(p.iter().all(|c| (0.0..1.0).contains(c)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn elliptic_junctions_are_continuous(n0 in 4u32..14, blocks in 1usize..4, x in 0.0..TAU, y in 0.0..TAU) {
        let tl = harmonic_half_cylinder(n0, blocks, mode_for(n0)).unwrap();
        for w in tl.segments.windows(2) {
            let t = w[1].segment.start;
            let l = tl.eval_side(x, y, t, Side::Left).unwrap();
            let r = tl.eval_side(x, y, t, Side::Right).unwrap();
            let scale = l.field.common_scale();
            let (pl, pr) = (l.field.point(x, y, scale), r.field.point(x, y, scale));
            let size = l.field.sup().to_f64().abs().max(r.field.sup().to_f64().abs()).max(1.0);
            prop_assert!((pl.u - pr.u).abs() <= 1e-8 * size.max(1.0), "u jump at {t}: {} vs {}", pl.u, pr.u);
            let (al, ar) = (l.coeff.value, r.coeff.value);
            prop_assert!((al.xx - ar.xx).abs().max((al.xy - ar.xy).abs()).max((al.yy - ar.yy).abs()) <= 1e-12);
        }
    }

    #[test]
    fn parabolic_chain_is_conjugation_symmetric(n in 2usize..10, x in 0.0..TAU, y in 0.0..TAU, frac in 0.0..1.0_f64) {
        let chain = parabolic_chain(n).unwrap();
        let t = chain.t_start() + (chain.t_end() - chain.t_start()) * frac;
        let a = chain.eval(x, y, t).unwrap().point;
        let b = chain.eval(-x, -y, t).unwrap().point;
        prop_assert!((a.u - b.u.conj()).norm() <= 1e-12 * a.sup);
        prop_assert!(a.relative_residual() <= 1e-9);
    }

    #[test]
    fn decay_is_monotone_along_every_chain(n0 in 4u32..16, blocks in 2usize..8) {
        let tl = harmonic_half_cylinder(n0, blocks, mode_for(n0)).unwrap();
        let d = verify_decay(&tl, &Tolerances::default());
        prop_assert!(d.monotone, "increase {}", d.worst_increase);
        prop_assert!(d.log_sup.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn construction_files_round_trip(
        kind in prop::sample::select(TimelineKind::ALL.to_vec()),
        blocks in 1usize..4,
    ) {
        let n0 = match kind {
            TimelineKind::PlisMiller => 50,
            TimelineKind::Gaussian => 3,
            _ => 12,
        };
        let params = BuildParams { kind, n0, blocks, ..BuildParams::default() };
        let file = ConstructionFile::new(params, params.build().unwrap());
        let back = ConstructionFile::from_json(&file.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.to_json().unwrap(), file.to_json().unwrap());
    }

    #[test]
    fn residual_sampling_is_reproducible(seed in any::<u64>()) {
        let tl = harmonic_half_cylinder(6, 2, PackingMode::Flexible).unwrap();
        let tol = Tolerances::default();
        let (a, b) = (verify_residual(&tl, 50, seed, &tol), verify_residual(&tl, 50, seed, &tol));
        prop_assert_eq!(a, b);
    }
}
