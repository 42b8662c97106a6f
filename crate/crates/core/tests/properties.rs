use nfapprox::diophantine::{approximates, quasi_norm};
use nfapprox::lattice::{apply_flow, per_place_determinant, phi_covolume};
use nfapprox::presets::{builtin, builtin_names};
use nfapprox::spiralling::project_weighted;
use nfapprox::{AlgInt, FieldHandle, FlowParams, KSVec, LatticeSpec, Theta, WeightScheme};
use num_complex::Complex64;
use proptest::prelude::*;

fn fields() -> Vec<FieldHandle> {
    builtin_names().into_iter().map(|n| builtin(n).unwrap()).collect()
}

fn raw_weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_multiplicative(f in 0usize..5, ca in prop::collection::vec(-9i64..=9, 3), cb in prop::collection::vec(-9i64..=9, 3)) {
        let k = &fields()[f];
        let a = AlgInt::new(ca[..k.degree()].to_vec());
        let b = AlgInt::new(cb[..k.degree()].to_vec());
        prop_assert_eq!(k.norm_exact(&k.mul(&a, &b)), k.norm_exact(&a) * k.norm_exact(&b));
        let emb = k.field_norm(&k.mul(&a, &b));
        prop_assert!((emb - (k.norm_exact(&a) * k.norm_exact(&b)).abs() as f64).abs() <= 1e-9 * emb.max(1.0));
    }

    #[test]
    fn units_preserve_norm_and_log_adds(f in 0usize..5, e1 in -3i64..=3, e2 in -3i64..=3, tor in 0u32..8, c in prop::collection::vec(-9i64..=9, 3)) {
        let k = &fields()[f];
        let a = AlgInt::new(c[..k.degree()].to_vec());
        let mut u = k.pow(k.torsion_gen(), tor % k.torsion_order());
        for i in 0..k.unit_rank() {
            u = k.mul(&u, &k.unit_pow(i, e1));
        }
        prop_assert_eq!(k.norm_exact(&u).abs(), 1);
        prop_assert_eq!(k.norm_exact(&k.mul(&u, &a)).abs(), k.norm_exact(&a).abs());
        if k.unit_rank() > 0 {
            let v = k.unit_pow(0, e2);
            let lhs = k.log_unit(&k.mul(&u, &v)).unwrap();
            let (lu, lv) = (k.log_unit(&u).unwrap(), k.log_unit(&v).unwrap());
            for ((x, y), z) in lhs.iter().zip(&lu).zip(&lv) {
                prop_assert!((x - y - z).abs() < 1e-8);
            }
            prop_assert!(lhs.iter().sum::<f64>().abs() < 1e-8);
        }
    }

    #[test]
    fn quasi_norm_is_flow_homogeneous(raw in raw_weights(3), xs in prop::collection::vec(-5.0f64..5.0, 3), t in -4.0f64..4.0) {
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let block: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let scaled: Vec<Complex64> = block.iter().zip(&w).map(|(z, w)| z * (t * w).exp()).collect();
        let base = quasi_norm(&block, &w);
        prop_assert!((quasi_norm(&scaled, &w) - t.exp() * base).abs() <= 1e-9 * (1.0 + t.exp() * base));
    }

    #[test]
    fn flows_compose_and_preserve_volume(a in raw_weights(2), b in raw_weights(2), s in -3.0f64..3.0, t in -3.0f64..3.0, xs in prop::collection::vec(-3.0f64..3.0, 4)) {
        let k = builtin("Qsqrt2").unwrap();
        let w = WeightScheme::normalized(&k, 1, 1, &a, &b).unwrap();
        let v = KSVec::from_rows(&[
            vec![Complex64::new(xs[0], 0.0), Complex64::new(xs[1], 0.0)],
            vec![Complex64::new(xs[2], 0.0), Complex64::new(xs[3], 0.0)],
        ]);
        let flow = |t: f64, v: &KSVec| apply_flow(&FlowParams { weights: w.clone(), t }, v).unwrap();
        let two = flow(s, &flow(t, &v));
        let one = flow(s + t, &v);
        for (x, y) in two.entries.iter().zip(&one.entries) {
            prop_assert!((x - y).norm() <= 1e-9 * (1.0 + y.norm()));
        }
        let log_det: f64 = per_place_determinant(&w, t).iter().zip(&w.d_nu).map(|(d, n)| *n as f64 * d.ln()).sum();
        prop_assert!(log_det.abs() < 1e-9);
    }

    #[test]
    fn projection_is_constant_on_flow_lines(raw in raw_weights(2), xs in prop::collection::vec(-4.0f64..4.0, 2), t in -5.0f64..5.0) {
        prop_assume!(xs.iter().any(|x| x.abs() > 1e-3));
        let s: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let gi = builtin("Qi").unwrap();
        let block = vec![Complex64::new(xs[0], xs[1]), Complex64::new(xs[1], -xs[0])];
        let real = vec![false; gi.num_places()];
        let flowed: Vec<Complex64> = block.iter().zip(&w).map(|(z, w)| z * (t * w).exp()).collect();
        let p0 = project_weighted(&block, &w, &real).unwrap();
        let p1 = project_weighted(&flowed, &w, &real).unwrap();
        let len: f64 = p0.coords.iter().map(|c| c * c).sum();
        prop_assert!((len - 1.0).abs() < 1e-10);
        for (a, b) in p0.coords.iter().zip(&p1.coords) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn regions_nest(f in 0usize..5, seed in any::<u64>(), c in 0.2f64..1.5, dc in 0.0f64..1.0, t in 0.5f64..2.5, dt in 0.0f64..0.8) {
        let k = &fields()[f];
        let w = WeightScheme::equal(k, 1, 1);
        let mut r = nfapprox::rng::stream(seed, 0);
        let spec = LatticeSpec::new(k, Theta::random(k, 1, 1, &mut r)).unwrap();
        let small = approximates(&spec, &w, c, t).unwrap();
        let large = approximates(&spec, &w, c + dc, t + dt).unwrap();
        prop_assert!(small.len() <= large.len());
        for rec in &small {
            prop_assert!(large.iter().any(|o| o.p == rec.p && o.q == rec.q));
        }
    }

    #[test]
    fn phi_routes_agree_on_random_coprime_pairs(f in 0usize..5, p in prop::collection::vec(-6i64..=6, 3), q in prop::collection::vec(-6i64..=6, 3), d in 2u32..=3) {
        let k = &fields()[f];
        let (p, q) = (AlgInt::new(p[..k.degree()].to_vec()), AlgInt::new(q[..k.degree()].to_vec()));
        prop_assume!(!p.is_zero() && !q.is_zero() && k.coprime(&p, &q));
        let r = phi_covolume(k, d, &p, &q, true).unwrap();
        prop_assert_eq!(Some(r.formula), r.smith);
    }
}
