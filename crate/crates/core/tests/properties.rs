//! Property tests over randomized envelopes, funnels, jets and expressions.

use std::sync::Arc;

use epscalc::envelope::{env_compose, env_dominates, env_scale_bounded, env_sum, funnel_boxes, ErrorEnvelope};
use epscalc::expr::{parse, Expr, Func};
use epscalc::jet::Jet1;
use proptest::prelude::*;

fn analytic() -> impl Strategy<Value = ErrorEnvelope<f64>> {
    (0.0..4.0f64, 0.2..3.0f64, 0.01..=1.0f64).prop_map(|(c, p, r)| ErrorEnvelope::analytic(c, p, r).unwrap())
}

fn power(e: &ErrorEnvelope<f64>) -> impl Fn(f64) -> f64 + Sync {
    let (c, p) = (e.coeff(), e.power());
    move |x: f64| c * x.abs().powf(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sum_dominates_pointwise_sum(a in analytic(), b in analytic()) {
        let s = env_sum(&a, &b).unwrap();
        let (fa, fb) = (power(&a), power(&b));
        prop_assert!(s.radius() <= 1.0);
        prop_assert!(s.certify(|e| fa(e) + fb(e), 0.0).unwrap().pass());
    }

    #[test]
    fn scaled_dominates_bounded_product(a in analytic(), m in 0.0..10.0f64, phase in 0.0..7.0f64) {
        let s = env_scale_bounded(&a, m).unwrap();
        let fa = power(&a);
        prop_assert!(s.certify(|e| m * (phase + 3.0 * e).sin() * fa(e), 0.0).unwrap().pass());
    }

    #[test]
    fn composition_dominates_nested(a in analytic(), b in analytic()) {
        let c = env_compose(&a, &b).unwrap();
        let (fa, fb) = (power(&a), power(&b));
        prop_assert!(c.certify(|e| fa(fb(e)), 0.0).unwrap().pass());
    }

    #[test]
    fn funnel_is_monotone(c in 0.1..4.0f64, p in 0.3..3.0f64, n in 1usize..12, frac in 0.05..=1.0f64) {
        let e = ErrorEnvelope::analytic(c, p, 1.0).unwrap();
        let y0 = c * frac;
        let boxes = funnel_boxes(&e, n, y0, 0.0).unwrap();
        prop_assert_eq!(boxes.len(), n);
        for w in boxes.windows(2) {
            prop_assert!(w[1].x_hi < w[0].x_hi && w[1].y_hi < w[0].y_hi);
            prop_assert!(w[0].contains(&w[1]));
        }
    }

    #[test]
    fn certified_samplers_vanish_at_zero(k in 0.001..1.0f64) {
        let e = ErrorEnvelope::analytic(1.0, 1.0, 1.0).unwrap();
        let cert = e.certify(|x| if x == 0.0 { k } else { 0.0 }, 1.0).unwrap();
        prop_assert!(!cert.pass());
        prop_assert_eq!(cert.witness.unwrap().eps, 0.0);
    }

    #[test]
    fn domination_is_transitive(ca in 0.0..2.0f64, pa in 0.2..2.0f64, cb in 0.0..2.0f64, pb in 0.2..2.0f64, cc in 0.0..2.0f64, pc in 0.2..2.0f64) {
        let a = ErrorEnvelope::analytic(ca, pa, 1.0).unwrap();
        let b = ErrorEnvelope::analytic(cb, pb, 1.0).unwrap();
        let fb = move |x: f64| cb * x.abs().powf(pb);
        let fc = move |x: f64| cc * x.abs().powf(pc);
        if env_dominates(&a, fb).unwrap() && env_dominates(&b, fc).unwrap() {
            prop_assert!(env_dominates(&a, fc).unwrap());
        }
    }

    #[test]
    fn jet_addition_is_commutative_and_associative(x0 in -3.0..3.0f64, u in -5.0..5.0f64, v in -5.0..5.0f64) {
        let a = Jet1::monomial(2, x0);
        let b = Jet1::constant(u, x0);
        let c = Jet1::var(x0).add(&Jet1::constant(v, x0)).unwrap();
        let ab = a.add(&b).unwrap();
        let ba = b.add(&a).unwrap();
        prop_assert_eq!((ab.value, ab.slope), (ba.value, ba.slope));
        let l = ab.add(&c).unwrap();
        let r = a.add(&b.add(&c).unwrap()).unwrap();
        prop_assert!((l.value - r.value).abs() <= 1e-12 * (1.0 + l.value.abs()));
        prop_assert_eq!(l.slope, r.slope);
    }

    #[test]
    fn parse_display_round_trip(e in expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), e);
    }
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (0u32..1000).prop_map(|k| Expr::Const(k as f64 / 8.0)),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), -4i64..5, 1i64..4).prop_map(|(a, n, d)| Expr::pow(a, n, d)),
            (inner, 0..Func::ALL.len()).prop_map(|(a, k)| Expr::call(Func::ALL[k], a)),
        ]
    })
}

#[test]
fn empirical_funnel_matches_sampled_widths() {
    let e = ErrorEnvelope::empirical(Arc::new(|x: f64| x * x), 1.0).unwrap();
    let boxes = funnel_boxes(&e, 3, 0.25, 0.0).unwrap();
    for (b, w) in boxes.iter().zip([0.5, 0.5f64.powf(1.5), 0.25]) {
        // prefix widths sit on the grid, just inside the analytic width
        assert!(b.x_hi <= w && b.x_hi > w * 0.98, "{} vs {w}", b.x_hi);
    }
}
