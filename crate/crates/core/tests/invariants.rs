use approx::assert_relative_eq;
use curvegeom::bessel::bessel_k;
use curvegeom::inner::{inner_eval, InnerMetric};
use curvegeom::kernel::gram;
use curvegeom::outer::outer_eval;
use curvegeom::{Curve, MetricConfig, TangentField};
use proptest::prelude::*;

fn wobbly(n: usize, a2: f64, a3: f64, c: [f64; 2]) -> Curve {
    Curve::from_fn(n, 2, |t| {
        let r = 2.0 * (1.0 + a2 * (2.0 * t).cos() + a3 * (3.0 * t).sin());
        vec![c[0] + r * t.cos(), c[1] + r * t.sin()]
    })
    .unwrap()
}

fn field(n: usize, seed: &[f64]) -> TangentField {
    TangentField::from_fn(n, 2, |t| vec![seed[0] * t.cos() + seed[1] * (2.0 * t).sin(), seed[2] + seed[3] * (3.0 * t).cos()]).unwrap()
}

#[test]
fn ellipse_perimeter() {
    // complete elliptic integral 8 E(sqrt(3)/2) for semi-axes 2 and 1
    let exact = 9.688448220547675;
    let err = |n| (Curve::ellipse(n, 2.0, 1.0).unwrap().length().unwrap() - exact).abs() / exact;
    assert!(err(128) < 1e-3);
    let order = (err(64) / err(128)).log2();
    assert!((order - 2.0).abs() < 0.1, "order {order}");
}

#[test]
fn half_order_bessel_is_elementary() {
    for x in [0.01, 0.3, 1.0, 4.0, 25.0] {
        let exact = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
        assert_relative_eq!(bessel_k(0.5, x).unwrap(), exact, max_relative = 1e-12);
    }
}

#[test]
fn curves_survive_json() {
    let q = wobbly(24, 0.05, -0.03, [0.3, 0.1]);
    let text = serde_json::to_string(&q).unwrap();
    let back: Curve = serde_json::from_str(&text).unwrap();
    assert_eq!(back, q);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metrics_ignore_translation_and_relabelling(
        a2 in -0.08f64..0.08, a3 in -0.08f64..0.08,
        cx in -3.0f64..3.0, cy in -3.0f64..3.0,
        shift in 0usize..32,
        seed in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let n = 32;
        let q = wobbly(n, a2, a3, [0.0, 0.0]);
        let moved = q.translated(&[cx, cy]).unwrap();
        let u = field(n, &seed);
        let m = InnerMetric::new(MetricConfig::default()).unwrap();
        let k = MetricConfig::default().kernel().unwrap();

        let gi = inner_eval(&m, &q, &u, &u).unwrap();
        prop_assert!((inner_eval(&m, &moved, &u, &u).unwrap() - gi).abs() <= 1e-10 * gi);
        let (qs, us) = (q.cyclic_shift(shift), u.cyclic_shift(shift));
        prop_assert!((inner_eval(&m, &qs, &us, &us).unwrap() - gi).abs() <= 1e-10 * gi);

        let go = outer_eval(&k, &q, &u, &u).unwrap();
        prop_assert!((outer_eval(&k, &moved, &u, &u).unwrap() - go).abs() <= 1e-8 * go);
        prop_assert!((outer_eval(&k, &qs, &us, &us).unwrap() - go).abs() <= 1e-8 * go);
    }

    #[test]
    fn metrics_are_symmetric_and_positive(
        a2 in -0.08f64..0.08,
        s1 in prop::array::uniform4(-1.0f64..1.0),
        s2 in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let q = wobbly(32, a2, 0.02, [0.5, -0.5]);
        let (u, v) = (field(32, &s1), field(32, &s2));
        let m = InnerMetric::new(MetricConfig::default()).unwrap();
        let k = MetricConfig::default().kernel().unwrap();
        let (a, b) = (inner_eval(&m, &q, &u, &v).unwrap(), inner_eval(&m, &q, &v, &u).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        let (a, b) = (outer_eval(&k, &q, &u, &v).unwrap(), outer_eval(&k, &q, &v, &u).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        prop_assert!(inner_eval(&m, &q, &u, &u).unwrap() > 0.0);
        prop_assert!(outer_eval(&k, &q, &u, &u).unwrap() > 0.0);
    }

    #[test]
    fn gram_solve_inverts_apply(a3 in -0.08f64..0.08, seed in prop::collection::vec(-1.0f64..1.0, 64)) {
        let k = MetricConfig::default().kernel().unwrap();
        let b = gram(&k, &wobbly(32, 0.03, a3, [0.0, 0.0])).unwrap();
        let back = b.solve(&b.apply(&seed).unwrap()).unwrap().momentum;
        let err = back.iter().zip(&seed).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-9 * seed.iter().map(|y| y * y).sum::<f64>().sqrt());
    }
}
