use curvlab_core::model::{Confining, Perturbation, PotentialSpec};
use proptest::prelude::*;

fn perturbation() -> impl Strategy<Value = Perturbation> {
    prop_oneof![
        Just(Perturbation::Zero),
        (0.0..2.0f64, 0.1..3.0f64).prop_map(|(amplitude, frequency)| Perturbation::Sinusoid { amplitude, frequency }),
        (0.0..2.0f64).prop_map(|scale| Perturbation::SmoothedNorm { scale }),
    ]
}

fn spec() -> impl Strategy<Value = PotentialSpec> {
    (1usize..5, 0.05..2.0f64, 0.0..3.0f64, perturbation()).prop_flat_map(|(d, alpha, spread, pert)| {
        let beta = alpha + spread;
        (
            prop::collection::vec(-3.0..3.0f64, d),
            prop::collection::vec(alpha..=beta, d),
        )
            .prop_map(move |(center, curvature)| {
                let lip = match pert {
                    Perturbation::Zero => 0.0,
                    Perturbation::Sinusoid { amplitude, frequency } => amplitude * frequency,
                    Perturbation::SmoothedNorm { scale } => scale,
                };
                PotentialSpec::new(d, alpha, beta, lip, Confining::Quadratic { center, curvature }, pert).unwrap()
            })
    })
}

fn spec_and_points(k: usize) -> impl Strategy<Value = (PotentialSpec, Vec<Vec<f64>>)> {
    spec().prop_flat_map(move |s| {
        let d = s.dim();
        (Just(s), prop::collection::vec(prop::collection::vec(-6.0..6.0f64, d), k))
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_matches_central_differences((s, xs) in spec_and_points(100)) {
        for x in &xs {
            let g = s.gradient(x).unwrap();
            let eps = 1e-5;
            let mut fd = vec![0.0; x.len()];
            for i in 0..x.len() {
                let (mut up, mut dn) = (x.clone(), x.clone());
                up[i] += eps;
                dn[i] -= eps;
                fd[i] = (s.value(&up).unwrap() - s.value(&dn).unwrap()) / (2.0 * eps);
            }
            let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            prop_assert!(norm(&err) <= 1e-5 * (1.0 + norm(&g)), "x={x:?} g={g:?} fd={fd:?}");
        }
    }

    #[test]
    fn confining_gradient_is_monotone_within_curvature_bounds((s, xs) in spec_and_points(40)) {
        let unperturbed = PotentialSpec::new(
            s.dim(), s.alpha(), s.beta(), 0.0, s.confining().clone(), Perturbation::Zero,
        ).unwrap();
        for pair in xs.chunks_exact(2) {
            let (x, y) = (&pair[0], &pair[1]);
            let gx = unperturbed.gradient(x).unwrap();
            let gy = unperturbed.gradient(y).unwrap();
            let inner: f64 = gx.iter().zip(&gy).zip(x.iter().zip(y)).map(|((a, b), (p, q))| (a - b) * (p - q)).sum();
            let d2: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
            prop_assert!(inner >= s.alpha() * d2 - 1e-9 * (1.0 + d2));
            prop_assert!(inner <= s.beta() * d2 + 1e-9 * (1.0 + d2));
        }
    }

    #[test]
    fn perturbation_gradient_respects_sup_norm((s, xs) in spec_and_points(100)) {
        let unperturbed = PotentialSpec::new(
            s.dim(), s.alpha(), s.beta(), 0.0, s.confining().clone(), Perturbation::Zero,
        ).unwrap();
        for x in &xs {
            let g = s.gradient(x).unwrap();
            let gv = unperturbed.gradient(x).unwrap();
            let gh: Vec<f64> = g.iter().zip(&gv).map(|(a, b)| a - b).collect();
            prop_assert!(norm(&gh) <= s.grad_h_sup_norm() + 1e-12);
        }
    }
}
