use curvlab_core::divergences::*;
use curvlab_core::kernels::{grid_pushforward, KernelSpec};
use curvlab_core::model::{GaussianMeasure, Grid, GridDensity};
use curvlab_core::special::normal_pdf;
use curvlab_core::Extended;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn grid() -> Grid {
    Grid::new(-16.0, 16.0, 3201).unwrap()
}

#[derive(Debug, Clone)]
struct Mixture {
    w: f64,
    m: [f64; 2],
    v: [f64; 2],
}

impl Mixture {
    fn density(&self, g: Grid) -> GridDensity {
        let (w, m, v) = (self.w, self.m, self.v);
        GridDensity::from_fn(g, move |x| w * normal_pdf(x, m[0], v[0]) + (1.0 - w) * normal_pdf(x, m[1], v[1]))
            .unwrap()
    }
}

fn mixture() -> impl Strategy<Value = Mixture> {
    (0.05..0.95f64, -4.0..4.0f64, -4.0..4.0f64, 0.3..3.0f64, 0.3..3.0f64)
        .prop_map(|(w, a, b, va, vb)| Mixture { w, m: [a, b], v: [va, vb] })
}

fn kl(a: &GridDensity, b: &GridDensity) -> f64 {
    kl_grid(a, b).unwrap().value.finite().unwrap()
}

fn tv(a: &GridDensity, b: &GridDensity) -> f64 {
    tv_grid(a, b).unwrap().value.finite().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn grid_kl_is_nonnegative(a in mixture(), b in mixture()) {
        let g = grid();
        prop_assert!(kl(&a.density(g), &b.density(g)) >= 0.0);
    }

    #[test]
    fn gaussian_kl_is_nonnegative_and_vanishes_on_the_diagonal(
        m1 in -5.0..5.0f64, v1 in 0.01..5.0f64, m2 in -5.0..5.0f64, v2 in 0.01..5.0f64,
    ) {
        let a = GaussianMeasure::univariate(m1, v1).unwrap();
        let b = GaussianMeasure::univariate(m2, v2).unwrap();
        prop_assert!(kl_gaussian(&a, &b).unwrap().value >= Extended::Finite(0.0));
        prop_assert_eq!(kl_gaussian(&a, &a).unwrap().value, Extended::Finite(0.0));
    }

    #[test]
    fn closed_form_tv_matches_quadrature(m1 in -3.0..3.0f64, v1 in 0.2..4.0f64, m2 in -3.0..3.0f64, v2 in 0.2..4.0f64) {
        let g = grid();
        let closed = tv_gaussian_1d(
            &GaussianMeasure::univariate(m1, v1).unwrap(),
            &GaussianMeasure::univariate(m2, v2).unwrap(),
        ).unwrap().value.finite().unwrap();
        let quad = tv(&GridDensity::from_gaussian(g, m1, v1).unwrap(), &GridDensity::from_gaussian(g, m2, v2).unwrap());
        prop_assert!((closed - quad).abs() <= 1e-4, "{closed} vs {quad}");
    }
}


#[test]
fn pinsker_holds_on_random_pairs() {
    let g = grid();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..1000 {
        let a = mixture().new_tree(&mut runner).unwrap().current();
        let b = mixture().new_tree(&mut runner).unwrap().current();
        let (ra, rb) = (a.density(g), b.density(g));
        let t = tv(&ra, &rb);
        let k = kl(&ra, &rb);
        assert!(t <= (0.5 * k).sqrt() + 1e-9, "{a:?} {b:?}: tv {t} kl {k}");
    }
}

#[test]
fn gaussian_smoothing_contracts_divergences() {
    let g = grid();
    let kernel = KernelSpec::gaussian(0.5, 1).unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..50 {
        let a = mixture().new_tree(&mut runner).unwrap().current();
        let b = mixture().new_tree(&mut runner).unwrap().current();
        let (ra, rb) = (a.density(g), b.density(g));
        let (pa, pb) = (grid_pushforward(&kernel, &ra).unwrap(), grid_pushforward(&kernel, &rb).unwrap());
        assert!(kl(&pa, &pb) <= kl(&ra, &rb) + 1e-9);
        assert!(tv(&pa, &pb) <= tv(&ra, &rb) + 1e-9);
    }
}

#[test]
fn disjoint_support_gives_infinite_kl() {
    let g = Grid::new(-1.0, 1.0, 11).unwrap();
    let a = GridDensity::from_fn(g, |x| if x < 0.0 { 1.0 } else { 0.0 }).unwrap();
    let b = GridDensity::from_fn(g, |x| if x > 0.0 { 1.0 } else { 0.0 }).unwrap();
    assert!(kl_grid(&a, &b).unwrap().value.is_infinite());
    assert_eq!(tv_grid(&a, &b).unwrap().kind, DivergenceKind::Tv);
}
