//! Property-based checks of the numerical building blocks and of the serialization
//! layer, on small grids so that each case stays cheap.

use proptest::prelude::*;

use halfwave::dynamics::{StateSpec, TimeSeries};
use halfwave::experiments::{series_from_csv, series_to_csv, ExperimentConfig};
use halfwave::funcalc::{make_dyadic_partition, SmoothCutoff};
use halfwave::grid::{inverse_sine_transform, sine_transform};
use halfwave::operators::{apply_fractional_momentum, apply_generator_a, PotentialSpec};
use halfwave::{build_radial_grid, WaveFunction, C64};

fn state(n: usize, h: f64, re: &[f64], im: &[f64]) -> WaveFunction {
    let grid = build_radial_grid(n, h).unwrap();
    let values = re.iter().zip(im).map(|(a, b)| C64::new(*a, *b)).collect();
    WaveFunction::new(grid, values).unwrap()
}

fn vectors(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0..1.0f64, n), prop::collection::vec(-1.0..1.0f64, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sine_transform_is_unitary_and_involutive((re, im) in vectors(64), h in 0.1..3.0f64) {
        let psi = state(64, h, &re, &im);
        let c = sine_transform(&psi);
        prop_assert!((c.norm() - psi.norm()).abs() <= 1e-12 * psi.norm().max(1.0));
        let back = inverse_sine_transform(&c);
        prop_assert!(back.distance(&psi).unwrap() <= 1e-12 * psi.norm().max(1.0));
    }

    #[test]
    fn momentum_powers_compose((re, im) in vectors(48), a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let psi = state(48, 0.5, &re, &im);
        let ab = apply_fractional_momentum(&apply_fractional_momentum(&psi, a).unwrap(), b).unwrap();
        let direct = apply_fractional_momentum(&psi, a + b).unwrap();
        prop_assert!(ab.distance(&direct).unwrap() <= 1e-10 * direct.norm().max(1.0));
    }

    #[test]
    fn generator_is_symmetric((r1, i1) in vectors(40), (r2, i2) in vectors(40)) {
        let phi = state(40, 0.7, &r1, &i1);
        let psi = WaveFunction::new(phi.grid().clone(), r2.iter().zip(&i2).map(|(a, b)| C64::new(*a, *b)).collect()).unwrap();
        let lhs = phi.inner(&apply_generator_a(&psi)).unwrap();
        let rhs = apply_generator_a(&phi).inner(&psi).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn dyadic_partition_sums_to_one(l in 1e-4..4.0f64, n_max in 1u32..8, delta in 0.02..0.3f64) {
        let p = make_dyadic_partition(n_max, delta, None).unwrap();
        let total: f64 = (0..=n_max).filter_map(|n| p.shell(n)).map(|s| s.profile_sq(l)).sum::<f64>() + p.tail_sq(l);
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum {} at λ={}", total, l);
    }

    #[test]
    fn smooth_step_is_monotone_between_zero_and_one(c in 0.2..3.0f64, w in 0.05..0.5f64, x in 0.0..4.0f64, dx in 0.0..0.5f64) {
        let f = SmoothCutoff::step_up(c, w * c).unwrap();
        let (lo, hi) = (f.eval(x), f.eval(x + dx));
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo - 1e-15);
    }

    #[test]
    fn csv_round_trip_is_exact(
        rows in prop::collection::vec((0.0..1e6f64, -1e300..1e300f64), 1..20),
        shell in prop::option::of(0u32..12),
        tag in "[a-zA-Z0-9 ,|'()^/<>=-]{1,24}",
    ) {
        let (times, values): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        let s = vec![TimeSeries::new(tag, shell, times, values)];
        let text = series_to_csv(&s).unwrap();
        prop_assert_eq!(series_from_csv(&text).unwrap(), s);
    }

    #[test]
    fn config_toml_round_trip(n in 16usize..4096, h in 0.01..10.0f64, seed in 0..=i64::MAX as u64, gamma in -1.0..1.0f64,
                              r0 in 1.0..100.0f64, k in 0.01..3.0f64, b in 0.05..0.95f64) {
        let mut cfg = ExperimentConfig::new(n, h);
        cfg.seed = seed;
        cfg.potential = PotentialSpec::soft_decay(gamma, 3.0);
        cfg.state = StateSpec::gaussian(r0, r0 / 4.0, k);
        cfg.cutoffs.b = b;
        cfg.cutoffs.shells = Some(vec![1, 3]);
        let text = cfg.to_toml_string().unwrap();
        prop_assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }
}

#[test]
fn csv_preserves_non_finite_values() {
    let s = vec![TimeSeries::new("edge", Some(2), vec![1.0, 2.0, 3.0], vec![f64::INFINITY, f64::NEG_INFINITY, f64::NAN])];
    let back = series_from_csv(&series_to_csv(&s).unwrap()).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(back[0].values[0], f64::INFINITY);
    assert_eq!(back[0].values[1], f64::NEG_INFINITY);
    assert!(back[0].values[2].is_nan());
}

#[test]
fn seeds_beyond_toml_integers_are_rejected_not_truncated() {
    let mut cfg = ExperimentConfig::new(64, 1.0);
    cfg.seed = u64::MAX;
    assert!(cfg.to_toml_string().is_err());
}
