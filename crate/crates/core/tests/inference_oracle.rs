use bugb::inference::{forward_filter, posterior};
use bugb::oracle::{dense_posterior_oracle, DenseGaussian};
use bugb::{ChainHyperparams, Grid, Observation, PosteriorBelief};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn worst_deviation(belief: &PosteriorBelief, dense: &DenseGaussian) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, m) in belief.smoothed().iter().enumerate() {
        let c = dense.node_cov(i);
        worst = worst
            .max(rel(m.value_mean(), dense.value_mean(i)))
            .max(rel(m.grad_mean(), dense.grad_mean(i)));
        for r in 0..2 {
            for k in 0..2 {
                worst = worst.max(rel(m.cov[(r, k)], c[(r, k)]));
            }
        }
    }
    worst
}

#[derive(Debug, Clone)]
struct Instance {
    grid: Grid,
    hyper: ChainHyperparams,
    obs: Vec<Observation>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=10)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.05f64..1.0, n - 1),
                -2.0f64..2.0,
                (1e-4f64..1.0, 1e-2f64..10.0),
                (0.5f64..50.0, 0.5f64..50.0, -0.9f64..0.9, -1.0f64..1.0, -1.0f64..1.0),
                prop::collection::vec((0..n, any::<bool>(), -3.0f64..3.0, 1e-3f64..2.0), 0..=8),
            )
        })
        .prop_map(|(gaps, start, (sf, sg), (vf, vg, rho, m0, m1), raw)| {
            let mut points = vec![start];
            for g in gaps {
                points.push(points.last().unwrap() + g);
            }
            let grid = Grid::new(points).unwrap();
            let cross = rho * (vf * vg).sqrt();
            let hyper = ChainHyperparams {
                sigma_f_sq: sf,
                sigma_g_sq: sg,
                obs_value_var: 1.0,
                obs_grad_var: 1.0,
                prior_mean: [m0, m1],
                prior_cov: [[vf, cross], [cross, vg]],
            };
            let obs = raw
                .into_iter()
                .map(|(node, grad, y, v)| {
                    if grad {
                        Observation::gradient(node, y, v)
                    } else {
                        Observation::value(node, y, v)
                    }
                })
                .collect();
            Instance { grid, hyper, obs }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smoothed_marginals_match_dense_oracle(inst in instance()) {
        let belief = posterior(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let dense = dense_posterior_oracle(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        prop_assert!(worst_deviation(&belief, &dense) < 1e-8);
    }

    #[test]
    fn last_filtered_marginal_is_the_full_posterior(inst in instance()) {
        let chain = forward_filter(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let dense = dense_posterior_oracle(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let last = inst.grid.last_index();
        let f = &chain.filtered()[last];
        prop_assert!(rel(f.value_mean(), dense.value_mean(last)) < 1e-8);
        prop_assert!(rel(f.value_var(), dense.value_var(last)) < 1e-8);
        prop_assert!(rel(f.grad_var(), dense.grad_var(last)) < 1e-8);
    }

    #[test]
    fn extra_observation_never_adds_variance(inst in instance(), node in 0usize..10, y in -3.0f64..3.0, v in 1e-3f64..2.0) {
        let node = node % inst.grid.resolution();
        let before = posterior(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let mut more = inst.obs.clone();
        more.push(Observation::value(node, y, v));
        let after = posterior(&inst.grid, &inst.hyper, &more).unwrap();
        for (a, b) in after.smoothed().iter().zip(before.smoothed()) {
            prop_assert!(a.value_var() <= b.value_var() * (1.0 + 1e-9) + 1e-12);
            prop_assert!(a.grad_var() <= b.grad_var() * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn observation_order_is_irrelevant(inst in instance(), seed in any::<u64>()) {
        let mut shuffled = inst.obs.clone();
        let mut s = seed | 1;
        for i in (1..shuffled.len()).rev() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            shuffled.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let a = posterior(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let b = posterior(&inst.grid, &inst.hyper, &shuffled).unwrap();
        for (x, y) in a.smoothed().iter().zip(b.smoothed()) {
            prop_assert!(rel(x.value_mean(), y.value_mean()) < 1e-10);
            prop_assert!(rel(x.grad_mean(), y.grad_mean()) < 1e-10);
            prop_assert!(rel(x.value_var(), y.value_var()) < 1e-10);
        }
    }

    #[test]
    fn negating_data_negates_means(inst in instance()) {
        let mut flipped = inst.hyper.clone();
        flipped.prior_mean = [-inst.hyper.prior_mean[0], -inst.hyper.prior_mean[1]];
        let obs: Vec<Observation> = inst
            .obs
            .iter()
            .map(|o| Observation { measurement: -o.measurement, ..*o })
            .collect();
        let a = posterior(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let b = posterior(&inst.grid, &flipped, &obs).unwrap();
        for (x, y) in a.smoothed().iter().zip(b.smoothed()) {
            prop_assert!(rel(x.value_mean(), -y.value_mean()) < 1e-9);
            prop_assert!(rel(x.grad_mean(), -y.grad_mean()) < 1e-9);
            prop_assert!(rel(x.value_var(), y.value_var()) < 1e-9);
        }
    }

    #[test]
    fn shifting_values_shifts_value_means(inst in instance(), c in -5.0f64..5.0) {
        let mut shifted = inst.hyper.clone();
        shifted.prior_mean[0] += c;
        let obs: Vec<Observation> = inst
            .obs
            .iter()
            .map(|o| match o.kind {
                bugb::ObservationKind::Value => Observation { measurement: o.measurement + c, ..*o },
                bugb::ObservationKind::Gradient => *o,
            })
            .collect();
        let a = posterior(&inst.grid, &inst.hyper, &inst.obs).unwrap();
        let b = posterior(&inst.grid, &shifted, &obs).unwrap();
        for (x, y) in a.smoothed().iter().zip(b.smoothed()) {
            prop_assert!(rel(x.value_mean() + c, y.value_mean()) < 1e-8);
            prop_assert!(rel(x.grad_mean(), y.grad_mean()) < 1e-8);
        }
    }
}

#[test]
fn six_node_mixed_example() {
    let grid = Grid::uniform(0.0, 1.0, 6).unwrap();
    let hyper = ChainHyperparams {
        sigma_f_sq: 1e-2,
        sigma_g_sq: 2.0,
        ..ChainHyperparams::default()
    };
    let obs = [
        Observation::value(1, 0.4, 0.05),
        Observation::gradient(3, -1.0, 0.2),
        Observation::value(5, -0.3, 0.1),
    ];
    let belief = posterior(&grid, &hyper, &obs).unwrap();
    let dense = dense_posterior_oracle(&grid, &hyper, &obs).unwrap();
    assert!(worst_deviation(&belief, &dense) < 1e-8);
}

#[test]
fn exact_observations_pin_the_chain() {
    let grid = Grid::uniform(0.0, 1.0, 7).unwrap();
    let hyper = ChainHyperparams::default();
    let obs = [
        Observation::value(0, 1.0, 0.0),
        Observation::gradient(0, 0.5, 0.0),
        Observation::value(4, 0.2, 0.0),
        Observation::value(6, -0.1, 0.3),
    ];
    let belief = posterior(&grid, &hyper, &obs).unwrap();
    let dense = dense_posterior_oracle(&grid, &hyper, &obs).unwrap();
    assert!(worst_deviation(&belief, &dense) < 1e-8);
    let s = belief.smoothed();
    assert_eq!(s[0].value_mean(), 1.0);
    assert_eq!(s[0].value_var(), 0.0);
    assert_eq!(s[0].grad_var(), 0.0);
    assert!((s[4].value_mean() - 0.2).abs() < 1e-12);
    assert!(s[4].value_var().abs() < 1e-12);
}

#[test]
fn correlated_prior_single_value_observation() {
    let grid = Grid::uniform(0.0, 1.0, 2).unwrap();
    let hyper = ChainHyperparams {
        prior_mean: [0.3, -0.2],
        prior_cov: [[2.0, 0.6], [0.6, 1.0]],
        ..ChainHyperparams::default()
    };
    let obs = [Observation::value(0, 1.5, 0.5)];
    let belief = posterior(&grid, &hyper, &obs).unwrap();
    // Hand conditioning at node 0: gain = [2, 0.6] / 2.5.
    let m = &belief.smoothed()[0];
    assert!((m.value_mean() - (0.3 + 2.0 / 2.5 * 1.2)).abs() < 1e-10);
    assert!((m.grad_mean() - (-0.2 + 0.6 / 2.5 * 1.2)).abs() < 1e-10);
    assert!((m.value_var() - (2.0 - 4.0 / 2.5)).abs() < 1e-10);
    assert!((m.grad_var() - (1.0 - 0.36 / 2.5)).abs() < 1e-10);
    assert!((m.cov[(0, 1)] - (0.6 - 1.2 / 2.5)).abs() < 1e-10);
}
