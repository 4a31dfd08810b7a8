use dpsm::{parse_config, render};
use dpsm_core::config::{
    ConstraintSpec, ControlConfig, Method, MethodConfig, NetworkConfig, NetworkMode, OutputConfig, ProblemConfig,
    ProblemSource, RunConfig, StepsizeSpec,
};
use dpsm_core::Batch;
use proptest::prelude::*;

fn source() -> impl Strategy<Value = ProblemSource> {
    prop_oneof![
        (1usize..500).prop_map(|n| ProblemSource::Synthetic { n }),
        ("[a-zA-Z0-9_./#]([a-zA-Z0-9_./# -]{0,20}[a-zA-Z0-9_./#])?", 0usize..100, 1usize..5).prop_map(|(path, image_index, downsample)| {
            ProblemSource::Mnist {
                path,
                image_index,
                downsample,
            }
        }),
    ]
}

fn stepsize() -> impl Strategy<Value = StepsizeSpec> {
    let pos = 1e-6f64..10.0;
    prop_oneof![
        (pos.clone(), 0.0f64..=1.0).prop_map(|(a, q)| StepsizeSpec::Polynomial { a, q }),
        (pos.clone(), 0.01f64..0.999).prop_map(|(mu0, gamma)| StepsizeSpec::Geometric { mu0, gamma }),
        (pos.clone(), 0.0f64..=1.0, proptest::option::of(1usize..1000))
            .prop_map(|(a, q, epoch_length)| StepsizeSpec::EpochPolynomial { a, q, epoch_length }),
        pos.prop_map(|alpha| StepsizeSpec::Constant { alpha }),
    ]
}

fn constraint() -> impl Strategy<Value = ConstraintSpec> {
    prop_oneof![
        Just(ConstraintSpec::WholeSpace),
        (1e-3f64..1e3).prop_map(|radius| ConstraintSpec::Ball { radius }),
        (-1e3f64..0.0, 0.0f64..1e3).prop_map(|(lower, upper)| ConstraintSpec::Box { lower, upper }),
    ]
}

prop_compose! {
    fn run_config()(
        source in source(),
        agents in 1usize..50,
        m in 1usize..200,
        seed in any::<u64>(),
        resample in any::<bool>(),
        p in 0.001f64..=1.0,
        net_seed in any::<u64>(),
        interval_bound in proptest::option::of(1usize..20),
        method in prop_oneof![Just(Method::Dpsm), Just(Method::StoDpsm), Just(Method::CSub), Just(Method::StoCSub)],
        batch_frac in proptest::option::of(0.0f64..1.0),
        stepsize in stepsize(),
        constraint in constraint(),
        max_iterations in 0usize..100_000,
        stop_tol in prop_oneof![Just(0.0), 1e-20f64..1.0],
        metric_stride in 1usize..100,
        envelope_stride in 0usize..1000,
        t_factor in 0.01f64..0.99,
        inner_budget in 1usize..10_000,
        sharpness_probes in 1usize..1000,
        sharpness_radius in 1e-4f64..1.0,
        csv in proptest::option::of("[a-z0-9_/]{1,12}\\.csv"),
        image in proptest::option::of("[a-z0-9_/]{1,12}\\.pgm"),
    ) -> RunConfig {
        let pool = if method == Method::StoCSub { agents * m } else { m };
        let batch = match batch_frac {
            None => Batch::Full,
            Some(f) => Batch::Sample(1 + (f * (pool - 1) as f64) as usize),
        };
        RunConfig {
            problem: ProblemConfig { source, agents, m, seed },
            network: NetworkConfig {
                mode: if resample { NetworkMode::Resample } else { NetworkMode::Fixed },
                p,
                seed: net_seed,
                interval_bound,
            },
            method: MethodConfig { method, batch },
            stepsize,
            constraint,
            control: ControlConfig {
                max_iterations,
                stop_tol,
                metric_stride,
                envelope_stride,
                t_factor,
                inner_budget,
                sharpness_probes,
                sharpness_radius,
            },
            output: OutputConfig { csv, image },
        }
    }
}

proptest! {
    #[test]
    fn parse_inverts_render(config in run_config()) {
        config.validate().unwrap();
        let text = render(&config);
        prop_assert_eq!(parse_config(&text).unwrap(), config);
    }

    #[test]
    fn render_is_a_fixed_point(config in run_config()) {
        let text = render(&config);
        prop_assert_eq!(render(&parse_config(&text).unwrap()), text);
    }
}

#[test]
fn large_stochastic_config() {
    let text = "problem.n = 100\nproblem.N = 10\nproblem.m = 1000\nmethod.name = stodpsm\n\
                method.batch_size = 1\nstepsize.variant = epoch-polynomial\nstepsize.a = 0.01\nstepsize.q = 0.5\n";
    let c = parse_config(text).unwrap();
    assert_eq!(c.problem.source, ProblemSource::Synthetic { n: 100 });
    assert_eq!((c.problem.agents, c.problem.m), (10, 1000));
    assert_eq!(c.method.batch, Batch::Sample(1));
    // one epoch is one pass over the local data
    assert_eq!(
        c.policy(),
        dpsm_core::StepsizePolicy::EpochPolynomial { a: 0.01, q: 0.5, epoch_length: 1000 }
    );
}
