//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use dpsm::export::{data_lines, parse_csv};
use dpsm::pgm::{decode_pgm, gray_level};
use dpsm::{execute, parse_config, Outcome};
use dpsm_core::config::RunConfig;
use dpsm_core::geometry::{prox, FeasibleSet};
use dpsm_core::math::{dot, norm};
use dpsm_core::network::{consensus_decay_trace, metropolis_weights, second_singular_value};
use dpsm_core::solver::{fit_linear_rate, RunStatus};
use dpsm_core::theory_checks::{fit_phi_decay, run_suite};
use dpsm_core::{derive_stream, Graph, MixingSchedule, ObjectiveOracle, PhaseRetrievalInstance};
use rand::Rng;
use rand_distr::StandardNormal;

// criterion 2
const PATH_SIGMA2_TOL: f64 = 1e-10;
const ER_NODES: usize = 400;
const ER_P: f64 = 0.3;
const ER_LAMBDA: f64 = 0.28;
const ER_LAMBDA_TOL: f64 = 0.05;
const ER_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const DECAY_HORIZON: usize = 60;

// criterion 3
const FD_POINTS: usize = 1000;
const FD_TOL: f64 = 1e-5;
const TRUTH_VALUE_TOL: f64 = 1e-12;
const ENVELOPE_POINTS: usize = 50;
const ENVELOPE_TOL: f64 = 1e-3;

// criteria 4, 5, 7
const SYN_SEED: u64 = 2;
const SYN_MU0: [f64; 3] = [0.1, 0.15, 0.2];
const SYN_GAMMA: [f64; 3] = [0.93, 0.95, 0.97];
const SYN_TARGET: f64 = 1e-6;
const SYN_MAX_ITER: usize = 5000;
const RATE_SLACK: f64 = 0.02;

// criterion 6
const STO_SEEDS: [u64; 3] = [0, 1, 2];
const STO_A: f64 = 0.003;
const STO_BATCH: usize = 10;
const STO_T: usize = 25;
const STO_RATIO: f64 = 0.6;

// criterion 8
const MNIST_TARGET: f64 = 1e-4;
const MNIST_GRAY_TOL: u8 = 1;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/mnist-16-images-idx3-ubyte")
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn synthetic_text(method: &str, mu0: f64, gamma: f64, extra: &str) -> String {
    format!(
        "problem.n = 20\nproblem.N = 10\nproblem.m = 6\nproblem.seed = {SYN_SEED}\n\
         network.mode = fixed\nnetwork.p = 0.5\nnetwork.seed = 0\n\
         method.name = {method}\n{extra}\
         stepsize.variant = geometric\nstepsize.mu0 = {mu0:?}\nstepsize.gamma = {gamma:?}\n\
         control.max_iterations = {SYN_MAX_ITER}\ncontrol.envelope_stride = 0\n"
    )
}

/// Synthetic geometric-stepsize run that stops at relative distance 1e-6.
fn synthetic_run(method: &str, mu0: f64, gamma: f64, extra: &str) -> Outcome {
    let truth = PhaseRetrievalInstance::generate(20, 10, 6, SYN_SEED).unwrap();
    let tn = norm(truth.ground_truth());
    let stop = SYN_TARGET * SYN_TARGET * tn * tn;
    let text = format!("{}control.stop_tol = {stop:?}\n", synthetic_text(method, mu0, gamma, extra));
    execute(&parse_config(&text).unwrap()).unwrap()
}

fn syn_sigma2() -> f64 {
    second_singular_value(&MixingSchedule::fixed_er(10, 0.5, 0).unwrap().matrix(0)).unwrap()
}

fn criterion_1() -> Verdict {
    let t = Instant::now();
    let reports = run_suite(None);
    let secs = t.elapsed().as_secs_f64();
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    verdict(
        failed.is_empty() && secs < 60.0,
        format!("{} checks, failed {:?}, {secs:.1}s (limit 60s)", reports.len(), failed),
    )
}

fn criterion_2() -> Verdict {
    let t = Instant::now();
    let path = metropolis_weights(&Graph::path(3).unwrap());
    let s_path = second_singular_value(&path).unwrap();
    let path_ok = (s_path - 2.0 / 3.0).abs() <= PATH_SIGMA2_TOL;
    let mut lambdas = Vec::new();
    for seed in ER_SEEDS {
        let schedule = MixingSchedule::fixed_er(ER_NODES, ER_P, seed).unwrap();
        let trace = consensus_decay_trace(&schedule, DECAY_HORIZON).unwrap();
        lambdas.push(fit_phi_decay(&trace).unwrap().lambda_hat);
    }
    let er_ok = lambdas.iter().all(|l| (l - ER_LAMBDA).abs() <= ER_LAMBDA_TOL);
    let secs = t.elapsed().as_secs_f64();
    verdict(
        path_ok && er_ok && secs < 120.0,
        format!(
            "path sigma2 = {s_path:.12}; ER({ER_NODES},{ER_P}) lambda_hat = {:?}; {secs:.1}s",
            lambdas.iter().map(|l| format!("{l:.4}")).collect::<Vec<_>>()
        ),
    )
}

// Direct evaluation from the stored data, independent of the oracle code.
fn objective_from_data(inst: &PhaseRetrievalInstance, x: &[f64]) -> f64 {
    let n = inst.n();
    let w = inst.measurements();
    let y = inst.observations();
    let total: f64 = w
        .chunks_exact(n)
        .zip(y)
        .map(|(wj, yj)| {
            let r = dot(wj, x);
            (r * r - yj).abs()
        })
        .sum();
    total / y.len() as f64
}

fn min_residual(inst: &PhaseRetrievalInstance, x: &[f64]) -> f64 {
    let n = inst.n();
    inst.measurements()
        .chunks_exact(n)
        .zip(inst.observations())
        .map(|(wj, yj)| {
            let r = dot(wj, x);
            (r * r - yj).abs()
        })
        .fold(f64::INFINITY, f64::min)
}

fn criterion_3() -> Verdict {
    let inst = PhaseRetrievalInstance::generate(10, 4, 8, 31).unwrap();
    let n = inst.n();
    let mut rng = derive_stream(31, "acceptance-fd", 0, 0);
    let h = 1e-6;
    let mut worst_fd: f64 = 0.0;
    let mut used = 0;
    while used < FD_POINTS {
        let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        // far enough from every kink that ±h steps stay on one smooth piece
        if min_residual(&inst, &x) < 1e-3 {
            continue;
        }
        used += 1;
        let mut g = vec![0.0; n];
        ObjectiveOracle::subgradient(&inst, &x, &mut g);
        let mut fd = vec![0.0; n];
        for (c, slot) in fd.iter_mut().enumerate() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            *slot = (objective_from_data(&inst, &xp) - objective_from_data(&inst, &xm)) / (2.0 * h);
        }
        let err: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        worst_fd = worst_fd.max(err / norm(&g));
    }

    let truth = inst.ground_truth().to_vec();
    let neg: Vec<f64> = truth.iter().map(|v| -v).collect();
    let at_truth = ObjectiveOracle::value(&inst, &truth)
        .abs()
        .max(ObjectiveOracle::value(&inst, &neg).abs());

    // envelope on a small instance: centred difference of φ_t along a random
    // unit direction against ⟨∇φ_t, d⟩
    let small = PhaseRetrievalInstance::generate(3, 2, 5, 7).unwrap();
    let t = 0.25 / small.rho();
    let set = FeasibleSet::WholeSpace;
    let budget = 200_000;
    let he = 1e-4;
    let mut worst_env: f64 = 0.0;
    let mut rng = derive_stream(7, "acceptance-envelope", 0, 0);
    for _ in 0..ENVELOPE_POINTS {
        let x: Vec<f64> = (0..3).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let mut d: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let dn = norm(&d);
        d.iter_mut().for_each(|v| *v /= dn);
        let at = |s: f64| -> f64 {
            let p: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
            prox(&small, &set, &p, t, budget).unwrap().envelope_value
        };
        let centre = prox(&small, &set, &x, t, budget).unwrap();
        let fd = (at(he) - at(-he)) / (2.0 * he);
        let analytic = dot(&centre.envelope_gradient, &d);
        worst_env = worst_env.max((fd - analytic).abs() / centre.gradient_norm());
    }

    verdict(
        worst_fd <= FD_TOL && at_truth <= TRUTH_VALUE_TOL && worst_env <= ENVELOPE_TOL,
        format!(
            "subgradient vs FD worst rel {worst_fd:.2e} over {FD_POINTS} points; \
             |f(±x)| {at_truth:.1e}; envelope FD worst rel {worst_env:.2e} over {ENVELOPE_POINTS} points"
        ),
    )
}

struct Cell {
    mu0: f64,
    gamma: f64,
    rel: f64,
    k: usize,
    rate: f64,
}

fn grid_cells(gammas: &[f64]) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &gamma in gammas {
        for mu0 in SYN_MU0 {
            let out = synthetic_run("dpsm", mu0, gamma, "");
            let k = out.record.last_row().k;
            let rate = fit_linear_rate(&out.record.rows, k / 2)
                .map(|f| f.rate_hat)
                .unwrap_or(f64::NAN);
            cells.push(Cell {
                mu0,
                gamma,
                rel: if out.record.status == RunStatus::Diverged {
                    f64::INFINITY
                } else {
                    out.record.final_relative_distance()
                },
                k,
                rate,
            });
        }
    }
    cells
}

fn cell_ok(c: &Cell) -> bool {
    c.rel < SYN_TARGET && c.rate >= c.gamma - RATE_SLACK && c.rate < 1.0
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let s2 = syn_sigma2();
    let cells = grid_cells(&SYN_GAMMA);
    let good: Vec<String> = cells
        .iter()
        .filter(|c| cell_ok(c))
        .map(|c| format!("(mu0 {}, gamma {}: rel {:.1e} at k={}, rate_hat {:.4})", c.mu0, c.gamma, c.rel, c.k, c.rate))
        .collect();
    let secs = t.elapsed().as_secs_f64();
    verdict(
        SYN_GAMMA.iter().all(|g| *g >= s2) && !good.is_empty() && secs < 120.0,
        format!("sigma2 {s2:.4}; {}/9 cells ok: {}; {secs:.1}s", good.len(), good.join(" ")),
    )
}

fn criterion_5() -> Verdict {
    let s2 = syn_sigma2();
    let slow = (s2 - 0.2).max(0.05);
    let fast: Vec<f64> = SYN_GAMMA.iter().copied().filter(|g| *g >= s2 + 0.05).collect();
    let slow_cells = grid_cells(&[slow]);
    let slow_best = slow_cells.iter().map(|c| c.rel).fold(f64::INFINITY, f64::min);
    let fast_cells = grid_cells(&fast);
    let fast_best = fast_cells
        .iter()
        .filter(|c| c.rel < SYN_TARGET)
        .map(|c| format!("(mu0 {}, gamma {})", c.mu0, c.gamma))
        .collect::<Vec<_>>();
    verdict(
        slow_best >= SYN_TARGET && !fast_best.is_empty(),
        format!(
            "gamma {slow:.4}: best rel {slow_best:.2e} (must stay >= 1e-6); gamma >= {:.4}: reached by {}",
            s2 + 0.05,
            fast_best.join(" ")
        ),
    )
}

fn env_infimum(out: &Outcome, epoch_length: usize, epoch: usize) -> f64 {
    out.record
        .rows
        .iter()
        .filter(|r| r.k / epoch_length <= epoch)
        .filter_map(|r| r.env_grad.map(|g| g * g))
        .fold(f64::INFINITY, f64::min)
}

fn sto_text(seed: u64, epochs: usize) -> String {
    format!(
        "problem.n = 50\nproblem.N = 10\nproblem.m = 100\nproblem.seed = {seed}\n\
         method.name = stodpsm\nmethod.batch_size = {STO_BATCH}\n\
         stepsize.variant = epoch-polynomial\nstepsize.a = {STO_A:?}\nstepsize.q = 0.5\n\
         control.max_iterations = {}\ncontrol.metric_stride = 100\ncontrol.envelope_stride = 100\n",
        epochs * 100
    )
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in STO_SEEDS {
        let out = execute(&parse_config(&sto_text(seed, 4 * STO_T)).unwrap()).unwrap();
        let at_t = env_infimum(&out, 100, STO_T);
        let at_4t = env_infimum(&out, 100, 4 * STO_T);
        let ratio = at_4t / at_t;
        ok &= ratio <= STO_RATIO;
        parts.push(format!("seed {seed}: {at_t:.3e} -> {at_4t:.3e} (ratio {ratio:.3})"));
    }
    verdict(
        ok,
        format!("{}; {:.1}s", parts.join(", "), t.elapsed().as_secs_f64()),
    )
}

fn criterion_7() -> Verdict {
    let mut same = 0;
    for gamma in SYN_GAMMA {
        for mu0 in SYN_MU0 {
            let det = synthetic_run("dpsm", mu0, gamma, "");
            let sto = synthetic_run("stodpsm", mu0, gamma, "method.batch_size = full\n");
            if data_lines(&det.csv) == data_lines(&sto.csv) {
                same += 1;
            }
        }
    }
    verdict(same == 9, format!("{same}/9 grid cells give identical CSV data lines"))
}

fn mnist_text(dir: &Path) -> String {
    format!(
        "problem.mnist_path = {}\nproblem.image_index = 0\nproblem.downsample = 2\n\
         problem.N = 14\nproblem.m = 42\nproblem.seed = 0\n\
         network.p = 0.5\nnetwork.seed = 0\nmethod.name = dpsm\n\
         stepsize.variant = geometric\nstepsize.mu0 = 0.1\nstepsize.gamma = 0.98\n\
         control.max_iterations = 1500\ncontrol.metric_stride = 10\ncontrol.envelope_stride = 0\n\
         output.csv = {}\noutput.image = {}\n",
        fixture().display(),
        dir.join("mnist.csv").display(),
        dir.join("mnist.pgm").display()
    )
}

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config = parse_config(&mnist_text(dir.path())).unwrap();
    let out = execute(&config).unwrap();
    let rel = out.record.final_relative_distance();
    let truth = dpsm::mnist::load_mnist_image(fixture(), 0, 2).unwrap();
    let (px, rows, cols) = decode_pgm(&std::fs::read(dir.path().join("mnist.pgm")).unwrap()).unwrap();
    let worst = px
        .iter()
        .zip(&truth.pixels)
        .map(|(p, v)| p.abs_diff(gray_level(*v)))
        .max()
        .unwrap_or(u8::MAX);
    let secs = t.elapsed().as_secs_f64();
    verdict(
        (rows, cols) == (14, 14) && rel < MNIST_TARGET && worst <= MNIST_GRAY_TOL && secs < 300.0,
        format!("n={} rel {rel:.2e}, max gray diff {worst}, {secs:.1}s", rows * cols),
    )
}

fn outputs_in_pool(threads: usize, dir: &Path) -> Vec<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let mut outs = Vec::new();
        let det = synthetic_run("dpsm", SYN_MU0[0], SYN_GAMMA[1], "");
        outs.push(det.csv.into_bytes());
        let sto = synthetic_run("stodpsm", SYN_MU0[0], SYN_GAMMA[1], "method.batch_size = 2\n");
        outs.push(sto.csv.into_bytes());
        let short: RunConfig = parse_config(&sto_text(STO_SEEDS[0], 10)).unwrap();
        outs.push(execute(&short).unwrap().csv.into_bytes());
        execute(&parse_config(&mnist_text(dir)).unwrap()).unwrap();
        outs.push(std::fs::read(dir.join("mnist.csv")).unwrap());
        outs.push(std::fs::read(dir.join("mnist.pgm")).unwrap());
        outs
    })
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let one = outputs_in_pool(1, dir.path());
    let four = outputs_in_pool(4, dir.path());
    let again = outputs_in_pool(4, dir.path());
    let same = one.iter().zip(&four).zip(&again).filter(|((a, b), c)| a == b && b == c).count();
    let rows = parse_csv(std::str::from_utf8(&one[0]).unwrap()).unwrap().rows.len();
    verdict(
        same == one.len(),
        format!("{same}/{} outputs byte-identical across 1, 4, 4 threads (first CSV has {rows} rows)", one.len()),
    )
}

type Criterion = (usize, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "theory-check suite", criterion_1),
        (2, "consensus geometry", criterion_2),
        (3, "oracle correctness", criterion_3),
        (4, "linear rate under sharpness", criterion_4),
        (5, "slower-than-consensus stepsize", criterion_5),
        (6, "stochastic envelope trend", criterion_6),
        (7, "full-batch equivalence", criterion_7),
        (8, "digit recovery 14x14", criterion_8),
        (9, "thread-count determinism", criterion_9),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {id} [{name}]: {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
