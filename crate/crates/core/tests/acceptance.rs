//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Time budgets are part of each criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use wpn_core::cost::{
    centralized_weight_matrix_bytes, memory_per_mote, message_complexity, scalability_estimate,
    CostInputs,
};
use wpn_core::dynamics::{
    episode_init, mfa_step, run_episode, run_multistart, ConvergenceCriterion, Engine, MfaParams,
    OrderKind, TemperatureSchedule, UpdateOrder,
};
use wpn_core::energy::{compile_mcds, mcds_energy, mcds_energy_gradient, EnergyConfig};
use wpn_core::graph::corpus::{connected_graphs_up_to, named_families};
use wpn_core::graph::{Graph, VertexSet};
use wpn_core::oracle::{brute_force_ipds, OracleLimit};
use wpn_core::rng::seeded;
use wpn_core::verify::{binary_async_run, flip_bound_instance};
use wpn_core::wpn::{
    embed, simulate, Dissemination, MacConfig, MacKind, Placement, SimConfig, Trigger,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cost_pins() -> Outcome {
    ensure(message_complexity(100_000, 1) == 10u128.pow(15), || {
        "message_complexity(100000, 1)".into()
    })?;
    for (channels, wall) in [(1, 1e5), (10, 1e4)] {
        let est = scalability_estimate(&CostInputs {
            n_neurons: 100_000,
            episodes: 1,
            bytes_per_real: 4,
            group_size: 10,
            msg_time: 1e-6,
            channels,
        });
        ensure(est.clusters == 10_000, || {
            format!("clusters {}", est.clusters)
        })?;
        ensure(est.sequential_messages == 10u128.pow(11), || {
            format!("sequential {}", est.sequential_messages)
        })?;
        ensure(est.wall_seconds == wall, || {
            format!("wall {} with {channels} channels", est.wall_seconds)
        })?;
    }
    ensure(memory_per_mote(1_024_001, 4) == 8_192_000, || {
        "memory_per_mote(1024001, 4)".into()
    })?;
    ensure(
        centralized_weight_matrix_bytes(1000, 1) == 10u128.pow(12),
        || "centralized_weight_matrix_bytes(1000, 1)".into(),
    )?;
    Ok("all pins exact".into())
}

fn energy_validity() -> Outcome {
    let mut graphs = connected_graphs_up_to(6);
    let connected = graphs.len();
    let at_six = graphs.iter().filter(|g| g.n() == 6).count();
    graphs.extend(named_families(8).into_iter().map(|(_, g)| g));
    let limit = OracleLimit::default();
    let mut subsets = 0u64;
    for cfg in [
        EnergyConfig::default(),
        EnergyConfig::new(0.5, 2.0).unwrap(),
    ] {
        for g in &graphs {
            let ipds = brute_force_ipds(g, &limit).map_err(|e| e.to_string())?;
            for mask in 0u64..1 << g.n() {
                let s = VertexSet::from_mask(mask);
                let e = mcds_energy(g, &s.indicator(g.n()), &cfg).map_err(|e| e.to_string())?;
                ensure((e == 0.0) == ipds.contains(&s), || {
                    format!("{}set {s}: energy {e}", g.to_edge_list())
                })?;
                subsets += 1;
            }
        }
    }
    Ok(format!(
        "{} graphs ({connected} connected, {at_six} on 6 vertices), {subsets} subsets",
        graphs.len()
    ))
}

fn gradient_correctness() -> Outcome {
    let h = 1e-5;
    let cfg = EnergyConfig::default();
    let mut worst = 0.0f64;
    for gi in 0..10u64 {
        let n = 3 + gi as usize; // 3..=12
        let g = Graph::random_geometric(n, 0.45, 100 + gi).map_err(|e| e.to_string())?;
        let mut rng = seeded(gi);
        for _ in 0..100 {
            let z: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.99)).collect();
            let exact = mcds_energy_gradient(&g, &z, &cfg).map_err(|e| e.to_string())?;
            for i in 0..n {
                let mut up = z.clone();
                let mut down = z.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (mcds_energy(&g, &up, &cfg).unwrap()
                    - mcds_energy(&g, &down, &cfg).unwrap())
                    / (2.0 * h);
                let rel = (fd - exact[i]).abs() / exact[i].abs().max(fd.abs()).max(1.0);
                worst = worst.max(rel);
            }
        }
    }
    ensure(worst < 1e-6, || format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn descent_and_flip_bound() -> Outcome {
    let mut rng = seeded(2024);
    let mut within = 0;
    let mut worst_rise = f64::NEG_INFINITY;
    let mut worst_ratio = 0.0f64;
    for run in 0..50u64 {
        let k = rng.gen_range(2..=10);
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .collect();
        let p = flip_bound_instance(k, &pairs, &mut rng).expect("dense instance");
        let r = binary_async_run(&p, run);
        worst_rise = worst_rise.max(r.max_rise);
        if u128::from(r.flips) <= r.bound {
            within += 1;
        }
        worst_ratio = worst_ratio.max(r.flips as f64 / r.bound as f64);
    }
    ensure(worst_rise <= 0.0, || format!("energy rose by {worst_rise}"))?;
    ensure(within == 50, || {
        format!("{within}/50 runs within the bound")
    })?;
    Ok(format!(
        "50/50 within bound (max flips/bound {worst_ratio:.3}), largest energy step {worst_rise}"
    ))
}

fn distributed_equivalence() -> Outcome {
    let graphs = [
        Graph::path(3),
        Graph::cycle(4),
        Graph::star(5),
        Graph::random_geometric(20, 0.35, 5).unwrap(),
        Graph::random_geometric(50, 0.2, 7).unwrap(),
    ];
    let engine = Engine::default();
    let crit = ConvergenceCriterion {
        max_steps: 600,
        ..ConvergenceCriterion::default()
    };
    let sched = TemperatureSchedule::default();
    let mut runs = 0;
    let mut steps = 0;
    for g in &graphs {
        let prob = compile_mcds(g, &EnergyConfig::default());
        let wpn = embed(
            &prob,
            g,
            Placement::Identity,
            &engine,
            Dissemination::Coupled,
        )
        .map_err(|e| e.to_string())?;
        let max_deg = (0..g.n()).map(|v| g.degree(v)).max().unwrap() as u64;
        let cfg = SimConfig {
            mac: MacConfig {
                kind: MacKind::IdealTdma,
                ..MacConfig::default()
            },
            trigger: Trigger::Periodic {
                period: 4 * max_deg + 8,
                synchronized: true,
            },
            delta: 0.0,
            ..SimConfig::default()
        };
        for seed in 0..10 {
            let c = run_episode(
                &engine,
                &prob,
                episode_init(&prob, &engine, seed),
                &crit,
                &sched,
                UpdateOrder::Synchronous,
            )
            .map_err(|e| e.to_string())?;
            let d = simulate(&wpn, &cfg, &crit, seed).map_err(|e| e.to_string())?;
            let gap = c
                .state
                .z
                .iter()
                .zip(&d.final_z)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            ensure(gap <= 1e-12, || {
                format!("n = {}, seed {seed}: gap {gap:e}", g.n())
            })?;
            let (ce, de) = (&c.trajectory.energy, &d.energy_trajectory.energy);
            ensure(ce.len() == de.len(), || {
                format!(
                    "n = {}, seed {seed}: {} vs {} steps",
                    g.n(),
                    ce.len(),
                    de.len()
                )
            })?;
            for (s, (a, b)) in ce.iter().zip(de).enumerate() {
                ensure((a - b).abs() <= 1e-12, || {
                    format!("n = {}, seed {seed}: step {s} energy {a} vs {b}", g.n())
                })?;
            }
            runs += 1;
            steps += ce.len();
        }
    }
    Ok(format!("{runs} runs, {steps} trajectory points identical"))
}

fn multistart_easy() -> Outcome {
    let engine = Engine::default();
    let crit = ConvergenceCriterion::default();
    let seeds: Vec<u64> = (0..100).collect();
    let mut notes = Vec::new();
    for (name, g) in [
        ("P3", Graph::path(3)),
        ("K1,3", Graph::star(3)),
        ("K1,5", Graph::star(5)),
    ] {
        let prob = compile_mcds(&g, &EnergyConfig::default());
        let ipds = brute_force_ipds(&g, &OracleLimit::default()).map_err(|e| e.to_string())?;
        ensure(ipds.len() == 1, || format!("{name}: {} IPDS", ipds.len()))?;
        let res = run_multistart(
            &engine,
            &prob,
            &crit,
            &TemperatureSchedule::default(),
            OrderKind::Async,
            &seeds,
        )
        .map_err(|e| e.to_string())?;
        let solved = res
            .episodes
            .iter()
            .filter(|e| e.energy < 1e-6 && e.readout == ipds[0])
            .count();
        ensure(solved >= 1, || {
            format!("{name}: best energy {:e}", res.best.energy())
        })?;
        ensure(res.best.readout() == ipds[0], || {
            format!("{name}: best readout")
        })?;
        notes.push(format!("{name} {solved}/100"));
    }
    Ok(notes.join(", "))
}

fn mfa_behavior() -> Outcome {
    let single = MfaParams::new(vec![0.0], vec![1.0], vec![1.0], 1.0).map_err(|e| e.to_string())?;
    let v = mfa_step(&[0.0], &single, 1.0).map_err(|e| e.to_string())?;
    ensure((v[0] - 1f64.tanh()).abs() <= 1e-12, || {
        format!("hand example {}", v[0])
    })?;

    let mut rng = seeded(77);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.gen_range(2..=12);
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = rng.gen_range(-3.0..3.0);
                w[i * n + j] = x;
                w[j * n + i] = x;
            }
        }
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
        let tau = rng.gen_range(0.1..0.6);
        let load = (0..n)
            .map(|i| {
                w[i * n..(i + 1) * n]
                    .iter()
                    .map(|x: &f64| x.abs())
                    .sum::<f64>()
                    + theta[i].abs()
            })
            .fold(0.0, f64::max);
        let p = MfaParams::new(w, theta, mu, tau).map_err(|e| e.to_string())?;
        let temperature = 10.0 * load;
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        for _ in 0..200 {
            v = mfa_step(&v, &p, temperature).map_err(|e| e.to_string())?;
        }
        worst = worst.max(v.iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    ensure(worst < 0.15, || format!("max |v| = {worst}"))?;
    Ok(format!("tanh(1) exact, max |v| after 200 steps {worst:.4}"))
}

fn determinism() -> Outcome {
    let g = Graph::random_geometric(15, 0.4, 3).unwrap();
    let prob = compile_mcds(&g, &EnergyConfig::default());
    let engine = Engine::default();
    let wpn = embed(
        &prob,
        &g,
        Placement::Identity,
        &engine,
        Dissemination::Coupled,
    )
    .map_err(|e| e.to_string())?;
    let crit = ConvergenceCriterion::default();
    let configs = [
        SimConfig {
            mac: MacConfig {
                kind: MacKind::SlottedAloha,
                channels: 2,
                p_transmit: 0.3,
                ..MacConfig::default()
            },
            trigger: Trigger::Periodic {
                period: 5,
                synchronized: false,
            },
            record_trace: true,
            ..SimConfig::default()
        },
        SimConfig {
            record_trace: true,
            ..SimConfig::default()
        },
    ];
    let mut compared = 0;
    for cfg in &configs {
        for seed in [0, 1, 99] {
            let a = simulate(&wpn, cfg, &crit, seed).map_err(|e| e.to_string())?;
            let b = simulate(&wpn, cfg, &crit, seed).map_err(|e| e.to_string())?;
            ensure(a.to_text() == b.to_text(), || {
                format!("report differs, seed {seed}")
            })?;
            ensure(
                a.energy_trajectory.to_tsv() == b.energy_trajectory.to_tsv(),
                || format!("trajectory differs, seed {seed}"),
            )?;
            ensure(a.trace_tsv() == b.trace_tsv(), || {
                format!("trace differs, seed {seed}")
            })?;
            compared += 1;
        }
    }
    let seeds: Vec<u64> = (0..20).collect();
    let runs: Vec<String> = (0..2)
        .map(|_| {
            run_multistart(
                &engine,
                &prob,
                &crit,
                &TemperatureSchedule::default(),
                OrderKind::Async,
                &seeds,
            )
            .map(|r| r.best.trajectory.to_tsv())
            .map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    ensure(runs[0] == runs[1], || {
        "centralized multistart differs".into()
    })?;
    Ok(format!(
        "{compared} simulated runs and one multistart repeated identically"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("cost-model pins", Duration::from_secs(1), cost_pins),
        (
            "energy-validity equivalence",
            Duration::from_secs(120),
            energy_validity,
        ),
        (
            "gradient correctness",
            Duration::from_secs(30),
            gradient_correctness,
        ),
        (
            "liapunov descent and flip bound",
            Duration::from_secs(60),
            descent_and_flip_bound,
        ),
        (
            "distributed-centralized equivalence",
            Duration::from_secs(120),
            distributed_equivalence,
        ),
        (
            "multistart solves easy instances",
            Duration::from_secs(60),
            multistart_easy,
        ),
        ("mfa behavior", Duration::from_secs(30), mfa_behavior),
        ("determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *budget => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
