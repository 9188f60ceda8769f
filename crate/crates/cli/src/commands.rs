use accessalloc::analysis::{
    adverse_rd_line, expected_adverse, slope_condition, soft_nn_interpolate,
};
use accessalloc::engine::{
    approx_rd, saturated_locations, solve_access_aware, solve_bayesian, solve_naive, sweep_eta,
    StopReason, STABILITY_TOL,
};
use accessalloc::model::{acquisition_outcome, distance_l1, distance_linf, exact_rho, naive_rho};
use accessalloc::optimize::{enumerate_vertices, VERTEX_DEDUP_TOL};
use accessalloc::sim::{
    dp_exact_rho, simulate_acquisition, synthetic_locations, trajectories, SimConfig,
    SynthProfile, DP_POPULATION_LIMIT, RNG_ALGORITHM,
};
use accessalloc::{
    AcquisitionModel, Allocation, Distance, EngineConfig, EtaSpec, ImpactParams, Scenario,
};

use crate::args::{
    DistanceArg, ImpactArgs, InterpolateArgs, ModelArg, ProfileArg, RunArgs, SimulateArgs,
    SweepArgs, SynthArgs,
};
use crate::error::{CliError, CliResult};
use crate::format::{ensure_dir, fmt_bool, fmt_num, write_csv, write_report};
use crate::input::{parse_eta, parse_grid, read_locations, read_observations};
use crate::svg;

/// Gap, relative to the spread of vertex disparities, below which the
/// audit calls a non-optimal heuristic approximately optimal.
const NEAR_OPTIMAL_FRACTION: f64 = 1e-3;
const OPTIMAL_GAP: f64 = 1e-6;

fn scenario(args: &RunArgs) -> CliResult<Scenario> {
    let eta = parse_eta(&args.eta)?;
    let locations = read_locations(&args.locations)?;
    let distance = match args.distance {
        DistanceArg::L1 => Distance::L1,
        DistanceArg::Linf => Distance::LInf,
    };
    Ok(Scenario::new(locations, args.alpha, args.epsilon, distance, eta)?)
}

fn engine_config(args: &RunArgs) -> CliResult<EngineConfig> {
    let config = EngineConfig {
        max_iterations: args.max_iterations,
        restarts: args.restarts,
        restart_noise_sigma: args.noise_sigma,
        seed: args.seed,
        ..Default::default()
    };
    config.validate()?;
    Ok(config)
}

fn point_eta(s: &Scenario, command: &str) -> CliResult<f64> {
    match s.eta() {
        EtaSpec::Point(eta) => Ok(*eta),
        _ => Err(CliError::Config(format!("{command} needs a single --eta value"))),
    }
}

fn model_name(m: ModelArg) -> &'static str {
    match m {
        ModelArg::Naive => "naive",
        ModelArg::Approx => "approx",
    }
}

fn distance_name(d: DistanceArg) -> &'static str {
    match d {
        DistanceArg::L1 => "l1",
        DistanceArg::Linf => "linf",
    }
}

fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Converged => "converged",
        StopReason::Cycle => "cycle",
        StopReason::IterationLimit => "iteration-limit",
    }
}

/// An allocation with everything the reports need.
struct Solved {
    allocation: Allocation,
    rho: Vec<f64>,
    saturated: Vec<bool>,
    rd: f64,
    rd_proportional: f64,
    iterations: usize,
    converged: bool,
    stop: &'static str,
    restart_index_of_best: usize,
}

fn solve_run(s: &Scenario, args: &RunArgs) -> CliResult<Solved> {
    let config = engine_config(args)?;
    let k = s.k();
    let flags = |sat: &[usize]| {
        let mut v = vec![false; k];
        sat.iter().for_each(|&j| v[j] = true);
        v
    };
    match (args.model, s.eta()) {
        (ModelArg::Naive, EtaSpec::Point(eta)) => {
            let (allocation, report) = solve_naive(s, *eta)?;
            let outcome =
                acquisition_outcome(s, allocation.as_slice(), *eta, AcquisitionModel::Naive)?;
            let sat = saturated_locations(s, allocation.as_slice(), *eta)?;
            Ok(Solved {
                rho: outcome.rho().to_vec(),
                saturated: flags(&sat),
                rd: report.rd,
                rd_proportional: report.rd_proportional,
                iterations: 1,
                converged: true,
                stop: stop_name(StopReason::Converged),
                restart_index_of_best: 0,
                allocation,
            })
        }
        (ModelArg::Naive, _) => Err(CliError::Config(
            "--model naive needs a single --eta value".into(),
        )),
        (ModelArg::Approx, EtaSpec::Point(eta)) => {
            let (allocation, trace) = solve_access_aware(s, *eta, &config)?;
            let outcome =
                acquisition_outcome(s, allocation.as_slice(), *eta, AcquisitionModel::Approx)?;
            Ok(Solved {
                rho: outcome.rho().to_vec(),
                saturated: flags(&trace.best().saturated),
                rd: trace.best().rd,
                rd_proportional: approx_rd(s, s.shares(), *eta)?,
                iterations: trace.iterations.len(),
                converged: trace.converged,
                stop: stop_name(trace.stop),
                restart_index_of_best: trace.restart_index_of_best,
                allocation,
            })
        }
        (ModelArg::Approx, spec) => {
            let solution = solve_bayesian(s, &config)?;
            let n = solution.allocation.as_slice();
            let mut rho = vec![0.0; k];
            let mut rd_proportional = 0.0;
            for (eta, w) in spec.values().into_iter().zip(spec.weights()) {
                let outcome = acquisition_outcome(s, n, eta, AcquisitionModel::Approx)?;
                rho.iter_mut()
                    .zip(outcome.rho())
                    .for_each(|(acc, r)| *acc += w * r);
                rd_proportional += w * approx_rd(s, s.shares(), eta)?;
            }
            let trace = &solution.trace;
            Ok(Solved {
                rho,
                saturated: flags(&trace.best().saturated),
                rd: solution.expected_rd,
                rd_proportional,
                iterations: trace.iterations.len(),
                converged: trace.converged,
                stop: stop_name(trace.stop),
                restart_index_of_best: trace.restart_index_of_best,
                allocation: solution.allocation,
            })
        }
    }
}

fn run_metadata(args: &RunArgs, s: &Scenario) -> Vec<(&'static str, String)> {
    vec![
        ("locations", s.k().to_string()),
        ("alpha", fmt_num(args.alpha)),
        ("epsilon", fmt_num(args.epsilon)),
        ("distance", distance_name(args.distance).to_string()),
        ("eta", args.eta.clone()),
        ("model", model_name(args.model).to_string()),
        ("restarts", args.restarts.to_string()),
        ("seed", args.seed.to_string()),
        ("rng", RNG_ALGORITHM.to_string()),
    ]
}

pub fn allocate(args: &RunArgs) -> CliResult<()> {
    let s = scenario(args)?;
    let solved = solve_run(&s, args)?;
    ensure_dir(&args.out)?;
    let n = solved.allocation.as_slice();
    let rows: Vec<Vec<String>> = s
        .locations()
        .iter()
        .enumerate()
        .map(|(j, loc)| {
            let p = s.shares()[j];
            vec![
                loc.id().to_string(),
                fmt_num(p),
                fmt_num(n[j]),
                fmt_num(n[j] / p),
                fmt_num(solved.rho[j]),
                fmt_bool(solved.saturated[j]).to_string(),
            ]
        })
        .collect();
    write_csv(
        &args.out.join("allocation.csv"),
        &["id", "p", "n", "n_over_p", "rho", "saturated"],
        &rows,
    )?;
    let mut report = run_metadata(args, &s);
    report.extend([
        ("rd_access_aware", fmt_num(solved.rd)),
        ("rd_proportional", fmt_num(solved.rd_proportional)),
        ("improvement", fmt_num(solved.rd_proportional - solved.rd)),
        ("d1", fmt_num(distance_l1(n, s.shares())?)),
        ("dinf", fmt_num(distance_linf(n, s.shares())?)),
        ("iterations", solved.iterations.to_string()),
        ("converged", fmt_bool(solved.converged).to_string()),
        ("stop", solved.stop.to_string()),
        ("restart_index_of_best", solved.restart_index_of_best.to_string()),
    ]);
    write_report(&args.out.join("report.txt"), &report)?;
    println!(
        "rd_access_aware {} rd_proportional {}",
        fmt_num(solved.rd),
        fmt_num(solved.rd_proportional)
    );
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    let run = &args.run;
    if run.model != ModelArg::Approx {
        return Err(CliError::Config("sweep solves with --model approx".into()));
    }
    let s = scenario(run)?;
    let s = s.with_eta(EtaSpec::Grid(s.eta().values()))?;
    let result = sweep_eta(&s, &engine_config(run)?)?;
    ensure_dir(&run.out)?;
    let first = &result.rows[0].allocation;
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.eta),
                fmt_num(r.rd_access_aware),
                fmt_num(r.rd_proportional),
                fmt_num(r.improvement()),
                fmt_bool(r.allocation.max_abs_diff(first) <= STABILITY_TOL).to_string(),
            ]
        })
        .collect();
    write_csv(
        &run.out.join("sweep.csv"),
        &["eta", "rd_aware", "rd_prop", "improvement", "allocation_stable"],
        &rows,
    )?;

    let mut curves = Vec::new();
    for r in &result.rows {
        curves.push(vec!["access_aware".into(), fmt_num(r.eta), fmt_num(r.rd_access_aware)]);
    }
    for r in &result.rows {
        curves.push(vec!["proportional".into(), fmt_num(r.eta), fmt_num(r.rd_proportional)]);
    }
    write_csv(&run.out.join("plot_rd.csv"), &["series", "eta", "rd"], &curves)?;

    let mut shape = Vec::new();
    for r in &result.rows {
        for (j, loc) in s.locations().iter().enumerate() {
            let p = s.shares()[j];
            shape.push(vec![
                fmt_num(r.eta),
                loc.id().to_string(),
                fmt_num(loc.beta()),
                fmt_num(r.allocation[j] / p),
            ]);
        }
    }
    write_csv(
        &run.out.join("plot_shape.csv"),
        &["eta", "id", "beta", "n_over_p"],
        &shape,
    )?;

    let min_improvement = result
        .rows
        .iter()
        .map(|r| r.improvement())
        .fold(f64::INFINITY, f64::min);
    let mut report = run_metadata(run, &s);
    report.extend([
        ("grid_points", result.rows.len().to_string()),
        ("allocation_stable", fmt_bool(result.stable).to_string()),
        ("min_improvement", fmt_num(min_improvement)),
        (
            "all_converged",
            fmt_bool(result.rows.iter().all(|r| r.converged)).to_string(),
        ),
    ]);
    write_report(&run.out.join("sweep_report.txt"), &report)?;
    if args.svg {
        let aware: Vec<(f64, f64)> = result.rows.iter().map(|r| (r.eta, r.rd_access_aware)).collect();
        let prop: Vec<(f64, f64)> = result.rows.iter().map(|r| (r.eta, r.rd_proportional)).collect();
        let doc = svg::line_chart(
            "eta",
            "rate disparity",
            &[("access-aware", &aware), ("proportional", &prop)],
        );
        std::fs::write(run.out.join("sweep.svg"), doc).map_err(CliError::io(run.out.join("sweep.svg")))?;
    }
    println!(
        "{} grid points, allocation_stable {}",
        result.rows.len(),
        fmt_bool(result.stable)
    );
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let config = SimConfig {
        trials: args.trials,
        seed: args.seed,
        time_resolution: args.time_resolution,
    };
    let est = simulate_acquisition(args.resources, args.population, args.beta, args.eta, &config)?;
    let (exact, exact_method) = if args.population <= DP_POPULATION_LIMIT {
        (
            dp_exact_rho(args.resources, args.population, args.beta, args.eta)?,
            "dynamic-program",
        )
    } else {
        (
            exact_rho(args.resources, args.population, args.beta, args.eta)?,
            "closed-form",
        )
    };
    let stats = trajectories(args.population, args.beta, args.eta, &config)?;
    ensure_dir(&args.out)?;
    let rows: Vec<Vec<String>> = (0..stats.times.len())
        .map(|i| {
            vec![
                fmt_num(stats.times[i]),
                fmt_num(stats.mean_total[i]),
                fmt_num(stats.mean_advantaged[i]),
                fmt_num(stats.p5_total[i]),
                fmt_num(stats.p95_total[i]),
                fmt_num(stats.p5_advantaged[i]),
                fmt_num(stats.p95_advantaged[i]),
            ]
        })
        .collect();
    write_csv(
        &args.out.join("trajectory.csv"),
        &["t", "mean_total", "mean_adv", "p5_total", "p95_total", "p5_adv", "p95_adv"],
        &rows,
    )?;
    let z = if est.std_error > 0.0 {
        fmt_num((est.rho - exact) / est.std_error)
    } else {
        "n/a".to_string()
    };
    write_report(
        &args.out.join("simulate.txt"),
        &[
            ("resources", args.resources.to_string()),
            ("population", args.population.to_string()),
            ("beta", fmt_num(args.beta)),
            ("eta", fmt_num(args.eta)),
            ("trials", args.trials.to_string()),
            ("seed", args.seed.to_string()),
            ("rng", RNG_ALGORITHM.to_string()),
            ("rho_estimate", fmt_num(est.rho)),
            ("std_error", fmt_num(est.std_error)),
            ("rho_exact", fmt_num(exact)),
            ("exact_method", exact_method.to_string()),
            ("rho_naive", fmt_num(naive_rho(args.beta, args.eta)?)),
            ("z_score", z),
        ],
    )?;
    println!(
        "rho_estimate {} std_error {} rho_exact {}",
        fmt_num(est.rho),
        fmt_num(est.std_error),
        fmt_num(exact)
    );
    Ok(())
}

pub fn verify(args: &RunArgs) -> CliResult<()> {
    let s = scenario(args)?;
    if args.model != ModelArg::Approx {
        return Err(CliError::Config("verify audits --model approx".into()));
    }
    let eta = point_eta(&s, "verify")?;
    let vertices = enumerate_vertices(&s)?;
    let solved = solve_run(&s, args)?;
    let heuristic = &solved.allocation;
    let proportional = Allocation::proportional(&s);

    let mut scored: Vec<(f64, &Allocation)> = vertices
        .iter()
        .map(|v| Ok((approx_rd(&s, v.as_slice(), eta)?, v)))
        .collect::<CliResult<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    ensure_dir(&args.out)?;
    let mut header: Vec<String> = ["rank", "rd", "d1", "dinf", "marker"]
        .iter()
        .map(|h| h.to_string())
        .collect();
    header.extend(s.locations().iter().map(|l| format!("n_{}", l.id())));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = scored
        .iter()
        .enumerate()
        .map(|(i, (rd, v))| {
            let mut markers = Vec::new();
            if v.max_abs_diff(&proportional) <= VERTEX_DEDUP_TOL {
                markers.push("proportional");
            }
            if v.max_abs_diff(heuristic) <= VERTEX_DEDUP_TOL {
                markers.push("heuristic");
            }
            let mut row = vec![
                (i + 1).to_string(),
                fmt_num(*rd),
                fmt_num(distance_l1(v.as_slice(), s.shares())?),
                fmt_num(distance_linf(v.as_slice(), s.shares())?),
                markers.join("+"),
            ];
            row.extend(v.as_slice().iter().map(|&x| fmt_num(x)));
            Ok(row)
        })
        .collect::<CliResult<_>>()?;
    write_csv(&args.out.join("vertices.csv"), &header_refs, &rows)?;

    let rd_min = scored[0].0;
    let rd_max = scored[scored.len() - 1].0;
    let gap = solved.rd - rd_min;
    let verdict = if gap <= OPTIMAL_GAP {
        "optimal".to_string()
    } else if gap <= NEAR_OPTIMAL_FRACTION * (rd_max - rd_min) {
        format!("approximately optimal (gap {})", fmt_num(gap))
    } else {
        format!("suboptimal (gap {})", fmt_num(gap))
    };
    let mut report = run_metadata(args, &s);
    report.extend([
        ("vertices", scored.len().to_string()),
        ("rd_min_vertex", fmt_num(rd_min)),
        ("rd_max_vertex", fmt_num(rd_max)),
        ("rd_heuristic", fmt_num(solved.rd)),
        ("rd_proportional", fmt_num(solved.rd_proportional)),
        ("gap", fmt_num(gap)),
        (
            "heuristic_improves_on_proportional",
            fmt_bool(solved.rd <= solved.rd_proportional + 1e-9).to_string(),
        ),
        ("verdict", verdict.clone()),
    ]);
    write_report(&args.out.join("verify.txt"), &report)?;
    println!("{} vertices, heuristic {verdict}", scored.len());
    Ok(())
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let profile = match args.profile {
        ProfileArg::Uniform => SynthProfile::Uniform,
        ProfileArg::Clustered => SynthProfile::Clustered,
    };
    let locations = synthetic_locations(args.k, args.seed, profile)?;
    ensure_dir(&args.out)?;
    let rows: Vec<Vec<String>> = locations
        .iter()
        .map(|l| vec![l.id().to_string(), l.population().to_string(), fmt_num(l.beta())])
        .collect();
    let path = args.out.join("locations.csv");
    write_csv(&path, &["id", "population", "beta"], &rows)?;
    println!("wrote {} locations to {}", rows.len(), path.display());
    Ok(())
}

pub fn impact(args: &ImpactArgs) -> CliResult<()> {
    let run = &args.run;
    let s = scenario(run)?;
    let eta = point_eta(&s, "impact")?;
    let params = ImpactParams::new(args.x, args.delta, args.q, args.q_prime)?;
    let cond = slope_condition(args.delta, args.q, args.q_prime)?;
    let solved = solve_run(&s, run)?;
    let model = match run.model {
        ModelArg::Naive => AcquisitionModel::Naive,
        ModelArg::Approx => AcquisitionModel::Approx,
    };
    let proportional = Allocation::proportional(&s);

    // (rd, adverse) along the segment from proportional to the solution
    let mut samples = Vec::new();
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let n: Vec<f64> = proportional
            .as_slice()
            .iter()
            .zip(solved.allocation.as_slice())
            .map(|(p, a)| (1.0 - t) * p + t * a)
            .collect();
        let n = Allocation::new(n)?;
        let outcome = acquisition_outcome(&s, n.as_slice(), eta, model)?;
        let rd = accessalloc::model::rate_disparity(&s, n.as_slice(), outcome.rho())?;
        samples.push((rd, expected_adverse(&params, &s, &n, &outcome)?));
    }
    let (slope, intercept) = adverse_rd_line(&params, &s);
    let residual = samples
        .iter()
        .map(|&(rd, y)| (y - (slope * rd + intercept)).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max);
    let (rd_prop, adverse_prop) = samples[0];
    let (rd_aware, adverse_aware) = samples[samples.len() - 1];

    ensure_dir(&run.out)?;
    let mut report = run_metadata(run, &s);
    report.extend([
        ("x", fmt_num(args.x)),
        ("delta", fmt_num(args.delta)),
        ("q", fmt_num(args.q)),
        ("q_prime", fmt_num(args.q_prime)),
        ("threshold", fmt_num(cond.threshold)),
        ("positive_slope", fmt_bool(cond.positive_slope).to_string()),
        ("rd_proportional", fmt_num(rd_prop)),
        ("rd_access_aware", fmt_num(rd_aware)),
        ("adverse_proportional", fmt_num(adverse_prop)),
        ("adverse_access_aware", fmt_num(adverse_aware)),
        ("adverse_reduction", fmt_num(adverse_prop - adverse_aware)),
        ("slope", fmt_num(slope)),
        ("intercept", fmt_num(intercept)),
        ("linearity_residual", fmt_num(residual)),
    ]);
    write_report(&run.out.join("impact.txt"), &report)?;
    println!(
        "threshold {} positive_slope {} adverse_reduction {}",
        fmt_num(cond.threshold),
        fmt_bool(cond.positive_slope),
        fmt_num(adverse_prop - adverse_aware)
    );
    Ok(())
}

pub fn interpolate(args: &InterpolateArgs) -> CliResult<()> {
    let points = read_observations(&args.observations)?;
    let grid = parse_grid(&args.grid)?;
    let fitted = soft_nn_interpolate(&points, args.lambda, &grid)?;
    ensure_dir(&args.out)?;
    let rows: Vec<Vec<String>> = grid
        .iter()
        .zip(&fitted)
        .map(|(b, y)| vec![fmt_num(*b), fmt_num(*y)])
        .collect();
    write_csv(&args.out.join("interpolation.csv"), &["beta", "y_hat"], &rows)?;
    println!("{} query points", rows.len());
    Ok(())
}
