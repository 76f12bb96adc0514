use std::io::Write;
use std::path::{Path, PathBuf};

use adiaquant::evolution::{default_dt, evolve, ground_overlap, measure, Schedule};
use adiaquant::hamiltonian::{initial_state, DimensionCap, InitialMode, OperatorPair};
use adiaquant::instance::{brute_force_solve, families, parse_instance, Assignment, SatInstance};
use adiaquant::operator::InterpolatedOperator;
use adiaquant::reduction::{gap_scaling_study, grover_secular, scaling_gap_options, Family};
use adiaquant::ring::ring_gap;
use adiaquant::spectrum::{
    adiabatic_time_estimate, find_min_gap, scan_spectrum, GapOptions, SectorProjector,
};
use adiaquant::trotter::{compile, execute, fidelity, plan_budget_with};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::{Cli, Command, EvolveArgs, GapArgs, ScalingArgs, SolveArgs, SpectrumArgs, TargetArgs, TrotterArgs};

const DEFAULT_LEVELS: usize = 8;
const DEFAULT_GRID: usize = 1000;
const DEFAULT_SAFETY: f64 = 10.0;
const DEFAULT_THRESHOLD: f64 = 0.99;
const DEFAULT_SHOTS: usize = 1000;
const DEFAULT_EPSILON: f64 = 0.01;

/// Resolved global settings plus the config file the per-command flags fall
/// back to.
struct Ctx {
    cfg: Config,
    output: Option<PathBuf>,
    report: Option<PathBuf>,
    cap: DimensionCap,
    mode: InitialMode,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        write_to(self.output.as_deref(), text, false)
    }

    fn emit_report(&self, text: &str) -> Result<()> {
        write_to(self.report.as_deref(), text, true)
    }
}

fn write_to(path: Option<&Path>, text: &str, stderr: bool) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Write {
            path: p.to_path_buf(),
            source,
        }),
        None if stderr => {
            let _ = std::io::stderr().write_all(text.as_bytes());
            Ok(())
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn parse_mode(raw: &str) -> Result<InitialMode> {
    match raw {
        "clause-weighted" | "weighted" => Ok(InitialMode::ClauseWeighted),
        "uniform" => Ok(InitialMode::Uniform),
        other => Err(CliError::Usage(format!(
            "--initial must be clause-weighted or uniform, got {other:?}"
        ))),
    }
}

fn mode_name(mode: InitialMode) -> &'static str {
    match mode {
        InitialMode::ClauseWeighted => "clause-weighted",
        InitialMode::Uniform => "uniform",
    }
}

fn parse_sector(raw: &str, n: usize) -> Result<SectorProjector> {
    match raw {
        "full" => Ok(SectorProjector::Full),
        "negation" => Ok(SectorProjector::GlobalNegation),
        "symmetric" => Ok(SectorProjector::symmetric_in(n, &(1..=n).collect::<Vec<_>>())),
        other => Err(CliError::Usage(format!(
            "--sector must be full, negation or symmetric, got {other:?}"
        ))),
    }
}

fn parse_family(raw: &str) -> Result<Family> {
    Ok(raw.parse::<Family>()?)
}

/// `a..b` or `a..b..step`, inclusive.
fn parse_range(raw: &str) -> Result<Vec<usize>> {
    let bad = || CliError::Usage(format!("--n-range must look like a..b or a..b..step, got {raw:?}"));
    let parts: Vec<usize> = raw
        .split("..")
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, step] => (a, b, step),
        _ => return Err(bad()),
    };
    if step == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

fn load_instance(path: &Path) -> Result<SatInstance> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_instance(&text).map_err(|source| CliError::Instance {
        path: path.to_path_buf(),
        source,
    })
}

enum Target {
    Instance(PathBuf, SatInstance),
    Family(Family, usize),
}

impl Target {
    /// A flag-given instance or family beats either one from the config.
    fn resolve(args: TargetArgs, cfg: &Config) -> Result<Target> {
        let n = args.n.or(cfg.n);
        let family = |f: &str| -> Result<Target> {
            Ok(Target::Family(parse_family(f)?, require(n, "--n")?))
        };
        match (&args.instance, &args.family, &cfg.instance, &cfg.family) {
            (Some(path), ..) | (None, None, Some(path), _) => {
                let inst = load_instance(path)?;
                Ok(Target::Instance(path.clone(), inst))
            }
            (None, Some(f), ..) | (None, None, None, Some(f)) => family(f),
            (None, None, None, None) => Err(CliError::Usage(
                "give an instance file or --family with --n".into(),
            )),
        }
    }

    fn describe(&self) -> Value {
        match self {
            Target::Instance(path, inst) => json!({
                "instance": path.display().to_string(),
                "n": inst.n(),
                "clauses": inst.len(),
            }),
            Target::Family(f, n) => json!({ "family": f.to_string(), "n": n }),
        }
    }
}

fn instance_arg(flag: Option<PathBuf>, cfg: &Config) -> Result<(PathBuf, SatInstance)> {
    let path = require(flag.or_else(|| cfg.instance.clone()), "instance file")?;
    let inst = load_instance(&path)?;
    Ok((path, inst))
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let cap = cli.cap.or(cfg.cap).map(DimensionCap).unwrap_or_default();
    let mode = match cli.initial.as_deref().or(cfg.initial.as_deref()) {
        Some(raw) => parse_mode(raw)?,
        None => InitialMode::ClauseWeighted,
    };
    let ctx = Ctx {
        output: cli.output.or_else(|| cfg.output.clone()),
        report: cli.report.or_else(|| cfg.report.clone()),
        cap,
        mode,
        cfg,
    };
    match cli.command {
        Command::Spectrum(a) => spectrum(&ctx, a),
        Command::Gap(a) => gap(&ctx, a),
        Command::Evolve(a) => evolve_cmd(&ctx, a),
        Command::Scaling(a) => scaling(&ctx, a),
        Command::Trotter(a) => trotter(&ctx, a),
        Command::Solve(a) => solve(&ctx, a),
    }
}

/// The operator a spectral command works on, and the register size sectors
/// are built for (`None` for reduced matrices, which only take `full`).
fn spectral_operator(ctx: &Ctx, target: &Target) -> Result<(Box<dyn InterpolatedOperator>, Option<usize>)> {
    Ok(match target {
        Target::Instance(_, inst) => (
            Box::new(OperatorPair::from_instance(inst, ctx.mode, ctx.cap)?),
            Some(inst.n()),
        ),
        Target::Family(Family::Ring, n) => {
            let inst = families::agree_ring(*n)?;
            (Box::new(OperatorPair::from_instance(&inst, ctx.mode, ctx.cap)?), Some(*n))
        }
        Target::Family(f, n) => (Box::new(f.reduced(*n)?), None),
    })
}

fn sector_for(raw: Option<&str>, qubits: Option<usize>) -> Result<SectorProjector> {
    match (raw.unwrap_or("full"), qubits) {
        ("full", _) => Ok(SectorProjector::Full),
        (s, Some(n)) => parse_sector(s, n),
        (_, None) => Err(CliError::Usage(
            "reduced family matrices only support --sector full".into(),
        )),
    }
}

fn spectrum(ctx: &Ctx, a: SpectrumArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let target = Target::resolve(a.target, cfg)?;
    let (op, qubits) = spectral_operator(ctx, &target)?;
    let sector = sector_for(a.sector.as_deref().or(cfg.sector.as_deref()), qubits)?;
    let grid = a.grid.or(cfg.grid).unwrap_or(DEFAULT_GRID);
    let dim = match qubits {
        Some(n) => sector.build(n)?.dim(),
        None => op.dim(),
    };
    let levels = a.levels.or(cfg.levels).unwrap_or(DEFAULT_LEVELS).min(dim);
    let scan = scan_spectrum(op.as_ref(), levels, grid, &sector)?;
    ctx.emit(&scan.to_csv())
}

fn gap(ctx: &Ctx, a: GapArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let target = Target::resolve(a.target, cfg)?;
    let defaults = match target {
        Target::Instance(..) => GapOptions::default(),
        Target::Family(..) => scaling_gap_options(),
    };
    let options = GapOptions {
        coarse_points: a.coarse.or(cfg.coarse).unwrap_or(defaults.coarse_points),
        refine_tol: a.tol.or(cfg.tol).unwrap_or(defaults.refine_tol),
    };
    let estimate = a.estimate || cfg.estimate.unwrap_or(false);
    let safety = a.safety.or(cfg.safety).unwrap_or(DEFAULT_SAFETY);
    if !(options.refine_tol > 0.0 && safety > 0.0) {
        return Err(CliError::Usage("tolerances and --safety must be positive".into()));
    }
    let sector_raw = a.sector.as_deref().or(cfg.sector.as_deref());

    let mut out = json!({
        "target": target.describe(),
        "settings": {
            "coarse": options.coarse_points,
            "tol": options.refine_tol,
            "safety": safety,
            "initial": mode_name(ctx.mode),
            "grid_default": DEFAULT_GRID,
            "levels_default": DEFAULT_LEVELS,
            "threshold_default": DEFAULT_THRESHOLD,
        },
    });

    if let Target::Family(Family::Ring, n) = target {
        if estimate {
            return Err(CliError::Usage(
                "--estimate needs an instance file or a reduced family; the ring gap is analytic".into(),
            ));
        }
        let g = ring_gap(n, options.refine_tol)?;
        out["method"] = json!("momentum-blocks");
        out["g_min"] = json!(g.g_min);
        out["s_star"] = json!(g.s_star);
        out["refinement_tolerance"] = json!(options.refine_tol);
        return ctx.emit(&pretty(&out));
    }

    let (op, qubits) = spectral_operator(ctx, &target)?;
    let sector = sector_for(sector_raw, qubits)?;
    let report = find_min_gap(op.as_ref(), &sector, options)?;
    out["method"] = json!(match target {
        Target::Instance(..) => "full-space",
        Target::Family(..) => "reduced",
    });
    let report_json = serde_json::to_value(&report).expect("report serializes");
    for (k, v) in report_json.as_object().expect("report is an object") {
        out[k] = v.clone();
    }
    if let Target::Family(Family::Grover, n) = target {
        let sol = grover_secular(n)?;
        out["secular"] = serde_json::to_value(sol).expect("solution serializes");
    }
    if estimate {
        let est = adiabatic_time_estimate(op.as_ref(), &report, &sector, options.coarse_points)?;
        out["estimate"] = json!({
            "matrix_element": est.matrix_element,
            "time_scale": est.time_scale,
            "crude_bound": est.crude_bound,
            "suggested_T": safety * est.time_scale,
        });
    }
    ctx.emit(&pretty(&out))
}

fn evolve_cmd(ctx: &Ctx, a: EvolveArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let (path, inst) = instance_arg(a.instance, cfg)?;
    let total_time = require(a.total_time.or(cfg.total_time), "--T")?;
    let shots = a.shots.or(cfg.shots).unwrap_or(DEFAULT_SHOTS);
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let threshold = a.threshold.or(cfg.threshold).unwrap_or(DEFAULT_THRESHOLD);
    let pair = OperatorPair::from_instance(&inst, ctx.mode, ctx.cap)?;
    let dt = a.dt.or(cfg.dt).unwrap_or_else(|| default_dt(&pair));
    let result = evolve(&pair, &Schedule::linear(total_time)?, dt)?;
    let m = measure(&result.final_state, inst.n(), shots, seed)?;

    let mut counts: Vec<(usize, usize)> = m.counts().into_iter().collect();
    counts.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    let n = inst.n();
    let samples: Vec<Value> = counts
        .iter()
        .map(|&(z, c)| {
            json!({
                "assignment": Assignment::from_index(n, z).to_string(),
                "count": c,
                "energy": inst.energy_at_index(z),
            })
        })
        .collect();
    let ground: Vec<String> = result
        .ground_indices
        .iter()
        .map(|&z| Assignment::from_index(n, z).to_string())
        .collect();
    let out = json!({
        "instance": path.display().to_string(),
        "n": n,
        "T": result.total_time,
        "dt": result.dt,
        "steps": result.steps,
        "overlap": result.overlap,
        "norm_drift": result.norm_drift,
        "success": result.overlap >= threshold,
        "unsatisfiable": result.unsatisfiable,
        "ground_states": ground,
        "shots": shots,
        "samples": samples,
        "settings": {
            "seed": seed,
            "threshold": threshold,
            "initial": mode_name(ctx.mode),
            "safety_default": DEFAULT_SAFETY,
            "grid_default": DEFAULT_GRID,
            "levels_default": DEFAULT_LEVELS,
        },
    });
    ctx.emit(&pretty(&out))
}

fn scaling(ctx: &Ctx, a: ScalingArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let family = parse_family(&require(a.family.or_else(|| cfg.family.clone()), "--family")?)?;
    let ns = parse_range(&require(a.n_range.or_else(|| cfg.n_range.clone()), "--n-range")?)?;
    let defaults = scaling_gap_options();
    let options = GapOptions {
        coarse_points: a.coarse.or(cfg.coarse).unwrap_or(defaults.coarse_points),
        refine_tol: a.tol.or(cfg.tol).unwrap_or(defaults.refine_tol),
    };
    let study = gap_scaling_study(family, &ns, options)?;
    ctx.emit(&study.to_csv())?;
    let fit = json!({
        "family": family.to_string(),
        "n_values": ns,
        "power_fit": study.power_fit,
        "exponential_fit": study.exponential_fit,
        "prefers_exponential": study.prefers_exponential(),
        "settings": { "coarse": options.coarse_points, "tol": options.refine_tol },
    });
    ctx.emit_report(&pretty(&fit))
}

fn trotter(ctx: &Ctx, a: TrotterArgs) -> Result<()> {
    let cfg = &ctx.cfg;
    let (path, inst) = instance_arg(a.instance, cfg)?;
    let total_time = require(a.total_time.or(cfg.total_time), "--T")?;
    let epsilon = a.epsilon.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON);
    let mut budget = plan_budget_with(&inst, ctx.mode, total_time, epsilon)?;
    let slices = a.slices.or(cfg.slices);
    let substeps = a.substeps.or(cfg.substeps);
    if slices.is_some() || substeps.is_some() {
        budget = budget.with_counts(
            slices.unwrap_or(budget.slices),
            substeps.unwrap_or(budget.substeps),
        )?;
    }
    let seq = compile(&inst, ctx.mode, total_time, &budget)?;
    ctx.emit(&seq.to_text())?;

    if a.execute || cfg.execute.unwrap_or(false) {
        let pair = OperatorPair::from_instance(&inst, ctx.mode, ctx.cap)?;
        let compiled = execute(&seq, &initial_state(inst.n(), ctx.cap)?)?;
        let continuous = evolve(&pair, &Schedule::linear(total_time)?, default_dt(&pair))?;
        let f = fidelity(&compiled, &continuous.final_state)?;
        let report = json!({
            "instance": path.display().to_string(),
            "fidelity": f,
            "gate_overlap": ground_overlap(compiled.amplitudes(), &continuous.ground_indices),
            "continuous_overlap": continuous.overlap,
            "budget": budget,
            "settings": { "epsilon": epsilon, "initial": mode_name(ctx.mode) },
        });
        ctx.emit_report(&pretty(&report))?;
    }
    Ok(())
}

fn solve(ctx: &Ctx, a: SolveArgs) -> Result<()> {
    let (path, inst) = instance_arg(a.instance, &ctx.cfg)?;
    let sol = brute_force_solve(&inst)?;
    let minimizers: Vec<String> = sol.minimizers.iter().map(|a| a.to_string()).collect();
    let out = json!({
        "instance": path.display().to_string(),
        "n": inst.n(),
        "satisfiable": sol.min_energy == 0,
        "min_energy": sol.min_energy,
        "minimizers": minimizers,
    });
    ctx.emit(&pretty(&out))
}
