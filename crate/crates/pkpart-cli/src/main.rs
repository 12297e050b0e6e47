//! Batch command-line front end: EPPF tables, prediction rules, block-count
//! laws, structural and power-sum moments, samplers, and the verification
//! suite, with machine-readable JSON or CSV output.
//!
//! Exit codes: 0 success (and all checks passing), 1 verification failures,
//! 2 numerical-accuracy errors, 64 usage errors.

use clap::{Args, Parser, Subcommand};
use pkpart::error::PkError;
use pkpart::models::{
    eppf, eppf_table, kn_distribution_brownian, kn_distribution_unconditional, power_sum_moment,
    prediction_rule, rational_to_f64, PartitionModel,
};
use pkpart::partitions::Composition;
use pkpart::rng::RandomSource;
use pkpart::samplers::{
    sample_gem, sample_jump_partition, sample_kn_chain, CrpSampler, JumpProcessSpec,
    JUMP_DELTA_DEFAULT,
};
use pkpart::verify::{self, CheckStatus, Tier};

mod jsonout;
use jsonout::{fmt_f64, JsonObject};

#[derive(Parser)]
#[command(
    name = "pkpart",
    version,
    about = "Poisson-Kingman partition calculus: evaluators, samplers, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the EPPF at one composition or tabulate all shapes of n.
    Eppf(EppfArgs),
    /// Prediction-rule probabilities for attaching the next element.
    Predict(PredictArgs),
    /// Block-count laws: conditioned on local time, or unconditional.
    Kn(KnArgs),
    /// Structural moments and power-sum moments.
    Moments(MomentsArgs),
    /// Draw partitions, stick-breaking masses, or block-count paths.
    Sample(SampleArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model family: ewens | pd | stable | brownian | gg.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Conditioned total for the stable family.
    #[arg(long)]
    t: Option<f64>,
    /// Local time for the Brownian family.
    #[arg(long)]
    lambda: Option<f64>,
    /// Tilt rate of the generalized gamma family.
    #[arg(long)]
    b: Option<f64>,
    /// Levy density constant of the generalized gamma family.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// json (default) or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Output path; stdout when omitted. Files are written atomically.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct EppfArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Composition as comma-separated block sizes, e.g. 2,1.
    #[arg(long)]
    shape: Option<String>,
    /// Tabulate every decreasing shape of n instead.
    #[arg(long)]
    n: Option<u32>,
    /// Relative tolerance for the generalized-gamma quadrature path.
    #[arg(long, default_value_t = 1e-9)]
    quad_tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Current composition; omit for the empty partition.
    #[arg(long)]
    shape: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct KnArgs {
    /// Local time; omitting it selects the unconditional law.
    #[arg(long)]
    lambda: Option<f64>,
    /// Force the unconditional law.
    #[arg(long, default_value_t = false)]
    unconditional: bool,
    #[arg(long)]
    n: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Structural moment order.
    #[arg(long)]
    q: Option<f64>,
    /// Power-sum base m for E[S_m^k].
    #[arg(long)]
    m: Option<u32>,
    /// Power-sum exponent k for E[S_m^k].
    #[arg(long)]
    k: Option<u32>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Stick-breaking masses instead of partitions.
    #[arg(long, default_value_t = false)]
    gem: bool,
    /// Block-count chain instead of partitions.
    #[arg(long = "kn-chain", default_value_t = false)]
    kn_chain: bool,
    /// Ground-set size (partitions) or chain length.
    #[arg(long)]
    n: Option<u32>,
    /// Number of stick-breaking masses.
    #[arg(long)]
    k: Option<u32>,
    /// Number of samples.
    #[arg(long, default_value_t = 1)]
    count: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncation budget for the generalized-gamma jump sampler.
    #[arg(long, default_value_t = JUMP_DELTA_DEFAULT)]
    delta: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "fast")]
    tier: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run only checks whose name contains this substring.
    #[arg(long)]
    only: Option<String>,
    #[command(flatten)]
    out: OutputArgs,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version paths exit 0; everything else is usage
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(64);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    };
    std::process::exit(code);
}

fn exit_code_for(e: &PkError) -> i32 {
    match e {
        PkError::NumericalAccuracy(_) | PkError::Consistency(_) => 2,
        PkError::Bounds(_) | PkError::Domain(_) | PkError::Config(_) => 64,
    }
}

fn run(cli: Cli) -> Result<i32, PkError> {
    match cli.command {
        Command::Eppf(args) => cmd_eppf(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Kn(args) => cmd_kn(args),
        Command::Moments(args) => cmd_moments(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn build_model(args: &ModelArgs) -> Result<PartitionModel, PkError> {
    let family = args
        .model
        .as_deref()
        .ok_or_else(|| PkError::Config("--model is required".into()))?;
    let need = |opt: Option<f64>, name: &str| {
        opt.ok_or_else(|| PkError::Config(format!("--{name} is required for --model {family}")))
    };
    match family {
        "ewens" => PartitionModel::ewens(need(args.theta, "theta")?),
        "pd" => PartitionModel::two_param(need(args.alpha, "alpha")?, need(args.theta, "theta")?),
        "stable" => {
            PartitionModel::stable_conditioned(need(args.alpha, "alpha")?, need(args.t, "t")?)
        }
        "brownian" => PartitionModel::brownian_conditioned(need(args.lambda, "lambda")?),
        "gg" => PartitionModel::generalized_gamma(
            need(args.alpha, "alpha")?,
            need(args.b, "b")?,
            need(args.c, "c")?,
        ),
        other => Err(PkError::Config(format!("unknown model family '{other}'"))),
    }
}

fn model_json(model: &PartitionModel) -> JsonObject {
    let mut o = JsonObject::new();
    o.push_str("family", model.family());
    match *model {
        PartitionModel::Ewens { theta } => o.push_f64("theta", theta),
        PartitionModel::TwoParam { alpha, theta } => {
            o.push_f64("alpha", alpha);
            o.push_f64("theta", theta);
        }
        PartitionModel::StableConditioned { alpha, t } => {
            o.push_f64("alpha", alpha);
            o.push_f64("t", t);
        }
        PartitionModel::BrownianConditioned { lambda } => o.push_f64("lambda", lambda),
        PartitionModel::GeneralizedGamma { alpha, b, c } => {
            o.push_f64("alpha", alpha);
            o.push_f64("b", b);
            o.push_f64("c", c);
        }
    }
    o
}

fn parse_shape(s: &str) -> Result<Composition, PkError> {
    let parts: Result<Vec<u32>, _> = s.split(',').map(|p| p.trim().parse::<u32>()).collect();
    let parts = parts.map_err(|_| PkError::Config(format!("bad shape '{s}'")))?;
    Composition::new(parts)
}

fn parse_quad_tol(tol: f64) -> Result<f64, PkError> {
    if !(1e-12..=1e-4).contains(&tol) {
        return Err(PkError::Config(format!(
            "--quad-tol must lie in [1e-12, 1e-4], got {tol}"
        )));
    }
    Ok(tol)
}

fn cmd_eppf(args: EppfArgs) -> Result<i32, PkError> {
    let model = build_model(&args.model)?;
    parse_quad_tol(args.quad_tol)?;
    let text = match (&args.shape, args.n) {
        (Some(shape), None) => {
            let c = parse_shape(shape)?;
            let p = eppf(&model, &c)?;
            match args.out.format.as_str() {
                "json" => {
                    let mut o = JsonObject::new();
                    o.push_obj("model", model_json(&model));
                    o.push_u32_array("shape", c.parts());
                    o.push_f64("p", p);
                    o.finish()
                }
                "csv" => format!(
                    "shape,p\n\"{}\",{}\n",
                    c.parts()
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    fmt_f64(p)
                ),
                other => return Err(PkError::Config(format!("unknown format '{other}'"))),
            }
        }
        (None, Some(n)) => {
            let table = eppf_table(&model, n)?;
            match args.out.format.as_str() {
                "json" => {
                    let mut entries = Vec::new();
                    for e in &table.entries {
                        let mut eo = JsonObject::new();
                        eo.push_u32_array("shape", &e.shape);
                        eo.push_str("count", &e.count.to_string());
                        eo.push_f64("p", e.p);
                        entries.push(eo);
                    }
                    let mut o = JsonObject::new();
                    o.push_obj("model", model_json(&model));
                    o.push_u64("n", n as u64);
                    o.push_obj_array("entries", entries);
                    o.finish()
                }
                "csv" => {
                    let mut s = String::from("shape,count,p\n");
                    for e in &table.entries {
                        s.push_str(&format!(
                            "\"{}\",{},{}\n",
                            e.shape
                                .iter()
                                .map(|x| x.to_string())
                                .collect::<Vec<_>>()
                                .join(","),
                            e.count,
                            fmt_f64(e.p)
                        ));
                    }
                    s
                }
                other => return Err(PkError::Config(format!("unknown format '{other}'"))),
            }
        }
        _ => {
            return Err(PkError::Config(
                "eppf needs exactly one of --shape or --n".into(),
            ))
        }
    };
    write_output(&args.out, &text)?;
    Ok(0)
}

fn cmd_predict(args: PredictArgs) -> Result<i32, PkError> {
    let model = build_model(&args.model)?;
    let comp = args.shape.as_deref().map(parse_shape).transpose()?;
    let probs = prediction_rule(&model, comp.as_ref())?;
    let text = match args.out.format.as_str() {
        "json" => {
            let mut o = JsonObject::new();
            o.push_obj("model", model_json(&model));
            match &comp {
                Some(c) => o.push_u32_array("shape", c.parts()),
                None => o.push_u32_array("shape", &[]),
            }
            o.push_f64_array("probabilities", &probs);
            o.finish()
        }
        "csv" => {
            let mut s = String::from("index,probability\n");
            for (i, p) in probs.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, fmt_f64(*p)));
            }
            s
        }
        other => return Err(PkError::Config(format!("unknown format '{other}'"))),
    };
    write_output(&args.out, &text)?;
    Ok(0)
}

fn cmd_kn(args: KnArgs) -> Result<i32, PkError> {
    let (label, probs, rationals): (&str, Vec<f64>, Option<Vec<String>>) =
        match (args.lambda, args.unconditional) {
            (Some(_), true) => {
                return Err(PkError::Config(
                    "--lambda and --unconditional are mutually exclusive".into(),
                ))
            }
            (Some(lambda), false) => ("brownian", kn_distribution_brownian(args.n, lambda)?, None),
            (None, _) => {
                let law = kn_distribution_unconditional(args.n)?;
                let probs = law.iter().map(rational_to_f64).collect();
                let rationals = law.iter().map(|r| r.to_string()).collect();
                ("unconditional", probs, Some(rationals))
            }
        };
    let text = match args.out.format.as_str() {
        "json" => {
            let mut o = JsonObject::new();
            o.push_str("law", label);
            if let Some(lambda) = args.lambda {
                o.push_f64("lambda", lambda);
            }
            o.push_u64("n", args.n as u64);
            o.push_f64_array("p", &probs);
            if let Some(r) = &rationals {
                o.push_str_array("exact", r);
            }
            o.finish()
        }
        "csv" => {
            let mut s = String::from("k,p\n");
            for (i, p) in probs.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, fmt_f64(*p)));
            }
            s
        }
        other => return Err(PkError::Config(format!("unknown format '{other}'"))),
    };
    write_output(&args.out, &text)?;
    Ok(0)
}

fn cmd_moments(args: MomentsArgs) -> Result<i32, PkError> {
    let model = build_model(&args.model)?;
    let text = match (args.q, args.m, args.k) {
        (Some(q), None, None) => {
            let mu = verify::structural_moment_for(&model, q)?;
            // diagnostic tag for how the moment was produced
            let method = match model {
                PartitionModel::Ewens { .. } | PartitionModel::TwoParam { .. } => {
                    "beta_closed_form"
                }
                PartitionModel::BrownianConditioned { .. } => "hermite_closed_form",
                PartitionModel::StableConditioned { alpha, .. } => {
                    if alpha == 0.5 {
                        "hermite_closed_form"
                    } else {
                        "stable_quadrature"
                    }
                }
                PartitionModel::GeneralizedGamma { .. } => "invgauss_quadrature",
            };
            match args.out.format.as_str() {
                "json" => {
                    let mut o = JsonObject::new();
                    o.push_obj("model", model_json(&model));
                    o.push_f64("q", q);
                    o.push_f64("mu", mu);
                    o.push_str("method", method);
                    o.finish()
                }
                "csv" => format!("q,mu,method\n{},{},{method}\n", fmt_f64(q), fmt_f64(mu)),
                other => return Err(PkError::Config(format!("unknown format '{other}'"))),
            }
        }
        (None, Some(m), Some(k)) => {
            let value = power_sum_moment(&model, m, k)?;
            match args.out.format.as_str() {
                "json" => {
                    let mut o = JsonObject::new();
                    o.push_obj("model", model_json(&model));
                    o.push_u64("m", m as u64);
                    o.push_u64("k", k as u64);
                    o.push_f64("value", value);
                    o.finish()
                }
                "csv" => format!("m,k,value\n{m},{k},{}\n", fmt_f64(value)),
                other => return Err(PkError::Config(format!("unknown format '{other}'"))),
            }
        }
        _ => {
            return Err(PkError::Config(
                "moments needs either --q or both --m and --k".into(),
            ))
        }
    };
    write_output(&args.out, &text)?;
    Ok(0)
}

fn cmd_sample(args: SampleArgs) -> Result<i32, PkError> {
    if args.out.format != "json" {
        return Err(PkError::Config("sample output is JSON lines only".into()));
    }
    let mut r = RandomSource::new(args.seed);
    let mut lines = Vec::new();
    if args.gem {
        let alpha = args
            .model
            .alpha
            .ok_or_else(|| PkError::Config("--alpha is required for --gem".into()))?;
        let theta = args
            .model
            .theta
            .ok_or_else(|| PkError::Config("--theta is required for --gem".into()))?;
        let k = args
            .k
            .ok_or_else(|| PkError::Config("--k is required for --gem".into()))?;
        let mut header = JsonObject::new();
        header.push_str("kind", "gem");
        header.push_f64("alpha", alpha);
        header.push_f64("theta", theta);
        header.push_u64("k", k as u64);
        header.push_u64("count", args.count as u64);
        header.push_u64("seed", args.seed);
        lines.push(header.finish());
        for _ in 0..args.count {
            let m = sample_gem(alpha, theta, k, &mut r)?;
            lines.push(jsonout::f64_array(m.masses()));
        }
    } else if args.kn_chain {
        let lambda = args
            .model
            .lambda
            .ok_or_else(|| PkError::Config("--lambda is required for --kn-chain".into()))?;
        let n = args
            .n
            .ok_or_else(|| PkError::Config("--n is required for --kn-chain".into()))?;
        let mut header = JsonObject::new();
        header.push_str("kind", "kn_chain");
        header.push_f64("lambda", lambda);
        header.push_u64("n", n as u64);
        header.push_u64("count", args.count as u64);
        header.push_u64("seed", args.seed);
        lines.push(header.finish());
        for _ in 0..args.count {
            let path = sample_kn_chain(lambda, n, &mut r)?;
            lines.push(jsonout::u32_array(&path));
        }
    } else {
        let model = build_model(&args.model)?;
        let n = args
            .n
            .ok_or_else(|| PkError::Config("--n is required for partition sampling".into()))?;
        let mut header = JsonObject::new();
        header.push_str("kind", "partition");
        header.push_obj("model", model_json(&model));
        header.push_u64("n", n as u64);
        header.push_u64("count", args.count as u64);
        header.push_u64("seed", args.seed);
        lines.push(header.finish());
        match model {
            PartitionModel::GeneralizedGamma { alpha, b, c } => {
                let spec = JumpProcessSpec::new(alpha, b, c, args.delta)?;
                for _ in 0..args.count {
                    lines.push(sample_jump_partition(&spec, n, &mut r)?.to_json());
                }
            }
            _ => {
                let sampler = CrpSampler::new(model, n)?;
                for _ in 0..args.count {
                    lines.push(sampler.sample(&mut r)?.to_json());
                }
            }
        }
    }
    let mut text = lines.join("\n");
    text.push('\n');
    write_output(&args.out, &text)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, PkError> {
    let tier = Tier::parse(&args.tier)?;
    let reports = verify::run_selected(args.seed, tier, args.only.as_deref());
    if reports.is_empty() {
        return Err(PkError::Config(format!(
            "no check matches --only {}",
            args.only.as_deref().unwrap_or("")
        )));
    }
    let text = match args.out.format.as_str() {
        "json" => {
            let mut objs = Vec::new();
            for r in &reports {
                let mut o = JsonObject::new();
                o.push_str("name", &r.name);
                o.push_str(
                    "status",
                    match r.status {
                        CheckStatus::Pass => "pass",
                        CheckStatus::Fail => "fail",
                        CheckStatus::NumericalError => "numerical-error",
                    },
                );
                o.push_f64("max_abs_residual", r.max_abs_residual);
                o.push_f64("max_rel_residual", r.max_rel_residual);
                o.push_str("grid", &r.grid);
                o.push_f64("runtime_seconds", r.runtime.as_secs_f64());
                objs.push(o);
            }
            jsonout::obj_array(objs)
        }
        "csv" => {
            let mut s =
                String::from("name,status,max_abs_residual,max_rel_residual,runtime_seconds\n");
            for r in &reports {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.name,
                    match r.status {
                        CheckStatus::Pass => "pass",
                        CheckStatus::Fail => "fail",
                        CheckStatus::NumericalError => "numerical-error",
                    },
                    fmt_f64(r.max_abs_residual),
                    fmt_f64(r.max_rel_residual),
                    fmt_f64(r.runtime.as_secs_f64())
                ));
            }
            s
        }
        other => return Err(PkError::Config(format!("unknown format '{other}'"))),
    };
    write_output(&args.out, &text)?;
    Ok(verify::exit_status(&reports))
}

/// Write the fully built output in one shot; files go through a temp path
/// and rename so partial content never lands.
fn write_output(out: &OutputArgs, text: &str) -> Result<(), PkError> {
    match &out.output {
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            std::fs::write(&tmp, text)
                .and_then(|_| std::fs::rename(&tmp, path))
                .map_err(|e| PkError::Config(format!("cannot write {}: {e}", path.display())))
        }
    }
}
