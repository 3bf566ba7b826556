use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use mcg::data::Dataset;
use mcg::family::{make_submodel, BaseKind};
use mcg::selection::gof_report;
use mcg::shape::{hazard_shape, shape_csv, shape_curves, ShapeSweep};
use mcg::{errata, fit_mle_with_starts, Fit, McgError, Measure, ModelName, ModelSpec, OptimizerConfig};

const SCHEMA_VERSION: u32 = 1;

const KS_NOTE: &str = "K-S p-value uses the asymptotic Kolmogorov law with the fitted parameters treated as known; \
no Lilliefors-type correction for estimation is applied, so it is conservative";

#[derive(Parser, Debug)]
#[command(name = "mcg", version, about = "McDonald-Gompertz lifetime models: fitting, goodness of fit, sampling and plot data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum-likelihood fit of one model
    Fit(FitArgs),
    /// Fit plus information criteria and the K-S statistic
    Gof(FitArgs),
    /// Seeded random draws
    Sample(SampleArgs),
    /// pdf, cdf and hazard on a grid
    Eval(EvalArgs),
    /// Bowley and Moors measures as functions of c
    Curves(CurvesArgs),
    /// Fit a model and its nested sub-models and report likelihood-ratio tests
    Compare(CompareArgs),
    /// Machine-readable list of printed-formula discrepancies
    Errata(OutArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct OptArgs {
    /// Number of optimizer starts
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        let mut cfg = OptimizerConfig {
            seed: self.seed,
            ..OptimizerConfig::default()
        };
        if let Some(s) = self.starts {
            cfg.n_starts = s.max(1);
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        cfg
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long, default_value = "mcg")]
    model: String,
    /// CSV with one positive value per line (optional header)
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    opt: OptArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl ParamArgs {
    fn named(&self) -> Vec<(&'static str, f64)> {
        [("a", self.a), ("b", self.b), ("c", self.c), ("theta", self.theta), ("gamma", self.gamma)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long, default_value = "mcg")]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    grid_min: f64,
    #[arg(long)]
    grid_max: f64,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
}

impl GridArgs {
    fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.grid_min.is_finite() && self.grid_max.is_finite() && self.grid_max > self.grid_min) || self.grid_points < 2 {
            return Err(CliError::Input("grid needs finite --grid-min < --grid-max and --grid-points >= 2".into()));
        }
        let step = (self.grid_max - self.grid_min) / (self.grid_points - 1) as f64;
        Ok((0..self.grid_points).map(|i| self.grid_min + step * i as f64).collect())
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, default_value = "mcg")]
    model: String,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    /// Values of a (comma separated); paired with --b
    #[arg(long, value_delimiter = ',', required = true)]
    a: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    b: Vec<f64>,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long, value_delimiter = ',', default_value = "bowley,moors")]
    measure: Vec<String>,
    /// c grid
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Full model first, then nested sub-models
    #[arg(long, value_delimiter = ',', default_value = "mcg,bg,kumg,mce")]
    model: Vec<String>,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    opt: OptArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum CliError {
    Input(String),
    /// Output already written; the fit did not converge.
    NotConverged,
    Numeric(String),
}

impl From<McgError> for CliError {
    fn from(e: McgError) -> Self {
        match e {
            McgError::Domain(_) | McgError::Model(_) | McgError::Data(_) | McgError::Degenerate(_) => CliError::Input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NotConverged => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

fn parse_model(s: &str) -> Result<ModelName, CliError> {
    s.parse::<ModelName>().map_err(|e| CliError::Input(e.to_string()))
}

fn read_data(path: &Path) -> Result<Dataset<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset::from_csv_str(&text, label)?)
}

fn emit(out: &OutArgs, body: &str) -> Result<(), CliError> {
    match &out.out {
        Some(p) => fs::write(p, body).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn to_json<S: Serialize>(v: &S) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn fit_json(fit: &Fit) -> Value {
    json!({
        "model": fit.model.name,
        "param_names": fit.param_names,
        "estimates": fit.estimates,
        "std_errors": fit.std_errors,
        "neg_loglik": fit.neg_loglik,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "grad_norm": fit.grad_norm,
        "n_obs": fit.n_obs,
        "at_bound": fit.at_bound,
        "info_condition": fit.info_condition,
        "info_matrix": fit.info_matrix,
        "start_index": fit.start_index,
        "n_starts": fit.n_starts,
        "constraints": fit.model.constraints,
    })
}

fn fit_csv(fit: &Fit) -> String {
    let mut s = String::from("param,estimate,std_error\n");
    for (i, name) in fit.param_names.iter().enumerate() {
        let se = fit.std_errors.as_ref().map(|v| format!("{:?}", v[i])).unwrap_or_default();
        s.push_str(&format!("{name},{:?},{se}\n", fit.estimates[i]));
    }
    s
}

fn converged_or(fit: &Fit) -> Result<(), CliError> {
    if fit.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged)
    }
}

fn cmd_fit(args: &FitArgs, with_gof: bool) -> Result<(), CliError> {
    let model = parse_model(&args.model)?;
    let data = read_data(&args.data)?;
    let fit = fit_mle_with_starts(&model.spec(), &data, &args.opt.config(), &[])?;
    let body = if with_gof {
        let report = gof_report(&fit, &data, None)?;
        match args.out.format.unwrap_or(Format::Json) {
            Format::Json => to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "data": data.label,
                "report": report,
                "fit": fit_json(&fit),
                "ks_note": KS_NOTE,
            })),
            Format::Csv => gof_csv(&[report]),
        }
    } else {
        match args.out.format.unwrap_or(Format::Json) {
            Format::Json => to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "data": data.label,
                "fit": fit_json(&fit),
            })),
            Format::Csv => fit_csv(&fit),
        }
    };
    emit(&args.out, &body)?;
    converged_or(&fit)
}

fn opt_num<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn gof_csv(rows: &[mcg::Report]) -> String {
    let mut s = String::from("model,neg_loglik,k_params,n_obs,aic,aicc,bic,ks_stat,ks_pvalue,lrt_stat,lrt_df,lrt_pvalue\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:?},{},{},{:?},{},{:?},{:?},{:?},{},{},{}\n",
            r.model.name,
            r.neg_loglik,
            r.k_params,
            r.n_obs,
            r.aic,
            opt_num(r.aicc),
            r.bic,
            r.ks_stat,
            r.ks_pvalue,
            opt_num(r.lrt_stat),
            r.lrt_df.map(|d| d.to_string()).unwrap_or_default(),
            opt_num(r.lrt_pvalue)
        ));
    }
    s
}

fn cmd_sample(args: &SampleArgs) -> Result<(), CliError> {
    let model = parse_model(&args.model)?;
    let member = make_submodel(model, &args.params.named())?;
    let draws = member.sample(args.n, args.seed)?;
    let body = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("y\n");
            for y in &draws {
                s.push_str(&format!("{y:?}\n"));
            }
            s
        }
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "model": model,
            "params": member.to_vec(),
            "seed": args.seed,
            "draws": draws,
        })),
    };
    emit(&args.out, &body)
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let model = parse_model(&args.model)?;
    let member = make_submodel(model, &args.params.named())?;
    let ys = args.grid.points()?;
    if ys[0] < 0.0 {
        return Err(CliError::Input("--grid-min must be >= 0".into()));
    }
    let mut rows = Vec::with_capacity(ys.len());
    for &y in &ys {
        rows.push((y, member.pdf(y), member.cdf(y)?, member.hazard(y)?));
    }
    let body = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut s = String::from("y,pdf,cdf,hazard\n");
            for (y, f, c, h) in &rows {
                s.push_str(&format!("{y:?},{f:?},{c:?},{h:?}\n"));
            }
            s
        }
        Format::Json => {
            let hazards: Vec<f64> = rows.iter().map(|r| r.3).collect();
            let shape = match member {
                mcg::Member::Gompertz(p) => hazard_shape(&p, ys[0], ys[ys.len() - 1], ys.len().max(3))?,
                mcg::Member::Exponential(p) => hazard_shape(&p, ys[0], ys[ys.len() - 1], ys.len().max(3))?,
            };
            to_json(&json!({
                "schema_version": SCHEMA_VERSION,
                "model": model,
                "params": member.to_vec(),
                "y": ys,
                "pdf": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
                "cdf": rows.iter().map(|r| r.2).collect::<Vec<_>>(),
                "hazard": hazards,
                "hazard_shape": shape,
            }))
        }
    };
    emit(&args.out, &body)
}

fn cmd_curves(args: &CurvesArgs) -> Result<(), CliError> {
    let shapes: Vec<(f64, f64)> = match (args.a.len(), args.b.len()) {
        (na, nb) if na == nb => args.a.iter().copied().zip(args.b.iter().copied()).collect(),
        (_, 1) => args.a.iter().map(|&a| (a, args.b[0])).collect(),
        (1, _) => args.b.iter().map(|&b| (args.a[0], b)).collect(),
        _ => return Err(CliError::Input("--a and --b need equal lengths, or one of them a single value".into())),
    };
    let measures = args
        .measure
        .iter()
        .map(|m| m.parse::<Measure>().map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let sweep = ShapeSweep {
        shapes,
        theta: args.theta,
        gamma: args.gamma,
        c_values: args.grid.points()?,
    };
    let rows = shape_curves(&sweep, &measures)?;
    let body = match args.out.format.unwrap_or(Format::Csv) {
        Format::Csv => shape_csv(&rows),
        Format::Json => to_json(&json!({ "schema_version": SCHEMA_VERSION, "rows": rows })),
    };
    emit(&args.out, &body)
}

/// Starting points for `full` taken from a nested fit.
fn seed_from(full: &ModelSpec, sub: &Fit) -> Option<Vec<f64>> {
    let mut v = sub.full_estimates().ok()?;
    if full.base == BaseKind::Gompertz && sub.model.base == BaseKind::Exponential {
        // the exponential base is the gamma -> 0 edge
        v.push(1e-6);
    }
    Some(full.restrict(&v))
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let names = args.model.iter().map(|m| parse_model(m)).collect::<Result<Vec<_>, _>>()?;
    let (full_name, nested) = names.split_first().ok_or_else(|| CliError::Input("--model needs at least one name".into()))?;
    let full_spec = full_name.spec();
    for n in nested {
        if !full_spec.contains(&n.spec()) {
            return Err(CliError::Input(format!("{n} is not nested in {full_name}")));
        }
    }
    let data = read_data(&args.data)?;
    let cfg = args.opt.config();
    let subs = nested
        .iter()
        .map(|n| fit_mle_with_starts(&n.spec(), &data, &cfg, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    let extra: Vec<Vec<f64>> = subs.iter().filter_map(|s| seed_from(&full_spec, s)).collect();
    let full = fit_mle_with_starts(&full_spec, &data, &cfg, &extra)?;
    let mut reports = vec![gof_report(&full, &data, None)?];
    for s in &subs {
        reports.push(gof_report(s, &data, Some(&full))?);
    }
    let mut fits = vec![fit_json(&full)];
    fits.extend(subs.iter().map(fit_json));
    let ladder: Vec<Value> = reports[1..]
        .iter()
        .map(|r| {
            json!({
                "nested": r.model.name,
                "full": full_name,
                "lrt_stat": r.lrt_stat,
                "lrt_df": r.lrt_df,
                "lrt_pvalue": r.lrt_pvalue,
            })
        })
        .collect();
    let body = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "schema_version": SCHEMA_VERSION,
            "data": data.label,
            "reports": reports,
            "ladder": ladder,
            "fits": fits,
            "ks_note": KS_NOTE,
        })),
        Format::Csv => gof_csv(&reports),
    };
    emit(&args.out, &body)?;
    if full.converged && subs.iter().all(|s| s.converged) {
        Ok(())
    } else {
        Err(CliError::NotConverged)
    }
}

fn cmd_errata(out: &OutArgs) -> Result<(), CliError> {
    if out.format == Some(Format::Csv) {
        return Err(CliError::Input("errata is only available as JSON".into()));
    }
    let report = errata::formula_report()?;
    emit(out, &report.to_json())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, false),
        Command::Gof(a) => cmd_fit(a, true),
        Command::Sample(a) => cmd_sample(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Errata(a) => cmd_errata(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) => eprintln!("error: {m}"),
                CliError::NotConverged => eprintln!("warning: optimizer did not converge; result written with converged = false"),
                CliError::Numeric(m) => eprintln!("numeric failure: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
