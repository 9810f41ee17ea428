use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use depsynth::eval_report::{column_distances, emit_report, evaluate, PreservationResult, Provenance};
use depsynth::ld_scorer::{score_all, EnumerationPolicy, DEFAULT_BUDGET};
use depsynth::synth::{mined_graph, synthesize_baseline, synthesize_hfgf, Generator, GeneratorKind, IdPolicy};
use depsynth::{
    build_dependency_graph, builtin_case, generate_benchmark, mine_fds, parse_config, read_table, write_table, Config,
    Error, FdSet, QReport, Result, Seed,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "depsynth", version, about = "Dependency-preserving synthetic tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark table with injected dependencies
    Generate(GenerateArgs),
    /// Mine minimal functional dependencies from a CSV
    Mine(MineArgs),
    /// Score column pairs with the Q-function
    Score(ScoreArgs),
    /// Synthesize a table from a reference
    Synth(SynthArgs),
    /// Compare dependency preservation between two tables
    Eval(EvalArgs),
    /// Run generate, both synthesis arms and evaluation for a builtin case
    Pipeline(PipelineArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["config", "case"])))]
struct GenerateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    case: Option<u32>,
    /// Defaults to the row count in the config
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    max_lhs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    max_subset: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("arm").required(true).args(["hfgf", "baseline"])))]
struct SynthArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, conflicts_with = "mined")]
    config: Option<PathBuf>,
    /// FD set JSON from `mine`
    #[arg(long)]
    mined: Option<PathBuf>,
    /// Q report JSON from `score`; LD pairs become stochastic rules
    #[arg(long, requires = "mined")]
    qreport: Option<PathBuf>,
    #[arg(long, default_value = "marginal")]
    generator: String,
    #[arg(long, default_value = "fresh")]
    id_policy: String,
    #[arg(long)]
    hfgf: bool,
    #[arg(long)]
    baseline: bool,
    /// Defaults to the reference row count
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    real: PathBuf,
    #[arg(long)]
    synth: PathBuf,
    #[arg(long, default_value_t = 1)]
    max_lhs: usize,
    #[arg(long, default_value_t = 1)]
    max_subset: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    case: u32,
    #[arg(long, default_value = "marginal")]
    generator: String,
    #[arg(long, default_value = "fresh")]
    id_policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    outdir: PathBuf,
    #[arg(long)]
    rows_override: Option<usize>,
}

#[derive(Serialize, Deserialize, Default)]
struct RunManifest {
    command: String,
    arguments: Vec<String>,
    seed: Option<u64>,
    config_hash: Option<String>,
    generator: Option<String>,
    id_policy: Option<String>,
    arm: Option<String>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    tool_version: String,
}

impl RunManifest {
    fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            arguments: std::env::args().skip(1).collect(),
            tool_version: VERSION.to_string(),
            ..Default::default()
        }
    }

    fn input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), digest(bytes));
    }

    fn output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.insert(path.display().to_string(), digest(bytes));
    }

    fn write_beside(&self, out: &Path) -> Result<()> {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        write(Path::new(&name), self.to_json().as_bytes())
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<(String, Vec<u8>)> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::InvalidArgument(format!("{} is not valid UTF-8", path.display())))?;
    Ok((text, bytes))
}

fn generator(kind: &str, id_policy: &str) -> Result<Generator> {
    Ok(Generator::new(kind.parse::<GeneratorKind>()?).with_id_policy(id_policy.parse::<IdPolicy>()?))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut manifest = RunManifest::new("generate");
    let config = match (&args.config, args.case) {
        (Some(path), _) => {
            let (text, bytes) = read_text(path)?;
            manifest.input(path, &bytes);
            parse_config(&text)?
        }
        (None, Some(k)) => builtin_case(k)?.0,
        (None, None) => return Err(Error::InvalidArgument("one of --config or --case is required".into())),
    };
    let n = args.rows.unwrap_or(config.n);
    let table = generate_benchmark(&config, n, Seed(args.seed))?;
    let bytes = write_table(&table);
    write(&args.out, &bytes)?;
    manifest.seed = Some(args.seed);
    manifest.config_hash = Some(config.hash());
    manifest.output(&args.out, &bytes);
    manifest.write_beside(&args.out)
}

fn cmd_mine(args: MineArgs) -> Result<()> {
    let mut manifest = RunManifest::new("mine");
    let bytes = read(&args.input)?;
    manifest.input(&args.input, &bytes);
    let table = read_table(&bytes, None)?;
    let out = mine_fds(&table, args.max_lhs)?.to_json() + "\n";
    write(&args.out, out.as_bytes())?;
    manifest.output(&args.out, out.as_bytes());
    manifest.write_beside(&args.out)
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let mut manifest = RunManifest::new("score");
    let bytes = read(&args.input)?;
    manifest.input(&args.input, &bytes);
    let table = read_table(&bytes, None)?;
    let policy = EnumerationPolicy {
        budget: args.budget,
        ..EnumerationPolicy::with_max_subset(args.max_subset)
    };
    let out = score_all(&table, policy)?.to_json() + "\n";
    write(&args.out, out.as_bytes())?;
    manifest.output(&args.out, out.as_bytes());
    manifest.write_beside(&args.out)
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut manifest = RunManifest::new("synth");
    let gen = generator(&args.generator, &args.id_policy)?;
    let config: Option<Config> = match &args.config {
        Some(path) => {
            let (text, bytes) = read_text(path)?;
            manifest.input(path, &bytes);
            Some(parse_config(&text)?)
        }
        None => None,
    };
    let ref_bytes = read(&args.reference)?;
    manifest.input(&args.reference, &ref_bytes);
    let reference = read_table(&ref_bytes, config.as_ref())?;
    let n = args.rows.unwrap_or(reference.n_rows());
    let seed = Seed(args.seed);

    let table = if args.baseline {
        synthesize_baseline(&reference, gen, n, seed)?
    } else {
        let graph = match (&config, &args.mined) {
            (Some(c), _) => build_dependency_graph(c)?,
            (None, Some(fd_path)) => {
                let (fd_text, fd_bytes) = read_text(fd_path)?;
                manifest.input(fd_path, &fd_bytes);
                let fds = FdSet::from_json(&fd_text)?;
                let qreport = match &args.qreport {
                    Some(q_path) => {
                        let (q_text, q_bytes) = read_text(q_path)?;
                        manifest.input(q_path, &q_bytes);
                        Some(QReport::from_json(&q_text)?)
                    }
                    None => None,
                };
                mined_graph(&reference, &fds, qreport.as_ref())?
            }
            (None, None) => {
                return Err(Error::InvalidArgument("--hfgf needs --config or --mined".into()));
            }
        };
        synthesize_hfgf(&reference, &graph, gen, n, seed)?
    };

    let bytes = write_table(&table);
    write(&args.out, &bytes)?;
    manifest.seed = Some(args.seed);
    manifest.config_hash = config.as_ref().map(Config::hash);
    manifest.generator = Some(gen.kind.name().to_string());
    manifest.id_policy = Some(gen.id_policy.name().to_string());
    manifest.arm = Some(if args.baseline { "baseline" } else { "hfgf" }.to_string());
    manifest.output(&args.out, &bytes);
    manifest.write_beside(&args.out)
}

/// Provenance recovered from the manifest written next to a synthetic CSV.
fn provenance_of(synth: &Path) -> Provenance {
    let mut name = synth.as_os_str().to_owned();
    name.push(".manifest.json");
    let Ok(text) = fs::read_to_string(Path::new(&name)) else {
        return Provenance::default();
    };
    let Ok(m) = serde_json::from_str::<RunManifest>(&text) else {
        return Provenance::default();
    };
    Provenance {
        seeds: m.seed.map(|s| ("synth".to_string(), s)).into_iter().collect(),
        generator: m.generator,
        id_policy: m.id_policy,
        arm: m.arm,
        config_hash: m.config_hash,
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let mut manifest = RunManifest::new("eval");
    let real_bytes = read(&args.real)?;
    let synth_bytes = read(&args.synth)?;
    manifest.input(&args.real, &real_bytes);
    manifest.input(&args.synth, &synth_bytes);
    let real = read_table(&real_bytes, None)?;
    let synth = read_table(&synth_bytes, None)?;
    let result = evaluate(&real, &synth, args.max_lhs, EnumerationPolicy::with_max_subset(args.max_subset))?;
    println!("{}", result.summary());
    let report = emit_report(result, column_distances(&real, &synth)?, provenance_of(&args.synth)) + "\n";
    write(&args.out, report.as_bytes())?;
    manifest.output(&args.out, report.as_bytes());
    manifest.write_beside(&args.out)
}

fn summary_table(case: u32, gen: &Generator, seed: u64, n: usize, hfgf: &PreservationResult, base: &PreservationResult) -> String {
    let mut s = format!(
        "case {case}, generator {}, id policy {}, seed {seed}, rows {n}\n\n",
        gen.kind.name(),
        gen.id_policy.name()
    );
    s += "| arm      | FDs (%) | LDs (%) |\n";
    s += "|----------|---------|---------|\n";
    for (arm, r) in [("HFGF", hfgf), ("baseline", base)] {
        s += &format!("| {arm:<8} | {:>7.0} | {:>7.0} |\n", r.fd_pct, r.ld_pct);
    }
    s
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    let mut manifest = RunManifest::new("pipeline");
    let gen = generator(&args.generator, &args.id_policy)?;
    let (config, default_n) = builtin_case(args.case)?;
    let n = match args.rows_override {
        Some(0) => return Err(Error::InvalidArgument("--rows-override must be at least 1".into())),
        Some(n) => n,
        None => default_n,
    };
    let seed = Seed(args.seed);
    fs::create_dir_all(&args.outdir).map_err(|e| Error::Io(format!("{}: {e}", args.outdir.display())))?;

    let benchmark = generate_benchmark(&config, n, seed)?;
    let graph = build_dependency_graph(&config)?;
    let hfgf = synthesize_hfgf(&benchmark, &graph, gen, n, seed)?;
    let baseline = synthesize_baseline(&benchmark, gen, n, seed)?;

    let policy = EnumerationPolicy::default();
    let mut results = Vec::new();
    let mut emit = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = args.outdir.join(name);
        write(&path, bytes)?;
        manifest.output(&path, bytes);
        Ok(())
    };
    emit("benchmark.csv", &write_table(&benchmark))?;
    for (arm, table) in [("hfgf", &hfgf), ("baseline", &baseline)] {
        emit(&format!("{arm}.csv"), &write_table(table))?;
        let result = evaluate(&benchmark, table, 1, policy)?;
        let provenance = Provenance {
            seeds: [("benchmark".to_string(), args.seed), ("synth".to_string(), args.seed)].into_iter().collect(),
            generator: Some(gen.kind.name().to_string()),
            id_policy: Some(gen.id_policy.name().to_string()),
            arm: Some(arm.to_string()),
            config_hash: Some(config.hash()),
        };
        let report = emit_report(result.clone(), column_distances(&benchmark, table)?, provenance) + "\n";
        emit(&format!("report_{arm}.json"), report.as_bytes())?;
        results.push(result);
    }
    let summary = summary_table(args.case, &gen, args.seed, n, &results[0], &results[1]);
    emit("summary.md", summary.as_bytes())?;
    print!("{summary}");

    manifest.seed = Some(args.seed);
    manifest.config_hash = Some(config.hash());
    manifest.generator = Some(gen.kind.name().to_string());
    manifest.id_policy = Some(gen.id_policy.name().to_string());
    write(&args.outdir.join("manifest.json"), manifest.to_json().as_bytes())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("DEPSYNTH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("DEPSYNTH_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Internal(e.to_string()))
}

fn report_failure(code: &str, message: &str) {
    let body = serde_json::json!({"error": {"code": code, "message": message}});
    eprintln!("{body}");
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Score(a) => cmd_score(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Pipeline(a) => cmd_pipeline(a),
    }
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        report_failure("internal", &info.to_string());
    }));

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_failure("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };

    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            report_failure(e.code(), &e.to_string());
            ExitCode::from(if e.is_internal() { 3 } else { 2 })
        }
        Err(_) => ExitCode::from(3),
    }
}

