use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use onepress::bindings::{to_modified, BindingTable};
use onepress::config::Config;
use onepress::detector::{detect_trace, read_events, write_events};
use onepress::gateway::{replay_events, serve, MenuLibrary, DEFAULT_ENGINE_KEY};
use onepress::signal::{parse_script, read_trace, synthesize_trace, write_trace, Key, SensorModel};
use onepress::trial::{run_trial, split_attempts, summarize, write_trial_log, TaskSpec};
use onepress::wytiwyg::{EngineDriver, MenuModel, WytiwygState};

/// One-press control toolkit: synthesize force traces, detect pressing
/// movements, replay menu interactions, classify trials, serve sessions.
#[derive(Parser)]
#[command(name = "onepress", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a force trace from a press script.
    Gen(GenArgs),
    /// Run the detector over a trace and write events as JSON lines.
    Detect(DetectArgs),
    /// Drive the menu engine from an event stream.
    Replay(ReplayArgs),
    /// Classify trial sessions and summarize them.
    Trial(TrialArgs),
    /// Resolve events against a virtual modifier binding table.
    Resolve(ResolveArgs),
    /// Run the line-delimited JSON gateway over TCP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Config file (TOML); falls back to $ONEPRESS_CONFIG, then defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OutputArg {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    script: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.6)]
    floor: f64,
    #[arg(long, default_value_t = 3.0)]
    saturation: f64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 100.0)]
    rate: f64,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    trace: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    events: PathBuf,
    /// Menu fixture file; the bundled `suggest10` menu when omitted.
    #[arg(long)]
    menu: Option<PathBuf>,
    /// Key whose one-press cycles drive the menu.
    #[arg(long, default_value = DEFAULT_ENGINE_KEY)]
    key: String,
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct TrialArgs {
    /// Directory of session event files (`*.jsonl`), one per subject.
    #[arg(long)]
    inputs: PathBuf,
    /// Task preset: target8, navigate, preview, commit-any (or stage1..stage4).
    #[arg(long, default_value = "target8")]
    task: String,
    #[arg(long, default_value = DEFAULT_ENGINE_KEY)]
    key: String,
    /// Write the per-attempt trial log here.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Write the summary as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long)]
    events: PathBuf,
    /// Binding file; the bundled sample table when omitted.
    #[arg(long)]
    bindings: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 7878)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    /// Extra menu fixtures, addressable by their `id`.
    #[arg(long)]
    menu: Vec<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<onepress::Error> for Failure {
    fn from(e: onepress::Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = Result<(), Failure>;

/// `-` reads stdin.
fn open(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdin().lock()));
    }
    File::open(path)
        .map(|f| Box::new(BufReader::new(f)) as Box<dyn BufRead>)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn output(arg: &OutputArg) -> Result<Box<dyn Write>, Failure> {
    Ok(match &arg.output {
        Some(path) if path != Path::new("-") => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        )),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn config(arg: &ConfigArg) -> Result<Config, Failure> {
    if let Some(path) = &arg.config {
        return Ok(Config::parse(&read_text(path)?)?);
    }
    match std::env::var_os(onepress::config::CONFIG_ENV) {
        Some(path) => Ok(Config::parse(&read_text(Path::new(&path))?)?),
        None => Ok(Config::default()),
    }
}

fn write_json_line<W: Write + ?Sized, T: Serialize>(out: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

fn gen(args: GenArgs) -> CliResult {
    let script = parse_script(&read_text(&args.script)?)?;
    let sensor = SensorModel {
        floor_n: args.floor,
        saturation_n: args.saturation,
        noise_sigma_n: args.noise,
        sample_rate_hz: args.rate,
    };
    let samples = synthesize_trace(&script, &sensor, args.seed)?;
    write_trace(&samples, output(&args.out)?)?;
    Ok(())
}

fn detect(args: DetectArgs) -> CliResult {
    let cfg = config(&args.config)?;
    let samples = read_trace(open(&args.trace)?)?;
    let events = detect_trace(&samples, &cfg.detector)?;
    write_events(&events, output(&args.out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct FinalState<'a> {
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(flatten)]
    state: &'a WytiwygState,
}

fn replay(args: ReplayArgs) -> CliResult {
    let cfg = config(&args.config)?;
    let events = read_events(open(&args.events)?)?;
    let menu = match &args.menu {
        Some(path) => {
            if !path.exists() {
                return Err(Failure::Usage(format!("{}: no such file", path.display())));
            }
            MenuModel::load(path)?
        }
        None => MenuModel::builtin(onepress::gateway::DEFAULT_MENU)?,
    };
    let key = Key::new(args.key).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut driver = EngineDriver::new(Arc::new(menu), cfg.wytiwyg, key)?;
    let mut out = output(&args.out)?;
    for msg in replay_events(&events, &mut driver) {
        out.write_all(msg.to_line().as_bytes())?;
        out.write_all(b"\n")?;
    }
    write_json_line(
        &mut out,
        &FinalState {
            kind: "final_state",
            state: driver.state(),
        },
    )?;
    out.flush()?;
    Ok(())
}

fn trial(args: TrialArgs) -> CliResult {
    let cfg = config(&args.config)?;
    let task = TaskSpec::preset(&args.task)
        .ok_or_else(|| Failure::Usage(format!("unknown task preset {:?}", args.task)))?;
    let key = Key::new(args.key).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.inputs)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.inputs.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::Usage(format!(
            "{}: no *.jsonl session files",
            args.inputs.display()
        )));
    }

    let mut logs = Vec::new();
    for path in &files {
        let subject = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let events = read_events(open(path)?)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let attempts = split_attempts(&events, &key);
        let log = run_trial(subject, &task, &attempts, &cfg.wytiwyg)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        logs.push(log);
    }

    if let Some(path) = &args.log {
        let file = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        write_trial_log(&logs, BufWriter::new(file))?;
    }
    let summary = summarize(&logs);
    if let Some(path) = &args.json {
        let mut file = BufWriter::new(
            File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        );
        serde_json::to_writer_pretty(&mut file, &summary).map_err(onepress::Error::from)?;
        file.write_all(b"\n")?;
        file.flush()?;
    }
    let mut out = output(&args.out)?;
    out.write_all(summary.to_table().as_bytes())?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Resolved<'a> {
    t_ms: u64,
    key: &'a str,
    modifier: String,
    action: String,
}

fn resolve(args: ResolveArgs) -> CliResult {
    let table = match &args.bindings {
        Some(path) => BindingTable::parse(&read_text(path)?)?,
        None => BindingTable::sample(),
    };
    let events = read_events(open(&args.events)?)?;
    let mut out = output(&args.out)?;
    for chord in events.iter().filter_map(to_modified) {
        write_json_line(
            &mut out,
            &Resolved {
                t_ms: chord.t_ms,
                key: chord.key.as_str(),
                modifier: chord.modifier.to_string(),
                action: table.resolve(&chord).to_string(),
            },
        )?;
    }
    out.flush()?;
    Ok(())
}

fn run_server(args: ServeArgs) -> CliResult {
    let cfg = config(&args.config)?;
    let mut menus = MenuLibrary::builtin();
    for path in &args.menu {
        if !path.exists() {
            return Err(Failure::Usage(format!("{}: no such file", path.display())));
        }
        menus.insert(MenuModel::load(path)?);
    }
    let listener = TcpListener::bind((args.bind.as_str(), args.port))?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve(listener, Arc::new(menus), cfg)?;
    Ok(())
}

fn fail(kind: &str, code: u8, message: &str) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message.trim() });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            return fail("usage", 2, first.trim_start_matches("error: "));
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Detect(a) => detect(a),
        Command::Replay(a) => replay(a),
        Command::Trial(a) => trial(a),
        Command::Resolve(a) => resolve(a),
        Command::Serve(a) => run_server(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => fail("usage", 2, &m),
        Err(Failure::Data(m)) => fail("data", 1, &m),
    }
}
