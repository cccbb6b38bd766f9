//! Command-line front end. `run` is the whole program; the binary only
//! forwards process arguments and streams.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::alert::{load_mapping, map_alert, Alert, CheckerMapping};
use crate::eval::{self, EffortParams, Grouping};
use crate::ingest::{self, Format};
use crate::repair::{self, OutputMode, RepairConfig};
use crate::site::StrategyConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DECLINED: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

pub const MSC12_ENV: &str = "REPAIR_MSC12";

#[derive(Parser, Debug)]
#[command(name = "acr", version, about = "Repair static-analysis alerts in C sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Merge analyzer reports into one normalized alert dump.
    Ingest(IngestArgs),
    /// Repair alerted files, printing a patch or editing in place.
    Repair(RepairArgs),
    /// Compare alerts before and after repair.
    Recurrence(RecurrenceArgs),
    /// Rank guidelines by alert count.
    Freq(FreqArgs),
    /// Count significant lines of code.
    Sigloc(SiglocArgs),
    /// Print the support header.
    Header,
    /// Estimate manual audit effort for a codebase size.
    Effort(EffortArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Report format for inputs without a `FORMAT:` prefix.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Checker mapping table (tab separated); defaults to the built-in one.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Alert reports, optionally prefixed `cppcheck-xml:`, `clang-tidy:` or `generic:`.
    pub inputs: Vec<String>,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Paths in reports are made relative to this directory.
    #[arg(long)]
    pub root: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RepairArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// Statement run when a null check fails, e.g. `goto fail`.
    #[arg(long)]
    pub error_handler: Option<String>,
    #[arg(long, overrides_with = "no_msc12")]
    pub msc12: bool,
    #[arg(long)]
    pub no_msc12: bool,
    #[arg(long, conflicts_with = "check")]
    pub in_place: bool,
    #[arg(long)]
    pub no_backup: bool,
    /// Report outcomes without writing anything.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    /// File of `key = value` lines using the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RecurrenceArgs {
    pub before: String,
    pub after: String,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FreqArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "tool-codebase")]
    pub group: GroupArg,
}

#[derive(Args, Debug)]
pub struct SiglocArgs {
    pub root: PathBuf,
    /// Comma-separated file extensions.
    #[arg(long, default_value = "c,h")]
    pub ext: String,
}

#[derive(Args, Debug)]
pub struct EffortArgs {
    #[arg(long, default_value_t = 0.0)]
    pub ksigloc: f64,
    /// Measure the size from a source tree instead.
    #[arg(long, conflicts_with = "ksigloc")]
    pub root: Option<PathBuf>,
    #[arg(long, default_value_t = 117.0)]
    pub audit_seconds: f64,
    #[arg(long, default_value_t = 0.32)]
    pub fix_fraction: f64,
    #[arg(long, default_value_t = 117.0)]
    pub fix_seconds: f64,
    #[arg(long, default_value_t = 364.5)]
    pub alerts_per_ksigloc: f64,
    #[arg(long, default_value_t = 31_536_000.0)]
    pub person_year_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    CppcheckXml,
    ClangTidy,
    Generic,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::CppcheckXml => Format::CppcheckXml,
            FormatArg::ClangTidy => Format::ClangTidy,
            FormatArg::Generic => Format::Generic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    ToolCodebase,
    Tool,
    Codebase,
    All,
}

impl From<GroupArg> for Grouping {
    fn from(g: GroupArg) -> Grouping {
        match g {
            GroupArg::ToolCodebase => Grouping::ToolCodebase,
            GroupArg::Tool => Grouping::Tool,
            GroupArg::Codebase => Grouping::Codebase,
            GroupArg::All => Grouping::All,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error(transparent)]
    Mapping(#[from] crate::alert::LoadMappingError),
    #[error(transparent)]
    Repair(#[from] repair::RepairError),
    #[error(transparent)]
    Effort(#[from] eval::EffortError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Splits `FORMAT:PATH`; without a prefix the format comes from `default`
/// or a `.xml`/`.log` extension. `None` means guess from the content.
pub fn input_spec(spec: &str, default: Option<Format>) -> (Option<Format>, &str) {
    if let Some((prefix, rest)) = spec.split_once(':') {
        if let Some(f) = Format::parse(prefix) {
            return (Some(f), rest);
        }
    }
    let guessed = default.or_else(|| match Path::new(spec).extension().and_then(|e| e.to_str()) {
        Some("xml") => Some(Format::CppcheckXml),
        Some("log") => Some(Format::ClangTidy),
        _ => None,
    });
    (guessed, spec)
}

/// XML is Cppcheck, `tool|...` records are generic, anything else is read
/// as a clang-tidy log.
pub fn sniff_format(bytes: &[u8]) -> Format {
    let text = String::from_utf8_lossy(&bytes[..bytes.len().min(4096)]);
    let trimmed = text.trim_start();
    if trimmed.starts_with('<') {
        return Format::CppcheckXml;
    }
    let first = trimmed.lines().next().unwrap_or("");
    match first.split_once('|') {
        Some((tool, _)) if tool.parse::<crate::alert::Tool>().is_ok() => Format::Generic,
        _ if first.is_empty() => Format::Generic,
        _ => Format::ClangTidy,
    }
}

/// Reads and maps every input in argument order.
pub fn load_alerts(
    inputs: &[String],
    format: Option<Format>,
    mapping: &CheckerMapping,
    root: Option<&Path>,
    stderr: &mut dyn Write,
) -> Result<Vec<Alert>, CliError> {
    let mut alerts = Vec::new();
    for spec in inputs {
        let (fmt, path) = input_spec(spec, format);
        let bytes = if path == "-" {
            let mut buf = Vec::new();
            std::io::Read::read_to_end(&mut std::io::stdin(), &mut buf)?;
            buf
        } else {
            fs::read(path).map_err(|e| CliError::Input { path: path.to_string(), message: e.to_string() })?
        };
        let fmt = fmt.unwrap_or_else(|| sniff_format(&bytes));
        let report = ingest::parse(fmt, &bytes, root).map_err(|e| CliError::Input { path: path.to_string(), message: e.to_string() })?;
        for (what, note) in &report.parse_notes {
            let _ = writeln!(stderr, "{path}: skipped {what}: {note}");
        }
        alerts.extend(report.alerts.iter().map(|a| map_alert(a, mapping)));
    }
    Ok(alerts)
}

/// `key = value` settings; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<HashMap<String, String>, CliError> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        let known = ["root", "format", "mapping", "error-handler", "msc12", "in-place", "backup", "no-backup", "check", "workers", "inputs"];
        if !known.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key {key}", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn config_bool(cfg: &HashMap<String, String>, key: &str) -> Result<Option<bool>, CliError> {
    cfg.get(key)
        .map(|v| match v.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "on" => Ok(true),
            "0" | "false" | "no" | "off" => Ok(false),
            _ => Err(CliError::Usage(format!("config {key}: not a boolean: {v}"))),
        })
        .transpose()
}

/// Whether the MSC12 environment switch is on.
pub fn env_msc12(value: Option<&str>) -> bool {
    value.is_some_and(|v| !v.is_empty() && v != "0")
}

#[derive(Debug, Clone)]
pub struct ResolvedRepair {
    pub root: PathBuf,
    pub inputs: Vec<String>,
    pub format: Option<Format>,
    pub mapping: Option<PathBuf>,
    pub config: RepairConfig,
}

/// Merges flags, config file and environment. Flags win over the file;
/// the environment switch only applies when neither says anything.
pub fn resolve_repair(args: &RepairArgs, file: &HashMap<String, String>, env: Option<&str>) -> Result<ResolvedRepair, CliError> {
    let root = args.root.clone().or_else(|| file.get("root").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let format = match (args.input.format, file.get("format")) {
        (Some(f), _) => Some(f.into()),
        (None, Some(name)) => Some(Format::parse(name).ok_or_else(|| CliError::Usage(format!("unknown format {name}")))?),
        (None, None) => None,
    };
    let mut inputs = args.input.inputs.clone();
    if inputs.is_empty() {
        if let Some(list) = file.get("inputs") {
            inputs = list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
    }
    let msc12 = if args.no_msc12 {
        false
    } else if args.msc12 {
        true
    } else if let Some(v) = config_bool(file, "msc12")? {
        v
    } else {
        env_msc12(env)
    };
    let check = args.check || config_bool(file, "check")?.unwrap_or(false);
    let in_place = !check && (args.in_place || config_bool(file, "in-place")?.unwrap_or(false));
    let backup = if args.no_backup {
        false
    } else if let Some(v) = config_bool(file, "no-backup")? {
        !v
    } else {
        config_bool(file, "backup")?.unwrap_or(true)
    };
    let workers = match (args.workers, file.get("workers")) {
        (Some(n), _) => n,
        (None, Some(v)) => v.parse().map_err(|_| CliError::Usage(format!("config workers: not a number: {v}")))?,
        (None, None) => 1,
    };
    if workers == 0 {
        return Err(CliError::Usage("workers must be positive".into()));
    }
    let error_handler = args.error_handler.clone().or_else(|| file.get("error-handler").cloned());
    Ok(ResolvedRepair {
        root,
        inputs,
        format,
        mapping: args.input.mapping.clone().or_else(|| file.get("mapping").map(PathBuf::from)),
        config: RepairConfig {
            strategy: StrategyConfig { error_handler },
            msc12_enabled: msc12,
            mode: if check {
                OutputMode::Check
            } else if in_place {
                OutputMode::InPlace
            } else {
                OutputMode::Patch
            },
            backup,
            workers,
        },
    })
}

fn cmd_ingest(args: &IngestArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let mapping = load_mapping(args.input.mapping.as_deref())?;
    let alerts = load_alerts(&args.input.inputs, args.input.format.map(Into::into), &mapping, args.root.as_deref(), stderr)?;
    stdout.write_all(ingest::write_generic(&alerts).as_bytes())?;
    Ok(EXIT_OK)
}

fn cmd_repair(args: &RepairArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let file = match &args.config {
        Some(p) => parse_config(&fs::read_to_string(p).map_err(|e| CliError::Input { path: p.display().to_string(), message: e.to_string() })?)?,
        None => HashMap::new(),
    };
    let env = std::env::var(MSC12_ENV).ok();
    let r = resolve_repair(args, &file, env.as_deref())?;
    if !r.root.is_dir() {
        return Err(repair::RepairError::Root(r.root.clone()).into());
    }
    let mapping = load_mapping(r.mapping.as_deref())?;
    let alerts = load_alerts(&r.inputs, r.format, &mapping, Some(&r.root), stderr)?;
    let run = repair::run_repair(&r.root, &alerts, &r.config)?;
    stdout.write_all(run.patch.as_bytes())?;
    if r.config.mode == OutputMode::Check {
        stdout.write_all(run.report.render_outcomes().as_bytes())?;
    } else {
        for o in run.report.outcomes.iter().filter(|o| o.status.is_decline()) {
            let _ = writeln!(stderr, "{}\t{}", o.alert_key, o.status);
        }
    }
    let _ = write!(stderr, "{}", run.report.render_summary());
    let _ = writeln!(stderr, "Repaired: {}", run.report.count("Repaired"));
    Ok(if run.report.has_declines() { EXIT_DECLINED } else { EXIT_OK })
}

fn cmd_recurrence(args: &RecurrenceArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let mapping = load_mapping(args.mapping.as_deref())?;
    let fmt = args.format.map(Into::into);
    let before = load_alerts(std::slice::from_ref(&args.before), fmt, &mapping, None, stderr)?;
    let after = load_alerts(std::slice::from_ref(&args.after), fmt, &mapping, None, stderr)?;
    let report = eval::diff_alert_sets(&before, &after);
    stdout.write_all(report.to_csv().as_bytes())?;
    let _ = write!(stderr, "{}", report.render_table());
    Ok(EXIT_OK)
}

fn cmd_freq(args: &FreqArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let mapping = load_mapping(args.input.mapping.as_deref())?;
    let alerts = load_alerts(&args.input.inputs, args.input.format.map(Into::into), &mapping, None, stderr)?;
    let report = eval::frequency_report(&alerts, args.group.into());
    stdout.write_all(report.to_csv().as_bytes())?;
    let _ = write!(stderr, "{}", report.render_table());
    Ok(EXIT_OK)
}

fn extensions(list: &str) -> Vec<&str> {
    list.split(',').map(|e| e.trim().trim_start_matches('.')).filter(|e| !e.is_empty()).collect()
}

fn cmd_sigloc(args: &SiglocArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let report = eval::sigloc_report(&args.root, &extensions(&args.ext))?;
    for (path, n) in &report.files {
        writeln!(stdout, "{n}\t{}", path.display())?;
    }
    writeln!(stdout, "{}\ttotal", report.total)?;
    for (path, why) in &report.skipped {
        let _ = writeln!(stderr, "{}: skipped: {why}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_effort(args: &EffortArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let params = EffortParams {
        audit_seconds_per_alert: args.audit_seconds,
        fix_fraction: args.fix_fraction,
        fix_seconds_per_alert: args.fix_seconds,
        alerts_per_ksigloc: args.alerts_per_ksigloc,
        person_year_seconds: args.person_year_seconds,
    };
    let ksigloc = match &args.root {
        Some(root) => eval::sigloc_report(root, eval::DEFAULT_EXTENSIONS)?.ksigloc(),
        None => args.ksigloc,
    };
    let e = eval::estimate_effort(&params, ksigloc)?;
    writeln!(stdout, "ksigloc\t{ksigloc:.3}")?;
    writeln!(stdout, "sec_per_alert\t{:.2}", e.sec_per_alert)?;
    writeln!(stdout, "sec_per_ksigloc\t{:.2}", e.sec_per_ksigloc)?;
    writeln!(stdout, "person_years\t{:.2}", e.person_years)?;
    Ok(EXIT_OK)
}

/// Runs the program; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Ingest(a) => cmd_ingest(a, stdout, stderr),
        Command::Repair(a) => cmd_repair(a, stdout, stderr),
        Command::Recurrence(a) => cmd_recurrence(a, stdout, stderr),
        Command::Freq(a) => cmd_freq(a, stdout, stderr),
        Command::Sigloc(a) => cmd_sigloc(a, stdout, stderr),
        Command::Header => stdout.write_all(repair::emit_support_header().as_bytes()).map(|_| EXIT_OK).map_err(CliError::from),
        Command::Effort(a) => cmd_effort(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "acr: {e}");
            EXIT_FAILURE
        }
    }
}
