mod config;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use activity_editor::agent::{
    generate_population, synthesize_sft_example, AgentError, ChatTransport, GenerationOptions, HttpTransport,
    LabelSource, RoundRecord, RuleTransport,
};
use activity_editor::constraints::{audit, has_hard_violations, AuditConfig, CommonsenseRules, DurationBounds, Violation};
use activity_editor::editor::{diff, repair};
use activity_editor::io::{
    load_population, load_profiles, load_schedules, population_document, to_metric_population, PopulationEntry,
    ProfileRecord,
};
use activity_editor::metrics::evaluate;
use activity_editor::profile::UserProfile;
use activity_editor::reward::{group_advantages, total_reward};
use activity_editor::schedule::DaySchedule;

use config::{ConfigFile, Overrides, RunConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_ENDPOINT: u8 = 5;

#[derive(Parser)]
#[command(name = "activity-editor", version, about = "Generate, audit, repair and score daily activity schedules")]
struct Cli {
    /// TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress to stderr
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draft and edit one schedule per profile through the chat endpoint
    Generate {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-round log (JSON lines); defaults to <out>.provenance.jsonl
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Audit schedules; exits 4 if any has a hard violation
    Validate {
        #[arg(long)]
        schedules: PathBuf,
        /// Profiles for the commonsense checks, joined by user_id
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministically repair every schedule
    Repair {
        #[arg(long)]
        schedules: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Edit script turning one schedule into another
    Diff {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score roll-out lines and attach group advantages
    ScoreRollouts {
        /// Input JSON lines; stdin when absent
        #[arg(long)]
        input: Option<PathBuf>,
        /// Reference population used when a line has no ground_truth_schedule
        #[arg(long)]
        refs: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build supervised training records from teacher traces
    MakeSftData {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long)]
        drafts: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail on endpoint errors instead of rebuilding labels from the diff
        #[arg(long)]
        no_fallback: bool,
    },
    /// Compare a generated population with a reference one
    Evaluate {
        #[arg(long)]
        gen: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Machine-readable report path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write random profiles for trying the pipeline out
    SampleProfiles {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// An error with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Classify<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail<T>(code: u8, error: anyhow::Error) -> Result<T, Failure> {
    Err(Failure { code, error })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(if cli.verbose { "info" } else { "warn" }));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p).code(EXIT_USAGE)?,
        None => ConfigFile::default(),
    };
    let cfg = RunConfig::resolve(&cli.overrides, &|k| std::env::var(k).ok(), file).code(EXIT_USAGE)?;
    match cli.command {
        Command::Generate { profiles, out, provenance } => generate(&cfg, &profiles, &out, provenance),
        Command::Validate { schedules, profiles, out } => validate(&cfg, &schedules, profiles.as_deref(), out),
        Command::Repair { schedules, out } => repair_cmd(&schedules, &out),
        Command::Diff { from, to, out } => diff_cmd(&from, &to, out),
        Command::ScoreRollouts { input, refs, out } => score_rollouts(&cfg, input, refs.as_deref(), out),
        Command::MakeSftData { profiles, drafts, truth, out, no_fallback } => {
            make_sft(&cfg, &profiles, &drafts, &truth, &out, !no_fallback)
        }
        Command::Evaluate { gen, reference, out } => evaluate_cmd(&gen, &reference, out),
        Command::SampleProfiles { count, out } => sample_profiles(&cfg, count, &out),
    }
}

fn audit_config(cfg: &RunConfig) -> Result<AuditConfig, Failure> {
    let mut audit = AuditConfig::default();
    if let Some(p) = &cfg.bounds {
        let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display())).code(EXIT_IO)?;
        audit.bounds = DurationBounds::from_json(&text).with_context(|| p.display().to_string()).code(EXIT_USAGE)?;
    }
    if let Some(p) = &cfg.rules {
        let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display())).code(EXIT_IO)?;
        audit.rules = CommonsenseRules::from_json(&text).with_context(|| p.display().to_string()).code(EXIT_USAGE)?;
    }
    Ok(audit)
}

fn transport(cfg: &RunConfig) -> Result<Box<dyn ChatTransport>, Failure> {
    match &cfg.mock {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display())).code(EXIT_IO)?;
            let mock = RuleTransport::from_json(&text).with_context(|| p.display().to_string()).code(EXIT_USAGE)?;
            Ok(Box::new(mock))
        }
        None => Ok(Box::new(HttpTransport)),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())).code(EXIT_IO),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).code(EXIT_IO)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
        .code(EXIT_IO)
}

fn agent_failure(user_id: &str, e: AgentError) -> Failure {
    let code = match e {
        AgentError::Endpoint(_) => EXIT_ENDPOINT,
        AgentError::InvalidInput(_) => EXIT_INVALID,
    };
    Failure { code, error: anyhow!(e).context(format!("user {user_id:?}")) }
}

#[derive(Serialize)]
struct ProvenanceLine<'a> {
    user_id: &'a str,
    #[serde(flatten)]
    record: &'a RoundRecord,
}

fn generate(cfg: &RunConfig, profiles: &Path, out: &Path, provenance: Option<PathBuf>) -> Result<u8, Failure> {
    let records = load_profiles(profiles).code(EXIT_IO)?;
    let options = GenerationOptions {
        audit: audit_config(cfg)?,
        max_rounds: cfg.max_rounds,
        concurrency: cfg.concurrency,
        ..GenerationOptions::default()
    };
    let transport = transport(cfg)?;
    let plain: Vec<UserProfile> = records.iter().map(|r| r.profile.clone()).collect();
    let results = generate_population(transport.as_ref(), &cfg.endpoint, &plain, &options);

    let provenance = provenance.unwrap_or_else(|| {
        let mut name = out.as_os_str().to_owned();
        name.push(".provenance.jsonl");
        PathBuf::from(name)
    });
    let mut log = create(&provenance)?;
    let mut entries = Vec::with_capacity(records.len());
    let mut fallbacks = 0;
    for (rec, result) in records.iter().zip(results) {
        let t = result.map_err(|e| agent_failure(&rec.user_id, e))?;
        for round in &t.log {
            let line = ProvenanceLine { user_id: &rec.user_id, record: round };
            writeln!(log, "{}", serde_json::to_string(&line).expect("log serializes")).code(EXIT_IO)?;
        }
        fallbacks += usize::from(t.fallback_used);
        entries.push(PopulationEntry { user_id: rec.user_id.clone(), schedule: t.schedule });
    }
    log.flush().code(EXIT_IO)?;
    write_output(Some(out), &population_document(&entries))?;
    tracing::info!(users = entries.len(), fallbacks, "generation finished");
    Ok(0)
}

fn profile_index(path: Option<&Path>) -> Result<HashMap<String, UserProfile>, Failure> {
    let Some(path) = path else {
        return Ok(HashMap::new());
    };
    Ok(load_profiles(path)
        .code(EXIT_IO)?
        .into_iter()
        .map(|r| (r.user_id, r.profile))
        .collect())
}

#[derive(Serialize)]
struct AuditLine {
    user_id: String,
    hard_valid: bool,
    violations: Vec<Violation>,
}

fn validate(cfg: &RunConfig, schedules: &Path, profiles: Option<&Path>, out: Option<PathBuf>) -> Result<u8, Failure> {
    let entries = load_schedules(schedules).code(EXIT_IO)?;
    let profiles = profile_index(profiles)?;
    let config = audit_config(cfg)?;
    let default_profile = UserProfile::default();
    let mut report = Vec::with_capacity(entries.len());
    for e in entries {
        let profile = profiles.get(&e.user_id).unwrap_or(&default_profile);
        let violations = audit(profile, &e.schedule, &config)
            .with_context(|| format!("user {:?}", e.user_id))
            .code(EXIT_INVALID)?;
        report.push(AuditLine {
            hard_valid: !has_hard_violations(&violations),
            user_id: e.user_id,
            violations,
        });
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_output(out.as_deref(), &text)?;
    Ok(if report.iter().all(|r| r.hard_valid) { 0 } else { EXIT_INVALID })
}

fn repair_cmd(schedules: &Path, out: &Path) -> Result<u8, Failure> {
    let entries = load_schedules(schedules).code(EXIT_IO)?;
    let mut repaired = Vec::with_capacity(entries.len());
    for e in entries {
        let schedule = repair(&e.schedule)
            .with_context(|| format!("user {:?}", e.user_id))
            .code(EXIT_INVALID)?;
        repaired.push(PopulationEntry { user_id: e.user_id, schedule });
    }
    write_output(Some(out), &population_document(&repaired))?;
    Ok(0)
}

fn single_schedule(path: &Path) -> Result<DaySchedule, Failure> {
    let mut entries = load_schedules(path).code(EXIT_IO)?;
    if entries.len() != 1 {
        return fail(
            EXIT_USAGE,
            anyhow!("{} holds {} schedules; diff takes exactly one", path.display(), entries.len()),
        );
    }
    Ok(entries.remove(0).schedule)
}

fn diff_cmd(from: &Path, to: &Path, out: Option<PathBuf>) -> Result<u8, Failure> {
    let source = single_schedule(from)?;
    let target = single_schedule(to)?;
    let mut text = diff(&source, &target).to_document();
    text.push('\n');
    write_output(out.as_deref(), &text)?;
    Ok(0)
}

#[derive(Deserialize)]
struct RolloutLine {
    prompt_id: Value,
    rollout_text: String,
    #[serde(default)]
    ground_truth_schedule: Option<DaySchedule>,
}

#[derive(Serialize)]
struct ScoreLine {
    prompt_id: Value,
    r_fmt: f64,
    r_con: f64,
    r_sim: f64,
    total: f64,
    advantage: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

fn id_text(id: &Value) -> String {
    match id {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flush_group(group: &mut Vec<ScoreLine>, out: &mut dyn Write) -> Result<(), Failure> {
    if group.len() >= 2 {
        let totals: Vec<f64> = group.iter().map(|s| s.total).collect();
        let adv = group_advantages(&totals).expect("group has two roll-outs");
        for (s, a) in group.iter_mut().zip(adv) {
            s.advantage = Some(a);
        }
    }
    for s in group.drain(..) {
        writeln!(out, "{}", serde_json::to_string(&s).expect("score serializes")).code(EXIT_IO)?;
    }
    out.flush().code(EXIT_IO)
}

fn score_rollouts(cfg: &RunConfig, input: Option<PathBuf>, refs: Option<&Path>, out: Option<PathBuf>) -> Result<u8, Failure> {
    let bounds = audit_config(cfg)?.bounds;
    let refs: HashMap<String, DaySchedule> = match refs {
        Some(p) => load_population(p)
            .code(EXIT_IO)?
            .into_iter()
            .map(|e| (e.user_id, e.schedule))
            .collect(),
        None => HashMap::new(),
    };
    let reader: Box<dyn BufRead> = match &input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).with_context(|| format!("cannot open {}", p.display())).code(EXIT_IO)?,
        )),
        None => Box::new(std::io::stdin().lock()),
    };
    let mut writer: Box<dyn Write> = match &out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };

    let mut group: Vec<ScoreLine> = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.code(EXIT_IO)?;
        if line.trim().is_empty() {
            continue;
        }
        let row: RolloutLine = serde_json::from_str(&line)
            .with_context(|| format!("input line {}", n + 1))
            .code(EXIT_IO)?;
        let gt = match row.ground_truth_schedule {
            Some(s) => s,
            None => match refs.get(&id_text(&row.prompt_id)) {
                Some(s) => s.clone(),
                None => {
                    return fail(
                        EXIT_IO,
                        anyhow!("input line {}: no ground truth for prompt {}", n + 1, row.prompt_id),
                    )
                }
            },
        };
        if group.last().is_some_and(|s| s.prompt_id != row.prompt_id) {
            flush_group(&mut group, writer.as_mut())?;
        }
        let r = total_reward(&row.rollout_text, &gt, &bounds);
        group.push(ScoreLine {
            prompt_id: row.prompt_id,
            r_fmt: r.r_fmt,
            r_con: r.r_con,
            r_sim: r.r_sim,
            total: r.total,
            advantage: None,
            notes: r.notes,
        });
    }
    flush_group(&mut group, writer.as_mut())?;
    Ok(0)
}

fn by_user(entries: Vec<PopulationEntry>) -> HashMap<String, DaySchedule> {
    entries.into_iter().map(|e| (e.user_id, e.schedule)).collect()
}

fn make_sft(
    cfg: &RunConfig,
    profiles: &Path,
    drafts: &Path,
    truth: &Path,
    out: &Path,
    fallback: bool,
) -> Result<u8, Failure> {
    let records: Vec<ProfileRecord> = load_profiles(profiles).code(EXIT_IO)?;
    let drafts = by_user(load_schedules(drafts).code(EXIT_IO)?);
    let truth = by_user(load_population(truth).code(EXIT_IO)?);
    let config = audit_config(cfg)?;
    let transport = transport(cfg)?;
    let mut writer = create(out)?;
    let (mut kept, mut rebuilt) = (0usize, 0usize);
    for rec in &records {
        let (Some(draft), Some(gt)) = (drafts.get(&rec.user_id), truth.get(&rec.user_id)) else {
            tracing::warn!(user_id = %rec.user_id, "no draft or ground truth, skipped");
            continue;
        };
        let ex = synthesize_sft_example(transport.as_ref(), &cfg.endpoint, &rec.profile, draft, gt, &config, fallback)
            .map_err(|e| agent_failure(&rec.user_id, e))?;
        match ex.source {
            LabelSource::Teacher => kept += 1,
            LabelSource::Rebuilt => rebuilt += 1,
        }
        writeln!(writer, "{}", ex.record.to_line()).code(EXIT_IO)?;
    }
    writer.flush().code(EXIT_IO)?;
    tracing::info!(kept, rebuilt, "training records written");
    Ok(0)
}

fn evaluate_cmd(gen: &Path, reference: &Path, out: Option<PathBuf>) -> Result<u8, Failure> {
    let g = to_metric_population(&load_population(gen).code(EXIT_IO)?).code(EXIT_INVALID)?;
    let r = to_metric_population(&load_population(reference).code(EXIT_IO)?).code(EXIT_INVALID)?;
    let report = evaluate(&g, &r).code(EXIT_INVALID)?;
    print!("{}", report.to_table());
    if let Some(p) = out {
        write_output(Some(&p), &(report.to_document() + "\n"))?;
    }
    Ok(0)
}

const AGE_RANGES: &[&str] = &["18-24", "25-34", "35-44", "45-54", "55-64", "65+"];
const GENDERS: &[&str] = &["Female", "Male"];
const EDUCATION: &[&str] = &["High school graduate", "Some college", "Bachelor's degree", "Graduate degree"];
const EMPLOYMENT: &[(&str, &str)] = &[
    ("Employed full-time", "Working"),
    ("Employed part-time", "Working"),
    ("Not employed", "Retired"),
    ("Not employed", "Attending school"),
    ("Not employed", "Looking for work"),
];
const OCCUPATIONS: &[&str] = &[
    "Professional, managerial, or technical",
    "Sales or service",
    "Clerical or administrative",
    "Manufacturing, construction, maintenance, or farming",
];
const STATES: &[&str] = &["CA", "TX", "NY", "FL", "WA", "IL"];

fn sample_profiles(cfg: &RunConfig, count: usize, out: &Path) -> Result<u8, Failure> {
    use rand::rngs::StdRng;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let pick = |rng: &mut StdRng, xs: &[&str]| xs.choose(rng).expect("non-empty").to_string();
        let (employment, primary) = *EMPLOYMENT.choose(&mut rng).expect("non-empty");
        let working = primary == "Working";
        let mut p = UserProfile {
            age_range: pick(&mut rng, AGE_RANGES),
            gender: pick(&mut rng, GENDERS),
            education: pick(&mut rng, EDUCATION),
            employment_status: employment.into(),
            primary_activity: primary.into(),
            driver_on_travel_day: pick(&mut rng, &["Yes", "No"]),
            ..UserProfile::default()
        };
        if working {
            p.work_schedule = pick(&mut rng, &["Regular daytime", "Flexible", "Shift work"]);
            p.occupation = pick(&mut rng, OCCUPATIONS);
            p.work_from_home = pick(&mut rng, &["Yes", "No"]);
            p.distance_to_work_miles = Some((rng.gen_range(0.5..40.0_f64) * 100.0).round() / 100.0);
            p.work_state = pick(&mut rng, STATES);
        }
        let mut value = serde_json::to_value(&p).expect("profile serializes");
        value["user_id"] = Value::String(format!("u{i:04}"));
        rows.push(value);
    }
    let mut text = serde_json::to_string_pretty(&rows).expect("profiles serialize");
    text.push('\n');
    write_output(Some(out), &text)?;
    Ok(0)
}
