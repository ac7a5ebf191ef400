//! Command-line front end: run protocols, verify the tables, analyze
//! leakage, run attack experiments, and query the swapping oracle.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors, 2 when a
//! run aborted at an eavesdropping check.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    bellpair_detection_rate, candidate_sets, decoy_detection_rate, execution_count, leaked_bits,
    mutual_information_bits, observer_view, run_abort_frequency, tp_bell_attack_experiment,
    AttackExperimentConfig, ObserverRole,
};
use crate::bell::BellLabel;
use crate::classical::SecretInput;
use crate::params::{AttackSpec, ChannelAttackKind, ChannelId, ProtocolParams, Variant};
use crate::protocol::{run_protocol, RunReport};
use crate::statevector::oracle_swap_distribution;
use crate::transcript::Transcript;
use crate::verification::verification_checks;

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_ABORTED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "qpc",
    about = "Quantum private comparison protocols on swapped Bell pairs: \
             simulation, verification and attack experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a protocol run (or a batch of trials) and report verdicts.
    Run(RunArgs),
    /// Rebuild the relation tables and oracle equivalences; nonzero exit on
    /// any mismatch.
    Verify,
    /// Emit the leakage report, optionally with an observer view of a
    /// recorded transcript.
    Leakage(LeakageArgs),
    /// Run an attack experiment and print its report.
    Attack(AttackArgs),
    /// Print the swapping oracle's outcome distribution for two Bell states.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Protocol variant: lwc2, llcll2, hash2, three or multi.
    #[arg(long)]
    protocol: String,
    /// Number of comparing users (defaults to the variant's fixed count).
    #[arg(long)]
    k: Option<u8>,
    /// JSON file with {"inputs": ["<hex>", ...], "bit_length": L}.
    #[arg(long)]
    inputs: PathBuf,
    /// Digest length in bits for hash variants.
    #[arg(long, default_value_t = 128)]
    hash_bits: usize,
    /// Decoy photons / check pairs per protected transmission
    /// (defaults to the number of data pairs).
    #[arg(long)]
    check_count: Option<usize>,
    /// Drop the decoy checks of the two-party hash variant.
    #[arg(long)]
    no_decoys: bool,
    /// Attack: none, intercept-resend, measure-resend, passive or tp-bell.
    #[arg(long, default_value = "none")]
    attack: String,
    /// Directed channel the attacker sits on, e.g. P1-TP.
    #[arg(long)]
    attack_channel: Option<String>,
    /// Run seed; drawn from the OS and recorded in outputs when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of independent trials (per-trial seeds derived from --seed).
    #[arg(long, default_value_t = 1)]
    trials: u32,
    /// Write the transcript (line-delimited JSON) here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Write the run report (JSON) here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct LeakageArgs {
    /// Analyze a recorded transcript from this file.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Observer role for the transcript analysis: outside, tp, or p<N>.
    #[arg(long, default_value = "tp")]
    role: String,
    /// Users for the execution-count comparison.
    #[arg(long, default_value_t = 2)]
    k: u8,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Experiment: tp-bell, detection or abort-frequency.
    #[arg(long)]
    experiment: String,
    /// Protocol variant (tp-bell: lwc2 or hash2; abort-frequency: any
    /// checked variant).
    #[arg(long, default_value = "lwc2")]
    variant: String,
    /// Trials for tp-bell / abort-frequency.
    #[arg(long, default_value_t = 100)]
    trials: u32,
    /// Photons (or check pairs) for detection statistics.
    #[arg(long, default_value_t = 10_000)]
    photons: usize,
    /// Check scheme for detection statistics: decoy or bellpair.
    #[arg(long, default_value = "decoy")]
    scheme: String,
    /// Check photons per transmission for abort-frequency.
    #[arg(long, default_value_t = 20)]
    check_count: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// First source pair: phi+, phi-, psi+ or psi-.
    #[arg(long)]
    a: String,
    /// Second source pair.
    #[arg(long)]
    b: String,
}

/// Shape of the --inputs file.
#[derive(Debug, Deserialize)]
struct InputsFile {
    inputs: Vec<String>,
    bit_length: usize,
}

/// Entry point used by the `qpc` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify => cmd_verify(),
        Command::Leakage(args) => cmd_leakage(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn seed_or_os(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

/// Hash key from QPC_HASH_KEY (hex), or the demonstration default.
fn hash_key_from_env() -> Result<Vec<u8>, String> {
    match std::env::var("QPC_HASH_KEY") {
        Ok(hex_key) => {
            let key = hex::decode(hex_key.trim())
                .map_err(|e| format!("QPC_HASH_KEY is not valid hex: {e}"))?;
            if key.is_empty() {
                return Err("QPC_HASH_KEY must be nonempty".into());
            }
            Ok(key)
        }
        Err(_) => Ok(b"qpc-shared-key".to_vec()),
    }
}

fn parse_attack(attack: &str, channel: Option<&str>) -> Result<Option<AttackSpec>, String> {
    let channel_spec = |kind: ChannelAttackKind| -> Result<Option<AttackSpec>, String> {
        let name = channel.ok_or("--attack-channel is required for channel attacks")?;
        let channel = ChannelId::parse(name)
            .ok_or_else(|| format!("--attack-channel {name:?} is not of the form P1-TP"))?;
        Ok(Some(AttackSpec::Channel {
            attack: kind,
            channel,
        }))
    };
    match attack {
        "none" => Ok(None),
        "intercept-resend" => channel_spec(ChannelAttackKind::InterceptResend),
        "measure-resend" => channel_spec(ChannelAttackKind::MeasureResend),
        "passive" => Ok(Some(AttackSpec::PassiveClassical)),
        "tp-bell" => Ok(Some(AttackSpec::TpBellMeasurement)),
        other => Err(format!(
            "--attack {other:?} is not one of none, intercept-resend, measure-resend, \
             passive, tp-bell"
        )),
    }
}

fn write_or_print(path: Option<&PathBuf>, contents: &str) -> Result<(), String> {
    match path {
        Some(path) => {
            fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<u8, String> {
    let variant = Variant::parse(&args.protocol)
        .ok_or_else(|| format!("--protocol {:?} is not a known variant", args.protocol))?;
    let k = args.k.unwrap_or(match variant {
        Variant::Lwc2 | Variant::Llcll2 | Variant::Hash2 => 2,
        Variant::Three => 3,
        Variant::Multi => 0,
    });
    if k == 0 {
        return Err("--k is required for --protocol multi".into());
    }
    let text = fs::read_to_string(&args.inputs)
        .map_err(|e| format!("cannot read {}: {e}", args.inputs.display()))?;
    let file: InputsFile =
        serde_json::from_str(&text).map_err(|e| format!("inputs file rejected: {e}"))?;
    let inputs: Vec<SecretInput> = file
        .inputs
        .iter()
        .map(|h| SecretInput::from_hex(h, file.bit_length).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;

    let seed = seed_or_os(args.seed);
    let mut params = ProtocolParams::new(variant, k, file.bit_length, seed);
    params.hash_bits = args.hash_bits;
    params.hash_key = hash_key_from_env()?;
    params.decoys_enabled = !args.no_decoys;
    params.attack = parse_attack(&args.attack, args.attack_channel.as_deref())?;
    // The default check count tracks the final group count, which depends
    // on --hash-bits set above.
    params.check_count = args.check_count.unwrap_or_else(|| params.group_count());
    params.validate().map_err(|e| e.to_string())?;

    if args.trials > 1 {
        return run_trials(&params, &inputs, args.trials);
    }

    let outcome = run_protocol(&params, &inputs).map_err(|e| e.to_string())?;
    if let Some(path) = &args.transcript {
        fs::write(path, outcome.transcript.to_jsonl())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let report = RunReport::from_results(&outcome.results, &outcome.transcript.header);
    let report_json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    if let Some(path) = &args.report {
        fs::write(path, &report_json)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }

    println!(
        "variant {} with {} users, seed {}",
        report.variant, report.k, report.seed
    );
    match &report.aborted {
        Some(info) => {
            println!(
                "ABORTED by {} check on {} (error rate {:.4})",
                match info.scheme {
                    crate::transcript::CheckScheme::Decoy => "decoy",
                    crate::transcript::CheckScheme::BellPair => "Bell-pair",
                },
                info.covers
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
                info.error_rate
            );
            Ok(EXIT_ABORTED)
        }
        None => {
            for row in &report.verdict_matrix {
                println!("{}", row.join("\t"));
            }
            for pair in &report.pairs {
                println!(
                    "P{} vs P{}: total {} -> {}",
                    pair.m,
                    pair.k,
                    pair.total,
                    if pair.equal { "equal" } else { "unequal" }
                );
            }
            Ok(EXIT_OK)
        }
    }
}

/// Batch summary for `run --trials T`.
#[derive(Debug, Serialize)]
struct TrialsSummary {
    variant: Variant,
    k: u8,
    base_seed: u64,
    trials: u32,
    aborted: u32,
    /// Per pair (m, k): trials in which the verdict was "equal".
    equal_counts: Vec<(u8, u8, u32)>,
}

/// Fan trials across worker threads with per-trial derived seeds;
/// aggregation is order-independent.
fn run_trials(params: &ProtocolParams, inputs: &[SecretInput], trials: u32) -> Result<u8, String> {
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(trials as usize)
        .max(1);
    let results: Vec<Result<(u32, crate::protocol::PairwiseResults), String>> =
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let params = params.clone();
                let inputs = inputs.to_vec();
                handles.push(scope.spawn(move || {
                    let mut out = Vec::new();
                    let mut t = w as u32;
                    while t < trials {
                        let mut trial_params = params.clone();
                        let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
                        rng.set_stream(t as u64 + 1);
                        trial_params.seed = rng.random();
                        let run = run_protocol(&trial_params, &inputs)
                            .map_err(|e| e.to_string())
                            .map(|o| (t, o.results));
                        out.push(run);
                        t += workers as u32;
                    }
                    out
                }));
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        });

    let mut aborted = 0;
    let mut equal_counts: std::collections::BTreeMap<(u8, u8), u32> = Default::default();
    for result in results {
        let (_, r) = result?;
        if r.aborted.is_some() {
            aborted += 1;
        }
        for pair in &r.pairs {
            if pair.equal {
                *equal_counts.entry((pair.m, pair.k)).or_default() += 1;
            }
        }
    }
    let summary = TrialsSummary {
        variant: params.variant,
        k: params.k,
        base_seed: params.seed,
        trials,
        aborted,
        equal_counts: equal_counts
            .into_iter()
            .map(|((m, k), c)| (m, k, c))
            .collect(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?
    );
    Ok(EXIT_OK)
}

fn cmd_verify() -> Result<u8, String> {
    let checks = verification_checks();
    let mut all_pass = true;
    for check in &checks {
        let status = if check.pass { "PASS" } else { "FAIL" };
        println!("{status}  {}: {}", check.name, check.detail);
        all_pass &= check.pass;
    }
    Ok(if all_pass { EXIT_OK } else { EXIT_CONFIG })
}

fn cmd_leakage(args: LeakageArgs) -> Result<u8, String> {
    let sets: Vec<serde_json::Value> = (0u8..=2)
        .map(|score| {
            let pairs = candidate_sets(score).map_err(|e| e.to_string())?;
            Ok(json!({
                "score": score,
                "pairs": pairs
                    .iter()
                    .map(|(a, b)| json!([a.to_string(), b.to_string()]))
                    .collect::<Vec<_>>(),
                "leaked_bits": leaked_bits(score).ok(),
            }))
        })
        .collect::<Result<_, String>>()?;
    let (pair_min, pair_max, ours) = execution_count(args.k).map_err(|e| e.to_string())?;
    let mut report = json!({
        "schema_version": 1,
        "candidate_sets": sets,
        "leaked_bits": {
            "score_1": leaked_bits(1).map_err(|e| e.to_string())?,
            "score_2": leaked_bits(2).map_err(|e| e.to_string())?,
        },
        "mutual_information_bits": mutual_information_bits(),
        "execution_count": {
            "k": args.k,
            "pairwise_min": pair_min,
            "pairwise_max": pair_max,
            "this_protocol": ours,
        },
    });
    if let Some(path) = &args.transcript {
        let text =
            fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let transcript = Transcript::from_jsonl(&text).map_err(|e| e.to_string())?;
        let role = ObserverRole::parse(&args.role)
            .ok_or_else(|| format!("--role {:?} is not outside, tp or p<N>", args.role))?;
        let view = observer_view(&transcript, role).map_err(|e| e.to_string())?;
        report["observer_view"] = serde_json::to_value(&view).map_err(|e| e.to_string())?;
    }
    write_or_print(
        args.output.as_ref(),
        &serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?,
    )?;
    Ok(EXIT_OK)
}

fn cmd_attack(args: AttackArgs) -> Result<u8, String> {
    let seed = seed_or_os(args.seed);
    let report = match args.experiment.as_str() {
        "tp-bell" => {
            let variant = Variant::parse(&args.variant)
                .ok_or_else(|| format!("--variant {:?} unknown", args.variant))?;
            let config = AttackExperimentConfig::new(variant, args.trials, seed);
            let report = tp_bell_attack_experiment(&config).map_err(|e| e.to_string())?;
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
        }
        "detection" => {
            let report = match args.scheme.as_str() {
                "decoy" => decoy_detection_rate(args.photons, seed),
                "bellpair" => bellpair_detection_rate(args.photons, seed),
                other => return Err(format!("--scheme {other:?} is not decoy or bellpair")),
            };
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
        }
        "abort-frequency" => {
            let variant = Variant::parse(&args.variant)
                .ok_or_else(|| format!("--variant {:?} unknown", args.variant))?;
            let report = run_abort_frequency(variant, args.check_count, args.trials, seed)
                .map_err(|e| e.to_string())?;
            serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
        }
        other => {
            return Err(format!(
                "--experiment {other:?} is not tp-bell, detection or abort-frequency"
            ))
        }
    };
    write_or_print(args.output.as_ref(), &report)?;
    Ok(EXIT_OK)
}

fn cmd_oracle(args: OracleArgs) -> Result<u8, String> {
    let a = BellLabel::parse(&args.a)
        .ok_or_else(|| format!("--a {:?} is not phi+, phi-, psi+ or psi-", args.a))?;
    let b = BellLabel::parse(&args.b)
        .ok_or_else(|| format!("--b {:?} is not phi+, phi-, psi+ or psi-", args.b))?;
    let dist = oracle_swap_distribution(crate::bell::code_of(a), crate::bell::code_of(b))
        .map_err(|e| e.to_string())?;
    let entries: Vec<serde_json::Value> = dist
        .iter()
        .map(|o| {
            json!({
                "measured": o.measured.label().to_string(),
                "measured_code": o.measured.to_string(),
                "residual": o.residual.label().to_string(),
                "residual_code": o.residual.to_string(),
                "probability": o.probability,
            })
        })
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "a": a.to_string(),
            "b": b.to_string(),
            "outcomes": entries,
        }))
        .map_err(|e| e.to_string())?
    );
    Ok(EXIT_OK)
}
