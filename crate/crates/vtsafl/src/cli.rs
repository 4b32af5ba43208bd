//! Command-line interface: `simulate`, `bench` and `sizes`.
//!
//! All output is UTF-8 JSON, one object per line. Exit codes: 0 on
//! success, 1 if a simulation round failed, 2 on usage errors.

use std::fs;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::dlog::DlogTable;
use crate::fl_sim::{AggBehavior, ByteCounts, SimConfig, Simulator};
use crate::group::{Group, ModpGroup};
use crate::vtmcfe;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ROUND_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "vtsafl",
    about = "Verifiable threshold functional-encryption aggregation simulator",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a multi-round federated-aggregation simulation.
    Simulate(ConfigArgs),
    /// Time the cryptographic primitives at several client counts.
    Bench(BenchArgs),
    /// Report per-object wire sizes and check independence from n.
    Sizes(ConfigArgs),
}

/// Simulation parameters; any flag overrides the same field of
/// `--config`.
#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    #[arg(long)]
    clients: Option<usize>,
    #[arg(long)]
    aggregators: Option<usize>,
    #[arg(long)]
    threshold: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Model dimension (coordinates per update).
    #[arg(long)]
    dim: Option<usize>,
    /// Fixed-point quantization scale.
    #[arg(long)]
    scale: Option<u64>,
    /// Discrete-log recovery bound (default: clients * scale).
    #[arg(long)]
    bound: Option<u64>,
    /// Adversary assignment `index:behavior`, repeatable. Behaviors:
    /// tamper, random, replay, crash, honest.
    #[arg(long = "malicious", value_name = "IDX:BEHAVIOR")]
    malicious: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with a full simulation config.
    #[arg(long)]
    config: Option<String>,
    /// Write reports to this file instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Client counts to benchmark, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "5,10,50,100")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    threshold: usize,
    #[arg(long, default_value_t = 4)]
    aggregators: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write reports to this file instead of stdout.
    #[arg(long)]
    out: Option<String>,
}

fn parse_malicious(entries: &[String]) -> Result<Vec<(usize, AggBehavior)>> {
    entries
        .iter()
        .map(|e| {
            let (idx, behavior) = e.split_once(':').ok_or_else(|| {
                Error::Parameter(format!("--malicious expects IDX:BEHAVIOR, got '{e}'"))
            })?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parameter(format!("bad aggregator index '{idx}'")))?;
            Ok((idx, behavior.parse()?))
        })
        .collect()
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::Parameter(format!("cannot read config {path}: {e}"))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::Parameter(format!("cannot parse config {path}: {e}"))
                })?
            }
            None => SimConfig {
                clients: 5,
                aggregators: 4,
                threshold: 3,
                rounds: 3,
                dim: 4,
                scale: 100,
                bound: None,
                malicious: vec![],
                seed: 1,
            },
        };
        if let Some(v) = self.clients {
            cfg.clients = v;
        }
        if let Some(v) = self.aggregators {
            cfg.aggregators = v;
        }
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = self.rounds {
            cfg.rounds = v;
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.scale {
            cfg.scale = v;
        }
        if let Some(v) = self.bound {
            cfg.bound = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if !self.malicious.is_empty() {
            cfg.malicious = parse_malicious(&self.malicious)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_out(out: &Option<String>) -> Result<Box<dyn Write>> {
    match out {
        Some(path) => Ok(Box::new(fs::File::create(path).map_err(|e| {
            Error::Parameter(format!("cannot create {path}: {e}"))
        })?)),
        None => Ok(Box::new(std::io::stdout())),
    }
}

fn emit(w: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    writeln!(w, "{value}").map_err(|e| Error::Protocol(format!("write failed: {e}")))
}

fn cmd_simulate(args: &ConfigArgs) -> Result<i32> {
    let cfg = args.resolve()?;
    let mut w = open_out(&args.out)?;
    let mut sim = Simulator::new(ModpGroup::default_group(), cfg.clone())?;
    let (reports, failure) = sim.run_all();
    let mut totals = ByteCounts::default();
    for r in &reports {
        emit(&mut w, &serde_json::to_value(r).unwrap())?;
        totals.ciphertexts += r.bytes.ciphertexts;
        totals.key_shares += r.bytes.key_shares;
        totals.key_commitments += r.bytes.key_commitments;
        totals.partial_decryptions += r.bytes.partial_decryptions;
    }
    let ok = failure.is_none() && reports.len() == cfg.rounds;
    let summary = json!({
        "type": "summary",
        "rounds_completed": reports.len(),
        "rounds_requested": cfg.rounds,
        "success": ok,
        "failure": failure.as_ref().map(|e| e.to_string()),
        "total_bytes": {
            // per phase / role: clients upload ciphertexts, the key
            // authority distributes shares and commitments,
            // aggregators upload partial decryptions.
            "clients_ciphertexts": totals.ciphertexts,
            "authority_key_shares": totals.key_shares,
            "authority_commitments": totals.key_commitments,
            "aggregators_partials": totals.partial_decryptions,
        },
    });
    emit(&mut w, &summary)?;
    Ok(if ok { EXIT_OK } else { EXIT_ROUND_FAILURE })
}

fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let mut w = open_out(&args.out)?;
    let group = ModpGroup::default_group();
    let t = args.threshold;
    let s = args.aggregators;
    for &n in &args.dims {
        let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
        let (pp, msk, eks) = vtmcfe::setup(group.clone(), t, s, n, 1, 1_000, &mut rng)?;
        let y = vec![1i64; n];
        let label = b"bench|0";

        let t0 = Instant::now();
        let (shares, commitments) = vtmcfe::dkeygen(&pp, &msk, &y, 1)?;
        let dkeygen_ms = t0.elapsed().as_secs_f64() * 1e3;

        let t1 = Instant::now();
        let cts: Vec<_> = eks
            .iter()
            .map(|ek| vtmcfe::encrypt(&pp, ek, 1, label))
            .collect::<Result<_>>()?;
        let encrypt_avg_ms = t1.elapsed().as_secs_f64() * 1e3 / n as f64;

        let subset: Vec<usize> = (1..=t).collect();
        let t2 = Instant::now();
        let partials: Vec<_> = subset
            .iter()
            .map(|&j| {
                vtmcfe::share_decrypt(&pp, &cts, &y, &shares[j - 1], &subset, 1, label, &mut rng)
            })
            .collect::<Result<_>>()?;
        let share_decrypt_avg_ms = t2.elapsed().as_secs_f64() * 1e3 / t as f64;

        let t3 = Instant::now();
        let outcome = vtmcfe::verify(&pp, &partials, &commitments, 1, label)?;
        let verify_ms = t3.elapsed().as_secs_f64() * 1e3;
        if outcome.accepted.len() != t {
            return Err(Error::Protocol("bench verification failed".into()));
        }

        let table = DlogTable::new(group.clone(), pp.group.generator(), n as u64);
        let t4 = Instant::now();
        let recovered = vtmcfe::combine_recover(&pp, &partials, label, &table)?;
        let combine_ms = t4.elapsed().as_secs_f64() * 1e3;
        if recovered != n as i64 {
            return Err(Error::Protocol(format!(
                "bench recovery mismatch: {recovered} != {n}"
            )));
        }

        emit(
            &mut w,
            &json!({
                "type": "bench",
                "clients": n,
                "threshold": t,
                "aggregators": s,
                "dkeygen_ms": dkeygen_ms,
                "encrypt_avg_ms": encrypt_avg_ms,
                "share_decrypt_avg_ms": share_decrypt_avg_ms,
                "verify_ms": verify_ms,
                "combine_ms": combine_ms,
            }),
        )?;
    }
    Ok(EXIT_OK)
}

/// Measured wire sizes for one client count.
fn measure_sizes(group: &ModpGroup, cfg: &SimConfig, n: usize) -> Result<(usize, usize, usize, usize)> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let (pp, msk, eks) =
        vtmcfe::setup(group.clone(), cfg.threshold, cfg.aggregators, n, 1, cfg.scale, &mut rng)?;
    let y = vec![1i64; n];
    let label = b"sizes|0";
    let (shares, commitments) = vtmcfe::dkeygen(&pp, &msk, &y, 1)?;
    let cts: Vec<_> = eks
        .iter()
        .map(|ek| vtmcfe::encrypt(&pp, ek, 1, label))
        .collect::<Result<_>>()?;
    let subset: Vec<usize> = (1..=cfg.threshold).collect();
    let pd = vtmcfe::share_decrypt(&pp, &cts, &y, &shares[0], &subset, 1, label, &mut rng)?;
    Ok((
        shares[0].wire_bytes(&pp.group)?.len(),
        commitments.wire_bytes(&pp.group).len(),
        cts[0].wire_bytes(&pp.group).len(),
        pd.wire_bytes(&pp.group)?.len(),
    ))
}

fn cmd_sizes(args: &ConfigArgs) -> Result<i32> {
    let cfg = args.resolve()?;
    let mut w = open_out(&args.out)?;
    let group = ModpGroup::default_group();
    let small = measure_sizes(&group, &cfg, cfg.clients)?;
    let large = measure_sizes(&group, &cfg, cfg.clients + 95)?;
    if small != large {
        return Err(Error::Protocol(format!(
            "wire sizes vary with n: {small:?} vs {large:?}"
        )));
    }
    let (share, commitments, ct, pd) = small;
    let ge = group.element_len();
    let zp = group.scalar_len();
    for (object, bytes, symbolic) in [
        ("key-share", share, "1|Zp|".to_string()),
        ("round-key-commitments", commitments, "2|G|".to_string()),
        ("ciphertext-per-coordinate", ct, "1|G|".to_string()),
        ("partial-decryption", pd, "6|G| + 2|Zp|".to_string()),
    ] {
        emit(
            &mut w,
            &json!({
                "type": "size",
                "object": object,
                "bytes": bytes,
                "symbolic": symbolic,
                "group_element_bytes": ge,
                "scalar_bytes": zp,
            }),
        )?;
    }
    emit(
        &mut w,
        &json!({
            "type": "summary",
            "check": "independence-from-clients",
            "clients_compared": [cfg.clients, cfg.clients + 95],
            "ok": true,
        }),
    )?;
    Ok(EXIT_OK)
}

/// Parses `args` and runs the selected command, returning the process
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap uses exit code 2 for usage errors and 0 for
            // --help/--version.
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Sizes(a) => cmd_sizes(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parameter(_) | Error::Threshold { .. } => EXIT_USAGE,
                _ => EXIT_ROUND_FAILURE,
            }
        }
    }
}
