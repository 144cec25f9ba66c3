use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use sqiasign_core::adaptor::{adapt, extract, preverify_report, presign, PreSignature};
use sqiasign_core::codec::{curve_from_json, curve_to_json, params_from_json, params_to_json, parse, parse_hex_bytes, to_string, Codec};
use sqiasign_core::curve::Curve;
use sqiasign_core::exec::Execution;
use sqiasign_core::params::{generate_params, validate_params, ParamSet, ProfileSpec};
use sqiasign_core::relation::{gen_r, verify_relation, Statement, Witness};
use sqiasign_core::sig::{keygen, sign, verify_report, KeyPair, Mode, PlainSignature};
use sqiasign_core::size::{size_report, DEFAULT_L};
use sqiasign_core::swap::demo_swap;

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ProfileArg {
    #[value(name = "T0")]
    T0,
    #[value(name = "T1")]
    T1,
    #[value(name = "custom")]
    Custom,
}

#[derive(Parser, Debug)]
#[command(name = "sqiasign", version, about = "Toy isogeny adaptor signatures")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "T0")]
    profile: ProfileArg,
    /// Seed for all protocol randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Enable recovery-based representation checks.
    #[arg(long, global = true)]
    strict: bool,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Parameter file; otherwise parameters are generated from the profile.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Seed for parameter generation when no parameter file is given.
    #[arg(long, global = true, default_value_t = 0)]
    params_seed: u64,
    #[command(flatten)]
    custom: CustomArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CustomArgs {
    /// Custom profile: exponent of 2 in A.
    #[arg(long, global = true, default_value_t = 9)]
    a_exp: u32,
    /// Custom profile: comma-separated odd primes making up B.
    #[arg(long, global = true, value_delimiter = ',', default_values_t = vec![5u64, 7])]
    primes: Vec<u64>,
    /// Custom profile: exponent of 3 in C.
    #[arg(long, global = true, default_value_t = 3)]
    c_exp: u32,
}

#[derive(Args, Debug)]
struct MessageArgs {
    /// Message as UTF-8 text.
    #[arg(long, default_value = "", conflicts_with = "message_hex")]
    message: String,
    /// Message as lowercase hex bytes.
    #[arg(long)]
    message_hex: Option<String>,
}

impl MessageArgs {
    fn bytes(&self) -> Result<Vec<u8>> {
        match &self.message_hex {
            Some(h) => parse_hex_bytes(h).ok_or_else(|| anyhow!("--message-hex is not lowercase hex")),
            None => Ok(self.message.as_bytes().to_vec()),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the parameter set and its validation report on stderr.
    Params,
    /// Generate a key pair.
    Keygen {
        /// Also write the public key alone to this file.
        #[arg(long)]
        pk_out: Option<PathBuf>,
    },
    /// Sample a witness; the statement goes to --statement-out.
    Genr {
        #[arg(long)]
        statement_out: PathBuf,
    },
    /// Plain signature under the underlying scheme.
    Sign {
        keypair: PathBuf,
        #[command(flatten)]
        msg: MessageArgs,
    },
    /// Pre-sign a message under a statement.
    Presign {
        keypair: PathBuf,
        statement: PathBuf,
        #[command(flatten)]
        msg: MessageArgs,
    },
    /// Check a pre-signature against key, statement and message.
    Preverify {
        public_key: PathBuf,
        statement: PathBuf,
        presignature: PathBuf,
        #[command(flatten)]
        msg: MessageArgs,
    },
    /// Complete a pre-signature with the witness.
    Adapt {
        presignature: PathBuf,
        witness: PathBuf,
    },
    /// Recover the witness from a pre-signature and its adapted signature.
    Extract {
        signature: PathBuf,
        presignature: PathBuf,
        statement: PathBuf,
    },
    /// Verify a plain or adapted signature.
    Verify {
        public_key: PathBuf,
        signature: PathBuf,
        #[command(flatten)]
        msg: MessageArgs,
    },
    /// Check a witness against a statement.
    Relation {
        witness: PathBuf,
        statement: PathBuf,
    },
    /// Two-party atomic swap transcript.
    DemoSwap {
        /// Corrupt the signature Alice publishes.
        #[arg(long)]
        fault: bool,
    },
    /// Serialized sizes and the extrapolated bit-length model.
    Size {
        #[arg(long, default_value_t = DEFAULT_L)]
        field_bits: u64,
    },
}

/// A command either produced an artifact or a verdict with a report.
enum Outcome {
    Artifact(Value),
    Verdict(bool, Value),
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_string(v) + "\n").with_context(|| format!("writing {}", path.display()))
}

fn load<T: Codec>(path: &Path, ps: &ParamSet) -> Result<T> {
    T::decode(&read(path)?, ps).with_context(|| format!("decoding {}", path.display()))
}

/// Accepts a key pair document or a bare `{"pk": ...}` document.
fn load_pk(path: &Path, ps: &ParamSet) -> Result<Curve> {
    let v = parse(&read(path)?)?;
    let pk = v.get("pk").ok_or_else(|| anyhow!("{}: no `pk` field", path.display()))?;
    curve_from_json(pk, ps.p, "$.pk").with_context(|| format!("decoding {}", path.display()))
}

fn load_params(cli: &Cli) -> Result<ParamSet> {
    if let Some(path) = &cli.params {
        return params_from_json(&parse(&read(path)?)?).with_context(|| format!("decoding {}", path.display()));
    }
    let spec = match cli.profile {
        ProfileArg::T0 => ProfileSpec::t0(),
        ProfileArg::T1 => ProfileSpec::t1(),
        ProfileArg::Custom => ProfileSpec::custom(cli.custom.a_exp, cli.custom.primes.clone(), cli.custom.c_exp),
    };
    Ok(generate_params(&spec, &mut ChaCha20Rng::seed_from_u64(cli.params_seed))?)
}

fn mode(cli: &Cli) -> Mode {
    if cli.strict {
        Mode::Strict
    } else {
        Mode::Light
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let ps = load_params(cli)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cli.seed);
    Ok(match &cli.command {
        Command::Params => {
            let report = validate_params(&ps);
            for c in &report.checks {
                eprintln!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            if !report.passed() {
                bail!("parameter validation failed: {:?}", report.failed());
            }
            Outcome::Artifact(params_to_json(&ps))
        }
        Command::Keygen { pk_out } => {
            let kp = keygen(&ps, &mut rng);
            if let Some(path) = pk_out {
                write(path, &json!({ "pk": curve_to_json(&kp.pk) }))?;
            }
            Outcome::Artifact(kp.to_json())
        }
        Command::Genr { statement_out } => {
            let (w, s) = gen_r(&ps, &mut rng);
            write(statement_out, &s.to_json())?;
            Outcome::Artifact(w.to_json())
        }
        Command::Sign { keypair, msg } => {
            let kp: KeyPair = load(keypair, &ps)?;
            Outcome::Artifact(sign(&kp, &msg.bytes()?, &ps, &mut rng)?.to_json())
        }
        Command::Presign { keypair, statement, msg } => {
            let kp: KeyPair = load(keypair, &ps)?;
            let s: Statement = load(statement, &ps)?;
            Outcome::Artifact(presign(&kp, &msg.bytes()?, &s, &ps, &mut rng)?.to_json())
        }
        Command::Preverify { public_key, statement, presignature, msg } => {
            let pk = load_pk(public_key, &ps)?;
            let s: Statement = load(statement, &ps)?;
            let pre: PreSignature = load(presignature, &ps)?;
            match preverify_report(&pk, &msg.bytes()?, &s, &pre, mode(cli), &ps, Execution::default()) {
                Ok(()) => Outcome::Verdict(true, json!({ "valid": true })),
                Err(e) => Outcome::Verdict(false, json!({ "valid": false, "failed": e.to_string() })),
            }
        }
        Command::Adapt { presignature, witness } => {
            let pre: PreSignature = load(presignature, &ps)?;
            let w: Witness = load(witness, &ps)?;
            Outcome::Artifact(adapt(&pre, &w, &ps)?.to_json())
        }
        Command::Extract { signature, presignature, statement } => {
            let sig: PlainSignature = load(signature, &ps)?;
            let pre: PreSignature = load(presignature, &ps)?;
            let s: Statement = load(statement, &ps)?;
            match extract(&sig, &pre, &s, &ps) {
                Ok(w) => Outcome::Artifact(w.to_json()),
                Err(e) => Outcome::Verdict(false, json!({ "result": "bottom", "reason": e.to_string() })),
            }
        }
        Command::Verify { public_key, signature, msg } => {
            let pk = load_pk(public_key, &ps)?;
            let sig: PlainSignature = load(signature, &ps)?;
            let r = verify_report(&pk, &msg.bytes()?, &sig, mode(cli), &ps, Execution::default());
            let strict = match &r.strict {
                None => Value::String("skipped".into()),
                Some(Ok(())) => Value::String("ok".into()),
                Some(Err(e)) => Value::String(e.to_string()),
            };
            let light = match &r.light {
                Ok(()) => Value::String("ok".into()),
                Err(e) => Value::String(e.clone()),
            };
            Outcome::Verdict(r.ok(), json!({ "valid": r.ok(), "light": light, "strict": strict }))
        }
        Command::Relation { witness, statement } => {
            let w: Witness = load(witness, &ps)?;
            let s: Statement = load(statement, &ps)?;
            let ok = verify_relation(&ps, &w, &s);
            Outcome::Verdict(ok, json!({ "valid": ok }))
        }
        Command::DemoSwap { fault } => {
            let t = demo_swap(&ps, cli.seed, *fault);
            Outcome::Verdict(t.verdict, t.to_json())
        }
        Command::Size { field_bits } => Outcome::Artifact(size_report(&ps, cli.seed, *field_bits).to_json()),
    })
}

fn emit(cli: &Cli, v: &Value) -> Result<()> {
    match &cli.out {
        Some(path) => write(path, v),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", to_string(v)).and_then(|_| out.flush()).context("writing stdout")
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| match outcome {
        Outcome::Artifact(v) => emit(&cli, &v).map(|_| true),
        Outcome::Verdict(ok, v) => emit(&cli, &v).map(|_| ok),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
