//! `fesim` command-line frontend.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fesim::attack::{attack_run, AttackOptions, BitVerdict, TargetTiming};
use fesim::campaign::{
    campaign_report_render, campaign_run, parse_params, CampaignSpec, FixedValues, ReportFormat,
    Sampling,
};
use fesim::device::{FaultSpec, PufDevice};
use fesim::fe::{fe_generate_with, fe_reconstruct_with, random_secret, HelperData, KeyDerivation};
use fesim::{bits, Codec, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(
    name = "fesim",
    version,
    about = "Fuzzy-extractor decoder timing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CodecArgs {
    /// bch-serial | bch-parallel | rs | rs-worstcase
    #[arg(long)]
    codec: Option<String>,
    /// Timing preset overriding the codec default
    #[arg(long)]
    profile: Option<String>,
    /// TOML experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct DeviceArgs {
    /// PUF response as hex (overrides the config file)
    #[arg(long)]
    w: Option<String>,
    /// Seed for a random PUF response (default: --seed)
    #[arg(long)]
    device_seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode a message given as hex
    Encode {
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        message: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decode a received word given as hex and report its latency
    Decode {
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Enroll a device: write helper data and print the key
    FeGen {
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        device: DeviceArgs,
        /// Seed for the secret message
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        helper: Option<PathBuf>,
        #[arg(long, default_value = "32")]
        key_len: KeyDerivation,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Reconstruct the key from a (possibly faulted) measurement
    FeRec {
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        device: DeviceArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        helper: Option<PathBuf>,
        #[arg(long, default_value = "32")]
        key_len: KeyDerivation,
        /// Force bit POS to VAL during the measurement, as POS=VAL
        #[arg(long)]
        fault: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a timing campaign over decoder stimuli
    Campaign {
        #[command(flatten)]
        codec: CodecArgs,
        /// Comma-separated: codeword_value,error_number,error_position,error_value
        #[arg(long)]
        vary: Option<String>,
        #[arg(long)]
        fix_codeword: Option<u64>,
        #[arg(long)]
        fix_number: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        fix_positions: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        fix_values: Option<Vec<u16>>,
        /// Sample at most N stimuli per row instead of enumerating
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        codeword_samples: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Recover the PUF response by fault injection and latency comparison
    Attack {
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        device: DeviceArgs,
        /// Seed for enrollment and jitter
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Existing helper data; enrolls the device afresh when absent
        #[arg(long)]
        helper: Option<PathBuf>,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        forced_value: u8,
        #[arg(long, default_value_t = 0)]
        jitter: u64,
        /// Also write the JSON trace here
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Loaded {
    codec: Codec,
    config: ExperimentConfig,
}

fn load(args: &CodecArgs) -> anyhow::Result<Loaded> {
    let config = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let codec = match (&args.codec, &config.codec) {
        (Some(id), _) => Codec::from_id(id, args.profile.as_deref())?,
        (None, Some(section)) => {
            let c = section.build()?;
            match &args.profile {
                Some(p) => c.with_timing(fesim::timing::TimingProfile::preset(p)?),
                None => c,
            }
        }
        (None, None) => {
            return Err(Error::InvalidConfig("no codec: pass --codec or --config".into()).into())
        }
    };
    Ok(Loaded { codec, config })
}

fn device(ctx: &Loaded, args: &DeviceArgs, seed: u64) -> anyhow::Result<PufDevice> {
    let mut section = ctx.config.device.clone();
    if args.w.is_some() {
        section.w = args.w.clone();
    }
    if args.device_seed.is_some() {
        section.seed = args.device_seed;
    }
    Ok(section.build(ctx.codec.word_bits(), seed)?)
}

fn helper_path(ctx: &Loaded, arg: &Option<PathBuf>) -> Option<PathBuf> {
    arg.clone().or_else(|| ctx.config.paths.helper.clone())
}

fn hex_word(codec: &Codec, hex: &str, bits_len: usize) -> anyhow::Result<Vec<u16>> {
    let b = bits::from_hex(hex, bits_len)?;
    Ok(bits::to_symbols(&b, codec.symbol_bits()))
}

fn emit(out: &mut String, format: Format, pairs: &[(&str, serde_json::Value)]) {
    match format {
        Format::Json => {
            let map: serde_json::Map<_, _> = pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect();
            out.push_str(&serde_json::to_string_pretty(&map).expect("json"));
            out.push('\n');
        }
        Format::Csv => {
            out.push_str(&pairs.iter().map(|(k, _)| *k).collect::<Vec<_>>().join(","));
            out.push('\n');
            out.push_str(
                &pairs
                    .iter()
                    .map(|(_, v)| plain(v))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
        Format::Text => {
            for (k, v) in pairs {
                out.push_str(&format!("{k}={}\n", plain(v)));
            }
        }
    }
}

fn plain(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(a) => a.iter().map(plain).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn run(cli: Cli) -> anyhow::Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Encode {
            codec,
            message,
            format,
        } => {
            let ctx = load(&codec)?;
            let c = &ctx.codec;
            let msg = hex_word(c, &message, c.message_bits())?;
            let cw = c.encode_symbols(&msg)?;
            emit(
                &mut out,
                format,
                &[(
                    "codeword",
                    json!(bits::to_hex(&bits::from_symbols(&cw, c.symbol_bits()))),
                )],
            );
        }
        Command::Decode {
            codec,
            input,
            format,
        } => {
            let ctx = load(&codec)?;
            let c = &ctx.codec;
            let word = hex_word(c, &input, c.word_bits())?;
            let r = c.decode_symbols(&word)?;
            emit(
                &mut out,
                format,
                &[
                    (
                        "corrected",
                        json!(bits::to_hex(&bits::from_symbols(
                            &r.corrected,
                            c.symbol_bits()
                        ))),
                    ),
                    ("status", json!(r.status)),
                    ("error_positions", json!(r.error_positions)),
                    ("cycles", json!(r.cycles)),
                ],
            );
        }
        Command::FeGen {
            codec,
            device: dev,
            seed,
            helper,
            key_len,
            format,
        } => {
            let ctx = load(&codec)?;
            let c = &ctx.codec;
            let d = device(&ctx, &dev, seed)?;
            let secret = random_secret(c, &mut ChaCha8Rng::seed_from_u64(seed));
            let (h, key) = fe_generate_with(d.secret_w(), &secret, c, key_len)?;
            let mut pairs = vec![("key", json!(key.hex()))];
            match helper_path(&ctx, &helper) {
                Some(p) => {
                    fs::write(&p, h.to_string())
                        .with_context(|| format!("writing {}", p.display()))?;
                    pairs.push(("helper_file", json!(p.display().to_string())));
                }
                None => pairs.push(("helper", json!(bits::to_hex(&h.mask)))),
            }
            pairs.insert(0, ("codec", json!(h.codec_id)));
            emit(&mut out, format, &pairs);
        }
        Command::FeRec {
            codec,
            device: dev,
            seed,
            helper,
            key_len,
            fault,
            format,
        } => {
            let ctx = load(&codec)?;
            let c = &ctx.codec;
            let mut d = device(&ctx, &dev, seed)?;
            let path = helper_path(&ctx, &helper).ok_or_else(|| {
                Error::InvalidConfig("fe-rec needs --helper or paths.helper".into())
            })?;
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let h = HelperData::parse(&text, c)?;
            if let Some(f) = fault {
                d.inject_fault(parse_fault(&f)?)?;
            }
            let rec = fe_reconstruct_with(&d.measure(), &h, c, key_len)?;
            emit(
                &mut out,
                format,
                &[
                    ("key", json!(rec.key.hex())),
                    ("status", json!(rec.status)),
                    ("corrected_symbols", json!(rec.corrected_symbols)),
                    ("cycles", json!(rec.cycles)),
                ],
            );
        }
        Command::Campaign {
            codec,
            vary,
            fix_codeword,
            fix_number,
            fix_positions,
            fix_values,
            sample,
            seed,
            codeword_samples,
            format,
            output,
            jobs,
        } => {
            if let Some(j) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(j.max(1))
                    .build_global()?;
            }
            let ctx = load(&codec)?;
            let c = &ctx.codec;
            let mut spec = match vary {
                Some(v) => CampaignSpec::new(parse_params(&v)?),
                None => CampaignSpec::full(c),
            }
            .with_seed(seed)
            .with_fixed(FixedValues {
                codeword_value: fix_codeword,
                error_number: fix_number,
                error_position: fix_positions,
                error_value: fix_values,
            });
            spec.codeword_samples = codeword_samples;
            if let Some(count) = sample {
                spec = spec.with_sampling(Sampling::Sampled { seed, count });
            }
            let report = campaign_run(&spec, c)?;
            let fmt = match format {
                Format::Text => ReportFormat::Text,
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            let rendered = campaign_report_render(&report, fmt);
            match output.or_else(|| ctx.config.paths.report.clone()) {
                Some(p) => {
                    fs::write(&p, &rendered).with_context(|| format!("writing {}", p.display()))?
                }
                None => out.push_str(&rendered),
            }
        }
        Command::Attack {
            codec,
            device: dev,
            seed,
            helper,
            forced_value,
            jitter,
            trace: trace_path,
            format,
        } => {
            let ctx = load(&codec)?;
            let c = &ctx.codec;
            let mut d = device(&ctx, &dev, seed)?;
            let h = match helper_path(&ctx, &helper) {
                Some(p) => HelperData::parse(
                    &fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?,
                    c,
                )?,
                None => {
                    let secret = random_secret(c, &mut ChaCha8Rng::seed_from_u64(seed));
                    fe_generate_with(d.secret_w(), &secret, c, KeyDerivation::default())?.0
                }
            };
            let opts = AttackOptions {
                forced_value: forced_value == 1,
                jitter,
                seed,
            };
            let trace = attack_run(&mut d, &h, c, opts)?;
            let json_text = serde_json::to_string_pretty(&trace)? + "\n";
            if let Some(p) = trace_path {
                fs::write(&p, &json_text).with_context(|| format!("writing {}", p.display()))?;
            }
            match format {
                Format::Json => out.push_str(&json_text),
                Format::Text | Format::Csv => {
                    let csv = matches!(format, Format::Csv);
                    if !csv {
                        out.push_str(&format!(
                            "codec: {} (profile {})\ntarget: {}\nbaseline cycles: {}\n",
                            trace.codec,
                            trace.profile,
                            match trace.calibration.target {
                                TargetTiming::Leaky => "leaky",
                                TargetTiming::Constant => "constant",
                            },
                            trace.baseline_cycles
                        ));
                    }
                    out.push_str(if csv {
                        "bit,forced,cycles,verdict\n"
                    } else {
                        "bit  forced  cycles  verdict\n"
                    });
                    for b in &trace.bits {
                        let v = match b.verdict {
                            BitVerdict::BitIsF => "bit_is_f",
                            BitVerdict::BitIsNotF => "bit_is_not_f",
                            BitVerdict::Undecidable => "undecidable",
                        };
                        if csv {
                            out.push_str(&format!(
                                "{},{},{},{v}\n",
                                b.position, b.forced_value as u8, b.cycles
                            ));
                        } else {
                            out.push_str(&format!(
                                "{:>3}  {:>6}  {:>6}  {v}\n",
                                b.position, b.forced_value as u8, b.cycles
                            ));
                        }
                    }
                    if !csv {
                        out.push_str(&format!(
                            "injections={} reconstructions={} (calibration: {} / {})\n",
                            trace.injections,
                            trace.reconstructions,
                            trace.calibration.injections,
                            trace.calibration.reconstructions
                        ));
                        match (&trace.recovered_w, &trace.recovered_key) {
                            (Some(w), Some(k)) => {
                                out.push_str(&format!("recovered_w={w}\nrecovered_key={k}\n"))
                            }
                            _ => out.push_str("undecidable: constant-time target\n"),
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn parse_fault(s: &str) -> Result<FaultSpec, Error> {
    let (pos, val) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("fault `{s}` is not POS=VAL")))?;
    let position = pos
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad fault position `{pos}`")))?;
    let value = match val.trim() {
        "0" => false,
        "1" => true,
        other => return Err(Error::Parse(format!("fault value `{other}` is not 0 or 1"))),
    };
    Ok(FaultSpec { position, value })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = e.downcast_ref::<Error>().map(Error::kind).unwrap_or("io");
            eprintln!("error: kind={kind} message={:?}", format!("{e:#}"));
            ExitCode::from(1)
        }
    }
}
