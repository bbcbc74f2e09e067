use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vt_core::{decode_hd, decode_siso, BitWord, ChannelPrior, ChannelSpec, VtParams};
use vt_harness::ablation::to_csv;
use vt_harness::dataset::{read_tsv, write_tsv};
use vt_harness::{
    ablation_suite, evaluate, format_table, gen_dataset, parse_channel, parse_code, split_codebook, time_decoders,
    AblationKind, AblationPlan, CorruptingSource, Decoder, ExperimentSpec, HarnessError, Task,
};
use vt_tvtd::{train, TrainingMeta, TvtdConfig, TvtdModel};

#[derive(Parser)]
#[command(name = "vt", version, about = "Varshamov-Tenengolts codes: encode, corrupt, decode, train, evaluate")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Fixed,
    Iid,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Algo {
    Hd,
    Siso,
    Tvtd,
}

#[derive(Subcommand)]
enum Command {
    /// Encode y-bit messages, one per line, into codewords.
    Encode {
        #[arg(long, default_value = "20,0")]
        code: String,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pass words, one per line, through the channel.
    Corrupt {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        rate: Option<f64>,
        /// Write one JSON event log per word to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decode received words, one per line; writes `decoded<TAB>status`.
    Decode {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value = "20,0")]
        code: String,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// SISO prior: i.i.d. channel rate.
        #[arg(long)]
        rate: Option<f64>,
        /// SISO prior: fixed error count.
        #[arg(long)]
        k: Option<usize>,
        /// Append the SISO LLRs as a third, comma-separated column.
        #[arg(long)]
        llr: bool,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train a TVTD checkpoint.
    Train {
        #[arg(long, default_value = "20,0")]
        code: String,
        /// Corruption for on-the-fly training data: fixed:K (0..=K errors) or iid:RATE.
        #[arg(long, default_value = "fixed:2")]
        task: String,
        /// key=value config file; defaults to the desk config for n.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Train on this TSV instead of fresh corruptions of the training split.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Seed of the codebook split whose training part is used.
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
    },
    /// Write a TSV dataset of `received<TAB>codeword` pairs.
    Gen {
        #[arg(long, default_value = "20,0")]
        code: String,
        #[arg(long, default_value = "fixed:1")]
        channel: String,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
        /// Draw from the disjoint 80/20 codebook split: `count` training pairs
        /// to OUT and one pair per held-out codeword to TEST_OUT.
        #[arg(long, requires = "test_out")]
        split: bool,
        #[arg(long)]
        test_out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
    },
    /// Monte Carlo BER/FER of a decoder.
    Eval {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value = "20,0")]
        code: String,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        /// One or more channels, e.g. fixed:1 iid:0.01.
        #[arg(long, num_args = 1.., default_value = "fixed:1")]
        channel: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        message_only: bool,
        /// Transmit only held-out codewords of the split with this seed.
        #[arg(long)]
        holdout: Option<u64>,
        /// Record wall-clock seconds in the report.
        #[arg(long)]
        timing: bool,
        /// Print JSON reports, one per line, instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Wall-clock comparison of decoders on the same received words.
    Time {
        #[arg(long, default_value = "20,0")]
        code: String,
        #[arg(long, default_value = "fixed:2")]
        channel: String,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "hd,siso")]
        algo: Vec<Algo>,
        #[arg(long)]
        ckpt: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Train and evaluate every variant of an ablation grid; writes CSV.
    Ablate {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "20,0")]
        code: String,
        #[arg(long, default_value = "fixed:2")]
        task: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        errors: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        split_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn reader(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(File::open(p)?)),
        None => Box::new(BufReader::new(io::stdin())),
    })
}

fn writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_words(path: &Option<PathBuf>) -> Result<Vec<BitWord>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in reader(path)?.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(
            line.parse()
                .map_err(|e| HarnessError::Invalid(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

fn channel_from(k: Option<usize>, rate: Option<f64>) -> Result<ChannelSpec, HarnessError> {
    match (k, rate) {
        (Some(k), None) => Ok(ChannelSpec::fixed(k)),
        (None, Some(r)) => Ok(ChannelSpec::iid(r)?),
        _ => Err(HarnessError::Invalid("give exactly one of --k and --rate".into())),
    }
}

fn load_config(path: &Option<PathBuf>, code: &VtParams) -> Result<TvtdConfig, HarnessError> {
    let cfg = match path {
        Some(p) => TvtdConfig::parse(&fs::read_to_string(p)?)?,
        None => TvtdConfig::desk(code.n()),
    };
    if cfg.n != code.n() {
        return Err(HarnessError::Invalid(format!("config n = {} but code n = {}", cfg.n, code.n())));
    }
    Ok(cfg)
}

fn load_decoder(algo: Algo, ckpt: &Option<PathBuf>, code: &VtParams) -> Result<Decoder, HarnessError> {
    Ok(match algo {
        Algo::Hd => Decoder::Hd,
        Algo::Siso => Decoder::Siso,
        Algo::Tvtd => {
            let path = ckpt
                .as_ref()
                .ok_or_else(|| HarnessError::Invalid("--algo tvtd needs --ckpt".into()))?;
            let (model, _) = vt_tvtd::load::<f32>(path, Some(code.n()))?;
            Decoder::Tvtd(Arc::new(model))
        }
    })
}

fn progress(label: &str, e: &vt_tvtd::EpochReport) {
    eprintln!(
        "{label}epoch {} loss {:.5} acc {:.5} lr {:.2e}",
        e.epoch, e.loss, e.accuracy, e.lr
    );
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let seed = cli.seed;
    match cli.command {
        Command::Encode { code, input, output } => {
            let code = parse_code(&code)?;
            let mut out = writer(&output)?;
            for u in read_words(&input)? {
                writeln!(out, "{}", code.encode(&u)?)?;
            }
            out.flush()?;
        }
        Command::Corrupt {
            mode,
            k,
            rate,
            log,
            input,
            output,
        } => {
            let channel = match mode {
                Mode::Fixed => channel_from(Some(k.ok_or_else(|| HarnessError::Invalid("--mode fixed needs --k".into()))?), None)?,
                Mode::Iid => channel_from(None, Some(rate.ok_or_else(|| HarnessError::Invalid("--mode iid needs --rate".into()))?))?,
            };
            let words = read_words(&input)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = writer(&output)?;
            let mut log_out = match &log {
                Some(p) => Some(BufWriter::new(File::create(p)?)),
                None => None,
            };
            for w in &words {
                let (r, events) = channel.corrupt(w, &mut rng);
                writeln!(out, "{r}")?;
                if let Some(l) = log_out.as_mut() {
                    writeln!(l, "{}", serde_json::to_string(&events)?)?;
                }
            }
            out.flush()?;
            if let Some(mut l) = log_out {
                l.flush()?;
            }
        }
        Command::Decode {
            algo,
            code,
            ckpt,
            rate,
            k,
            llr,
            input,
            output,
        } => {
            let code = parse_code(&code)?;
            if llr && algo != Algo::Siso {
                return Err(HarnessError::Invalid("--llr is only available with --algo siso".into()));
            }
            let words = read_words(&input)?;
            let mut out = writer(&output)?;
            match algo {
                Algo::Hd => {
                    for r in &words {
                        let o = decode_hd(r, &code);
                        writeln!(out, "{}\t{}", o.decoded, o.status.as_str())?;
                    }
                }
                Algo::Siso => {
                    let channel = channel_from(k, rate)?;
                    for r in &words {
                        let prior = ChannelPrior::from_channel(&channel, code.n(), r.len());
                        let o = decode_siso(r, &code, &prior);
                        let status = if o.fallback { "fallback" } else { "decoded" };
                        write!(out, "{}\t{status}", o.decoded)?;
                        if llr {
                            let v: Vec<String> = o.llr.0.iter().map(|x| x.to_string()).collect();
                            write!(out, "\t{}", v.join(","))?;
                        }
                        writeln!(out)?;
                    }
                }
                Algo::Tvtd => {
                    let decoder = load_decoder(algo, &ckpt, &code)?;
                    let channel = ChannelSpec::fixed(0);
                    for chunk in words.chunks(256) {
                        for d in decoder.decode_batch(chunk, &code, &channel) {
                            let status = if d.fallback { "fallback" } else { "decoded" };
                            writeln!(out, "{}\t{status}", d.word)?;
                        }
                    }
                }
            }
            out.flush()?;
        }
        Command::Train {
            code,
            task,
            config,
            out,
            data,
            split_seed,
        } => {
            let code = parse_code(&code)?;
            let task: Task = task.parse()?;
            let mut cfg = load_config(&config, &code)?;
            cfg.seed = seed;
            let mut model = TvtdModel::<f32>::new(cfg.clone(), cfg.seed)?;
            let report = match &data {
                Some(p) => {
                    let mut samples = read_tsv(BufReader::new(File::open(p)?))?;
                    train(&mut model, &mut samples, |e| progress("", e))?
                }
                None => {
                    let split = split_codebook(&code, split_seed)?;
                    let mut source = CorruptingSource::new(split.train, task, seed);
                    train(&mut model, &mut source, |e| progress("", e))?
                }
            };
            let last = report.epochs.last();
            let meta = TrainingMeta {
                epoch: last.map_or(0, |e| e.epoch + 1),
                loss: last.map_or(f64::NAN, |e| e.loss),
                seed,
                extra: vec![
                    ("a".into(), code.a().to_string()),
                    ("task".into(), task.to_string()),
                    ("split_seed".into(), split_seed.to_string()),
                    (
                        "data".into(),
                        data.as_ref().map_or("split".into(), |p| p.display().to_string()),
                    ),
                ],
            };
            vt_tvtd::save(&model, &meta, &out)?;
        }
        Command::Gen {
            code,
            channel,
            count,
            out,
            split,
            test_out,
            split_seed,
        } => {
            let code = parse_code(&code)?;
            let channel = parse_channel(&channel)?;
            if count == 0 {
                return Err(HarnessError::Invalid("--count must be at least 1".into()));
            }
            let write = |path: &Path, samples: &[vt_tvtd::Sample]| -> Result<(), HarnessError> {
                let mut w = BufWriter::new(File::create(path)?);
                write_tsv(&mut w, samples)?;
                w.flush()?;
                Ok(())
            };
            if split {
                let s = split_codebook(&code, split_seed)?;
                write(&out, &gen_dataset(&code, &channel, count, Some(&s.train), seed))?;
                let test = gen_dataset(&code, &channel, s.test.len(), Some(&s.test), seed.wrapping_add(1));
                write(test_out.as_deref().expect("required by clap"), &test)?;
            } else {
                write(&out, &gen_dataset(&code, &channel, count, None, seed))?;
            }
        }
        Command::Eval {
            algo,
            code,
            ckpt,
            channel,
            trials,
            message_only,
            holdout,
            timing,
            json,
        } => {
            let code = parse_code(&code)?;
            let decoder = load_decoder(algo, &ckpt, &code)?;
            let pool = match holdout {
                Some(s) => Some(Arc::new(split_codebook(&code, s)?.test)),
                None => None,
            };
            let mut reports = Vec::new();
            for c in &channel {
                let mut spec = ExperimentSpec::new(code.clone(), parse_channel(c)?, decoder.clone(), trials, seed);
                spec.message_only = message_only;
                spec.pool = pool.clone();
                spec.timing = timing;
                reports.push(evaluate(&spec)?);
            }
            if json {
                for r in &reports {
                    println!("{}", r.to_json());
                }
            } else {
                print!("{}", format_table(&reports));
            }
        }
        Command::Time {
            code,
            channel,
            count,
            algo,
            ckpt,
            json,
        } => {
            let code = parse_code(&code)?;
            let channel = parse_channel(&channel)?;
            let decoders = algo
                .iter()
                .map(|&a| load_decoder(a, &ckpt, &code))
                .collect::<Result<Vec<_>, _>>()?;
            let report = time_decoders(&code, &channel, count, seed, &decoders);
            if json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                print!("{}", report.format_table());
            }
        }
        Command::Ablate {
            kind,
            code,
            task,
            config,
            errors,
            split_seed,
            out,
        } => {
            let code = parse_code(&code)?;
            let mut base = load_config(&config, &code)?;
            base.seed = seed;
            let plan = AblationPlan {
                kind: kind.parse::<AblationKind>()?,
                base,
                code,
                task: task.parse()?,
                split_seed,
                eval_errors: errors,
                eval_seed: seed,
            };
            let rows = ablation_suite(&plan, |label, e| progress(&format!("[{label}] "), e))?;
            let mut w = writer(&out)?;
            w.write_all(to_csv(&rows).as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vt: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
