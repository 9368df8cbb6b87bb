//! `ranklaw` — rank-frequency statistics, law fitting, class membership
//! checks, random-typing simulation, and code-table utilities.
//!
//! Exit codes are a stable contract: 0 success, 2 usage or input error,
//! 3 empty data, 4 numeric non-convergence or degenerate input.

mod table_io;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ranklaw::coding::{
    elias_gamma_encode, enumerate_nonsingular_codes, is_nonsingular, is_uniquely_decodable,
    kraft_sum, Alphabet, CodeTable, SchemeKind,
};
use ranklaw::corpus::{count_stream, to_rank_data, CorpusError, LengthUnit, Splitter, TokenizerOptions};
use ranklaw::fit::{
    assess_class_membership, fit_exponential_mle, fit_zipf_mle, select_model, ClassThresholds,
    ExponentialFit, FitError, ModelSelection, ZipfFit,
};
use ranklaw::rank::{self, RankError, RankTableRow};
use ranklaw::typing::{RandomTypingParams, SimulationMetadata, TokenStream};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "ranklaw",
    version,
    about = "Rank-frequency statistics, optimal-coding checks, and law fitting"
)]
struct Cli {
    /// Write the artifact to this path instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Artifact format where a command supports more than one.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tokenize a corpus and emit its rank table with summary statistics.
    Analyze {
        /// Input file, or `-` for standard input.
        input: String,
        /// Logarithm base N for entropy, log-rank, and efficiencies.
        #[arg(long, required_unless_present = "infer_base", conflicts_with = "infer_base")]
        base: Option<usize>,
        /// Use the number of distinct characters across tokens as the base.
        #[arg(long)]
        infer_base: bool,
        #[arg(long, value_enum, default_value = "unicode-words")]
        splitter: SplitterArg,
        /// Lowercase tokens before counting.
        #[arg(long)]
        lowercase: bool,
        #[arg(long, value_enum, default_value = "graphemes")]
        length_unit: LengthUnitArg,
    },
    /// Fit rank-distribution models to a frequency table.
    Fit {
        /// Table file (`analyze` output or token,count,length CSV), `-` for stdin.
        table: String,
        #[arg(long, required_unless_present = "infer_base", conflicts_with = "infer_base")]
        base: Option<usize>,
        /// Use the number of distinct characters across tokens as the base.
        #[arg(long)]
        infer_base: bool,
        #[arg(long, value_enum, default_value = "both")]
        model: ModelArg,
    },
    /// Test a frequency table for membership in the quasi-optimal coding class.
    Classify {
        /// Table file with a length column, `-` for stdin.
        table: String,
        #[arg(long, required_unless_present = "infer_base", conflicts_with = "infer_base")]
        base: Option<usize>,
        /// Use the number of distinct characters across tokens as the base.
        #[arg(long)]
        infer_base: bool,
        /// Minimum r-squared demanded of both law fits.
        #[arg(long, default_value_t = 0.95)]
        min_r2: f64,
        /// Allowed relative gap between implied and fitted exponent.
        #[arg(long, default_value_t = 0.05)]
        alpha_tol: f64,
    },
    /// Generate random-typing tokens, one per line; metadata goes to stderr.
    Simulate {
        #[arg(long)]
        alphabet_size: usize,
        /// Space-key probability, strictly between 0 and 1.
        #[arg(long)]
        p_space: f64,
        #[arg(long)]
        tokens: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a code table with its Kraft sum and decodability verdicts.
    Codes {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Number of ranks to code, starting at 1.
        #[arg(long)]
        upto: usize,
        /// Alphabet symbols in order, e.g. `ab`.
        #[arg(long)]
        alphabet: String,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitterArg {
    UnicodeWords,
    Whitespace,
}

impl From<SplitterArg> for Splitter {
    fn from(value: SplitterArg) -> Splitter {
        match value {
            SplitterArg::UnicodeWords => Splitter::UnicodeWords,
            SplitterArg::Whitespace => Splitter::Whitespace,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LengthUnitArg {
    Graphemes,
    CodePoints,
    Bytes,
}

impl From<LengthUnitArg> for LengthUnit {
    fn from(value: LengthUnitArg) -> LengthUnit {
        match value {
            LengthUnitArg::Graphemes => LengthUnit::Graphemes,
            LengthUnitArg::CodePoints => LengthUnit::CodePoints,
            LengthUnitArg::Bytes => LengthUnit::Bytes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Zipf,
    Exp,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    EliasGamma,
    Nonsingular,
}

#[derive(Debug)]
pub struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    pub fn new(code: i32, message: String) -> Self {
        Self { code, message }
    }
}

fn fit_error(err: FitError) -> CliError {
    let code = match &err {
        FitError::NonConvergence { .. }
        | FitError::Degenerate(_)
        | FitError::SupportTooSmall { .. }
        | FitError::CollinearRegressor
        | FitError::NonPositiveSlope(_)
        | FitError::InvalidCount(_) => 4,
        FitError::Rank(r) => return rank_error_inner(r),
        _ => 2,
    };
    CliError::new(code, err.to_string())
}

fn rank_error_inner(err: &RankError) -> CliError {
    let code = match err {
        RankError::Degenerate(_) | RankError::ZeroMeanLength => 4,
        RankError::EmptyInput => 3,
        _ => 2,
    };
    CliError::new(code, err.to_string())
}

fn corpus_error(err: CorpusError) -> CliError {
    let code = match &err {
        CorpusError::EmptyTable => 3,
        CorpusError::Rank(RankError::Degenerate(_)) => 4,
        _ => 2,
    };
    CliError::new(code, err.to_string())
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("ranklaw: {}", err.message);
            process::exit(err.code);
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let output = cli.output.as_deref();
    match cli.command {
        Command::Analyze {
            input,
            base,
            infer_base: _,
            splitter,
            lowercase,
            length_unit,
        } => cmd_analyze(&input, base, splitter, lowercase, length_unit, cli.format, output),
        Command::Fit {
            table,
            base,
            infer_base: _,
            model,
        } => cmd_fit(&table, base, model, cli.format, output),
        Command::Classify {
            table,
            base,
            infer_base: _,
            min_r2,
            alpha_tol,
        } => cmd_classify(&table, base, min_r2, alpha_tol, cli.format, output),
        Command::Simulate {
            alphabet_size,
            p_space,
            tokens,
            seed,
        } => cmd_simulate(alphabet_size, p_space, tokens, seed, cli.format, output),
        Command::Codes {
            scheme,
            upto,
            alphabet,
        } => cmd_codes(scheme, upto, &alphabet, cli.format, output),
    }
}

fn write_artifact(output: Option<&std::path::Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::new(2, format!("writing {}: {e}", path.display()))),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::new(2, format!("writing standard output: {e}")))
        }
    }
}

#[derive(Serialize)]
struct Meta {
    tool: &'static str,
    version: &'static str,
    command: String,
}

impl Meta {
    fn new(command: String) -> Self {
        Self {
            tool: "ranklaw",
            version: VERSION,
            command,
        }
    }

    fn comment_block(&self) -> String {
        format!("# ranklaw v{}\n# command: {}\n", self.version, self.command)
    }
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    total_tokens: u64,
    base: usize,
    mean_length: f64,
    mean_log_rank: f64,
    entropy: f64,
    tau: Option<f64>,
    eta_ns: f64,
    eta_ud: f64,
}

/// The observed alphabet-size proxy: distinct characters across tokens.
fn infer_base<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> Result<usize, CliError> {
    let mut chars = std::collections::HashSet::new();
    for token in tokens {
        chars.extend(token.chars());
    }
    if chars.len() < 2 {
        return Err(CliError::new(
            2,
            format!("inferred alphabet size {} is below 2", chars.len()),
        ));
    }
    Ok(chars.len())
}

fn check_cli_base(base: usize) -> Result<usize, CliError> {
    if base < 2 {
        return Err(CliError::new(2, format!("--base must be at least 2, got {base}")));
    }
    Ok(base)
}

fn cmd_analyze(
    input: &str,
    base: Option<usize>,
    splitter: SplitterArg,
    lowercase: bool,
    length_unit: LengthUnitArg,
    format: Option<Format>,
    output: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    let options = TokenizerOptions {
        lowercase,
        splitter: splitter.into(),
    };
    let unit: LengthUnit = length_unit.into();
    let table = if input == "-" {
        let stdin = io::stdin();
        count_stream(stdin.lock(), options, unit).map_err(corpus_error)?
    } else {
        let file = fs::File::open(input)
            .map_err(|e| CliError::new(2, format!("reading {input}: {e}")))?;
        count_stream(io::BufReader::new(file), options, unit).map_err(corpus_error)?
    };
    if table.is_empty() {
        return Err(CliError::new(3, format!("{input}: corpus has no tokens")));
    }
    let base = match base {
        Some(b) => check_cli_base(b)?,
        None => infer_base(table.rows().iter().map(|r| r.token.as_str()))?,
    };

    let (dist, profile) = to_rank_data(&table).map_err(corpus_error)?;
    let mean_length = rank::mean_length(&dist, &profile).map_err(|e| rank_error_inner(&e))?;
    let mean_log_rank = rank::mean_log_rank(&dist, base).map_err(|e| rank_error_inner(&e))?;
    let entropy = rank::entropy(&dist, base).map_err(|e| rank_error_inner(&e))?;
    let tau = rank::law_of_abbreviation_holds(&dist, &profile)
        .map(|(tau, _)| tau)
        .ok();
    let summary = Summary {
        n: dist.support(),
        total_tokens: table.total_tokens(),
        base,
        mean_length,
        mean_log_rank,
        entropy,
        tau,
        eta_ns: mean_log_rank / mean_length,
        eta_ud: entropy / mean_length,
    };

    let rows: Vec<RankTableRow> = table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| RankTableRow {
            rank: i + 1,
            token: Some(row.token.clone()),
            count: Some(row.count),
            probability: dist.probs()[i],
            length: Some(row.length as f64),
        })
        .collect();

    let splitter_name = match options.splitter {
        Splitter::UnicodeWords => "unicode-words",
        Splitter::Whitespace => "whitespace",
    };
    let unit_name = match unit {
        LengthUnit::Graphemes => "graphemes",
        LengthUnit::CodePoints => "code-points",
        LengthUnit::Bytes => "bytes",
    };
    let meta = Meta::new(format!(
        "analyze --base {base} --splitter {splitter_name} --length-unit {unit_name} --lowercase {lowercase} {input}"
    ));

    let bytes = match format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            buf.extend_from_slice(meta.comment_block().as_bytes());
            rank::write_rank_table(&mut buf, &rows).map_err(|e| rank_error_inner(&e))?;
            let tau_text = summary.tau.map(|t| t.to_string()).unwrap_or_default();
            buf.extend_from_slice(
                format!(
                    "# n: {}\n# total_tokens: {}\n# base: {}\n# mean_length: {}\n# mean_log_rank: {}\n# entropy: {}\n# tau: {}\n# eta_ns: {}\n# eta_ud: {}\n",
                    summary.n,
                    summary.total_tokens,
                    summary.base,
                    summary.mean_length,
                    summary.mean_log_rank,
                    summary.entropy,
                    tau_text,
                    summary.eta_ns,
                    summary.eta_ud
                )
                .as_bytes(),
            );
            buf
        }
        Format::Json => {
            #[derive(Serialize)]
            struct JsonRow<'a> {
                rank: usize,
                token: &'a str,
                count: u64,
                probability: f64,
                length: f64,
            }
            #[derive(Serialize)]
            struct Artifact<'a> {
                meta: &'a Meta,
                summary: &'a Summary,
                rows: Vec<JsonRow<'a>>,
            }
            let artifact = Artifact {
                meta: &meta,
                summary: &summary,
                rows: rows
                    .iter()
                    .map(|r| JsonRow {
                        rank: r.rank,
                        token: r.token.as_deref().unwrap_or(""),
                        count: r.count.unwrap_or(0),
                        probability: r.probability,
                        length: r.length.unwrap_or(0.0),
                    })
                    .collect(),
            };
            to_json(&artifact)?
        }
    };
    write_artifact(output, &bytes)?;
    Ok(0)
}

fn cmd_fit(
    table_path: &str,
    base: Option<usize>,
    model: ModelArg,
    format: Option<Format>,
    output: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    if format == Some(Format::Csv) {
        return Err(CliError::new(2, "fit reports are json; drop --format csv".into()));
    }
    let table = table_io::load_table(table_path)?;
    let base = resolve_base(base, &table)?;
    let counts = table
        .counts()
        .ok_or_else(|| CliError::new(2, format!("{table_path}: fit needs a complete count column")))?;

    #[derive(Serialize)]
    struct Artifact {
        meta: Meta,
        n: usize,
        total: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        zipf: Option<ZipfFit>,
        #[serde(skip_serializing_if = "Option::is_none")]
        zipf_loglog: Option<ranklaw::LogLogDiagnostic>,
        #[serde(skip_serializing_if = "Option::is_none")]
        exponential: Option<ExponentialFit>,
        #[serde(skip_serializing_if = "Option::is_none")]
        selection: Option<SelectionSummary>,
    }
    #[derive(Serialize)]
    struct SelectionSummary {
        verdict: ranklaw::ModelVerdict,
        delta_aic: f64,
    }

    let model_name = match model {
        ModelArg::Zipf => "zipf",
        ModelArg::Exp => "exp",
        ModelArg::Both => "both",
    };
    let meta = Meta::new(format!("fit --base {base} --model {model_name} {table_path}"));
    let total = counts.iter().sum();
    let n = counts.len();
    // the log-log line is a diagnostic companion to the likelihood fit
    let loglog = if matches!(model, ModelArg::Zipf | ModelArg::Both) {
        table
            .distribution()
            .ok()
            .and_then(|d| ranklaw::fit::zipf_loglog_diagnostic(&d, base).ok())
    } else {
        None
    };
    let artifact = match model {
        ModelArg::Zipf => Artifact {
            meta,
            n,
            total,
            zipf: Some(fit_zipf_mle(&counts, base).map_err(fit_error)?),
            zipf_loglog: loglog,
            exponential: None,
            selection: None,
        },
        ModelArg::Exp => Artifact {
            meta,
            n,
            total,
            zipf: None,
            zipf_loglog: None,
            exponential: Some(fit_exponential_mle(&counts).map_err(fit_error)?),
            selection: None,
        },
        ModelArg::Both => {
            let ModelSelection {
                verdict,
                delta_aic,
                zipf,
                exponential,
            } = select_model(&counts, base).map_err(fit_error)?;
            Artifact {
                meta,
                n,
                total,
                zipf: Some(zipf),
                zipf_loglog: loglog,
                exponential: Some(exponential),
                selection: Some(SelectionSummary { verdict, delta_aic }),
            }
        }
    };
    write_artifact(output, &to_json(&artifact)?)?;
    Ok(0)
}

fn resolve_base(base: Option<usize>, table: &table_io::LoadedTable) -> Result<usize, CliError> {
    match base {
        Some(b) => check_cli_base(b),
        None => {
            let mut tokens = Vec::with_capacity(table.rows.len());
            for row in &table.rows {
                tokens.push(row.token.as_deref().ok_or_else(|| {
                    CliError::new(2, "cannot infer the base: table has no token column".into())
                })?);
            }
            infer_base(tokens)
        }
    }
}

fn cmd_classify(
    table_path: &str,
    base: Option<usize>,
    min_r2: f64,
    alpha_tol: f64,
    format: Option<Format>,
    output: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    if format == Some(Format::Csv) {
        return Err(CliError::new(2, "classify reports are json; drop --format csv".into()));
    }
    let table = table_io::load_table(table_path)?;
    let base = resolve_base(base, &table)?;
    let dist = table.distribution()?;
    let profile = table.lengths()?;
    let thresholds = ClassThresholds {
        min_r2,
        alpha_tolerance: alpha_tol,
    };
    let report =
        assess_class_membership(&dist, &profile, base, thresholds).map_err(fit_error)?;
    let degenerate = report.tau.is_none();

    #[derive(Serialize)]
    struct Artifact<'a> {
        meta: Meta,
        report: &'a ranklaw::ClassMembershipReport,
    }
    let artifact = Artifact {
        meta: Meta::new(format!(
            "classify --base {base} --min-r2 {min_r2} --alpha-tol {alpha_tol} {table_path}"
        )),
        report: &report,
    };
    write_artifact(output, &to_json(&artifact)?)?;
    // a uniform distribution cannot be ranked against its lengths at all
    Ok(if degenerate { 4 } else { 0 })
}

fn cmd_simulate(
    alphabet_size: usize,
    p_space: f64,
    tokens: u64,
    seed: u64,
    format: Option<Format>,
    output: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    if format.is_some() {
        return Err(CliError::new(2, "simulate emits a plain token stream; drop --format".into()));
    }
    if tokens == 0 {
        return Err(CliError::new(2, "--tokens must be at least 1".into()));
    }
    let params = RandomTypingParams::new(alphabet_size, p_space, seed)
        .map_err(|e| CliError::new(2, e.to_string()))?;

    let stream = TokenStream::new(&params).take(tokens as usize);
    let sink: Box<dyn Write> = match output {
        Some(path) => Box::new(
            fs::File::create(path)
                .map_err(|e| CliError::new(2, format!("writing {}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    for token in stream {
        writeln!(sink, "{token}")
            .map_err(|e| CliError::new(2, format!("writing token stream: {e}")))?;
    }
    sink.flush()
        .map_err(|e| CliError::new(2, format!("writing token stream: {e}")))?;

    #[derive(Serialize)]
    struct Artifact {
        meta: Meta,
        simulation: SimulationMetadata,
    }
    let artifact = Artifact {
        meta: Meta::new(format!(
            "simulate --alphabet-size {alphabet_size} --p-space {p_space} --tokens {tokens} --seed {seed}"
        )),
        simulation: SimulationMetadata::new(&params, tokens as usize),
    };
    let json = serde_json::to_string(&artifact)
        .map_err(|e| CliError::new(2, format!("encoding metadata: {e}")))?;
    eprintln!("{json}");
    Ok(0)
}

fn cmd_codes(
    scheme: SchemeArg,
    upto: usize,
    alphabet: &str,
    format: Option<Format>,
    output: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    if format == Some(Format::Csv) {
        return Err(CliError::new(2, "codes emits a tab-separated table or json; drop --format csv".into()));
    }
    if upto == 0 {
        return Err(CliError::new(2, "--upto must be at least 1".into()));
    }
    let alphabet: Alphabet = alphabet
        .parse()
        .map_err(|e| CliError::new(2, format!("--alphabet: {e}")))?;

    let (scheme_name, table) = match scheme {
        SchemeArg::EliasGamma => {
            if alphabet.size() != 2 {
                return Err(CliError::new(
                    2,
                    format!("elias-gamma needs a binary alphabet, got {} symbols", alphabet.size()),
                ));
            }
            let codes: Result<Vec<String>, _> = (1..=upto as u64)
                .map(|rank| elias_gamma_encode(rank, &alphabet))
                .collect();
            let codes = codes.map_err(|e| CliError::new(2, e.to_string()))?;
            let table = CodeTable::new(alphabet, codes)
                .map_err(|e| CliError::new(2, e.to_string()))?;
            ("elias-gamma", table)
        }
        SchemeArg::Nonsingular => ("nonsingular", enumerate_nonsingular_codes(upto, &alphabet)),
    };

    let kraft = kraft_sum(&table);
    let nonsingular = is_nonsingular(&table);
    let decodable = is_uniquely_decodable(&table)
        .map_err(|e| CliError::new(4, e.to_string()))?;
    let alphabet_text: String = table.alphabet().symbols().iter().collect();
    let meta = Meta::new(format!(
        "codes --scheme {scheme_name} --upto {upto} --alphabet {alphabet_text}"
    ));

    let bytes = match format {
        None => {
            let mut text = meta.comment_block();
            text.push_str(&table.to_tsv());
            text.push_str(&format!(
                "# kraft_sum: {kraft}\n# nonsingular: {nonsingular}\n# uniquely_decodable: {decodable}\n"
            ));
            text.into_bytes()
        }
        Some(Format::Json) => {
            #[derive(Serialize)]
            struct Entry<'a> {
                rank: usize,
                code: &'a str,
            }
            #[derive(Serialize)]
            struct Artifact<'a> {
                meta: &'a Meta,
                scheme: SchemeKind,
                alphabet: &'a str,
                entries: Vec<Entry<'a>>,
                kraft_sum: f64,
                nonsingular: bool,
                uniquely_decodable: bool,
            }
            let artifact = Artifact {
                meta: &meta,
                scheme: match scheme {
                    SchemeArg::EliasGamma => SchemeKind::UniquelyDecodable,
                    SchemeArg::Nonsingular => SchemeKind::NonSingular,
                },
                alphabet: &alphabet_text,
                entries: table
                    .codes()
                    .iter()
                    .enumerate()
                    .map(|(i, code)| Entry {
                        rank: i + 1,
                        code,
                    })
                    .collect(),
                kraft_sum: kraft,
                nonsingular,
                uniquely_decodable: decodable,
            };
            to_json(&artifact)?
        }
        Some(Format::Csv) => unreachable!(),
    };
    write_artifact(output, &bytes)?;
    Ok(0)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::new(2, format!("encoding report: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}
