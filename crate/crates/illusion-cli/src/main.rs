//! Command-line interface for majority-illusion analysis.
//!
//! Exit codes: 0 for a positive mathematical outcome (illusion holds,
//! witness found, reduction verified), 1 for a negative one, 2 for any
//! error, 3 for a `not-refuted` reduction verdict. Data goes to stdout,
//! diagnostics to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use illusion_core::cnf::{generate_2p2n, generate_3cnf, parse_dimacs, serialize_dimacs};
use illusion_core::elimination::{attach_pump, encode_2p2n, EliminationVariant};
use illusion_core::fraction::Fraction;
use illusion_core::harness::{verify_theorem1_roundtrip, verify_theorem2_witness, Verdict};
use illusion_core::io;
use illusion_core::network::{Labelling, LabelledNetwork, SocialNetwork};
use illusion_core::plurality::{plurality_illusion_report, MultiLabelling};
use illusion_core::solver::{
    decode_model, eliminate_exhaustive, eliminate_greedy, export_illusion_cnf, parse_solver_model,
    solve_one_illusion, solve_q_illusion_bruteforce, EditMode, VariableMap,
};
use illusion_core::verification::encode_q;

const EXIT_POSITIVE: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_NOT_REFUTED: u8 = 3;

#[derive(Parser)]
#[command(name = "illusion", about = "Majority-illusion analysis on labelled social networks", version)]
struct Cli {
    /// Worker-thread cap for the parallel searches (0 = rayon default).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report winners and under-illusion nodes of a labelled network.
    Analyze(AnalyzeArgs),
    /// Search for a labelling that induces a q-majority illusion.
    Search(SearchArgs),
    /// Search for an edit plan eliminating a q-majority illusion.
    Eliminate(EliminateArgs),
    /// Encode a CNF formula as a verification or elimination network.
    Encode(EncodeArgs),
    /// Run the SAT-vs-encoding round trip on one formula.
    VerifyReduction(VerifyArgs),
    /// Export the q-illusion search as DIMACS CNF plus a variable map.
    ExportCnf(ExportArgs),
    /// Decode an external solver model back into a labelling.
    IngestModel(IngestArgs),
    /// Deterministic corpus generators.
    Gen(GenArgs),
}

#[derive(Args)]
struct NetworkInput {
    /// Network file: JSON (`{"nodes": ..., "edges": ...}`) or edge-list text.
    network: PathBuf,
    /// Label sidecar (`id label` lines) for edge-list input.
    #[arg(long)]
    labels: Option<PathBuf>,
}

impl NetworkInput {
    fn load(&self) -> Result<io::NetworkDoc> {
        let text = fs::read_to_string(&self.network)
            .with_context(|| format!("reading {}", self.network.display()))?;
        if text.trim_start().starts_with('{') {
            return Ok(io::parse_network_json(&text)?);
        }
        let network = io::parse_edge_list(&text)?;
        let labels = match &self.labels {
            Some(path) => {
                let sidecar = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Some(io::parse_label_sidecar(&sidecar, network.node_count())?)
            }
            None => None,
        };
        Ok(io::NetworkDoc { network, labels })
    }

    fn load_labelled(&self) -> Result<LabelledNetwork> {
        Ok(self.load()?.labelled()?)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: NetworkInput,
    /// Threshold fraction a/b; the exit code reports whether it is met.
    #[arg(long, default_value = "1/1")]
    q: Fraction,
    /// Use plurality semantics (multi-colour labels).
    #[arg(long)]
    plurality: bool,
    /// Print a table instead of JSON.
    #[arg(long)]
    table: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SearchMethod {
    Backtrack,
    Brute,
    Cnf,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    q: Fraction,
    #[arg(long, value_enum, default_value_t = SearchMethod::Backtrack)]
    method: SearchMethod,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Both,
    Add,
    Remove,
}

impl From<ModeArg> for EditMode {
    fn from(m: ModeArg) -> EditMode {
        match m {
            ModeArg::Both => EditMode::Both,
            ModeArg::Add => EditMode::AddOnly,
            ModeArg::Remove => EditMode::RemoveOnly,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exhaustive,
    Greedy,
}

#[derive(Args)]
struct EliminateArgs {
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    q: Fraction,
    /// Edit budget.
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Exhaustive)]
    method: MethodArg,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Verify,
    Eliminate,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Mixed,
    Addition,
    Removal,
}

impl From<VariantArg> for EliminationVariant {
    fn from(v: VariantArg) -> EliminationVariant {
        match v {
            VariantArg::Mixed => EliminationVariant::Mixed,
            VariantArg::Addition => EliminationVariant::Addition,
            VariantArg::Removal => EliminationVariant::Removal,
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    /// DIMACS cnf file.
    formula: PathBuf,
    #[arg(long, value_enum)]
    target: TargetArg,
    #[arg(long, default_value = "1/1")]
    q: Fraction,
    #[arg(long, value_enum, default_value_t = VariantArg::Mixed)]
    variant: VariantArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// DIMACS cnf file.
    formula: PathBuf,
    #[arg(long)]
    theorem: u8,
    #[arg(long)]
    q: Fraction,
    #[arg(long, value_enum, default_value_t = VariantArg::Mixed)]
    variant: VariantArg,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    input: NetworkInput,
    #[arg(long)]
    q: Fraction,
    /// Where to write the variable-map JSON.
    #[arg(long)]
    map: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Variable-map JSON produced by export-cnf.
    map: PathBuf,
    /// Solver output (v-lines or bare literals).
    assignment: PathBuf,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random network (optionally with random binary labels).
    Graph {
        #[arg(long)]
        nodes: usize,
        /// Edge probability as a fraction a/b.
        #[arg(long, default_value = "1/2")]
        prob: Fraction,
        #[arg(long)]
        labelled: bool,
        #[arg(long)]
        seed: u64,
    },
    /// Random 3-CNF formula in DIMACS form.
    #[command(name = "3cnf")]
    ThreeCnf {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        clauses: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Random 2P2N formula in DIMACS form.
    #[command(name = "2p2n")]
    TwoPTwoN {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenCommand,
}

fn main() -> ExitCode {
    // Die quietly instead of panicking when stdout closes early, e.g. when
    // piped into `head`.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let one_line = e.to_string().replace('\n', " ");
            eprintln!("error: {one_line}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Analyze(args) => analyze(args),
        Command::Search(args) => search(args),
        Command::Eliminate(args) => eliminate(args),
        Command::Encode(args) => encode(args),
        Command::VerifyReduction(args) => verify_reduction(args),
        Command::ExportCnf(args) => export_cnf(args),
        Command::IngestModel(args) => ingest_model(args),
        Command::Gen(args) => gen(args),
    }
}

fn meets(count: usize, n: usize, q: Fraction) -> bool {
    count as i128 * q.denominator() as i128 >= q.numerator() as i128 * n as i128
}

fn analyze(args: AnalyzeArgs) -> Result<u8> {
    let doc = args.input.load()?;
    if args.plurality {
        let (sn, ml) = doc.multi_labelled()?;
        let report = plurality_illusion_report(&sn, &ml)?;
        if args.table {
            print_plurality_table(&sn, &ml, &report);
        } else {
            println!(
                "{}",
                serde_json::json!({
                    "global_winner": report.global_winner,
                    "under_illusion": report.under_illusion,
                    "illuded_count": report.illuded_count,
                    "fraction": report.fraction.to_string(),
                })
            );
        }
        return Ok(if meets(report.illuded_count, sn.node_count(), args.q) {
            EXIT_POSITIVE
        } else {
            EXIT_NEGATIVE
        });
    }
    let ln = doc.labelled()?;
    let report = ln.illusion_report();
    if args.table {
        print_binary_table(&ln, &report);
    } else {
        println!(
            "{}",
            serde_json::json!({
                "global_winner": report.global_winner,
                "under_illusion": report.under_illusion,
                "illuded_count": report.illuded_count,
                "fraction": report.fraction.to_string(),
                "local_winners": report.per_node_local_winner,
            })
        );
    }
    Ok(if ln.is_q_illusion(args.q) { EXIT_POSITIVE } else { EXIT_NEGATIVE })
}

fn print_binary_table(ln: &LabelledNetwork, report: &illusion_core::IllusionReport) {
    println!(
        "global winner: {}",
        report.global_winner.map_or("none".into(), |c| c.to_string())
    );
    println!("node  label  local  illuded  margin");
    for i in 0..ln.node_count() {
        println!(
            "{:>4}  {:>5}  {:>5}  {:>7}  {:>6}",
            i,
            ln.labelling().colour(i).to_string(),
            report.per_node_local_winner[i].map_or("-".into(), |c| c.to_string()),
            if report.under_illusion.contains(&i) { "yes" } else { "no" },
            ln.margin_of_victory(i).expect("node in range"),
        );
    }
    println!("illuded: {} of {} ({})", report.illuded_count, ln.node_count(), report.fraction);
}

fn print_plurality_table(
    sn: &SocialNetwork,
    ml: &MultiLabelling,
    report: &illusion_core::plurality::PluralityReport,
) {
    println!(
        "global plurality winner: {}",
        report.global_winner.map_or("none".into(), |c| c.to_string())
    );
    println!("node  label  local  illuded");
    for i in 0..sn.node_count() {
        println!(
            "{:>4}  {:>5}  {:>5}  {:>7}",
            i,
            ml.colour(i),
            report.per_node_local_winner[i].map_or("-".into(), |c| c.to_string()),
            if report.under_illusion.contains(&i) { "yes" } else { "no" },
        );
    }
    println!("illuded: {} of {} ({})", report.illuded_count, sn.node_count(), report.fraction);
}

fn search(args: SearchArgs) -> Result<u8> {
    let doc = args.input.load()?;
    let sn = doc.network;
    let witness: Option<Labelling> = match args.method {
        SearchMethod::Backtrack => {
            if args.q != Fraction::ONE {
                bail!("--method backtrack only decides q = 1; use --method brute");
            }
            solve_one_illusion(&sn)
        }
        SearchMethod::Brute => solve_q_illusion_bruteforce(&sn, args.q)?,
        SearchMethod::Cnf => {
            let (formula, map) = export_illusion_cnf(&sn, args.q)?;
            let model = illusion_core::cnf::brute_force_sat(&formula).map_err(|e| {
                anyhow!("{e}; export the CNF with `illusion export-cnf` and use an external solver")
            })?;
            model.map(|m| decode_model(&map, &m))
        }
    };
    match witness {
        Some(lab) => {
            println!("{}", io::labelling_to_json(&lab));
            Ok(EXIT_POSITIVE)
        }
        None => {
            println!("none");
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn eliminate(args: EliminateArgs) -> Result<u8> {
    let ln = args.input.load_labelled()?;
    let mode = args.mode.into();
    let plan = match args.method {
        MethodArg::Exhaustive => eliminate_exhaustive(&ln, args.q, args.k, mode)?,
        MethodArg::Greedy => eliminate_greedy(&ln, args.q, args.k, mode),
    };
    match plan {
        Some(plan) => {
            println!("{}", io::edit_plan_to_json(&plan));
            Ok(EXIT_POSITIVE)
        }
        None => {
            println!("none");
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn encode(args: EncodeArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.formula)
        .with_context(|| format!("reading {}", args.formula.display()))?;
    let f = parse_dimacs(&text)?;
    match args.target {
        TargetArg::Verify => {
            let enc = encode_q(&f, args.q)?;
            println!("{}", io::verification_encoding_to_json(&enc, None));
        }
        TargetArg::Eliminate => {
            let enc = encode_2p2n(&f, args.variant.into())?;
            let enc = if args.q.is_in_open_01() { attach_pump(&enc, args.q)? } else { enc };
            println!("{}", io::elimination_encoding_to_json(&enc));
        }
    }
    Ok(EXIT_POSITIVE)
}

fn verify_reduction(args: VerifyArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.formula)
        .with_context(|| format!("reading {}", args.formula.display()))?;
    let f = parse_dimacs(&text)?;
    let record = match args.theorem {
        1 => verify_theorem1_roundtrip(&f, args.q)?,
        2 => verify_theorem2_witness(&f, args.variant.into(), args.q)?,
        other => bail!("unknown theorem {other}; expected 1 or 2"),
    };
    println!("{}", serde_json::to_string(&record)?);
    Ok(match record.verdict {
        Verdict::Pass => EXIT_POSITIVE,
        Verdict::Fail => EXIT_NEGATIVE,
        Verdict::NotRefuted => EXIT_NOT_REFUTED,
    })
}

fn export_cnf(args: ExportArgs) -> Result<u8> {
    let doc = args.input.load()?;
    let (formula, map) = export_illusion_cnf(&doc.network, args.q)?;
    let map_json = serde_json::to_string_pretty(&map)?;
    write_atomically(&args.map, &map_json)?;
    print!("{}", serialize_dimacs(&formula));
    Ok(EXIT_POSITIVE)
}

fn ingest_model(args: IngestArgs) -> Result<u8> {
    let map: VariableMap = serde_json::from_str(
        &fs::read_to_string(&args.map).with_context(|| format!("reading {}", args.map.display()))?,
    )?;
    let text = fs::read_to_string(&args.assignment)
        .with_context(|| format!("reading {}", args.assignment.display()))?;
    let var_count = map.aux_range.1.max(map.node_vars.len() as i32 * 2) as usize;
    match parse_solver_model(&text, var_count) {
        Some(assignment) => {
            let lab = decode_model(&map, &assignment);
            println!("{}", io::labelling_to_json(&lab));
            Ok(EXIT_POSITIVE)
        }
        None => {
            println!("none");
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn gen(args: GenArgs) -> Result<u8> {
    match args.what {
        GenCommand::Graph { nodes, prob, labelled, seed } => {
            if prob.numerator() < 0 || prob > Fraction::ONE {
                bail!("--prob must lie in [0, 1]");
            }
            let edges = illusion_core::cnf::seeded_pairs(
                nodes,
                prob.numerator() as u32,
                prob.denominator() as u32,
                seed,
            );
            let sn = SocialNetwork::from_edges(nodes, &edges)?;
            let labels: Option<Vec<u32>> = labelled.then(|| {
                // Derive labels from a disjoint stream of the same seed.
                illusion_core::cnf::seeded_pairs(nodes + 1, 1, 2, seed ^ 0x9e3779b97f4a7c15)
                    .iter()
                    .fold(vec![0u32; nodes], |mut acc, &(u, v)| {
                        if v == nodes {
                            acc[u] = 1;
                        }
                        acc
                    })
            });
            println!("{}", io::network_to_json(&sn, labels.as_deref()));
        }
        GenCommand::ThreeCnf { vars, clauses, seed } => {
            print!("{}", serialize_dimacs(&generate_3cnf(vars, clauses, seed)?));
        }
        GenCommand::TwoPTwoN { vars, seed } => {
            print!("{}", serialize_dimacs(&generate_2p2n(vars, seed)?));
        }
    }
    Ok(EXIT_POSITIVE)
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
