use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use multiq::ansatz::{allocate_symbols, compile, BlankImages, ImageEncoder, QubitMap};
use multiq::data::{generate, image_ids, load_dataset, load_features, synthetic_features, Task};
use multiq::diagram::{attach_comparison, build_diagram, canonical_form, ModelKind};
use multiq::experiment::{convergence_report, run_experiment, ConfigOverrides};
use multiq::grammar::{parse_sentence, Lexicon};
use multiq::simulator::{evaluate, StateVector};
use multiq::training::ParamStore;

type BoxError = Box<dyn std::error::Error>;

#[derive(Parser)]
#[command(name = "multiq", version, about = "Compositional quantum text-image matching")]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "info")]
    log: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model over several seeds.
    Train(TrainArgs),
    /// Show the pregroup parse of a sentence.
    Parse(SentenceArgs),
    /// Print the diagram of a sentence as JSON.
    Diagram(DiagramArgs),
    /// Compile a sentence+image pairing and evaluate it at initial parameters.
    Compile(CompileArgs),
    /// Feature-file utilities.
    Features {
        #[command(subcommand)]
        command: FeaturesCommand,
    },
    /// Dataset utilities.
    Data {
        #[command(subcommand)]
        command: DataCommand,
    },
    /// Aggregate per-seed metrics into convergence.csv.
    Report {
        /// Output directory of a `train` run.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long, conflicts_with = "synthetic_seed")]
    features: Option<PathBuf>,
    #[arg(long)]
    synthetic_seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "batch")]
    batch_size: Option<usize>,
    /// Comma-separated, e.g. 1,2,3,4,5.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Stability offset per epoch (A = value · epochs).
    #[arg(long)]
    stability_per_epoch: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SentenceArgs {
    sentence: String,
    #[arg(long, default_value = "data/lexicon.tsv")]
    lexicon: PathBuf,
}

#[derive(Args)]
struct DiagramArgs {
    #[command(flatten)]
    sentence: SentenceArgs,
    #[arg(long, default_value = "cat")]
    model: ModelKind,
    /// Attach the comparison box for this image.
    #[arg(long)]
    image: Option<String>,
    /// Print the canonical form.
    #[arg(long)]
    canonical: bool,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    sentence: SentenceArgs,
    #[arg(long, default_value = "cat")]
    model: ModelKind,
    #[arg(long, default_value = "image")]
    image: String,
    /// Feature CSV; blank (all-zero) image angles when absent.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Seed for the parameter initialisation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the nonzero amplitudes after every gate.
    #[arg(long)]
    trace_state: bool,
}

#[derive(Subcommand)]
enum FeaturesCommand {
    /// Write synthetic features for every image of a dataset.
    Gen {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        task: Task,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum DataCommand {
    /// Regenerate the bundled lexicon and datasets.
    Gen {
        #[arg(long, default_value = "data")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log).format_timestamp(None).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), BoxError> {
    match command {
        Command::Train(args) => train(args),
        Command::Parse(args) => parse(args),
        Command::Diagram(args) => diagram(args),
        Command::Compile(args) => compile_cmd(args),
        Command::Features { command: FeaturesCommand::Gen { data, task, lexicon, seed, dim, out } } => {
            let lex_path = lexicon.unwrap_or_else(|| sibling_lexicon(&data));
            let lex = Lexicon::from_file(lex_path)?;
            let entries = load_dataset(&data, task, &lex)?;
            let ids = image_ids(&entries);
            let table = synthetic_features(ids.iter().map(String::as_str), dim, seed);
            let comment = format!("synthetic features, seed {seed}, dim {dim}, source {}", data.display());
            table.write_csv(fs::File::create(&out)?, Some(&comment))?;
            println!("wrote {} rows to {}", table.len(), out.display());
            Ok(())
        }
        Command::Data { command: DataCommand::Gen { out, seed } } => {
            fs::create_dir_all(&out)?;
            for (name, contents) in generate::bundle(seed) {
                fs::write(out.join(name), contents)?;
                println!("wrote {}", out.join(name).display());
            }
            Ok(())
        }
        Command::Report { dir } => {
            let csv = convergence_report(&dir)?;
            fs::write(dir.join("convergence.csv"), &csv)?;
            print!("{csv}");
            Ok(())
        }
    }
}

fn sibling_lexicon(data: &Path) -> PathBuf {
    data.parent().unwrap_or(Path::new(".")).join("lexicon.tsv")
}

fn train(args: TrainArgs) -> Result<(), BoxError> {
    let file = match &args.config {
        Some(p) => ConfigOverrides::from_file(p)?,
        None => ConfigOverrides::default(),
    };
    let flags = ConfigOverrides {
        model: args.model,
        task: args.task,
        data: args.data,
        lexicon: args.lexicon,
        features: args.features,
        synthetic_seed: args.synthetic_seed,
        epochs: args.epochs,
        batch_size: args.batch_size,
        a: args.a,
        c: args.c,
        stability_per_epoch: args.stability_per_epoch,
        seeds: args.seeds,
        out: args.out,
        qubits: None,
    };
    let cfg = file.merge(flags).resolve()?;
    let report = run_experiment(&cfg)?;
    for o in &report.outcomes {
        match (&o.error, o.test_accuracy) {
            (Some(e), _) => println!("seed {}: failed: {e}", o.seed),
            (None, Some(a)) => println!("seed {}: test accuracy {a:.4}", o.seed),
            (None, None) => println!("seed {}: no test entries", o.seed),
        }
    }
    if let (Some(m), Some(b)) = (report.mean_test_accuracy, report.best_test_accuracy) {
        println!("mean {m:.4}  best {b:.4}");
    }
    println!("results: {}", report.results_path.display());
    if report.outcomes.iter().any(|o| o.error.is_some()) {
        return Err("one or more seeds failed".into());
    }
    Ok(())
}

fn parse(args: SentenceArgs) -> Result<(), BoxError> {
    let lex = Lexicon::from_file(&args.lexicon)?;
    let p = parse_sentence(&args.sentence, &lex)?;
    for (t, ty) in p.tokens.iter().zip(&p.types) {
        println!("{:<16} {:<18} {}", t.word, t.category.name(), ty);
    }
    let cups: Vec<String> = p.reductions.iter().map(|l| format!("({},{})", l.left, l.right)).collect();
    println!("cups: {}", cups.join(" "));
    println!("result: {} at factor {}", p.result, p.output);
    Ok(())
}

fn diagram(args: DiagramArgs) -> Result<(), BoxError> {
    let lex = Lexicon::from_file(&args.sentence.lexicon)?;
    let p = parse_sentence(&args.sentence.sentence, &lex)?;
    let mut d = build_diagram(args.model, &p)?;
    if let Some(img) = &args.image {
        d = attach_comparison(&d, img)?;
    }
    if args.canonical {
        d = canonical_form(&d);
    }
    println!("{}", d.to_json());
    Ok(())
}

fn compile_cmd(args: CompileArgs) -> Result<(), BoxError> {
    let lex = Lexicon::from_file(&args.sentence.lexicon)?;
    let qmap = QubitMap::default();
    let images: Box<dyn ImageEncoder> = match &args.features {
        Some(p) => Box::new(load_features(p, qmap.image_dim())?),
        None => Box::new(BlankImages { dim: qmap.image_dim() }),
    };
    let p = parse_sentence(&args.sentence.sentence, &lex)?;
    let d = canonical_form(&attach_comparison(&build_diagram(args.model, &p)?, &args.image)?);
    let mut store = ParamStore::new(args.seed);
    allocate_symbols(&d, &qmap, &mut store);
    store.initialize();
    let c = compile(&d, &qmap, &store, images.as_ref())?;
    let bindings = store.radians();
    println!("{}", c.to_json());
    if args.trace_state {
        let mut s = StateVector::zero(c.n_qubits);
        for (i, g) in c.gates.iter().enumerate() {
            s.apply(g, &bindings)?;
            let nonzero: Vec<String> = s
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 1e-12)
                .map(|(k, a)| format!("{k:0w$b}:{:+.4}{:+.4}i", a.re, a.im, w = c.n_qubits.max(1)))
                .collect();
            eprintln!("{i:>4} {:?} {}", g.kind, nonzero.join(" "));
        }
    }
    let r = evaluate(&c, &bindings)?;
    println!(
        "qubits {}  params {}  p_match {:.6}  postselect weight {:.3e}{}",
        c.n_qubits,
        store.len(),
        r.p_match,
        r.postselect_weight,
        if r.vanished { "  (vanished)" } else { "" }
    );
    Ok(())
}
