use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meaningbank::bank::{stats_tsv, Bank, DocId, Layer};
use meaningbank::config::PipelineConfig;
use meaningbank::formats;
use meaningbank::models::{ModelSet, Models};
use meaningbank::pipeline;
use meaningbank::service::{self, AppState};
use meaningbank::synthetic;
use meaningbank_core::category::Category;
use meaningbank_core::composer::compose;
use meaningbank_core::projector::{parse_alignment_file, project, ProjectConfig, ProjectionStatus, SentencePair, leaf_annotations};
use meaningbank_core::segmenter::{labels_to_string, parse_labels, SegmenterModel, TrainConfig};
use meaningbank_core::semtagger::{default_tagset, train_lexicon};
use meaningbank_core::token::{Lang, Token};

#[derive(Parser)]
#[command(name = "meaningbank", version, about = "Cross-lingual CCG/DRS annotation pipeline and bank")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, env = "MEANINGBANK_CONFIG")]
    config: Option<PathBuf>,
    /// Language; overrides the configured one.
    #[arg(long, global = true)]
    lang: Option<Lang>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Io {
    /// Document directory holding `{lang}.{raw,tok,...}` files. Inputs
    /// default to files there and the output is written there too.
    #[arg(long)]
    dir: Option<PathBuf>,
    /// Output file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BankArgs {
    /// Bank root directory.
    #[arg(long, env = "MEANINGBANK_HOME")]
    bank: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Raw text to tokens.
    Segment {
        #[command(flatten)]
        io: Io,
        /// Raw text file; stdin by default.
        input: Option<PathBuf>,
        /// Print character labels instead of tokens.
        #[arg(long)]
        labels: bool,
    },
    /// Tokens to semantic tags.
    Semtag {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        tokens: Option<PathBuf>,
    },
    /// Tokens and semtags to symbols.
    Symbolize {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        tokens: Option<PathBuf>,
        #[arg(long)]
        semtags: Option<PathBuf>,
    },
    /// Annotated tokens to CCG derivations.
    Parse {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        layers: LayerInputs,
    },
    /// Annotated tokens (or derivations) to clausal DRSs.
    Interpret {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        layers: LayerInputs,
        /// Derivation file to interpret instead of the token layers.
        #[arg(long)]
        derivations: Option<PathBuf>,
    },
    /// Projects English derivations onto a translation.
    Project {
        #[command(flatten)]
        io: Io,
        /// English derivations, one per sentence.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Target tokens.
        #[arg(long)]
        tokens: Option<PathBuf>,
        /// Word alignments, one line of `i-j` pairs per sentence.
        #[arg(long)]
        alignment: Option<PathBuf>,
        /// Check that the target DRS equals the source DRS and print the verdict.
        #[arg(long)]
        verify: bool,
    },
    /// Shows layer statuses of a bank document, or marks a layer gold.
    Status {
        #[command(flatten)]
        bank: BankArgs,
        /// Document as `part/doc`, e.g. `00/3178`.
        #[arg(long)]
        doc: String,
        #[arg(long)]
        layer: Option<String>,
        #[arg(long, conflicts_with = "ungold", requires = "layer")]
        gold: bool,
        #[arg(long, requires = "layer")]
        ungold: bool,
        #[arg(long, default_value = "cli")]
        annotator: String,
    },
    /// Gold/silver/bronze document counts per layer and language.
    Stats {
        #[command(flatten)]
        bank: BankArgs,
    },
    /// Trains a segmenter model.
    TrainSegmenter {
        /// Training data, `text<TAB>labels` per line.
        #[arg(long, required_unless_present = "synthetic")]
        corpus: Option<PathBuf>,
        /// Train on this many generated sentences instead.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value_t = 8)]
        epochs: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Builds a tag lexicon from `lang<TAB>surface<TAB>semtag` lines.
    TrainLexicon {
        input: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Adds the raw text of one language to a bank document.
    Import {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long)]
        doc: String,
        input: Option<PathBuf>,
        /// Word alignment file to store with a translation.
        #[arg(long)]
        alignment: Option<PathBuf>,
    },
    /// Reruns the pipeline for a bank document and lists new conflicts.
    Reannotate {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long)]
        doc: String,
    },
    /// Serves the bank over HTTP.
    Serve {
        #[command(flatten)]
        bank: BankArgs,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
    },
}

#[derive(Args, Clone)]
struct LayerInputs {
    #[arg(long)]
    tokens: Option<PathBuf>,
    #[arg(long)]
    semtags: Option<PathBuf>,
    #[arg(long)]
    symbols: Option<PathBuf>,
    /// Categories; looked up in the category lexicon when absent.
    #[arg(long)]
    categories: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Pipeline(String),
}

type Outcome<T> = Result<T, Failure>;

fn usage(m: impl Into<String>) -> Failure {
    Failure::Usage(m.into())
}

fn failed(m: impl std::fmt::Display) -> Failure {
    Failure::Pipeline(m.to_string())
}

fn read_file(p: &Path) -> Outcome<String> {
    fs::read_to_string(p).map_err(|e| usage(format!("{}: {}", p.display(), e)))
}

fn read_input(p: Option<&Path>) -> Outcome<String> {
    match p {
        Some(p) => read_file(p),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| usage(e.to_string()))?;
            Ok(s)
        }
    }
}

struct Ctx {
    lang: Lang,
    config: PipelineConfig,
}

impl Ctx {
    fn models(&self) -> Outcome<Models> {
        Models::load(&self.config).map_err(|e| usage(e.to_string()))
    }

    /// An explicit path, else `{dir}/{lang}.{ext}`.
    fn path(&self, io: &Io, explicit: &Option<PathBuf>, ext: &str) -> Option<PathBuf> {
        explicit
            .clone()
            .or_else(|| io.dir.as_ref().map(|d| d.join(format!("{}.{}", self.lang.code(), ext))))
    }

    fn required(&self, io: &Io, explicit: &Option<PathBuf>, ext: &str, flag: &str) -> Outcome<PathBuf> {
        self.path(io, explicit, ext)
            .ok_or_else(|| usage(format!("--{} or --dir is required", flag)))
    }

    fn write(&self, io: &Io, ext: &str, text: &str) -> Outcome<()> {
        let target = io
            .output
            .clone()
            .or_else(|| io.dir.as_ref().map(|d| d.join(format!("{}.{}", self.lang.code(), ext))));
        match target {
            Some(p) => fs::write(&p, text).map_err(|e| failed(format!("{}: {}", p.display(), e))),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes()).map_err(failed)?;
                out.flush().map_err(failed)
            }
        }
    }
}

fn read_values(p: &Path) -> Outcome<Vec<String>> {
    formats::read_token_values(&read_file(p)?).map_err(|e| failed(format!("{}: {}", p.display(), e)))
}

fn read_sentences(p: &Path) -> Outcome<Vec<Vec<Token>>> {
    formats::read_tokens(&read_file(p)?).map_err(|e| failed(format!("{}: {}", p.display(), e)))
}

fn check_len(what: &str, values: &[String], n: usize) -> Outcome<()> {
    if values.len() != n {
        return Err(failed(format!("{} has {} entries for {} tokens", what, values.len(), n)));
    }
    Ok(())
}

/// Tokens with their semtags, symbols and categories, checked for length.
struct Layers {
    sentences: Vec<Vec<Token>>,
    semtags: Vec<String>,
    symbols: Vec<Option<String>>,
    categories: Vec<Category>,
}

fn load_layers(ctx: &Ctx, io: &Io, l: &LayerInputs, models: &Models) -> Outcome<Layers> {
    let sentences = read_sentences(&ctx.required(io, &l.tokens, "tok", "tokens")?)?;
    let n: usize = sentences.iter().map(Vec::len).sum();
    let semtags = read_values(&ctx.required(io, &l.semtags, "semtag", "semtags")?)?;
    check_len("semtag layer", &semtags, n)?;
    let symbols = read_values(&ctx.required(io, &l.symbols, "sym", "symbols")?)?;
    check_len("symbol layer", &symbols, n)?;
    let symbols: Vec<Option<String>> = symbols.iter().map(|s| formats::parse_symbol_value(s)).collect();
    let categories = match ctx.path(io, &l.categories, "cat").filter(|p| l.categories.is_some() || p.is_file()) {
        Some(p) => {
            let values = read_values(&p)?;
            check_len("category layer", &values, n)?;
            formats::parse_categories(&values).map_err(|e| failed(format!("{}: {}", p.display(), e)))?
        }
        None => {
            let flat: Vec<&Token> = sentences.iter().flatten().collect();
            pipeline::supertag(models, &flat, &semtags, &BTreeMap::new())
        }
    };
    Ok(Layers {
        sentences,
        semtags,
        symbols,
        categories,
    })
}

fn interpret_all(models: &Models, l: &Layers) -> Vec<Result<(meaningbank_core::parser::DerivNode, meaningbank_core::drs::Drs), String>> {
    pipeline::offsets(&l.sentences)
        .into_iter()
        .zip(&l.sentences)
        .map(|(base, s)| {
            let r = base..base + s.len();
            pipeline::interpret_sentence(models, s, &l.semtags[r.clone()], &l.symbols[r.clone()], &l.categories[r])
        })
        .collect()
}

fn parse_doc(s: &str) -> Outcome<DocId> {
    let (p, d) = s.split_once('/').ok_or_else(|| usage(format!("--doc must look like 00/3178, found {:?}", s)))?;
    DocId::parse(p, d).map_err(|_| usage(format!("--doc must look like 00/3178, found {:?}", s)))
}

fn open_bank(b: &BankArgs) -> Outcome<Bank> {
    Bank::open(&b.bank).map_err(failed)
}

fn run(cli: Cli) -> Outcome<()> {
    let config = match &cli.config {
        Some(p) => {
            let mut c = PipelineConfig::load(p).map_err(|e| usage(e.to_string()))?;
            if let Some(l) = cli.lang {
                c.language = l;
            }
            c
        }
        None => PipelineConfig::for_language(cli.lang.unwrap_or(Lang::En)),
    };
    let ctx = Ctx {
        lang: config.language,
        config,
    };

    match cli.command {
        Command::Segment { io, input, labels } => {
            let input = input.or_else(|| ctx.path(&io, &None, "raw").filter(|p| p.is_file()));
            let text = read_input(input.as_deref())?;
            let models = ctx.models()?;
            let (labs, sentences) = pipeline::segment(&models, &text, &[]);
            if labels {
                let mut s = labels_to_string(&labs);
                if !s.is_empty() {
                    s.push('\n');
                }
                ctx.write(&io, "labels", &s)
            } else {
                ctx.write(&io, "tok", &formats::write_tokens(&sentences))
            }
        }
        Command::Semtag { io, tokens } => {
            let models = ctx.models()?;
            let sentences = read_sentences(&ctx.required(&io, &tokens, "tok", "tokens")?)?;
            let tags = pipeline::semtag(&models, &sentences, &BTreeMap::new());
            let sizes: Vec<usize> = sentences.iter().map(Vec::len).collect();
            ctx.write(&io, "semtag", &formats::write_token_values(&sizes, &tags))
        }
        Command::Symbolize { io, tokens, semtags } => {
            let models = ctx.models()?;
            let sentences = read_sentences(&ctx.required(&io, &tokens, "tok", "tokens")?)?;
            let tags = read_values(&ctx.required(&io, &semtags, "semtag", "semtags")?)?;
            let flat: Vec<&Token> = sentences.iter().flatten().collect();
            check_len("semtag layer", &tags, flat.len())?;
            let syms = pipeline::symbolize_tokens(&models, &flat, &tags, &BTreeMap::new());
            let values: Vec<String> = syms.iter().map(|s| formats::symbol_value(s.as_deref())).collect();
            let sizes: Vec<usize> = sentences.iter().map(Vec::len).collect();
            ctx.write(&io, "sym", &formats::write_token_values(&sizes, &values))
        }
        Command::Parse { io, layers } => {
            let models = ctx.models()?;
            let l = load_layers(&ctx, &io, &layers, &models)?;
            let mut out = String::new();
            let mut errors = Vec::new();
            for (k, r) in interpret_all(&models, &l).into_iter().enumerate() {
                match r {
                    Ok((d, _)) => out.push_str(&formats::write_derivation(&d)),
                    Err(e) => {
                        out.push('-');
                        errors.push(format!("sentence {}: {}", k, e));
                    }
                }
                out.push('\n');
            }
            ctx.write(&io, "der", &out)?;
            if errors.is_empty() {
                Ok(())
            } else {
                Err(failed(errors.join("\n")))
            }
        }
        Command::Interpret { io, layers, derivations } => {
            let models = ctx.models()?;
            let mut drss = Vec::new();
            let mut errors = Vec::new();
            if let Some(p) = derivations {
                let ctx_lex = models.lexical_context();
                for (k, line) in read_file(&p)?.lines().enumerate() {
                    let r = if line.trim() == "-" {
                        Err("no derivation".to_string())
                    } else {
                        formats::read_derivation(line, &ctx_lex).and_then(|d| compose(&d).map_err(|e| e.to_string()))
                    };
                    match r {
                        Ok(d) => drss.push(Some(d)),
                        Err(e) => {
                            drss.push(None);
                            errors.push(format!("sentence {}: {}", k, e));
                        }
                    }
                }
            } else {
                let l = load_layers(&ctx, &io, &layers, &models)?;
                for (k, r) in interpret_all(&models, &l).into_iter().enumerate() {
                    match r {
                        Ok((_, d)) => drss.push(Some(d)),
                        Err(e) => {
                            drss.push(None);
                            errors.push(format!("sentence {}: {}", k, e));
                        }
                    }
                }
            }
            ctx.write(&io, "drs", &formats::write_drs_layer(&drss))?;
            if errors.is_empty() {
                Ok(())
            } else {
                Err(failed(errors.join("\n")))
            }
        }
        Command::Project {
            io,
            source,
            tokens,
            alignment,
            verify,
        } => {
            if ctx.lang == Lang::En {
                return Err(usage("--lang must name the target language"));
            }
            let models = ctx.models()?;
            let en = Models::shipped(Lang::En);
            let src_path = source
                .clone()
                .or_else(|| io.dir.as_ref().map(|d| d.join("en.der")))
                .ok_or_else(|| usage("--source or --dir is required"))?;
            let lex = en.lexical_context();
            let mut src = Vec::new();
            for line in read_file(&src_path)?.lines() {
                src.push(formats::read_derivation(line, &lex).map_err(|e| failed(format!("{}: {}", src_path.display(), e)))?);
            }
            let tok_path = ctx.path(&io, &tokens, "tok");
            let sentences = match tok_path.filter(|p| tokens.is_some() || p.is_file()) {
                Some(p) => read_sentences(&p)?,
                None => {
                    let raw = ctx.required(&io, &None, "raw", "tokens")?;
                    pipeline::segment(&models, &read_file(&raw)?, &[]).1
                }
            };
            let al_path = ctx.required(&io, &alignment, "align", "alignment")?;
            let al = parse_alignment_file(read_file(&al_path)?.trim_end_matches('\n')).map_err(|e| failed(format!("{}: {}", al_path.display(), e)))?;
            if src.len() != sentences.len() || al.len() != sentences.len() {
                return Err(failed(format!(
                    "{} source derivations, {} target sentences and {} alignment lines",
                    src.len(),
                    sentences.len(),
                    al.len()
                )));
            }
            let cfg = ProjectConfig {
                tagset: &models.tagset,
                resources: &models.resources,
                inventory: models.inventory.clone(),
                crossed_composition: models.config.crossed_composition,
                verify,
            };
            let mut semtags = Vec::new();
            let mut symbols = Vec::new();
            let mut cats = Vec::new();
            let mut der = String::new();
            let mut drss = Vec::new();
            let mut verdicts = String::new();
            let mut any_failed = false;
            for ((d, tgt), pairs) in src.iter().zip(&sentences).zip(al) {
                let drs = compose(d).map_err(|e| failed(format!("source: {}", e)))?;
                let pair = SentencePair {
                    source: leaf_annotations(d),
                    derivation: d.clone(),
                    drs,
                    target: tgt.clone(),
                    target_lang: ctx.lang,
                    alignment: pairs,
                };
                let r = project(&pair, &cfg);
                any_failed |= matches!(r.status, ProjectionStatus::Failed(_));
                verdicts.push_str(&format!("{}\n", r.status));
                if r.tokens.len() == tgt.len() {
                    for t in &r.tokens {
                        semtags.push(t.semtag.clone());
                        symbols.push(formats::symbol_value(t.symbol.as_deref()));
                        cats.push(t.category.to_string());
                    }
                } else {
                    for _ in tgt {
                        semtags.push("UNK".into());
                        symbols.push("-".into());
                        cats.push("N".into());
                    }
                }
                der.push_str(&r.derivation.as_ref().map(formats::write_derivation).unwrap_or_else(|| "-".into()));
                der.push('\n');
                drss.push(r.drs);
            }
            if let Some(dir) = &io.dir {
                let sizes: Vec<usize> = sentences.iter().map(Vec::len).collect();
                let code = ctx.lang.code();
                let files = [
                    ("tok", formats::write_tokens(&sentences)),
                    ("semtag", formats::write_token_values(&sizes, &semtags)),
                    ("sym", formats::write_token_values(&sizes, &symbols)),
                    ("cat", formats::write_token_values(&sizes, &cats)),
                    ("der", der.clone()),
                    ("drs", formats::write_drs_layer(&drss)),
                ];
                for (ext, text) in files {
                    let p = dir.join(format!("{}.{}", code, ext));
                    fs::write(&p, text).map_err(|e| failed(format!("{}: {}", p.display(), e)))?;
                }
            }
            let report = if verify { verdicts } else { der };
            let mut out = io::stdout().lock();
            out.write_all(report.as_bytes()).map_err(failed)?;
            if verify && any_failed {
                return Err(Failure::Pipeline(String::new()));
            }
            Ok(())
        }
        Command::Status {
            bank,
            doc,
            layer,
            gold,
            ungold,
            annotator,
        } => {
            let bank = open_bank(&bank)?;
            let id = parse_doc(&doc)?;
            let layers: Vec<Layer> = match &layer {
                Some(l) => vec![Layer::parse(l).ok_or_else(|| usage(format!("unknown layer {:?}", l)))?],
                None => Layer::ALL.into_iter().filter(|l| l.accepts_bows()).collect(),
            };
            let langs = match cli.lang {
                Some(l) => vec![l],
                None => bank.languages(id),
            };
            if langs.is_empty() {
                return Err(failed(format!("no document {}", id)));
            }
            let mut out = String::new();
            for l in langs {
                for y in &layers {
                    let status = if gold || ungold {
                        bank.set_gold(id, l, *y, gold, &annotator).map_err(failed)?
                    } else {
                        bank.layer(id, l, *y).map_err(failed)?.status
                    };
                    out.push_str(&format!("{}\t{}\t{}\n", l, y, status));
                }
            }
            print!("{}", out);
            Ok(())
        }
        Command::Stats { bank } => {
            let bank = open_bank(&bank)?;
            print!("{}", stats_tsv(&bank.stats().map_err(failed)?));
            Ok(())
        }
        Command::TrainSegmenter {
            corpus,
            synthetic: n,
            epochs,
            seed,
            output,
        } => {
            let data = match (corpus, n) {
                (Some(p), _) => {
                    let mut data = Vec::new();
                    for (k, line) in read_file(&p)?.lines().enumerate() {
                        if line.is_empty() || line.starts_with('#') {
                            continue;
                        }
                        let (text, labels) = line
                            .rsplit_once('\t')
                            .ok_or_else(|| failed(format!("{} line {}: expected text<TAB>labels", p.display(), k + 1)))?;
                        let labels = parse_labels(labels).map_err(|e| failed(format!("{} line {}: {}", p.display(), k + 1, e)))?;
                        data.push((text.to_string(), labels));
                    }
                    data
                }
                (None, Some(n)) => synthetic::corpus(ctx.lang, n, seed),
                (None, None) => return Err(usage("--corpus or --synthetic is required")),
            };
            let model = SegmenterModel::train(&data, &TrainConfig { epochs, seed }).map_err(failed)?;
            write_out(output.as_deref(), &model.to_text())
        }
        Command::TrainLexicon { input, output } => {
            let text = read_input(input.as_deref())?;
            let tagset = match &ctx.config.models.tagset {
                Some(p) => formats::read_tagset(&read_file(p)?).map_err(|e| usage(e.to_string()))?,
                None => default_tagset(),
            };
            let data = formats::read_annotated(&text).map_err(failed)?;
            let lex = train_lexicon(&data, &tagset).map_err(failed)?;
            write_out(output.as_deref(), &formats::write_tag_lexicon(&lex))
        }
        Command::Import {
            bank,
            doc,
            input,
            alignment,
        } => {
            let bank = open_bank(&bank)?;
            let id = parse_doc(&doc)?;
            let text = read_input(input.as_deref())?;
            bank.put_raw(id, ctx.lang, &text).map_err(failed)?;
            if let Some(p) = alignment {
                let lines: Vec<String> = read_file(&p)?.lines().map(String::from).collect();
                bank.put_alignment(id, ctx.lang, &lines).map_err(failed)?;
            }
            Ok(())
        }
        Command::Reannotate { bank, doc } => {
            let bank = open_bank(&bank)?;
            let id = parse_doc(&doc)?;
            let mut models = ModelSet::shipped();
            models.insert(ctx.models()?);
            let conflicts = bank.reannotate(id, ctx.lang, &models).map_err(failed)?;
            for c in conflicts {
                println!("{}\t{}\t{}\t{}\t{}\t{}", c.id, c.lang, c.layer, c.position, c.gold_value, c.new_value);
            }
            Ok(())
        }
        Command::Serve { bank, addr } => {
            let bank = open_bank(&bank)?;
            let mut models = ModelSet::shipped();
            if cli.config.is_some() {
                models.insert(ctx.models()?);
            }
            let rt = tokio::runtime::Runtime::new().map_err(failed)?;
            eprintln!("serving {} on http://{}", bank.root().display(), addr);
            rt.block_on(service::serve(addr, AppState::new(bank, models))).map_err(failed)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| failed(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {}", m);
            ExitCode::from(2)
        }
        Err(Failure::Pipeline(m)) => {
            if !m.is_empty() {
                eprintln!("error: {}", m);
            }
            ExitCode::from(1)
        }
    }
}
