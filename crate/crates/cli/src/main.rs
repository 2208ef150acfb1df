use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wqc_core::analysis::{
    no_dominant_profile, realize_profile, search_counterexamples, verify_conjectures, verify_conjectures_table,
    ProfileSpec,
};
use wqc_core::approx::{best_input_tree, derandomized_one_third, half_approximation};
use wqc_core::exact::{decide, solve_exact};
use wqc_core::fpt::{solve_fpt, Budget};
use wqc_core::quartets::{quartet_distance, InputData, WqcInstance};
use wqc_core::reduction::{
    build_gadget, evaluate_candidate, extract_ordering, satisfies, CyclicOrderingInstance, GadgetInstance,
    GadgetSidecar, DEFAULT_W_SIZE,
};
use wqc_core::tree::parse_newick;

#[derive(Parser)]
#[command(name = "wqc", version, about = "Weighted quartet consensus toolkit")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Aligned tables instead of JSON lines.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Number of input quartets a tree displays.
    Score {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        tree: String,
    },
    /// Pairwise quartet distances between the input trees.
    Distance {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// A consensus tree by the chosen method.
    Consensus {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        budget: OptionalBudget,
    },
    /// Exhaustive optimum, or the decision version with a threshold.
    Exact {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        threshold: Option<u64>,
    },
    /// Bounded search from the dominant quartets.
    Fpt {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        budget_d: u64,
        #[arg(long)]
        budget_k2: u64,
        #[arg(long)]
        budget_k3: u64,
    },
    /// Gadget instance from a cyclic-ordering instance; writes OUT and
    /// OUT.json.
    GenCyclic {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_W_SIZE, value_parser = parse_w_size)]
        w_size: usize,
    },
    /// Quartet breakdown of a candidate tree against a gadget.
    VerifyGadget {
        #[arg(short, long)]
        gadget: PathBuf,
        #[arg(short, long)]
        tree: String,
    },
    /// Conjecture checks and counterexample search.
    #[command(subcommand)]
    Lab(Lab),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    BestTree,
    Derand,
    Half,
    Exact,
    Fpt,
}

#[derive(Args)]
struct OptionalBudget {
    /// Budget for `--method fpt`; omitted components are unbounded.
    #[arg(long)]
    budget_d: Option<u64>,
    #[arg(long)]
    budget_k2: Option<u64>,
    #[arg(long)]
    budget_k3: Option<u64>,
}

#[derive(Subcommand)]
enum Lab {
    /// Evaluates the five conjectures on an instance.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Finds multiplicities realizing a frequency profile.
    Realize {
        /// Profile as JSON; the built-in no-dominant profile when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Writes the realized instance here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Random instances that falsify a conjecture.
    Search {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        conjecture: u8,
        #[arg(short, long, value_parser = clap::value_parser!(u64).range(4..=10))]
        n: u64,
        #[arg(short, long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Extra instance files checked before the random ones.
        #[arg(long)]
        include: Vec<PathBuf>,
    },
}

fn parse_w_size(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(w) if w >= 1 => Ok(w),
        _ => Err("expected an integer >= 1".into()),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn input(path: &Path) -> Result<InputData> {
    Ok(InputData::parse(&read(path)?)?)
}

fn instance(path: &Path) -> Result<WqcInstance> {
    match input(path)? {
        InputData::Instance(i) => Ok(i),
        InputData::Table(_) => bail!("{} is a frequency table; this command needs input trees", path.display()),
    }
}

fn sidecar_path(gadget: &Path) -> PathBuf {
    let mut s = gadget.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

struct Out {
    pretty: bool,
    buf: String,
}

impl Out {
    fn record<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let v = serde_json::to_value(value)?;
        if self.pretty {
            if !self.buf.is_empty() {
                self.buf.push('\n');
            }
            self.buf.push_str(&aligned(&v));
        } else {
            self.buf.push_str(&serde_json::to_string(&v)?);
            self.buf.push('\n');
        }
        Ok(())
    }

    fn table(&mut self, header: &[String], rows: &[Vec<String>]) {
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for r in rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            self.buf.push_str(cells.join("  ").trim_end());
            self.buf.push('\n');
        }
    }
}

/// One `key  value` line per top-level field.
fn aligned(v: &Value) -> String {
    let Value::Object(map) = v else {
        return format!("{v}\n");
    };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    map.iter()
        .map(|(k, v)| {
            let shown = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            format!("{k:<width$}  {shown}\n")
        })
        .collect()
}

fn run(cli: Cli, out: &mut Out) -> Result<()> {
    match cli.command {
        Command::Score { input: path, tree } => {
            let table = input(&path)?.table();
            let t = parse_newick(&tree, Some(table.taxa().clone()))?;
            let score = table.score(&t)?;
            out.record(&json!({ "newick": t.to_newick(), "score": score, "cost": table.total() - score }))?;
        }
        Command::Distance { input: path } => {
            let inst = instance(&path)?;
            let trees = inst.trees();
            let matrix: Vec<Vec<u64>> = trees
                .iter()
                .map(|(a, _)| trees.iter().map(|(b, _)| quartet_distance(a, b)).collect())
                .collect::<wqc_core::Result<_>>()?;
            if out.pretty {
                let header: Vec<String> =
                    std::iter::once(String::new()).chain((1..=trees.len()).map(|i| i.to_string())).collect();
                let rows: Vec<Vec<String>> = matrix
                    .iter()
                    .enumerate()
                    .map(|(i, r)| std::iter::once((i + 1).to_string()).chain(r.iter().map(u64::to_string)).collect())
                    .collect();
                out.table(&header, &rows);
            } else {
                let newicks: Vec<String> = trees.iter().map(|(t, _)| t.to_newick()).collect();
                let mults: Vec<u64> = trees.iter().map(|(_, m)| *m).collect();
                out.record(&json!({ "trees": newicks, "multiplicities": mults, "matrix": matrix }))?;
            }
        }
        Command::Consensus { input: path, method, budget } => {
            if !matches!(method, Method::Fpt)
                && (budget.budget_d.is_some() || budget.budget_k2.is_some() || budget.budget_k3.is_some())
            {
                bail!("budget flags apply only to --method fpt");
            }
            match method {
                Method::BestTree => out.record(&best_input_tree(&instance(&path)?)?.summary())?,
                Method::Half => out.record(&half_approximation(&instance(&path)?)?.summary())?,
                Method::Derand => out.record(&derandomized_one_third(&input(&path)?.table())?.summary())?,
                Method::Exact => out.record(&solve_exact(&input(&path)?.table())?.summary())?,
                Method::Fpt => {
                    let b = Budget::new(
                        budget.budget_d.unwrap_or(u64::MAX),
                        budget.budget_k2.unwrap_or(u64::MAX),
                        budget.budget_k3.unwrap_or(u64::MAX),
                    );
                    out.record(&solve_fpt(&input(&path)?.table(), b)?.summary())?
                }
            }
        }
        Command::Exact { input: path, threshold } => {
            let table = input(&path)?.table();
            match threshold {
                None => out.record(&solve_exact(&table)?.summary())?,
                Some(q) => {
                    let d = decide(&table, q)?;
                    out.record(&json!({
                        "holds": d.holds,
                        "threshold": q,
                        "optimum_score": d.optimum_score,
                        "witness": d.witness.map(|t| t.to_newick()),
                    }))?;
                }
            }
        }
        Command::Fpt { input: path, budget_d, budget_k2, budget_k3 } => {
            let table = input(&path)?.table();
            out.record(&solve_fpt(&table, Budget::new(budget_d, budget_k2, budget_k3))?.summary())?;
        }
        Command::GenCyclic { input: path, output, w_size } => {
            let co = CyclicOrderingInstance::parse(&read(&path)?)?;
            let g = build_gadget(&co, w_size)?;
            let side = sidecar_path(&output);
            fs::write(&output, g.wqc.to_text()).with_context(|| format!("writing {}", output.display()))?;
            fs::write(&side, serde_json::to_string_pretty(&g.sidecar())? + "\n")
                .with_context(|| format!("writing {}", side.display()))?;
            out.record(&json!({
                "instance": output.display().to_string(),
                "sidecar": side.display().to_string(),
                "trees": g.wqc.trees().len(),
                "taxa": g.taxa().len(),
                "K": g.k_value,
                "O": g.o_bound,
                "threshold": g.threshold,
            }))?;
        }
        Command::VerifyGadget { gadget, tree } => {
            let inst = WqcInstance::parse(&read(&gadget)?)?;
            let side: GadgetSidecar = serde_json::from_str(&read(&sidecar_path(&gadget))?)
                .with_context(|| format!("parsing {}", sidecar_path(&gadget).display()))?;
            let g = GadgetInstance::from_parts(&inst, &side)?;
            let m = parse_newick(&tree, Some(g.taxa().clone()))?;
            let r = evaluate_candidate(&g, &m)?;
            let ordering = extract_ordering(&g, &m);
            let satisfied = match &ordering {
                Some(o) => Some(satisfies(o, &g.co)?.satisfied),
                None => None,
            };
            let mut v = serde_json::to_value(r)?;
            v["ordering"] = json!(ordering);
            v["ordering_satisfies"] = json!(satisfied);
            out.record(&v)?;
        }
        Command::Lab(Lab::Verify { input: path }) => {
            let reports = match input(&path)? {
                InputData::Instance(i) => verify_conjectures(&i)?,
                InputData::Table(t) => verify_conjectures_table(&t)?,
            };
            for r in &reports {
                out.record(r)?;
            }
        }
        Command::Lab(Lab::Realize { spec, output }) => {
            let spec: ProfileSpec = match spec {
                Some(p) => serde_json::from_str(&read(&p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => no_dominant_profile(),
            };
            let found = realize_profile(&spec)?;
            if let (Some(inst), Some(o)) = (&found, &output) {
                fs::write(o, inst.to_text()).with_context(|| format!("writing {}", o.display()))?;
            }
            let trees: Option<Vec<Value>> = found.as_ref().map(|i| {
                i.trees().iter().map(|(t, m)| json!({ "newick": t.to_newick(), "multiplicity": m })).collect()
            });
            out.record(&json!({ "found": found.is_some(), "k": spec.k, "trees": trees }))?;
        }
        Command::Lab(Lab::Search { conjecture, n, k, trials, seed, include }) => {
            let extra = include.iter().map(|p| instance(p)).collect::<Result<Vec<_>>>()?;
            for r in search_counterexamples(conjecture, n as usize, k as usize, trials, seed, &extra)? {
                out.record(&r)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let mut out = Out { pretty: cli.pretty, buf: String::new() };
    match run(cli, &mut out) {
        Ok(()) => {
            print!("{}", out.buf);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
