use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Signed;

use circres::clause::CnfFormula;
use circres::flow::{find_witness, find_witness_for_clause, integralize, verify_flow, FlowAssignment};
use circres::formats::{
    parse_cres, parse_dimacs, parse_edges, parse_goal, parse_sap, write_cres, write_dimacs, write_sap,
};
use circres::generators::{gen_php, php_refutation, random_circular_proof, BipartiteGraph};
use circres::graph::ProofGraph;
use circres::sa::check_sa;
use circres::search::{circular_search, SearchError, SearchOptions, DEFAULT_GUARD_ROWS};
use circres::translate::{circular_to_sa, sa_to_circular};

#[derive(Parser)]
#[command(
    name = "circres",
    version,
    about = "Check, generate, translate and search circular resolution proofs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a proof graph admits a witnessing flow.
    Check {
        proof: PathBuf,
        /// Hypotheses; vertices labelled by these clauses become hypotheses.
        #[arg(long)]
        cnf: Option<PathBuf>,
        /// Goal clause as "lit... 0" or "empty"; defaults to the file's goal mark.
        #[arg(long)]
        goal: Option<String>,
        /// Write the proof with its witnessing flow to this path.
        #[arg(long, value_name = "PATH")]
        emit_flows: Option<PathBuf>,
        /// Also print the primitive integral flow.
        #[arg(long)]
        integral: bool,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Generate a pigeonhole CNF and its circular refutation.
    GenPhp {
        /// Complete graph with N+1 pigeons and N holes.
        #[arg(
            long,
            value_name = "N",
            conflicts_with = "graph",
            required_unless_present = "graph"
        )]
        complete: Option<u32>,
        /// Edge-list file with header "p edge <left> <right> <edges>".
        #[arg(long, value_name = "FILE")]
        graph: Option<PathBuf>,
        /// Output stem; writes <STEM>.cnf and <STEM>.cres.
        #[arg(long, short, default_value = "php")]
        out: PathBuf,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Translate between circular proofs (.cres) and Sherali-Adams proofs (.sap).
    Translate {
        direction: Direction,
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Search for a proof of bounded width.
    Search {
        cnf: PathBuf,
        /// Maximum clause width in the lattice.
        #[arg(long)]
        width: usize,
        /// Goal clause as DIMACS literals ending in 0, or "empty".
        #[arg(long, default_value = "empty")]
        goal: String,
        /// Refuse lattices whose estimated constraint count exceeds this.
        #[arg(long, default_value_t = DEFAULT_GUARD_ROWS)]
        guard_rows: usize,
        /// Skip the cluster sub-lattice and solve the full lattice directly.
        #[arg(long)]
        full: bool,
        /// Write the pruned proof with flows as .cres.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
    /// Generate a seeded random circular proof and its hypotheses.
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        vars: u32,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        /// Output stem; writes <STEM>.cnf and <STEM>.cres.
        #[arg(long, short, default_value = "random")]
        out: PathBuf,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    /// Circular proof to Sherali-Adams proof.
    C2s,
    /// Sherali-Adams proof to circular proof.
    S2c,
}

enum Status {
    Success,
    Negative,
    Guard,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check {
            proof,
            cnf,
            goal,
            emit_flows,
            integral,
            dot,
        } => check(
            &proof,
            cnf.as_deref(),
            goal.as_deref(),
            emit_flows.as_deref(),
            integral,
            dot.as_deref(),
        ),
        Command::GenPhp {
            complete,
            graph,
            out,
            dot,
        } => gen_php_cmd(complete, graph.as_deref(), &out, dot.as_deref()),
        Command::Translate {
            direction,
            input,
            out,
        } => translate(direction, &input, &out),
        Command::Search {
            cnf,
            width,
            goal,
            guard_rows,
            full,
            out,
            dot,
        } => search(
            &cnf,
            width,
            &goal,
            guard_rows,
            !full,
            out.as_deref(),
            dot.as_deref(),
        ),
        Command::GenRandom {
            seed,
            vars,
            budget,
            out,
            dot,
        } => gen_random(seed, vars, budget, &out, dot.as_deref()),
    };
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Negative) => ExitCode::from(1),
        Ok(Status::Guard) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn with_extension(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn load_cnf(path: &Path) -> Result<CnfFormula> {
    parse_dimacs(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_cres(path: &Path) -> Result<(ProofGraph, Option<FlowAssignment>)> {
    parse_cres(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write_dot(path: Option<&Path>, graph: &ProofGraph, flow: Option<&FlowAssignment>) -> Result<()> {
    match path {
        Some(p) => write(p, &graph.export_dot(flow)),
        None => Ok(()),
    }
}

fn print_proof_stats(graph: &ProofGraph) {
    println!(
        "length {} size {} width {}",
        graph.length(),
        graph.size(),
        graph.width()
    );
}

fn check(
    proof: &Path,
    cnf: Option<&Path>,
    goal: Option<&str>,
    emit_flows: Option<&Path>,
    integral: bool,
    dot: Option<&Path>,
) -> Result<Status> {
    let (mut graph, supplied) = load_cres(proof)?;
    if let Some(path) = cnf {
        let f = load_cnf(path)?;
        graph.mark_hypotheses_by_clause(f.clauses());
    }
    graph.check_structure()?;
    let report = match goal {
        Some(text) => {
            let clause = parse_goal(text).context("parsing --goal")?;
            find_witness_for_clause(&graph, &clause)?
        }
        None => find_witness(&graph)?,
    };
    print_proof_stats(&graph);
    println!(
        "balance program: {} rows, {} columns",
        report.program_rows, report.program_cols
    );
    if let (Some(flow), Some(g)) = (&supplied, report.goal) {
        let ok = verify_flow(&graph, flow, g)?;
        println!(
            "supplied flow: {}",
            if ok { "witnessing" } else { "not witnessing" }
        );
    }
    let (Some(flow), Some(g)) = (report.flow.as_ref(), report.goal) else {
        println!("NOT-WITNESSED");
        return Ok(Status::Negative);
    };
    println!("WITNESSED");
    println!("goal vertex {} balance {}", g.0 + 1, report.balances[g.0]);
    println!("flow {flow}");
    if integral {
        println!("integral flow {}", integralize(&graph, flow, g)?);
    }
    if let Some(path) = emit_flows {
        let mut annotated = graph.clone();
        annotated.set_goal(Some(g));
        write(path, &write_cres(&annotated, Some(flow)))?;
    }
    write_dot(dot, &graph, Some(flow))?;
    Ok(Status::Success)
}

fn gen_php_cmd(
    complete: Option<u32>,
    graph: Option<&Path>,
    out: &Path,
    dot: Option<&Path>,
) -> Result<Status> {
    let g = match (complete, graph) {
        (Some(0), _) => bail!("--complete needs at least one hole"),
        (Some(n), _) => BipartiteGraph::complete(n + 1, n),
        (None, Some(path)) => {
            parse_edges(&read(path)?).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, None) => bail!("give --complete N or --graph FILE"),
    };
    let cnf = gen_php(&g)?;
    let (proof, flow) = php_refutation(&g)?;
    let (cnf_path, proof_path) = (with_extension(out, "cnf"), with_extension(out, "cres"));
    write(&cnf_path, &write_dimacs(&cnf))?;
    write(&proof_path, &write_cres(&proof, Some(&flow)))?;
    write_dot(dot, &proof, Some(&flow))?;
    println!(
        "pigeons {} holes {} variables {} clauses {}",
        g.left_size(),
        g.right_size(),
        cnf.num_variables(),
        cnf.clauses().len()
    );
    print_proof_stats(&proof);
    println!("wrote {} and {}", cnf_path.display(), proof_path.display());
    Ok(Status::Success)
}

fn translate(direction: Direction, input: &Path, out: &Path) -> Result<Status> {
    match direction {
        Direction::C2s => {
            let (graph, supplied) = load_cres(input)?;
            let goal = graph.goal().context("proof has no goal mark")?;
            let flow = match supplied {
                Some(f) if verify_flow(&graph, &f, goal)? => f,
                Some(_) => bail!("supplied flow does not witness the proof"),
                None => find_witness(&graph)?
                    .flow
                    .context("proof has no witnessing flow")?,
            };
            if !graph.validate_rules()?.is_empty() {
                bail!("proof has rule violations");
            }
            let sa = circular_to_sa(&graph, &flow)?;
            let checked = check_sa(&sa)?;
            if !checked.valid {
                bail!("translated proof does not check");
            }
            write(out, &write_sap(&sa))?;
            println!(
                "length {} size {} width {} -> degree {} monomial-size {} terms {}",
                graph.length(),
                graph.size(),
                graph.width(),
                checked.degree,
                checked.monomial_size,
                sa.terms.len()
            );
            println!(
                "width=degree {} monomial-size<=3*length {}",
                yes(graph.width() == checked.degree as usize),
                yes(checked.monomial_size <= 3 * graph.length())
            );
        }
        Direction::S2c => {
            let sa = parse_sap(&read(input)?).with_context(|| format!("parsing {}", input.display()))?;
            let checked = check_sa(&sa)?;
            if !checked.valid {
                bail!("input does not check as a Sherali-Adams proof");
            }
            let (graph, flow) = sa_to_circular(&sa)?;
            let goal = graph.goal().context("translation lost the goal")?;
            if !verify_flow(&graph, &flow, goal)? || !graph.validate_rules()?.is_empty() {
                bail!("translated proof does not check");
            }
            write(out, &write_cres(&graph, Some(&flow)))?;
            println!(
                "degree {} monomial-size {} -> length {} size {} width {}",
                checked.degree,
                checked.monomial_size,
                graph.length(),
                graph.size(),
                graph.width()
            );
            println!("width=degree {}", yes(graph.width() == checked.degree as usize));
        }
    }
    Ok(Status::Success)
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    cnf: &Path,
    width: usize,
    goal: &str,
    guard_rows: usize,
    staged: bool,
    out: Option<&Path>,
    dot: Option<&Path>,
) -> Result<Status> {
    let f = load_cnf(cnf)?;
    let goal = parse_goal(goal).context("parsing --goal")?;
    let start = Instant::now();
    let options = SearchOptions { guard_rows, staged };
    let outcome = match circular_search(&f, &goal, width, options) {
        Ok(o) => o,
        Err(e @ SearchError::Guard { .. }) => {
            println!("GUARD {e}");
            println!("wall time {:.3}s", start.elapsed().as_secs_f64());
            return Ok(Status::Guard);
        }
        Err(e) => return Err(e.into()),
    };
    let s = &outcome.stats;
    println!(
        "lattice ({}) {} clauses, {} inferences, {} constraints over {} variables",
        s.stage, s.clauses, s.inferences, s.rows, s.num_variables
    );
    println!("wall time {:.3}s", start.elapsed().as_secs_f64());
    let Some((graph, flow)) = outcome.proof else {
        println!("NO-PROOF at width {width}");
        return Ok(Status::Negative);
    };
    println!("PROOF FOUND");
    print_proof_stats(&graph);
    let goal_id = graph.goal().context("search result has no goal")?;
    let balance = graph.balance(&flow, goal_id)?;
    debug_assert!(balance.is_positive());
    println!("goal balance {balance}");
    if let Some(path) = out {
        write(path, &write_cres(&graph, Some(&flow)))?;
    }
    write_dot(dot, &graph, Some(&flow))?;
    Ok(Status::Success)
}

fn gen_random(seed: u64, vars: u32, budget: usize, out: &Path, dot: Option<&Path>) -> Result<Status> {
    if vars == 0 {
        bail!("--vars must be positive");
    }
    let (graph, flow) = random_circular_proof(seed, vars, budget);
    let hyps = CnfFormula::new(vars, graph.hypothesis_clauses().into_iter().collect())?;
    let (cnf_path, proof_path) = (with_extension(out, "cnf"), with_extension(out, "cres"));
    write(&cnf_path, &write_dimacs(&hyps))?;
    write(&proof_path, &write_cres(&graph, Some(&flow)))?;
    write_dot(dot, &graph, Some(&flow))?;
    print_proof_stats(&graph);
    println!("wrote {} and {}", cnf_path.display(), proof_path.display());
    Ok(Status::Success)
}
