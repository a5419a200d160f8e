//! Command-line front end: build, inspect, render, and verify LLT
//! Catalanimals with JSON in and out.
//!
//! Exit codes: 0 success/verified, 1 verification failure, 2 invalid input,
//! 3 resource cap exceeded.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use catalanimals::catalanimal::{
    build_llt_mn, check_cuddly, expected_cub, h_pol, principal_spec, verify_cub, wheel_check,
    Catalanimal, GlCharPoly,
};
use catalanimals::llt::{coproduct_statistic, llt};
use catalanimals::nabla::nabla_pow;
use catalanimals::par;
use catalanimals::shapes::SkewTuple;
use catalanimals::symfunc::SymFunc;
use catalanimals::Error;

#[derive(Parser)]
#[command(
    name = "catalanimals",
    about = "Exact computations with LLT Catalanimals",
    long_about = "Builds LLT Catalanimals from tuples of skew shapes, verifies \
(m,n)-cuddliness and cub identities, computes LLT polynomials and polynomial \
parts of raising-operator series, and cross-checks nabla against the modified \
Macdonald oracle.\n\nThe base-change matrix cache can be persisted by setting \
CATALANIMALS_CACHE_DIR."
)]
struct Cli {
    /// Worker threads for the data-parallel kernels (1 forces the
    /// sequential path)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct TupleArgs {
    /// Tuple of skew shapes, e.g. '{"shapes":[{"outer":[3,2],"inner":[1,0]}]}'
    #[arg(long)]
    tuple: String,
}

#[derive(Args)]
struct MnArgs {
    /// Stretch factor m of the (m,n) pair
    #[arg(long, default_value_t = 1)]
    m: i64,
    /// Degree slope n of the (m,n) pair
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    n: i64,
    /// Comma-separated per-shape content offsets (default all zero)
    #[arg(long, allow_hyphen_values = true)]
    offsets: Option<String>,
}

impl MnArgs {
    fn offsets_for(&self, t: &SkewTuple) -> Result<Vec<i64>, Error> {
        match &self.offsets {
            None => Ok(vec![0; t.n_shapes()]),
            Some(s) => s
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|e| Error::Parse(e.to_string()))
                })
                .collect(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// LLT polynomial of a tuple, as a Schur expansion
    Llt {
        #[command(flatten)]
        tuple: TupleArgs,
        /// Number of variables for the tableau enumeration (default: number
        /// of boxes)
        #[arg(long)]
        vars: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Build the (m,n) LLT Catalanimal of a tuple
    Cat {
        #[command(flatten)]
        tuple: TupleArgs,
        #[command(flatten)]
        mn: MnArgs,
        /// Also draw the root sets as an ASCII grid
        #[arg(long)]
        render: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// omega nabla^m of the LLT polynomial by both routes, with a verdict
    Nabla {
        #[command(flatten)]
        tuple: TupleArgs,
        /// Power of nabla
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a verification: cuddliness report, cub conditions, or wheel test
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Principal specialization phi(1, t, ..., t^{l-1}) of the Catalanimal
    Spec {
        #[command(flatten)]
        tuple: TupleArgs,
        #[command(flatten)]
        mn: MnArgs,
    },
    /// LLT coproduct table over lower-ideal splits
    Coprod {
        #[command(flatten)]
        tuple: TupleArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// ASCII grid of a Catalanimal
    Render {
        /// Tuple of skew shapes (alternative to --cat)
        #[arg(long)]
        tuple: Option<String>,
        /// Raw Catalanimal JSON (alternative to --tuple)
        #[arg(long)]
        cat: Option<String>,
        #[command(flatten)]
        mn: MnArgs,
    },
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Tameness, degree, and subset bounds, with tight subsets
    Cuddly {
        /// Tuple of skew shapes (alternative to --cat)
        #[arg(long)]
        tuple: Option<String>,
        /// Raw Catalanimal JSON (alternative to --tuple)
        #[arg(long)]
        cat: Option<String>,
        #[command(flatten)]
        mn: MnArgs,
    },
    /// Both cub-determination conditions, recursing on sub-tuples
    Cub {
        #[command(flatten)]
        tuple: TupleArgs,
        #[command(flatten)]
        mn: MnArgs,
        /// Recursion depth for sub-tuples
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Randomized wheel-condition test on the Laurent form g
    Wheel {
        /// Tuple of skew shapes (alternative to --cat)
        #[arg(long)]
        tuple: Option<String>,
        /// Raw Catalanimal JSON (alternative to --tuple)
        #[arg(long)]
        cat: Option<String>,
        #[command(flatten)]
        mn: MnArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::ResourceCap(_) => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn symfunc_output(f: &SymFunc, format: Format) -> String {
    match format {
        Format::Text => f.to_string(),
        Format::Json => f.to_json().to_string(),
    }
}

fn build_from_args(
    tuple: &Option<String>,
    cat: &Option<String>,
    mn: &MnArgs,
) -> Result<Catalanimal, Error> {
    match (tuple, cat) {
        (Some(t), None) => {
            let t = SkewTuple::from_json(t)?;
            let offsets = mn.offsets_for(&t)?;
            build_llt_mn(&t, mn.m, mn.n, &offsets)
        }
        (None, Some(c)) => Catalanimal::from_json(c),
        _ => Err(Error::InvalidInput(
            "give exactly one of --tuple or --cat".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Llt {
            tuple,
            vars,
            format,
        } => {
            let t = SkewTuple::from_json(&tuple.tuple)?;
            let n = vars.unwrap_or(t.n_boxes().max(1));
            let g = llt(&t, n)?;
            println!("{}", symfunc_output(&g, format));
            Ok(ExitCode::SUCCESS)
        }
        Command::Cat {
            tuple,
            mn,
            render,
            format,
        } => {
            let t = SkewTuple::from_json(&tuple.tuple)?;
            let offsets = mn.offsets_for(&t)?;
            let c = build_llt_mn(&t, mn.m, mn.n, &offsets)?;
            let json = serde_json::to_string(&c).map_err(|e| Error::Parse(e.to_string()))?;
            match format {
                Format::Text => {
                    println!("{}", json);
                    if render {
                        print!("{}", c.render_ascii());
                    }
                }
                Format::Json => {
                    let mut v: serde_json::Value =
                        serde_json::from_str(&json).map_err(|e| Error::Parse(e.to_string()))?;
                    if render {
                        v["render"] = serde_json::Value::String(c.render_ascii());
                    }
                    println!("{}", v);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Nabla { tuple, m, format } => {
            let t = SkewTuple::from_json(&tuple.tuple)?;
            let g = llt(&t, t.n_boxes().max(1))?;
            let oracle = nabla_pow(&g, m)?.omega()?;
            let offsets = vec![0i64; t.n_shapes()];
            let (scalar, _) = expected_cub(&t, m, 1, &offsets)?;
            let inv = scalar.inverse()?;
            let cat = build_llt_mn(&t, m, 1, &offsets)?;
            let h = h_pol(&cat)?;
            let raised = GlCharPoly {
                l: h.l,
                coeffs: h
                    .coeffs
                    .iter()
                    .map(|(k, v)| (k.clone(), v.mul(&inv)))
                    .collect(),
            };
            let verdict = raised.matches_symfunc(&oracle)?;
            match format {
                Format::Text => {
                    println!("macdonald oracle:  {}", oracle);
                    println!("raising operator:  {}", raised);
                    println!("verdict: {}", if verdict { "MATCH" } else { "MISMATCH" });
                }
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::json!({
                            "oracle": oracle.to_json(),
                            "raising_operator": raised.to_symfunc().to_json(),
                            "verdict": if verdict { "MATCH" } else { "MISMATCH" },
                        })
                    );
                }
            }
            Ok(if verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Check { what } => match what {
            CheckCommand::Cuddly { tuple, cat, mn } => {
                let c = build_from_args(&tuple, &cat, &mn)?;
                let report = check_cuddly(&c, mn.m, mn.n)?;
                println!(
                    "tame: {}  degree: {}  bounds: {}",
                    report.tame,
                    report.degree_ok,
                    report.violations.is_empty()
                );
                for v in report.violations.iter().take(20) {
                    println!(
                        "  violated at I = {:?}: |lambda[I]_I| = {} > {}/{}",
                        v.subset, v.value, v.bound_num, v.bound_den
                    );
                }
                println!("tight subsets ({}):", report.tight_subsets.len());
                if report.tight_subsets.len() <= 100 {
                    for s in &report.tight_subsets {
                        println!("  {:?}", s);
                    }
                }
                println!("{}", if report.cuddly() { "PASS" } else { "FAIL" });
                Ok(if report.cuddly() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
            CheckCommand::Cub { tuple, mn, depth } => {
                let t = SkewTuple::from_json(&tuple.tuple)?;
                let offsets = mn.offsets_for(&t)?;
                let tr = verify_cub(&t, mn.m, mn.n, &offsets, depth)?;
                println!("{}", tr);
                Ok(if tr.pass() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
            CheckCommand::Wheel {
                tuple,
                cat,
                mn,
                trials,
                seed,
            } => {
                let c = build_from_args(&tuple, &cat, &mn)?;
                let ok = wheel_check(&c, trials, seed)?;
                println!("{}", if ok { "PASS" } else { "FAIL" });
                Ok(if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                })
            }
        },
        Command::Spec { tuple, mn } => {
            let t = SkewTuple::from_json(&tuple.tuple)?;
            let offsets = mn.offsets_for(&t)?;
            let c = build_llt_mn(&t, mn.m, mn.n, &offsets)?;
            println!("{}", principal_spec(&c)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Coprod { tuple, format } => {
            let t = SkewTuple::from_json(&tuple.tuple)?;
            let mut rows = Vec::new();
            for ideal in t.lower_ideals()? {
                let stat = coproduct_statistic(&t, &ideal)?;
                let sub = t.sub_tuple(&ideal)?;
                let comp: std::collections::BTreeSet<usize> = (1..=t.n_boxes())
                    .filter(|p| !ideal.contains(p))
                    .collect();
                let sub_c = t.sub_tuple(&comp)?;
                let g1 = llt(&sub, sub.n_boxes().max(1))?;
                let g2 = llt(&sub_c, sub_c.n_boxes().max(1))?;
                rows.push((ideal, stat, g1, g2));
            }
            match format {
                Format::Text => {
                    for (ideal, stat, g1, g2) in rows {
                        println!(
                            "I = {:?}  q-power = {}  G' = {}  G'' = {}",
                            ideal.into_iter().collect::<Vec<_>>(),
                            stat,
                            g1,
                            g2
                        );
                    }
                }
                Format::Json => {
                    let items: Vec<serde_json::Value> = rows
                        .into_iter()
                        .map(|(ideal, stat, g1, g2)| {
                            serde_json::json!({
                                "ideal": ideal.into_iter().collect::<Vec<_>>(),
                                "q_power": stat,
                                "inner": g1.to_json(),
                                "outer": g2.to_json(),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::json!(items));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { tuple, cat, mn } => {
            let c = build_from_args(&tuple, &cat, &mn)?;
            print!("{}", c.render_ascii());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs <= 1 {
            par::set_mode(par::Mode::Sequential);
        } else {
            // picked up by rayon when its global pool is first used
            std::env::set_var("RAYON_NUM_THREADS", jobs.to_string());
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code_for(&e)
        }
    }
}
