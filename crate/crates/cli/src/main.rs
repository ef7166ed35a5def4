//! `rac`: parse, lower, translate, run and cross-check restricted C++
//! register-transfer sources.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Num;

use rac_core::constfns::{check_equivalence, const_fns_gen};
use rac_core::difftest::difftest;
use rac_core::eval::{Defs, FEval, Interp};
use rac_core::frontend::check_source;
use rac_core::frontend::typed::{TProgram, Type};
use rac_core::fungen::translate;
use rac_core::golden::check_text;
use rac_core::irgen::{lower_program, pseudocode_program};
use rac_core::regsem::{RawBits, Value};
use rac_core::sexpr::print_forms;

#[derive(Parser, Debug)]
#[command(
    name = "rac",
    version,
    about = "Translate restricted C++ register-transfer code to a functional form"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the S-expression IR.
    Parse { input: PathBuf },
    /// Emit pseudocode.
    Pseudo { input: PathBuf },
    /// Emit the functional definitions.
    Translate { input: PathBuf },
    /// Evaluate a function imperatively.
    Run {
        input: PathBuf,
        function: String,
        #[arg(allow_negative_numbers = true)]
        args: Vec<String>,
    },
    /// Evaluate a function through its translation.
    Runf {
        input: PathBuf,
        function: String,
        #[arg(allow_negative_numbers = true)]
        args: Vec<String>,
    },
    /// Compare both evaluators on random inputs.
    Difftest {
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Only these functions (repeatable or comma separated).
        #[arg(long = "fn", value_delimiter = ',')]
        functions: Vec<String>,
    },
    /// Emit one constant definition per binding and check the chain.
    Constfns {
        input: PathBuf,
        /// Function to split; defaults to the last one in the file.
        #[arg(long = "fn")]
        function: Option<String>,
        /// Name of the final definition.
        #[arg(long, default_value = "R")]
        result: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compare output structurally against a golden file.
    ///
    /// A `.rac` input is run through the stage named by the golden file
    /// (`.ir.sexpr`, `.constfns.sexpr`, otherwise translate); any other input
    /// is read as emitted S-expressions.
    Check {
        input: PathBuf,
        #[arg(long)]
        golden: PathBuf,
        #[arg(long = "fn")]
        function: Option<String>,
    },
}

enum Failure {
    /// Diagnostics, evaluation errors or failed comparisons.
    Failed(String),
    Usage(String),
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Res<TProgram> {
    let src = read(path)?;
    check_source(&src).map_err(|ds| {
        let file = path.display().to_string();
        Failure::Failed(
            ds.iter()
                .map(|d| d.render(&file))
                .collect::<Vec<_>>()
                .join("\n"),
        )
    })
}

fn translated(p: &TProgram) -> Res<Vec<rac_core::sexpr::SExpr>> {
    translate(&lower_program(p)).map_err(|e| Failure::Failed(e.to_string()))
}

fn parse_int(s: &str) -> Res<BigInt> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let body = body.replace('_', "");
    let v = if let Some(h) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        BigInt::from_str_radix(h, 16)
    } else if let Some(b) = body.strip_prefix("0b").or_else(|| body.strip_prefix("0B")) {
        BigInt::from_str_radix(b, 2)
    } else {
        BigInt::from_str_radix(&body, 10)
    };
    let v = v.map_err(|_| Failure::Usage(format!("not an integer: {s}")))?;
    Ok(if neg { -v } else { v })
}

fn int_args(args: &[String]) -> Res<Vec<BigInt>> {
    args.iter().map(|a| parse_int(a)).collect()
}

fn function_name(p: &TProgram, name: &str) -> Res<String> {
    p.function(name)
        .map(|f| f.name.to_uppercase())
        .ok_or_else(|| Failure::Usage(format!("no function {name}")))
}

fn run_functional(p: &TProgram, name: &str, args: &[BigInt]) -> Res<String> {
    let f = p
        .function(name)
        .ok_or_else(|| Failure::Usage(format!("no function {name}")))?;
    let vals: Vec<Value> = args
        .iter()
        .enumerate()
        .map(|(k, a)| match f.params.get(k).map(|q| &q.ty) {
            Some(Type::Reg(r)) if !r.is_machine() => {
                Value::Int(RawBits::wrapping(r.width(), a).to_bigint())
            }
            _ => Value::Int(a.clone()),
        })
        .collect();
    let forms = translated(p)?;
    let defs = Defs::from_forms(&forms).map_err(|e| Failure::Failed(e.to_string()))?;
    let v = FEval::new(&defs)
        .call(&f.name, &vals)
        .map_err(|e| Failure::Failed(e.to_string()))?;
    Ok(format!("{v}\n"))
}

fn constfns_text(
    p: &TProgram,
    function: Option<&str>,
    result: &str,
) -> Res<(
    String,
    rac_core::constfns::ConstDefSet,
    Vec<rac_core::sexpr::SExpr>,
)> {
    let name = match function {
        Some(n) => function_name(p, n)?,
        None => p
            .functions
            .last()
            .map(|f| f.name.to_uppercase())
            .ok_or_else(|| Failure::Usage("no functions".into()))?,
    };
    let forms = translated(p)?;
    let cds = const_fns_gen(&forms, &name, result).map_err(|e| Failure::Failed(e.to_string()))?;
    Ok((cds.text(), cds, forms))
}

/// Standard output text on success.
fn execute(cmd: &Command) -> Res<String> {
    match cmd {
        Command::Parse { input } => Ok(print_forms(&lower_program(&load(input)?).forms())),
        Command::Pseudo { input } => Ok(pseudocode_program(&load(input)?)),
        Command::Translate { input } => Ok(print_forms(&translated(&load(input)?)?)),
        Command::Run {
            input,
            function,
            args,
        } => {
            let p = load(input)?;
            let name = function_name(&p, function)?;
            let args = int_args(args)?;
            let v = Interp::new(&p)
                .call(&name, &args)
                .map_err(|e| Failure::Failed(e.to_string()))?;
            Ok(format!("{v}\n"))
        }
        Command::Runf {
            input,
            function,
            args,
        } => {
            let p = load(input)?;
            run_functional(&p, function, &int_args(args)?)
        }
        Command::Difftest {
            input,
            trials,
            seed,
            functions,
        } => {
            let p = load(input)?;
            for f in functions {
                function_name(&p, f)?;
            }
            let report = difftest(&p, *trials, *seed, functions)
                .map_err(|e| Failure::Failed(e.to_string()))?;
            if report.all_agree() {
                Ok(report.to_string())
            } else {
                Err(Failure::Failed(report.to_string()))
            }
        }
        Command::Constfns {
            input,
            function,
            result,
            trials,
            seed,
        } => {
            let p = load(input)?;
            let (text, cds, forms) = constfns_text(&p, function.as_deref(), result)?;
            let report = check_equivalence(&cds, &forms, &p, *trials, *seed)
                .map_err(|e| Failure::Failed(e.to_string()))?;
            let summary = format!(
                ";; chain vs {}: {}",
                cds.function,
                report.to_string().trim_end().replace('\n', "\n;; ")
            );
            if report.agree == report.trials {
                Ok(format!("{text}{summary}\n"))
            } else {
                Err(Failure::Failed(summary))
            }
        }
        Command::Check {
            input,
            golden,
            function,
        } => {
            let gold = read(golden)?;
            let actual = if input.extension().is_some_and(|e| e == "rac") {
                let p = load(input)?;
                let g = golden.to_string_lossy();
                if g.ends_with(".ir.sexpr") {
                    print_forms(&lower_program(&p).forms())
                } else if g.ends_with(".constfns.sexpr") {
                    constfns_text(&p, function.as_deref(), "R")?.0
                } else {
                    print_forms(&translated(&p)?)
                }
            } else {
                read(input)?
            };
            check_text(&gold, &actual)
                .map_err(|e| Failure::Failed(format!("{}: {e}", golden.display())))?;
            Ok(format!(
                "{}: matches {}\n",
                input.display(),
                golden.display()
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli.command).and_then(|text| match &cli.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Failed(e.to_string())),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Failed(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("rac: {msg}");
            ExitCode::from(2)
        }
    }
}
