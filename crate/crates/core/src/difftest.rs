//! Randomized comparison of the imperative and functional evaluators.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::{Defs, FEval, Interp, RunError};
use crate::frontend::typed::{TFunc, TProgram, Type};
use crate::fungen::{translate, TranslateError};
use crate::irgen::lower_program;
use crate::regsem::{Value, MACHINE_WIDTH};

/// Generator for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform integer in `[0, 2^width)`.
pub fn random_raw(rng: &mut impl RngCore, width: u32) -> BigInt {
    let words = width.div_ceil(32) as usize;
    let digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
    let x = BigInt::from_slice(num_bigint::Sign::Plus, &digits);
    x & ((BigInt::one() << width) - 1)
}

/// 0, 1, all ones, sign bit only and sign bit minus one.
pub fn boundary_values(width: u32) -> Vec<BigInt> {
    let top = BigInt::one() << (width - 1);
    let mut out = vec![
        BigInt::from(0),
        BigInt::one(),
        (BigInt::one() << width) - 1,
        top.clone(),
        top - 1,
    ];
    let mut seen = Vec::new();
    out.retain(|v| {
        let fresh = !seen.contains(v);
        seen.push(v.clone());
        fresh
    });
    out
}

/// Parameter widths, or `None` when a parameter is not a scalar register.
pub fn scalar_widths(f: &TFunc) -> Option<Vec<u32>> {
    f.params
        .iter()
        .map(|p| match &p.ty {
            Type::Reg(r) if r.is_machine() => Some(MACHINE_WIDTH),
            Type::Reg(r) => Some(r.width()),
            _ => None,
        })
        .collect()
}

const CROSS_LIMIT: usize = 4096;

/// Boundary argument vectors: the full cross product when small, otherwise
/// one vector per boundary kind.
pub fn boundary_inputs(widths: &[u32]) -> Vec<Vec<BigInt>> {
    let sets: Vec<Vec<BigInt>> = widths.iter().map(|&w| boundary_values(w)).collect();
    let size = sets.iter().map(Vec::len).product::<usize>();
    if size <= CROSS_LIMIT {
        let mut out = vec![Vec::new()];
        for set in &sets {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    set.iter()
                        .map(move |v| [prefix.clone(), vec![v.clone()]].concat())
                })
                .collect();
        }
        out
    } else {
        let kinds = sets.iter().map(Vec::len).max().unwrap_or(0);
        (0..kinds)
            .map(|k| sets.iter().map(|s| s[k.min(s.len() - 1)].clone()).collect())
            .collect()
    }
}

/// `trials` argument vectors: boundary vectors first, then uniform draws
/// from per-trial generators.
pub fn trial_inputs(widths: &[u32], trials: usize, seed: u64) -> Vec<Vec<BigInt>> {
    let mut out = boundary_inputs(widths);
    out.truncate(trials);
    for i in out.len()..trials {
        let mut rng = trial_rng(seed, i as u64);
        out.push(widths.iter().map(|&w| random_raw(&mut rng, w)).collect());
    }
    out
}

fn outcome(r: &Result<Value, RunError>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub args: Vec<BigInt>,
    pub imperative: String,
    pub functional: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnReport {
    pub name: String,
    pub trials: usize,
    pub agree: usize,
    pub first_mismatch: Option<Counterexample>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub functions: Vec<FnReport>,
    /// Functions without scalar register parameters.
    pub skipped: Vec<String>,
}

impl Report {
    pub fn all_agree(&self) -> bool {
        self.functions.iter().all(|f| f.agree == f.trials)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.functions {
            writeln!(f, "{}: {}/{} agree", r.name, r.agree, r.trials)?;
            if let Some(c) = &r.first_mismatch {
                let args: Vec<String> = c.args.iter().map(|a| format!("{a:#x}")).collect();
                writeln!(f, "  first counterexample: ({})", args.join(", "))?;
                writeln!(f, "    imperative: {}", c.imperative)?;
                writeln!(f, "    functional: {}", c.functional)?;
            }
        }
        for s in &self.skipped {
            writeln!(f, "{s}: skipped (non-scalar parameters)")?;
        }
        Ok(())
    }
}

/// Runs one input through both evaluators; `None` when they agree on the
/// result and on every loop count.
pub fn compare_once(
    p: &TProgram,
    defs: &Defs,
    name: &str,
    args: &[BigInt],
) -> Option<Counterexample> {
    let mut imp = Interp::new(p);
    let ir = imp.call(name, args);
    let mut fun = FEval::new(defs);
    let vals: Vec<Value> = args.iter().cloned().map(Value::Int).collect();
    let fr = fun.call(name, &vals);
    let (mut a, mut b) = (outcome(&ir), outcome(&fr));
    if a == b && imp.counters != fun.counters {
        a = format!("{a} with loop counts {:?}", imp.counters);
        b = format!("{b} with loop counts {:?}", fun.counters);
    }
    (a != b).then(|| Counterexample {
        args: args.to_vec(),
        imperative: a,
        functional: b,
    })
}

/// Differential test of every selected function of `p`.
pub fn difftest(
    p: &TProgram,
    trials: usize,
    seed: u64,
    only: &[String],
) -> Result<Report, TranslateError> {
    let forms = translate(&lower_program(p))?;
    let defs = Defs::from_forms(&forms).expect("translated forms are well formed");
    let mut report = Report::default();
    for f in &p.functions {
        if !only.is_empty() && !only.iter().any(|n| n.eq_ignore_ascii_case(&f.name)) {
            continue;
        }
        let name = f.name.to_uppercase();
        let Some(widths) = scalar_widths(f) else {
            report.skipped.push(name);
            continue;
        };
        let mut r = FnReport {
            name: name.clone(),
            trials: 0,
            agree: 0,
            first_mismatch: None,
        };
        for args in trial_inputs(&widths, trials, seed) {
            r.trials += 1;
            match compare_once(p, &defs, &name, &args) {
                None => r.agree += 1,
                Some(c) => {
                    r.first_mismatch.get_or_insert(c);
                }
            }
        }
        report.functions.push(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::check_source;

    #[test]
    fn boundaries_are_distinct() {
        assert_eq!(boundary_values(1), vec![BigInt::from(0), BigInt::from(1)]);
        assert_eq!(boundary_values(8).len(), 5);
        assert_eq!(boundary_inputs(&[8, 8]).len(), 25);
    }

    #[test]
    fn draws_stay_in_range_and_repeat() {
        let a = trial_inputs(&[13, 64], 50, 7);
        assert_eq!(a, trial_inputs(&[13, 64], 50, 7));
        assert!(a
            .iter()
            .all(|v| v[0] < BigInt::one() << 13 && v[1] < BigInt::one() << 64));
        assert_ne!(a, trial_inputs(&[13, 64], 50, 8));
    }

    #[test]
    fn corpus_functions_agree() {
        let p = check_source(include_str!("../../../corpus/compare64.rac")).unwrap();
        let r = difftest(&p, 200, 1, &[]).unwrap();
        assert!(r.all_agree(), "{r}");
        assert_eq!(r.to_string(), "COMPARE64: 200/200 agree\n");
    }

    #[test]
    fn a_mistranslation_is_caught() {
        let p =
            check_source("ui8 f(ui8 a, ui8 b) { ui8 x = a; ui8 y = x + b; return y; }").unwrap();
        let mut forms = translate(&lower_program(&p)).unwrap();
        let text = forms
            .last()
            .unwrap()
            .to_string()
            .replace("(+ X B)", "(+ A A)");
        *forms.last_mut().unwrap() = crate::sexpr::read_one(&text).unwrap();
        let defs = Defs::from_forms(&forms).unwrap();
        let bad = trial_inputs(&[8, 8], 100, 3)
            .into_iter()
            .filter_map(|a| compare_once(&p, &defs, "F", &a))
            .count();
        assert!(bad > 0);
    }
}
