//! Command dispatch and bit-stable JSON reports.
//!
//! Commands:
//! ```text
//! check <file>
//! abelianization <file>
//! witness <file> --edge <id> [--dims 3,4] [--primes 2,3,5] [--cap N]
//!                [--samples N] [--seed N]
//! normal-form <file> --word "<mixed word>"
//! ```
//!
//! Exit codes: 0 for any computed result (including an unknown verdict),
//! 1 for input errors, 2 for internal invariant violations. Reports go to
//! standard output, diagnostics to standard error, both as JSON.

use std::io::Write;

use serde_json::{json, Value};

use crate::criteria::{check_gog, CheckOptions};
use crate::graph::GraphOfGroups;
use crate::instance::{parse_instance, parse_mixed_word, InstanceError};
use crate::normal_form::is_nontrivial;
use crate::report::{
    abelianization_to_json, bounds_to_json, to_stable_string, verdict_to_json, witness_to_json,
    TOOL_VERSION,
};
use crate::witness::{search_witness_with_workers, SearchBounds, SearchOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

const USAGE: &str = "usage: parafree <check|abelianization|witness|normal-form> <file> [flags]";

struct InputError(Value);

impl From<InstanceError> for InputError {
    fn from(e: InstanceError) -> Self {
        InputError(e.to_json())
    }
}

fn usage_error(message: &str) -> InputError {
    InputError(json!({"error": "usage", "message": message, "usage": USAGE}))
}

/// Runs one command. Everything is computed in-process so the function is
/// directly testable; `main` only forwards `argv` and the process streams.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(args) {
        Ok(report) => {
            let _ = out.write_all(to_stable_string(&report).as_bytes());
            EXIT_OK
        }
        Err(InputError(diag)) => {
            let _ = err.write_all(to_stable_string(&diag).as_bytes());
            EXIT_INPUT
        }
    }
}

fn dispatch(args: &[String]) -> Result<Value, InputError> {
    let Some(command) = args.first() else {
        return Err(usage_error("missing command"));
    };
    let rest = &args[1..];
    match command.as_str() {
        "check" => {
            let (g, flags) = load_instance(rest)?;
            no_flags(&flags)?;
            let opts = CheckOptions {
                workers: default_workers(),
                ..CheckOptions::default()
            };
            let verdict = check_gog(&g, &opts);
            Ok(verdict_to_json(&verdict, Some(&opts.bounds)))
        }
        "abelianization" => {
            let (g, flags) = load_instance(rest)?;
            no_flags(&flags)?;
            Ok(abelianization_to_json(&g))
        }
        "witness" => {
            let (g, mut flags) = load_instance(rest)?;
            let edge = flags
                .take("--edge")?
                .ok_or_else(|| usage_error("witness requires --edge <id>"))?;
            let mut bounds = SearchBounds::default();
            if let Some(dims) = flags.take("--dims")? {
                bounds.dims = parse_list(&dims, "--dims")?;
            }
            if let Some(primes) = flags.take("--primes")? {
                bounds.primes = parse_list(&primes, "--primes")?;
            }
            if let Some(cap) = flags.take("--cap")? {
                bounds.exhaustive_cap = parse_num(&cap, "--cap")?;
            }
            if let Some(samples) = flags.take("--samples")? {
                bounds.sample_count = parse_num(&samples, "--samples")?;
            }
            if let Some(seed) = flags.take("--seed")? {
                bounds.seed = parse_num(&seed, "--seed")?;
            }
            flags.finish()?;
            let outcome = search_witness_with_workers(&g, &edge, &bounds, default_workers())
                .map_err(|e| InputError(json!({"error": "witness", "message": e.to_string()})))?;
            let mut report = json!({
                "bounds_used": bounds_to_json(&bounds),
                "edge": edge,
                "tool_version": TOOL_VERSION,
            });
            let map = report.as_object_mut().unwrap();
            match outcome {
                SearchOutcome::Found(w) => {
                    map.insert("witness".into(), witness_to_json(&w));
                    map.insert("exhausted".into(), Value::Null);
                }
                SearchOutcome::NoWitnessUpToBound { fully_enumerated } => {
                    map.insert("witness".into(), Value::Null);
                    map.insert(
                        "exhausted".into(),
                        json!({
                            "fully_enumerated": fully_enumerated
                                .iter()
                                .map(|(n, p)| json!([n, p]))
                                .collect::<Vec<_>>(),
                        }),
                    );
                }
            }
            Ok(report)
        }
        "normal-form" => {
            let (g, mut flags) = load_instance(rest)?;
            let word_text = flags
                .take("--word")?
                .ok_or_else(|| usage_error("normal-form requires --word \"<mixed word>\""))?;
            flags.finish()?;
            let mw = parse_mixed_word(&g, &word_text).map_err(|e| {
                InputError(json!({
                    "error": "word_syntax",
                    "path": "--word",
                    "position": e.position,
                    "message": e.message,
                }))
            })?;
            let det = is_nontrivial(&g, &mw);
            let reduced = reduction_output(&det, &g, &mw);
            Ok(json!({
                "determination": det.value.label(),
                "nontrivial": match det.value {
                    crate::criteria::Value3::Yes => json!(true),
                    crate::criteria::Value3::No => json!(false),
                    crate::criteria::Value3::Unknown => Value::Null,
                },
                "reduced": reduced,
                "word": word_text,
                "tool_version": TOOL_VERSION,
            }))
        }
        other => Err(usage_error(&format!("unknown command `{other}`"))),
    }
}

fn reduction_output(
    det: &crate::criteria::Determination,
    g: &GraphOfGroups,
    mw: &crate::normal_form::MixedWord,
) -> Value {
    match &det.evidence {
        crate::criteria::Evidence::Reduction { reduced, .. } => json!(reduced),
        _ => json!(mw.display(g)),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get().min(8))
}

struct Flags(Vec<(String, String)>);

impl Flags {
    fn take(&mut self, name: &str) -> Result<Option<String>, InputError> {
        let mut found = None;
        let mut i = 0;
        while i < self.0.len() {
            if self.0[i].0 == name {
                if found.is_some() {
                    return Err(usage_error(&format!("duplicate flag {name}")));
                }
                found = Some(self.0.remove(i).1);
            } else {
                i += 1;
            }
        }
        Ok(found)
    }

    fn finish(self) -> Result<(), InputError> {
        match self.0.first() {
            None => Ok(()),
            Some((name, _)) => Err(usage_error(&format!("unknown flag {name}"))),
        }
    }
}

fn no_flags(flags: &Flags) -> Result<(), InputError> {
    match flags.0.first() {
        None => Ok(()),
        Some((name, _)) => Err(usage_error(&format!("unknown flag {name}"))),
    }
}

fn load_instance(rest: &[String]) -> Result<(GraphOfGroups, Flags), InputError> {
    let Some(path) = rest.first() else {
        return Err(usage_error("missing instance file"));
    };
    if path.starts_with("--") {
        return Err(usage_error("the instance file must come before flags"));
    }
    let mut flags = Vec::new();
    let mut i = 1;
    while i < rest.len() {
        let name = &rest[i];
        if !name.starts_with("--") {
            return Err(usage_error(&format!("unexpected argument `{name}`")));
        }
        let Some(value) = rest.get(i + 1) else {
            return Err(usage_error(&format!("flag {name} needs a value")));
        };
        flags.push((name.clone(), value.clone()));
        i += 2;
    }
    let bytes = std::fs::read(path).map_err(|e| {
        InputError(json!({"error": "io", "path": path, "message": e.to_string()}))
    })?;
    let g = parse_instance(&bytes)?;
    Ok((g, Flags(flags)))
}

fn parse_num<T: std::str::FromStr>(text: &str, flag: &str) -> Result<T, InputError> {
    text.parse()
        .map_err(|_| usage_error(&format!("invalid value for {flag}: `{text}`")))
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Result<Vec<T>, InputError> {
    text.split(',').map(|part| parse_num(part.trim(), flag)).collect()
}
