//! Corpus, transform and validate subcommands.

use std::io::Read;
use std::path::{Path, PathBuf};

use rapidkit_core::corpus::{extract_corpus, read_corpus, split_corpus, synthesize_corpus, write_corpus};
use rapidkit_core::inference::extract_routines;
use rapidkit_core::syntax::{parse_module, print_routine, Decimal, ModuleItem, Offset, Routine};
use rapidkit_core::transforms::{apply, TaskKind, TaskRequest, TransformError};
use rapidkit_core::validator::{validate, validate_batch};

use crate::failure::{CliResult, Failure, EXIT_FINDINGS, EXIT_OK};
use crate::{Globals, RequestArgs};

impl RequestArgs {
    /// Task implied by the flags that are set.
    pub fn task_hint(&self) -> TaskKind {
        if self.kind.is_some() {
            TaskKind::ModifyArgument
        } else if self.anchor.is_some() {
            TaskKind::AddOffset
        } else {
            TaskKind::Reverse
        }
    }

    pub fn is_empty(&self) -> bool {
        self.kind.is_none()
            && self.value.is_none()
            && self.anchor.is_none()
            && self.function.is_none()
            && self.offset.is_none()
    }

    pub fn build(&self, task: TaskKind) -> CliResult<TaskRequest> {
        let missing = |flag: &str| Failure::config(format!("{task} needs --{flag}"));
        match task {
            TaskKind::ModifyArgument => Ok(TaskRequest::ModifyArgument {
                argument: self.kind.ok_or_else(|| missing("kind"))?,
                new_value: self.value.clone().ok_or_else(|| missing("value"))?,
            }),
            TaskKind::AddOffset => Ok(TaskRequest::AddOffset {
                anchor: self.anchor.ok_or_else(|| missing("anchor"))?,
                function: self.function.ok_or_else(|| missing("function"))?,
                offset: parse_offset(self.offset.as_deref().ok_or_else(|| missing("offset"))?)?,
            }),
            TaskKind::Reverse => Ok(TaskRequest::Reverse),
        }
    }
}

fn parse_offset(text: &str) -> CliResult<Offset> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [x, y, z] = parts.as_slice() else {
        return Err(Failure::config(format!("offset `{text}` must be X,Y,Z")));
    };
    let dec = |s: &str| s.parse::<Decimal>().map_err(|e| Failure::config(e.to_string()));
    Ok(Offset { dx: dec(x)?, dy: dec(y)?, dz: dec(z)? })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::io(path, e))?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
    }
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

/// Every routine of a file; any unparseable `PROC` block is an error.
pub fn read_routines(path: &Path) -> CliResult<Vec<Routine>> {
    let text = read_text(path)?;
    let module = parse_module(&text);
    if let Some(w) = module.warnings.first() {
        return Err(Failure::parse(format!("{}: block at line {}: {}", path.display(), w.line, w.reason)));
    }
    let routines: Vec<Routine> = module
        .items
        .into_iter()
        .filter_map(|i| match i {
            ModuleItem::Routine(r) => Some(r),
            ModuleItem::Opaque(_) => None,
        })
        .collect();
    if routines.is_empty() {
        return Err(Failure::parse(format!("{}: no PROC block found", path.display())));
    }
    Ok(routines)
}

fn transform_failure(e: TransformError) -> Failure {
    match e {
        TransformError::InvalidValue { .. } | TransformError::InvalidRequest(_) | TransformError::Policy(_) => {
            Failure::config(e.to_string())
        }
        other => Failure::findings(other.to_string()),
    }
}

pub fn extract(globals: &Globals, paths: &[PathBuf], out: &Path, summary: Option<&Path>) -> CliResult {
    let config = &globals.config;
    let paths = if paths.is_empty() { config.corpus_paths.clone() } else { paths.to_vec() };
    if paths.is_empty() {
        return Err(Failure::config("no corpus paths given on the command line or in the configuration"));
    }
    for p in &paths {
        if !p.exists() {
            return Err(Failure::config(format!("{}: no such file or directory", p.display())));
        }
    }
    let extraction = extract_corpus(&paths, &config.naming_convention(), config.execution);
    for d in &extraction.diagnostics {
        log::warn!("{}: {}", d.path.display(), d.message);
    }
    write_corpus(out, &extraction.entries)?;
    let json = serde_json::to_string_pretty(&extraction.summary).expect("summary serializes") + "\n";
    if let Some(path) = summary {
        write_text(path, &json)?;
    }
    print!("{json}");
    Ok(EXIT_OK)
}

pub fn synth(globals: &Globals, n: usize, out: &Path) -> CliResult {
    let config = &globals.config;
    let entries = synthesize_corpus(config.seed, n, &config.naming_convention(), &config.policy, &config.synthesis)
        .map_err(|e| Failure::config(e.to_string()))?;
    write_corpus(out, &entries)?;
    println!("{} routines written to {}", entries.len(), out.display());
    Ok(EXIT_OK)
}

pub fn split(globals: &Globals, corpus: &Path, n: Option<usize>, prompt_out: &Path, test_out: &Path) -> CliResult {
    let config = &globals.config;
    let entries = read_corpus(corpus, &config.naming_convention())?;
    let n = n.unwrap_or(config.few_shot.total());
    let (prompt, test) = split_corpus(&entries, n, config.seed).map_err(|e| Failure::config(e.to_string()))?;
    write_corpus(prompt_out, &prompt)?;
    write_corpus(test_out, &test)?;
    println!("{} prompt examples, {} test routines", prompt.len(), test.len());
    Ok(EXIT_OK)
}

pub fn transform(globals: &Globals, request: &TaskRequest, input: &Path, out: Option<&Path>, check: bool) -> CliResult {
    let config = &globals.config;
    let convention = config.naming_convention();
    let routines = read_routines(input)?;
    let mut texts = Vec::with_capacity(routines.len());
    let mut findings = 0;
    for routine in &routines {
        let output = apply(routine, request, &config.policy, &convention).map_err(transform_failure)?;
        if check {
            let report = validate(routine, &output, request, &convention, &config.policy);
            for m in &report.mistakes {
                eprintln!("{}: {m}", routine.name);
            }
            findings += report.mistakes.len();
        }
        texts.push(print_routine(&output));
    }
    let text = texts.join("\n\n") + "\n";
    match out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    Ok(if findings > 0 { EXIT_FINDINGS } else { EXIT_OK })
}

pub fn validate_files(globals: &Globals, request: &TaskRequest, input: &Path, output: &Path, json: bool) -> CliResult {
    let config = &globals.config;
    let convention = config.naming_convention();
    let inputs = read_routines(input)?;
    let text = read_text(output)?;
    let outputs = extract_routines(&text).map_err(|e| Failure::parse(format!("{}: {e}", output.display())))?;
    let batch = validate_batch(&inputs, &outputs, request, &convention, &config.policy);
    let report = batch.merged(input.display().to_string());
    if json {
        println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    } else if report.is_correct {
        println!("ok: no mistakes");
    } else {
        for m in &report.mistakes {
            println!("{m}");
        }
        println!("{} mistake(s)", report.mistakes.len());
    }
    Ok(if report.is_correct { EXIT_OK } else { EXIT_FINDINGS })
}
