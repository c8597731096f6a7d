use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::{Classification, CorpusEntry, NamingConvention, Origin};
use crate::exec::Execution;
use crate::syntax::{parse_module, parse_routine, ModuleItem};

/// File extensions scanned inside backup directories (case-insensitive).
pub const SOURCE_EXTENSIONS: [&str; 4] = ["mod", "modx", "sys", "prg"];

/// Procedure and file counts of an extraction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub projects: usize,
    pub backups: usize,
    pub files: usize,
    /// Every `PROC` block seen, duplicates included.
    pub procedures: usize,
    pub simple: usize,
    pub complex: usize,
    /// Procedures that are not movement routines.
    pub other: usize,
    /// Entries left after deduplication.
    pub unique: usize,
    pub unique_simple: usize,
    pub unique_complex: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiagnostic {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub entries: Vec<CorpusEntry>,
    pub summary: CorpusSummary,
    pub diagnostics: Vec<FileDiagnostic>,
}

#[derive(Debug, Default)]
struct FileResult {
    entries: Vec<CorpusEntry>,
    procedures: usize,
    simple: usize,
    complex: usize,
    other: usize,
    diagnostics: Vec<FileDiagnostic>,
}

struct SourceFile {
    path: PathBuf,
    project: String,
    backup: String,
}

fn has_source_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| SOURCE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn name_of(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Expands roots into source files. Below a directory root the first path
/// component names the project and the second the backup.
fn collect_files(paths: &[PathBuf], diagnostics: &mut Vec<FileDiagnostic>) -> Vec<SourceFile> {
    let mut files = Vec::new();
    for root in paths {
        if root.is_file() {
            let project = root.parent().map(name_of).unwrap_or_default();
            files.push(SourceFile { path: root.clone(), project, backup: name_of(root) });
            continue;
        }
        if !root.exists() {
            diagnostics.push(FileDiagnostic { path: root.clone(), message: "path does not exist".into() });
            continue;
        }
        for item in WalkDir::new(root).sort_by_file_name() {
            let item = match item {
                Ok(i) => i,
                Err(e) => {
                    let path = e.path().map_or_else(|| root.clone(), Path::to_path_buf);
                    diagnostics.push(FileDiagnostic { path, message: e.to_string() });
                    continue;
                }
            };
            if !item.file_type().is_file() || !has_source_extension(item.path()) {
                continue;
            }
            let rel = item.path().strip_prefix(root).unwrap_or(item.path());
            let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            let (project, backup) = match parts.as_slice() {
                [file] => (name_of(root), file.clone()),
                [project, file] => (project.clone(), file.clone()),
                [project, backup, ..] => (project.clone(), backup.clone()),
                [] => continue,
            };
            files.push(SourceFile { path: item.path().to_path_buf(), project, backup });
        }
    }
    files
}

fn is_proc_block(text: &str) -> bool {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let rest =
        first.strip_prefix("LOCAL").filter(|r| r.starts_with(char::is_whitespace)).map_or(first, str::trim_start);
    rest.strip_prefix("PROC").is_some_and(|r| r.starts_with(char::is_whitespace))
}

/// Extracts entries from one module source (before deduplication).
pub fn extract_source(
    source: &str,
    origin: &Origin,
    convention: &NamingConvention,
) -> (Vec<CorpusEntry>, CorpusSummary) {
    let module = parse_module(source);
    let mut entries = Vec::new();
    let mut counts = CorpusSummary::default();
    for item in module.items {
        let routine = match item {
            ModuleItem::Routine(r) => Some(r),
            ModuleItem::Opaque(text) if is_proc_block(&text) => parse_routine(&text).ok(),
            ModuleItem::Opaque(_) => {
                continue;
            }
        };
        counts.procedures += 1;
        match routine {
            Some(r) => {
                let entry = CorpusEntry::new("", r, origin.clone(), convention);
                match entry.classification {
                    Classification::Simple => counts.simple += 1,
                    Classification::Complex => counts.complex += 1,
                }
                entries.push(entry);
            }
            None => counts.other += 1,
        }
    }
    (entries, counts)
}

fn extract_file(file: &SourceFile, convention: &NamingConvention) -> FileResult {
    let bytes = match std::fs::read(&file.path) {
        Ok(b) => b,
        Err(e) => {
            return FileResult {
                diagnostics: vec![FileDiagnostic { path: file.path.clone(), message: e.to_string() }],
                ..Default::default()
            }
        }
    };
    // Invalid UTF-8 is replaced, not rejected.
    let text = String::from_utf8_lossy(&bytes);
    let origin = Origin::Project { project: file.project.clone(), backup: file.backup.clone() };
    let (entries, counts) = extract_source(&text, &origin, convention);
    FileResult {
        entries,
        procedures: counts.procedures,
        simple: counts.simple,
        complex: counts.complex,
        other: counts.other,
        diagnostics: Vec::new(),
    }
}

/// Extracts, classifies and deduplicates every routine below `paths`.
/// Unreadable files are reported in the diagnostics and skipped. The first
/// occurrence (in sorted path order) of each canonical routine is kept.
pub fn extract_corpus(paths: &[PathBuf], convention: &NamingConvention, execution: Execution) -> Extraction {
    let mut diagnostics = Vec::new();
    let files = collect_files(paths, &mut diagnostics);
    let results = execution.map(&files, |f| extract_file(f, convention));

    let mut summary = CorpusSummary { files: files.len(), ..Default::default() };
    let projects: BTreeSet<&str> = files.iter().map(|f| f.project.as_str()).collect();
    let backups: BTreeSet<(&str, &str)> = files.iter().map(|f| (f.project.as_str(), f.backup.as_str())).collect();
    summary.projects = projects.len();
    summary.backups = backups.len();

    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for result in results {
        summary.procedures += result.procedures;
        summary.simple += result.simple;
        summary.complex += result.complex;
        summary.other += result.other;
        diagnostics.extend(result.diagnostics);
        for mut entry in result.entries {
            if seen.insert(entry.dedup_key.clone()) {
                entry.id = format!("r-{}", &entry.dedup_key[..16]);
                match entry.classification {
                    Classification::Simple => summary.unique_simple += 1,
                    Classification::Complex => summary.unique_complex += 1,
                }
                entries.push(entry);
            }
        }
    }
    summary.unique = entries.len();
    Extraction { entries, summary, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn routine(src: u32, dst: u32) -> String {
        format!(
            "PROC mv{src}_{dst}()\n    !From:  Vorposition {src}\n    !To:    Vorposition {dst}\n    MoveJ pR7_{src},vR7_rapid,z50,toR7_active\\WObj:=woR7_Base\\NoMove;\n    MoveL pR7_{dst},vR7_rapid,z50,toR7_active\\WObj:=woR7_Base;\nENDPROC\n"
        )
    }

    #[test]
    fn counts_and_dedup() {
        let dir = tempfile::tempdir().unwrap();
        let c = NamingConvention::default();
        let mut text = String::from("MODULE m\nVAR num x := 1;\n");
        text += &routine(400, 410);
        text += "PROC helper()\n    x := 2;\nENDPROC\n";
        text += "PROC mvx_y()\n    MoveJ pR7_1,vR7_rapid,z50,toR7_active;\n    WaitTime 1;\n    MoveJ pR7_2,vR7_rapid,z50,toR7_active;\nENDPROC\n";
        text += "ENDMODULE\n";
        std::fs::create_dir_all(dir.path().join("projA/backup1")).unwrap();
        std::fs::create_dir_all(dir.path().join("projB")).unwrap();
        std::fs::write(dir.path().join("projA/backup1/a.mod"), &text).unwrap();
        std::fs::write(dir.path().join("projB/b.MODX"), &text).unwrap();
        std::fs::write(dir.path().join("projB/notes.txt"), "ignored").unwrap();

        let ex = extract_corpus(&[dir.path().to_path_buf()], &c, Execution::Parallel);
        let s = &ex.summary;
        assert_eq!((s.projects, s.backups, s.files), (2, 2, 2));
        assert_eq!((s.procedures, s.simple, s.complex, s.other), (6, 2, 2, 2));
        assert_eq!((s.unique, s.unique_simple, s.unique_complex), (2, 1, 1));
        assert!(ex.diagnostics.is_empty());
        assert_eq!(ex, extract_corpus(&[dir.path().to_path_buf()], &c, Execution::Sequential));

        let empty = tempfile::tempdir().unwrap();
        let ex = extract_corpus(&[empty.path().to_path_buf()], &c, Execution::Parallel);
        assert_eq!(ex.summary, CorpusSummary::default());
        let missing = extract_corpus(&[dir.path().join("nope")], &c, Execution::Parallel);
        assert_eq!(missing.diagnostics.len(), 1);
    }
}
