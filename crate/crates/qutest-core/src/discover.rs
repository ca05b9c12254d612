//! Test discovery: expand file and directory roots into the ordered list
//! of `.qasm` files.

use std::path::PathBuf;

use thiserror::Error;
use walkdir::WalkDir;

use crate::ast::Program;
use crate::diag::{Code, Diagnostic};
use crate::parser::parse_with_recovery;

#[derive(Debug, Error)]
pub enum DiscoverError {
    #[error("path '{0}' does not exist")]
    Missing(PathBuf),
    #[error("cannot scan '{path}': {source}")]
    Walk {
        path: PathBuf,
        source: walkdir::Error,
    },
}

/// Every `.qasm` file under the given roots, lexicographically ordered by
/// path and deduplicated. A root that is itself a file is taken as-is;
/// directories are scanned recursively for the `.qasm` extension.
pub fn discover(paths: &[PathBuf]) -> Result<Vec<PathBuf>, DiscoverError> {
    let mut files = Vec::new();
    for root in paths {
        if !root.exists() {
            return Err(DiscoverError::Missing(root.clone()));
        }
        if root.is_file() {
            files.push(root.clone());
            continue;
        }
        for entry in WalkDir::new(root).sort_by_file_name() {
            let entry = entry.map_err(|e| DiscoverError::Walk { path: root.clone(), source: e })?;
            if entry.file_type().is_file()
                && entry.path().extension().is_some_and(|ext| ext == "qasm")
            {
                files.push(entry.into_path());
            }
        }
    }
    files.sort();
    files.dedup();
    Ok(files)
}

/// One discovered file with its best-effort parse.
#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub path: PathBuf,
    pub source: String,
    pub program: Program,
    pub diagnostics: Vec<Diagnostic>,
}

/// Discover and parse with recovery. Unreadable files yield an empty
/// program carrying one syntax diagnostic rather than aborting the run.
pub fn discover_and_parse(paths: &[PathBuf]) -> Result<Vec<ParsedFile>, DiscoverError> {
    let mut out = Vec::new();
    for path in discover(paths)? {
        let source = match std::fs::read_to_string(&path) {
            Ok(s) => s,
            Err(e) => {
                let (program, _) = parse_with_recovery("", &path);
                out.push(ParsedFile {
                    path: path.clone(),
                    source: String::new(),
                    program,
                    diagnostics: vec![Diagnostic::new(
                        Code::SyntaxError,
                        1,
                        format!("cannot read file: {e}"),
                    )],
                });
                continue;
            }
        };
        let (program, diagnostics) = parse_with_recovery(&source, &path);
        out.push(ParsedFile { path, source, program, diagnostics });
    }
    Ok(out)
}

/// Convenience used by the CLI `lint` subcommand.
pub fn lint_paths(paths: &[PathBuf]) -> Result<Vec<(PathBuf, Vec<Diagnostic>)>, DiscoverError> {
    let mut out = Vec::new();
    for file in discover_and_parse(paths)? {
        let diags = crate::lint::lint_program(&file.program, file.diagnostics);
        out.push((file.path, diags));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters_extension_and_orders_lexicographically() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("a")).unwrap();
        std::fs::write(dir.path().join("a/x.qasm"), "OPENQASM 3;").unwrap();
        std::fs::write(dir.path().join("b.txt"), "not qasm").unwrap();
        std::fs::write(dir.path().join("y.qasm"), "OPENQASM 3;").unwrap();
        let found = discover(&[dir.path().to_path_buf()]).unwrap();
        let names: Vec<PathBuf> = found
            .iter()
            .map(|p| p.strip_prefix(dir.path()).unwrap().to_path_buf())
            .collect();
        assert_eq!(names, [PathBuf::from("a/x.qasm"), PathBuf::from("y.qasm")]);
    }

    #[test]
    fn single_file_root_is_taken_as_is() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("bell_test.qasm");
        std::fs::write(&file, "OPENQASM 3;").unwrap();
        assert_eq!(discover(&[file.clone()]).unwrap(), vec![file]);
    }

    #[test]
    fn empty_directory_yields_nothing() {
        let dir = tempfile::tempdir().unwrap();
        assert!(discover(&[dir.path().to_path_buf()]).unwrap().is_empty());
    }

    #[test]
    fn missing_path_is_an_error() {
        let err = discover(&[PathBuf::from("/no/such/path.qasm")]).unwrap_err();
        assert!(matches!(err, DiscoverError::Missing(_)));
    }

    #[test]
    fn duplicate_roots_deduplicate() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("t.qasm");
        std::fs::write(&file, "OPENQASM 3;").unwrap();
        let found = discover(&[dir.path().to_path_buf(), file.clone()]).unwrap();
        assert_eq!(found, vec![file]);
    }
}
