use crate::Failure;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One non-negative float per line; blank lines and lines starting with '#' are skipped.
pub fn parse_eigenvalues(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| format!("line {}: cannot parse {line:?} as a number", i + 1))?;
        if !v.is_finite() || v < 0.0 {
            return Err(format!("line {}: eigenvalue {v} must be finite and non-negative", i + 1));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err("no eigenvalues found".into());
    }
    Ok(out)
}

pub fn read_eigenvalues(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_eigenvalues(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| Failure::Runtime(e.to_string()))
}

pub fn csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Comma-separated spike vector.
pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("cannot parse {t:?} as a number")))
        .collect()
}

/// Counts such as 1e6 are accepted.
pub fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.parse().map_err(|_| format!("cannot parse {s:?} as a count"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e12) {
        return Err(format!("{s} is not a positive whole number"));
    }
    Ok(v as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_file_errors_name_the_line() {
        assert_eq!(parse_eigenvalues("1.5\n\n# c\n0.25\n").unwrap(), vec![1.5, 0.25]);
        let e = parse_eigenvalues("1.0\n-2.0\n").unwrap_err();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_eigenvalues("1.0\nabc\n").unwrap_err();
        assert!(e.contains("line 2"));
        assert!(parse_eigenvalues("\n").is_err());
    }

    #[test]
    fn counts_and_vectors() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert!(parse_count("2.5").is_err());
        assert_eq!(parse_vector("0.5, 0.25").unwrap(), vec![0.5, 0.25]);
    }
}
