#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
        .display()
        .to_string()
}

pub fn relax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relax"))
        .args(args)
        .env_remove("RELAX_LOG")
        .output()
        .expect("failed to launch relax")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Run, insist on success, return stdout.
pub fn ok(args: &[&str]) -> String {
    let out = relax(args);
    assert!(
        out.status.success(),
        "relax {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

/// Parsed CSV artifact: `#` metadata lines, header and rows.
pub struct Csv {
    pub meta: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn parse(text: &str) -> Csv {
        let meta: Vec<String> = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| l.to_string())
            .collect();
        let body: String = text
            .lines()
            .skip(meta.len())
            .map(|l| format!("{l}\n"))
            .collect();
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let header = reader.headers().unwrap().iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        Csv { meta, header, rows }
    }

    pub fn column(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header))
    }

    pub fn num(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.column(name)].parse().unwrap()
    }

    pub fn nums(&self, row: usize, names: &[String]) -> Vec<f64> {
        names.iter().map(|n| self.num(row, n)).collect()
    }

    /// Basis labels from the `# basis:` line.
    pub fn basis(&self) -> Vec<String> {
        self.meta
            .iter()
            .find_map(|l| l.strip_prefix("# basis: "))
            .expect("basis header")
            .split(',')
            .map(String::from)
            .collect()
    }
}
