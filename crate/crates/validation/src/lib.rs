//! Pass/fail bookkeeping for the acceptance run: each check prints one
//! line as soon as it is decided, and the run exits non-zero if any failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
}

impl Line {
    pub fn new(id: impl Into<String>, title: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Line {
            id: id.into(),
            title: title.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Default)]
pub struct Board {
    lines: Vec<Line>,
}

fn render(line: &Line, secs: f64) -> String {
    format!(
        "{} {:<4} {}: {} [{secs:.1} s]",
        if line.pass { "PASS" } else { "FAIL" },
        line.id,
        line.title,
        line.detail
    )
}

impl Board {
    pub fn new() -> Self {
        Board::default()
    }

    /// Runs one criterion. An error or panic becomes a single failed line.
    pub fn run<F>(&mut self, id: &str, title: &str, f: F)
    where
        F: FnOnce() -> Result<Vec<Line>, String>,
    {
        let start = Instant::now();
        let lines = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(lines)) if !lines.is_empty() => lines,
            Ok(Ok(_)) => vec![Line::new(id, title, false, "no checks were made")],
            Ok(Err(e)) => vec![Line::new(id, title, false, format!("error: {e}"))],
            Err(_) => vec![Line::new(id, title, false, "panicked")],
        };
        let secs = start.elapsed().as_secs_f64();
        for line in lines {
            println!("{}", render(&line, secs));
            self.lines.push(line);
        }
    }

    pub fn failed(&self) -> Vec<&Line> {
        self.lines.iter().filter(|l| !l.pass).collect()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    /// Prints the summary and returns the process exit code.
    pub fn finish(&self) -> i32 {
        let failed = self.failed();
        println!(
            "acceptance: {} passed, {} failed",
            self.len() - failed.len(),
            failed.len()
        );
        for l in &failed {
            println!("  failed: {} {}", l.id, l.title);
        }
        i32::from(!failed.is_empty())
    }
}
