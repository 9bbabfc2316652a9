use std::io::{Read, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub fn read(path: &Path) -> anyhow::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Text blocks separated by one or more blank lines.
pub fn blocks(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push_str(line);
            cur.push('\n');
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub struct Sink(Box<dyn Write>);

impl Sink {
    pub fn open(path: Option<&Path>) -> anyhow::Result<Self> {
        Ok(Sink(match path {
            Some(p) => Box::new(std::io::BufWriter::new(
                std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(std::io::BufWriter::new(std::io::stdout())),
        }))
    }

    pub fn line<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        serde_json::to_writer(&mut self.0, value)?;
        self.0.write_all(b"\n")?;
        Ok(())
    }

    pub fn pretty<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut self.0, value)?;
        self.0.write_all(b"\n")?;
        Ok(())
    }

    pub fn text(&mut self, s: &str) -> anyhow::Result<()> {
        self.0.write_all(s.as_bytes())?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.0.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_blank_runs() {
        assert_eq!(blocks("a\nb\n\n\n  \nc\n"), ["a\nb\n", "c\n"]);
        assert!(blocks("").is_empty());
        assert!(blocks("\n\n").is_empty());
    }
}
