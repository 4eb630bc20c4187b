//! The `antpat` text format, version 1.
//!
//! ```text
//! antpat 1 <ruleword>
//! ant <x> <y> <E|N|W|S>
//! <x> <y> <symbol>        one line per cell, sorted by (y, x)
//! ```
//!
//! Plain ASCII, LF line endings. Configurations list their nonzero cells;
//! patterns list every support cell, explicit zeros included. Readers reject
//! symbols outside the rule's alphabet.

use crate::engine::Configuration;
use crate::geom::{Cell, Direction};
use crate::pattern::Pattern;
use crate::picture::Picture;
use crate::rule::RuleWord;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntpatDoc {
    pub rule: RuleWord,
    pub position: Cell,
    pub direction: Direction,
    /// Cells in file order; zeros allowed (pattern support cells).
    pub cells: Vec<(Cell, u8)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AntpatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: symbol {symbol} out of range for rule of size {alphabet}")]
    SymbolRange {
        line: usize,
        symbol: u8,
        alphabet: usize,
    },
    #[error("line {line}: duplicate cell ({x},{y})")]
    DuplicateCell { line: usize, x: i64, y: i64 },
    #[error("bad rule word: {0}")]
    Rule(#[from] crate::rule::RuleError),
}

fn parse_err(line: usize, message: impl Into<String>) -> AntpatError {
    AntpatError::Parse {
        line,
        message: message.into(),
    }
}

impl AntpatDoc {
    pub fn for_configuration(rule: &RuleWord, config: &Configuration) -> Self {
        AntpatDoc {
            rule: rule.clone(),
            position: config.position,
            direction: config.direction,
            cells: config.picture.sorted_cells(),
        }
    }

    pub fn for_pattern(
        rule: &RuleWord,
        pattern: &Pattern,
        position: Cell,
        direction: Direction,
    ) -> Self {
        AntpatDoc {
            rule: rule.clone(),
            position,
            direction,
            cells: pattern.iter().collect(),
        }
    }

    pub fn to_configuration(&self) -> Configuration {
        Configuration::new(
            Picture::from_cells(self.cells.iter().copied().filter(|&(_, v)| v != 0)),
            self.position,
            self.direction,
        )
    }

    pub fn to_pattern(&self) -> Pattern {
        Pattern::from_cells(self.cells.iter().copied())
    }

    /// Serialise; cells are emitted sorted by `(y, x)` regardless of the
    /// in-memory order, so writing is canonical.
    pub fn to_text(&self) -> String {
        let mut cells = self.cells.clone();
        cells.sort_by_key(|&(c, _)| c);
        let mut out = String::new();
        writeln!(out, "antpat 1 {}", self.rule).unwrap();
        writeln!(
            out,
            "ant {} {} {}",
            self.position.x,
            self.position.y,
            self.direction.letter()
        )
        .unwrap();
        for (c, v) in cells {
            writeln!(out, "{} {} {}", c.x, c.y, v).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<AntpatDoc, AntpatError> {
        let mut lines = text.lines().enumerate();

        let (n, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "empty document"))?;
        let mut parts = header.split_ascii_whitespace();
        match (parts.next(), parts.next()) {
            (Some("antpat"), Some("1")) => {}
            _ => return Err(parse_err(n + 1, "expected header `antpat 1 <ruleword>`")),
        }
        let rule: RuleWord = parts
            .next()
            .ok_or_else(|| parse_err(n + 1, "missing rule word"))?
            .parse()?;
        if parts.next().is_some() {
            return Err(parse_err(n + 1, "trailing tokens after rule word"));
        }

        let (n, ant_line) = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing ant line"))?;
        let mut parts = ant_line.split_ascii_whitespace();
        if parts.next() != Some("ant") {
            return Err(parse_err(n + 1, "expected `ant <x> <y> <dir>`"));
        }
        let x: i64 = parse_token(&mut parts, n + 1, "ant x")?;
        let y: i64 = parse_token(&mut parts, n + 1, "ant y")?;
        let dir_tok = parts
            .next()
            .ok_or_else(|| parse_err(n + 1, "missing ant direction"))?;
        let direction = dir_tok
            .chars()
            .next()
            .filter(|_| dir_tok.len() == 1)
            .and_then(Direction::from_letter)
            .ok_or_else(|| parse_err(n + 1, format!("bad direction {dir_tok:?}")))?;

        let mut cells = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_ascii_whitespace();
            let cx: i64 = parse_token(&mut parts, n + 1, "cell x")?;
            let cy: i64 = parse_token(&mut parts, n + 1, "cell y")?;
            let symbol: u8 = parse_token(&mut parts, n + 1, "cell symbol")?;
            if parts.next().is_some() {
                return Err(parse_err(n + 1, "trailing tokens after cell"));
            }
            if symbol as usize >= rule.alphabet_size() {
                return Err(AntpatError::SymbolRange {
                    line: n + 1,
                    symbol,
                    alphabet: rule.alphabet_size(),
                });
            }
            if !seen.insert((cx, cy)) {
                return Err(AntpatError::DuplicateCell {
                    line: n + 1,
                    x: cx,
                    y: cy,
                });
            }
            cells.push((Cell::new(cx, cy), symbol));
        }
        Ok(AntpatDoc {
            rule,
            position: Cell::new(x, y),
            direction,
            cells,
        })
    }
}

fn parse_token<T: std::str::FromStr>(
    parts: &mut std::str::SplitAsciiWhitespace<'_>,
    line: usize,
    what: &str,
) -> Result<T, AntpatError> {
    let tok = parts
        .next()
        .ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what}: {tok:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_read_write_is_byte_identical() {
        let rule: RuleWord = "LLR".parse().unwrap();
        let mut config = Configuration::white();
        config.picture.set(Cell::new(2, -1), 1);
        config.picture.set(Cell::new(-3, -1), 2);
        config.picture.set(Cell::new(0, 4), 1);
        let doc = AntpatDoc::for_configuration(&rule, &config);
        let text = doc.to_text();
        let parsed = AntpatDoc::parse(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
        assert_eq!(parsed.to_configuration(), config);
    }

    #[test]
    fn pattern_docs_keep_zero_cells() {
        let rule: RuleWord = "LR".parse().unwrap();
        let pattern = Pattern::from_cells([(Cell::new(0, 0), 0), (Cell::new(1, 0), 1)]);
        let doc = AntpatDoc::for_pattern(&rule, &pattern, Cell::ORIGIN, Direction::South);
        let text = doc.to_text();
        assert!(text.contains("0 0 0\n"));
        let back = AntpatDoc::parse(&text).unwrap().to_pattern();
        assert_eq!(back, pattern);
    }

    #[test]
    fn rejects_symbol_outside_alphabet() {
        let text = "antpat 1 LR\nant 0 0 N\n3 4 2\n";
        assert!(matches!(
            AntpatDoc::parse(text),
            Err(AntpatError::SymbolRange { line: 3, symbol: 2, .. })
        ));
    }

    #[test]
    fn rejects_garbage() {
        assert!(AntpatDoc::parse("").is_err());
        assert!(AntpatDoc::parse("antpat 2 LR\nant 0 0 N\n").is_err());
        assert!(AntpatDoc::parse("antpat 1 LR\nant 0 0 Q\n").is_err());
        assert!(AntpatDoc::parse("antpat 1 LR\nant 0 0 N\n1 1 1\n1 1 0\n").is_err());
    }
}
