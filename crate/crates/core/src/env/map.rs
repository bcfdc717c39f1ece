//! Map document reader/writer.
//!
//! ```text
//! map <width_m> <height_m> <cell_size_m>
//! ..........
//! ....#.....
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::{EnvError, Environment};

fn parse_err(line: usize, msg: impl Into<String>) -> EnvError {
    EnvError::Parse { line, msg: msg.into() }
}

fn dim_count(extent: f64, cell: f64, what: &str) -> Result<usize, EnvError> {
    let n = extent / cell;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(parse_err(1, format!("{what} {extent} is not a positive multiple of cell size {cell}")));
    }
    Ok(rounded as usize)
}

impl Environment {
    /// Parses a map document. Dynamic obstacles start empty, version 0.
    pub fn parse(text: &str) -> Result<Environment, EnvError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty document"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("map") {
            return Err(parse_err(1, "header must start with `map`"));
        }
        let mut num = |name: &str| -> Result<f64, EnvError> {
            let tok = fields.next().ok_or_else(|| parse_err(1, format!("missing {name}")))?;
            let v: f64 = tok.parse().map_err(|_| parse_err(1, format!("bad {name} `{tok}`")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(parse_err(1, format!("{name} must be positive")));
            }
            Ok(v)
        };
        let width = num("width")?;
        let height = num("height")?;
        let cell = num("cell size")?;
        if fields.next().is_some() {
            return Err(parse_err(1, "trailing tokens in header"));
        }
        let cols = dim_count(width, cell, "width")?;
        let rows = dim_count(height, cell, "height")?;

        let mut blocked = Vec::with_capacity(cols * rows);
        let mut seen_rows = 0;
        for (lineno, line) in lines {
            if line.is_empty() && seen_rows == rows {
                continue;
            }
            if seen_rows == rows {
                return Err(parse_err(lineno, format!("more than {rows} rows")));
            }
            let mut n = 0;
            for ch in line.chars() {
                match ch {
                    '.' => blocked.push(false),
                    '#' => blocked.push(true),
                    other => return Err(parse_err(lineno, format!("unexpected character `{other}`"))),
                }
                n += 1;
            }
            if n != cols {
                return Err(parse_err(lineno, format!("row has {n} cells, expected {cols}")));
            }
            seen_rows += 1;
        }
        if seen_rows != rows {
            return Err(parse_err(0, format!("expected {rows} rows, found {seen_rows}")));
        }
        Environment::from_grid(cols, rows, cell, blocked)
    }

    /// Renders the static map back into the document format.
    pub fn to_document(&self) -> String {
        let mut out = String::with_capacity((self.cols + 1) * (self.rows + 1));
        let _ = writeln!(out, "map {} {} {}", self.width, self.height, self.cell_size);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(if self.is_cell_blocked(c, r) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for Environment {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Environment::parse(s)
    }
}
