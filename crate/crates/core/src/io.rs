//! File formats. All values are 1-based.
//!
//! The canonical form is compact JSON, one object per file followed by a newline:
//! `{"kind":"pls","n":4,"cells":[[1,1,3],[2,4,1]]}` for partial and Latin
//! squares, `{"kind":"array","n":4,"cells":[[1,1,[2,3]]]}` for arrays. Cells are
//! listed in row-major order and arrays omit empty cells.
//!
//! The text grid has `n` on the first line and then one line per row with
//! space-separated cells: a symbol, `.` for an empty cell, or for arrays a
//! comma-separated symbol list (`.` for the empty set).

use serde::{Deserialize, Serialize};

use crate::array::AvoidanceArray;
use crate::error::{Error, Result};
use crate::square::{check_order, LatinSquare, PartialLatinSquare};
use crate::trade::TradeLogLine;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Pls,
    Array,
    Latin,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum CellEntry {
    Symbol(usize, usize, usize),
    Set(usize, usize, Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    kind: Kind,
    n: usize,
    cells: Vec<CellEntry>,
}

/// A parsed instance of any kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Pls(PartialLatinSquare),
    Array(AvoidanceArray),
    Latin(LatinSquare),
}

impl Instance {
    pub fn kind(&self) -> Kind {
        match self {
            Instance::Pls(_) => Kind::Pls,
            Instance::Array(_) => Kind::Array,
            Instance::Latin(_) => Kind::Latin,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Instance::Pls(p) => p.order(),
            Instance::Array(a) => a.order(),
            Instance::Latin(l) => l.order(),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Instance::Pls(p) => pls_to_json(p),
            Instance::Array(a) => array_to_json(a),
            Instance::Latin(l) => latin_to_json(l),
        }
    }
}

fn write_json(file: &InstanceFile) -> String {
    let mut s = serde_json::to_string(file).expect("instance serializes");
    s.push('\n');
    s
}

fn symbol_entries(kind: Kind, p: &PartialLatinSquare) -> String {
    let cells = p.entries().map(|(c, s)| CellEntry::Symbol(c.row + 1, c.col + 1, s + 1)).collect();
    write_json(&InstanceFile { kind, n: p.order(), cells })
}

pub fn pls_to_json(p: &PartialLatinSquare) -> String {
    symbol_entries(Kind::Pls, p)
}

pub fn latin_to_json(l: &LatinSquare) -> String {
    symbol_entries(Kind::Latin, &l.to_partial())
}

pub fn array_to_json(a: &AvoidanceArray) -> String {
    let n = a.order();
    let mut cells = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let syms = a.symbols(r, c);
            if !syms.is_empty() {
                cells.push(CellEntry::Set(r + 1, c + 1, syms.into_iter().map(|s| s + 1).collect()));
            }
        }
    }
    write_json(&InstanceFile { kind: Kind::Array, n, cells })
}

fn in_range(v: usize, n: usize, what: &str) -> Result<usize> {
    if v == 0 || v > n {
        return Err(Error::Parse(format!("{what} {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

fn parse_json(text: &str) -> Result<Instance> {
    parse_json_with(text, false)
}

fn parse_json_with(text: &str, lenient: bool) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = file.n;
    check_order(n)?;
    match file.kind {
        Kind::Pls | Kind::Latin => {
            let mut grid = vec![vec![None; n]; n];
            for cell in &file.cells {
                let CellEntry::Symbol(r, c, s) = *cell else {
                    return Err(Error::Parse("square cells must be [row, col, symbol]".into()));
                };
                let (r, c, s) = (in_range(r, n, "row")?, in_range(c, n, "column")?, in_range(s, n, "symbol")?);
                if grid[r][c].replace(s).is_some() {
                    return Err(Error::Parse(format!("cell ({}, {}) listed twice", r + 1, c + 1)));
                }
            }
            if lenient {
                return Ok(Instance::Pls(PartialLatinSquare::from_rows_unchecked(&grid)?));
            }
            let p = PartialLatinSquare::from_rows(&grid)?;
            if file.kind == Kind::Pls {
                Ok(Instance::Pls(p))
            } else {
                Ok(Instance::Latin(p.to_latin()?))
            }
        }
        Kind::Array => {
            let mut a = AvoidanceArray::empty(n);
            for cell in &file.cells {
                let CellEntry::Set(r, c, ref syms) = *cell else {
                    return Err(Error::Parse("array cells must be [row, col, [symbols]]".into()));
                };
                let (r, c) = (in_range(r, n, "row")?, in_range(c, n, "column")?);
                for &s in syms {
                    a.insert(r, c, in_range(s, n, "symbol")?);
                }
            }
            Ok(Instance::Array(a))
        }
    }
}

/// Text grids carry no kind; `kind` says how to read them.
fn parse_text(text: &str, kind: Kind) -> Result<Instance> {
    parse_text_with(text, kind, false)
}

fn parse_text_with(text: &str, kind: Kind, lenient: bool) -> Result<Instance> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?
        .parse()
        .map_err(|_| Error::Parse("first line must be the order".into()))?;
    check_order(n)?;
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split_whitespace().collect()).collect();
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("expected {n} rows of {n} cells")));
    }
    let sym = |tok: &str| -> Result<usize> {
        let v: usize = tok.parse().map_err(|_| Error::Parse(format!("bad symbol {tok:?}")))?;
        in_range(v, n, "symbol")
    };
    match kind {
        Kind::Array => {
            let mut a = AvoidanceArray::empty(n);
            for (r, row) in rows.iter().enumerate() {
                for (c, tok) in row.iter().enumerate() {
                    if *tok != "." {
                        for part in tok.split(',') {
                            a.insert(r, c, sym(part)?);
                        }
                    }
                }
            }
            Ok(Instance::Array(a))
        }
        Kind::Pls | Kind::Latin => {
            let mut grid = Vec::with_capacity(n);
            for row in &rows {
                grid.push(row.iter().map(|t| if *t == "." { Ok(None) } else { sym(t).map(Some) }).collect::<Result<Vec<_>>>()?);
            }
            if lenient {
                return Ok(Instance::Pls(PartialLatinSquare::from_rows_unchecked(&grid)?));
            }
            let p = PartialLatinSquare::from_rows(&grid)?;
            if kind == Kind::Pls {
                Ok(Instance::Pls(p))
            } else {
                Ok(Instance::Latin(p.to_latin()?))
            }
        }
    }
}

/// Parses JSON (detected by a leading `{`) or a text grid read as `text_kind`.
pub fn parse_instance(text: &str, text_kind: Kind) -> Result<Instance> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text, text_kind)
    }
}

pub fn parse_pls(text: &str) -> Result<PartialLatinSquare> {
    match parse_instance(text, Kind::Pls)? {
        Instance::Pls(p) => Ok(p),
        Instance::Latin(l) => Ok(l.to_partial()),
        Instance::Array(_) => Err(Error::Parse("expected a partial Latin square, found an array".into())),
    }
}

pub fn parse_array(text: &str) -> Result<AvoidanceArray> {
    match parse_instance(text, Kind::Array)? {
        Instance::Array(a) => Ok(a),
        other => Err(Error::Parse(format!("expected an array, found {:?}", other.kind()))),
    }
}

pub fn parse_latin(text: &str) -> Result<LatinSquare> {
    match parse_instance(text, Kind::Latin)? {
        Instance::Latin(l) => Ok(l),
        Instance::Pls(p) => p.to_latin(),
        Instance::Array(_) => Err(Error::Parse("expected a Latin square, found an array".into())),
    }
}

/// Reads a square file without requiring it to be a partial Latin square,
/// so that a verifier can report every violation it contains.
pub fn parse_candidate(text: &str) -> Result<PartialLatinSquare> {
    let inst = if text.trim_start().starts_with('{') { parse_json_with(text, true)? } else { parse_text_with(text, Kind::Latin, true)? };
    match inst {
        Instance::Pls(p) => Ok(p),
        _ => Err(Error::Parse("expected a square, found an array".into())),
    }
}

/// Text grid for a partial or Latin square.
pub fn pls_to_text(p: &PartialLatinSquare) -> String {
    let n = p.order();
    let mut out = format!("{n}\n");
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| p.get(r, c).map_or_else(|| ".".to_string(), |s| (s + 1).to_string())).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn array_to_text(a: &AvoidanceArray) -> String {
    let n = a.order();
    let mut out = format!("{n}\n");
    for r in 0..n {
        let row: Vec<String> = (0..n)
            .map(|c| {
                let syms = a.symbols(r, c);
                if syms.is_empty() {
                    ".".to_string()
                } else {
                    syms.iter().map(|s| (s + 1).to_string()).collect::<Vec<_>>().join(",")
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// One JSON object per line.
pub fn trade_log_to_jsonl(log: &[TradeLogLine]) -> String {
    let mut out = String::new();
    for line in log {
        out.push_str(&serde_json::to_string(line).expect("log line serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_trade_log(text: &str) -> Result<Vec<TradeLogLine>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("trade log line {}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pls_json_round_trip() {
        let p = PartialLatinSquare::from_entries(4, &[(0, 0, 2), (1, 3, 0)]).unwrap();
        let text = pls_to_json(&p);
        assert_eq!(text, "{\"kind\":\"pls\",\"n\":4,\"cells\":[[1,1,3],[2,4,1]]}\n");
        assert_eq!(parse_pls(&text).unwrap(), p);
        assert_eq!(pls_to_json(&parse_pls(&text).unwrap()), text);
    }

    #[test]
    fn array_json_round_trip() {
        let mut a = AvoidanceArray::empty(3);
        a.insert(0, 0, 1);
        a.insert(0, 0, 2);
        a.insert(2, 1, 0);
        let text = array_to_json(&a);
        assert_eq!(text, "{\"kind\":\"array\",\"n\":3,\"cells\":[[1,1,[2,3]],[3,2,[1]]]}\n");
        assert_eq!(parse_array(&text).unwrap(), a);
    }

    #[test]
    fn candidate_keeps_duplicates() {
        let text = "{\"kind\":\"latin\",\"n\":2,\"cells\":[[1,1,1],[1,2,1],[2,1,2],[2,2,2]]}\n";
        assert!(parse_latin(text).is_err());
        let grid = parse_candidate(text).unwrap();
        assert_eq!(grid.get(0, 1), Some(0));
        assert!(parse_candidate("2\n1 .\n. 3\n").is_err());
    }

    #[test]
    fn text_grids_round_trip() {
        let p = PartialLatinSquare::from_entries(3, &[(1, 2, 0)]).unwrap();
        assert_eq!(pls_to_text(&p), "3\n. . .\n. . 1\n. . .\n");
        assert_eq!(parse_pls(&pls_to_text(&p)).unwrap(), p);
        let mut a = AvoidanceArray::empty(2);
        a.insert(1, 1, 0);
        a.insert(1, 1, 1);
        assert_eq!(parse_array(&array_to_text(&a)).unwrap(), a);
    }

    #[test]
    fn rejects_out_of_range_and_duplicates() {
        assert!(parse_pls("{\"kind\":\"pls\",\"n\":2,\"cells\":[[1,1,3]]}").is_err());
        assert!(parse_pls("{\"kind\":\"pls\",\"n\":2,\"cells\":[[1,1,1],[1,1,2]]}").is_err());
        assert!(parse_pls("{\"kind\":\"pls\",\"n\":2,\"cells\":[[1,1,1],[1,2,1]]}").is_err());
        assert!(parse_latin("{\"kind\":\"latin\",\"n\":2,\"cells\":[[1,1,1]]}").is_err());
    }

    #[test]
    fn trade_log_round_trip() {
        let log = vec![
            TradeLogLine::Start { n: 4, odd_start: false, sigma: vec![1, 2, 3, 4], tau: vec![4, 3, 2, 1] },
            TradeLogLine::Trade { step: 1, target: Some([1, 2]), cells: vec![[1, 1, 2, 3]] },
        ];
        assert_eq!(parse_trade_log(&trade_log_to_jsonl(&log)).unwrap(), log);
    }
}
