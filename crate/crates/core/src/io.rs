//! Algorithm files: canonical JSON and a whitespace-separated text format.
//!
//! Text layout: a header line `m n p r`, then `3r` blocks separated by blank
//! lines, cycling through `u` (`m x n`), `v` (`n x p`) and `w` (`p x m`).

use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use crate::algorithm::{Algorithm, MatMulFormat, Role, TriadTerm};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{format_rational, is_integral, parse_rational, serde_str, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FileFormat {
    Json,
    Text,
}

impl FileFormat {
    /// By extension first, then by the first non-blank byte.
    pub fn detect(path: Option<&Path>, content: &str) -> Self {
        match path.and_then(Path::extension).and_then(|e| e.to_str()) {
            Some("json") => return FileFormat::Json,
            Some("txt") | Some("alg") => return FileFormat::Text,
            _ => {}
        }
        if content.trim_start().starts_with('{') {
            FileFormat::Json
        } else {
            FileFormat::Text
        }
    }
}

pub fn read_algorithm(path: impl AsRef<Path>) -> Result<Algorithm> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)?;
    parse_algorithm(&content, Some(FileFormat::detect(Some(path), &content)))
}

pub fn write_algorithm(path: impl AsRef<Path>, q: &Algorithm) -> Result<()> {
    let path = path.as_ref();
    let text = match FileFormat::detect(Some(path), "{") {
        FileFormat::Json => to_json(q),
        FileFormat::Text => to_text(q),
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn parse_algorithm(content: &str, hint: Option<FileFormat>) -> Result<Algorithm> {
    match hint.unwrap_or_else(|| FileFormat::detect(None, content)) {
        FileFormat::Json => parse_json(content),
        FileFormat::Text => parse_text(content),
    }
}

fn entry_json(x: &Rational) -> Value {
    if is_integral(x) {
        if let Ok(i) = i64::try_from(x.numer()) {
            return json!(i);
        }
    }
    json!(format_rational(x))
}

fn matrix_json(a: &Matrix) -> Value {
    Value::Array(
        (0..a.rows())
            .map(|i| Value::Array(a.row(i).iter().map(entry_json).collect()))
            .collect(),
    )
}

pub fn to_json_value(q: &Algorithm) -> Value {
    let f = q.format();
    let terms: Vec<Value> = q
        .terms()
        .iter()
        .map(|t| json!({ "u": matrix_json(&t.u), "v": matrix_json(&t.v), "w": matrix_json(&t.w) }))
        .collect();
    json!({
        "format": { "m": f.m, "n": f.n, "p": f.p },
        "length": q.len(),
        "terms": terms,
    })
}

/// Pretty-printed canonical JSON.
pub fn to_json(q: &Algorithm) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(q)).expect("json values serialize");
    s.push('\n');
    s
}

pub fn to_text(q: &Algorithm) -> String {
    let f = q.format();
    let mut out = format!("{} {} {} {}\n", f.m, f.n, f.p, q.len());
    for term in q.terms() {
        for role in Role::ALL {
            out.push('\n');
            let a = term.factor(role);
            for i in 0..a.rows() {
                let row: Vec<String> = a.row(i).iter().map(format_rational).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
    }
    out
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn field<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Shape(format!("{ctx}: missing field {key:?}")))
}

fn dimension(v: &Value, key: &str) -> Result<usize> {
    field(v, key, "format")?
        .as_u64()
        .filter(|&d| d > 0)
        .map(|d| d as usize)
        .ok_or_else(|| Error::Value(format!("format.{key} must be a positive integer")))
}

fn matrix_from_json(v: &Value, shape: (usize, usize), ctx: &str) -> Result<Matrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Shape(format!("{ctx}: expected an array of rows")))?;
    if rows.len() != shape.0 {
        return Err(Error::Shape(format!("{ctx}: expected {} rows, found {}", shape.0, rows.len())));
    }
    let mut data = Vec::with_capacity(shape.0 * shape.1);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Shape(format!("{ctx}: row {i} is not an array")))?;
        if row.len() != shape.1 {
            return Err(Error::Shape(format!(
                "{ctx}: row {i} has {} entries, expected {}",
                row.len(),
                shape.1
            )));
        }
        for x in row {
            data.push(serde_str::from_json(x).map_err(|m| Error::Value(format!("{ctx}: {m}")))?);
        }
    }
    Matrix::from_vec(shape.0, shape.1, data)
}

fn parse_json(content: &str) -> Result<Algorithm> {
    let root: Value = serde_json::from_str(content).map_err(json_error)?;
    let fv = field(&root, "format", "algorithm")?;
    let format = MatMulFormat::new(dimension(fv, "m")?, dimension(fv, "n")?, dimension(fv, "p")?)?;
    let terms_v = field(&root, "terms", "algorithm")?
        .as_array()
        .ok_or_else(|| Error::Shape("terms must be an array".into()))?;
    if let Some(len) = root.get("length") {
        let len = len
            .as_u64()
            .ok_or_else(|| Error::Value("length must be a non-negative integer".into()))?;
        if len as usize != terms_v.len() {
            return Err(Error::Shape(format!("length is {len} but {} terms are listed", terms_v.len())));
        }
    }
    let mut terms = Vec::with_capacity(terms_v.len());
    for (t, tv) in terms_v.iter().enumerate() {
        let factor = |role: Role, key: &str| {
            let ctx = format!("term {t}, {key}");
            matrix_from_json(field(tv, key, &ctx)?, format.shape(role), &ctx)
        };
        terms.push(TriadTerm::new(factor(Role::U, "u")?, factor(Role::V, "v")?, factor(Role::W, "w")?));
    }
    Algorithm::new(format, terms)
}

struct Line<'a> {
    number: usize,
    text: &'a str,
}

fn tokens<'a>(line: &Line<'a>) -> impl Iterator<Item = (usize, &'a str)> {
    let base = line.text.as_ptr() as usize;
    line.text
        .split_whitespace()
        .map(move |tok| (tok.as_ptr() as usize - base + 1, tok))
}

fn parse_entry(line: &Line<'_>, column: usize, tok: &str) -> Result<Rational> {
    parse_rational(tok).map_err(|e| match e {
        Error::Value(msg) if msg.starts_with("zero denominator") => {
            Error::Value(format!("line {}, column {column}: {msg}", line.number))
        }
        _ => Error::Parse {
            line: line.number,
            column,
            message: format!("invalid entry {tok:?}"),
        },
    })
}

fn parse_text(content: &str) -> Result<Algorithm> {
    let lines: Vec<Line<'_>> = content
        .lines()
        .enumerate()
        .map(|(i, text)| Line { number: i + 1, text })
        .collect();
    let mut rest = lines.iter().skip_while(|l| l.text.trim().is_empty());
    let header = rest.next().ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "empty input".into(),
    })?;
    let dims: Vec<usize> = tokens(header)
        .map(|(column, tok)| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: header.number,
                column,
                message: format!("expected a non-negative integer, found {tok:?}"),
            })
        })
        .collect::<Result<_>>()?;
    let [m, n, p, r] = dims[..] else {
        return Err(Error::Parse {
            line: header.number,
            column: 1,
            message: format!("header must be \"m n p r\", found {} fields", dims.len()),
        });
    };
    let format = MatMulFormat::new(m, n, p)?;

    let mut blocks: Vec<Vec<&Line<'_>>> = Vec::new();
    let mut open = false;
    for line in rest {
        if line.text.trim().is_empty() {
            open = false;
        } else {
            if !open {
                blocks.push(Vec::new());
                open = true;
            }
            blocks.last_mut().expect("just pushed").push(line);
        }
    }
    if blocks.len() != 3 * r {
        return Err(Error::Shape(format!(
            "header announces {r} terms ({} blocks), found {} blocks",
            3 * r,
            blocks.len()
        )));
    }

    let mut factors = Vec::with_capacity(3 * r);
    for (b, block) in blocks.iter().enumerate() {
        let role = Role::ALL[b % 3];
        let (rows, cols) = format.shape(role);
        let first = block[0].number;
        if block.len() != rows {
            return Err(Error::Shape(format!(
                "term {} {role} block at line {first} has {} rows, expected {rows}",
                b / 3,
                block.len()
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for line in block {
            let row: Vec<(usize, &str)> = tokens(line).collect();
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "line {}: {} entries, expected {cols} for a {rows}x{cols} {role} block",
                    line.number,
                    row.len()
                )));
            }
            for (column, tok) in row {
                data.push(parse_entry(line, column, tok)?);
            }
        }
        factors.push(Matrix::from_vec(rows, cols, data)?);
    }
    let mut it = factors.into_iter();
    let mut terms = Vec::with_capacity(r);
    while let (Some(u), Some(v), Some(w)) = (it.next(), it.next(), it.next()) {
        terms.push(TriadTerm::new(u, v, w));
    }
    Algorithm::new(format, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithm::{builtin_strassen, natural_algorithm};
    use crate::brent::is_solution;
    use crate::rational::frac;

    #[test]
    fn natural_round_trips() {
        let q = natural_algorithm(MatMulFormat::new(2, 2, 2).unwrap());
        assert_eq!(parse_algorithm(&to_json(&q), None).unwrap(), q);
        assert_eq!(parse_algorithm(&to_text(&q), None).unwrap(), q);
    }

    #[test]
    fn strassen_text_file() {
        let text = to_text(&builtin_strassen());
        assert!(text.starts_with("2 2 2 7\n\n1 0\n0 1\n\n"));
        let q = parse_algorithm(&text, Some(FileFormat::Text)).unwrap();
        assert!(is_solution(&q));
    }

    #[test]
    fn oversized_block_is_shape_error() {
        let text = "2 2 2 1\n1 0 0\n0 1 0\n0 0 1\n\n1 0\n0 1\n\n1 0\n0 1\n";
        assert!(matches!(parse_algorithm(text, None), Err(Error::Shape(_))));
        let text = "2 2 2 1\n1 0\n0 1\n1 0\n\n1 0\n0 1\n\n1 0\n0 1\n";
        assert!(matches!(parse_algorithm(text, None), Err(Error::Shape(_))));
        let text = "2 2 2 2\n1 0\n0 1\n\n1 0\n0 1\n\n1 0\n0 1\n";
        assert!(matches!(parse_algorithm(text, None), Err(Error::Shape(_))));
    }

    #[test]
    fn parse_errors_locate_the_token() {
        let text = "1 1 1 1\n1\n\nx\n\n1\n";
        match parse_algorithm(text, None) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (4, 1)),
            other => panic!("{other:?}"),
        }
        let text = "1 1 1 1\n1\n\n  2/0\n\n1\n";
        assert!(matches!(parse_algorithm(text, None), Err(Error::Value(_))));
        match parse_algorithm("1 1 1\n", None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_algorithm("{\"format\": ", None), Err(Error::Parse { .. })));
    }

    #[test]
    fn json_entries() {
        let mut q = natural_algorithm(MatMulFormat::new(1, 1, 1).unwrap());
        let mut t = q.terms()[0].clone();
        t.u[(0, 0)] = frac(-3, 4);
        q = q.with_term(0, t).unwrap();
        let s = to_json(&q);
        assert!(s.contains("\"-3/4\""));
        assert_eq!(parse_algorithm(&s, None).unwrap(), q);

        let zero_den = r#"{"format":{"m":1,"n":1,"p":1},"length":1,"terms":[{"u":[["1/0"]],"v":[[1]],"w":[[1]]}]}"#;
        assert!(matches!(parse_algorithm(zero_den, None), Err(Error::Value(_))));
        let bad_len = r#"{"format":{"m":1,"n":1,"p":1},"length":2,"terms":[{"u":[[1]],"v":[[1]],"w":[[1]]}]}"#;
        assert!(matches!(parse_algorithm(bad_len, None), Err(Error::Shape(_))));
        let bad_shape = r#"{"format":{"m":1,"n":2,"p":1},"length":1,"terms":[{"u":[[1]],"v":[[1],[0]],"w":[[1]]}]}"#;
        assert!(matches!(parse_algorithm(bad_shape, None), Err(Error::Shape(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let q = builtin_strassen();
        for name in ["s.json", "s.txt"] {
            let path = dir.path().join(name);
            write_algorithm(&path, &q).unwrap();
            assert_eq!(read_algorithm(&path).unwrap(), q);
        }
    }
}
