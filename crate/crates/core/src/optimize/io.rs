//! Plain-text instance format.
//!
//! ```text
//! # comments run to end of line
//! m n
//! o[0][0] ... o[0][n-1]      (m rows)
//! a[0][0] ... a[0][n-1]      (m rows)
//! s_t                         (one value, or m values)
//! o_q
//! ```
//!
//! Numbers are whitespace separated; line breaks are not significant.

use std::fmt::Write as _;

use super::{Capacity, KnapsackInstance, OptimizeError};

struct Tok<'a> {
    line: usize,
    text: &'a str,
}

fn tokens(text: &str) -> Vec<Tok<'_>> {
    text.lines()
        .enumerate()
        .flat_map(|(i, l)| {
            let l = l.split('#').next().unwrap_or("");
            l.split_whitespace().map(move |t| Tok { line: i + 1, text: t })
        })
        .collect()
}

fn number(t: &Tok) -> Result<f64, OptimizeError> {
    t.text
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| OptimizeError::Parse { line: t.line, msg: format!("expected a finite number, got '{}'", t.text) })
}

fn count(t: &Tok, what: &str) -> Result<usize, OptimizeError> {
    t.text
        .parse::<usize>()
        .map_err(|_| OptimizeError::Parse { line: t.line, msg: format!("expected {what} as a non-negative integer, got '{}'", t.text) })
}

pub fn parse_instance(text: &str) -> Result<KnapsackInstance, OptimizeError> {
    let toks = tokens(text);
    let last_line = text.lines().count().max(1);
    if toks.len() < 2 {
        return Err(OptimizeError::Parse { line: last_line, msg: "missing 'm n' header".into() });
    }
    let m = count(&toks[0], "m")?;
    let n = count(&toks[1], "n")?;
    if m == 0 {
        return Err(OptimizeError::Parse { line: toks[0].line, msg: "m must be at least 1".into() });
    }
    let body = &toks[2..];
    let mat = 2 * m * n;
    let cap_len = match body.len().checked_sub(mat + 1) {
        Some(1) => 1,
        Some(k) if k == m => m,
        _ => {
            let line = body.last().map_or(toks[1].line, |t| t.line);
            return Err(OptimizeError::Parse {
                line,
                msg: format!(
                    "expected {} numbers after the header (o, a, s_t with 1 or {m} values, o_q), found {}",
                    mat + 2,
                    body.len()
                ),
            });
        }
    };
    let vals: Vec<f64> = body.iter().map(number).collect::<Result<_, _>>()?;
    let rows = |off: usize| -> Vec<Vec<f64>> { (0..m).map(|i| vals[off + i * n..off + (i + 1) * n].to_vec()).collect() };
    let o = rows(0);
    let a = rows(m * n);
    let caps = &vals[mat..mat + cap_len];
    let s_t = if cap_len == 1 { Capacity::Uniform(caps[0]) } else { Capacity::PerRow(caps.to_vec()) };
    KnapsackInstance::new_sized(m, n, o, a, s_t, vals[mat + cap_len])
}

pub fn format_instance(inst: &KnapsackInstance) -> String {
    let mut s = format!("{} {}\n# o\n", inst.m, inst.n);
    let row = |s: &mut String, r: &[f64]| {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    };
    for r in &inst.o {
        row(&mut s, r);
    }
    s.push_str("# a\n");
    for r in &inst.a {
        row(&mut s, r);
    }
    s.push_str("# s_t\n");
    match &inst.s_t {
        Capacity::Uniform(v) => row(&mut s, &[*v]),
        Capacity::PerRow(v) => row(&mut s, v),
    }
    let _ = writeln!(s, "# o_q\n{}", inst.o_q);
    s
}
