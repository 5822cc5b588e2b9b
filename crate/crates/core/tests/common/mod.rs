#![allow(dead_code)]

use jones_core::diagram::{Diagram, PdCode};
use jones_core::laurent::TPoly;
use num_bigint::BigInt;

pub struct KnotEntry {
    pub name: String,
    pub diagram: Diagram,
    pub jones: TPoly,
}

/// Parses `t+t^3-t^4`, `t^(-2)-t^(-1)+1`, `2*t^3` style polynomials.
pub fn parse_t_poly(s: &str) -> TPoly {
    let mut terms = Vec::new();
    let mut rest = s.replace(' ', "");
    if !rest.starts_with('-') && !rest.starts_with('+') {
        rest.insert(0, '+');
    }
    let mut pieces = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in rest.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && !cur.is_empty() => {
                pieces.push(std::mem::take(&mut cur));
            }
            _ => {}
        }
        cur.push(ch);
    }
    pieces.push(cur);
    for piece in pieces {
        let (sign, body) = piece.split_at(1);
        let sign = if sign == "-" { -1 } else { 1 };
        let (coef, mono) = match body.split_once('*') {
            Some((c, m)) => (c.parse::<i64>().unwrap(), m.to_string()),
            None if body.contains('t') => (1, body.to_string()),
            None => (body.parse::<i64>().unwrap(), String::new()),
        };
        let exp = if mono.is_empty() {
            0
        } else if mono == "t" {
            1
        } else {
            let e = mono.trim_start_matches("t^").trim_matches(|c| c == '(' || c == ')');
            e.parse::<i64>().unwrap()
        };
        terms.push((exp, BigInt::from(sign * coef)));
    }
    TPoly::from_integral(terms)
}

pub fn knot_corpus() -> Vec<KnotEntry> {
    let text = include_str!("../data/knots_le9.tsv");
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split('\t').collect();
            let pd: Vec<[u32; 4]> = serde_json::from_str(cols[1]).unwrap();
            KnotEntry {
                name: cols[0].to_string(),
                diagram: PdCode::from_crossings(pd).to_diagram().unwrap(),
                jones: parse_t_poly(cols[2]),
            }
        })
        .collect()
}

/// `p(t^-1)`.
pub fn mirror_t(p: &TPoly) -> TPoly {
    p.to_a().invert_variable().to_t()
}
