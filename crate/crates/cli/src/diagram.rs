//! Double-grading diagrams. A basis element of bidegree `(r, s)` sits at
//! column `s - r` and row `-(r + s)`, so `ad x` steps down to the left and
//! `ad y` down to the right; each diamond carries its type as a label.

use std::fmt::Write;

use thinlie::{DiamondPattern, DiamondType, GradedAlgebra, Letter};

fn label(pattern: &DiamondPattern, degree: usize) -> Option<String> {
    if degree == 1 {
        return Some(String::new());
    }
    pattern.type_at(degree).map(|t| match t {
        DiamondType::Infinite => "∞".to_string(),
        t => t.label(),
    })
}

pub fn dot(alg: &GradedAlgebra, pattern: &DiamondPattern) -> String {
    let mut out = String::new();
    let n = alg.nominal_degree();
    let _ = writeln!(out, "digraph thin {{");
    let _ = writeln!(out, "  graph [layout=neato, splines=false];");
    let _ = writeln!(out, "  node [shape=point, width=0.12];");
    let id = |d: usize, i: usize| format!("n{d}_{i}");
    for d in 1..=n {
        for (i, b) in alg.component(d).iter().enumerate() {
            let (r, s) = b.bidegree;
            let _ = writeln!(
                out,
                "  {} [pos=\"{},{}!\", tooltip=\"{}\"];",
                id(d, i),
                s as i64 - r as i64,
                -((r + s) as i64),
                b.word
            );
        }
        if let Some(text) = label(pattern, d) {
            let pos = alg.component(d).iter().map(|b| b.bidegree.1 as f64 - b.bidegree.0 as f64);
            let x = pos.clone().sum::<f64>() / alg.dim(d).max(1) as f64;
            let _ = writeln!(
                out,
                "  diamond_{d} [shape=plaintext, label=\"{text}\", pos=\"{x},{}!\"];",
                -(d as f64) - 0.5
            );
        }
    }
    for d in 1..n {
        for (letter, style) in [(Letter::X, "solid"), (Letter::Y, "dashed")] {
            let m = alg.ad_matrix(letter, d);
            for j in 0..m.cols() {
                for i in 0..m.rows() {
                    if m.get(i, j) != 0 {
                        let _ = writeln!(out, "  {} -> {} [style={style}, arrowhead=none];", id(d, j), id(d + 1, i));
                    }
                }
            }
        }
    }
    out.push('}');
    out
}

pub fn text(alg: &GradedAlgebra, pattern: &DiamondPattern) -> String {
    let mut out = String::new();
    for d in 1..=alg.nominal_degree() {
        let words: Vec<String> = alg
            .component(d)
            .iter()
            .map(|b| format!("({},{})", b.bidegree.0, b.bidegree.1))
            .collect();
        let mark = match (d, pattern.type_at(d)) {
            (1, _) => "  <> first diamond".to_string(),
            (_, Some(t)) if t.is_fake() => format!("  .. fake diamond of type {}", t.label()),
            (_, Some(DiamondType::Infinite)) => "  <> diamond of infinite type".to_string(),
            (_, Some(t)) => format!("  <> diamond of type {}", t.label()),
            _ => String::new(),
        };
        let _ = writeln!(out, "L_{d:<4} {}{mark}", words.join(" "));
    }
    out.trim_end().to_string()
}

pub fn pattern_text(pattern: &DiamondPattern) -> String {
    let mut out = format!("p = {}, q = {}\n", pattern.p, pattern.q);
    for e in &pattern.entries {
        let _ = writeln!(out, "{:>5}  {}", e.degree, e.ty);
    }
    out.trim_end().to_string()
}
