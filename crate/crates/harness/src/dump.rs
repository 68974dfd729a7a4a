//! Plain-text tree and profile dumps.
//!
//! Tree dump, one node per line: `id parent side weight`, where `side` is `L`,
//! `R` or `root` and the root's parent is written as `-`. Profile dump, one key
//! per line: `key probability`. Blank lines and lines starting with `#` are
//! ignored. Weights are written with 17 significant digits, so a dump reloads
//! bit-exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use bumptree::{NodeId, Side, WeightProfile, WeightedTree};

use crate::error::{Error, Result};

fn fmt_weight(w: f64) -> String {
    format!("{w:.16e}")
}

pub fn write_tree<W: Write>(tree: &WeightedTree, mut out: W) -> Result<()> {
    let mut buf = String::with_capacity(tree.len() * 40);
    for x in 0..tree.len() {
        let id = NodeId::new(x);
        let (parent, side) = match tree.side_of(id) {
            None => ("-".to_string(), "root"),
            Some(side) => (
                tree.parent(id).to_string(),
                if side == Side::Left { "L" } else { "R" },
            ),
        };
        writeln!(buf, "{x} {parent} {side} {}", fmt_weight(tree.weight(id))).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// Numbered non-empty, non-comment lines.
fn content_lines<R: BufRead>(input: R) -> impl Iterator<Item = Result<(usize, String)>> {
    input.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::from(e))),
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok((i + 1, t.to_string())))
        }
    })
}

fn parse_weight(line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("bad weight {s:?}")))
}

/// Reads a tree dump and validates the result.
pub fn read_tree<R: BufRead>(input: R) -> Result<WeightedTree> {
    struct Row {
        line: usize,
        id: usize,
        parent: Option<usize>,
        side: Option<Side>,
        weight: f64,
    }
    let mut rows = Vec::new();
    for item in content_lines(input) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [id, parent, side, weight] = fields[..] else {
            return Err(Error::parse(line, "expected `id parent side weight`"));
        };
        let id = id
            .parse::<usize>()
            .map_err(|_| Error::parse(line, format!("bad node id {id:?}")))?;
        let side = match side {
            "L" => Some(Side::Left),
            "R" => Some(Side::Right),
            "root" => None,
            other => return Err(Error::parse(line, format!("bad side {other:?}"))),
        };
        let parent = match (side, parent) {
            (None, "-") => None,
            (None, _) => return Err(Error::parse(line, "root must have parent `-`")),
            (Some(_), p) => Some(
                p.parse::<usize>()
                    .map_err(|_| Error::parse(line, format!("bad parent id {p:?}")))?,
            ),
        };
        rows.push(Row {
            line,
            id,
            parent,
            side,
            weight: parse_weight(line, weight)?,
        });
    }

    let n = rows.len();
    if n == 0 {
        return Err(Error::parse(0, "empty tree dump"));
    }
    let mut weights = vec![f64::NAN; n];
    let mut left = vec![NodeId::NIL; n];
    let mut right = vec![NodeId::NIL; n];
    let mut root = None;
    for row in &rows {
        if row.id >= n {
            return Err(Error::parse(row.line, format!("node id {} out of range 0..{n}", row.id)));
        }
        if !weights[row.id].is_nan() {
            return Err(Error::parse(row.line, format!("node {} listed twice", row.id)));
        }
        weights[row.id] = row.weight;
        match (row.parent, row.side) {
            (None, _) => {
                if root.replace(row.id).is_some() {
                    return Err(Error::parse(row.line, "more than one root"));
                }
            }
            (Some(p), Some(side)) => {
                if p >= n {
                    return Err(Error::parse(row.line, format!("parent {p} out of range 0..{n}")));
                }
                let slot = match side {
                    Side::Left => &mut left[p],
                    Side::Right => &mut right[p],
                };
                if !slot.is_nil() {
                    return Err(Error::parse(row.line, format!("node {p} already has a {side} child")));
                }
                *slot = NodeId::new(row.id);
            }
            (Some(_), None) => unreachable!("non-root rows always carry a side"),
        }
    }
    let root = root.ok_or_else(|| Error::parse(0, "no root line"))?;
    Ok(WeightedTree::from_children(&weights, NodeId::new(root), &left, &right)?)
}

pub fn write_profile<W: Write>(profile: &WeightProfile, mut out: W) -> Result<()> {
    let mut buf = String::with_capacity(profile.len() * 32);
    for (k, p) in profile.probs().iter().enumerate() {
        writeln!(buf, "{k} {}", fmt_weight(*p)).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn read_profile<R: BufRead>(input: R) -> Result<WeightProfile> {
    let mut probs: Vec<Option<f64>> = Vec::new();
    for item in content_lines(input) {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [key, prob] = fields[..] else {
            return Err(Error::parse(line, "expected `key probability`"));
        };
        let key = key
            .parse::<usize>()
            .map_err(|_| Error::parse(line, format!("bad key {key:?}")))?;
        if key >= probs.len() {
            probs.resize(key + 1, None);
        }
        if probs[key].replace(parse_weight(line, prob)?).is_some() {
            return Err(Error::parse(line, format!("key {key} listed twice")));
        }
    }
    let probs: Option<Vec<f64>> = probs.into_iter().collect();
    let probs = probs.ok_or_else(|| Error::parse(0, "keys must be contiguous from 0"))?;
    Ok(WeightProfile::from_probs(probs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bumptree::builders::{build_simple_random, build_treap};

    fn round_trip(tree: &WeightedTree) -> WeightedTree {
        let mut buf = Vec::new();
        write_tree(tree, &mut buf).unwrap();
        read_tree(buf.as_slice()).unwrap()
    }

    #[test]
    fn tree_round_trips_exactly() {
        let p = WeightProfile::zipf(500, 1.0, 9).unwrap();
        for t in [build_treap(&p), build_simple_random(&p, 9)] {
            let back = round_trip(&t);
            assert_eq!(back.root(), t.root());
            for x in 0..t.len() {
                let (a, b) = (back.node(NodeId::new(x)), t.node(NodeId::new(x)));
                assert_eq!(a.parent, b.parent);
                assert_eq!(a.children, b.children);
                assert_eq!(a.weight, b.weight);
            }
        }
    }

    #[test]
    fn reads_hand_written_dump() {
        let text = "# stuck tree\n1 - root 0.02\n0 1 L 0.49\n\n2 1 R 0.49\n";
        let t = read_tree(text.as_bytes()).unwrap();
        assert_eq!(t.root(), NodeId::new(1));
        assert!((t.cost() - 1.98).abs() < 1e-12);
    }

    #[test]
    fn weights_have_enough_digits() {
        let text = "0 - root 1\n";
        let t = read_tree(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_tree(&t, &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        let mantissa = line.split_whitespace().nth(3).unwrap().split('e').next().unwrap();
        assert!(mantissa.chars().filter(char::is_ascii_digit).count() >= 12);
    }

    #[test]
    fn rejects_malformed_dumps() {
        let cases = [
            ("0 - root 1\n0 - root 1\n", "listed twice"),
            ("0 - root 0.5\n1 0 X 0.5\n", "bad side"),
            ("0 - root 0.5\n1 5 R 0.5\n", "out of range"),
            ("0 1 L 0.5\n1 0 R 0.5\n", "no root"),
            ("0 - root abc\n", "bad weight"),
            ("0 - root\n", "expected"),
        ];
        for (text, want) in cases {
            let err = read_tree(text.as_bytes()).unwrap_err().to_string();
            assert!(err.contains(want), "{text:?}: {err}");
        }
        // key order violated: 1 cannot be the left child of 0
        let err = read_tree("0 - root 0.5\n1 0 L 0.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Tree(bumptree::Error::Invalid { .. })));
    }

    #[test]
    fn profile_round_trips() {
        let p = WeightProfile::zipf(100, 1.2, 5).unwrap();
        let mut buf = Vec::new();
        write_profile(&p, &mut buf).unwrap();
        let back = read_profile(buf.as_slice()).unwrap();
        assert_eq!(back.probs(), p.probs());
        assert!(read_profile("0 0.5\n2 0.5\n".as_bytes()).is_err());
    }
}
