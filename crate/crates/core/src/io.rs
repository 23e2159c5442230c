//! hMetis `.hgr` hypergraph files and flat partition files.
//!
//! `.hgr` grammar: a header `m n [fmt]`, then `m` net lines of 1-based pins
//! (prefixed by the net weight when `fmt` is 1 or 11), then `n` vertex-weight
//! lines when `fmt` is 10 or 11. Lines starting with `%` are comments.
//!
//! A partition file has one block id per line, one line per vertex.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Weight};
use crate::metrics::{BlockId, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HgrFormat {
    Unweighted,
    NetWeights,
    VertexWeights,
    Both,
}

impl HgrFormat {
    fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Self::Unweighted),
            1 => Some(Self::NetWeights),
            10 => Some(Self::VertexWeights),
            11 => Some(Self::Both),
            _ => None,
        }
    }

    fn code(self) -> Option<u32> {
        match self {
            Self::Unweighted => None,
            Self::NetWeights => Some(1),
            Self::VertexWeights => Some(10),
            Self::Both => Some(11),
        }
    }

    fn net_weights(self) -> bool {
        matches!(self, Self::NetWeights | Self::Both)
    }

    fn vertex_weights(self) -> bool {
        matches!(self, Self::VertexWeights | Self::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HgrHeader {
    pub num_nets: usize,
    pub num_vertices: usize,
    pub format: HgrFormat,
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim_start().starts_with('%'))
}

fn parse_numbers(line_no: usize, line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>()
                .map_err(|_| Error::parse(line_no, format!("expected a non-negative integer, got {tok:?}")))
        })
        .collect()
}

fn positive_weight(line_no: usize, w: u64) -> Result<Weight> {
    if w == 0 || w > Weight::MAX as u64 {
        return Err(Error::parse(line_no, format!("weight {w} out of range")));
    }
    Ok(w as Weight)
}

pub fn parse_hgr(text: &str) -> Result<Hypergraph> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let nums = parse_numbers(header_line, header)?;
    if !(2..=3).contains(&nums.len()) {
        return Err(Error::parse(header_line, "header must be `m n [fmt]`"));
    }
    let format = match nums.get(2) {
        None => HgrFormat::Unweighted,
        Some(&code) => HgrFormat::from_code(code as u32)
            .filter(|_| code <= u32::MAX as u64)
            .ok_or_else(|| Error::parse(header_line, format!("unknown fmt {code}")))?,
    };
    let header = HgrHeader {
        num_nets: nums[0] as usize,
        num_vertices: nums[1] as usize,
        format,
    };
    if header.num_vertices == 0 {
        return Err(Error::parse(header_line, "hypergraph needs at least one vertex"));
    }

    let mut net_weights = Vec::with_capacity(header.num_nets);
    let mut pins = Vec::with_capacity(header.num_nets);
    let mut last_line = header_line;
    for e in 0..header.num_nets {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(last_line + 1, format!("missing line for net {}", e + 1)))?;
        last_line = line_no;
        let mut nums = parse_numbers(line_no, line)?.into_iter();
        let weight = if format.net_weights() {
            let w = nums
                .next()
                .ok_or_else(|| Error::parse(line_no, "empty net line"))?;
            positive_weight(line_no, w)?
        } else {
            1
        };
        let net: Vec<usize> = nums
            .map(|p| {
                if p == 0 || p > header.num_vertices as u64 {
                    Err(Error::parse(
                        line_no,
                        format!("pin {p} outside [1, {}]", header.num_vertices),
                    ))
                } else {
                    Ok(p as usize - 1)
                }
            })
            .collect::<Result<_>>()?;
        if net.is_empty() {
            return Err(Error::parse(line_no, "net without pins"));
        }
        let mut sorted = net.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::parse(line_no, "net lists a pin twice"));
        }
        net_weights.push(weight);
        pins.push(net);
    }

    let mut vertex_weights = vec![1; header.num_vertices];
    if format.vertex_weights() {
        for (v, slot) in vertex_weights.iter_mut().enumerate() {
            let (line_no, line) = lines.next().ok_or_else(|| {
                Error::parse(last_line + 1, format!("missing weight line for vertex {}", v + 1))
            })?;
            last_line = line_no;
            let nums = parse_numbers(line_no, line)?;
            if nums.len() != 1 {
                return Err(Error::parse(line_no, "vertex weight line needs exactly one token"));
            }
            *slot = positive_weight(line_no, nums[0])?;
        }
    }
    if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(line_no, "unexpected trailing data"));
    }
    Hypergraph::new(vertex_weights, net_weights, pins).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn read_hgr(path: impl AsRef<Path>) -> Result<Hypergraph> {
    parse_hgr(&std::fs::read_to_string(path)?)
}

/// Writes the full instance with the smallest `fmt` covering its weights.
pub fn write_hgr(h: &Hypergraph) -> String {
    let net_w = h.net_weights().iter().any(|&w| w != 1);
    let vertex_w = h.vertex_weights().iter().any(|&c| c != 1);
    let format = match (net_w, vertex_w) {
        (false, false) => HgrFormat::Unweighted,
        (true, false) => HgrFormat::NetWeights,
        (false, true) => HgrFormat::VertexWeights,
        (true, true) => HgrFormat::Both,
    };
    let mut out = String::with_capacity(8 * h.num_pins() + 16);
    write!(out, "{} {}", h.num_nets(), h.num_vertices()).unwrap();
    if let Some(code) = format.code() {
        write!(out, " {code}").unwrap();
    }
    out.push('\n');
    for e in 0..h.num_nets() {
        let mut first = true;
        if format.net_weights() {
            write!(out, "{}", h.net_weight(e)).unwrap();
            first = false;
        }
        for &v in h.pins(e) {
            if !first {
                out.push(' ');
            }
            write!(out, "{}", v + 1).unwrap();
            first = false;
        }
        out.push('\n');
    }
    if format.vertex_weights() {
        for &c in h.vertex_weights() {
            writeln!(out, "{c}").unwrap();
        }
    }
    out
}

pub fn write_partition(blocks: &[BlockId]) -> String {
    let mut out = String::with_capacity(blocks.len() * 3);
    for b in blocks {
        writeln!(out, "{b}").unwrap();
    }
    out
}

/// Parses block ids, one per line, and validates them against `h` and `k`.
pub fn parse_partition_blocks(text: &str, num_vertices: usize, k: usize) -> Result<Vec<BlockId>> {
    let mut blocks = Vec::with_capacity(num_vertices);
    for (i, line) in text.lines().enumerate() {
        let tok = line.trim();
        if tok.is_empty() {
            continue;
        }
        let b: i64 = tok
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("invalid block id {tok:?}")))?;
        if b < 0 || b as u64 >= k as u64 {
            return Err(Error::parse(i + 1, format!("block id {b} outside [0, {k})")));
        }
        blocks.push(b as BlockId);
    }
    if blocks.len() != num_vertices {
        return Err(Error::parse(
            text.lines().count(),
            format!("{} block ids for {num_vertices} vertices", blocks.len()),
        ));
    }
    Ok(blocks)
}

pub fn read_partition(text: &str, h: &Hypergraph, k: usize) -> Result<Partition> {
    let blocks = parse_partition_blocks(text, h.num_vertices(), k)?;
    Partition::new(h, k, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::tests::random_hypergraph;
    use rand::Rng as _;

    #[test]
    fn minimal_unweighted() {
        let h = parse_hgr("2 4\n1 2 3\n3 4\n").unwrap();
        assert_eq!(h.num_nets(), 2);
        assert_eq!(h.num_vertices(), 4);
        assert_eq!(h.pins(0), &[0, 1, 2]);
        assert_eq!(h.pins(1), &[2, 3]);
        assert!(h.vertex_weights().iter().all(|&c| c == 1));
        assert!(h.net_weights().iter().all(|&w| w == 1));
    }

    #[test]
    fn net_weight_format() {
        let h = parse_hgr("1 2 1\n7 1 2\n").unwrap();
        assert_eq!(h.pins(0), &[0, 1]);
        assert_eq!(h.net_weight(0), 7);
    }

    #[test]
    fn both_weights_and_comments() {
        let text = "% comment\n2 3 11\n%another\n2 1  2\n5\t2 3\n4\n%x\n1\n9\n";
        let h = parse_hgr(text).unwrap();
        assert_eq!(h.net_weights(), &[2, 5]);
        assert_eq!(h.vertex_weights(), &[4, 1, 9]);
        assert_eq!(h.pins(1), &[1, 2]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("2 3\n1 4\n1 2\n", 2),
            ("2 3\n1 2\n\n", 3),
            ("1 3 1\n5\n", 2),
            ("1 3 7\n1 2\n", 1),
            ("1 3\n1 x\n", 2),
            ("1 3\n1 2\n3\n", 3),
            ("1 2 10\n1 2\n1 1\n", 3),
            ("1 3\n0 1\n", 2),
        ];
        for (text, line) in cases {
            match parse_hgr(text) {
                Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
        assert!(parse_hgr("").is_err());
        assert!(parse_hgr("1 0\n").is_err());
    }

    #[test]
    fn header_formats_on_write() {
        let h = Hypergraph::unweighted(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(write_hgr(&h).starts_with("2 3\n"));
        let h = Hypergraph::new(vec![1; 3], vec![3, 1], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(write_hgr(&h).starts_with("2 3 1\n3 1 2\n"));
        let h = Hypergraph::new(vec![1, 2, 1], vec![1, 1], vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(write_hgr(&h).starts_with("2 3 10\n"));
    }

    #[test]
    fn hgr_roundtrip_random() {
        let mut rng = crate::rng_from_seed(17);
        for i in 0..20 {
            let h = if i % 2 == 0 {
                random_hypergraph(&mut rng, 15, 20)
            } else {
                let g = random_hypergraph(&mut rng, 15, 20);
                let pins = (0..g.num_nets()).map(|e| g.pins(e).to_vec()).collect();
                Hypergraph::unweighted(15, pins).unwrap()
            };
            let back = parse_hgr(&write_hgr(&h)).unwrap();
            assert_eq!(back.canonical(), h.canonical());
            assert_eq!(write_hgr(&back), write_hgr(&h));
        }
    }

    #[test]
    fn partition_files() {
        let h = Hypergraph::unweighted(4, vec![vec![0, 1, 2, 3]]).unwrap();
        let p = read_partition("0\n0\n0\n0\n", &h, 1).unwrap();
        assert_eq!(p.objective(), 0);
        assert!(read_partition("0\n0\n0\n", &h, 1).is_err());
        assert!(read_partition("0\n0\n2\n1\n", &h, 2).is_err());
        assert!(read_partition("0\n-1\n0\n1\n", &h, 2).is_err());

        let mut rng = crate::rng_from_seed(5);
        let blocks: Vec<_> = (0..4).map(|_| rng.gen_range(0..3)).collect();
        let text = write_partition(&blocks);
        assert!(text.ends_with('\n'));
        assert_eq!(read_partition(&text, &h, 3).unwrap().blocks(), &blocks[..]);
    }
}
