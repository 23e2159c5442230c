use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::hypergraph::Weight;

/// Plotted ratio for infeasible results; anything above one marks them.
pub const INFEASIBLE_SENTINEL: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmResult {
    Value(Weight),
    Infeasible,
}

/// `results[instance][algorithm]` → per algorithm, the ascending list of
/// `1 − best/value` over instances.
pub fn performance_ratios(
    results: &BTreeMap<String, BTreeMap<String, AlgorithmResult>>,
) -> Result<BTreeMap<String, Vec<f64>>> {
    let algorithms: BTreeSet<&String> = results.values().flat_map(|r| r.keys()).collect();
    let mut ratios: BTreeMap<String, Vec<f64>> =
        algorithms.iter().map(|&a| (a.clone(), Vec::new())).collect();
    for (instance, row) in results {
        let value_of = |a: &String| -> Result<Option<f64>> {
            match row.get(a) {
                None => Err(Error::usage(format!("no result for {a} on {instance}"))),
                Some(AlgorithmResult::Infeasible) => Ok(None),
                Some(&AlgorithmResult::Value(v)) if v < 0 => {
                    Err(Error::usage(format!("negative value for {a} on {instance}")))
                }
                Some(&AlgorithmResult::Value(v)) => Ok(Some(v.max(1) as f64)),
            }
        };
        let mut best = f64::INFINITY;
        for &a in &algorithms {
            if let Some(v) = value_of(a)? {
                best = best.min(v);
            }
        }
        for &a in &algorithms {
            let ratio = match value_of(a)? {
                Some(v) => 1.0 - best / v,
                None => INFEASIBLE_SENTINEL,
            };
            ratios.get_mut(a).expect("initialized above").push(ratio);
        }
    }
    for list in ratios.values_mut() {
        list.sort_by(f64::total_cmp);
    }
    Ok(ratios)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub rank: usize,
    pub one_minus_ratio: f64,
    pub algorithm: String,
}

/// Reads `instance,algorithm,value` rows where value is an integer or
/// `infeasible`.
pub fn read_results_csv<R: Read>(
    input: R,
) -> Result<BTreeMap<String, BTreeMap<String, AlgorithmResult>>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(["instance", "algorithm", "value"]) {
        return Err(Error::parse(1, "expected header instance,algorithm,value"));
    }
    let mut out: BTreeMap<String, BTreeMap<String, AlgorithmResult>> = BTreeMap::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let line = i + 2;
        if record.len() != 3 {
            return Err(Error::parse(line, "expected three fields"));
        }
        let value = match record[2].trim() {
            "infeasible" => AlgorithmResult::Infeasible,
            v => AlgorithmResult::Value(v.parse().map_err(|_| Error::parse(line, format!("bad value {v:?}")))?),
        };
        let previous = out
            .entry(record[0].trim().to_string())
            .or_default()
            .insert(record[1].trim().to_string(), value);
        if previous.is_some() {
            return Err(Error::parse(line, "duplicate instance/algorithm pair"));
        }
    }
    Ok(out)
}

pub fn ratio_rows(ratios: &BTreeMap<String, Vec<f64>>) -> Vec<RatioRow> {
    ratios
        .iter()
        .flat_map(|(a, list)| {
            list.iter().enumerate().map(move |(i, &r)| RatioRow {
                rank: i + 1,
                one_minus_ratio: r,
                algorithm: a.clone(),
            })
        })
        .collect()
}

pub fn write_ratios_csv<W: Write>(out: W, ratios: &BTreeMap<String, Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "one_minus_ratio", "algorithm"])?;
    for row in ratio_rows(ratios) {
        w.write_record([row.rank.to_string(), row.one_minus_ratio.to_string(), row.algorithm])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use AlgorithmResult::*;

    fn table(rows: &[(&str, &str, AlgorithmResult)]) -> BTreeMap<String, BTreeMap<String, AlgorithmResult>> {
        let mut t: BTreeMap<String, BTreeMap<String, AlgorithmResult>> = BTreeMap::new();
        for &(i, a, v) in rows {
            t.entry(i.into()).or_default().insert(a.into(), v);
        }
        t
    }

    #[test]
    fn examples() {
        let t = table(&[
            ("x", "a", Value(10)),
            ("x", "b", Value(20)),
            ("y", "a", Value(0)),
            ("y", "b", Infeasible),
        ]);
        let r = performance_ratios(&t).unwrap();
        assert_eq!(r["a"], vec![0.0, 0.0]);
        assert_eq!(r["b"], vec![0.5, INFEASIBLE_SENTINEL]);
    }

    #[test]
    fn missing_cell_is_usage_error() {
        let t = table(&[("x", "a", Value(1)), ("x", "b", Value(2)), ("y", "a", Value(3))]);
        assert!(matches!(performance_ratios(&t), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_roundtrip() {
        let text = "instance,algorithm,value\nx,a,10\nx,b,infeasible\n";
        let t = read_results_csv(text.as_bytes()).unwrap();
        assert_eq!(t["x"]["b"], Infeasible);
        let mut buf = Vec::new();
        write_ratios_csv(&mut buf, &performance_ratios(&t).unwrap()).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rank,one_minus_ratio,algorithm\n1,0,a\n1,1.1,b\n"
        );
    }
}
