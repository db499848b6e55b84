//! Run trace serialization and cost-aligned hypervolume curves.

use std::io::Write;

use serde_json::{json, Value};

use crate::error::Result;
use crate::miso::RunTrace;

/// One row per query: `iter,source,cost,cum_cost,x1..xd,y1..yM,hv_ground_truth`.
/// Locations are written as decoded native values.
pub fn write_csv<W: Write>(trace: &RunTrace, mut out: W) -> Result<()> {
    let d = trace.config.space.dim();
    let m = trace.config.n_objectives();
    let mut header = vec!["iter".to_string(), "source".into(), "cost".into(), "cum_cost".into()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("y{i}")));
    header.push("hv_ground_truth".into());
    writeln!(out, "{}", header.join(","))?;
    for (rec, (_, hv)) in trace.records.iter().zip(&trace.hv_curve) {
        let mut row = vec![
            rec.index.to_string(),
            rec.source.to_string(),
            rec.cost.to_string(),
            rec.cumulative_cost.to_string(),
        ];
        row.extend(rec.native.iter().map(f64::to_string));
        row.extend(rec.outcome.iter().map(f64::to_string));
        row.push(hv.to_string());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn csv_string(trace: &RunTrace) -> String {
    let mut buf = Vec::new();
    write_csv(trace, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Final hypervolume, archive, config echo and seeds.
pub fn summary(trace: &RunTrace) -> Value {
    let space = &trace.config.space;
    let archive: Vec<Value> = trace
        .archive
        .entries()
        .iter()
        .map(|e| {
            json!({
                "location": e.location,
                "native": space.decode(&e.location).unwrap_or_default(),
                "outcome": e.outcome,
                "source": e.source,
            })
        })
        .collect();
    let queries_per_source: Vec<usize> = (1..=trace.config.sources.len())
        .map(|s| trace.records.iter().filter(|r| r.source == s).count())
        .collect();
    json!({
        "method": trace.method,
        "final_hypervolume": trace.final_hypervolume(),
        "total_cost": trace.total_cost(),
        "queries": trace.records.len(),
        "queries_per_source": queries_per_source,
        "termination": trace.termination,
        "seeds": {
            "design_seed": trace.config.design_seed,
            "run_seed": trace.config.run_seed,
        },
        "archive": archive,
        "config": trace.config,
    })
}

/// Hypervolume at every integer cost `0..=max_cost`, carrying the last value
/// reached at or below each checkpoint forward (0 before the first query).
pub fn hv_checkpoints(hv_curve: &[(f64, f64)], max_cost: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_cost as usize + 1);
    let mut i = 0;
    let mut current = 0.0;
    for c in 0..=max_cost {
        while i < hv_curve.len() && hv_curve[i].0 <= c as f64 + 1e-9 {
            current = hv_curve[i].1;
            i += 1;
        }
        out.push(current);
    }
    out
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}
