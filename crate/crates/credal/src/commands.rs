//! Command bodies. Each returns the files to write and the text to print;
//! the front end owns the output directory and manifest.

use std::fmt::Write as _;
use std::sync::Arc;

use credal_core::family::PowerReparam;
use credal_core::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{
    BaseModeArg, BinomialTestArgs, ConvergeArgs, DilationArgs, Format, Settings, TvuDensityArgs, UrnArgs, UrnModeArg,
    WeightingArg,
};
use crate::formats::{format_rational, long_table, order_columns, to_json_pretty, xy_table, Table};
use crate::svg::{line_chart, Series};
use crate::{CliError, CliResult};

pub const CONJECTURE_LABEL: &str = "conjecture-conditional";

#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(String, Vec<u8>)>,
    pub labels: Vec<&'static str>,
    /// Files are only written when an output directory is named.
    pub stdout_only: bool,
}

impl Outcome {
    fn table(&mut self, name: &str, t: &Table) -> CliResult<()> {
        self.files.push((name.to_string(), t.to_bytes()?));
        Ok(())
    }

    fn text(&mut self, name: &str, s: String) {
        self.files.push((name.to_string(), s.into_bytes()));
    }
}

fn event_table(values: &[(String, f64)]) -> Table {
    let mut t = Table::new(["event_label", "value"]);
    for (l, v) in values {
        t.push(vec![l.clone(), crate::formats::format_float(*v)]);
    }
    t
}

fn pairs(points: &[(f64, f64)]) -> Vec<[f64; 2]> {
    points.iter().map(|&(x, y)| [x, y]).collect()
}

pub fn binomial_test(a: &BinomialTestArgs, s: Settings) -> CliResult<Outcome> {
    let report = credal_core::binomial_test(a.n, a.k, a.resolution)?;
    let reference: Vec<(String, f64)> = report.reference.iter().enumerate().map(|(k, v)| (k.to_string(), *v)).collect();

    let mut out = Outcome { labels: vec![CONJECTURE_LABEL], ..Default::default() };
    match s.format {
        Format::Csv => {
            out.table("reference.csv", &event_table(&reference))?;
            out.table("hocs.csv", &xy_table("param", "value", &report.curve))?;
            out.table("density.csv", &xy_table("param", "value", &report.density))?;
        }
        Format::Json => {
            let doc = json!({
                "trials": report.trials,
                "heads": report.heads,
                "resolution": report.resolution,
                "normalizer": report.normalizer,
                "conjecture_conditional": report.conjecture_conditional,
                "reference": reference.iter().map(|(l, v)| json!({"event_label": l, "value": v})).collect::<Vec<_>>(),
                "peak": {"param": report.peak.0, "ratio": report.peak.1},
                "crossings": report.crossings,
                "hocs": pairs(&report.curve),
                "density": pairs(&report.density),
            });
            out.text("report.json", to_json_pretty(&doc));
        }
    }
    if s.svg {
        let title = format!("HOCS ratio, {} of {} heads", a.k, a.n);
        out.text("hocs.svg", line_chart(&title, "p", "ratio", &[Series { name: "ratio", points: &report.curve }]));
        let d = &report.density;
        out.text(
            "density.svg",
            line_chart("TV-uniform density", "p", "density", &[Series { name: "density", points: d }]),
        );
    }

    let o = &mut out.stdout;
    writeln!(o, "{} heads in {} tosses ({CONJECTURE_LABEL})", a.k, a.n).unwrap();
    writeln!(o, "normalizer      {:.8}", report.normalizer).unwrap();
    writeln!(o, "P({} heads)     {:.8}", a.k, report.reference[a.k as usize]).unwrap();
    writeln!(o, "peak ratio      {:.6} at p = {:.3}", report.peak.1, report.peak.0).unwrap();
    let cross: Vec<String> = report.crossings.iter().map(|c| format!("{c:.4}")).collect();
    writeln!(o, "ratio = 1 at p  {}", if cross.is_empty() { "-".to_string() } else { cross.join(", ") }).unwrap();
    Ok(out)
}

#[derive(Serialize)]
struct StatRow {
    event: u64,
    order: usize,
    mean: f64,
    sd: f64,
    max_dev: f64,
}

pub fn converge(a: &ConvergeArgs, s: Settings) -> CliResult<Outcome> {
    if a.events.is_empty() {
        return Err(CliError::Usage("--events needs at least one head count".into()));
    }
    let family = Arc::new(BinomialFamily::new(a.n)?);
    let measure = build_measure(family.clone(), a.resolution)?;
    let mode = match a.base_mode {
        BaseModeArg::Tvu => BaseMode::TvuSample,
        BaseModeArg::Grid => BaseMode::UniformGrid,
    };
    let cfg = TowerConfig::from_measure(&measure, mode, a.base_samples, a.order_samples, a.max_order, s.seed);
    let tower = build_tower(&cfg)?;

    let mut out = Outcome { labels: vec![CONJECTURE_LABEL], ..Default::default() };
    let mut rows = Vec::new();
    let mut json_events = Vec::new();
    let mut stats_table = Table::new(["event", "order", "mean", "sd", "max_dev"]);
    for &k in &a.events {
        let e = family.heads_event(k)?;
        let reference = event_prob(&measure, &e)?;
        let table = convergence_stats(&tower, &e, reference)?;
        let columns: Vec<Vec<f64>> = table.orders.iter().map(|o| o.sorted_values.clone()).collect();
        for o in &table.orders {
            let row = StatRow {
                event: k,
                order: o.order,
                mean: o.mean,
                sd: o.sd,
                max_dev: o.max_deviation.unwrap_or(f64::NAN),
            };
            stats_table.push(vec![
                k.to_string(),
                o.order.to_string(),
                crate::formats::format_float(row.mean),
                crate::formats::format_float(row.sd),
                crate::formats::format_float(row.max_dev),
            ]);
            rows.push(row);
        }
        match s.format {
            Format::Csv => {
                out.table(&format!("implied_k{k}.csv"), &order_columns(&columns))?;
                out.table(&format!("long_k{k}.csv"), &long_table(&columns))?;
            }
            Format::Json => json_events.push(json!({"event": k, "reference": reference, "columns": columns})),
        }
        if s.svg {
            let curves: Vec<Vec<(f64, f64)>> = columns
                .iter()
                .map(|c| c.iter().enumerate().map(|(i, v)| (i as f64 / (c.len().max(2) - 1) as f64, *v)).collect())
                .collect();
            let names: Vec<String> = (1..=curves.len()).map(crate::formats::order_column_name).collect();
            let series: Vec<Series<'_>> =
                curves.iter().zip(&names).map(|(c, n)| Series { name: n, points: c }).collect();
            let title = format!("Sorted implied P({k} heads) by order");
            out.text(&format!("implied_k{k}.svg"), line_chart(&title, "quantile", "implied probability", &series));
        }
    }
    match s.format {
        Format::Csv => out.table("stats.csv", &stats_table)?,
        Format::Json => out.text("converge.json", to_json_pretty(&json!({"events": json_events, "stats": rows}))),
    }
    if a.dump_tower {
        let mut buf = Vec::new();
        crate::formats::write_tower_jsonl(&tower, &mut buf).map_err(|e| CliError::io("tower.jsonl", e))?;
        out.files.push(("tower.jsonl".into(), buf));
    }

    let o = &mut out.stdout;
    writeln!(o, "{:>5} {:>5} {:>12} {:>12} {:>12}", "event", "order", "mean", "sd", "max_dev").unwrap();
    for r in &rows {
        writeln!(o, "{:>5} {:>5} {:>12.8} {:>12.4e} {:>12.4e}", r.event, r.order, r.mean, r.sd, r.max_dev).unwrap();
    }
    Ok(out)
}

pub fn urn(a: &UrnArgs, _s: Settings) -> CliResult<Outcome> {
    let state = UrnState::new(a.balls, &a.colors, &a.history)?;
    let mode = match a.mode {
        UrnModeArg::Exact => UrnMode::Exact,
        UrnModeArg::Float => UrnMode::Float,
    };
    let pred = urn_update(&state, mode)?;
    let values: Vec<Value> = match &pred {
        UrnPredictive::Exact(d) => d.probs().iter().map(|r| Value::String(format_rational(r))).collect(),
        UrnPredictive::Float(d) => d.probs().iter().map(|p| json!(p)).collect(),
    };
    // colors keep their command-line order
    let mut body = String::from("{");
    for (i, (c, v)) in state.colors().labels().iter().zip(&values).enumerate() {
        if i > 0 {
            body.push(',');
        }
        write!(body, "{}:{}", Value::String(c.clone()), v).unwrap();
    }
    body.push_str("}\n");
    let mut out = Outcome { labels: vec![CONJECTURE_LABEL], stdout_only: true, ..Default::default() };
    out.text("urn.json", body.clone());
    out.stdout = body;
    Ok(out)
}

/// Order-1 files and text are independent of sampling; higher orders use
/// the tower.
pub fn dilation(a: &DilationArgs, s: Settings) -> CliResult<Outcome> {
    let family = CoinMatchingFamily::new();
    let set = family.grid_credal_set(a.grid)?;
    let matching = family.matching_event();
    let first_heads = family.first_heads_event();

    let before = probability_range(&set, &matching)?;
    let (conditioned, map) = credal_condition(&set, &first_heads)?;
    let after = probability_range(&conditioned, &map_event(&map, &matching.intersection(&first_heads)?)?)?;

    let weighting = match a.weighting {
        WeightingArg::CountOnce => MergeWeighting::CountOnce,
        WeightingArg::Multiplicity => MergeWeighting::Multiplicity,
    };
    let cfg = TowerConfig::from_credal_set(&set, weighting, a.samples, a.orders, s.seed);
    let tower = build_tower(&cfg)?;
    let profile = dilation_profile(&tower, &first_heads, &matching)?;

    let mut out = Outcome::default();
    let columns: Vec<Vec<f64>> = profile.orders.iter().map(|o| o.sorted_values.clone()).collect();
    let mut stats = Table::new(["order", "mean", "sd", "min", "max", "inner_fraction"]);
    let f = crate::formats::format_float;
    for o in &profile.orders {
        stats.push(vec![o.order.to_string(), f(o.mean), f(o.sd), f(o.min), f(o.max), f(o.fraction_within(0.25, 0.75))]);
    }
    match s.format {
        Format::Csv => {
            out.table("dilation.csv", &long_table(&columns))?;
            out.table("stats.csv", &stats)?;
        }
        Format::Json => {
            let summaries: Vec<Value> = profile
                .orders
                .iter()
                .map(|o| {
                    json!({"order": o.order, "mean": o.mean, "sd": o.sd, "min": o.min, "max": o.max,
                           "inner_fraction": o.fraction_within(0.25, 0.75)})
                })
                .collect();
            let doc = json!({
                "range_before": [before.0, before.1],
                "range_after": [after.0, after.1],
                "dropped": profile.dropped,
                "orders": summaries,
                "columns": columns,
            });
            out.text("dilation.json", to_json_pretty(&doc));
        }
    }
    if s.svg {
        let curves: Vec<Vec<(f64, f64)>> = columns
            .iter()
            .map(|c| c.iter().enumerate().map(|(i, v)| (i as f64 / (c.len().max(2) - 1) as f64, *v)).collect())
            .collect();
        let names: Vec<String> = (1..=curves.len()).map(crate::formats::order_column_name).collect();
        let series: Vec<Series<'_>> = curves.iter().zip(&names).map(|(c, n)| Series { name: n, points: c }).collect();
        out.text("dilation.svg", line_chart("P(match | first heads)", "quantile", "probability", &series));
    }

    let o = &mut out.stdout;
    writeln!(o, "P(match)               [{:.4}, {:.4}]", before.0, before.1).unwrap();
    writeln!(o, "P(match | first heads) [{:.4}, {:.4}]", after.0, after.1).unwrap();
    writeln!(o, "members dropped        {}", profile.dropped.len()).unwrap();
    writeln!(o, "{:>5} {:>10} {:>10} {:>10} {:>10} {:>12}", "order", "mean", "sd", "min", "max", "in(.25,.75)")
        .unwrap();
    for s in &profile.orders {
        let inner = s.fraction_within(0.25, 0.75);
        writeln!(o, "{:>5} {:>10.6} {:>10.3e} {:>10.6} {:>10.6} {:>12.4}", s.order, s.mean, s.sd, s.min, s.max, inner)
            .unwrap();
    }
    Ok(out)
}

pub fn tvu_density(a: &TvuDensityArgs, s: Settings) -> CliResult<Outcome> {
    if a.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let binomial = BinomialFamily::new(a.n)?;
    let family: Arc<dyn ParamFamily> =
        if a.power == 1.0 { Arc::new(binomial) } else { Arc::new(PowerReparam::new(binomial, a.power)?) };
    let measure = build_measure(family.clone(), a.resolution)?;
    let density = (0..a.points)
        .map(|i| {
            let x = i as f64 / (a.points - 1) as f64;
            measure.density_at(&[x]).map(|d| (x, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let events = (0..=a.n)
        .map(|k| Ok((k.to_string(), event_prob(&measure, &Event::singleton(a.n as usize + 1, k as usize)?)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Outcome::default();
    match s.format {
        Format::Csv => {
            out.table("density.csv", &xy_table("param", "value", &density))?;
            out.table("events.csv", &event_table(&events))?;
        }
        Format::Json => {
            let doc = json!({
                "normalizer": measure.normalizer(),
                "converged": measure.converged(),
                "breakpoints": measure.breakpoints(),
                "density": pairs(&density),
                "events": events.iter().map(|(l, v)| json!({"event_label": l, "value": v})).collect::<Vec<_>>(),
            });
            out.text("tvu.json", to_json_pretty(&doc));
        }
    }
    if s.svg {
        out.text(
            "density.svg",
            line_chart("TV-uniform density", "x", "density", &[Series { name: "density", points: &density }]),
        );
    }

    let o = &mut out.stdout;
    writeln!(
        o,
        "normalizer {:.10} ({} nodes, converged: {})",
        measure.normalizer(),
        measure.node_count(),
        measure.converged()
    )
    .unwrap();
    for (l, v) in &events {
        writeln!(o, "P({l:>3} heads) {v:.8}").unwrap();
    }
    Ok(out)
}
