//! CSV, JSON and plain-text renderings of analysis records.

use std::fmt::Write as _;

use crate::error::CliError;
use crate::record::{gamma_label, AnalysisRecord, ConventionChoice, TradeoffRow};

/// Report header columns. The four gradient columns follow the gamma sweep
/// of the records (the default sweep gives `g1.0,g0.9,g0.7,g0.5`); a custom
/// weights column is appended when present.
pub fn csv_header(records: &[AnalysisRecord]) -> Vec<String> {
    let mut cols: Vec<String> = [
        "architecture",
        "nominal_layer",
        "nominal_module",
        "d_eff_general",
        "d_eff_family",
    ]
    .map(String::from)
    .to_vec();
    if let Some(first) = records.first() {
        cols.extend(first.d_eff_grad.iter().map(|g| gamma_label(g.gamma)));
    }
    cols.extend(
        [
            "params_M",
            "macs_G",
            "flops_G",
            "path_count",
            "l_min",
            "l_max",
        ]
        .map(String::from),
    );
    if records
        .first()
        .is_some_and(|r| r.d_eff_grad_custom.is_some())
    {
        cols.push("d_eff_grad_custom".into());
    }
    cols
}

fn csv_row(r: &AnalysisRecord) -> Vec<String> {
    let mut row = vec![
        r.architecture.clone(),
        r.nominal_layer.to_string(),
        r.nominal_module.to_string(),
        r.d_eff_general.clone(),
        r.d_eff_family.clone(),
    ];
    row.extend(r.d_eff_grad.iter().map(|g| g.d_eff_grad.clone()));
    row.extend([
        r.params_m.clone(),
        r.macs_g.clone(),
        r.flops_g.clone(),
        r.path_count.clone(),
        r.l_min.to_string(),
        r.l_max.to_string(),
    ]);
    if let Some(c) = &r.d_eff_grad_custom {
        row.push(c.clone());
    }
    row
}

fn write_csv(
    header: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).map_err(CliError::input)?;
    for row in rows {
        w.write_record(&row).map_err(CliError::input)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::input(e.to_string()))?;
    String::from_utf8(bytes).map_err(CliError::input)
}

pub fn records_csv(records: &[AnalysisRecord]) -> Result<String, CliError> {
    write_csv(&csv_header(records), records.iter().map(csv_row))
}

pub fn tradeoff_csv(rows: &[TradeoffRow]) -> Result<String, CliError> {
    let header = ["architecture", "macs_G", "params_M", "top1"].map(String::from);
    write_csv(
        &header,
        rows.iter().map(|r| {
            vec![
                r.architecture.clone(),
                r.macs_g.clone(),
                r.params_m.clone(),
                r.top1.clone(),
            ]
        }),
    )
}

pub fn records_json(records: &[AnalysisRecord]) -> Result<String, CliError> {
    let mut s = if records.len() == 1 {
        serde_json::to_string_pretty(&records[0])
    } else {
        serde_json::to_string_pretty(records)
    }
    .map_err(CliError::input)?;
    s.push('\n');
    Ok(s)
}

pub fn tradeoff_json(rows: &[TradeoffRow]) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(rows).map_err(CliError::input)?;
    s.push('\n');
    Ok(s)
}

/// Human-readable report of one record.
pub fn record_table(r: &AnalysisRecord, convention: ConventionChoice) -> String {
    let mut lines: Vec<(String, String)> = vec![("architecture".into(), r.architecture.clone())];
    if convention != ConventionChoice::Module {
        lines.push(("nominal depth (layers)".into(), r.nominal_layer.to_string()));
    }
    if convention != ConventionChoice::Layer {
        lines.push((
            "nominal depth (modules)".into(),
            r.nominal_module.to_string(),
        ));
    }
    lines.push((
        "effective depth".into(),
        format!("{} (exact {})", r.d_eff_general, r.d_eff_general_exact),
    ));
    lines.push((
        format!("effective depth [{}]", r.family),
        r.d_eff_family.clone(),
    ));
    for g in &r.d_eff_grad {
        lines.push((
            format!("gradient depth, attenuation({:?})", g.gamma),
            g.d_eff_grad.clone(),
        ));
    }
    if let Some(c) = &r.d_eff_grad_custom {
        lines.push(("gradient depth, custom weights".into(), c.clone()));
    }
    lines.push(("paths".into(), r.path_count.clone()));
    lines.push((
        "path length range".into(),
        format!("{}..={}", r.l_min, r.l_max),
    ));
    lines.push((
        "parameters".into(),
        format!("{} ({} M)", r.params, r.params_m),
    ));
    lines.push(("MACs".into(), format!("{} ({} G)", r.macs, r.macs_g)));
    lines.push(("FLOPs".into(), format!("{} ({} G)", r.flops, r.flops_g)));
    for w in &r.warnings {
        lines.push(("warning".into(), w.clone()));
    }
    let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in lines {
        writeln!(out, "{k:<width$}  {v}").unwrap();
    }
    out.push_str("# MACs count multiplications only (bias adds are free); 1 MAC = 2 FLOPs\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{analyze, AnalyzeOptions, Source};

    #[test]
    fn default_header_is_fixed() {
        let r = analyze(&Source::parse("vgg11"), &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            csv_header(&[r]).join(","),
            "architecture,nominal_layer,nominal_module,d_eff_general,d_eff_family,d_eff_grad_g1.0,d_eff_grad_g0.9,d_eff_grad_g0.7,d_eff_grad_g0.5,params_M,macs_G,flops_G,path_count,l_min,l_max"
        );
    }

    #[test]
    fn table_mentions_convention() {
        let r = analyze(&Source::parse("googlenet"), &AnalyzeOptions::default()).unwrap();
        let t = record_table(&r, ConventionChoice::Both);
        assert!(
            t.lines()
                .any(|l| l.starts_with("nominal depth (modules)") && l.ends_with(" 13")),
            "{t}"
        );
        assert!(t.contains("effective depth [GoogLeNet]"));
        assert!(!record_table(&r, ConventionChoice::Layer).contains("modules"));
    }
}
