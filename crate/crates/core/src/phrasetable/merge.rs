use std::collections::HashSet;

use super::row::{Number, PhraseTableRow};
use super::table::PhraseTable;
use crate::error::{Error, Result};

/// Value of the active provenance indicator; inactive ones are 1, so after
/// the decoder takes logs the indicators read 1 and 0.
pub const INDICATOR_ON: f64 = std::f64::consts::E;

fn common_feature_count(a: &PhraseTable, b: &PhraseTable) -> Result<usize> {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => Ok(b.feature_count()),
        (_, true) => Ok(a.feature_count()),
        _ if a.feature_count() == b.feature_count() => Ok(a.feature_count()),
        _ => Err(Error::arg(format!(
            "feature counts differ: {} vs {}",
            a.feature_count(),
            b.feature_count()
        ))),
    }
}

/// All in-domain rows, plus the out-of-domain rows whose source phrase the
/// in-domain table never mentions. Output is in canonical order.
pub fn backoff_merge(pt_in: &PhraseTable, pt_out: &PhraseTable) -> Result<PhraseTable> {
    let f = common_feature_count(pt_in, pt_out)?;
    let known = pt_in.sources();
    let rows = pt_in
        .rows()
        .iter()
        .chain(pt_out.rows().iter().filter(|r| !known.contains(r.src.as_str())))
        .cloned()
        .collect();
    Ok(PhraseTable::from_parts(f, rows))
}

/// Union of both tables with three provenance features appended:
/// (in only, out only, both). Pairs found in both keep the in-domain row.
pub fn indicator_merge(pt_in: &PhraseTable, pt_out: &PhraseTable) -> Result<PhraseTable> {
    let f = common_feature_count(pt_in, pt_out)?;
    let on = Number::from(INDICATOR_ON);
    let off = Number::from(1.0);
    let flags = |slot: usize| -> Vec<Number> { (0..3).map(|i| if i == slot { on.clone() } else { off.clone() }).collect() };

    let out_pairs: HashSet<(&str, &str)> = pt_out.rows().iter().map(|r| (r.src.as_str(), r.tgt.as_str())).collect();
    let in_pairs: HashSet<(&str, &str)> = pt_in.rows().iter().map(|r| (r.src.as_str(), r.tgt.as_str())).collect();

    let mut rows: Vec<PhraseTableRow> = pt_in
        .rows()
        .iter()
        .map(|r| {
            let slot = if out_pairs.contains(&(r.src.as_str(), r.tgt.as_str())) { 2 } else { 0 };
            r.with_extra_features(&flags(slot))
        })
        .collect();
    rows.extend(
        pt_out
            .rows()
            .iter()
            .filter(|r| !in_pairs.contains(&(r.src.as_str(), r.tgt.as_str())))
            .map(|r| r.with_extra_features(&flags(1))),
    );
    Ok(PhraseTable::from_parts(f + 3, rows))
}
