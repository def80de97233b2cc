//! Dörfler (bulk) marking.

use crate::error::{Error, Result};

/// Smallest set of indices, taken greedily by decreasing indicator, whose
/// squared indicators sum to at least `theta` times the total. Ties are
/// broken by index so the result is deterministic.
pub fn dorfler_mark(indicators: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::Config(format!("marking fraction {theta} outside (0, 1]")));
    }
    if let Some(bad) = indicators.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::Config(format!("negative or NaN indicator {bad}")));
    }
    let total: f64 = indicators.iter().map(|v| v * v).sum();
    let mut order: Vec<usize> = (0..indicators.len()).collect();
    order.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for i in order {
        if acc >= theta * total || indicators[i] == 0.0 {
            break;
        }
        acc += indicators[i] * indicators[i];
        marked.push(i);
    }
    Ok(marked)
}
