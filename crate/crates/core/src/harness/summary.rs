use serde::{Deserialize, Serialize};

use super::config::ExperimentKind;
use super::run::ExperimentRecord;

/// Aggregate over replications at one `(estimator, grid value, n, s)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: ExperimentKind,
    pub estimator: String,
    pub grid: String,
    pub grid_value: Option<f64>,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub sigma: f64,
    pub reps: usize,
    pub errors: usize,
    pub mean_fp: Option<f64>,
    pub sd_fp: Option<f64>,
    pub mean_fn: Option<f64>,
    pub sd_fn: Option<f64>,
    pub mean_fpr: Option<f64>,
    pub mean_tpr: Option<f64>,
    pub mean_rho2: Option<f64>,
    pub median_rho2: Option<f64>,
    pub mean_l2_loss: Option<f64>,
    pub success_rate: Option<f64>,
}

pub fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Sample standard deviation (zero for a single value).
pub fn std_dev(v: &[f64]) -> Option<f64> {
    let m = mean(v)?;
    if v.len() == 1 {
        return Some(0.0);
    }
    Some((v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt())
}

pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[k] } else { (s[k - 1] + s[k]) / 2.0 })
}

fn same_point(a: &ExperimentRecord, b: &ExperimentRecord) -> bool {
    a.estimator == b.estimator
        && a.grid == b.grid
        && a.grid_value.map(f64::to_bits) == b.grid_value.map(f64::to_bits)
        && a.n == b.n
        && a.s == b.s
}

/// Group records by point, in order of first appearance.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<Vec<&ExperimentRecord>> = Vec::new();
    for rec in records {
        match groups.iter_mut().find(|g| same_point(g[0], rec)) {
            Some(g) => g.push(rec),
            None => groups.push(vec![rec]),
        }
    }
    groups.into_iter().map(|g| summarize_group(&g)).collect()
}

fn summarize_group(g: &[&ExperimentRecord]) -> SummaryRow {
    let ok: Vec<&&ExperimentRecord> = g.iter().filter(|r| r.error.is_none()).collect();
    let col = |f: &dyn Fn(&ExperimentRecord) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|r| f(r)).collect() };
    let fp = col(&|r| r.fp.map(|v| v as f64));
    let fn_ = col(&|r| r.fn_.map(|v| v as f64));
    let rho2 = col(&|r| r.rho2);
    let success = col(&|r| r.success.map(|b| if b { 1.0 } else { 0.0 }));
    let head = g[0];
    SummaryRow {
        experiment: head.experiment,
        estimator: head.estimator.clone(),
        grid: head.grid.clone(),
        grid_value: head.grid_value,
        n: head.n,
        p: head.p,
        s: head.s,
        sigma: head.sigma,
        reps: g.len(),
        errors: g.len() - ok.len(),
        mean_fp: mean(&fp),
        sd_fp: std_dev(&fp),
        mean_fn: mean(&fn_),
        sd_fn: std_dev(&fn_),
        mean_fpr: mean(&col(&|r| r.fpr)),
        mean_tpr: mean(&col(&|r| r.tpr)),
        mean_rho2: mean(&rho2),
        median_rho2: median(&rho2),
        mean_l2_loss: mean(&col(&|r| r.l2_loss)),
        success_rate: mean(&success),
    }
}

/// Averaged ROC points `(FPR, TPR)` of one estimator, sorted by FPR.
pub fn roc_curve(summary: &[SummaryRow], estimator: &str) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = summary
        .iter()
        .filter(|r| r.estimator == estimator)
        .filter_map(|r| Some((r.mean_fpr?, r.mean_tpr?)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts
}

/// TPR at `fpr` by linear interpolation along a sorted curve; `None`
/// outside its FPR range.
pub fn interpolate_tpr(curve: &[(f64, f64)], fpr: f64) -> Option<f64> {
    let first = curve.first()?;
    let last = curve.last()?;
    if fpr < first.0 || fpr > last.0 {
        return None;
    }
    // Among points sharing an FPR, the best TPR defines the curve.
    let mut best: Option<f64> = None;
    for w in curve.windows(2) {
        let (a, b) = (w[0], w[1]);
        if fpr >= a.0 && fpr <= b.0 {
            let v = if b.0 > a.0 {
                a.1 + (b.1 - a.1) * (fpr - a.0) / (b.0 - a.0)
            } else {
                a.1.max(b.1)
            };
            best = Some(best.map_or(v, |x: f64| x.max(v)));
        }
    }
    best.or_else(|| (curve.len() == 1).then_some(first.1))
}

/// Least-squares nondecreasing fit (pool adjacent violators).
pub fn isotonic_fit(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 as f64 + m2 * w2 as f64) / w as f64, w);
        }
    }
    blocks.into_iter().flat_map(|(m, w)| std::iter::repeat(m).take(w)).collect()
}

/// Largest absolute deviation from the isotonic fit.
pub fn isotonic_residual(values: &[f64]) -> f64 {
    isotonic_fit(values)
        .iter()
        .zip(values)
        .map(|(f, v)| (f - v).abs())
        .fold(0.0, f64::max)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra)?, mean(&rb)?);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}
