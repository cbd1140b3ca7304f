use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use super::benchmark::BenchmarkMatrix;
use super::qtable::nemenyi_q;
use super::EvalError;

/// Largest number of non-zero differences handled by the exact null
/// distribution; beyond it the normal approximation is used.
pub const EXACT_LIMIT: usize = 25;
const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// `min(W+, W−)`.
    pub statistic: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    /// Pairs left after dropping zero differences.
    pub n_used: usize,
    pub p_value: f64,
    pub reject: bool,
    pub exact: bool,
}

/// Ascending mid-ranks starting at 1; tied values share the mean of the
/// positions they occupy.
pub fn mid_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test of `a − b`.
///
/// Zero differences are dropped and tied magnitudes mid-ranked. With at
/// most [`EXACT_LIMIT`] remaining pairs the p-value is `2·P(T ≤ W)` under the
/// exact permutation distribution of the observed ranks; above that, a
/// normal approximation with continuity and tie corrections.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonResult, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < MIN_PAIRS {
        return Err(EvalError::TooFewPairs {
            found: a.len(),
            min: MIN_PAIRS,
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvalError::BadAlpha(alpha));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&d| d != 0.0).collect();
    if diffs.is_empty() {
        return Err(EvalError::AllZeroDifferences);
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = mid_ranks(&magnitudes);
    // Mid-ranks are multiples of 1/2, so doubled ranks are exact integers.
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let plus2: usize = diffs
        .iter()
        .zip(&doubled)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total2: usize = doubled.iter().sum();
    let minus2 = total2 - plus2;
    let w2 = plus2.min(minus2);

    let (p_value, exact) = if n <= EXACT_LIMIT {
        // counts[s] = number of sign patterns whose positive doubled-rank sum is s
        let mut counts = vec![0.0f64; total2 + 1];
        counts[0] = 1.0;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                if counts[s] > 0.0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let tail: f64 = counts[..=w2].iter().sum();
        ((2.0 * tail / 2f64.powi(n as i32)).min(1.0), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = tie_groups(&magnitudes).map(|t| t * t * t - t).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let p = if var > 0.0 {
            let z = ((plus2 as f64 / 2.0 - mean).abs() - 0.5).max(0.0) / var.sqrt();
            erfc(z / std::f64::consts::SQRT_2).min(1.0)
        } else {
            1.0
        };
        (p, false)
    };
    Ok(WilcoxonResult {
        statistic: w2 as f64 / 2.0,
        w_plus: plus2 as f64 / 2.0,
        w_minus: minus2 as f64 / 2.0,
        n_used: n,
        p_value,
        reject: p_value < alpha,
        exact,
    })
}

/// Sizes of groups of equal values.
fn tie_groups(values: &[f64]) -> impl Iterator<Item = f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        groups.push(j as f64);
        i += j;
    }
    groups.into_iter()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Mean rank per classifier; rank 1 is the worst score in a block.
    pub mean_ranks: Vec<f64>,
    pub n_blocks: usize,
}

/// Friedman test over `blocks[b][j]` (score of classifier `j` in block `b`),
/// with mid-ranks for ties and the tie-corrected statistic
/// `(k−1) Σ_j (R_j − N(k+1)/2)² / (Σ r² − N k (k+1)² / 4)`.
/// A block set with no rank variation gives statistic 0 and p = 1.
pub fn friedman(blocks: &[Vec<f64>]) -> Result<FriedmanResult, EvalError> {
    let n = blocks.len();
    if n < 2 {
        return Err(EvalError::TooFewBlocks(n));
    }
    let k = blocks[0].len();
    if k < 2 {
        return Err(EvalError::TooFewClassifiers(k));
    }
    let mut rank_sums = vec![0.0; k];
    let mut sum_sq = 0.0;
    for block in blocks {
        if block.len() != k {
            return Err(EvalError::LengthMismatch {
                left: k,
                right: block.len(),
            });
        }
        for (j, r) in mid_ranks(block).into_iter().enumerate() {
            rank_sums[j] += r;
            sum_sq += r * r;
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    let centre = nf * (kf + 1.0) / 2.0;
    let numerator: f64 = rank_sums.iter().map(|r| (r - centre).powi(2)).sum::<f64>() * (kf - 1.0);
    let denominator = sum_sq - nf * kf * (kf + 1.0).powi(2) / 4.0;
    let (statistic, p_value) = if denominator > 1e-9 * nf * kf && numerator > 0.0 {
        let q = numerator / denominator;
        let chi = ChiSquared::new(kf - 1.0).expect("k >= 2");
        (q, chi.sf(q))
    } else {
        (0.0, 1.0)
    };
    Ok(FriedmanResult {
        statistic,
        p_value,
        mean_ranks: rank_sums.iter().map(|r| r / nf).collect(),
        n_blocks: n,
    })
}

/// Nemenyi critical difference `q_α(k) · sqrt(k(k+1) / (6N))`.
pub fn nemenyi_cd(k: usize, n_blocks: usize, alpha: f64) -> Result<f64, EvalError> {
    if n_blocks == 0 {
        return Err(EvalError::TooFewBlocks(0));
    }
    let q = nemenyi_q(k, alpha)?;
    let kf = k as f64;
    Ok(q * (kf * (kf + 1.0) / (6.0 * n_blocks as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum WilcoxonOutcome {
    Tested(WilcoxonResult),
    /// Identical run scores: reported as p = 1, not rejected.
    AllZero,
    Untestable(String),
}

impl WilcoxonOutcome {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            WilcoxonOutcome::Tested(r) => Some(r.p_value),
            WilcoxonOutcome::AllZero => Some(1.0),
            WilcoxonOutcome::Untestable(_) => None,
        }
    }

    pub fn statistic(&self) -> Option<f64> {
        match self {
            WilcoxonOutcome::Tested(r) => Some(r.statistic),
            WilcoxonOutcome::AllZero => Some(0.0),
            WilcoxonOutcome::Untestable(_) => None,
        }
    }

    /// Whether the pair counts as statistically equivalent (no rejection).
    pub fn equivalent(&self) -> Option<bool> {
        match self {
            WilcoxonOutcome::Tested(r) => Some(!r.reject),
            WilcoxonOutcome::AllZero => Some(true),
            WilcoxonOutcome::Untestable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonEntry {
    pub dataset: usize,
    /// Indices into [`StatReport::classifiers`], `first < second`.
    pub first: usize,
    pub second: usize,
    pub outcome: WilcoxonOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NemenyiPair {
    pub first: usize,
    pub second: usize,
    pub rank_difference: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NemenyiResult {
    pub q: f64,
    pub critical_difference: f64,
    pub pairs: Vec<NemenyiPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub alpha: f64,
    pub datasets: Vec<String>,
    pub classifiers: Vec<String>,
    /// Per dataset, every classifier pair, compared over run scores.
    pub wilcoxon: Vec<WilcoxonEntry>,
    pub friedman: FriedmanResult,
    pub nemenyi: NemenyiResult,
}

impl StatReport {
    pub fn wilcoxon_for(&self, dataset: usize, a: usize, b: usize) -> Option<&WilcoxonEntry> {
        let (first, second) = if a < b { (a, b) } else { (b, a) };
        self.wilcoxon
            .iter()
            .find(|e| e.dataset == dataset && e.first == first && e.second == second)
    }
}

/// Friedman ranking over (dataset, run) blocks with folds averaged, the
/// Nemenyi critical difference, and per-dataset pairwise Wilcoxon tests.
/// Every cell of every classifier must be present.
pub fn friedman_nemenyi(matrix: &BenchmarkMatrix, alpha: f64) -> Result<StatReport, EvalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EvalError::BadAlpha(alpha));
    }
    let k = matrix.classifiers().len();
    if k < 3 {
        return Err(EvalError::TooFewClassifiers(k));
    }
    let n_datasets = matrix.datasets().len();
    let runs = matrix.runs();
    // scores[d][c][r]
    let mut scores = Vec::with_capacity(n_datasets);
    for d in 0..n_datasets {
        let mut per_classifier = Vec::with_capacity(k);
        for c in 0..k {
            let series = matrix.run_scores(d, c).ok_or_else(|| EvalError::MissingCells {
                classifier: matrix.classifiers()[c].clone(),
                dataset: matrix.datasets()[d].clone(),
            })?;
            per_classifier.push(series);
        }
        scores.push(per_classifier);
    }

    let blocks: Vec<Vec<f64>> = (0..n_datasets)
        .flat_map(|d| (0..runs).map(move |r| (d, r)))
        .map(|(d, r)| (0..k).map(|c| scores[d][c][r]).collect())
        .collect();
    let friedman = friedman(&blocks)?;
    let q = nemenyi_q(k, alpha)?;
    let critical_difference = nemenyi_cd(k, friedman.n_blocks, alpha)?;
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let rank_difference = (friedman.mean_ranks[i] - friedman.mean_ranks[j]).abs();
            pairs.push(NemenyiPair {
                first: i,
                second: j,
                rank_difference,
                significant: rank_difference > critical_difference,
            });
        }
    }

    let mut wilcoxon = Vec::new();
    for (d, per_classifier) in scores.iter().enumerate() {
        for i in 0..k {
            for j in i + 1..k {
                let outcome = match wilcoxon_signed_rank(&per_classifier[i], &per_classifier[j], alpha) {
                    Ok(r) => WilcoxonOutcome::Tested(r),
                    Err(EvalError::AllZeroDifferences) => WilcoxonOutcome::AllZero,
                    Err(e) => WilcoxonOutcome::Untestable(e.to_string()),
                };
                wilcoxon.push(WilcoxonEntry {
                    dataset: d,
                    first: i,
                    second: j,
                    outcome,
                });
            }
        }
    }

    Ok(StatReport {
        alpha,
        datasets: matrix.datasets().to_vec(),
        classifiers: matrix.classifiers().to_vec(),
        wilcoxon,
        friedman,
        nemenyi: NemenyiResult {
            q,
            critical_difference,
            pairs,
        },
    })
}
