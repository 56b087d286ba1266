//! Route similarity scoring: sequence deviation, edit distance with real
//! penalty and the combined route score.
//!
//! Lower scores are better; a candidate identical to its benchmark scores 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RouteInstance, StopSequence, TravelTimeMatrix};

/// Gap cost used when none is configured. Large enough that equal-length
/// same-set sequences align by substitutions only.
pub const DEFAULT_GAP_PENALTY: f64 = 1000.0;

/// Travel times divided by the route's mean off-diagonal travel time.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTimeMatrix {
    n: usize,
    data: Vec<f64>,
}

impl NormalizedTimeMatrix {
    /// Wraps already-normalized values (row-major). Used by tests and by
    /// callers that bring their own normalization.
    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n || data.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidCosts("normalized times must be finite, nonnegative and square".into()));
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.n + to]
    }
}

pub fn normalize_times(times: &TravelTimeMatrix) -> NormalizedTimeMatrix {
    let n = times.len();
    let raw = times.as_slice();
    let off_diagonal = n * n.saturating_sub(1);
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += raw[i * n + j];
            }
        }
    }
    let mean = if off_diagonal > 0 { sum / off_diagonal as f64 } else { 0.0 };
    let data = if mean > 0.0 {
        raw.iter().map(|v| v / mean).collect()
    } else {
        vec![0.0; n * n]
    };
    NormalizedTimeMatrix { n, data }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub sd: f64,
    pub erp_n: f64,
    pub erp_e: usize,
    pub route_score: f64,
}

fn check_same_set(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::StopSetMismatch(format!("lengths {} and {}", a.len(), b.len())));
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa.windows(2).any(|w| w[0] == w[1]) || sb.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::StopSetMismatch("sequence repeats a stop".into()));
    }
    if sa != sb {
        return Err(Error::StopSetMismatch("sequences cover different stops".into()));
    }
    Ok(())
}

/// Sequence deviation of candidate `b` against benchmark `a`. Both start at
/// the same depot, which is excluded from the `n` scored stops and anchors
/// position 0. Each transition contributes `|a_i - a_{i-1}| - 1`.
pub fn sequence_deviation(a: &[usize], b: &[usize]) -> Result<f64> {
    check_same_set(a, b)?;
    if a.first() != b.first() {
        return Err(Error::StopSetMismatch("sequences start at different depots".into()));
    }
    let n = a.len().saturating_sub(1);
    if n <= 1 {
        return Ok(0.0);
    }
    let max_id = a.iter().copied().max().unwrap_or(0);
    let mut position = vec![0i64; max_id + 1];
    for (k, &s) in a.iter().enumerate() {
        position[s] = k as i64;
    }
    let mut prev = 0i64;
    let mut total = 0i64;
    for &s in &b[1..] {
        let p = position[s];
        total += (p - prev).abs() - 1;
        prev = p;
    }
    let sd = 2.0 / (n as f64 * (n as f64 - 1.0)) * total as f64;
    Ok(sd.max(0.0))
}

/// Edit distance with real penalty between `a` and `b`: the cost and the
/// number of nonzero-cost operations of one optimal alignment. Lengths may
/// differ; no stop-set check is made.
pub fn erp_alignment(a: &[usize], b: &[usize], ntimes: &NormalizedTimeMatrix, gap: f64) -> (f64, usize) {
    let (m, k) = (a.len(), b.len());
    let w = k + 1;
    let mut table = vec![0.0f64; (m + 1) * w];
    for i in (0..=m).rev() {
        for j in (0..=k).rev() {
            table[i * w + j] = if i == m && j == k {
                0.0
            } else if i == m {
                gap + table[i * w + j + 1]
            } else if j == k {
                gap + table[(i + 1) * w + j]
            } else {
                let sub = ntimes.get(a[i], b[j]) + table[(i + 1) * w + j + 1];
                let del = gap + table[i * w + j + 1];
                let ins = gap + table[(i + 1) * w + j];
                sub.min(del).min(ins)
            };
        }
    }

    // walk one optimal alignment; prefer substitute, then delete, then insert
    let (mut i, mut j, mut edits) = (0, 0, 0usize);
    while i < m || j < k {
        let here = table[i * w + j];
        if i < m && j < k {
            let c = ntimes.get(a[i], b[j]);
            if c + table[(i + 1) * w + j + 1] == here {
                edits += usize::from(c != 0.0);
                i += 1;
                j += 1;
                continue;
            }
        }
        if j < k && gap + table[i * w + j + 1] == here {
            edits += usize::from(gap != 0.0);
            j += 1;
            continue;
        }
        edits += usize::from(gap != 0.0);
        i += 1;
    }
    (table[0], edits)
}

/// [`erp_alignment`] restricted to same-set sequences.
pub fn erp(a: &[usize], b: &[usize], ntimes: &NormalizedTimeMatrix, gap: f64) -> Result<(f64, usize)> {
    check_same_set(a, b)?;
    Ok(erp_alignment(a, b, ntimes, gap))
}

/// `sd * erp_n / erp_e`, defined as 0 when no edits are needed.
pub fn route_score(a: &[usize], b: &[usize], ntimes: &NormalizedTimeMatrix, gap: f64) -> Result<ScoreBreakdown> {
    let sd = sequence_deviation(a, b)?;
    let (erp_n, erp_e) = erp(a, b, ntimes, gap)?;
    let route_score = if erp_e == 0 {
        0.0
    } else {
        sd * erp_n / erp_e as f64
    };
    Ok(ScoreBreakdown {
        sd,
        erp_n,
        erp_e,
        route_score,
    })
}

/// Scores `candidate` against the instance's benchmark sequence.
pub fn score_against_benchmark(instance: &RouteInstance, candidate: &StopSequence, gap: f64) -> Result<ScoreBreakdown> {
    let bench = instance
        .actual()
        .ok_or_else(|| Error::validation(instance.id().as_str(), "no benchmark sequence"))?;
    let ntimes = normalize_times(instance.times());
    route_score(bench.as_slice(), candidate.as_slice(), &ntimes, gap)
}

/// Mean route score.
pub fn aggregate_score(breakdowns: &[ScoreBreakdown]) -> Result<f64> {
    if breakdowns.is_empty() {
        return Err(Error::Empty("no route scores to aggregate"));
    }
    Ok(breakdowns.iter().map(|b| b.route_score).sum::<f64>() / breakdowns.len() as f64)
}
