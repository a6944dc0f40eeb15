use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest coalition game solved by enumeration.
pub const MAX_EXACT_COLUMNS: usize = 12;

/// Rows evaluated per call of the value function while sampling.
const ROWS_PER_CALL: usize = 4096;

/// Shapley values of one input.
#[derive(Clone, Debug, PartialEq)]
pub struct Explanation {
    /// Model output at the background point.
    pub base: f64,
    /// Model output at the explained point.
    pub prediction: f64,
    pub values: Vec<f64>,
    /// Standard error per value; zero for enumeration.
    pub se: Vec<f64>,
}

impl Explanation {
    /// `base + Σ values − prediction`.
    pub fn efficiency_gap(&self) -> f64 {
        self.base + self.values.iter().sum::<f64>() - self.prediction
    }
}

fn check_inputs(x: &[f64], background: &[f64]) -> Result<()> {
    if x.is_empty() || x.len() != background.len() {
        return Err(Error::shape("shapley input", &[x.len()], &[background.len()]));
    }
    Ok(())
}

fn call<F>(f: &F, rows: &[f64], width: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let out = f(rows)?;
    if out.len() * width != rows.len() {
        return Err(Error::Contract(format!(
            "value function returned {} outputs for {} rows",
            out.len(),
            rows.len() / width
        )));
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("value function"));
    }
    Ok(out)
}

/// Exact Shapley values of the `active` columns. `f` maps row-major rows of
/// width `x.len()` to one output each. Active columns outside a coalition,
/// and every inactive column, take their background value.
pub fn exact_shapley<F>(f: &F, x: &[f64], background: &[f64], active: &[usize]) -> Result<Explanation>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_inputs(x, background)?;
    let k = active.len();
    if k == 0 || k > MAX_EXACT_COLUMNS {
        return Err(Error::Config(format!(
            "exact enumeration takes 1 to {MAX_EXACT_COLUMNS} columns, got {k}; use sampling"
        )));
    }
    let mut seen = vec![false; x.len()];
    for &c in active {
        if c >= x.len() || std::mem::replace(&mut seen[c], true) {
            return Err(Error::Config(format!("active column {c} is out of range or repeated")));
        }
    }

    let d = x.len();
    let mut rows = Vec::with_capacity((1 << k) * d);
    for mask in 0..1usize << k {
        let start = rows.len();
        rows.extend_from_slice(background);
        for (bit, &c) in active.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                rows[start + c] = x[c];
            }
        }
    }
    let v = call(f, &rows, d)?;

    // weight[s] = s! (k - s - 1)! / k!
    let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
    let weight: Vec<f64> = (0..k).map(|s| fact(s) * fact(k - s - 1) / fact(k)).collect();
    let values = (0..k)
        .map(|i| {
            (0..1usize << k)
                .filter(|m| m >> i & 1 == 0)
                .map(|m| weight[m.count_ones() as usize] * (v[m | 1 << i] - v[m]))
                .sum()
        })
        .collect();
    Ok(Explanation {
        base: v[0],
        prediction: v[(1 << k) - 1],
        values,
        se: vec![0.0; k],
    })
}

/// Permutation-sampling estimate over all columns of `x`. Each permutation
/// switches columns from background to `x` one at a time and credits every
/// column with the change it causes. Values sum exactly to
/// `prediction - base` because every permutation's credits do.
pub fn sampled_shapley<F>(f: &F, x: &[f64], background: &[f64], permutations: usize, seed: u64) -> Result<Explanation>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampled_with(f, x, background, permutations, &mut rng)
}

pub(crate) fn sampled_with<F>(
    f: &F,
    x: &[f64],
    background: &[f64],
    permutations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Explanation>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    check_inputs(x, background)?;
    if permutations == 0 {
        return Err(Error::Config("at least one permutation is required".into()));
    }
    let d = x.len();
    let per_call = (ROWS_PER_CALL / (d + 1)).max(1);
    let mut sum = vec![0.0; d];
    let mut sum_sq = vec![0.0; d];
    let mut ends = None;
    let mut order: Vec<usize> = (0..d).collect();
    let mut done = 0;
    while done < permutations {
        let count = per_call.min(permutations - done);
        let mut orders = Vec::with_capacity(count);
        let mut rows = Vec::with_capacity(count * (d + 1) * d);
        for _ in 0..count {
            order.shuffle(rng);
            let mut row = background.to_vec();
            rows.extend_from_slice(&row);
            for &c in &order {
                row[c] = x[c];
                rows.extend_from_slice(&row);
            }
            orders.push(order.clone());
        }
        let v = call(f, &rows, d)?;
        for (p, o) in orders.iter().enumerate() {
            let v = &v[p * (d + 1)..(p + 1) * (d + 1)];
            ends.get_or_insert((v[0], v[d]));
            for (j, &c) in o.iter().enumerate() {
                let m = v[j + 1] - v[j];
                sum[c] += m;
                sum_sq[c] += m * m;
            }
        }
        done += count;
    }
    let n = permutations as f64;
    let values: Vec<f64> = sum.iter().map(|s| s / n).collect();
    // Sample standard deviation of the marginals over sqrt(n); a single
    // permutation carries no spread estimate and reports zero.
    let se = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, q)| {
            if permutations < 2 {
                return 0.0;
            }
            let var = ((q - s * s / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    let (base, prediction) = ends.unwrap();
    Ok(Explanation {
        base,
        prediction,
        values,
        se,
    })
}
