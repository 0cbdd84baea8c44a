use crate::error::{domain, Result};

/// Saturation point of the logistic window: `σ(40) = 1 − 4.2e-18`.
const LOGISTIC_WINDOW: f64 = 40.0;

/// Width, in units of `τ`, of the blocks sharing one exponential anchor in
/// [`Samples1D::cdf_many`].
const ANCHOR_SPAN: f64 = 20.0;

/// A univariate sample together with its sorted view and the seed that drew it.
#[derive(Debug, Clone)]
pub struct Samples1D {
    values: Vec<f64>,
    sorted: Vec<f64>,
    seed: u64,
}

impl Samples1D {
    pub fn new(values: Vec<f64>, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("a sample needs at least one value"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("sample contains non-finite value {bad}")));
        }
        let mut sorted = values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            values,
            sorted,
            seed,
        })
    }

    /// Values in draw order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values in nondecreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Permutation that sorts `values` (stable for ties).
    pub fn sorted_view(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        idx
    }

    /// `#{j : y_j ≤ x}`.
    #[inline]
    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&y| y <= x)
    }

    /// Right-continuous empirical CDF.
    pub fn empirical_cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    /// Logistic-smoothed CDF `(1/M) Σ σ((x − y_j)/τ)`. Terms more than
    /// 40 τ away are saturated to 0 or 1.
    pub fn smoothed_cdf(&self, x: f64, tau: f64) -> f64 {
        debug_assert!(tau > 0.0);
        let reach = LOGISTIC_WINDOW * tau;
        let lo = self.sorted.partition_point(|&y| y < x - reach);
        let hi = self.sorted.partition_point(|&y| y <= x + reach);
        let inside: f64 = self.sorted[lo..hi]
            .iter()
            .map(|&y| logistic((x - y) / tau))
            .sum();
        (lo as f64 + inside) / self.len() as f64
    }

    /// Empirical CDF when `tau == 0`, logistic-smoothed otherwise.
    pub fn cdf(&self, x: f64, tau: f64) -> f64 {
        if tau > 0.0 {
            self.smoothed_cdf(x, tau)
        } else {
            self.empirical_cdf(x)
        }
    }

    /// [`cdf`](Self::cdf) at many points. For `tau > 0` the sorted sample is
    /// cut into blocks spanning at most `20τ`, and with `a` the first value of
    /// a block each term is `1/(1 + e^{(y−a)/τ} e^{(a−x)/τ})`: one exponential
    /// per block and query instead of one per term. Agrees with
    /// [`smoothed_cdf`](Self::smoothed_cdf) up to rounding.
    pub fn cdf_many(&self, xs: &[f64], tau: f64) -> Vec<f64> {
        if !(tau > 0.0) {
            return xs.iter().map(|&x| self.empirical_cdf(x)).collect();
        }
        let ys = &self.sorted;
        let span = ANCHOR_SPAN * tau;
        let mut starts: Vec<usize> = Vec::new();
        let mut weights = Vec::with_capacity(ys.len());
        let mut anchor = f64::NAN;
        for (j, &y) in ys.iter().enumerate() {
            if starts.is_empty() || y - anchor > span {
                starts.push(j);
                anchor = y;
            }
            weights.push(((y - anchor) / tau).exp());
        }
        let reach = LOGISTIC_WINDOW * tau;
        let m = ys.len() as f64;
        xs.iter()
            .map(|&x| {
                let lo = ys.partition_point(|&y| y < x - reach);
                let hi = ys.partition_point(|&y| y <= x + reach);
                let mut inside = 0.0;
                let mut b = starts.partition_point(|&s| s <= lo) - 1;
                let mut j = lo;
                while j < hi {
                    let end = starts.get(b + 1).map_or(hi, |&s| s.min(hi));
                    let scale = ((ys[starts[b]] - x) / tau).exp();
                    inside += weights[j..end].iter().map(|w| 1.0 / (1.0 + w * scale)).sum::<f64>();
                    j = end;
                    b += 1;
                }
                (lo as f64 + inside) / m
            })
            .collect()
    }

    /// Quantile by linear interpolation between order statistics at
    /// position `u·(M − 1)`; `u = 0` gives the minimum and `u = 1` the maximum.
    pub fn empirical_quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(domain(format!("quantile level must lie in [0, 1], got {u}")));
        }
        Ok(self.quantile_unchecked(u))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, u: f64) -> f64 {
        let m = self.sorted.len();
        if m == 1 {
            return self.sorted[0];
        }
        let h = u * (m - 1) as f64;
        let lo = (h.floor() as usize).min(m - 1);
        let hi = (lo + 1).min(m - 1);
        let frac = h - lo as f64;
        self.sorted[lo] + frac * (self.sorted[hi] - self.sorted[lo])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance (0 for a single value).
    pub fn variance(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }

    /// Applies `f` to every value; callers use strictly increasing maps to
    /// check order invariance.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect(), self.seed)
    }
}

#[inline]
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}
