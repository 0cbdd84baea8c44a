//! Entropy functions: convex generators `f` with `f(1) = 0`.
//!
//! Every generator is normalised so that the induced divergence
//! `∫ q f(p/q)` matches the conventional scale used for reference values:
//!
//! | name         | `f(t)`                                  | divergence                    |
//! |--------------|-----------------------------------------|-------------------------------|
//! | `tv`         | `|t − 1|`                               | `∫|p − q|` (twice the TV)     |
//! | `kl`         | `t log t`                               | `KL(p‖q)`                     |
//! | `reverse_kl` | `−log t`                                | `KL(q‖p)`                     |
//! | `js`         | `½[t log(2t/(t+1)) + log(2/(t+1))]`     | Jensen–Shannon (nats, ≤ log 2)|
//! | `hellinger2` | `½(√t − 1)²`                            | `1 − ∫√(pq)`                  |
//! | `chi2`       | `½(t − 1)²`                             | `½ χ²(p‖q)`                   |
//! | `triangular` | `(t − 1)²/(t + 1)`                      | triangular discrimination     |
//! | `jeffreys`   | `(t − 1) log t`                         | `KL(p‖q) + KL(q‖p)`           |

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

/// Default clamp for generators whose value or slope blows up at zero.
pub const DEFAULT_EPSILON_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    #[serde(rename = "tv")]
    TotalVariation,
    #[serde(rename = "kl")]
    Kl,
    ReverseKl,
    #[serde(rename = "js")]
    JensenShannon,
    #[serde(rename = "hellinger2")]
    SqHellinger,
    #[serde(rename = "chi2")]
    ChiSq,
    #[serde(rename = "triangular")]
    TriangularDiscrimination,
    Jeffreys,
}

impl EntropyKind {
    pub const ALL: [EntropyKind; 8] = [
        EntropyKind::TotalVariation,
        EntropyKind::Kl,
        EntropyKind::ReverseKl,
        EntropyKind::JensenShannon,
        EntropyKind::SqHellinger,
        EntropyKind::ChiSq,
        EntropyKind::TriangularDiscrimination,
        EntropyKind::Jeffreys,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntropyKind::TotalVariation => "tv",
            EntropyKind::Kl => "kl",
            EntropyKind::ReverseKl => "reverse_kl",
            EntropyKind::JensenShannon => "js",
            EntropyKind::SqHellinger => "hellinger2",
            EntropyKind::ChiSq => "chi2",
            EntropyKind::TriangularDiscrimination => "triangular",
            EntropyKind::Jeffreys => "jeffreys",
        }
    }
}

impl fmt::Display for EntropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntropyKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        EntropyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| domain(format!("unknown entropy kind `{s}`")))
    }
}

/// Derivative value together with a flag telling whether the argument was
/// raised to the clamp before evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySpec {
    pub kind: EntropyKind,
    pub epsilon_clamp: f64,
}

impl From<EntropyKind> for EntropySpec {
    fn from(kind: EntropyKind) -> Self {
        EntropySpec::new(kind)
    }
}

impl EntropySpec {
    pub fn new(kind: EntropyKind) -> Self {
        Self {
            kind,
            epsilon_clamp: DEFAULT_EPSILON_CLAMP,
        }
    }

    pub fn with_clamp(mut self, epsilon: f64) -> Self {
        assert!(epsilon > 0.0, "clamp must be positive");
        self.epsilon_clamp = epsilon;
        self
    }

    /// `f(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(domain(format!("entropy argument must be ≥ 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// `f(t)` without the domain check; `t` must be nonnegative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        match self.kind {
            EntropyKind::TotalVariation => (t - 1.0).abs(),
            EntropyKind::Kl => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
            EntropyKind::ReverseKl => -t.max(self.epsilon_clamp).ln(),
            EntropyKind::JensenShannon => {
                let s = t + 1.0;
                let a = if t == 0.0 { 0.0 } else { t * (2.0 * t / s).ln() };
                0.5 * (a + (2.0 / s).ln())
            }
            EntropyKind::SqHellinger => {
                let r = t.sqrt() - 1.0;
                0.5 * r * r
            }
            EntropyKind::ChiSq => 0.5 * (t - 1.0) * (t - 1.0),
            EntropyKind::TriangularDiscrimination => (t - 1.0) * (t - 1.0) / (t + 1.0),
            EntropyKind::Jeffreys => (t - 1.0) * t.max(self.epsilon_clamp).ln(),
        }
    }

    /// True when `f'` (or `f` itself) is unbounded as `t → 0`.
    pub fn singular_at_zero(&self) -> bool {
        matches!(
            self.kind,
            EntropyKind::Kl
                | EntropyKind::ReverseKl
                | EntropyKind::JensenShannon
                | EntropyKind::SqHellinger
                | EntropyKind::Jeffreys
        )
    }

    /// True when `f(0) = +∞`; a zero-mass bin then makes the divergence infinite.
    pub fn infinite_at_zero(&self) -> bool {
        matches!(self.kind, EntropyKind::ReverseKl | EntropyKind::Jeffreys)
    }

    pub fn is_differentiable(&self) -> bool {
        self.kind != EntropyKind::TotalVariation
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.kind != EntropyKind::TotalVariation
    }

    /// `f'(t)`. Singular kinds evaluate at `max(t, ε)` and report the clamp.
    /// For `tv` this is the subgradient, `0` at the kink.
    pub fn derivative(&self, t: f64) -> Derivative {
        let clamped = self.singular_at_zero() && t < self.epsilon_clamp;
        Derivative {
            value: self.slope(t),
            clamped,
        }
    }

    #[inline]
    pub fn slope(&self, t: f64) -> f64 {
        let tc = if self.singular_at_zero() {
            t.max(self.epsilon_clamp)
        } else {
            t
        };
        match self.kind {
            EntropyKind::TotalVariation => {
                if tc > 1.0 {
                    1.0
                } else if tc < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            EntropyKind::Kl => tc.ln() + 1.0,
            EntropyKind::ReverseKl => -1.0 / tc,
            EntropyKind::JensenShannon => 0.5 * (2.0 * tc / (tc + 1.0)).ln(),
            EntropyKind::SqHellinger => 0.5 * (1.0 - 1.0 / tc.sqrt()),
            EntropyKind::ChiSq => tc - 1.0,
            EntropyKind::TriangularDiscrimination => {
                (tc - 1.0) * (tc + 3.0) / ((tc + 1.0) * (tc + 1.0))
            }
            EntropyKind::Jeffreys => tc.ln() + 1.0 - 1.0 / tc,
        }
    }

    /// A Lipschitz constant of `f` on `[lo, interval_hi]`, where `lo` is the
    /// clamp for kinds singular at zero and `0` otherwise. `f'` is monotone,
    /// so the supremum of `|f'|` sits at an endpoint.
    pub fn lipschitz_bound(&self, interval_hi: f64) -> f64 {
        assert!(interval_hi > 0.0, "interval must be nonempty");
        if self.kind == EntropyKind::TotalVariation {
            return 1.0;
        }
        let lo = if self.singular_at_zero() {
            self.epsilon_clamp.min(interval_hi)
        } else {
            0.0
        };
        self.slope(lo).abs().max(self.slope(interval_hi).abs())
    }

    /// `lim_{t→∞} f(t)/t`, used when the reference density vanishes.
    pub fn recession_slope(&self) -> f64 {
        match self.kind {
            EntropyKind::TotalVariation | EntropyKind::TriangularDiscrimination => 1.0,
            EntropyKind::ReverseKl => 0.0,
            EntropyKind::JensenShannon => 0.5 * LN_2,
            EntropyKind::SqHellinger => 0.5,
            EntropyKind::Kl | EntropyKind::ChiSq | EntropyKind::Jeffreys => f64::INFINITY,
        }
    }

    /// The perspective `q·f(p/q)` from log-densities, evaluated without forming
    /// the ratio where that would overflow.
    pub fn perspective_ln(&self, ln_p: f64, ln_q: f64) -> f64 {
        let p = ln_p.exp();
        let q = ln_q.exp();
        if p == 0.0 && q == 0.0 {
            return 0.0;
        }
        match self.kind {
            EntropyKind::TotalVariation => (p - q).abs(),
            EntropyKind::Kl => {
                if p == 0.0 {
                    0.0
                } else {
                    p * (ln_p - ln_q)
                }
            }
            EntropyKind::ReverseKl => {
                if q == 0.0 {
                    0.0
                } else {
                    q * (ln_q - ln_p)
                }
            }
            EntropyKind::JensenShannon => {
                let ln_m = log_add_exp(ln_p, ln_q);
                let a = if p == 0.0 { 0.0 } else { p * (LN_2 + ln_p - ln_m) };
                let b = if q == 0.0 { 0.0 } else { q * (LN_2 + ln_q - ln_m) };
                0.5 * (a + b)
            }
            EntropyKind::SqHellinger => {
                let r = p.sqrt() - q.sqrt();
                0.5 * r * r
            }
            EntropyKind::ChiSq => {
                if q == 0.0 {
                    f64::INFINITY
                } else {
                    0.5 * (p - q) * (p - q) / q
                }
            }
            EntropyKind::TriangularDiscrimination => (p - q) * (p - q) / (p + q),
            EntropyKind::Jeffreys => (p - q) * (ln_p - ln_q),
        }
    }
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec(kind: EntropyKind) -> EntropySpec {
        EntropySpec::new(kind)
    }

    #[test]
    fn unit_point_is_exactly_zero() {
        for kind in EntropyKind::ALL {
            assert_eq!(spec(kind).value(1.0), 0.0, "{kind}");
        }
    }

    #[test]
    fn documented_values() {
        assert_eq!(spec(EntropyKind::TotalVariation).eval(1.0).unwrap(), 0.0);
        assert_eq!(spec(EntropyKind::ChiSq).eval(0.0).unwrap(), 0.5);
        assert_eq!(spec(EntropyKind::Kl).eval(0.0).unwrap(), 0.0);
        assert!(spec(EntropyKind::Kl).eval(-1e-3).is_err());
        assert_eq!(spec(EntropyKind::ChiSq).derivative(3.0).value, 2.0);
        assert_eq!(spec(EntropyKind::Kl).derivative(1.0).value, 1.0);
        assert_eq!(spec(EntropyKind::TotalVariation).derivative(0.5).value, -1.0);
        assert_eq!(spec(EntropyKind::TotalVariation).derivative(1.0).value, 0.0);
    }

    #[test]
    fn singular_derivative_is_flagged_not_rejected() {
        let d = spec(EntropyKind::ReverseKl).derivative(0.0);
        assert!(d.clamped);
        assert!(d.value.is_finite());
        assert!(!spec(EntropyKind::ChiSq).derivative(0.0).clamped);
    }

    #[test]
    fn names_round_trip() {
        for kind in EntropyKind::ALL {
            assert_eq!(kind.name().parse::<EntropyKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("renyi".parse::<EntropyKind>().is_err());
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(spec(EntropyKind::TotalVariation).lipschitz_bound(9.0), 1.0);
        assert_eq!(spec(EntropyKind::ChiSq).lipschitz_bound(65.0), 64.0);
        // KL: |f'| is largest at the clamp, |log ε + 1|.
        let kl = spec(EntropyKind::Kl).lipschitz_bound(65.0);
        assert_relative_eq!(kl, (1e-12f64).ln().abs() - 1.0, max_relative = 1e-14);
        let wide = spec(EntropyKind::Kl).with_clamp(0.5).lipschitz_bound(65.0);
        assert_relative_eq!(wide, 65f64.ln() + 1.0, max_relative = 1e-14);
    }

    /// Grid-search oracle: the largest secant slope over a fine grid never
    /// exceeds the analytic bound.
    #[test]
    fn lipschitz_bound_dominates_grid_secants() {
        for kind in EntropyKind::ALL {
            let s = spec(kind);
            let hi = 65.0;
            let lo = if s.singular_at_zero() { s.epsilon_clamp } else { 0.0 };
            let bound = s.lipschitz_bound(hi);
            // geometric grid near the clamp plus a linear grid further out
            let mut grid: Vec<f64> = (0..=400)
                .map(|i| lo + (hi - lo) * (i as f64 / 400.0))
                .collect();
            grid.extend((0..=300).map(|i| lo * 10f64.powf(i as f64 * 14.0 / 300.0)));
            grid.retain(|t| *t >= lo && *t <= hi);
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            let max_secant = grid
                .windows(2)
                .map(|w| ((s.value(w[1]) - s.value(w[0])) / (w[1] - w[0])).abs())
                .fold(0.0, f64::max);
            assert!(
                max_secant <= bound * (1.0 + 1e-9),
                "{kind}: secant {max_secant} > bound {bound}"
            );
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        let h = 1e-6;
        for kind in EntropyKind::ALL {
            let s = spec(kind);
            for i in 0..200 {
                let t = 0.01 + 64.99 * i as f64 / 199.0;
                if kind == EntropyKind::TotalVariation && (t - 1.0).abs() < 1e-3 {
                    continue;
                }
                let fd = (s.value(t + h) - s.value(t - h)) / (2.0 * h);
                let d = s.slope(t);
                let scale = d.abs().max(1.0);
                assert!(
                    (fd - d).abs() / scale < 1e-6,
                    "{kind} at {t}: fd {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn perspective_agrees_with_direct_form() {
        for kind in EntropyKind::ALL {
            let s = spec(kind);
            for (p, q) in [(0.3, 0.7), (1.2, 0.4), (0.05, 2.0)] {
                let direct = q * s.value(p / q);
                let via_ln = s.perspective_ln(f64::ln(p), f64::ln(q));
                assert_relative_eq!(direct, via_ln, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn recession_slope_matches_growth() {
        for kind in EntropyKind::ALL {
            let s = spec(kind);
            let t = 1e9;
            let slope = s.recession_slope();
            if slope.is_finite() {
                assert!((s.value(t) / t - slope).abs() < 1e-3, "{kind}");
            } else {
                assert!(s.value(t) / t > 10.0, "{kind}");
            }
        }
    }

    #[test]
    fn tv_is_symmetric_about_one() {
        let s = spec(EntropyKind::TotalVariation);
        // dyadic grid, so 2 − t is exact
        for i in 0..=128 {
            let t = i as f64 / 64.0;
            assert_eq!(s.value(t), s.value(2.0 - t));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn convex_on_random_triples(a in 0.0f64..65.0, b in 0.0f64..65.0, lam in 0.0f64..=1.0) {
            for kind in EntropyKind::ALL {
                let s = spec(kind);
                // the clamp makes reverse_kl and jeffreys flat below ε
                let (a, b) = if s.infinite_at_zero() {
                    (a.max(s.epsilon_clamp), b.max(s.epsilon_clamp))
                } else {
                    (a, b)
                };
                let mid = s.value(lam * a + (1.0 - lam) * b);
                let chord = lam * s.value(a) + (1.0 - lam) * s.value(b);
                prop_assert!(mid <= chord + 1e-12, "{} violates convexity by {}", kind, mid - chord);
            }
        }
    }
}
