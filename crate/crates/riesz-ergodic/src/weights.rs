//! Riesz weight sequences: prefix sums S_n, total-variation sums V_n, the
//! ratio P(n) = V_n / S_n, and finite-horizon checks of the summability
//! conditions (regularity p_n/S_n -> 0, Cesaro domination n p_n/S_n <= C,
//! and P(n) -> 0).

use std::sync::Mutex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    /// p_k = c with c > 0.
    Constant(f64),
    /// p_k = k^alpha with alpha > 0.
    Power(f64),
    /// p_k = 1/k.
    Harmonic,
    /// Explicit list; entries past the end repeat the last entry.
    Explicit(Vec<f64>),
}

/// Kahan compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) -> f64 {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
        self.sum
    }
}

#[derive(Debug, Default)]
struct Cache {
    /// p[k-1] = p_k
    p: Vec<f64>,
    /// s[k-1] = S_k
    s: Vec<f64>,
    /// b[k-1] = p_1 + sum_{j=2..k} |p_j - p_{j-1}|  (V_k = b[k-1] + p_k)
    b: Vec<f64>,
    s_acc: Kahan,
    b_acc: Kahan,
    extended: bool,
}

#[derive(Debug)]
pub struct WeightSequence {
    family: WeightFamily,
    cache: Mutex<Cache>,
}

/// Outcome of a finite-horizon limit check. Never a proof: the verdict is a
/// heuristic read of the sampled trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct LimitCheck {
    pub verdict: Verdict,
    /// Sampled (n, value) pairs at logarithmic checkpoints plus N/2 and N.
    pub trace: Vec<(usize, f64)>,
    /// Last sampled value.
    pub last: f64,
}

#[derive(Debug, Clone)]
pub struct DominationCheck {
    pub verdict: Verdict,
    /// C = max_{n<=N} n p_n / S_n.
    pub witness: f64,
    /// First index with p_{n+1} > p_n, if any.
    pub increase_at: Option<usize>,
}

impl WeightSequence {
    pub fn new(family: WeightFamily) -> Result<Self> {
        match &family {
            WeightFamily::Constant(v) => {
                if !(*v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidWeights(format!(
                        "constant weight must be positive, got {}",
                        v
                    )));
                }
            }
            WeightFamily::Power(alpha) => {
                if !(*alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::InvalidWeights(format!(
                        "power exponent must be positive, got {}",
                        alpha
                    )));
                }
            }
            WeightFamily::Harmonic => {}
            WeightFamily::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidWeights("explicit weight list is empty".into()));
                }
                if !(list[0] > 0.0) {
                    return Err(Error::InvalidWeights(format!(
                        "p_1 must be positive, got {}",
                        list[0]
                    )));
                }
                for (k, &p) in list.iter().enumerate() {
                    if !(p >= 0.0) || !p.is_finite() {
                        return Err(Error::InvalidWeights(format!(
                            "p_{} = {} is not a nonnegative finite number",
                            k + 1,
                            p
                        )));
                    }
                }
            }
        }
        Ok(Self {
            family,
            cache: Mutex::new(Cache::default()),
        })
    }

    pub fn constant(v: f64) -> Result<Self> {
        Self::new(WeightFamily::Constant(v))
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(WeightFamily::Power(alpha))
    }

    pub fn harmonic() -> Self {
        Self::new(WeightFamily::Harmonic).expect("harmonic family is always valid")
    }

    pub fn explicit(list: Vec<f64>) -> Result<Self> {
        Self::new(WeightFamily::Explicit(list))
    }

    /// Load an explicit list: one decimal per line, UTF-8.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut list = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t
                .parse()
                .map_err(|_| Error::Parse(format!("weights line {}: bad number {:?}", ln + 1, t)))?;
            list.push(v);
        }
        Self::explicit(list)
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    fn raw_weight(&self, k: usize, cache: &mut Cache) -> f64 {
        debug_assert!(k >= 1);
        match &self.family {
            WeightFamily::Constant(v) => *v,
            WeightFamily::Power(alpha) => (k as f64).powf(*alpha),
            WeightFamily::Harmonic => 1.0 / k as f64,
            WeightFamily::Explicit(list) => {
                if k <= list.len() {
                    list[k - 1]
                } else {
                    cache.extended = true;
                    *list.last().unwrap()
                }
            }
        }
    }

    fn ensure(&self, n: usize, cache: &mut Cache) {
        while cache.p.len() < n {
            let k = cache.p.len() + 1;
            let pk = self.raw_weight(k, cache);
            let s = cache.s_acc.add(pk);
            let b = if k == 1 {
                cache.b_acc.add(pk)
            } else {
                cache.b_acc.add((pk - cache.p[k - 2]).abs())
            };
            cache.p.push(pk);
            cache.s.push(s);
            cache.b.push(b);
        }
    }

    /// p_n (1-based).
    pub fn weight(&self, n: usize) -> f64 {
        assert!(n >= 1, "weights are 1-based");
        let mut cache = self.cache.lock().unwrap();
        self.ensure(n, &mut cache);
        cache.p[n - 1]
    }

    /// S_n = p_1 + ... + p_n.
    pub fn prefix_sum(&self, n: usize) -> f64 {
        assert!(n >= 1, "weights are 1-based");
        let mut cache = self.cache.lock().unwrap();
        self.ensure(n, &mut cache);
        cache.s[n - 1]
    }

    /// V_n = p_1 + |p_2 - p_1| + ... + |p_n - p_{n-1}| + p_n.
    pub fn variation_sum(&self, n: usize) -> f64 {
        assert!(n >= 1, "weights are 1-based");
        let mut cache = self.cache.lock().unwrap();
        self.ensure(n, &mut cache);
        cache.b[n - 1] + cache.p[n - 1]
    }

    /// P(n) = V_n / S_n; the n = 1 value is 2 p_1 / p_1 = 2 (the difference
    /// sum is empty there).
    pub fn p_condition_value(&self, n: usize) -> f64 {
        self.variation_sum(n) / self.prefix_sum(n)
    }

    /// True once an explicit list has been read past its end.
    pub fn was_extended(&self) -> bool {
        self.cache.lock().unwrap().extended
    }

    /// Regularity condition: r_n = p_n / S_n -> 0.
    pub fn check_regularity(&self, horizon: usize, tol: f64) -> LimitCheck {
        assert!(horizon >= 10, "need at least 10 samples");
        self.limit_check(horizon, tol, |n| self.weight(n) / self.prefix_sum(n))
    }

    /// P(n) -> 0, the weight hypothesis behind the error estimate.
    pub fn check_p_condition(&self, horizon: usize, tol: f64) -> LimitCheck {
        assert!(horizon >= 10, "need at least 10 samples");
        self.limit_check(horizon, tol, |n| self.p_condition_value(n))
    }

    fn limit_check(&self, horizon: usize, tol: f64, f: impl Fn(usize) -> f64) -> LimitCheck {
        {
            let mut cache = self.cache.lock().unwrap();
            self.ensure(horizon, &mut cache);
        }
        let half = horizon / 2;
        let mut trace = Vec::new();
        let mut n = 1usize;
        while n < horizon {
            trace.push((n, f(n)));
            n *= 2;
        }
        if trace.last().map(|&(m, _)| m) != Some(half) {
            trace.push((half, f(half)));
            trace.sort_by_key(|&(m, _)| m);
            trace.dedup_by_key(|&mut (m, _)| m);
        }
        trace.push((horizon, f(horizon)));

        let r_last = f(horizon);
        let r_half = f(half);
        // count growth over the back half; genuine decay to 0 shows none
        let mut increases = 0usize;
        let mut prev = r_half;
        for m in (half + 1)..=horizon {
            let r = f(m);
            if r > prev * (1.0 + 1e-12) {
                increases += 1;
            }
            prev = r;
        }
        let verdict = if r_last < tol && increases == 0 {
            Verdict::Pass
        } else if r_last >= tol && r_last >= 0.9 * r_half {
            // still above tolerance and the decay has stalled (or reversed)
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        };
        LimitCheck {
            verdict,
            trace,
            last: r_last,
        }
    }

    /// Monotone non-increasing weights with n p_n / S_n bounded; the witness
    /// is the largest sampled ratio.
    pub fn check_cesaro_domination(&self, horizon: usize) -> DominationCheck {
        assert!(horizon >= 2);
        let mut witness = 0.0f64;
        let mut increase_at = None;
        for n in 1..=horizon {
            let ratio = n as f64 * self.weight(n) / self.prefix_sum(n);
            witness = witness.max(ratio);
            if n < horizon && increase_at.is_none() && self.weight(n + 1) > self.weight(n) {
                increase_at = Some(n);
            }
        }
        DominationCheck {
            verdict: if increase_at.is_none() {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            witness,
            increase_at,
        }
    }
}
