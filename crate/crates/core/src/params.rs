//! Scale parameters and the real-valued bound formulas.
//!
//! Bounds are evaluated in `f64`. Whenever a bound is compared against an
//! exact count or floored, it is first rounded up by a relative 2^-40 so that
//! floating-point error can only make a check more permissive, never reject a
//! value that satisfies the exact bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::HostGraph;
use crate::pattern::Pattern;

pub const REL_TOL: f64 = 1.0 / (1u64 << 40) as f64;

pub fn round_up(x: f64) -> f64 {
    x + x.abs() * REL_TOL
}

pub fn round_down(x: f64) -> f64 {
    x - x.abs() * REL_TOL
}

/// ⌊x⌋ of a bound, computed after rounding up; negative values give 0.
pub fn floor_bound(x: f64) -> u64 {
    let x = round_up(x);
    if x.is_nan() || x <= 0.0 {
        0
    } else if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.floor() as u64
    }
}

/// `value ≤ bound` with the bound rounded up.
pub fn within(value: f64, bound: f64) -> bool {
    value <= round_up(bound)
}

/// Whether two reals agree to relative 2^-40.
pub fn approx_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= REL_TOL * x.abs().max(y.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub pattern: Pattern,
    pub n: usize,
    pub k: f64,
    pub delta: f64,
    /// ε(1..b) for theta patterns, ε(1..r+1) for complete ones.
    pub epsilons: Vec<f64>,
    pub big_k: f64,
    pub k0: f64,
}

fn factorial(a: usize) -> f64 {
    (1..=a).map(|i| i as f64).product()
}

impl ScaleParams {
    /// The ε recurrence and K for the pattern, with δ and k0 = 1/δ derived
    /// from them. Fails if δ underflows `f64`.
    pub fn default_constants(pattern: Pattern, n: usize, k: f64) -> Result<Self> {
        pattern.validate()?;
        let (epsilons, big_k, delta) = match &pattern {
            Pattern::Theta { a, b } => {
                let (a, b) = (*a, *b);
                let big_k = (5 * a * b) as f64;
                let mut eps = vec![0.0; b];
                eps[b - 1] = big_k.powi(-3);
                for t in (2..=b).rev() {
                    eps[t - 2] = eps[t - 1].powi(t as i32);
                }
                let delta = eps[0].powi((2 * a * b + 2) as i32);
                (eps, big_k, delta)
            }
            Pattern::Complete(profile) => {
                let r = profile.len();
                let mut eps = vec![0.5];
                let mut prod = 1usize;
                for &a in profile {
                    prod *= a;
                    let prev: f64 = *eps.last().unwrap();
                    eps.push(prev.powi(a as i32) / (2f64.powi((2 * a + prod) as i32) * factorial(a)));
                }
                let big_k = prod as f64 * 2f64.powi((profile.iter().sum::<usize>() + 1) as i32);
                let delta = eps[r] / 2.0;
                (eps, big_k, delta)
            }
        };
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "default δ for {pattern} underflows double precision; supply δ explicitly"
            )));
        }
        Ok(ScaleParams {
            pattern,
            n,
            k,
            delta,
            epsilons,
            big_k,
            k0: 1.0 / delta,
        })
    }

    /// Parameters for a concrete host: k = e(G)/m(n). When `delta` is given
    /// it replaces the default δ (and k0 becomes 1/δ).
    pub fn for_host(pattern: Pattern, g: &HostGraph, delta: Option<f64>) -> Result<Self> {
        pattern.check_host(g)?;
        let k = g.m() as f64 / m_of_n(&pattern, g.n());
        let mut p = match Self::default_constants(pattern.clone(), g.n(), k) {
            Ok(p) => p,
            Err(e) if delta.is_none() => return Err(e),
            Err(_) => {
                let (epsilons, big_k) = Self::scaffold(&pattern);
                ScaleParams {
                    pattern,
                    n: g.n(),
                    k,
                    delta: f64::NAN,
                    epsilons,
                    big_k,
                    k0: f64::NAN,
                }
            }
        };
        if let Some(d) = delta {
            p = p.with_delta(d)?;
        }
        Ok(p)
    }

    fn scaffold(pattern: &Pattern) -> (Vec<f64>, f64) {
        match pattern {
            Pattern::Theta { a, b } => (Vec::new(), (5 * a * b) as f64),
            Pattern::Complete(profile) => (
                Vec::new(),
                profile.iter().product::<usize>() as f64 * 2f64.powi((profile.iter().sum::<usize>() + 1) as i32),
            ),
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
        }
        self.delta = delta;
        self.k0 = 1.0 / delta;
        Ok(self)
    }

    pub fn with_k(mut self, k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
        }
        self.k = k;
        Ok(self)
    }

    fn theta(&self) -> Result<(usize, usize)> {
        match self.pattern {
            Pattern::Theta { a, b } => Ok((a, b)),
            _ => Err(Error::InvalidParameter(format!(
                "{} is not a theta pattern",
                self.pattern
            ))),
        }
    }

    fn profile(&self) -> Result<&[usize]> {
        match &self.pattern {
            Pattern::Complete(p) => Ok(p),
            _ => Err(Error::InvalidParameter(format!(
                "{} is not a complete r-partite pattern",
                self.pattern
            ))),
        }
    }

    /// δ·k^{b/(b−1)}, the ratio between consecutive Δ^(j).
    pub fn theta_step(&self) -> Result<f64> {
        let (_, b) = self.theta()?;
        Ok(self.delta * self.k.powf(b as f64 / (b as f64 - 1.0)))
    }

    /// Default family size target: δk^{ab}n² or δk^{a1···ar}n^{a1+…+a_{r−1}}.
    pub fn target(&self) -> f64 {
        let n = self.n as f64;
        match &self.pattern {
            Pattern::Theta { a, b } => self.delta * self.k.powi((a * b) as i32) * n * n,
            Pattern::Complete(p) => {
                let r = p.len();
                self.delta
                    * self.k.powi(p.iter().product::<usize>() as i32)
                    * n.powi(p[..r - 1].iter().sum::<usize>() as i32)
            }
        }
    }

    /// The target as a member count (the real target rounded up).
    pub fn target_count(&self) -> usize {
        let t = round_down(self.target()).ceil();
        if t <= 0.0 {
            0
        } else if t >= usize::MAX as f64 {
            usize::MAX
        } else {
            t as usize
        }
    }
}

/// m(n) = n^{1+1/b} for θ_{a,b}, n^{r−1/(a1···a_{r−1})} for complete patterns.
pub fn m_of_n(pattern: &Pattern, n: usize) -> f64 {
    let n = n as f64;
    match pattern {
        Pattern::Theta { b, .. } => n.powf(1.0 + 1.0 / *b as f64),
        Pattern::Complete(p) => {
            let r = p.len();
            let prod: usize = p[..r - 1].iter().product();
            n.powf(r as f64 - 1.0 / prod as f64)
        }
    }
}

/// Δ^(j)(δ,k,n) = k^{ab−1} n^{1−1/b} / (δ k^{b/(b−1)})^{j−1}.
pub fn delta_bound(j: usize, p: &ScaleParams) -> Result<f64> {
    let (a, b) = p.theta()?;
    if j < 1 {
        return Err(Error::BoundIndex(format!("Δ^(j) needs j ≥ 1, got {j}")));
    }
    let n = p.n as f64;
    let top = p.k.powi((a * b - 1) as i32) * n.powf(1.0 - 1.0 / b as f64);
    Ok(top / p.theta_step()?.powi(j as i32 - 1))
}

/// δ·k^{a1···a_{i−1}}·n^{1−1/(a_i···a_{r−1})}, the i-th factor of D (1-based i).
pub fn d_factor(i: usize, p: &ScaleParams) -> Result<f64> {
    let profile = p.profile()?;
    let r = profile.len();
    if i < 1 || i > r {
        return Err(Error::BoundIndex(format!("factor index {i} outside 1..={r}")));
    }
    let before: usize = profile[..i - 1].iter().product();
    let after: usize = profile[i - 1..r - 1].iter().product();
    Ok(p.delta * p.k.powi(before as i32) * (p.n as f64).powf(1.0 - 1.0 / after as f64))
}

/// D^(b1,…,br)(δ,k,n) = ∏_i d_factor(i)^{a_i − b_i}.
pub fn d_cap(bvec: &[usize], p: &ScaleParams) -> Result<f64> {
    let profile = p.profile()?;
    if bvec.len() != profile.len() || bvec.iter().zip(profile).any(|(&b, &a)| b < 1 || b > a) {
        return Err(Error::BoundIndex(format!(
            "{bvec:?} is not within 1..=a for profile {profile:?}"
        )));
    }
    let mut out = 1.0;
    for (i, (&b, &a)) in bvec.iter().zip(profile).enumerate() {
        out *= d_factor(i + 1, p)?.powi((a - b) as i32);
    }
    Ok(out)
}

/// 2^{ab+|S|+1}·(δk^{b/(b−1)})^j, the cap on a link of a set S.
pub fn link_bound(s_len: usize, j: usize, p: &ScaleParams) -> Result<f64> {
    let (a, b) = p.theta()?;
    Ok(2f64.powi((a * b + s_len + 1) as i32) * p.theta_step()?.powi(j as i32))
}

/// K·δ·k^{a1···a_{i−1}}·n^{1−1/(a_i···a_{r−1})}, the cap on |X_i|.
pub fn x_bound(i: usize, p: &ScaleParams) -> Result<f64> {
    Ok(p.big_k * d_factor(i, p)?)
}
