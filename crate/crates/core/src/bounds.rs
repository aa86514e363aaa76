//! Closed-form calculators: Chernoff tails, the trinomial term and the
//! parameter formulas used by the experiments.
//!
//! `log` is the natural logarithm throughout. Unspecified constants default to
//! [`DEFAULT_CONSTANT`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

/// Default for the unpinned constants `C`, `C′` and `C″`.
pub const DEFAULT_CONSTANT: f64 = 1.0;
/// Reference value of the stability exponent `c` in the triangle-free case.
/// It has no finite-`n` meaning and is exposed for documentation only.
pub const REFERENCE_STABILITY_EXPONENT: f64 = 1.0 / 250.0;

/// Reference exponent `1 / (100 ℓ³)` of the clique case; documentation only.
pub fn reference_clique_exponent(l: usize) -> f64 {
    1.0 / (100.0 * (l as f64).powi(3))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{formula}: {msg}")]
    Domain { formula: &'static str, msg: String },
    #[error("unknown formula `{0}`")]
    UnknownFormula(String),
    #[error("{formula}: missing input `{input}`")]
    MissingInput {
        formula: &'static str,
        input: &'static str,
    },
}

fn domain(formula: &'static str, msg: impl Into<String>) -> BoundsError {
    BoundsError::Domain {
        formula,
        msg: msg.into(),
    }
}

/// One evaluated formula with its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, f64>,
    pub value: f64,
    /// `ln(value)` when `value > 0`, computed directly where the value itself
    /// could overflow or underflow.
    pub ln_value: Option<f64>,
    /// `⌈value⌉` for formulas whose values are used as counts.
    pub ceiling: Option<u64>,
    /// Secondary outputs, e.g. both ends of an interval.
    pub extra: BTreeMap<String, f64>,
}

impl BoundReport {
    fn new(name: &str, inputs: &[(&str, f64)], value: f64) -> Self {
        Self {
            name: name.to_string(),
            inputs: inputs.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value,
            ln_value: (value > 0.0).then(|| value.ln()),
            ceiling: None,
            extra: BTreeMap::new(),
        }
    }

    fn with_ln(mut self, ln_value: f64) -> Self {
        self.ln_value = Some(ln_value);
        self
    }

    fn with_ceiling(mut self) -> Self {
        self.ceiling = Some(self.value.ceil().max(0.0) as u64);
        self
    }

    fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// Natural log of the Chernoff bound for `Bin(n, p)` deviating by `t` from
/// `λ = np`: `-t² / (2(λ + t/3))` above, `-t² / (2λ)` below. With `λ = 0` the
/// lower tail is `ln 1 = 0` at `t = 0` and `-∞` otherwise.
pub fn chernoff_tail_ln(n: u64, p: f64, t: f64, side: Side) -> Result<f64, BoundsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("chernoff", format!("p = {p} outside [0, 1]")));
    }
    if !(t >= 0.0) {
        return Err(domain("chernoff", format!("t = {t} must be non-negative")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let lambda = n as f64 * p;
    Ok(match side {
        Side::Upper => -t * t / (2.0 * (lambda + t / 3.0)),
        Side::Lower if lambda == 0.0 => f64::NEG_INFINITY,
        Side::Lower => -t * t / (2.0 * lambda),
    })
}

pub fn chernoff_tail(n: u64, p: f64, t: f64, side: Side) -> Result<f64, BoundsError> {
    chernoff_tail_ln(n, p, t, side).map(f64::exp)
}

/// `ln(N! / (i! j! k!))` with `k = N - i - j`.
fn ln_multinomial(n: u64, i: u64, j: u64) -> f64 {
    let k = n - i - j;
    ln_gamma(n as f64 + 1.0)
        - ln_gamma(i as f64 + 1.0)
        - ln_gamma(j as f64 + 1.0)
        - ln_gamma(k as f64 + 1.0)
}

/// `N! / (i! j! k!)` when it fits exactly in an `f64` mantissa.
fn exact_multinomial(n: u64, i: u64, j: u64) -> Option<f64> {
    let binom = |n: u64, k: u64| -> Option<u128> {
        let mut acc: u128 = 1;
        for x in 0..k {
            acc = acc.checked_mul((n - x) as u128)? / (x as u128 + 1);
        }
        Some(acc)
    };
    let c = binom(n, i)?.checked_mul(binom(n - i, j)?)?;
    (c < 1u128 << 53).then_some(c as f64)
}

/// Probability that a trinomial with `N` trials and cell probabilities
/// `(q1, q2, 1 - q1 - q2)` lands on `(i, j, N - i - j)`, with its log.
pub fn trinomial_pmf(n: u64, i: u64, j: u64, q1: f64, q2: f64) -> Result<(f64, f64), BoundsError> {
    if i + j > n {
        return Err(domain(
            "trinomial",
            format!("cells {i} + {j} exceed N = {n}"),
        ));
    }
    let q3 = 1.0 - q1 - q2;
    if !(q1 >= 0.0 && q2 >= 0.0 && q3 >= -1e-15) {
        return Err(domain(
            "trinomial",
            format!("probabilities ({q1}, {q2}) are infeasible"),
        ));
    }
    let q3 = q3.max(0.0);
    let k = n - i - j;
    let log_pow = |q: f64, e: u64| if e == 0 { 0.0 } else { e as f64 * q.ln() };
    let ln = ln_multinomial(n, i, j) + log_pow(q1, i) + log_pow(q2, j) + log_pow(q3, k);
    let pow = |q: f64, e: u64| q.powi(e as i32);
    let value = match exact_multinomial(n, i, j) {
        Some(c) if n <= i32::MAX as u64 => c * pow(q1, i) * pow(q2, j) * pow(q3, k),
        _ => ln.exp(),
    };
    Ok((value, ln))
}

/// The trinomial term at cells `(αN, αN + d, (1 - 2α)N - d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrinomialTerm {
    pub value: f64,
    pub ln_value: f64,
    /// `αN` rounded to the nearest integer.
    pub alpha_n: u64,
    /// `alpha_n / N`, the α actually used.
    pub effective_alpha: f64,
    /// Whether `d <= min(√(αN), √((1 - 2α)N))`.
    pub d_in_range: bool,
}

/// `N! / ((αN)! (αN + d)! ((1-2α)N - d)!) · α^(2αN + d) (1 - 2α)^((1-2α)N - d)`.
pub fn trinomial_term(n: u64, alpha: f64, d: u64) -> Result<TrinomialTerm, BoundsError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(domain(
            "trinomial",
            format!("alpha = {alpha} outside (0, 1/2)"),
        ));
    }
    if n == 0 {
        return Err(domain("trinomial", "N must be positive"));
    }
    let a = (alpha * n as f64).round() as u64;
    if 2 * a + d > n {
        return Err(domain(
            "trinomial",
            format!("third cell {n} - 2·{a} - {d} is negative"),
        ));
    }
    let eff = a as f64 / n as f64;
    let (value, ln_value) = trinomial_pmf(n, a, a + d, eff, eff)?;
    let third = (n - 2 * a) as f64;
    let d_in_range = (d as f64) <= (a as f64).sqrt().min(third.sqrt());
    Ok(TrinomialTerm {
        value,
        ln_value,
        alpha_n: a,
        effective_alpha: eff,
        d_in_range,
    })
}

fn positive(formula: &'static str, name: &str, x: f64) -> Result<(), BoundsError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(formula, format!("{name} = {x} must be positive")))
    }
}

fn probability(formula: &'static str, p: f64) -> Result<(), BoundsError> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(domain(formula, format!("p = {p} outside (0, 1]")))
    }
}

/// `s₀ = C · ω · r⁴ · √(n / p)`.
pub fn s0(c: f64, omega: f64, r: f64, n: f64, p: f64) -> Result<BoundReport, BoundsError> {
    positive("s0", "C", c)?;
    positive("s0", "omega", omega)?;
    positive("s0", "r", r)?;
    positive("s0", "n", n)?;
    probability("s0", p)?;
    let ln = c.ln() + omega.ln() + 4.0 * r.ln() + 0.5 * (n.ln() - p.ln());
    let value = c * omega * r.powi(4) * (n / p).sqrt();
    Ok(BoundReport::new(
        "s0",
        &[("C", c), ("omega", omega), ("r", r), ("n", n), ("p", p)],
        value,
    )
    .with_ln(ln)
    .with_ceiling())
}

/// `r₀ = p⁻¹² log² n`.
pub fn r0(p: f64, n: f64) -> Result<BoundReport, BoundsError> {
    probability("r0", p)?;
    if !(n > 1.0) {
        return Err(domain("r0", format!("n = {n} must exceed 1")));
    }
    let ln = -12.0 * p.ln() + 2.0 * n.ln().ln();
    Ok(BoundReport::new("r0", &[("p", p), ("n", n)], ln.exp())
        .with_ln(ln)
        .with_ceiling())
}

/// `s(r) = n^(2/3) (r + 1)⁴`.
pub fn s_of_r(n: f64, r: f64) -> Result<BoundReport, BoundsError> {
    positive("s_r", "n", n)?;
    if !(r >= 0.0) {
        return Err(domain("s_r", format!("r = {r} must be non-negative")));
    }
    let ln = 2.0 / 3.0 * n.ln() + 4.0 * (r + 1.0).ln();
    Ok(BoundReport::new("s_r", &[("n", n), ("r", r)], ln.exp())
        .with_ln(ln)
        .with_ceiling())
}

/// `(√3 / 4) n^(3/2) √(log n)`.
pub fn threshold_m(n: f64) -> Result<BoundReport, BoundsError> {
    if !(n >= 1.0) {
        return Err(domain("threshold_m", format!("n = {n} must be at least 1")));
    }
    let value = 3f64.sqrt() / 4.0 * n.powf(1.5) * n.ln().sqrt();
    Ok(BoundReport::new("threshold_m", &[("n", n)], value).with_ceiling())
}

/// `t_i = r² n (n - 1) / (s_i (n - s_i))`.
pub fn t_i(r: f64, s_i: f64, n: f64) -> Result<BoundReport, BoundsError> {
    positive("t_i", "r", r)?;
    if !(s_i > 0.0 && s_i < n) {
        return Err(domain("t_i", format!("s_i = {s_i} outside (0, n)")));
    }
    let value = r * r * n * (n - 1.0) / (s_i * (n - s_i));
    Ok(BoundReport::new("t_i", &[("r", r), ("s_i", s_i), ("n", n)], value).with_ceiling())
}

/// `x_i = s (n - s) / (n (n - 1)) · t_i`.
pub fn x_i(s: f64, n: f64, t_i: f64) -> Result<BoundReport, BoundsError> {
    if !(n > 1.0) {
        return Err(domain("x_i", format!("n = {n} must exceed 1")));
    }
    if !(0.0..=n).contains(&s) {
        return Err(domain("x_i", format!("s = {s} outside [0, n]")));
    }
    if !(t_i >= 0.0) {
        return Err(domain("x_i", format!("t_i = {t_i} must be non-negative")));
    }
    let value = s * (n - s) / (n * (n - 1.0)) * t_i;
    Ok(BoundReport::new("x_i", &[("s", s), ("n", n), ("t_i", t_i)], value).with_ceiling())
}

/// Pittel's factor `3√M`.
pub fn pittel_factor(m: f64) -> Result<BoundReport, BoundsError> {
    if !(m >= 0.0) {
        return Err(domain("pittel", format!("M = {m} must be non-negative")));
    }
    Ok(BoundReport::new("pittel", &[("M", m)], 3.0 * m.sqrt()))
}

/// `[M/2, M/2 + √(4nM)]`; `value` is the upper end.
pub fn b_bounds(n: f64, m: f64) -> Result<BoundReport, BoundsError> {
    positive("b_bounds", "n", n)?;
    if !(m >= 0.0 && m <= n * (n - 1.0) / 2.0) {
        return Err(domain("b_bounds", format!("M = {m} outside [0, C(n,2)]")));
    }
    let (lower, upper) = (m / 2.0, m / 2.0 + (4.0 * n * m).sqrt());
    Ok(BoundReport::new("b_bounds", &[("n", n), ("M", m)], upper)
        .with_extra("lower", lower)
        .with_extra("upper", upper))
}

/// `3 n^(3/4) p^(-1/4) + λ^(1/2) p^(-1/2)`.
pub fn balance_bound(n: f64, p: f64, lambda: f64) -> Result<BoundReport, BoundsError> {
    positive("balance", "n", n)?;
    probability("balance", p)?;
    if !(lambda >= 0.0) {
        return Err(domain(
            "balance",
            format!("lambda = {lambda} must be non-negative"),
        ));
    }
    let value = 3.0 * n.powf(0.75) * p.powf(-0.25) + (lambda / p).sqrt();
    Ok(BoundReport::new(
        "balance",
        &[("n", n), ("p", p), ("lambda", lambda)],
        value,
    ))
}

/// `(C(n,2) - M) / 2 - √(C n⁵ / M)`. May be negative.
pub fn nonedge_bound(n: f64, m: f64, c: f64) -> Result<BoundReport, BoundsError> {
    positive("nonedge", "n", n)?;
    positive("nonedge", "C", c)?;
    let total = n * (n - 1.0) / 2.0;
    if !(m > 0.0 && m <= total) {
        return Err(domain("nonedge", format!("M = {m} outside (0, C(n,2)]")));
    }
    let value = 0.5 * (total - m) - (c * n.powi(5) / m).sqrt();
    Ok(BoundReport::new(
        "nonedge",
        &[("n", n), ("M", m), ("C", c)],
        value,
    ))
}

/// Sandwich for `E[b(G(n, M + t)) - b(G(n, M))]`:
/// `t (1/2 - √(20 C′ n / M))` to `t (1/2 + √(5n / M))`; `value` is the upper end.
pub fn evolution_sandwich(
    n: f64,
    m: f64,
    t: f64,
    c_prime: f64,
) -> Result<BoundReport, BoundsError> {
    positive("sandwich", "n", n)?;
    positive("sandwich", "M", m)?;
    positive("sandwich", "C", c_prime)?;
    if !(t >= 0.0) {
        return Err(domain("sandwich", format!("t = {t} must be non-negative")));
    }
    let lower = t * (0.5 - (20.0 * c_prime * n / m).sqrt());
    let upper = t * (0.5 + (5.0 * n / m).sqrt());
    Ok(BoundReport::new(
        "sandwich",
        &[("n", n), ("M", m), ("t", t), ("C", c_prime)],
        upper,
    )
    .with_extra("lower", lower)
    .with_extra("upper", upper))
}

/// Names accepted by [`evaluate`].
pub const FORMULAS: &[&str] = &[
    "s0",
    "r0",
    "s_r",
    "threshold_m",
    "t_i",
    "x_i",
    "pittel",
    "b_bounds",
    "balance",
    "nonedge",
    "sandwich",
    "chernoff_upper",
    "chernoff_lower",
    "trinomial",
];

/// Evaluates a formula by name from named inputs; `C` defaults to
/// [`DEFAULT_CONSTANT`].
pub fn evaluate(formula: &str, inputs: &BTreeMap<String, f64>) -> Result<BoundReport, BoundsError> {
    let name: &'static str = FORMULAS
        .iter()
        .find(|f| **f == formula)
        .ok_or_else(|| BoundsError::UnknownFormula(formula.to_string()))?;
    let get = |key: &'static str| {
        inputs.get(key).copied().ok_or(BoundsError::MissingInput {
            formula: name,
            input: key,
        })
    };
    let c = inputs.get("C").copied().unwrap_or(DEFAULT_CONSTANT);
    match name {
        "s0" => s0(c, get("omega")?, get("r")?, get("n")?, get("p")?),
        "r0" => r0(get("p")?, get("n")?),
        "s_r" => s_of_r(get("n")?, get("r")?),
        "threshold_m" => threshold_m(get("n")?),
        "t_i" => t_i(get("r")?, get("s_i")?, get("n")?),
        "x_i" => x_i(get("s")?, get("n")?, get("t_i")?),
        "pittel" => pittel_factor(get("M")?),
        "b_bounds" => b_bounds(get("n")?, get("M")?),
        "balance" => balance_bound(get("n")?, get("p")?, get("lambda")?),
        "nonedge" => nonedge_bound(get("n")?, get("M")?, c),
        "sandwich" => evolution_sandwich(get("n")?, get("M")?, get("t")?, c),
        "chernoff_upper" | "chernoff_lower" => {
            let side = if name == "chernoff_upper" {
                Side::Upper
            } else {
                Side::Lower
            };
            let (n, p, t) = (get("n")?, get("p")?, get("t")?);
            let ln = chernoff_tail_ln(count(name, "n", n)?, p, t, side)?;
            Ok(
                BoundReport::new(name, &[("n", n), ("p", p), ("t", t)], ln.exp())
                    .with_ln(ln)
                    .with_extra("lambda", n * p),
            )
        }
        "trinomial" => {
            let (n, alpha, d) = (get("N")?, get("alpha")?, get("d")?);
            let term = trinomial_term(count(name, "N", n)?, alpha, count(name, "d", d)?)?;
            Ok(
                BoundReport::new(name, &[("N", n), ("alpha", alpha), ("d", d)], term.value)
                    .with_ln(term.ln_value)
                    .with_extra("alpha_n", term.alpha_n as f64)
                    .with_extra("effective_alpha", term.effective_alpha)
                    .with_extra("d_in_range", if term.d_in_range { 1.0 } else { 0.0 }),
            )
        }
        _ => unreachable!("listed formula"),
    }
}

fn count(formula: &'static str, name: &str, x: f64) -> Result<u64, BoundsError> {
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53) {
        Ok(x as u64)
    } else {
        Err(domain(
            formula,
            format!("{name} = {x} must be a non-negative integer"),
        ))
    }
}
