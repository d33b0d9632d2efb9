//! Ergodic rates over exponentially distributed (Rayleigh power) channel
//! coefficients.
//!
//! Every rate in this crate is an expectation of the form
//! `E[log2(1 + a·h / (b + c·h))]` with `h ~ Exp(lambda)`, see
//! [`fading_log_rate`]. Rates are in bits per channel use.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Physical scenario: fading statistics of the main and eavesdropper
/// channels, power budgets and receiver noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    lambda_m: f64,
    lambda_w: f64,
    power: f64,
    jam: f64,
    noise_var: f64,
}

impl ChannelParams {
    /// `lambda_m`, `lambda_w` are the rate parameters (inverse means) of the
    /// main and eavesdropper channel coefficients; `power` and `jam` are the
    /// average power budgets of the transmitter and of the jammer.
    pub fn new(lambda_m: f64, lambda_w: f64, power: f64, jam: f64, noise_var: f64) -> Result<Self> {
        let p = Self {
            lambda_m,
            lambda_w,
            power,
            jam,
            noise_var,
        };
        p.validate()?;
        Ok(p)
    }

    /// Eavesdropper statistically close to the legitimate receiver
    /// (`lambda_m = 0.3`, `lambda_w = 0.8`, jam 5, unit noise).
    pub fn similar_channels(power: f64) -> Result<Self> {
        Self::new(0.3, 0.8, power, 5.0, 1.0)
    }

    /// Eavesdropper channel clearly weaker than the main channel
    /// (`lambda_m = 0.2`, `lambda_w = 1.5`, jam 5, unit noise).
    pub fn weak_eavesdropper(power: f64) -> Result<Self> {
        Self::new(0.2, 1.5, power, 5.0, 1.0)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.lambda_m, self.lambda_w, self.power, self.jam, self.noise_var]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("channel parameters must be finite".into()));
        }
        if self.lambda_m <= 0.0 || self.lambda_w <= 0.0 {
            return Err(Error::Domain(format!(
                "fading rate parameters must be positive (lambda_m = {}, lambda_w = {})",
                self.lambda_m, self.lambda_w
            )));
        }
        if self.power < 0.0 || self.jam < 0.0 {
            return Err(Error::Domain(format!(
                "power budgets must be nonnegative (power = {}, jam = {})",
                self.power, self.jam
            )));
        }
        if self.noise_var <= 0.0 {
            return Err(Error::Domain(format!("noise variance must be positive, got {}", self.noise_var)));
        }
        Ok(())
    }

    pub fn lambda_m(&self) -> f64 {
        self.lambda_m
    }

    pub fn lambda_w(&self) -> f64 {
        self.lambda_w
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn jam(&self) -> f64 {
        self.jam
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Same scenario with a different transmit power budget.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::new(self.lambda_m, self.lambda_w, power, self.jam, self.noise_var)
    }

    pub fn with_lambda_w(&self, lambda_w: f64) -> Result<Self> {
        Self::new(self.lambda_m, lambda_w, self.power, self.jam, self.noise_var)
    }
}

/// Partition `0 = q_0 < q_1 < … < q_{n-1} < q_n = 1` of the eavesdropping
/// probability axis together with the superposition power-splitting
/// coefficients `alpha_1 … alpha_{n-1}` (`alpha_n = 0`).
///
/// Level `i` receives `(1 - alpha_i)·alpha_{i-1}·…·alpha_1` of the power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeDesign {
    thresholds: Vec<f64>,
    alphas: Vec<f64>,
}

impl CodeDesign {
    pub fn new(thresholds: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if thresholds.len() != alphas.len() {
            return Err(Error::InvalidDesign(format!(
                "{} thresholds but {} power-splitting coefficients",
                thresholds.len(),
                alphas.len()
            )));
        }
        let mut prev = 0.0;
        for &q in &thresholds {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidDesign(format!("threshold {q} not in (0, 1)")));
            }
            if q <= prev {
                return Err(Error::InvalidDesign(format!("thresholds not strictly increasing at {q}")));
            }
            prev = q;
        }
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidDesign(format!("power-splitting coefficient {a} not in [0, 1]")));
        }
        Ok(Self { thresholds, alphas })
    }

    /// Single-level design (plain Wyner code).
    pub fn single() -> Self {
        Self {
            thresholds: Vec::new(),
            alphas: Vec::new(),
        }
    }

    /// Design whose thresholds split `[0, 1]` into `alphas.len() + 1` equal intervals.
    pub fn uniform(alphas: Vec<f64>) -> Result<Self> {
        let n = alphas.len() + 1;
        let thresholds = (1..n).map(|i| i as f64 / n as f64).collect();
        Self::new(thresholds, alphas)
    }

    /// Number of encoding levels.
    pub fn n(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `q_i` for `0 ≤ i ≤ n`, including the implicit `q_0 = 0` and `q_n = 1`.
    pub fn threshold(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i >= self.n() => 1.0,
            i => self.thresholds[i - 1],
        }
    }

    /// `alpha_i` for `1 ≤ i ≤ n`; `alpha_n = 0`.
    pub fn alpha(&self, i: usize) -> f64 {
        assert!(i >= 1, "levels are numbered from 1");
        if i >= self.n() {
            0.0
        } else {
            self.alphas[i - 1]
        }
    }

    /// Power left for the levels below `i`: `alpha_i·…·alpha_1·total`
    /// (`total` for `i = 0`, zero for `i = n`).
    pub fn residual_power(&self, i: usize, total: f64) -> f64 {
        (1..=i).fold(total, |acc, j| acc * self.alpha(j))
    }

    /// Per-level powers `P_1 … P_n`; they sum to `total`.
    pub fn level_powers(&self, total: f64) -> Vec<f64> {
        (1..=self.n())
            .map(|i| self.residual_power(i - 1, total) * (1.0 - self.alpha(i)))
            .collect()
    }

    /// Index `i` of the interval `(q_{i-1}, q_i]` containing `q`; `q = 0` maps to 1.
    ///
    /// A strategy sitting exactly on `q_i` belongs to interval `i`, matching
    /// key rates evaluated at the interval's upper end.
    pub fn interval_of(&self, q: f64) -> usize {
        let n = self.n();
        (1..n).find(|&i| q <= self.threshold(i)).unwrap_or(n)
    }
}

/// Rates `R_1 … R_n` of the encoding levels, strongest first.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRates {
    rates: Vec<f64>,
}

impl LevelRates {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::Domain("at least one level rate is required".into()));
        }
        if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::Domain(format!("level rate {r} must be finite and nonnegative")));
        }
        Ok(Self { rates })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn n(&self) -> usize {
        self.rates.len()
    }

    /// `R_i`, levels numbered from 1.
    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i - 1]
    }

    /// Forwarding rate when the receiver decodes levels `1..=i`.
    pub fn forwarding_rate(&self, i: usize) -> Result<f64> {
        forwarding_rate(self, i)
    }
}

fn quad_opts() -> QuadratureOptions {
    QuadratureOptions::default()
}

/// `E[log2(1 + a·h / (b + c·h))]` for `h ~ Exp(lambda)`.
///
/// The expectation is mapped to `(0, 1]` with `u = exp(-lambda·h)` and
/// integrated adaptively. `c = 0` is the interference-free form.
pub fn fading_log_rate(lambda: f64, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("rate parameter must be positive, got {lambda}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("noise term must be positive, got {b}")));
    }
    if !(a >= 0.0 && a.is_finite() && c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("gains must be finite and nonnegative (a = {a}, c = {c})")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let a = a / b;
    let c = c / b;
    let inv_lambda = 1.0 / lambda;
    let integrand = |u: f64| {
        let h = -u.ln() * inv_lambda;
        (a * h / (1.0 + c * h)).ln_1p()
    };
    let nats = integrate(integrand, 0.0, 1.0, quad_opts())?;
    Ok((nats / LN_2).max(0.0))
}

/// `f(q) = q·log2(1+x) + (1-q)·log2(1 + x / (1 + y/(1-q)))`, extended to
/// `q = 1` by continuity. Strictly increasing and strictly convex in `q`.
pub fn mode_mix_rate(q: f64, x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("probability {q} not in [0, 1]")));
    }
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("x and y must be positive (x = {x}, y = {y})")));
    }
    let listened = q * x.ln_1p();
    let jammed = if q < 1.0 {
        (1.0 - q) * (x / (1.0 + y / (1.0 - q))).ln_1p()
    } else {
        0.0
    };
    Ok((listened + jammed) / LN_2)
}

/// Rate of a level with `signal` power and `interference` power (both scaled
/// by `h`) when the jammer is off a fraction `q` of the time and spends
/// `jam / (1 - q)` while on. `q = 1` drops the jammed term.
pub fn jammed_level_rate(
    lambda: f64,
    signal: f64,
    interference: f64,
    q: f64,
    noise_var: f64,
    jam: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("probability {q} not in [0, 1]")));
    }
    if signal == 0.0 {
        return Ok(0.0);
    }
    let clear = if q > 0.0 {
        q * fading_log_rate(lambda, signal, noise_var, interference)?
    } else {
        0.0
    };
    let jammed = if q < 1.0 {
        (1.0 - q) * fading_log_rate(lambda, signal, noise_var + jam / (1.0 - q), interference)?
    } else {
        0.0
    };
    Ok(clear + jammed)
}

/// Worst-case Wyner rate with the jammer always on at the average budget:
/// `[E log2(1 + h_M P/(σ² + J)) − E log2(1 + h_W P/σ²)]^+`.
pub fn wcs_secrecy_rate(params: &ChannelParams) -> Result<f64> {
    wcs_secrecy_rate_with_jam(params, params.jam())
}

/// Worst-case Wyner rate for an explicit effective jam power `jam_power`
/// (for instance `jam / (1 - q)`).
///
/// Jamming is folded into the main channel as an equivalent exponential
/// coefficient with rate `lambda_m·(1 + jam_power/σ²)`, so the rate vanishes
/// exactly when that rate reaches `lambda_w`.
pub fn wcs_secrecy_rate_with_jam(params: &ChannelParams, jam_power: f64) -> Result<f64> {
    if !(jam_power >= 0.0 && jam_power.is_finite()) {
        return Err(Error::Domain(format!("jam power must be nonnegative, got {jam_power}")));
    }
    let sigma2 = params.noise_var();
    let equivalent_lambda = params.lambda_m() * (1.0 + jam_power / sigma2);
    if equivalent_lambda >= params.lambda_w() {
        return Ok(0.0);
    }
    let main = fading_log_rate(equivalent_lambda, params.power(), sigma2, 0.0)?;
    let eve = fading_log_rate(params.lambda_w(), params.power(), sigma2, 0.0)?;
    Ok((main - eve).max(0.0))
}

/// Rate of level `i` with the jammer-on probability `1 - q`, i.e. the level
/// rate with `q` substituted for `q_{i-1}`.
pub fn level_rate_at(params: &ChannelParams, design: &CodeDesign, i: usize, q: f64) -> Result<f64> {
    let n = design.n();
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, max: n });
    }
    let total = params.power();
    let signal = design.residual_power(i - 1, total) * (1.0 - design.alpha(i));
    let interference = design.residual_power(i, total);
    jammed_level_rate(params.lambda_m(), signal, interference, q, params.noise_var(), params.jam())
}

/// Rates of all encoding levels; level `i` is designed for a jammer that is on
/// with probability `1 - q_{i-1}` and is decoded with the weaker levels as noise.
pub fn level_rates(params: &ChannelParams, design: &CodeDesign) -> Result<LevelRates> {
    let rates = (1..=design.n())
        .map(|i| level_rate_at(params, design, i, design.threshold(i - 1)))
        .collect::<Result<Vec<_>>>()?;
    LevelRates::new(rates)
}

/// `R_1 + … + R_i`.
pub fn forwarding_rate(levels: &LevelRates, i: usize) -> Result<f64> {
    if i == 0 || i > levels.n() {
        return Err(Error::IndexOutOfRange { index: i, max: levels.n() });
    }
    Ok(levels.as_slice()[..i].iter().sum())
}
