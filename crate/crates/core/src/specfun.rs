//! Special functions and algebraic kernels behind the closed forms:
//! log-gamma, integer-shape incomplete gamma, Tricomi's confluent
//! hypergeometric function, partial fractions and the MPSK erfc kernel.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::quadrature::{integrate_semi_infinite, QuadratureSpec};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma_lanczos<T: Real>(x: T) -> T {
    let xm1 = x - T::one();
    let mut acc = T::of(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::of(c) / (xm1 + T::of_usize(i));
    }
    let t = xm1 + T::of(LANCZOS_G + 0.5);
    T::of(0.5) * (T::PI() + T::PI()).ln() + (xm1 + T::of(0.5)) * t.ln() - t + acc.ln()
}

fn ln_gamma_stirling<T: Real>(x: T) -> T {
    let inv = x.recip();
    let inv2 = inv * inv;
    // Bernoulli-number tail of the Stirling series
    let coeffs = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let mut series = T::zero();
    for &c in coeffs.iter().rev() {
        series = series * inv2 + T::of(c);
    }
    (x - T::of(0.5)) * x.ln() - x + T::of(0.5) * (T::PI() + T::PI()).ln() + series * inv
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x.fract() == T::zero() && x <= T::of(171.0) {
        let n = x.to_usize().expect("small integer");
        return Ok(ln_factorial(n - 1));
    }
    Ok(if x < T::of(0.5) {
        ln_gamma_lanczos(x + T::one()) - x.ln()
    } else if x < T::of(10.0) {
        ln_gamma_lanczos(x)
    } else {
        ln_gamma_stirling(x)
    })
}

/// `ln(n!)`, exact summation for small `n`.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    if n < 2 {
        return T::zero();
    }
    if n <= 170 {
        let mut acc = 0.0f64;
        for k in 2..=n {
            acc += (k as f64).ln();
        }
        T::of(acc)
    } else {
        ln_gamma_stirling(T::of_usize(n + 1))
    }
}

/// Table of `ln(k!)` for `k = 0..len`.
#[derive(Debug, Clone)]
pub struct LnFactorials<T> {
    table: Vec<T>,
}

impl<T: Real> LnFactorials<T> {
    pub fn new(len: usize) -> Self {
        let mut table = Vec::with_capacity(len.max(1));
        let mut acc = 0.0f64;
        table.push(T::zero());
        for k in 1..len.max(1) {
            acc += (k as f64).ln();
            table.push(T::of(acc));
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, k: usize) -> T {
        match self.table.get(k) {
            Some(&v) => v,
            None => ln_factorial(k),
        }
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> T {
        self.get(n) - self.get(k) - self.get(n - k)
    }

    /// `ln Γ(m + j) - ln Γ(m)` for integers `m ≥ 1`, `j ≥ 0`.
    #[inline]
    pub fn ln_rising(&self, m: usize, j: usize) -> T {
        self.get(m + j - 1) - self.get(m - 1)
    }
}

fn check_incomplete_args<T: Real>(n: u32, x: T) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("incomplete gamma shape must be a positive integer".into()));
    }
    if !(x >= T::zero()) {
        return Err(Error::Domain(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// `ln Σ_{k<n} x^k / k!`, evaluated in log domain.
fn ln_poisson_head<T: Real>(n: u32, x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let lx = x.ln();
    let mut terms = Vec::with_capacity(n as usize);
    let mut lf = T::zero();
    for k in 0..n as usize {
        if k > 0 {
            lf = lf + T::of_usize(k).ln();
        }
        terms.push(T::of_usize(k) * lx - lf);
    }
    let max = terms.iter().copied().fold(T::neg_infinity(), T::max);
    let s: T = terms.iter().map(|&t| (t - max).exp()).sum();
    max + s.ln()
}

/// `ln Γ(n, x)` for integer `n ≥ 1`.
pub fn ln_upper_incomplete_gamma_int<T: Real>(n: u32, x: T) -> Result<T> {
    check_incomplete_args(n, x)?;
    if x.is_infinite() {
        return Ok(T::neg_infinity());
    }
    Ok(ln_factorial::<T>(n as usize - 1) - x + ln_poisson_head(n, x))
}

/// Upper incomplete gamma `Γ(n, x) = (n-1)! e^{-x} Σ_{k<n} x^k/k!` for integer `n ≥ 1`.
pub fn upper_incomplete_gamma_int<T: Real>(n: u32, x: T) -> Result<T> {
    Ok(ln_upper_incomplete_gamma_int(n, x)?.exp())
}

/// Regularized upper incomplete gamma `Q(n, x) = Γ(n, x) / Γ(n)`: the
/// survival function of a unit-rate Gamma variable with integer shape `n`.
pub fn gamma_q_int<T: Real>(n: u32, x: T) -> Result<T> {
    check_incomplete_args(n, x)?;
    if x.is_infinite() {
        return Ok(T::zero());
    }
    if x < T::of_usize(n as usize + 1) {
        Ok(T::one() - gamma_p_series(n, x))
    } else {
        Ok((ln_poisson_head(n, x) - x).exp())
    }
}

/// Regularized lower incomplete gamma `P(n, x) = 1 - Q(n, x)`, accurate
/// also when `P` is tiny.
pub fn gamma_p_int<T: Real>(n: u32, x: T) -> Result<T> {
    check_incomplete_args(n, x)?;
    if x.is_infinite() {
        return Ok(T::one());
    }
    if x < T::of_usize(n as usize + 1) {
        Ok(gamma_p_series(n, x))
    } else {
        Ok(T::one() - (ln_poisson_head(n, x) - x).exp())
    }
}

/// `e^{-x} Σ_{k≥n} x^k/k!`
fn gamma_p_series<T: Real>(n: u32, x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let lead = T::of(n as f64) * x.ln() - x - ln_factorial::<T>(n as usize);
    let mut term = T::one();
    let mut sum = T::one();
    let mut j = 1usize;
    loop {
        term = term * x / T::of_usize(n as usize + j);
        sum = sum + term;
        if term < sum * T::epsilon() || j > 10_000 {
            break;
        }
        j += 1;
    }
    (lead + sum.ln()).exp()
}

/// Tricomi confluent hypergeometric function
/// `Ψ(a, b, z) = (1/Γ(a)) ∫₀^∞ e^{-zt} t^{a-1} (1+t)^{b-a-1} dt`
/// evaluated by adaptive quadrature of the integral representation.
pub fn tricomi_u<T: Real>(a: T, b: T, z: T) -> Result<T> {
    Ok(ln_tricomi_u(a, b, z)?.exp())
}

/// Natural logarithm of [`tricomi_u`].
pub fn ln_tricomi_u<T: Real>(a: T, b: T, z: T) -> Result<T> {
    if !(a > T::zero()) || !(z > T::zero()) || !a.is_finite() || !z.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "tricomi_u requires a > 0 and z > 0, got a = {a}, z = {z}"
        )));
    }
    // t = τ / z:  Ψ = z^{-a}/Γ(a) ∫ e^{-τ} τ^{a-1} (1 + τ/z)^{b-a-1} dτ
    let c = b - a - T::one();
    let ln_prefactor = -a * z.ln() - ln_gamma(a)?;
    let tol = T::of(1e-13).max(T::epsilon() * T::of(64.0));
    let spec = QuadratureSpec {
        relative_tolerance: tol,
        absolute_tolerance: T::zero(),
        max_subdivisions: 4000,
    };
    let integer_shape = a.fract() == T::zero();
    let tail = |tau: T| {
        if c == T::zero() {
            T::one()
        } else {
            (c * (tau / z).ln_1p()).exp()
        }
    };
    let value = if integer_shape {
        let am1 = a - T::one();
        let f = |tau: T| {
            let p = if am1 == T::zero() { T::one() } else { (am1 * tau.ln()).exp() };
            (-tau).exp() * p * tail(tau)
        };
        integrate_semi_infinite(f, &feature_breaks(z, |x| x), &spec)?.value
    } else {
        // τ = w² removes the algebraic endpoint behaviour for half-integer shapes
        let p = T::of(2.0) * a - T::one();
        let f = |w: T| {
            let tau = w * w;
            let pw = if w == T::zero() { T::zero() } else { (p * w.ln()).exp() };
            T::of(2.0) * pw * (-tau).exp() * tail(tau)
        };
        integrate_semi_infinite(f, &feature_breaks(z, |x| x.sqrt()), &spec)?.value
    };
    Ok(ln_prefactor + value.ln())
}

/// Break points for the scaled Tricomi integrand: the `(1 + τ/z)` factor
/// varies on the scale `τ ~ z`, the exponential on `τ ~ 1`.
fn feature_breaks<T: Real>(z: T, map: impl Fn(T) -> T) -> Vec<T> {
    let mut pts = vec![T::zero()];
    if z < T::one() {
        let mut s = z;
        while s < T::one() {
            pts.push(map(s));
            s = s * T::of(10.0);
        }
    }
    pts.push(map(T::one()));
    pts.push(map(T::of(8.0)));
    pts
}

/// One pole `(x + location)^{-multiplicity}` of a rational function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole<T> {
    pub location: T,
    pub multiplicity: usize,
}

/// Product `Π_i (x + α_i)^{-n_i}` of simple or repeated poles.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet<T> {
    poles: Vec<Pole<T>>,
}

/// Relative separation below which two poles count as coincident.
pub const POLE_SEPARATION: f64 = 1e-8;

impl<T: Real> PoleSet<T> {
    pub fn new(poles: Vec<Pole<T>>) -> Result<Self> {
        for p in &poles {
            if p.multiplicity == 0 {
                return Err(Error::Domain("pole multiplicity must be >= 1".into()));
            }
            if !(p.location > T::zero()) || !p.location.is_finite() {
                return Err(Error::Domain(format!(
                    "pole location must be positive, got {}",
                    p.location
                )));
            }
        }
        Ok(Self { poles })
    }

    pub fn poles(&self) -> &[Pole<T>] {
        &self.poles
    }

    /// Evaluates the product form at `x`.
    pub fn evaluate(&self, x: T) -> T {
        self.poles
            .iter()
            .map(|p| (x + p.location).powi(-(p.multiplicity as i32)))
            .fold(T::one(), |a, b| a * b)
    }

    /// Checks pairwise separation against [`POLE_SEPARATION`].
    pub fn check_separation(&self) -> Result<()> {
        let thr = T::of(POLE_SEPARATION);
        for (i, p) in self.poles.iter().enumerate() {
            for q in &self.poles[i + 1..] {
                let scale = p.location.abs().max(q.location.abs());
                if (p.location - q.location).abs() <= thr * scale {
                    return Err(Error::NearDegeneratePoles {
                        first: p.location.to_f64_lossy(),
                        second: q.location.to_f64_lossy(),
                        threshold: POLE_SEPARATION,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Coefficient `A` of `(x + α_pole)^{-order}` in a partial-fraction expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialFractionTerm<T> {
    pub pole: usize,
    pub order: usize,
    pub coefficient: T,
}

/// Partial-fraction expansion
/// `Π_i (x+α_i)^{-n_i} = Σ_i Σ_{j=1..n_i} A_{i,j} (x+α_i)^{-j}`.
///
/// `A_{i,j}` is the Taylor coefficient of order `n_i - j` of the deflated
/// product `ψ_i(x) = Π_{l≠i} (x+α_l)^{-n_l}` at `x = -α_i`; the series are
/// multiplied exactly instead of differentiating numerically.
pub fn partial_fractions<T: Real>(pole_set: &PoleSet<T>) -> Result<Vec<PartialFractionTerm<T>>> {
    pole_set.check_separation()?;
    let poles = pole_set.poles();
    let mut out = Vec::new();
    for (i, pi) in poles.iter().enumerate() {
        let order = pi.multiplicity;
        let mut series = vec![T::zero(); order];
        series[0] = T::one();
        for (l, pl) in poles.iter().enumerate() {
            if l == i {
                continue;
            }
            // (h + d)^{-n} = d^{-n} Σ_k (-1)^k C(n+k-1, k) (h/d)^k
            let d = pl.location - pi.location;
            let n = pl.multiplicity;
            let mut factor = vec![T::zero(); order];
            let mut coeff = d.powi(-(n as i32));
            for (k, slot) in factor.iter_mut().enumerate() {
                if k > 0 {
                    coeff = -coeff * T::of_usize(n + k - 1) / (T::of_usize(k) * d);
                }
                *slot = coeff;
            }
            series = truncated_product(&series, &factor);
        }
        for j in 1..=order {
            out.push(PartialFractionTerm {
                pole: i,
                order: j,
                coefficient: series[order - j],
            });
        }
    }
    Ok(out)
}

fn truncated_product<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len();
    let mut out = vec![T::zero(); n];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] = out[i + j] + ai * bj;
        }
    }
    out
}

/// Complementary error function.
pub fn erfc<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::of(2.0) - erfc(-x);
    }
    if x.is_infinite() {
        return T::zero();
    }
    let x2 = x * x;
    if x2 < T::of(1.5) {
        // erf(x) = 2x/√π e^{-x²} Σ (2x²)^n / (2n+1)!!
        let mut term = T::one();
        let mut sum = T::one();
        let mut n = 0usize;
        loop {
            n += 1;
            term = term * T::of(2.0) * x2 / T::of_usize(2 * n + 1);
            sum = sum + term;
            if term < sum * T::epsilon() {
                break;
            }
        }
        let erf = T::of(2.0) * x / T::PI().sqrt() * (-x2).exp() * sum;
        T::one() - erf
    } else {
        // continued fraction for Q(1/2, x²) (modified Lentz)
        let a = T::of(0.5);
        let tiny = T::min_positive_value() / T::epsilon();
        let mut b = x2 + T::one() - a;
        let mut c = tiny.recip();
        let mut d = b.recip();
        let mut h = d;
        for i in 1..10_000usize {
            let fi = T::of_usize(i);
            let an = -fi * (fi - a);
            b = b + T::of(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let del = d * c;
            h = h * del;
            if (del - T::one()).abs() < T::epsilon() {
                break;
            }
        }
        (-x2 + a * x2.ln() - T::of(0.5) * T::PI().ln()).exp() * h
    }
}

/// `(1/2) erfc(√(b γ))`: the MPSK conditional SEP kernel divided by `a`.
pub fn erfc_scaled_q<T: Real>(b: T, gamma: T) -> Result<T> {
    if !(b > T::zero()) {
        return Err(Error::Domain(format!("erfc kernel requires b > 0, got {b}")));
    }
    if !(gamma >= T::zero()) {
        return Err(Error::Domain(format!("erfc kernel requires gamma >= 0, got {gamma}")));
    }
    Ok(T::of(0.5) * erfc((b * gamma).sqrt()))
}

/// `∫₀^∞ t^{s-1} e^{-q t} (t + α)^{-j} dt = Γ(s) α^{s-j} Ψ(s, s+1-j, qα)`, in log form.
pub fn ln_laplace_pole_integral<T: Real>(s: T, q: T, alpha: T, j: usize) -> Result<T> {
    let jt = T::of_usize(j);
    Ok(ln_gamma(s)? + (s - jt) * alpha.ln() + ln_tricomi_u(s, s + T::one() - jt, q * alpha)?)
}

/// Direct quadrature of `∫₀^∞ t^{s-1} e^{-qt} Π(t+α_i)^{-n_i} dt`.
pub fn laplace_rational_quadrature<T: Real>(
    s: T,
    q: T,
    poles: &PoleSet<T>,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let f = |t: T| {
        if t == T::zero() {
            return T::zero();
        }
        ((s - T::one()) * t.ln() - q * t).exp() * poles.evaluate(t)
    };
    let mut breaks = vec![T::zero()];
    let mut scales: Vec<T> = poles.poles().iter().map(|p| p.location).collect();
    scales.push(q.recip());
    scales.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    breaks.extend(scales);
    integrate_semi_infinite(f, &breaks, spec).map(|r| r.value)
}
