//! Brute-force reference values by adaptive quadrature of the defining
//! expectations over the Gamma channel laws.
//!
//! Nothing here reuses the finite-sum closed forms: conditional
//! probabilities come from the regularized incomplete gamma functions and
//! the remaining expectations are integrated numerically. Outage
//! probabilities are integrated in the form `P_X + Q_X P_W` so that small
//! probabilities keep their relative accuracy.

use crate::analytic::{PrimaryOutageInputs, SecondaryCdfInputs};
use crate::error::{Error, Result};
use crate::model::{FadingLink, ModulationSpec};
use crate::num::Real;
use crate::quadrature::{integrate_semi_infinite, QuadratureSpec};
use crate::specfun::{gamma_p_int, gamma_q_int, ln_gamma};

pub use crate::quadrature::QuadratureSpec as OracleSpec;

/// Largest relay count accepted by [`selection_oracle`].
pub const MAX_ORACLE_RELAYS: usize = 4;

/// Gamma law of `scale · |h|²`.
#[derive(Debug, Clone, Copy)]
struct Law<T> {
    m: u32,
    rate: T,
    ln_norm: T,
}

impl<T: Real> Law<T> {
    fn new(link: &FadingLink<T>, scale: T) -> Result<Self> {
        let rate = link.rate() / scale;
        let ln_norm = T::of(link.m as f64) * rate.ln() - ln_gamma(T::of(link.m as f64))?;
        Ok(Self { m: link.m, rate, ln_norm })
    }

    fn pdf(&self, t: T) -> T {
        if self.m == 1 {
            return (self.ln_norm - self.rate * t).exp();
        }
        if t <= T::zero() {
            return T::zero();
        }
        (self.ln_norm + T::of((self.m - 1) as f64) * t.ln() - self.rate * t).exp()
    }

    fn sf(&self, t: T) -> Result<T> {
        gamma_q_int(self.m, self.rate * t.max(T::zero()))
    }

    fn cdf(&self, t: T) -> Result<T> {
        gamma_p_int(self.m, self.rate * t.max(T::zero()))
    }

    fn mean(&self) -> T {
        T::of(self.m as f64) / self.rate
    }
}

/// `∫₀^∞ pdf(t) f(t) dt` with break points at the law's scale and `extra`.
fn expectation<T: Real>(
    law: &Law<T>,
    extra: &[T],
    spec: &QuadratureSpec<T>,
    mut f: impl FnMut(T) -> Result<T>,
) -> Result<T> {
    let mut breaks = vec![T::zero(), law.mean()];
    breaks.extend(extra.iter().copied().filter(|b| *b > T::zero() && b.is_finite()));
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite break"));
    let mut failure = None;
    let value = integrate_semi_infinite(
        |t| {
            let p = law.pdf(t);
            if p == T::zero() {
                return T::zero();
            }
            match f(t) {
                Ok(v) => p * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        &breaks,
        spec,
    )?
    .value;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

fn inner<T: Real>(spec: &QuadratureSpec<T>) -> QuadratureSpec<T> {
    spec.tightened(T::of(0.1))
}

/// Primary outage `E_{F,G}[P_E(γ_th (γ̄_S1 F + γ̄_S2 G + 1) / γ̄_P)]`.
pub fn primary_outage_oracle<T: Real>(inputs: &PrimaryOutageInputs<T>, spec: &QuadratureSpec<T>) -> Result<T> {
    inputs.validate()?;
    spec.validate()?;
    let one = T::one();
    let e = Law::new(&inputs.e, one)?;
    let f = Law::new(&inputs.f, one)?;
    let g = Law::new(&inputs.g, one)?;
    let k = inputs.threshold / inputs.primary;
    let over_g = |fv: T| {
        if inputs.source2 == T::zero() {
            return e.cdf(k * (inputs.source1 * fv + one));
        }
        expectation(&g, &[], &inner(spec), |gv| {
            e.cdf(k * (inputs.source1 * fv + inputs.source2 * gv + one))
        })
    };
    if inputs.source1 == T::zero() {
        return over_g(T::zero());
    }
    expectation(&f, &[], spec, over_g)
}

/// Relay-phase primary outage `E_L[P_E(γ_th (γ̄_R L + 1) / γ̄_P)]`.
pub fn relay_phase_oracle<T: Real>(inputs: &PrimaryOutageInputs<T>, spec: &QuadratureSpec<T>) -> Result<T> {
    inputs.validate()?;
    spec.validate()?;
    let one = T::one();
    let e = Law::new(&inputs.e, one)?;
    let l = Law::new(&inputs.l, one)?;
    let k = inputs.threshold / inputs.primary;
    if inputs.relay == T::zero() {
        return e.cdf(k);
    }
    expectation(&l, &[], spec, |lv| e.cdf(k * (inputs.relay * lv + one)))
}

/// Laws and per-threshold constants of one direction.
struct Secondary<T> {
    x: Law<T>,
    w: Law<T>,
    y: Law<T>,
    z: Law<T>,
    v: Law<T>,
    /// `Θ / γ̄_R`.
    t: T,
    r: T,
    c0: T,
}

impl<T: Real> Secondary<T> {
    fn new(i: &SecondaryCdfInputs<T>) -> Result<Self> {
        let one = T::one();
        let r = i.relay / i.source;
        Ok(Self {
            x: Law::new(&i.x, one)?,
            w: Law::new(&i.w, one)?,
            y: Law::new(&i.y, i.relay * i.primary / i.source)?,
            z: Law::new(&i.z, i.primary)?,
            v: Law::new(&i.v, i.primary)?,
            t: i.threshold / i.relay,
            r,
            c0: r + one,
        })
    }
}

/// `Pr{X < tx or W < tw} = P_X(tx) + Q_X(tx) P_W(tw)`.
fn either_below<T: Real>(x: &Law<T>, tx: T, w: &Law<T>, tw: T) -> Result<T> {
    Ok(x.cdf(tx)? + x.sf(tx)? * w.cdf(tw)?)
}

fn trivial<T: Real>(i: &SecondaryCdfInputs<T>) -> Option<T> {
    if i.threshold == T::zero() {
        Some(T::zero())
    } else if i.threshold.is_infinite() || i.relay == T::zero() {
        Some(T::one())
    } else {
        None
    }
}

/// cdf of `γ̄_R min(X/(Z+Y+c₀), W/(Z+1))` at `theta`, integrating over the
/// shared interference `Z` and the relay interference `Y`.
pub fn cdf_oracle_scenario_a<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    theta: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let i = inputs.with_threshold(theta);
    i.validate()?;
    spec.validate()?;
    if let Some(f) = trivial(&i) {
        return Ok(f);
    }
    let s = Secondary::new(&i)?;
    expectation(&s.z, &[], spec, |z| {
        expectation(&s.y, &[], &inner(spec), |y| {
            either_below(&s.x, s.t * (z + y + s.c0), &s.w, s.t * (z + T::one()))
        })
    })
}

/// `1 - χ₁ χ₂` with `χ₁ = E_{Z,Y}[Q_X]` and `χ₂ = E_Z[Q_W]` integrated
/// separately.
pub fn cdf_oracle_scenario_a_decoupled<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    theta: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let i = inputs.with_threshold(theta);
    i.validate()?;
    spec.validate()?;
    if let Some(f) = trivial(&i) {
        return Ok(f);
    }
    let s = Secondary::new(&i)?;
    let miss1 = expectation(&s.z, &[], spec, |z| {
        expectation(&s.y, &[], &inner(spec), |y| s.x.cdf(s.t * (z + y + s.c0)))
    })?;
    let miss2 = expectation(&s.z, &[], spec, |z| s.w.cdf(s.t * (z + T::one())))?;
    Ok(miss1 + (T::one() - miss1) * miss2)
}

/// cdf of `min(γ^up_S1, γ^up_S2)` at `theta` by three nested quadratures
/// over `Y`, `Z` and `V`.
pub fn cdf_oracle_scenario_a_e2e<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    theta: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let i = inputs.with_threshold(theta);
    i.validate()?;
    spec.validate()?;
    if let Some(f) = trivial(&i) {
        return Ok(f);
    }
    let s = Secondary::new(&i)?;
    let one = T::one();
    expectation(&s.y, &[], spec, |y| {
        let mid = inner(spec);
        expectation(&s.z, &[y + s.r], &mid, |z| {
            // kinks where V + 1 = Z+Y+c₀ and V+Y+c₀ = Z+1
            let kinks = [z + y + s.r, z - y - s.r];
            expectation(&s.v, &kinks, &inner(&mid), |v| {
                let tx = s.t * (z + y + s.c0).max(v + one);
                let tw = s.t * (v + y + s.c0).max(z + one);
                either_below(&s.x, tx, &s.w, tw)
            })
        })
    })
}

/// `1 - U_X U_W` with `U_X = E[Q_X(Θ/γ̄_R · max(Z+Y+c₀, V+1))]` and its
/// mirror `U_W` integrated separately.
pub fn cdf_oracle_scenario_a_e2e_decoupled<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    theta: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    let i = inputs.with_threshold(theta);
    i.validate()?;
    spec.validate()?;
    if let Some(f) = trivial(&i) {
        return Ok(f);
    }
    let miss = |i: &SecondaryCdfInputs<T>| -> Result<T> {
        let s = Secondary::new(i)?;
        expectation(&s.y, &[], spec, |y| {
            let mid = inner(spec);
            expectation(&s.z, &[], &mid, |z| {
                expectation(&s.v, &[z + y + s.r], &inner(&mid), |v| {
                    s.x.cdf(s.t * (z + y + s.c0).max(v + T::one()))
                })
            })
        })
    };
    let mx = miss(&i)?;
    let mw = miss(&i.swapped())?;
    Ok(mx + (T::one() - mx) * mw)
}

/// cdf of the best relay's bounded SINR, `Π_k Pr{V_k < Θ}` with each
/// factor `E_{Y_k}[Pr{min(X_k, W_k) < Θ(Y_k+c₀)/γ̄_R}]`.
pub fn selection_oracle<T: Real>(
    per_relay: &[SecondaryCdfInputs<T>],
    theta: T,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    if per_relay.is_empty() || per_relay.len() > MAX_ORACLE_RELAYS {
        return Err(Error::Domain(format!(
            "selection oracle handles 1..={MAX_ORACLE_RELAYS} relays, got {}",
            per_relay.len()
        )));
    }
    spec.validate()?;
    let mut product = T::one();
    for inputs in per_relay {
        let i = inputs.with_threshold(theta);
        i.validate()?;
        let f = match trivial(&i) {
            Some(f) => f,
            None => {
                let s = Secondary::new(&i)?;
                expectation(&s.y, &[], spec, |y| {
                    let t = s.t * (y + s.c0);
                    either_below(&s.x, t, &s.w, t)
                })?
            }
        };
        product = product * f;
    }
    Ok(product)
}

/// `(a√b / 2√π) ∫₀^∞ e^{-bγ} γ^{-1/2} F(γ) dγ` for an arbitrary cdf `F`,
/// integrated in `u = √γ`.
pub fn asep_kernel_integral<T: Real>(
    modulation: &ModulationSpec<T>,
    scale_hint: T,
    spec: &QuadratureSpec<T>,
    mut cdf: impl FnMut(T) -> Result<T>,
) -> Result<T> {
    spec.validate()?;
    let b = modulation.b;
    let mut breaks = vec![T::zero(), b.sqrt().recip()];
    if scale_hint > T::zero() && scale_hint.is_finite() {
        breaks.push(scale_hint.sqrt());
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite break"));
    let mut failure = None;
    let integral = integrate_semi_infinite(
        |u| {
            let g = u * u;
            let w = (-b * g).exp();
            if w == T::zero() {
                return T::zero();
            }
            match cdf(g) {
                Ok(f) => w * f,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::zero()
                }
            }
        },
        &breaks,
        spec,
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(modulation.a * b.sqrt() / T::PI().sqrt() * integral)
}

/// ASEP of the S1 direction with the quadrature cdf [`cdf_oracle_scenario_a`].
pub fn asep_oracle<T: Real>(
    inputs: &SecondaryCdfInputs<T>,
    modulation: &ModulationSpec<T>,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    inputs.validate()?;
    let hint = inputs.relay / (inputs.x.rate() * (inputs.relay / inputs.source + T::one()));
    let cdf_spec = inner(spec);
    asep_kernel_integral(modulation, hint, spec, |g| cdf_oracle_scenario_a(inputs, g, &cdf_spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec<f64> {
        QuadratureSpec::with_relative_tolerance(1e-10)
    }

    #[test]
    fn kernel_integral_limits() {
        let m = ModulationSpec::mpsk(4).unwrap();
        let one = asep_kernel_integral(&m, 1.0, &spec(), |_| Ok(1.0)).unwrap();
        assert!((one - 1.0).abs() < 1e-10);
        assert_eq!(asep_kernel_integral(&m, 1.0, &spec(), |_| Ok(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn primary_oracle_exponential_case() {
        let l = FadingLink::new(1, 1.0).unwrap();
        let i = PrimaryOutageInputs {
            e: l,
            f: l,
            g: l,
            l,
            primary: 10.0,
            source1: 2.0,
            source2: 2.0,
            relay: 3.0,
            threshold: 1.0,
        };
        let c: f64 = 0.1;
        let want = 1.0 - (-c).exp() / (1.0 + 2.0 * c).powi(2);
        let got = primary_outage_oracle(&i, &spec()).unwrap();
        assert!(((got - want) / want).abs() < 1e-9);
        let want_r = 1.0 - (-c).exp() / (1.0 + 3.0 * c);
        let got_r = relay_phase_oracle(&i, &spec()).unwrap();
        assert!(((got_r - want_r) / want_r).abs() < 1e-9);
    }
}
