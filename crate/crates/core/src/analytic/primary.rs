//! Primary-network outage under secondary interference and its inversion
//! for the admissible secondary transmit powers.

use super::{complement, factorial_table, GammaLaw, LogSum, PrimaryOutageInputs};
use crate::error::{Error, Result};
use crate::num::{pow_ln, Real};

/// Outage of the primary link while both sources transmit:
/// `Pr{γ̄_P E / (γ̄_S1 F + γ̄_S2 G + 1) < γ_th}`.
pub fn primary_outage<T: Real>(inputs: &PrimaryOutageInputs<T>) -> Result<T> {
    inputs.validate()?;
    if inputs.threshold == T::zero() {
        return Ok(T::zero());
    }
    let lf = factorial_table(&[&inputs.e, &inputs.f, &inputs.g]);
    let c = inputs.e.rate() * inputs.threshold / inputs.primary;
    let law_f = GammaLaw::scaled(&inputs.f, T::one());
    let law_g = GammaLaw::scaled(&inputs.g, T::one());
    let (s1, s2) = (inputs.source1, inputs.source2);
    let mut sum = LogSum::new();
    for l in 0..inputs.e.m as usize {
        let head = -c + pow_ln(c, l) - lf.get(l);
        for t1 in 0..=l {
            if s1 == T::zero() && t1 > 0 {
                break;
            }
            let m_f = law_f.ln_moment(t1, c * s1, &lf);
            for t2 in 0..=(l - t1) {
                if s2 == T::zero() && t2 > 0 {
                    break;
                }
                sum.push(
                    head + lf.ln_binomial(l, t1)
                        + lf.ln_binomial(l - t1, t2)
                        + pow_ln(s1, t1)
                        + pow_ln(s2, t2)
                        + m_f
                        + law_g.ln_moment(t2, c * s2, &lf),
                );
            }
        }
    }
    complement(sum.value(), "primary outage")
}

/// Outage of the primary link during the relay broadcast phase:
/// `Pr{γ̄_P E / (γ̄_R L + 1) < γ_th}`.
pub fn relay_phase_outage<T: Real>(inputs: &PrimaryOutageInputs<T>) -> Result<T> {
    inputs.validate()?;
    if inputs.threshold == T::zero() {
        return Ok(T::zero());
    }
    let lf = factorial_table(&[&inputs.e, &inputs.l]);
    let c = inputs.e.rate() * inputs.threshold / inputs.primary;
    let law_l = GammaLaw::scaled(&inputs.l, T::one());
    let r = inputs.relay;
    let mut sum = LogSum::new();
    for l in 0..inputs.e.m as usize {
        let head = -c + pow_ln(c, l) - lf.get(l);
        for i in 0..=l {
            if r == T::zero() && i > 0 {
                break;
            }
            sum.push(head + lf.ln_binomial(l, i) + pow_ln(r, i) + law_l.ln_moment(i, c * r, &lf));
        }
    }
    complement(sum.value(), "relay-phase outage")
}

/// Largest common source SNR in `(0, cap]` keeping the primary outage at or
/// below `threshold`.
pub fn solve_secondary_source_power<T: Real>(
    inputs: &PrimaryOutageInputs<T>,
    threshold: T,
    cap: T,
) -> Result<T> {
    let constraint = |p: T| {
        let mut i = *inputs;
        i.source1 = p;
        i.source2 = p;
        primary_outage(&i)
    };
    solve_power(constraint, threshold, cap)
}

/// Largest relay SNR in `(0, cap]` keeping the relay-phase primary outage at
/// or below `threshold`.
pub fn solve_relay_power<T: Real>(
    inputs: &PrimaryOutageInputs<T>,
    threshold: T,
    cap: T,
) -> Result<T> {
    let constraint = |p: T| {
        let mut i = *inputs;
        i.relay = p;
        relay_phase_outage(&i)
    };
    solve_power(constraint, threshold, cap)
}

const BISECTION_ITERATIONS: usize = 200;
const BRACKET_WIDTH: f64 = 1e-12;

fn solve_power<T: Real>(f: impl Fn(T) -> Result<T>, threshold: T, cap: T) -> Result<T> {
    if !(threshold >= T::zero() && threshold <= T::one()) {
        return Err(Error::Domain(format!("outage threshold must lie in [0, 1], got {threshold}")));
    }
    if !(cap > T::zero()) || !cap.is_finite() {
        return Err(Error::Domain(format!("power cap must be positive, got {cap}")));
    }
    let at_zero = f(T::zero())?;
    if at_zero > threshold {
        return Err(Error::Infeasible {
            outage: at_zero.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    let at_cap = f(cap)?;
    if at_cap <= threshold {
        return Ok(cap);
    }
    let at_mid = f(cap * T::of(0.5))?;
    let slack = T::of(1e-12);
    if at_zero > at_mid + slack || at_mid > at_cap + slack {
        return Err(Error::NumericalInstability {
            context: "power constraint is not monotone",
            value: at_mid.to_f64_lossy(),
        });
    }
    let (mut lo, mut hi) = (T::zero(), cap);
    for _ in 0..BISECTION_ITERATIONS {
        if hi - lo <= T::of(BRACKET_WIDTH) * hi {
            break;
        }
        let mid = T::of(0.5) * (lo + hi);
        if f(mid)? <= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == T::zero() {
        return Err(Error::Infeasible {
            outage: at_zero.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FadingLink;
    use crate::specfun::gamma_q_int;

    fn unit_inputs(m: u32) -> PrimaryOutageInputs<f64> {
        let l = FadingLink::new(m, 1.0).unwrap();
        PrimaryOutageInputs {
            e: l,
            f: l,
            g: l,
            l,
            primary: 10.0,
            source1: 2.0,
            source2: 2.0,
            relay: 3.0,
            threshold: 1.0,
        }
    }

    #[test]
    fn vanishing_threshold_gives_zero() {
        let mut i = unit_inputs(2);
        i.threshold = 0.0;
        assert_eq!(primary_outage(&i).unwrap(), 0.0);
        assert_eq!(relay_phase_outage(&i).unwrap(), 0.0);
    }

    #[test]
    fn exponential_case_closed_form() {
        // m = 1: Pr{E < c(1 + s F + s G)} = 1 - e^{-c} / ((1 + c s)^2)
        let i = unit_inputs(1);
        let c: f64 = 0.1;
        let want = 1.0 - (-c).exp() / (1.0 + c * 2.0).powi(2);
        assert!((primary_outage(&i).unwrap() - want).abs() < 1e-15);
        let want_r = 1.0 - (-c).exp() / (1.0 + c * 3.0);
        assert!((relay_phase_outage(&i).unwrap() - want_r).abs() < 1e-15);
    }

    #[test]
    fn silent_relay_reduces_to_interference_free_outage() {
        let mut i = unit_inputs(3);
        i.relay = 0.0;
        let want = 1.0 - gamma_q_int(3, 3.0 * 1.0 / 10.0).unwrap();
        assert!((relay_phase_outage(&i).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn solver_returns_cap_when_unconstrained() {
        let i = unit_inputs(1);
        assert_eq!(solve_secondary_source_power(&i, 1.0, 100.0).unwrap(), 100.0);
        assert_eq!(solve_relay_power(&i, 1.0, 100.0).unwrap(), 100.0);
    }

    #[test]
    fn solver_fixed_point() {
        let i = unit_inputs(1);
        let p = solve_secondary_source_power(&i, 0.1, 100.0).unwrap();
        let mut j = i;
        j.source1 = p;
        j.source2 = p;
        assert!((primary_outage(&j).unwrap() - 0.1).abs() < 1e-9);
    }

    #[test]
    fn solver_reports_infeasible() {
        let i = unit_inputs(1);
        assert!(matches!(
            solve_secondary_source_power(&i, 0.0, 10.0),
            Err(Error::Infeasible { .. })
        ));
    }
}
