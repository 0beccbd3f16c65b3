//! Best-relay selection without PT interference at the sources.
//!
//! Relay `k` offers `V_k = γ̄_R min(X_k, W_k) / (Y_k + c₀)`; the selected
//! relay maximizes `V_k`, so the end-to-end cdf is the product of the
//! per-relay cdfs, expanded here as the alternating sum over relay subsets.

use super::{clamp_probability, complement, factorial_table, LogSum, SecondaryCdfInputs};
use crate::error::{Error, Result};
use crate::num::{pow_ln, CompensatedSum, Real};

/// Largest relay count for the subset expansion.
pub const MAX_RELAYS: usize = 16;

/// `Pr{V_k ≥ Θ} = E_Y[Q_X(a(Y+c₀)) Q_W(b(Y+c₀))]` for one relay.
pub fn relay_survival_scenario_b<T: Real>(inputs: &SecondaryCdfInputs<T>) -> Result<T> {
    inputs.validate()?;
    if let Some(f) = inputs.trivial_cdf() {
        return Ok(T::one() - f);
    }
    let lf = factorial_table(&[&inputs.x, &inputs.w, &inputs.y]);
    let a = inputs.x.rate() * inputs.threshold / inputs.relay;
    let b = inputs.w.rate() * inputs.threshold / inputs.relay;
    let r = inputs.power_ratio();
    let law_y = inputs.law_y();
    let mut sum = LogSum::new();
    for n in 0..inputs.x.m as usize {
        for n1 in 0..inputs.w.m as usize {
            let total = n + n1;
            let head = -(a + b) * (r + T::one()) + pow_ln(a, n) + pow_ln(b, n1) - lf.get(n) - lf.get(n1);
            // (Y + r + 1)^{n+n1}
            for i1 in 0..=total {
                for i2 in 0..=(total - i1) {
                    sum.push(
                        head + lf.ln_binomial(total, i1)
                            + lf.ln_binomial(total - i1, i2)
                            + pow_ln(r, i2)
                            + law_y.ln_moment(i1, a + b, &lf),
                    );
                }
            }
        }
    }
    clamp_probability(sum.value(), "scenario B relay survival")
}

/// cdf of the selected relay's bounded SINR,
/// `Σ_{T ⊆ relays} (-1)^{|T|} Π_{k∈T} Pr{V_k ≥ Θ}`.
pub fn cdf_scenario_b<T: Real>(per_relay: &[SecondaryCdfInputs<T>]) -> Result<T> {
    let k = per_relay.len();
    if k == 0 || k > MAX_RELAYS {
        return Err(Error::InvalidModel(format!(
            "relay count must lie in 1..={MAX_RELAYS}, got {k}"
        )));
    }
    let survivals = per_relay
        .iter()
        .map(relay_survival_scenario_b)
        .collect::<Result<Vec<_>>>()?;
    if k == 1 {
        return complement(survivals[0], "scenario B cdf");
    }
    let mut acc = CompensatedSum::new();
    for mask in 0u32..(1u32 << k) {
        let mut term = T::one();
        for (j, &s) in survivals.iter().enumerate() {
            if mask & (1 << j) != 0 {
                term = term * s;
            }
        }
        if mask.count_ones() % 2 == 1 {
            term = -term;
        }
        acc.add(term);
    }
    clamp_probability(acc.value(), "scenario B cdf")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FadingLink;

    fn relay(mx: u32, gx: f64) -> SecondaryCdfInputs<f64> {
        let l = FadingLink::new(1, 1.0).unwrap();
        SecondaryCdfInputs {
            x: FadingLink::new(mx, gx).unwrap(),
            w: FadingLink::new(2, 0.8).unwrap(),
            y: l,
            z: l,
            v: l,
            primary: 10.0,
            source: 10.0,
            relay: 10.0,
            threshold: 2.0,
        }
    }

    #[test]
    fn single_relay_collapses_to_complement() {
        let i = relay(2, 1.3);
        let s = relay_survival_scenario_b(&i).unwrap();
        assert!((cdf_scenario_b(&[i]).unwrap() - (1.0 - s)).abs() < 1e-15);
    }

    #[test]
    fn subset_expansion_equals_product() {
        let rs = [relay(1, 1.0), relay(2, 0.5), relay(3, 2.0)];
        let prod: f64 = rs.iter().map(|i| 1.0 - relay_survival_scenario_b(i).unwrap()).product();
        assert!((cdf_scenario_b(&rs).unwrap() - prod).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_survival_closed_form() {
        // m = 1: e^{-(a+b)c₀} λ/(λ+a+b)
        let mut i = relay(1, 1.0);
        i.w = i.x;
        let (a, c0, l) = (0.2f64, 2.0, 0.1);
        let want = (-(2.0 * a) * c0).exp() * l / (l + 2.0 * a);
        assert!((relay_survival_scenario_b(&i).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_relay_counts() {
        assert!(cdf_scenario_b::<f64>(&[]).is_err());
        assert!(cdf_scenario_b(&vec![relay(1, 1.0); MAX_RELAYS + 1]).is_err());
    }
}
