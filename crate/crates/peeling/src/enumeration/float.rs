//! Double-precision log-weights through log-Gamma, used above the exact cutoff.

use statrs::function::gamma::ln_gamma;

use super::ModelId;

const LN_PI: f64 = 1.144_729_885_849_400_2;

fn ln_fact(n: f64) -> f64 {
    ln_gamma(n + 1.0)
}

/// `ln(m!!)` for integer `m ≥ −1`.
fn ln_double_factorial(m: i64) -> f64 {
    if m <= 0 {
        return 0.0;
    }
    if m % 2 == 0 {
        let k = (m / 2) as f64;
        k * std::f64::consts::LN_2 + ln_fact(k)
    } else {
        // (2k−1)!! = 2^k Γ(k + 1/2)/√π
        let k = ((m + 1) / 2) as f64;
        k * std::f64::consts::LN_2 + ln_gamma(k + 0.5) - 0.5 * LN_PI
    }
}

/// `ln Z(p)`.
pub fn ln_z(model: ModelId, p: u32) -> f64 {
    let pf = p as f64;
    match model {
        ModelId::TypeII => {
            ln_fact(2.0 * pf - 4.0) - ln_fact(pf - 2.0) - ln_fact(pf)
                + (pf - 1.0) * (9.0f64 / 4.0).ln()
        }
        ModelId::TypeI => {
            if p == 1 {
                return ((2.0 - 3f64.sqrt()) / 4.0).ln();
            }
            pf * 6f64.ln() + ln_double_factorial(2 * p as i64 - 5)
                - (8.0 * 3f64.sqrt()).ln()
                - ln_fact(pf)
        }
        ModelId::Quad => {
            if p == 1 {
                return (4.0f64 / 3.0).ln();
            }
            pf * 8f64.ln() + ln_fact(3.0 * pf - 4.0) - ln_fact(pf - 2.0) - ln_fact(2.0 * pf)
        }
    }
}

/// `ln C(p)` with the same normalization as the exact scaled table.
pub fn ln_c(model: ModelId, p: u32) -> f64 {
    let pf = p as f64;
    match model {
        ModelId::TypeII => {
            ln_fact(2.0 * pf - 3.0) - 2.0 * ln_fact(pf - 2.0) + pf * (9.0f64 / 4.0).ln()
        }
        ModelId::TypeI => (pf - 2.0) * 3f64.ln() + pf.ln() + ln_fact(2.0 * pf) - 2.0 * ln_fact(pf),
        ModelId::Quad => {
            (pf - 1.0) * 8f64.ln() + ln_fact(3.0 * pf) - ln_fact(pf) - ln_fact(2.0 * pf - 1.0)
        }
    }
}

/// `ln #maps(n, p)`.
pub fn ln_count(model: ModelId, n: u64, p: u32) -> f64 {
    let (nf, pf) = (n as f64, p as f64);
    match model {
        ModelId::TypeII => {
            (nf + 1.0) * std::f64::consts::LN_2
                + ln_fact(2.0 * pf - 3.0)
                + ln_fact(2.0 * pf + 3.0 * nf - 4.0)
                - 2.0 * ln_fact(pf - 2.0)
                - ln_fact(nf)
                - ln_fact(2.0 * pf + 2.0 * nf - 2.0)
        }
        ModelId::TypeI => {
            let (ni, pi) = (n as i64, p as i64);
            (nf - 1.0) * 4f64.ln()
                + pf.ln()
                + ln_fact(2.0 * pf)
                + ln_double_factorial(2 * pi + 3 * ni - 5)
                - 2.0 * ln_fact(pf)
                - ln_fact(nf)
                - ln_double_factorial(2 * pi + ni - 1)
        }
        ModelId::Quad => {
            (nf - 1.0) * 3f64.ln() + ln_fact(3.0 * pf) + ln_fact(3.0 * pf - 3.0 + 2.0 * nf)
                - ln_fact(nf)
                - ln_fact(pf)
                - ln_fact(2.0 * pf - 1.0)
                - ln_fact(nf + 3.0 * pf - 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{count_maps, WeightTable};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_paths_match_exact_values() {
        for model in ModelId::ALL {
            let t = WeightTable::get(model);
            for p in model.min_boundary()..60 {
                let z = t.z(p).unwrap().to_f64();
                assert!(rel(ln_z(model, p).exp(), z) < 1e-12, "{model} Z({p})");
            }
            for p in model.min_boundary() + 1..60 {
                let exact = t.c_ratio(p, p - 1).unwrap().to_f64();
                let float = (ln_c(model, p) - ln_c(model, p - 1)).exp();
                assert!(rel(float, exact) < 1e-12, "{model} C ratio at {p}");
            }
        }
    }

    #[test]
    fn log_counts_match() {
        for model in ModelId::ALL {
            for p in 2..12u32 {
                for n in 0..12u32 {
                    let c = count_maps(model, n, p).unwrap();
                    let x = crate::enumeration::ratio_to_f64(&BigRational::from_integer(
                        BigInt::from(c),
                    ));
                    assert!(
                        rel(ln_count(model, n as u64, p).exp(), x) < 1e-11,
                        "{model} ({n},{p})"
                    );
                }
            }
        }
    }
}
