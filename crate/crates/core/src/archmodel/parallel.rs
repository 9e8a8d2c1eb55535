//! Input broadcasting (IB) versus channel parallelization (CP).
//!
//! `IB` PFCUs share one set of input DACs, `CP` PFCUs share one set of
//! ADCs, and `IB * CP = n_pfcu`. With equal per-converter ADC and DAC
//! power, the converter power is proportional to `IB / n_ta + CP`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::ArchError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParallelizationScheme {
    pub ib: usize,
    pub cp: usize,
    pub objective: f64,
}

impl ParallelizationScheme {
    pub fn new(ib: usize, n_pfcu: usize, n_ta: usize) -> Result<Self, ArchError> {
        let objective = parallelization_objective(ib, n_pfcu, n_ta)?;
        Ok(Self { ib, cp: n_pfcu / ib, objective })
    }

    /// Every PFCU shares the same inputs.
    pub fn broadcast(n_pfcu: usize, n_ta: usize) -> Self {
        Self::new(n_pfcu, n_pfcu, n_ta).expect("n_pfcu divides itself")
    }

    pub fn check(&self, n_pfcu: usize) -> Result<(), ArchError> {
        if self.ib == 0 || self.ib * self.cp != n_pfcu {
            return Err(ArchError::NotADivisor { ib: self.ib, n_pfcu });
        }
        Ok(())
    }
}

fn check_divisor(ib: usize, n_pfcu: usize) -> Result<(), ArchError> {
    if ib == 0 || n_pfcu == 0 || !n_pfcu.is_multiple_of(ib) {
        return Err(ArchError::NotADivisor { ib, n_pfcu });
    }
    Ok(())
}

/// `IB / n_ta + n_pfcu / IB`.
pub fn parallelization_objective(ib: usize, n_pfcu: usize, n_ta: usize) -> Result<f64, ArchError> {
    check_divisor(ib, n_pfcu)?;
    Ok(ib as f64 / n_ta as f64 + (n_pfcu / ib) as f64)
}

/// The same objective in exact rational arithmetic.
pub fn objective_exact(ib: usize, n_pfcu: usize, n_ta: usize) -> Result<Ratio<i64>, ArchError> {
    check_divisor(ib, n_pfcu)?;
    if n_ta == 0 {
        return Err(ArchError::InvalidCount(n_ta));
    }
    Ok(Ratio::new(ib as i64, n_ta as i64) + Ratio::from_integer((n_pfcu / ib) as i64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub ib: usize,
    pub cp: usize,
    pub objective: f64,
    /// Exact objective as `numerator/denominator`.
    pub objective_exact: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub n_pfcu: usize,
    pub n_ta: usize,
    pub best: ParallelizationScheme,
    /// Every IB that reaches the minimum, ascending. The largest is chosen.
    pub tied_ib: Vec<usize>,
    pub candidates: Vec<Candidate>,
    /// Unconstrained minimizer `sqrt(n_pfcu * n_ta)` of the continuous objective.
    pub continuous_optimum_ib: f64,
    pub continuous_optimum_objective: f64,
}

fn power_of_two_divisors(n_pfcu: usize) -> Result<Vec<usize>, ArchError> {
    if n_pfcu == 0 || !n_pfcu.is_power_of_two() {
        return Err(ArchError::InvalidCount(n_pfcu));
    }
    Ok((0..=n_pfcu.trailing_zeros()).map(|k| 1usize << k).collect())
}

/// Sweeps every power-of-two IB and returns the minimum, breaking ties
/// toward the largest IB.
pub fn optimize_parallelization(n_pfcu: usize, n_ta: usize) -> Result<OptimizerReport, ArchError> {
    if n_ta == 0 {
        return Err(ArchError::InvalidCount(n_ta));
    }
    let mut candidates = Vec::new();
    let mut best: Option<(Ratio<i64>, usize)> = None;
    let mut exact = Vec::new();
    for ib in power_of_two_divisors(n_pfcu)? {
        let obj = objective_exact(ib, n_pfcu, n_ta)?;
        candidates.push(Candidate {
            ib,
            cp: n_pfcu / ib,
            objective: parallelization_objective(ib, n_pfcu, n_ta)?,
            objective_exact: format!("{}/{}", obj.numer(), obj.denom()),
        });
        exact.push((ib, obj));
        if best.is_none_or(|(b, _)| obj <= b) {
            best = Some((obj, ib));
        }
    }
    let (min, ib) = best.expect("at least IB = 1 is a candidate");
    let tied_ib = exact.iter().filter(|(_, o)| *o == min).map(|(ib, _)| *ib).collect();
    let cont = ((n_pfcu * n_ta) as f64).sqrt();
    Ok(OptimizerReport {
        n_pfcu,
        n_ta,
        best: ParallelizationScheme::new(ib, n_pfcu, n_ta)?,
        tied_ib,
        candidates,
        continuous_optimum_ib: cont,
        continuous_optimum_objective: cont / n_ta as f64 + n_pfcu as f64 / cont,
    })
}

/// Minimizes `adc_cost * IB / n_ta + dac_cost * CP` over power-of-two IB.
/// With equal costs this is [`optimize_parallelization`].
pub fn optimize_with_costs(n_pfcu: usize, n_ta: usize, adc_cost: f64, dac_cost: f64) -> Result<usize, ArchError> {
    if n_ta == 0 {
        return Err(ArchError::InvalidCount(n_ta));
    }
    let mut best = (f64::INFINITY, 0);
    for ib in power_of_two_divisors(n_pfcu)? {
        let v = adc_cost * ib as f64 / n_ta as f64 + dac_cost * (n_pfcu / ib) as f64;
        if v <= best.0 {
            best = (v, ib);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_examples() {
        assert_eq!(parallelization_objective(8, 8, 16).unwrap(), 1.5);
        assert_eq!(parallelization_objective(16, 32, 16).unwrap(), 3.0);
        assert_eq!(parallelization_objective(32, 32, 16).unwrap(), 3.0);
        assert_eq!(parallelization_objective(1, 8, 16).unwrap(), 8.0625);
        assert_eq!(parallelization_objective(3, 8, 16).unwrap_err(), ArchError::NotADivisor { ib: 3, n_pfcu: 8 });
    }

    #[test]
    fn optimizer_examples() {
        let r = optimize_parallelization(8, 16).unwrap();
        assert_eq!((r.best.ib, r.best.cp), (8, 1));
        assert_eq!(optimize_parallelization(16, 16).unwrap().best.ib, 16);
        let r = optimize_parallelization(32, 16).unwrap();
        assert_eq!(r.best.ib, 32);
        assert_eq!(r.tied_ib, vec![16, 32]);
        assert_eq!(objective_exact(32, 32, 16).unwrap(), Ratio::from_integer(3));
        assert!((r.continuous_optimum_ib - 512f64.sqrt()).abs() < 1e-12);
        assert_eq!(optimize_parallelization(12, 16).unwrap_err(), ArchError::InvalidCount(12));
    }

    #[test]
    fn equal_costs_match_objective() {
        for n in [1, 2, 4, 8, 16, 32, 64] {
            for ta in [1, 3, 16, 64] {
                assert_eq!(
                    optimize_with_costs(n, ta, 1.0, 1.0).unwrap(),
                    optimize_parallelization(n, ta).unwrap().best.ib
                );
            }
        }
    }
}
