//! Variation operators: simulated binary crossover and polynomial mutation.

use rand::Rng;

use crate::GeneSpec;

/// Simulated binary crossover.
///
/// With probability `rate` the pair is recombined; otherwise the children are
/// copies of the parents. Real genes use the SBX spread factor with
/// distribution index `eta_c`, and the two offspring values are assigned to the
/// children in random order so each child is unbiased around the parents'
/// midpoint. Categorical genes are swapped with probability 0.5.
pub fn sbx_crossover<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    specs: &[GeneSpec],
    eta_c: f64,
    rate: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(p1.len(), p2.len(), "parents must have equal length");
    assert_eq!(p1.len(), specs.len(), "gene spec count must match genome length");
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if !(rng.gen::<f64>() < rate) {
        return (c1, c2);
    }
    let exponent = 1.0 / (eta_c + 1.0);
    for (k, spec) in specs.iter().enumerate() {
        match spec {
            GeneSpec::Real { .. } => {
                let (y1, y2) = if p1[k] <= p2[k] { (p1[k], p2[k]) } else { (p2[k], p1[k]) };
                if y2 - y1 < 1e-14 {
                    continue;
                }
                let u: f64 = rng.gen();
                let beta = if u <= 0.5 {
                    (2.0 * u).powf(exponent)
                } else {
                    (1.0 / (2.0 * (1.0 - u))).powf(exponent)
                };
                let lo = 0.5 * ((y1 + y2) - beta * (y2 - y1));
                let hi = 0.5 * ((y1 + y2) + beta * (y2 - y1));
                let (a, b) = if rng.gen_bool(0.5) { (hi, lo) } else { (lo, hi) };
                c1[k] = spec.clamp(a);
                c2[k] = spec.clamp(b);
            }
            GeneSpec::Categorical { .. } => {
                if rng.gen_bool(0.5) {
                    c1[k] = p2[k];
                    c2[k] = p1[k];
                }
            }
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation (Deb & Goyal) with distribution index `eta_m`.
///
/// Each gene mutates independently with probability `rate`. Categorical genes
/// are resampled uniformly from their choices.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    genes: &[f64],
    specs: &[GeneSpec],
    eta_m: f64,
    rate: f64,
    rng: &mut R,
) -> Vec<f64> {
    assert_eq!(genes.len(), specs.len(), "gene spec count must match genome length");
    let mut out = genes.to_vec();
    let exponent = 1.0 / (eta_m + 1.0);
    for (k, spec) in specs.iter().enumerate() {
        if !(rng.gen::<f64>() < rate) {
            continue;
        }
        match *spec {
            GeneSpec::Real { lower, upper } => {
                let span = upper - lower;
                if !(span > 0.0) {
                    continue;
                }
                let y = genes[k].clamp(lower, upper);
                let d1 = (y - lower) / span;
                let d2 = (upper - y) / span;
                let u: f64 = rng.gen();
                let delta = if u < 0.5 {
                    let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta_m + 1.0);
                    val.powf(exponent) - 1.0
                } else {
                    let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta_m + 1.0);
                    1.0 - val.powf(exponent)
                };
                out[k] = spec.clamp(y + delta * span);
            }
            GeneSpec::Categorical { .. } => {
                out[k] = spec.sample(rng);
            }
        }
    }
    out
}
