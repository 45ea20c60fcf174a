//! Perturbation sampling around one instance.

use super::discretize::Discretizer;
use super::kernel::kernel_weight;
use crate::error::{Error, Result};
use crate::seed;

/// One perturbed sample, viewed from a [`Neighborhood`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborhoodSample<'a> {
    /// Full-width encoded row fed to the model.
    pub z_continuous: &'a [f64],
    /// 1 where the sample's discrete value matches the explained instance.
    pub z_binary: &'a [u8],
    pub weight: f64,
}

/// Perturbed samples stored row-major. Row 0 is the explained instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub width: usize,
    pub continuous: Vec<f64>,
    pub binary: Vec<u8>,
    pub weights: Vec<f64>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn sample(&self, i: usize) -> NeighborhoodSample<'_> {
        let w = self.width;
        NeighborhoodSample {
            z_continuous: &self.continuous[i * w..(i + 1) * w],
            z_binary: &self.binary[i * w..(i + 1) * w],
            weight: self.weights[i],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = NeighborhoodSample<'_>> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }
}

/// Draws `n_samples` rows around `x`: a uniformly chosen quantile bin and a
/// truncated-normal value inside it per numerical column, a code from the
/// training frequencies per categorical column. Weights use the kernel on the
/// Euclidean distance in the binary space, so `D^2` is the mismatch count.
pub fn sample_neighborhood(
    x: &[f64],
    disc: &Discretizer,
    n_samples: usize,
    sigma: f64,
    seed_: u64,
) -> Result<Neighborhood> {
    if n_samples == 0 {
        return Err(Error::argument("need at least one neighbourhood sample"));
    }
    let d = disc.width();
    if x.len() != d {
        return Err(Error::argument(format!(
            "instance has {} values but the discretizer covers {d} columns",
            x.len()
        )));
    }
    kernel_weight(0.0, sigma)?;
    let x_bins = disc.discretize(x);
    let mut rng = seed::rng(seed_);
    let mut continuous = Vec::with_capacity(n_samples * d);
    let mut binary = Vec::with_capacity(n_samples * d);
    let mut weights = Vec::with_capacity(n_samples);

    continuous.extend_from_slice(x);
    binary.extend(std::iter::repeat_n(1u8, d));
    weights.push(1.0);
    for _ in 1..n_samples {
        let mut mismatches = 0usize;
        for j in 0..d {
            let (v, matched) = disc.draw(j, x[j], x_bins[j], &mut rng);
            continuous.push(v);
            binary.push(u8::from(matched));
            mismatches += usize::from(!matched);
        }
        weights.push(kernel_weight((mismatches as f64).sqrt(), sigma)?);
    }
    Ok(Neighborhood {
        width: d,
        continuous,
        binary,
        weights,
    })
}
