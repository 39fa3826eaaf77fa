use alloc::vec;
use alloc::vec::Vec;

use super::ComplexSignal;
use crate::error::invalid;
use crate::{Complex64, Result};

/// Zero insertion: `out[k l] = x[k]`, all other samples zero.
pub fn upsample(x: &ComplexSignal, l: usize) -> Result<ComplexSignal> {
    if l < 1 {
        return Err(invalid!("upsampling factor must be at least 1"));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() * l];
    for (k, &v) in x.samples().iter().enumerate() {
        out[k * l] = v;
    }
    Ok(ComplexSignal::from_parts(out, x.rate() * l))
}

/// Keeps every `l`-th sample starting at `offset`.
pub fn downsample(x: &ComplexSignal, l: usize, offset: usize) -> Result<ComplexSignal> {
    if l < 1 {
        return Err(invalid!("downsampling factor must be at least 1"));
    }
    if offset >= l {
        return Err(invalid!("offset {offset} must be below factor {l}"));
    }
    if !x.rate().is_multiple_of(l) {
        return Err(invalid!("rate {} is not divisible by {l}", x.rate()));
    }
    let out: Vec<Complex64> = x.samples().iter().skip(offset).step_by(l).copied().collect();
    Ok(ComplexSignal::from_parts(out, x.rate() / l))
}

/// Sample-and-hold: each sample repeated `r` times.
pub fn zero_order_hold(x: &ComplexSignal, r: usize) -> Result<ComplexSignal> {
    if r < 1 {
        return Err(invalid!("hold factor must be at least 1"));
    }
    let out = x
        .samples()
        .iter()
        .flat_map(|&v| core::iter::repeat_n(v, r))
        .collect();
    Ok(ComplexSignal::from_parts(out, x.rate() * r))
}
