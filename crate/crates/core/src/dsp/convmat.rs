use crate::{CMatrix, Complex64};

/// Toeplitz block convolution matrix with `M[i][k] = h[i - k + delay]`
/// (zero outside the tap range), so that `y = M x` is the window of the
/// linear convolution starting at output index `delay`.
pub fn convolution_matrix(h: &[f64], n_in: usize, n_out: usize, delay: isize) -> CMatrix {
    strided_convolution_matrix(h, n_in, n_out, 1, 1, delay)
}

/// Multirate generalization: `M[i][k] = h[i * out_step - k * in_step + offset]`.
///
/// With `h` sampled on a fine grid, this maps a signal on a grid of spacing
/// `in_step` to one of spacing `out_step`.
pub fn strided_convolution_matrix(
    h: &[f64],
    n_in: usize,
    n_out: usize,
    in_step: usize,
    out_step: usize,
    offset: isize,
) -> CMatrix {
    CMatrix::from_fn(n_out, n_in, |i, k| {
        let idx = (i * out_step) as isize - (k * in_step) as isize + offset;
        if idx >= 0 && (idx as usize) < h.len() {
            Complex64::new(h[idx as usize], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
