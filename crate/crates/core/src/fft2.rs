//! Small 2-D FFT helper over row-major complex grids.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub(crate) type C64 = Complex<f64>;

/// In-place unnormalized 2-D DFT (rows, then columns).
pub(crate) fn fft2(data: &mut [C64], width: usize, height: usize, inverse: bool) {
    debug_assert_eq!(data.len(), width * height);
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(width), planner.plan_fft_inverse(height))
    } else {
        (planner.plan_fft_forward(width), planner.plan_fft_forward(height))
    };
    row_fft.process(data);
    let mut col = vec![C64::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in col.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut col);
        for (y, c) in col.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
}

/// Signed frequency of DFT bin `k` of `n`, in cycles per sample, in `[-0.5, 0.5)`.
#[inline]
pub(crate) fn bin_frequency(k: usize, n: usize) -> f64 {
    if 2 * k >= n {
        k as f64 / n as f64 - 1.0
    } else {
        k as f64 / n as f64
    }
}
