use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// How to evaluate the moving-average convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    /// Direct summation for small problems, FFT otherwise.
    #[default]
    Auto,
    Fft,
    Direct,
}

/// Direct evaluation is used by `Auto` when `outputs * taps` stays below this.
pub const DIRECT_WORK_LIMIT: u64 = 1 << 15;

/// Largest single-shot FFT; longer signals go through overlap-save blocks.
pub const MAX_SINGLE_FFT: usize = 1 << 22;

/// Linear convolution with a fixed kernel, returning only the outputs whose
/// window lies fully inside the signal: `out[t] = sum_k h_k s[t + K - k]`.
pub struct ValidConvolver {
    kernel: Arc<Vec<f64>>,
    method: ConvolutionMethod,
    fft: Option<FftState>,
}

struct FftState {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex<f64>>,
}

impl std::fmt::Debug for ValidConvolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValidConvolver")
            .field("taps", &self.kernel.len())
            .field("method", &self.method)
            .field("fft_size", &self.fft.as_ref().map(|s| s.size))
            .finish()
    }
}

fn fft_size_for(signal_len: usize, taps: usize) -> usize {
    if signal_len <= MAX_SINGLE_FFT {
        signal_len.next_power_of_two()
    } else {
        (4 * taps)
            .next_power_of_two()
            .max(1 << 16)
            .max(MAX_SINGLE_FFT)
    }
}

impl ValidConvolver {
    /// Prepares a convolver for signals of length `signal_len`.
    pub fn new(kernel: Arc<Vec<f64>>, signal_len: usize, method: ConvolutionMethod) -> Self {
        let taps = kernel.len();
        assert!(
            taps >= 1 && signal_len >= taps,
            "signal shorter than kernel"
        );
        let outputs = (signal_len + 1 - taps) as u64;
        let method = match method {
            ConvolutionMethod::Auto if outputs.saturating_mul(taps as u64) <= DIRECT_WORK_LIMIT => {
                ConvolutionMethod::Direct
            }
            ConvolutionMethod::Auto => ConvolutionMethod::Fft,
            m => m,
        };
        let fft = (method == ConvolutionMethod::Fft).then(|| {
            let size = fft_size_for(signal_len, taps);
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(size);
            let inverse = planner.plan_fft_inverse(size);
            let mut spectrum = vec![Complex::new(0.0, 0.0); size];
            for (s, &h) in spectrum.iter_mut().zip(kernel.iter()) {
                s.re = h;
            }
            forward.process(&mut spectrum);
            let scale = 1.0 / size as f64;
            for s in &mut spectrum {
                *s *= scale;
            }
            FftState {
                size,
                forward,
                inverse,
                spectrum,
            }
        });
        ValidConvolver {
            kernel,
            method,
            fft,
        }
    }

    pub fn method(&self) -> ConvolutionMethod {
        self.method
    }

    pub fn taps(&self) -> usize {
        self.kernel.len()
    }

    pub fn apply(&self, signal: &[f64]) -> Vec<f64> {
        match &self.fft {
            None => direct_valid(&self.kernel, signal),
            Some(state) => self.fft_valid(state, signal),
        }
    }

    fn fft_valid(&self, st: &FftState, signal: &[f64]) -> Vec<f64> {
        let k = self.kernel.len() - 1;
        let outputs = signal.len() - k;
        let step = st.size - k;
        let mut out = Vec::with_capacity(outputs);
        let mut buf = vec![Complex::new(0.0, 0.0); st.size];
        let mut scratch = vec![
            Complex::new(0.0, 0.0);
            st.forward
                .get_inplace_scratch_len()
                .max(st.inverse.get_inplace_scratch_len())
        ];
        let mut start = 0;
        while out.len() < outputs {
            let end = (start + st.size).min(signal.len());
            for (b, &s) in buf.iter_mut().zip(&signal[start..end]) {
                *b = Complex::new(s, 0.0);
            }
            for b in &mut buf[end - start..] {
                *b = Complex::new(0.0, 0.0);
            }
            st.forward.process_with_scratch(&mut buf, &mut scratch);
            for (b, h) in buf.iter_mut().zip(&st.spectrum) {
                *b *= h;
            }
            st.inverse.process_with_scratch(&mut buf, &mut scratch);
            let take = (end - start - k).min(step);
            out.extend(buf[k..k + take].iter().map(|c| c.re));
            start += step;
        }
        out
    }
}

/// Reference `O(n K)` valid convolution.
pub fn direct_valid(kernel: &[f64], signal: &[f64]) -> Vec<f64> {
    let k = kernel.len() - 1;
    (k..signal.len())
        .map(|t| {
            kernel
                .iter()
                .enumerate()
                .map(|(j, h)| h * signal[t - j])
                .sum()
        })
        .collect()
}
