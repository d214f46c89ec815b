//! In-place iterative radix-2 FFT.
//!
//! Twiddle factors are computed with `libm` so transforms are bit-identical
//! across platforms.

use alloc::vec::Vec;

use crate::{Complex, Error, Result};

/// Forward transform `X_k = Σ_n x_n e^{-2πi kn/N}` (unnormalized).
pub fn fft(data: &mut [Complex]) -> Result<()> {
    transform(data, -1.0)
}

/// Inverse transform `x_n = Σ_k X_k e^{+2πi kn/N}` (unnormalized).
pub fn ifft(data: &mut [Complex]) -> Result<()> {
    transform(data, 1.0)
}

fn transform(data: &mut [Complex], sign: f64) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::invalid("FFT length must be a nonzero power of two"));
    }
    if n == 1 {
        return Ok(());
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    // Twiddles for the largest stage; smaller stages stride through them.
    let half = n / 2;
    let twiddles: Vec<Complex> = (0..half)
        .map(|k| {
            let (s, c) = libm::sincos(core::f64::consts::TAU * k as f64 / n as f64);
            Complex::new(c, sign * s)
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex], sign: f64) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (j, v)| {
                    let ang = sign * core::f64::consts::TAU * (k * j) as f64 / n as f64;
                    acc + v * Complex::new(ang.cos(), ang.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex> = (0..64).map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut y = x.clone();
        fft(&mut y).unwrap();
        for (a, b) in y.iter().zip(naive_dft(&x, -1.0)) {
            assert!((a - b).norm() < 1e-11);
        }
        let mut z = x.clone();
        ifft(&mut z).unwrap();
        for (a, b) in z.iter().zip(naive_dft(&x, 1.0)) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn roundtrip_scales_by_n() {
        let x: Vec<Complex> = (0..256).map(|i| Complex::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut y = x.clone();
        fft(&mut y).unwrap();
        ifft(&mut y).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a / 256.0 - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut x = vec![Complex::new(0.0, 0.0); 12];
        assert!(fft(&mut x).is_err());
        assert!(fft(&mut []).is_err());
    }
}
