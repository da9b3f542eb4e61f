use crate::error::{Error, Result};
use crate::plane::Picture;
use crate::transfer::PSNR_CAP;

/// Mean squared error between two equally long sample slices.
pub fn mse_samples(a: &[u8], b: &[u8]) -> f64 {
    assert_eq!(a.len(), b.len(), "sample slices differ in length");
    let sse: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    sse as f64 / a.len() as f64
}

/// PSNR in dB of two equally long sample slices, capped at 100 dB.
pub fn psnr_samples(a: &[u8], b: &[u8]) -> f64 {
    let mse = mse_samples(a, b);
    if mse == 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (255.0 * 255.0 / mse).log10()).min(PSNR_CAP)
    }
}

/// PSNR in dB between two pictures, capped at 100 dB for identical inputs.
pub fn psnr(a: &Picture, b: &Picture) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::param(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(psnr_samples(a.data(), b.data()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_values() {
        let a = Picture::filled(8, 8, 10).unwrap();
        let b = Picture::filled(8, 8, 11).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), 100.0);
        assert_abs_diff_eq!(psnr(&a, &b).unwrap(), 48.130803608679, epsilon = 1e-9);
        let black = Picture::filled(8, 8, 0).unwrap();
        let white = Picture::filled(8, 8, 255).unwrap();
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
        assert!(psnr(&a, &Picture::filled(4, 8, 0).unwrap()).is_err());
    }
}
