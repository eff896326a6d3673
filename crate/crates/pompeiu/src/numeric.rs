//! Small numeric utilities: compensated summation and Wirtinger finite
//! differences.

use num_complex::Complex64;

/// Kahan–Babuška compensated accumulator for complex values.
///
/// Summation order is fixed by the caller, so results are bit-reproducible.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: Complex64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Central-difference approximation of ∂f/∂x and ∂f/∂y at `z`.
fn central_xy<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64, h: f64) -> (Complex64, Complex64) {
    let dx = (f(z + Complex64::new(h, 0.0)) - f(z - Complex64::new(h, 0.0))) / (2.0 * h);
    let dy = (f(z + Complex64::new(0.0, h)) - f(z - Complex64::new(0.0, h))) / (2.0 * h);
    (dx, dy)
}

/// Central-difference Wirtinger derivative ∂̄f = ½(∂x + i∂y) f.
pub fn dbar_fd<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64, h: f64) -> Complex64 {
    let (dx, dy) = central_xy(f, z, h);
    0.5 * (dx + Complex64::i() * dy)
}

/// Central-difference Wirtinger derivative ∂f = ½(∂x − i∂y) f.
pub fn d_fd<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64, h: f64) -> Complex64 {
    let (dx, dy) = central_xy(f, z, h);
    0.5 * (dx - Complex64::i() * dy)
}

/// Deterministic total order on f64 pairs, used for reproducible tie-breaking.
#[inline]
pub fn total_cmp_pair(a: (f64, u64), b: (f64, u64)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(Complex64::new(1.0, 0.0));
        for _ in 0..1_000_000 {
            s.add(Complex64::new(1e-16, 1e-16));
        }
        let v = s.value();
        assert!((v.re - (1.0 + 1e-10)).abs() < 1e-13);
        assert!((v.im - 1e-10).abs() < 1e-13);
    }

    #[test]
    fn wirtinger_fd_on_conjugate() {
        // f(z) = z̄ has ∂̄f = 1 and ∂f = 0; central differences are exact here.
        let f = |z: Complex64| z.conj();
        let z = Complex64::new(0.3, -0.2);
        let db = dbar_fd(&f, z, 1e-4);
        let d = d_fd(&f, z, 1e-4);
        assert!((db - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn wirtinger_fd_on_holomorphic() {
        let f = |z: Complex64| z * z;
        let z = Complex64::new(0.5, 0.1);
        assert!(dbar_fd(&f, z, 1e-5).norm() < 1e-9);
        assert!((d_fd(&f, z, 1e-5) - 2.0 * z).norm() < 1e-8);
    }
}
