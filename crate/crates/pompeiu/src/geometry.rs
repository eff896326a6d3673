//! Planar slices bounded by smooth Jordan curves, and products of slices.
//!
//! Curves are stored as equispaced periodic samples together with the
//! trigonometric interpolant's Fourier coefficients, so boundary quadrature
//! and point evaluation are spectrally accurate. Containment is decided by
//! the winding number of the interpolated curve, computed exactly via
//! adaptive chord subdivision.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

/// One closed boundary component, sampled at `n` equispaced parameter values
/// on `[0, period)`.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    nodes: Vec<Complex64>,
    derivative_nodes: Vec<Complex64>,
    /// Interpolation coefficients in FFT index order (frequency `k` at index
    /// `k` for `k < n/2`, `k - n` at index `k` for `k > n/2`, Nyquist at `n/2`).
    fourier: Vec<Complex64>,
    period: f64,
    closed_length: f64,
    orientation: Orientation,
    max_spacing: f64,
    /// `max |d²ζ/dτ²|` bound (τ the 2π-scaled parameter), `Σ m²|c_m|`.
    second_deriv_bound: f64,
    /// `min |dζ/dτ|` over a 4x oversampled grid.
    min_speed: f64,
}

const MIN_NODES: usize = 16;

fn fft_forward(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    for c in &mut buf {
        *c /= n as f64;
    }
    buf
}

fn fft_inverse_unnormalized(coeffs: &mut [Complex64]) {
    let n = coeffs.len();
    FftPlanner::new().plan_fft_inverse(n).process(coeffs);
}

/// Zero-pad FFT-ordered coefficients from `n` to `k` frequencies, splitting
/// the Nyquist mode symmetrically.
fn pad_coefficients(coeffs: &[Complex64], k: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    assert!(k >= n && k % 2 == 0 && n % 2 == 0);
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    out[0] = coeffs[0];
    for m in 1..n / 2 {
        out[m] = coeffs[m];
        out[k - m] = coeffs[n - m];
    }
    let nyq = coeffs[n / 2] * 0.5;
    out[n / 2] += nyq;
    out[k - n / 2] += nyq;
    out
}

/// Derivative coefficients with respect to τ; Nyquist maps to zero, matching
/// the cosine convention at the sample points.
fn derivative_coefficients(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for m in 1..n / 2 {
        let f = m as f64;
        out[m] = Complex64::i() * f * coeffs[m];
        out[n - m] = -Complex64::i() * f * coeffs[n - m];
    }
    out
}

fn signed_area(nodes: &[Complex64]) -> f64 {
    let n = nodes.len();
    let mut area = 0.0;
    for k in 0..n {
        let a = nodes[k];
        let b = nodes[(k + 1) % n];
        area += a.re * b.im - b.re * a.im;
    }
    0.5 * area
}

fn dist_point_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let cross = |p: Complex64, q: Complex64| p.re * q.im - p.im * q.re;
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

impl BoundaryCurve {
    /// Build a curve from raw samples; derivatives come from spectral
    /// differentiation.
    pub fn from_nodes(nodes: Vec<Complex64>, period: f64) -> Result<Self> {
        Self::build(nodes, None, period)
    }

    /// Build a curve from samples plus analytically supplied derivatives.
    /// The derivatives must agree with spectral differentiation to a relative
    /// error of 1e-8.
    pub fn from_nodes_with_derivatives(
        nodes: Vec<Complex64>,
        derivative_nodes: Vec<Complex64>,
        period: f64,
    ) -> Result<Self> {
        Self::build(nodes, Some(derivative_nodes), period)
    }

    fn build(
        nodes: Vec<Complex64>,
        derivative_nodes: Option<Vec<Complex64>>,
        period: f64,
    ) -> Result<Self> {
        let n = nodes.len();
        if n < MIN_NODES || n % 2 != 0 {
            return Err(Error::InvalidCurve(format!(
                "node count must be even and at least {MIN_NODES}, got {n}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidCurve(format!("invalid period {period}")));
        }
        let fourier = fft_forward(&nodes);

        // Spectral derivative with respect to t = period·τ/2π.
        let scale = TAU / period;
        let mut dcoeffs = derivative_coefficients(&fourier);
        fft_inverse_unnormalized(&mut dcoeffs);
        let spectral: Vec<Complex64> = dcoeffs.into_iter().map(|v| v * scale).collect();

        let derivative_nodes = match derivative_nodes {
            Some(given) => {
                if given.len() != n {
                    return Err(Error::InvalidCurve(
                        "derivative sample count differs from node count".into(),
                    ));
                }
                let mag = given.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
                let dev = given
                    .iter()
                    .zip(&spectral)
                    .map(|(g, s)| (g - s).norm())
                    .fold(0.0_f64, f64::max);
                if mag > 0.0 && dev > 1e-8 * mag {
                    return Err(Error::InvalidCurve(format!(
                        "supplied derivatives deviate from spectral differentiation: {:.3e} relative",
                        dev / mag
                    )));
                }
                given
            }
            None => spectral,
        };

        let second_deriv_bound: f64 = {
            let half = n / 2;
            let mut b = 0.0;
            for m in 1..half {
                let f = (m * m) as f64;
                b += f * (fourier[m].norm() + fourier[n - m].norm());
            }
            b + (half * half) as f64 * fourier[half].norm()
        };

        let max_spacing = (0..n)
            .map(|k| (nodes[(k + 1) % n] - nodes[k]).norm())
            .fold(0.0_f64, f64::max);

        let orientation = if signed_area(&nodes) >= 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        };

        let mut curve = Self {
            nodes,
            derivative_nodes,
            fourier,
            period,
            closed_length: 0.0,
            orientation,
            max_spacing,
            second_deriv_bound,
            min_speed: 0.0,
        };
        let (length, min_speed) = curve.compute_length_and_min_speed();
        curve.closed_length = length;
        curve.min_speed = min_speed;
        curve.check_simple()?;
        Ok(curve)
    }

    /// Circle of radius `r` about `center`, positively oriented.
    pub fn circle(center: Complex64, r: f64, n: usize) -> Result<Self> {
        let nodes: Vec<Complex64> = (0..n)
            .map(|k| center + Complex64::from_polar(r, TAU * k as f64 / n as f64))
            .collect();
        let derivs: Vec<Complex64> = (0..n)
            .map(|k| Complex64::i() * Complex64::from_polar(r, TAU * k as f64 / n as f64))
            .collect();
        Self::from_nodes_with_derivatives(nodes, derivs, TAU)
    }

    /// Axis-aligned ellipse `center + (a cos t, b sin t)`.
    pub fn ellipse(center: Complex64, a: f64, b: f64, n: usize) -> Result<Self> {
        let nodes: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                center + Complex64::new(a * t.cos(), b * t.sin())
            })
            .collect();
        let derivs: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                Complex64::new(-a * t.sin(), b * t.cos())
            })
            .collect();
        Self::from_nodes_with_derivatives(nodes, derivs, TAU)
    }

    /// C^∞ rounded square: `r(t) e^{it}` with `r = w (cos⁸t + sin⁸t)^{-1/8}`.
    pub fn smoothed_square(center: Complex64, half_width: f64, n: usize) -> Result<Self> {
        let nodes: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let u = t.cos().powi(8) + t.sin().powi(8);
                center + Complex64::from_polar(half_width * u.powf(-0.125), t)
            })
            .collect();
        let derivs: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let (s, c) = t.sin_cos();
                let u = c.powi(8) + s.powi(8);
                let du = 8.0 * s * c * (s.powi(6) - c.powi(6));
                let r = half_width * u.powf(-0.125);
                let dr = -r * du / (8.0 * u);
                (Complex64::new(dr, 0.0) + Complex64::i() * r) * Complex64::from_polar(1.0, t)
            })
            .collect();
        Self::from_nodes_with_derivatives(nodes, derivs, TAU)
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn derivative_nodes(&self) -> &[Complex64] {
        &self.derivative_nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn closed_length(&self) -> f64 {
        self.closed_length
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn max_spacing(&self) -> f64 {
        self.max_spacing
    }

    /// Upper bound on how far the curve strays from its node polyline.
    pub fn chord_slack(&self) -> f64 {
        0.5 * self.max_spacing + self.sagitta()
    }

    /// Upper bound on the deviation of one arc from its chord.
    pub fn sagitta(&self) -> f64 {
        let dtau = TAU / self.nodes.len() as f64;
        0.125 * self.second_deriv_bound * dtau * dtau
    }

    #[inline]
    fn tau_of(&self, t: f64) -> f64 {
        let r = (t / self.period).rem_euclid(1.0);
        TAU * r
    }

    fn eval_series(&self, tau: f64) -> Complex64 {
        let n = self.fourier.len();
        let half = n / 2;
        let e = Complex64::from_polar(1.0, tau);
        let ec = e.conj();
        let mut sum = self.fourier[0];
        let mut wp = Complex64::new(1.0, 0.0);
        let mut wm = Complex64::new(1.0, 0.0);
        for m in 1..half {
            wp *= e;
            wm *= ec;
            sum += self.fourier[m] * wp + self.fourier[n - m] * wm;
        }
        sum + self.fourier[half] * (half as f64 * tau).cos()
    }

    fn eval_series_derivative(&self, tau: f64) -> Complex64 {
        let n = self.fourier.len();
        let half = n / 2;
        let e = Complex64::from_polar(1.0, tau);
        let ec = e.conj();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut wp = Complex64::new(1.0, 0.0);
        let mut wm = Complex64::new(1.0, 0.0);
        for m in 1..half {
            wp *= e;
            wm *= ec;
            let f = m as f64;
            sum += Complex64::i() * f * (self.fourier[m] * wp - self.fourier[n - m] * wm);
        }
        let h = half as f64;
        sum - self.fourier[half] * h * (h * tau).sin()
    }

    /// Trigonometric interpolant at parameter `t` (reduced modulo the period).
    /// At sample parameters this returns the stored node exactly.
    pub fn point(&self, t: f64) -> Complex64 {
        let n = self.nodes.len() as f64;
        let tau = self.tau_of(t);
        // Snap to stored nodes so grid evaluations are bit-exact.
        let idx = tau * n / TAU;
        let k = idx.round();
        if (idx - k).abs() < 1e-13 {
            return self.nodes[(k as usize) % self.nodes.len()];
        }
        self.eval_series(tau)
    }

    /// Derivative dζ/dt of the interpolant at parameter `t`.
    pub fn derivative(&self, t: f64) -> Complex64 {
        let n = self.nodes.len() as f64;
        let tau = self.tau_of(t);
        let idx = tau * n / TAU;
        let k = idx.round();
        if (idx - k).abs() < 1e-13 {
            return self.derivative_nodes[(k as usize) % self.nodes.len()];
        }
        self.eval_series_derivative(tau) * (TAU / self.period)
    }

    fn compute_length_and_min_speed(&self) -> (f64, f64) {
        let n = self.nodes.len();
        let k = 4 * n;
        let mut padded = pad_coefficients(&derivative_coefficients(&self.fourier), k);
        fft_inverse_unnormalized(&mut padded);
        let dtau = TAU / k as f64;
        let mut sum = 0.0;
        let mut min_speed = f64::INFINITY;
        for v in &padded {
            let s = v.norm();
            sum += s;
            min_speed = min_speed.min(s);
        }
        (sum * dtau, min_speed)
    }

    /// Upper bound on the curvature of the interpolated curve.
    pub fn curvature_bound(&self) -> f64 {
        self.second_deriv_bound / (self.min_speed * self.min_speed).max(1e-300)
    }

    /// Radius of a tubular neighborhood in which the nearest boundary node
    /// identifies the locally nearest arc.
    pub fn tube_radius(&self) -> f64 {
        (0.3 / self.curvature_bound()).min(0.25 * self.closed_length)
    }

    /// Signed distance from `z` to the node polyline near node `k`, positive
    /// on the left of the traversal direction (the enclosed-domain side for
    /// both outer and hole boundaries). Also returns the nearest local
    /// segment as a (base, direction) pair for clipping.
    pub fn local_signed_distance(&self, z: Complex64, k: usize) -> (f64, Complex64, Complex64) {
        let n = self.nodes.len();
        let mut best = f64::INFINITY;
        let mut sign = 1.0;
        let mut seg = (self.nodes[k], self.nodes[(k + 1) % n] - self.nodes[k]);
        for off in [n - 2, n - 1, 0, 1] {
            let s = (k + off) % n;
            let a = self.nodes[s];
            let b = self.nodes[(s + 1) % n];
            let ab = b - a;
            let len2 = ab.norm_sqr();
            if len2 == 0.0 {
                continue;
            }
            let t = (((z - a).re * ab.re + (z - a).im * ab.im) / len2).clamp(0.0, 1.0);
            let foot = a + ab * t;
            let d = (z - foot).norm();
            if d < best {
                best = d;
                let cross = ab.re * (z - foot).im - ab.im * (z - foot).re;
                sign = if cross >= 0.0 { 1.0 } else { -1.0 };
                seg = (a, ab);
            }
        }
        (sign * best, seg.0, seg.1)
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.nodes.len();
        // Bucket segments on a coarse grid to keep the pair check near-linear.
        let (min, max) = self.node_bbox();
        let span = (max.re - min.re).max(max.im - min.im).max(1e-300);
        let cells = 64usize;
        let cell = span / cells as f64;
        let mut buckets: std::collections::HashMap<(i64, i64), Vec<usize>> =
            std::collections::HashMap::new();
        let key = |p: Complex64| {
            (
                ((p.re - min.re) / cell).floor() as i64,
                ((p.im - min.im) / cell).floor() as i64,
            )
        };
        for s in 0..n {
            let a = self.nodes[s];
            let b = self.nodes[(s + 1) % n];
            let (i0, j0) = key(a);
            let (i1, j1) = key(b);
            for i in i0.min(i1)..=i0.max(i1) {
                for j in j0.min(j1)..=j0.max(j1) {
                    buckets.entry((i, j)).or_default().push(s);
                }
            }
        }
        for segs in buckets.values() {
            for (u, &s) in segs.iter().enumerate() {
                for &t in &segs[u + 1..] {
                    let gap = (s as i64 - t as i64).rem_euclid(n as i64);
                    if gap <= 1 || gap >= n as i64 - 1 {
                        continue; // adjacent segments share an endpoint
                    }
                    let a = self.nodes[s];
                    let b = self.nodes[(s + 1) % n];
                    let c = self.nodes[t];
                    let d = self.nodes[(t + 1) % n];
                    if segments_intersect(a, b, c, d) {
                        return Err(Error::InvalidCurve(format!(
                            "self-intersection between segments {s} and {t} at sample resolution"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn node_bbox(&self) -> (Complex64, Complex64) {
        let mut min = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut max = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.nodes {
            min.re = min.re.min(p.re);
            min.im = min.im.min(p.im);
            max.re = max.re.max(p.re);
            max.im = max.im.max(p.im);
        }
        (min, max)
    }

    /// Distance from `z` to the interpolated curve, via Newton refinement of
    /// the nearest-node parameter. Accurate for points near the curve.
    pub fn distance(&self, z: Complex64) -> f64 {
        let n = self.nodes.len();
        let (mut best_k, mut best_d) = (0usize, f64::INFINITY);
        for (k, p) in self.nodes.iter().enumerate() {
            let d = (p - z).norm();
            if d < best_d {
                best_d = d;
                best_k = k;
            }
        }
        let dtau = TAU / n as f64;
        let mut tau = best_k as f64 * dtau;
        let mut best = best_d;
        for _ in 0..40 {
            let p = self.eval_series(tau);
            let dp = self.eval_series_derivative(tau);
            let g1 = (p - z).re * dp.re + (p - z).im * dp.im;
            // second derivative of ½|ζ(τ)-z|²; fall back to |ζ'|² if the
            // curvature term makes it non-positive
            let ddp = self.second_derivative_series(tau);
            let mut g2 = dp.norm_sqr() + (p - z).re * ddp.re + (p - z).im * ddp.im;
            if g2 <= 0.0 {
                g2 = dp.norm_sqr().max(1e-30);
            }
            let step = (g1 / g2).clamp(-dtau, dtau);
            tau -= step;
            let d = (self.eval_series(tau) - z).norm();
            if d < best {
                best = d;
            }
            if step.abs() < 1e-15 {
                break;
            }
        }
        best
    }

    fn second_derivative_series(&self, tau: f64) -> Complex64 {
        let n = self.fourier.len();
        let half = n / 2;
        let e = Complex64::from_polar(1.0, tau);
        let ec = e.conj();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut wp = Complex64::new(1.0, 0.0);
        let mut wm = Complex64::new(1.0, 0.0);
        for m in 1..half {
            wp *= e;
            wm *= ec;
            let f = (m * m) as f64;
            sum -= f * (self.fourier[m] * wp + self.fourier[n - m] * wm);
        }
        let h = half as f64;
        sum - self.fourier[half] * h * h * (h * tau).cos()
    }

    /// Winding number of the interpolated curve about `z`, or `None` when `z`
    /// is within ~1e-12 of the curve.
    ///
    /// The node polyline is subdivided (with spectral midpoint evaluation)
    /// until every chord provably stays closer to the curve than to `z`; the
    /// refined polygon is then homotopic to the curve in ℂ∖{z} and its ray
    /// crossings give the exact winding number.
    pub fn winding(&self, z: Complex64) -> Option<i32> {
        let n = self.nodes.len();
        let dtau = TAU / n as f64;
        let mut crossings = 0i32;
        // stack of (tau0, tau1, p0, p1)
        let mut stack: Vec<(f64, f64, Complex64, Complex64)> = Vec::with_capacity(64);
        for k in (0..n).rev() {
            let t0 = k as f64 * dtau;
            stack.push((
                t0,
                t0 + dtau,
                self.nodes[k],
                self.nodes[(k + 1) % n],
            ));
        }
        while let Some((t0, t1, p0, p1)) = stack.pop() {
            let w = t1 - t0;
            let dev = 0.125 * self.second_deriv_bound * w * w;
            let d = dist_point_segment(z, p0, p1);
            if d > dev {
                // chord is a faithful stand-in for this arc
                let below0 = p0.im <= z.im;
                let below1 = p1.im <= z.im;
                if below0 != below1 {
                    let x = p0.re + (z.im - p0.im) * (p1.re - p0.re) / (p1.im - p0.im);
                    if x > z.re {
                        crossings += if below0 { 1 } else { -1 };
                    }
                }
            } else {
                if w < 1e-12 {
                    return None; // z is on the curve at working precision
                }
                let tm = 0.5 * (t0 + t1);
                let pm = self.eval_series(tm);
                stack.push((tm, t1, pm, p1));
                stack.push((t0, tm, p0, pm));
            }
        }
        Some(crossings)
    }

    /// Reverse the traversal direction (flips orientation, keeps node 0).
    pub fn reversed(&self) -> Result<Self> {
        let n = self.nodes.len();
        let nodes: Vec<Complex64> = (0..n).map(|k| self.nodes[(n - k) % n]).collect();
        let derivs: Vec<Complex64> = (0..n).map(|k| -self.derivative_nodes[(n - k) % n]).collect();
        Self::from_nodes_with_derivatives(nodes, derivs, self.period)
    }
}

/// Unit-speed reparametrization: the returned curve has parameter in
/// `[0, closed_length)` and `|derivative| = 1` at every node.
pub fn arclength_reparametrize(curve: &BoundaryCurve) -> Result<BoundaryCurve> {
    let n = curve.nodes.len();
    for (k, d) in curve.derivative_nodes.iter().enumerate() {
        if d.norm() < 1e-12 {
            return Err(Error::DegenerateParametrization {
                node: k,
                speed: d.norm(),
            });
        }
    }

    // Speed samples with respect to τ on a 4x oversampled grid.
    let k = 4 * n;
    let mut dpad = pad_coefficients(&derivative_coefficients(&curve.fourier), k);
    fft_inverse_unnormalized(&mut dpad);
    let speed: Vec<f64> = dpad.iter().map(|v| v.norm()).collect();

    // Fourier coefficients of the (smooth, positive) speed function give a
    // spectrally accurate cumulative arclength F(τ) = ∫₀^τ speed.
    let speed_c: Vec<Complex64> = fft_forward(
        &speed
            .iter()
            .map(|&s| Complex64::new(s, 0.0))
            .collect::<Vec<_>>(),
    );
    let mean = speed_c[0].re;
    let total = mean * TAU;

    let eval_f = |tau: f64| -> f64 {
        let mut acc = mean * tau;
        let half = k / 2;
        let e = Complex64::from_polar(1.0, tau);
        let ec = e.conj();
        let mut wp = Complex64::new(1.0, 0.0);
        let mut wm = Complex64::new(1.0, 0.0);
        for m in 1..half {
            wp *= e;
            wm *= ec;
            let im = Complex64::i() * m as f64;
            acc += ((speed_c[m] * (wp - 1.0)) / im).re;
            acc += ((speed_c[k - m] * (wm - 1.0)) / (-im)).re;
        }
        acc
    };
    let eval_speed = |tau: f64| -> f64 {
        let half = k / 2;
        let e = Complex64::from_polar(1.0, tau);
        let ec = e.conj();
        let mut acc = speed_c[0];
        let mut wp = Complex64::new(1.0, 0.0);
        let mut wm = Complex64::new(1.0, 0.0);
        for m in 1..half {
            wp *= e;
            wm *= ec;
            acc += speed_c[m] * wp + speed_c[k - m] * wm;
        }
        acc.re
    };

    let mut nodes = Vec::with_capacity(n);
    let mut derivs = Vec::with_capacity(n);
    let mut tau = 0.0_f64;
    for q in 0..n {
        let target = total * q as f64 / n as f64;
        for _ in 0..60 {
            let err = eval_f(tau) - target;
            let sp = eval_speed(tau);
            let step = err / sp;
            tau -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let p = curve.eval_series(tau);
        let dp = curve.eval_series_derivative(tau);
        nodes.push(p);
        derivs.push(dp / dp.norm());
    }

    BoundaryCurve::from_nodes_with_derivatives(nodes, derivs, total)
}

/// Interpolant evaluation required by the public operation contract.
pub fn curve_point(curve: &BoundaryCurve, t: f64) -> Complex64 {
    curve.point(t)
}

/// Uniform bucket grid over one curve's nodes for O(1) nearest-node queries.
#[derive(Clone, Debug)]
struct NodeGrid {
    origin: Complex64,
    cell: f64,
    nx: i64,
    ny: i64,
    buckets: Vec<Vec<u32>>,
}

impl NodeGrid {
    fn build(nodes: &[Complex64]) -> Self {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in nodes {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-12);
        let target = (nodes.len() as f64).sqrt().ceil() as i64 * 2;
        let cell = span / target as f64;
        let nx = ((hi.re - lo.re) / cell).floor() as i64 + 1;
        let ny = ((hi.im - lo.im) / cell).floor() as i64 + 1;
        let mut buckets = vec![Vec::new(); (nx * ny) as usize];
        for (i, p) in nodes.iter().enumerate() {
            let bx = (((p.re - lo.re) / cell).floor() as i64).clamp(0, nx - 1);
            let by = (((p.im - lo.im) / cell).floor() as i64).clamp(0, ny - 1);
            buckets[(by * nx + bx) as usize].push(i as u32);
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        }
    }

    /// Index and distance of the node nearest to `z`.
    fn nearest(&self, z: Complex64, nodes: &[Complex64]) -> (usize, f64) {
        let bx = (((z.re - self.origin.re) / self.cell).floor() as i64).clamp(0, self.nx - 1);
        let by = (((z.im - self.origin.im) / self.cell).floor() as i64).clamp(0, self.ny - 1);
        let mut best = (0usize, f64::INFINITY);
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            // Once a candidate is found, rings beyond best/cell cannot beat it.
            if best.1.is_finite() {
                let ring_min = (ring - 1).max(0) as f64 * self.cell
                    - 2.0 * self.cell;
                if ring_min > best.1 {
                    break;
                }
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let cx = bx + dx;
                    let cy = by + dy;
                    if cx < 0 || cy < 0 || cx >= self.nx || cy >= self.ny {
                        continue;
                    }
                    for &i in &self.buckets[(cy * self.nx + cx) as usize] {
                        let d = (nodes[i as usize] - z).norm();
                        if d < best.1 {
                            best = (i as usize, d);
                        }
                    }
                }
            }
        }
        best
    }
}

/// Bounded planar slice: one outer boundary plus optional hole boundaries.
#[derive(Clone, Debug)]
pub struct PlanarDomain {
    curves: Vec<BoundaryCurve>,
    grids: Vec<NodeGrid>,
    bbox_min: Complex64,
    bbox_max: Complex64,
}

impl PlanarDomain {
    /// `curves[0]` is the outer boundary (normalized to positive orientation);
    /// the rest are holes (normalized to negative orientation).
    pub fn new(curves: Vec<BoundaryCurve>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidCurve("domain needs at least one curve".into()));
        }
        let mut fixed = Vec::with_capacity(curves.len());
        for (i, c) in curves.into_iter().enumerate() {
            let want = if i == 0 {
                Orientation::Positive
            } else {
                Orientation::Negative
            };
            fixed.push(if c.orientation() == want { c } else { c.reversed()? });
        }

        // Hole nodes must lie strictly inside the outer curve and outside one
        // another.
        for h in 1..fixed.len() {
            for p in fixed[h].nodes() {
                if fixed[0].winding(*p) != Some(1) {
                    return Err(Error::InvalidCurve(format!(
                        "hole {h} is not strictly inside the outer boundary"
                    )));
                }
            }
            for other in 1..fixed.len() {
                if other == h {
                    continue;
                }
                if fixed[other].winding(fixed[h].nodes()[0]) == Some(-1) {
                    return Err(Error::InvalidCurve(format!(
                        "holes {h} and {other} overlap"
                    )));
                }
            }
        }

        let mut bbox_min = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut bbox_max = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in &fixed {
            let (lo, hi) = c.node_bbox();
            let pad = c.chord_slack();
            bbox_min.re = bbox_min.re.min(lo.re - pad);
            bbox_min.im = bbox_min.im.min(lo.im - pad);
            bbox_max.re = bbox_max.re.max(hi.re + pad);
            bbox_max.im = bbox_max.im.max(hi.im + pad);
        }

        let grids = fixed.iter().map(|c| NodeGrid::build(c.nodes())).collect();
        let domain = Self {
            curves: fixed,
            grids,
            bbox_min,
            bbox_max,
        };
        domain.find_interior_sample()?;
        Ok(domain)
    }

    pub fn disc(center: Complex64, r: f64, n: usize) -> Result<Self> {
        Self::new(vec![BoundaryCurve::circle(center, r, n)?])
    }

    pub fn unit_disc(n: usize) -> Result<Self> {
        Self::disc(Complex64::new(0.0, 0.0), 1.0, n)
    }

    pub fn ellipse(center: Complex64, a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(vec![BoundaryCurve::ellipse(center, a, b, n)?])
    }

    pub fn annulus(center: Complex64, r_inner: f64, r_outer: f64, n: usize) -> Result<Self> {
        Self::new(vec![
            BoundaryCurve::circle(center, r_outer, n)?,
            BoundaryCurve::circle(center, r_inner, n)?.reversed()?,
        ])
    }

    pub fn smoothed_square(center: Complex64, half_width: f64, n: usize) -> Result<Self> {
        Self::new(vec![BoundaryCurve::smoothed_square(center, half_width, n)?])
    }

    pub fn curves(&self) -> &[BoundaryCurve] {
        &self.curves
    }

    pub fn outer(&self) -> &BoundaryCurve {
        &self.curves[0]
    }

    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        (self.bbox_min, self.bbox_max)
    }

    pub fn diameter(&self) -> f64 {
        ((self.bbox_max.re - self.bbox_min.re).powi(2)
            + (self.bbox_max.im - self.bbox_min.im).powi(2))
        .sqrt()
    }

    pub fn max_node_spacing(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.max_spacing())
            .fold(0.0_f64, f64::max)
    }

    /// Largest polyline slack over all boundary components.
    pub fn chord_slack(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.chord_slack())
            .fold(0.0_f64, f64::max)
    }

    /// Minimum distance from `z` to any boundary node.
    pub fn min_node_distance(&self, z: Complex64) -> f64 {
        self.nearest_node(z).2
    }

    /// `(curve index, node index, distance)` of the boundary node nearest to
    /// `z`.
    pub fn nearest_node(&self, z: Complex64) -> (usize, usize, f64) {
        let mut best = (0usize, 0usize, f64::INFINITY);
        for (ci, (curve, grid)) in self.curves.iter().zip(&self.grids).enumerate() {
            let (ni, d) = grid.nearest(z, curve.nodes());
            if d < best.2 {
                best = (ci, ni, d);
            }
        }
        best
    }

    /// Nearest node of one specific boundary component.
    pub fn nearest_node_on(&self, curve: usize, z: Complex64) -> (usize, f64) {
        self.grids[curve].nearest(z, self.curves[curve].nodes())
    }

    /// Winding number of the full oriented boundary about `z`; `None` when `z`
    /// is on a boundary component at working precision.
    pub fn winding(&self, z: Complex64) -> Option<i32> {
        let mut total = 0;
        for c in &self.curves {
            total += c.winding(z)?;
        }
        Some(total)
    }

    /// True iff the winding number of the boundary about `z` equals 1.
    /// Points within 1e-12 of the boundary are reported not-contained.
    pub fn contains(&self, z: Complex64) -> bool {
        if z.re < self.bbox_min.re
            || z.re > self.bbox_max.re
            || z.im < self.bbox_min.im
            || z.im > self.bbox_max.im
        {
            return false;
        }
        for c in &self.curves {
            if self.min_node_distance(z) <= c.chord_slack() + 1e-9 && c.distance(z) <= 1e-12 {
                return false;
            }
        }
        self.winding(z) == Some(1)
    }

    fn find_interior_sample(&self) -> Result<Complex64> {
        let steps = 32;
        let dx = (self.bbox_max.re - self.bbox_min.re) / steps as f64;
        let dy = (self.bbox_max.im - self.bbox_min.im) / steps as f64;
        for j in 1..steps {
            for i in 1..steps {
                let z = Complex64::new(
                    self.bbox_min.re + dx * i as f64,
                    self.bbox_min.im + dy * j as f64,
                );
                if self.winding(z) == Some(1) {
                    return Ok(z);
                }
            }
        }
        Err(Error::InvalidCurve(
            "no interior sample point found; boundary orientation is inconsistent".into(),
        ))
    }

    /// Lattice of pitch `spacing` (anchored at integer multiples) restricted
    /// to interior points at least `standoff` away from every boundary node,
    /// in row-major order.
    pub fn interior_grid(&self, spacing: f64, standoff: f64) -> Result<Vec<Complex64>> {
        if !(spacing > 0.0 && standoff > 0.0) {
            return Err(Error::InvalidInput(
                "spacing and standoff must be positive".into(),
            ));
        }
        let i0 = (self.bbox_min.re / spacing).ceil() as i64;
        let i1 = (self.bbox_max.re / spacing).floor() as i64;
        let j0 = (self.bbox_min.im / spacing).ceil() as i64;
        let j1 = (self.bbox_max.im / spacing).floor() as i64;
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                let z = Complex64::new(i as f64 * spacing, j as f64 * spacing);
                if self.min_node_distance(z) >= standoff && self.contains(z) {
                    out.push(z);
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyGrid { spacing, standoff });
        }
        Ok(out)
    }
}

/// Ordered product of planar slices (two for the solver; three only for the
/// tridisc experiment).
#[derive(Clone, Debug)]
pub struct ProductDomain {
    slices: Vec<PlanarDomain>,
}

impl ProductDomain {
    pub fn new(slices: Vec<PlanarDomain>) -> Result<Self> {
        if !(2..=3).contains(&slices.len()) {
            return Err(Error::InvalidInput(format!(
                "product domain needs 2 or 3 slices, got {}",
                slices.len()
            )));
        }
        Ok(Self { slices })
    }

    pub fn bidisc(n: usize) -> Result<Self> {
        Ok(Self {
            slices: vec![PlanarDomain::unit_disc(n)?, PlanarDomain::unit_disc(n)?],
        })
    }

    pub fn tridisc(n: usize) -> Result<Self> {
        Ok(Self {
            slices: vec![
                PlanarDomain::unit_disc(n)?,
                PlanarDomain::unit_disc(n)?,
                PlanarDomain::unit_disc(n)?,
            ],
        })
    }

    pub fn slices(&self) -> &[PlanarDomain] {
        &self.slices
    }

    pub fn slice(&self, j: usize) -> &PlanarDomain {
        &self.slices[j]
    }

    pub fn arity(&self) -> usize {
        self.slices.len()
    }

    /// True iff every component is contained in its slice.
    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.slices.len()
            && self
                .slices
                .iter()
                .zip(z)
                .all(|(slice, &zj)| slice.contains(zj))
    }
}
