//! Boundary Cauchy integral `S_j`, solid Cauchy transform `T_j`, and their
//! compositions on product domains.
//!
//! `S_j` is a spectrally accurate trapezoidal sum over the parametrized
//! boundary. `T_j` subtracts the value (and, when analytic first derivatives
//! are available, the first-order Taylor part) of the integrand at the
//! evaluation point, reduces the subtracted terms to boundary integrals via
//! the Pompeiu identity, and integrates the remaining weakly singular part
//! with the adaptive quadtree.

use crate::error::{Error, Result};
use crate::field::{FieldFunction, Wirtinger};
use crate::geometry::{PlanarDomain, ProductDomain};
use crate::numeric::KahanSum;
use crate::quadtree::QuadTree;
use dashmap::DashMap;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Discretization parameters for both boundary and solid quadrature.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct QuadratureConfig {
    /// Boundary nodes per curve used when constructing domains.
    pub boundary_nodes: usize,
    /// Maximum quadtree cells per solid transform evaluation.
    pub cell_budget: usize,
    /// Cells within `refine_radius_factor * min_cell` of the singular point
    /// are refined to `min_cell`.
    pub refine_radius_factor: f64,
    /// Smallest permitted cell edge.
    pub min_cell: f64,
    /// Relative tolerance targets for the solid transform, by data class.
    pub rel_tol_smooth: f64,
    pub rel_tol_holder: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            boundary_nodes: 512,
            cell_budget: 1 << 20,
            refine_radius_factor: 8.0,
            min_cell: 1e-5,
            rel_tol_smooth: 1e-4,
            rel_tol_holder: 2e-4,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.boundary_nodes < 16 || self.boundary_nodes % 2 != 0 {
            return Err(Error::Config(format!(
                "boundary_nodes must be even and at least 16, got {}",
                self.boundary_nodes
            )));
        }
        if self.cell_budget == 0
            || self.refine_radius_factor <= 0.0
            || self.min_cell <= 0.0
            || self.rel_tol_smooth <= 0.0
            || self.rel_tol_holder <= 0.0
        {
            return Err(Error::Config("quadrature parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Minimum distance from evaluation points to the boundary: five node
/// spacings keeps the periodic trapezoid rule at full accuracy.
pub fn required_standoff(slice: &PlanarDomain) -> f64 {
    5.0 * slice.max_node_spacing()
}

pub fn check_standoff(slice: &PlanarDomain, z: Complex64, slice_index: usize) -> Result<()> {
    let required = required_standoff(slice);
    let dist = slice.min_node_distance(z);
    if dist < required {
        return Err(Error::NearBoundary {
            slice: slice_index,
            dist,
            required,
        });
    }
    Ok(())
}

/// Trapezoidal value of `(1/2πi) ∮ g(ζ)/(ζ−z)^{m+1} dζ` summed over all
/// boundary curves of the slice, times `m!`. `g` may bail out with `None`.
fn boundary_sum_opt<G: FnMut(Complex64) -> Option<Complex64>>(
    slice: &PlanarDomain,
    z: Complex64,
    m: u32,
    mut g: G,
) -> Option<Complex64> {
    let mut acc = KahanSum::new();
    for curve in slice.curves() {
        let n = curve.node_count();
        let w = curve.period() / n as f64;
        let nodes = curve.nodes();
        let derivs = curve.derivative_nodes();
        for k in 0..n {
            let dz = nodes[k] - z;
            let kernel = match m {
                0 => dz.inv(),
                _ => dz.powi(-(m as i32 + 1)),
            };
            acc.add(g(nodes[k])? * derivs[k] * kernel * w);
        }
    }
    let factorial: f64 = (1..=m).map(|v| v as f64).product();
    // 1/(2πi) = -i/(2π)
    Some(acc.value() * Complex64::new(0.0, -factorial / (2.0 * PI)))
}

pub(crate) fn boundary_sum<G: FnMut(Complex64) -> Complex64>(
    slice: &PlanarDomain,
    z: Complex64,
    mut g: G,
) -> Complex64 {
    boundary_sum_opt(slice, z, 0, |zeta| Some(g(zeta))).unwrap()
}

#[inline]
fn with_var(z: &[Complex64], var: usize, zeta: Complex64) -> [Complex64; 3] {
    let mut pt = [Complex64::new(0.0, 0.0); 3];
    pt[..z.len()].copy_from_slice(z);
    pt[var] = zeta;
    pt
}

fn check_point(f: &dyn FieldFunction, domain: &ProductDomain, j: usize, z: &[Complex64]) -> Result<()> {
    let arity = domain.arity();
    if f.arity() != arity || z.len() != arity || j >= arity {
        return Err(Error::InvalidInput(format!(
            "arity mismatch: field {}, domain {}, point {}, variable {}",
            f.arity(),
            arity,
            z.len(),
            j
        )));
    }
    Ok(())
}

/// Boundary Cauchy integral `S_j f(z)`: contour integral over the boundary of
/// slice `j` with the other variables frozen at the components of `z`.
pub fn boundary_cauchy(
    f: &dyn FieldFunction,
    domain: &ProductDomain,
    j: usize,
    z: &[Complex64],
    _cfg: &QuadratureConfig,
) -> Result<Complex64> {
    check_point(f, domain, j, z)?;
    let slice = domain.slice(j);
    check_standoff(slice, z[j], j)?;
    let arity = domain.arity();
    Ok(boundary_sum(slice, z[j], |zeta| {
        f.eval(&with_var(z, j, zeta)[..arity])
    }))
}

/// `T_j 1(z)`, the solid transform of the constant one, reduced to a boundary
/// integral: `z̄ − S[ζ̄](z)`. On a disc centered at `c` this equals `z̄ − c̄`.
pub fn t_one(slice: &PlanarDomain, z: Complex64, _cfg: &QuadratureConfig) -> Result<Complex64> {
    check_standoff(slice, z, 0)?;
    Ok(t_one_inner(slice, z))
}

fn t_one_inner(slice: &PlanarDomain, z: Complex64) -> Complex64 {
    z.conj() - boundary_sum(slice, z, |zeta| zeta.conj())
}

/// `T[ζ−z](z) = −S[ζ̄·(ζ−z)](z)` (Pompeiu identity applied to ζ̄(ζ−z)).
fn t_lin_inner(slice: &PlanarDomain, z: Complex64) -> Complex64 {
    -boundary_sum(slice, z, |zeta| zeta.conj() * (zeta - z))
}

/// `T[conj(ζ−z)](z) = −S[conj(ζ−z)²/2](z)`.
fn t_conj_inner(slice: &PlanarDomain, z: Complex64) -> Complex64 {
    -boundary_sum(slice, z, |zeta| {
        let d = (zeta - z).conj();
        0.5 * d * d
    })
}

/// Solid Cauchy transform of a one-variable section.
///
/// `first_derivs` holds analytic (∂, ∂̄) of the section at `z`, when known;
/// with them the subtraction removes the full first-order Taylor part and the
/// remaining integrand is Lipschitz at the singular point.
fn solid_section(
    slice: &PlanarDomain,
    slice_index: usize,
    z: Complex64,
    value_at_z: Complex64,
    first_derivs: Option<(Complex64, Complex64)>,
    section: &dyn Fn(Complex64) -> Complex64,
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    check_standoff(slice, z, slice_index)?;
    let p0 = value_at_z;
    let (p1, p1b, smooth) = match first_derivs {
        Some((d, db)) => (d, db, true),
        None => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), false),
    };

    let integrand = |zeta: Complex64| {
        let dz = zeta - z;
        if dz.norm_sqr() < 1e-60 {
            return Complex64::new(0.0, 0.0);
        }
        (section(zeta) - p0 - p1 * dz - p1b * dz.conj()) / dz
    };

    let rel_tol = if smooth {
        cfg.rel_tol_smooth
    } else {
        cfg.rel_tol_holder
    };
    let scale = p0.norm() + (p1.norm() + p1b.norm()) * slice.diameter() + 1e-14;
    let ball = cfg.refine_radius_factor * cfg.min_cell;
    let qt = QuadTree::new(slice, cfg.min_cell, cfg.cell_budget, Some((z, ball)));
    let area = qt.integrate(&integrand, rel_tol, scale)?;

    let mut total = -area.value / PI + p0 * t_one_inner(slice, z);
    if smooth {
        total += p1 * t_lin_inner(slice, z) + p1b * t_conj_inner(slice, z);
    }
    Ok(total)
}

/// Solid Cauchy transform `T_j f(z) = −(1/π)∬ f(…ζ…)/(ζ−z_j) dA` in variable
/// `j`, computed by singularity subtraction against `T_j 1`.
pub fn solid_cauchy(
    f: &dyn FieldFunction,
    domain: &ProductDomain,
    j: usize,
    z: &[Complex64],
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    check_point(f, domain, j, z)?;
    let arity = domain.arity();
    let p0 = f.eval(z);
    let derivs = match (
        f.derivative(Wirtinger::d(j), z),
        f.derivative(Wirtinger::dbar(j), z),
    ) {
        (Some(d), Some(db)) => Some((d, db)),
        _ => None,
    };
    let section = move |zeta: Complex64| f.eval(&with_var(z, j, zeta)[..arity]);
    solid_section(domain.slice(j), j, z[j], p0, derivs, &section, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Boundary Cauchy integral `S_j`.
    Boundary,
    /// Solid Cauchy transform `T_j`.
    Solid,
}

type MemoKey = (u64, [u64; 6]);

fn encode_index(idx: Wirtinger) -> u64 {
    let mut tag = 1u64; // distinguish "value" (0) from the zero index
    for v in 0..3 {
        tag = tag << 8 | idx.hol[v] as u64;
        tag = tag << 8 | idx.anti[v] as u64;
    }
    tag
}

fn point_bits(z: &[Complex64]) -> [u64; 6] {
    let mut bits = [0u64; 6];
    for (i, v) in z.iter().enumerate() {
        bits[2 * i] = v.re.to_bits();
        bits[2 * i + 1] = v.im.to_bits();
    }
    bits
}

/// An operator (`S_j` or `T_j`) applied lazily to a field, itself usable as a
/// field. Evaluations are memoized on the exact point bits, so repeated
/// quadrature nodes in outer compositions are computed once; memoization
/// never changes values.
pub struct OperatorField {
    base: Arc<dyn FieldFunction>,
    domain: Arc<ProductDomain>,
    kind: OperatorKind,
    var: usize,
    cfg: QuadratureConfig,
    memo: DashMap<MemoKey, Complex64>,
}

impl OperatorField {
    pub fn new(
        base: Arc<dyn FieldFunction>,
        domain: Arc<ProductDomain>,
        kind: OperatorKind,
        var: usize,
        cfg: QuadratureConfig,
    ) -> Self {
        Self {
            base,
            domain,
            kind,
            var,
            cfg,
            memo: DashMap::new(),
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn var(&self) -> usize {
        self.var
    }

    /// Evaluate with typed errors (the `FieldFunction` impl panics instead).
    pub fn try_eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let key = (0u64, point_bits(z));
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = match self.kind {
            OperatorKind::Boundary => {
                boundary_cauchy(self.base.as_ref(), &self.domain, self.var, z, &self.cfg)?
            }
            OperatorKind::Solid => {
                solid_cauchy(self.base.as_ref(), &self.domain, self.var, z, &self.cfg)?
            }
        };
        self.memo.insert(key, v);
        Ok(v)
    }
}

impl FieldFunction for OperatorField {
    fn arity(&self) -> usize {
        self.base.arity()
    }

    fn derivative_order(&self) -> usize {
        match self.kind {
            OperatorKind::Boundary => self.base.derivative_order(),
            OperatorKind::Solid => 0,
        }
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.try_eval(z)
            .unwrap_or_else(|e| panic!("operator field evaluation failed: {e}"))
    }

    fn derivative(&self, idx: Wirtinger, z: &[Complex64]) -> Option<Complex64> {
        if idx.order() == 0 {
            return Some(self.eval(z));
        }
        match self.kind {
            // No analytic derivatives are claimed for T_j outputs; consumers
            // fall back to finite differences.
            OperatorKind::Solid => None,
            OperatorKind::Boundary => {
                // Holomorphic in the integration variable.
                if idx.anti[self.var] > 0 {
                    return Some(Complex64::new(0.0, 0.0));
                }
                let key = (encode_index(idx), point_bits(z));
                if let Some(v) = self.memo.get(&key) {
                    return Some(*v);
                }
                let m = idx.hol[self.var] as u32;
                let mut rest = idx;
                rest.hol[self.var] = 0;
                let slice = self.domain.slice(self.var);
                check_standoff(slice, z[self.var], self.var).ok()?;
                let arity = self.arity();
                let v = boundary_sum_opt(slice, z[self.var], m, |zeta| {
                    self.base
                        .derivative(rest, &with_var(z, self.var, zeta)[..arity])
                })?;
                self.memo.insert(key, v);
                Some(v)
            }
        }
    }
}

/// Composition `outer ∘ inner` of two single-variable operators acting in
/// distinct variables, evaluated at `z`. The inner operator is wrapped as a
/// lazily memoized field; memoization changes cost, never values.
pub fn compose_ts(
    f: Arc<dyn FieldFunction>,
    domain: Arc<ProductDomain>,
    outer: (OperatorKind, usize),
    inner: (OperatorKind, usize),
    z: &[Complex64],
    cfg: &QuadratureConfig,
) -> Result<Complex64> {
    let field = composed_field(f, domain.clone(), outer, inner, cfg)?;
    for (j, slice) in domain.slices().iter().enumerate() {
        check_standoff(slice, z[j], j)?;
    }
    field.try_eval(z)
}

/// Build the composed operator as a reusable field (outer applied on demand).
pub fn composed_field(
    f: Arc<dyn FieldFunction>,
    domain: Arc<ProductDomain>,
    outer: (OperatorKind, usize),
    inner: (OperatorKind, usize),
    cfg: &QuadratureConfig,
) -> Result<OperatorField> {
    if outer.1 == inner.1 {
        return Err(Error::InvalidInput(
            "composition factors must act in distinct variables".into(),
        ));
    }
    let inner_field = Arc::new(OperatorField::new(
        f,
        domain.clone(),
        inner.0,
        inner.1,
        cfg.clone(),
    ));
    Ok(OperatorField::new(
        inner_field,
        domain,
        outer.0,
        outer.1,
        cfg.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ClosureField;
    use crate::numeric::dbar_fd;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn bidisc(n: usize) -> Arc<ProductDomain> {
        Arc::new(ProductDomain::bidisc(n).unwrap())
    }

    /// f(ζ) = ζ̄ as a field in the first variable, no analytic derivatives.
    fn conj_field_raw() -> ClosureField {
        ClosureField::new(2, |z| z[0].conj())
    }

    fn conj_field_smooth() -> ClosureField {
        let mut f = ClosureField::new(2, |z| z[0].conj());
        for idx in Wirtinger::of_order(1, 2) {
            f = f.with_derivative(idx, move |_| {
                if idx == Wirtinger::dbar(0) {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
        }
        f
    }

    #[test]
    fn boundary_cauchy_constant_is_one() {
        let domain = bidisc(512);
        let f = ClosureField::constant(2, c(1.0, 0.0));
        let z = [c(0.3, 0.1), c(0.0, 0.0)];
        let v = boundary_cauchy(&f, &domain, 0, &z, &cfg()).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn boundary_cauchy_conjugate_vanishes_on_disc() {
        // Residue oracle: ζ̄ = 1/ζ on |ζ| = 1; residues at 0 and z cancel.
        let domain = bidisc(512);
        let f = conj_field_raw();
        let z = [c(0.5, 0.0), c(0.0, 0.0)];
        let v = boundary_cauchy(&f, &domain, 0, &z, &cfg()).unwrap();
        assert!(v.norm() < 1e-10, "got {v}");
    }

    #[test]
    fn boundary_cauchy_reproduces_polynomials() {
        let domain = bidisc(512);
        for deg in 0..=6 {
            let f = ClosureField::new(2, move |z| z[0].powu(deg));
            for &z0 in &[c(0.2, -0.4), c(0.7, 0.3), c(-0.79, 0.0)] {
                let z = [z0, c(0.0, 0.0)];
                let v = boundary_cauchy(&f, &domain, 0, &z, &cfg()).unwrap();
                assert!(
                    (v - z0.powu(deg)).norm() < 1e-8,
                    "deg {deg} at {z0}: {v}"
                );
            }
        }
    }

    #[test]
    fn boundary_cauchy_is_holomorphic_in_z() {
        let domain = bidisc(512);
        let f = ClosureField::new(2, |z| z[0].conj() * z[0] + c(0.3, 0.0) * z[0]);
        let sec = |z0: Complex64| {
            boundary_cauchy(&f, &domain, 0, &[z0, c(0.0, 0.0)], &cfg()).unwrap()
        };
        let z0 = c(0.35, -0.2);
        let db = dbar_fd(&sec, z0, 1e-4);
        let mag = sec(z0).norm().max(1.0);
        assert!(db.norm() / mag < 1e-6, "dbar {db}");
    }

    #[test]
    fn boundary_cauchy_rejects_near_boundary_points() {
        let domain = bidisc(512);
        let f = ClosureField::constant(2, c(1.0, 0.0));
        let z = [c(0.999, 0.0), c(0.0, 0.0)];
        match boundary_cauchy(&f, &domain, 0, &z, &cfg()) {
            Err(Error::NearBoundary { .. }) => {}
            other => panic!("expected near-boundary error, got {other:?}"),
        }
    }

    #[test]
    fn boundary_convergence_is_spectral() {
        // Error on analytic data drops at least 10x per node doubling until
        // the floating-point floor. A pole just outside the disc keeps the
        // decay rate visible instead of instantly hitting the floor.
        let pole = c(1.05, 0.0);
        let f = ClosureField::new(2, move |z| (z[0] - pole).inv());
        let z0 = c(0.3, 0.2);
        let exact = (z0 - pole).inv();
        let mut errors = Vec::new();
        for n in [64usize, 128, 256, 512, 1024] {
            let domain = bidisc(n);
            let v = boundary_cauchy(&f, &domain, 0, &[z0, c(0.0, 0.0)], &cfg()).unwrap();
            errors.push((v - exact).norm());
        }
        for w in errors.windows(2) {
            if w[0] > 1e-12 {
                assert!(w[1] < w[0] / 10.0, "errors {errors:?}");
            }
        }
        assert!(*errors.last().unwrap() <= 1e-12, "errors {errors:?}");
    }

    #[test]
    fn t_one_is_conjugate_on_unit_disc() {
        let disc = PlanarDomain::unit_disc(512).unwrap();
        for &z in &[c(0.0, 0.0), c(0.3, 0.1), c(-0.6, 0.55), c(0.0, -0.85)] {
            let v = t_one(&disc, z, &cfg()).unwrap();
            assert!((v - z.conj()).norm() < 1e-12, "at {z}: {v}");
        }
    }

    #[test]
    fn t_one_on_shifted_disc() {
        // Residue oracle: ζ̄ = c̄ + R²/(ζ−c) on the circle gives T1 = z̄ − c̄.
        let center = c(1.0, -0.5);
        let disc = PlanarDomain::disc(center, 2.0, 512).unwrap();
        let z = c(1.4, 0.2);
        let v = t_one(&disc, z, &cfg()).unwrap();
        assert!((v - (z.conj() - center.conj())).norm() < 1e-11, "{v}");
    }

    #[test]
    fn t_one_dbar_is_one_on_ellipse() {
        let e = PlanarDomain::ellipse(c(0.0, 0.0), 1.4, 0.9, 512).unwrap();
        let g = |z: Complex64| t_one(&e, z, &cfg()).unwrap();
        let db = dbar_fd(&g, c(0.2, 0.1), 1e-4);
        assert!((db - c(1.0, 0.0)).norm() < 1e-3, "dbar T1 = {db}");
    }

    #[test]
    fn solid_cauchy_of_zero_and_constant() {
        let domain = bidisc(512);
        let zero = ClosureField::zero(2);
        let z = [c(0.3, 0.0), c(0.0, 0.0)];
        let v = solid_cauchy(&zero, &domain, 0, &z, &cfg()).unwrap();
        assert_eq!(v, c(0.0, 0.0));

        let one = ClosureField::constant(2, c(1.0, 0.0));
        let v = solid_cauchy(&one, &domain, 0, &z, &cfg()).unwrap();
        assert!((v - c(0.3, 0.0)).norm() < 1e-12, "{v}");
    }

    #[test]
    fn solid_cauchy_conjugate_black_box() {
        // Pompeiu oracle: T[ζ̄](z) = z̄²/2 on the unit disc. The field carries
        // no derivative evaluators, so this exercises the genuinely adaptive
        // weakly-singular path.
        let domain = bidisc(512);
        let f = conj_field_raw();
        for &z0 in &[c(0.4, 0.2), c(-0.3, 0.5), c(0.1, 0.0)] {
            let z = [z0, c(0.0, 0.0)];
            let v = solid_cauchy(&f, &domain, 0, &z, &cfg()).unwrap();
            let exact = 0.5 * z0.conj() * z0.conj();
            assert!(
                (v - exact).norm() < 1e-3 * exact.norm().max(0.1),
                "at {z0}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn solid_cauchy_conjugate_with_derivatives_is_exact() {
        // With analytic first derivatives the subtracted integrand vanishes
        // identically and only boundary sums remain.
        let domain = bidisc(512);
        let f = conj_field_smooth();
        let z0 = c(0.4, 0.2);
        let v = solid_cauchy(&f, &domain, 0, &[z0, c(0.0, 0.0)], &cfg()).unwrap();
        let exact = 0.5 * z0.conj() * z0.conj();
        assert!((v - exact).norm() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn solid_cauchy_conjugate_squared() {
        // T[ζ̄²](z) = z̄³/3 on the unit disc (the boundary term S[ζ̄³] vanishes
        // by residues). Quadratic data leaves a genuine area integral after
        // first-order subtraction.
        let mut f = ClosureField::new(2, |z| z[0].conj() * z[0].conj());
        for idx in Wirtinger::of_order(1, 2) {
            f = f.with_derivative(idx, move |z| {
                if idx == Wirtinger::dbar(0) {
                    2.0 * z[0].conj()
                } else {
                    c(0.0, 0.0)
                }
            });
        }
        let domain = bidisc(512);
        for &z0 in &[c(0.4, 0.2), c(-0.25, -0.5)] {
            let v = solid_cauchy(&f, &domain, 0, &[z0, c(0.0, 0.0)], &cfg()).unwrap();
            let exact = z0.conj().powu(3) / 3.0;
            assert!(
                (v - exact).norm() < 2e-4,
                "at {z0}: {v} vs {exact} (err {:.2e})",
                (v - exact).norm()
            );
        }
    }

    #[test]
    fn dbar_of_solid_cauchy_recovers_data() {
        // ∂̄_j T_j f = f, checked with central differences on smooth data.
        let mut f = ClosureField::new(2, |z| z[0].conj() * z[0].conj());
        for idx in Wirtinger::of_order(1, 2) {
            f = f.with_derivative(idx, move |z| {
                if idx == Wirtinger::dbar(0) {
                    2.0 * z[0].conj()
                } else {
                    c(0.0, 0.0)
                }
            });
        }
        let domain = bidisc(512);
        let config = cfg();
        let u = |z0: Complex64| {
            solid_cauchy(&f, &domain, 0, &[z0, c(0.0, 0.0)], &config).unwrap()
        };
        for &z0 in &[c(0.4, 0.2), c(-0.3, 0.1)] {
            let db = dbar_fd(&u, z0, 1e-4);
            let expect = f.eval(&[z0, c(0.0, 0.0)]);
            let rel = (db - expect).norm() / expect.norm();
            assert!(rel < 1e-2, "at {z0}: dbar {db} vs {expect} (rel {rel:.2e})");
        }
    }

    #[test]
    fn pompeiu_identity_for_modulus_squared() {
        // S[ζζ̄] + T[ζ] = zz̄ on the unit disc.
        let domain = bidisc(512);
        let f = ClosureField::new(2, |z| z[0] * z[0].conj());
        let mut df = ClosureField::new(2, |z| z[0]);
        for idx in Wirtinger::of_order(1, 2) {
            df = df.with_derivative(idx, move |_| {
                if idx == Wirtinger::d(0) {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
        }
        let z = [c(0.45, -0.3), c(0.0, 0.0)];
        let s = boundary_cauchy(&f, &domain, 0, &z, &cfg()).unwrap();
        let t = solid_cauchy(&df, &domain, 0, &z, &cfg()).unwrap();
        let expect = z[0] * z[0].conj();
        assert!((s + t - expect).norm() < 1e-3, "{}", (s + t - expect).norm());
        // The oracle triangle: T[ζ](z) individually equals zz̄ − 1.
        assert!((t - (expect - c(1.0, 0.0))).norm() < 1e-3);
    }

    #[test]
    fn compose_s1_t2_of_constant() {
        // T₂1 = z̄₂ is constant in z₁, and S₁ of a z₁-constant reproduces it.
        let domain = bidisc(512);
        let one: Arc<dyn FieldFunction> = Arc::new(ClosureField::constant(2, c(1.0, 0.0)));
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let v = compose_ts(
            one,
            domain.clone(),
            (OperatorKind::Boundary, 0),
            (OperatorKind::Solid, 1),
            &z,
            &cfg(),
        )
        .unwrap();
        assert!((v - z[1].conj()).norm() < 1e-10, "{v}");
    }

    #[test]
    fn compose_t2_s1_factorizes_for_z1_data() {
        // f depending only on ζ₁ makes S₁f constant in ζ₂, so T₂S₁f = z̄₂·S₁f.
        let domain = bidisc(512);
        let f: Arc<dyn FieldFunction> = Arc::new(
            ClosureField::new(2, |z| z[0] * z[0] + c(0.2, 0.0))
                .with_zero_derivative(Wirtinger::dbar(0))
                .with_zero_derivative(Wirtinger::dbar(1))
                .with_zero_derivative(Wirtinger::d(1))
                .with_derivative(Wirtinger::d(0), |z| 2.0 * z[0]),
        );
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let v = compose_ts(
            f,
            domain.clone(),
            (OperatorKind::Solid, 1),
            (OperatorKind::Boundary, 0),
            &z,
            &cfg(),
        )
        .unwrap();
        let s1f = z[0] * z[0] + c(0.2, 0.0); // Cauchy reproduction of holomorphic data
        let expect = z[1].conj() * s1f;
        assert!((v - expect).norm() < 1e-9, "{v} vs {expect}");
    }

    #[test]
    fn compose_of_zero_is_zero() {
        let domain = bidisc(256);
        let zero: Arc<dyn FieldFunction> = Arc::new(ClosureField::zero(2));
        let z = [c(0.2, 0.0), c(0.1, 0.3)];
        let v = compose_ts(
            zero,
            domain,
            (OperatorKind::Solid, 1),
            (OperatorKind::Boundary, 0),
            &z,
            &cfg(),
        )
        .unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn operator_field_kernel_derivative() {
        // ∂_z S f for holomorphic f equals f' by Cauchy's differentiated
        // formula.
        let domain = bidisc(512);
        let f: Arc<dyn FieldFunction> = Arc::new(
            ClosureField::new(2, |z| z[0].powu(3)).with_derivative(Wirtinger::d(0), |z| {
                3.0 * z[0] * z[0]
            }),
        );
        let field = OperatorField::new(
            f,
            domain.clone(),
            OperatorKind::Boundary,
            0,
            cfg(),
        );
        let z = [c(0.4, -0.1), c(0.0, 0.0)];
        let d = field.derivative(Wirtinger::d(0), &z).unwrap();
        let expect = 3.0 * z[0] * z[0];
        assert!((d - expect).norm() < 1e-9, "{d} vs {expect}");
        let db = field.derivative(Wirtinger::dbar(0), &z).unwrap();
        assert_eq!(db, c(0.0, 0.0));
    }
}
