//! Black-box complex-valued functions on product domains, with optional
//! analytic Wirtinger derivatives.

use crate::numeric::{d_fd, dbar_fd};
use num_complex::Complex64;
use std::sync::Arc;

/// Wirtinger multi-index: per-variable powers of ∂ and ∂̄ (up to 3 variables).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Wirtinger {
    pub hol: [u8; 3],
    pub anti: [u8; 3],
}

impl Wirtinger {
    pub const ZERO: Wirtinger = Wirtinger {
        hol: [0; 3],
        anti: [0; 3],
    };

    /// First-order ∂ in variable `j`.
    pub fn d(j: usize) -> Self {
        let mut idx = Self::ZERO;
        idx.hol[j] = 1;
        idx
    }

    /// First-order ∂̄ in variable `j`.
    pub fn dbar(j: usize) -> Self {
        let mut idx = Self::ZERO;
        idx.anti[j] = 1;
        idx
    }

    pub fn order(&self) -> usize {
        self.hol.iter().chain(self.anti.iter()).map(|&v| v as usize).sum()
    }

    /// Compose two indices (derivatives commute on smooth functions).
    pub fn then(&self, other: Wirtinger) -> Self {
        let mut out = *self;
        for v in 0..3 {
            out.hol[v] += other.hol[v];
            out.anti[v] += other.anti[v];
        }
        out
    }

    /// All indices of exact order `k` touching only the first `arity` variables.
    pub fn of_order(k: usize, arity: usize) -> Vec<Wirtinger> {
        let basis: Vec<Wirtinger> = (0..arity)
            .flat_map(|j| [Wirtinger::d(j), Wirtinger::dbar(j)])
            .collect();
        let mut out = vec![Wirtinger::ZERO];
        for _ in 0..k {
            let mut next = std::collections::BTreeSet::new();
            for idx in &out {
                for b in &basis {
                    let composed = idx.then(*b);
                    next.insert((composed.hol, composed.anti));
                }
            }
            out = next
                .into_iter()
                .map(|(hol, anti)| Wirtinger { hol, anti })
                .collect();
        }
        out
    }
}

/// A deterministic evaluator of a complex function on a product domain.
///
/// `derivative` returns `None` when the requested analytic derivative is not
/// supplied; callers fall back to finite differences where the contract
/// permits (order ≤ 2).
pub trait FieldFunction: Send + Sync {
    fn arity(&self) -> usize;

    fn eval(&self, z: &[Complex64]) -> Complex64;

    /// Highest order for which a complete set of analytic derivatives exists.
    fn derivative_order(&self) -> usize {
        0
    }

    fn derivative(&self, idx: Wirtinger, z: &[Complex64]) -> Option<Complex64> {
        if idx.order() == 0 {
            Some(self.eval(z))
        } else {
            None
        }
    }
}

/// Evaluate a Wirtinger derivative, preferring analytic evaluators and
/// falling back to nested central differences (supported through order 2).
pub fn wirtinger_derivative(
    f: &dyn FieldFunction,
    idx: Wirtinger,
    z: &[Complex64],
    h_fd: f64,
) -> Complex64 {
    if let Some(v) = f.derivative(idx, z) {
        return v;
    }
    // Peel one factor off and recurse on the rest.
    for j in 0..f.arity() {
        if idx.hol[j] > 0 || idx.anti[j] > 0 {
            let anti = idx.anti[j] > 0 && idx.hol[j] == 0;
            let mut rest = idx;
            if anti {
                rest.anti[j] -= 1;
            } else {
                rest.hol[j] -= 1;
            }
            let inner = |zj: Complex64| {
                let mut w = z.to_vec();
                w[j] = zj;
                wirtinger_derivative(f, rest, &w, h_fd)
            };
            return if anti {
                dbar_fd(&inner, z[j], h_fd)
            } else {
                d_fd(&inner, z[j], h_fd)
            };
        }
    }
    f.eval(z)
}

type EvalFn = Arc<dyn Fn(&[Complex64]) -> Complex64 + Send + Sync>;

/// Field backed by closures, with registered analytic derivatives.
#[derive(Clone)]
pub struct ClosureField {
    arity: usize,
    order: usize,
    eval: EvalFn,
    derivs: Vec<(Wirtinger, EvalFn)>,
}

impl ClosureField {
    pub fn new<F>(arity: usize, eval: F) -> Self
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            arity,
            order: 0,
            eval: Arc::new(eval),
            derivs: Vec::new(),
        }
    }

    /// Register an analytic derivative evaluator.
    pub fn with_derivative<F>(mut self, idx: Wirtinger, eval: F) -> Self
    where
        F: Fn(&[Complex64]) -> Complex64 + Send + Sync + 'static,
    {
        debug_assert!(idx.order() > 0);
        self.derivs.push((idx, Arc::new(eval)));
        self.recompute_order();
        self
    }

    /// Constant-zero derivative, common for holomorphic or one-variable data.
    pub fn with_zero_derivative(self, idx: Wirtinger) -> Self {
        self.with_derivative(idx, |_| Complex64::new(0.0, 0.0))
    }

    fn recompute_order(&mut self) {
        // Declared order = largest k for which every index of order ≤ k is
        // registered.
        let mut k = 0;
        'outer: loop {
            for idx in Wirtinger::of_order(k + 1, self.arity) {
                if !self.derivs.iter().any(|(i, _)| *i == idx) {
                    break 'outer;
                }
            }
            k += 1;
        }
        self.order = k;
    }

    pub fn constant(arity: usize, value: Complex64) -> Self {
        let mut field = Self::new(arity, move |_| value);
        for idx in Wirtinger::of_order(1, arity) {
            field = field.with_zero_derivative(idx);
        }
        for idx in Wirtinger::of_order(2, arity) {
            field = field.with_zero_derivative(idx);
        }
        field
    }

    pub fn zero(arity: usize) -> Self {
        Self::constant(arity, Complex64::new(0.0, 0.0))
    }
}

impl FieldFunction for ClosureField {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, z: &[Complex64]) -> Complex64 {
        (self.eval)(z)
    }

    fn derivative_order(&self) -> usize {
        self.order
    }

    fn derivative(&self, idx: Wirtinger, z: &[Complex64]) -> Option<Complex64> {
        if idx.order() == 0 {
            return Some(self.eval(z));
        }
        self.derivs
            .iter()
            .find(|(i, _)| *i == idx)
            .map(|(_, f)| f(z))
    }
}

/// One-variable section of a field: all variables but `var` frozen.
pub struct Section<'a> {
    field: &'a dyn FieldFunction,
    var: usize,
    frozen: Vec<Complex64>,
}

impl<'a> Section<'a> {
    pub fn new(field: &'a dyn FieldFunction, var: usize, at: &[Complex64]) -> Self {
        debug_assert!(var < field.arity());
        Self {
            field,
            var,
            frozen: at.to_vec(),
        }
    }

    #[inline]
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        let mut z = self.frozen.clone();
        z[self.var] = zeta;
        self.field.eval(&z)
    }

    /// Analytic first derivatives (∂, ∂̄) in the section variable, if present.
    pub fn first_derivatives(&self, zeta: Complex64) -> Option<(Complex64, Complex64)> {
        let mut z = self.frozen.clone();
        z[self.var] = zeta;
        let d = self.field.derivative(Wirtinger::d(self.var), &z)?;
        let db = self.field.derivative(Wirtinger::dbar(self.var), &z)?;
        Some((d, db))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn wirtinger_order_enumeration() {
        assert_eq!(Wirtinger::of_order(0, 2).len(), 1);
        assert_eq!(Wirtinger::of_order(1, 2).len(), 4);
        assert_eq!(Wirtinger::of_order(2, 2).len(), 10);
        assert_eq!(Wirtinger::of_order(1, 3).len(), 6);
    }

    #[test]
    fn closure_field_order_detection() {
        let f = ClosureField::new(2, |z| z[0].conj() * z[1].conj());
        assert_eq!(f.derivative_order(), 0);

        let mut g = ClosureField::new(2, |z| z[0].conj() * z[1].conj());
        for idx in Wirtinger::of_order(1, 2) {
            g = g.with_derivative(idx, move |z| {
                if idx == Wirtinger::dbar(0) {
                    z[1].conj()
                } else if idx == Wirtinger::dbar(1) {
                    z[0].conj()
                } else {
                    c(0.0, 0.0)
                }
            });
        }
        assert_eq!(g.derivative_order(), 1);
    }

    #[test]
    fn fd_fallback_matches_analytic() {
        // f = z̄₁² z₂: ∂̄₁f = 2z̄₁z₂, ∂₂f = z̄₁², ∂̄₁∂̄₁f = 2z₂.
        let f = ClosureField::new(2, |z| z[0].conj() * z[0].conj() * z[1]);
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let h = 1e-5;
        let db1 = wirtinger_derivative(&f, Wirtinger::dbar(0), &z, h);
        assert!((db1 - 2.0 * z[0].conj() * z[1]).norm() < 1e-9);
        let d2 = wirtinger_derivative(&f, Wirtinger::d(1), &z, h);
        assert!((d2 - z[0].conj() * z[0].conj()).norm() < 1e-9);
        let db1db1 = wirtinger_derivative(&f, Wirtinger::dbar(0).then(Wirtinger::dbar(0)), &z, 1e-4);
        assert!((db1db1 - 2.0 * z[1]).norm() < 1e-6);
    }

    #[test]
    fn section_freezes_other_variables() {
        let f = ClosureField::new(2, |z| z[0] + 10.0 * z[1]);
        let sec = Section::new(&f, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(sec.eval(c(2.0, 0.0)), c(21.0, 0.0));
    }
}
