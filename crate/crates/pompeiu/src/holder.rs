//! Sampled Hölder semi-norms, directional semi-norms and C^{k,α} norms.
//!
//! All estimates are suprema over finite pair sets, hence lower bounds of the
//! continuum quantities. Directional estimates are accumulated along the
//! axis-parallel legs of every pair, which makes the sampled triangle
//! inequality `full ≤ Σ_j directional` hold by construction.

use crate::error::{Error, Result};
use crate::field::{wirtinger_derivative, FieldFunction, Wirtinger};
use crate::geometry::ProductDomain;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Product-domain point, padded to three slots.
pub type Pt = [Complex64; 3];

pub fn pt2(z1: Complex64, z2: Complex64) -> Pt {
    [z1, z2, Complex64::new(0.0, 0.0)]
}

pub fn pt3(z1: Complex64, z2: Complex64, z3: Complex64) -> Pt {
    [z1, z2, z3]
}

fn dist(a: &Pt, b: &Pt, arity: usize) -> f64 {
    (0..arity)
        .map(|j| (a[j] - b[j]).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn point_json(p: &Pt, arity: usize) -> Vec<[f64; 2]> {
    (0..arity).map(|j| [p[j].re, p[j].im]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairScheme {
    GridAllPairs,
    DyadicNearDiagonal,
    Directional(usize),
}

/// Finite set of distinct point pairs inside a product domain.
#[derive(Clone, Debug)]
pub struct PairSet {
    pub arity: usize,
    pub pairs: Vec<(Pt, Pt)>,
    pub scheme: PairScheme,
}

impl PairSet {
    /// All pairs of a coarse product grid (at most `cap` grid points).
    pub fn grid_all_pairs(
        domain: &ProductDomain,
        spacing: f64,
        standoff: f64,
        cap: usize,
    ) -> Result<Self> {
        let points = product_grid(domain, spacing, standoff, cap)?;
        let mut pairs = Vec::new();
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                pairs.push((points[i], points[j]));
            }
        }
        if pairs.is_empty() {
            return Err(Error::InvalidInput(
                "grid produced fewer than two points".into(),
            ));
        }
        Ok(Self {
            arity: domain.arity(),
            pairs,
            scheme: PairScheme::GridAllPairs,
        })
    }

    /// Dyadic pairs `(a, a + 2^{-m} e)` along variable `var`, anchored at a
    /// hotspot. Pairs whose members leave the domain (with `standoff`) are
    /// dropped.
    pub fn dyadic(
        domain: &ProductDomain,
        anchor: Pt,
        var: usize,
        direction: Complex64,
        m_range: std::ops::RangeInclusive<u32>,
        standoff: f64,
    ) -> Result<Self> {
        let e = direction / direction.norm();
        let arity = domain.arity();
        let admissible = |p: &Pt| {
            (0..arity).all(|j| {
                domain.slice(j).contains(p[j]) && domain.slice(j).min_node_distance(p[j]) >= standoff
            })
        };
        let mut pairs = Vec::new();
        for m in m_range {
            let mut b = anchor;
            b[var] += e * 2.0_f64.powi(-(m as i32));
            if admissible(&anchor) && admissible(&b) {
                pairs.push((anchor, b));
            }
        }
        if pairs.is_empty() {
            return Err(Error::InvalidInput(
                "no dyadic pair survives the standoff constraint".into(),
            ));
        }
        Ok(Self {
            arity,
            pairs,
            scheme: PairScheme::DyadicNearDiagonal,
        })
    }

    /// Pairs varying only in variable `var`: every `moving` pair is attached
    /// to every point of `fixed`.
    pub fn directional(
        arity: usize,
        var: usize,
        fixed: &[Pt],
        moving: &[(Complex64, Complex64)],
    ) -> Self {
        let mut pairs = Vec::new();
        for base in fixed {
            for &(a, b) in moving {
                let mut pa = *base;
                let mut pb = *base;
                pa[var] = a;
                pb[var] = b;
                pairs.push((pa, pb));
            }
        }
        Self {
            arity,
            pairs,
            scheme: PairScheme::Directional(var),
        }
    }

    pub fn merged(mut self, other: PairSet) -> Self {
        self.pairs.extend(other.pairs);
        self
    }
}

/// Deterministic product grid: per-slice interior grids, evenly subsampled so
/// the product holds at most `cap` points, combined row-major.
pub fn product_grid(
    domain: &ProductDomain,
    spacing: f64,
    standoff: f64,
    cap: usize,
) -> Result<Vec<Pt>> {
    let arity = domain.arity();
    let per_slice_cap = (cap as f64).powf(1.0 / arity as f64).floor().max(1.0) as usize;
    let mut slices = Vec::with_capacity(arity);
    for j in 0..arity {
        let grid = domain.slice(j).interior_grid(spacing, standoff)?;
        slices.push(subsample(grid, per_slice_cap));
    }
    let mut out = Vec::new();
    match arity {
        2 => {
            for &a in &slices[0] {
                for &b in &slices[1] {
                    out.push(pt2(a, b));
                }
            }
        }
        3 => {
            for &a in &slices[0] {
                for &b in &slices[1] {
                    for &c in &slices[2] {
                        out.push(pt3(a, b, c));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(out)
}

fn subsample(points: Vec<Complex64>, cap: usize) -> Vec<Complex64> {
    if points.len() <= cap {
        return points;
    }
    let stride = points.len() as f64 / cap as f64;
    (0..cap)
        .map(|i| points[(i as f64 * stride) as usize])
        .collect()
}

/// Sampled semi-norm estimates with the pair set that produced them.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub full: f64,
    pub per_direction: Vec<f64>,
    pub argmax_pair: [Vec<[f64; 2]>; 2],
    pub pair_count: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Sampled Hölder semi-norm of `f` over a pair set.
///
/// Directional entries are fed by the axis-parallel legs of each pair (the
/// pair is decomposed through corner points), so the report always satisfies
/// `full ≤ Σ_j per_direction + 1e-9`.
pub fn holder_seminorm(
    f: &dyn FieldFunction,
    pairs: &PairSet,
    alpha: f64,
) -> Result<HolderReport> {
    check_alpha(alpha)?;
    if pairs.pairs.is_empty() {
        return Err(Error::InvalidInput("empty pair set".into()));
    }
    let arity = pairs.arity;
    let mut full: f64 = 0.0;
    let mut argmax = pairs.pairs[0];
    let mut per_direction = vec![0.0_f64; arity];

    for (a, b) in &pairs.pairs {
        let d = dist(a, b, arity);
        if d == 0.0 {
            continue;
        }
        let fa = f.eval(&a[..arity]);
        let fb = f.eval(&b[..arity]);
        let q = (fa - fb).norm() / d.powf(alpha);
        if q > full {
            full = q;
            argmax = (*a, *b);
        }

        // Walk from a to b one variable at a time; each leg feeds the
        // corresponding directional supremum.
        let mut prev = *a;
        let mut f_prev = fa;
        for j in 0..arity {
            if a[j] == b[j] {
                continue;
            }
            let mut next = prev;
            next[j] = b[j];
            let f_next = if next == *b { fb } else { f.eval(&next[..arity]) };
            let leg = (b[j] - a[j]).norm();
            let qj = (f_next - f_prev).norm() / leg.powf(alpha);
            if qj > per_direction[j] {
                per_direction[j] = qj;
            }
            prev = next;
            f_prev = f_next;
        }
    }

    Ok(HolderReport {
        alpha,
        full,
        per_direction,
        argmax_pair: [point_json(&argmax.0, arity), point_json(&argmax.1, arity)],
        pair_count: pairs.pairs.len(),
    })
}

/// Directional semi-norm: supremum over `fixed_grid` of the sampled quotient
/// along variable `var` over `moving_pairs`.
pub fn directional_seminorm(
    f: &dyn FieldFunction,
    domain: &ProductDomain,
    var: usize,
    alpha: f64,
    fixed_grid: &[Pt],
    moving_pairs: &[(Complex64, Complex64)],
) -> Result<f64> {
    check_alpha(alpha)?;
    if var >= domain.arity() {
        return Err(Error::InvalidInput(format!(
            "variable index {var} out of range for arity {}",
            domain.arity()
        )));
    }
    if fixed_grid.is_empty() || moving_pairs.is_empty() {
        return Err(Error::InvalidInput("empty grid or pair list".into()));
    }
    let arity = domain.arity();
    let mut sup: f64 = 0.0;
    for base in fixed_grid {
        for &(a, b) in moving_pairs {
            let d = (a - b).norm();
            if d == 0.0 {
                continue;
            }
            let mut pa = *base;
            let mut pb = *base;
            pa[var] = a;
            pb[var] = b;
            let q = (f.eval(&pa[..arity]) - f.eval(&pb[..arity])).norm() / d.powf(alpha);
            sup = sup.max(q);
        }
    }
    Ok(sup)
}

/// Sampled C^{k,α} norm: sup of |D^β f| over the grid for |β| ≤ k, plus the
/// sampled α-semi-norm of every order-k derivative over the pair set.
///
/// Derivatives use analytic evaluators when supplied and central differences
/// otherwise; the fallback is limited to k ≤ 2.
pub fn ck_alpha_norm(
    f: &dyn FieldFunction,
    domain: &ProductDomain,
    k: usize,
    alpha: f64,
    grid: &[Pt],
    pairs: &PairSet,
    h_fd: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if k > 2 && f.derivative_order() < k {
        return Err(Error::InvalidInput(format!(
            "k = {k} requires analytic derivatives (declared order {})",
            f.derivative_order()
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let arity = domain.arity();
    let mut norm = 0.0;
    for order in 0..=k {
        let mut sup: f64 = 0.0;
        for idx in Wirtinger::of_order(order, arity) {
            for p in grid {
                sup = sup.max(wirtinger_derivative(f, idx, &p[..arity], h_fd).norm());
            }
        }
        norm += sup;
    }
    for idx in Wirtinger::of_order(k, arity) {
        let mut sup: f64 = 0.0;
        for (a, b) in &pairs.pairs {
            let d = dist(a, b, arity);
            if d == 0.0 {
                continue;
            }
            let da = wirtinger_derivative(f, idx, &a[..arity], h_fd);
            let db = wirtinger_derivative(f, idx, &b[..arity], h_fd);
            sup = sup.max((da - db).norm() / d.powf(alpha));
        }
        norm += sup;
    }
    Ok(norm)
}
