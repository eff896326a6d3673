//! Adaptive quadtree quadrature over a planar slice.
//!
//! Cells fully outside the slice are discarded. Cells crossing the boundary
//! are clipped against the local tangent line of the nearest boundary
//! segment (their error estimate decays ~s³, so the boundary band stays
//! cheap), refined at most down to `min_cell`, and the clipped fraction is
//! sampled at the clipped centroid so the integrand is never evaluated
//! outside the domain. Interior cells refine on a two-level estimate.
//!
//! Refinement order is a deterministic priority queue and the final sum runs
//! over leaves sorted by cell id, so results are bit-reproducible and
//! independent of thread count.

use crate::error::{Error, Result};
use crate::geometry::PlanarDomain;
use crate::numeric::KahanSum;
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct CellId {
    level: u8,
    ix: u32,
    iy: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Class {
    Outside,
    Inside,
    /// Crossing a single boundary component within its tubular neighborhood;
    /// carries the component index and a nearest-node hint.
    CrossLocal(u32, u32),
    /// Crossing at a scale too coarse for the local test.
    CrossCoarse,
}

#[derive(Clone, Debug)]
struct Cell {
    id: CellId,
    class: Class,
    value: Complex64,
    est: f64,
    forced: bool,
    child_class: [Class; 4],
    child_value: [Complex64; 4],
}

impl Eq for Cell {}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: forced cells first, then largest estimate, ties by id.
        self.forced
            .cmp(&other.forced)
            .then(self.est.total_cmp(&other.est))
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub est: f64,
    pub cells: usize,
}

/// Clip the square (center, half width) against the left half-plane of the
/// directed segment (base, dir); returns (area fraction, clipped centroid).
fn clip_square(center: Complex64, half: f64, base: Complex64, dir: Complex64) -> (f64, Complex64) {
    let corners = [
        center + Complex64::new(-half, -half),
        center + Complex64::new(half, -half),
        center + Complex64::new(half, half),
        center + Complex64::new(-half, half),
    ];
    let side = |p: Complex64| dir.re * (p - base).im - dir.im * (p - base).re;
    let mut poly: Vec<(Complex64, f64)> = Vec::with_capacity(8);
    for i in 0..4 {
        let (p, q) = (corners[i], corners[(i + 1) % 4]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            poly.push((p, sp));
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let t = sp / (sp - sq);
            poly.push((p + (q - p) * t, 0.0));
        }
    }
    if poly.len() < 3 {
        return (0.0, center);
    }
    let mut area2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..poly.len() {
        let a = poly[i].0;
        let b = poly[(i + 1) % poly.len()].0;
        let w = a.re * b.im - b.re * a.im;
        area2 += w;
        cx += (a.re + b.re) * w;
        cy += (a.im + b.im) * w;
    }
    if area2.abs() < 1e-300 {
        return (0.0, center);
    }
    let centroid = Complex64::new(cx / (3.0 * area2), cy / (3.0 * area2));
    let frac = (area2 / (8.0 * half * half)).clamp(0.0, 1.0);
    (frac, centroid)
}

pub struct QuadTree<'a> {
    slice: &'a PlanarDomain,
    root_center: Complex64,
    root_size: f64,
    min_cell: f64,
    cell_budget: usize,
    /// Cells within this distance of the singular point refine to `min_cell`.
    forced_center: Option<(Complex64, f64)>,
    /// Refine uniformly to this level and skip adaptivity (testing hook that
    /// makes the quadrature a fixed linear functional).
    pub fixed_level: Option<u8>,
}

const SEED_LEVEL: u8 = 4;
const MAX_LEVEL: u8 = 40;

impl<'a> QuadTree<'a> {
    pub fn new(
        slice: &'a PlanarDomain,
        min_cell: f64,
        cell_budget: usize,
        forced_center: Option<(Complex64, f64)>,
    ) -> Self {
        let (lo, hi) = slice.bounding_box();
        let root_center = 0.5 * (lo + hi);
        let root_size = (hi.re - lo.re).max(hi.im - lo.im) * (1.0 + 1e-9);
        Self {
            slice,
            root_center,
            root_size,
            min_cell,
            cell_budget,
            forced_center,
            fixed_level: None,
        }
    }

    #[inline]
    fn cell_size(&self, level: u8) -> f64 {
        self.root_size / (1u64 << level) as f64
    }

    #[inline]
    fn cell_center(&self, id: CellId) -> Complex64 {
        let s = self.cell_size(id.level);
        let origin = self.root_center - Complex64::new(0.5 * self.root_size, 0.5 * self.root_size);
        origin + Complex64::new((id.ix as f64 + 0.5) * s, (id.iy as f64 + 0.5) * s)
    }

    fn classify_root(&self, id: CellId) -> Class {
        let center = self.cell_center(id);
        let size = self.cell_size(id.level);
        let half_diag = size * std::f64::consts::FRAC_1_SQRT_2;
        let slack = self.slice.chord_slack();
        let (ci, ni, d) = self.slice.nearest_node(center);
        if d - slack > half_diag {
            if self.slice.contains(center) {
                return Class::Inside;
            }
            return Class::Outside;
        }
        // Crossing: local treatment requires the cell (plus headroom for its
        // descendants) to sit inside the tube of a single component.
        let curve = &self.slice.curves()[ci];
        let tube_ok = d + 2.0 * size < curve.tube_radius();
        let isolated = self.slice.curves().iter().enumerate().all(|(cj, cv)| {
            cj == ci || {
                let (_, dj) = self.slice.nearest_node_on(cj, center);
                dj - cv.chord_slack() > 2.0 * size
            }
        });
        if tube_ok && isolated {
            Class::CrossLocal(ci as u32, ni as u32)
        } else {
            Class::CrossCoarse
        }
    }

    /// Classification of a child cell given its parent's class.
    fn classify_child(&self, id: CellId, parent: Class) -> Class {
        match parent {
            Class::Outside => Class::Outside,
            Class::Inside => Class::Inside,
            Class::CrossCoarse => self.classify_root(id),
            Class::CrossLocal(ci, _) => {
                let center = self.cell_center(id);
                let size = self.cell_size(id.level);
                let half_diag = size * std::f64::consts::FRAC_1_SQRT_2;
                let curve = &self.slice.curves()[ci as usize];
                let (ni, _) = self.slice.nearest_node_on(ci as usize, center);
                let (signed, _, _) = curve.local_signed_distance(center, ni);
                let dev = curve.sagitta();
                if signed.abs() - dev > half_diag {
                    if signed > 0.0 {
                        Class::Inside
                    } else {
                        Class::Outside
                    }
                } else {
                    Class::CrossLocal(ci, ni as u32)
                }
            }
        }
    }

    /// Contribution of a cell, evaluating `g` only at points inside the
    /// domain. Returns (value, sample magnitude).
    fn cell_value<G: Fn(Complex64) -> Complex64 + ?Sized>(
        &self,
        id: CellId,
        class: Class,
        g: &G,
    ) -> (Complex64, f64) {
        let size = self.cell_size(id.level);
        let area = size * size;
        let center = self.cell_center(id);
        match class {
            Class::Outside => (Complex64::new(0.0, 0.0), 0.0),
            Class::Inside => {
                let v = g(center);
                (v * area, v.norm())
            }
            Class::CrossLocal(ci, ni) => {
                let curve = &self.slice.curves()[ci as usize];
                let (_, base, dir) = curve.local_signed_distance(center, ni as usize);
                let (frac, centroid) = clip_square(center, 0.5 * size, base, dir);
                if frac < 1e-12 {
                    return (Complex64::new(0.0, 0.0), 0.0);
                }
                let v = g(centroid);
                (v * area * frac, v.norm())
            }
            Class::CrossCoarse => {
                if self.slice.contains(center) {
                    let v = g(center);
                    (v * area, v.norm())
                } else {
                    (Complex64::new(0.0, 0.0), 0.0)
                }
            }
        }
    }

    fn forced(&self, id: CellId) -> bool {
        match self.forced_center {
            Some((z, r)) => {
                let half_diag = self.cell_size(id.level) * std::f64::consts::FRAC_1_SQRT_2;
                self.cell_size(id.level) > self.min_cell
                    && (self.cell_center(id) - z).norm() <= r + half_diag
            }
            None => false,
        }
    }

    fn make_cell<G: Fn(Complex64) -> Complex64 + ?Sized>(
        &self,
        id: CellId,
        class: Class,
        known_value: Option<Complex64>,
        g: &G,
    ) -> Cell {
        let size = self.cell_size(id.level);
        let area = size * size;
        let (value, own_mag) = match known_value {
            Some(v) => (v, v.norm() / area),
            None => self.cell_value(id, class, g),
        };

        // Probe the four children; probes are reused as the children's values
        // if this cell splits.
        let mut child_class = [Class::Outside; 4];
        let mut child_value = [Complex64::new(0.0, 0.0); 4];
        let mut composite = Complex64::new(0.0, 0.0);
        let mut max_mag = own_mag;
        for (i, (dx, dy)) in [(0u32, 0u32), (1, 0), (0, 1), (1, 1)].iter().enumerate() {
            let cid = CellId {
                level: id.level + 1,
                ix: id.ix * 2 + dx,
                iy: id.iy * 2 + dy,
            };
            let cls = self.classify_child(cid, class);
            child_class[i] = cls;
            let (v, m) = self.cell_value(cid, cls, g);
            child_value[i] = v;
            composite += v;
            max_mag = max_mag.max(m);
        }

        let mut est = (composite - value).norm();
        match class {
            Class::CrossLocal(ci, _) => {
                // Tangent-line clipping misjudges the inside fraction by at
                // most ~(curvature·size² + sagitta)·size worth of area.
                let curve = &self.slice.curves()[ci as usize];
                let dev = curve.curvature_bound() * size * size + curve.sagitta();
                est += max_mag * area * (1.5 * dev / size).min(1.0);
            }
            Class::CrossCoarse => {
                est += 0.5 * area * max_mag;
            }
            _ => {}
        }

        Cell {
            id,
            class,
            value,
            est,
            forced: self.forced(id),
            child_class,
            child_value,
        }
    }

    /// Integrate `g` over the slice.
    ///
    /// `rel_tol` applies to `scale_hint` maxed with a seed estimate of ∫|g|.
    /// The achieved error estimate is returned alongside the value; budget
    /// exhaustion with an unmet tolerance is an error, while bottoming out at
    /// `min_cell` merely stops refinement.
    pub fn integrate<G: Fn(Complex64) -> Complex64 + ?Sized>(
        &self,
        g: &G,
        rel_tol: f64,
        scale_hint: f64,
    ) -> Result<QuadResult> {
        if let Some(level) = self.fixed_level {
            return Ok(self.integrate_fixed(g, level));
        }

        let mut heap: BinaryHeap<Cell> = BinaryHeap::new();
        let mut finals: Vec<Cell> = Vec::new();
        let mut final_est = 0.0_f64;
        let mut heap_est = 0.0_f64;
        let mut live = 0usize;

        let n0 = 1u32 << SEED_LEVEL;
        for iy in 0..n0 {
            for ix in 0..n0 {
                let id = CellId {
                    level: SEED_LEVEL,
                    ix,
                    iy,
                };
                let class = self.classify_root(id);
                if class == Class::Outside {
                    continue;
                }
                let cell = self.make_cell(id, class, None, g);
                heap_est += cell.est;
                live += 1;
                heap.push(cell);
            }
        }

        let seed_mass: f64 = heap.iter().map(|c| c.value.norm()).sum();
        let tol_abs = rel_tol * seed_mass.max(scale_hint).max(1e-300);

        let mut budget_hit = false;
        while let Some(cell) = heap.pop() {
            let splittable =
                cell.id.level < MAX_LEVEL && self.cell_size(cell.id.level) > 2.0 * self.min_cell;
            let want = cell.forced || heap_est + final_est > tol_abs;
            if !splittable || !want {
                heap_est -= cell.est;
                final_est += cell.est;
                finals.push(cell);
                if want {
                    continue; // cannot improve this cell, try others
                }
                // Converged: drain the rest untouched.
                while let Some(rest) = heap.pop() {
                    heap_est -= rest.est;
                    final_est += rest.est;
                    finals.push(rest);
                }
                break;
            }
            if live + 3 > self.cell_budget {
                budget_hit = true;
                heap_est -= cell.est;
                final_est += cell.est;
                finals.push(cell);
                while let Some(rest) = heap.pop() {
                    heap_est -= rest.est;
                    final_est += rest.est;
                    finals.push(rest);
                }
                break;
            }

            heap_est -= cell.est;
            live -= 1;
            for (i, (dx, dy)) in [(0u32, 0u32), (1, 0), (0, 1), (1, 1)].iter().enumerate() {
                let id = CellId {
                    level: cell.id.level + 1,
                    ix: cell.id.ix * 2 + dx,
                    iy: cell.id.iy * 2 + dy,
                };
                let class = cell.child_class[i];
                if class == Class::Outside {
                    continue;
                }
                let child = self.make_cell(id, class, Some(cell.child_value[i]), g);
                heap_est += child.est;
                live += 1;
                heap.push(child);
            }
        }

        let total_est = heap_est + final_est;
        if budget_hit && total_est > tol_abs {
            return Err(Error::BudgetExhausted {
                budget: self.cell_budget,
                achieved: total_est,
                requested: tol_abs,
            });
        }

        finals.sort_by_key(|c| c.id);
        let mut acc = KahanSum::new();
        for c in &finals {
            acc.add(c.value);
        }
        Ok(QuadResult {
            value: acc.value(),
            est: total_est,
            cells: finals.len(),
        })
    }

    fn integrate_fixed<G: Fn(Complex64) -> Complex64 + ?Sized>(
        &self,
        g: &G,
        level: u8,
    ) -> QuadResult {
        let n = 1u64 << level;
        let size = self.cell_size(level);
        let area = size * size;
        let origin = self.root_center - Complex64::new(0.5 * self.root_size, 0.5 * self.root_size);
        let mut acc = KahanSum::new();
        let mut cells = 0usize;
        for iy in 0..n {
            for ix in 0..n {
                let p = origin
                    + Complex64::new((ix as f64 + 0.5) * size, (iy as f64 + 0.5) * size);
                if self.slice.contains(p) {
                    acc.add(g(p) * area);
                    cells += 1;
                }
            }
        }
        QuadResult {
            value: acc.value(),
            est: f64::NAN,
            cells,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn clip_square_halfplane() {
        // Vertical line through the center, keeping the left-of-direction
        // (x < 0) side when the direction points up.
        let (frac, centroid) = clip_square(c(0.0, 0.0), 1.0, c(0.0, 0.0), c(0.0, 1.0));
        assert!((frac - 0.5).abs() < 1e-12);
        assert!((centroid.re + 0.5).abs() < 1e-12);
        // Entirely inside.
        let (frac, _) = clip_square(c(-3.0, 0.0), 1.0, c(0.0, 0.0), c(0.0, 1.0));
        assert!((frac - 1.0).abs() < 1e-12);
        // Entirely outside.
        let (frac, _) = clip_square(c(3.0, 0.0), 1.0, c(0.0, 0.0), c(0.0, 1.0));
        assert_eq!(frac, 0.0);
    }

    #[test]
    fn integrates_constant_over_disc() {
        let disc = PlanarDomain::unit_disc(256).unwrap();
        let qt = QuadTree::new(&disc, 1e-5, 1 << 20, None);
        let one = |_: Complex64| c(1.0, 0.0);
        let r = qt.integrate(&one, 1e-5, 1.0).unwrap();
        assert!(
            (r.value.re - std::f64::consts::PI).abs() < 1e-4,
            "area {} vs π, est {}, cells {}",
            r.value.re,
            r.est,
            r.cells
        );
    }

    #[test]
    fn integrates_smooth_function_over_ellipse() {
        // ∬ x² dA over the ellipse a=2, b=1 equals π a³ b / 4.
        let e = PlanarDomain::ellipse(c(0.0, 0.0), 2.0, 1.0, 256).unwrap();
        let qt = QuadTree::new(&e, 1e-5, 1 << 20, None);
        let f = |z: Complex64| c(z.re * z.re, 0.0);
        let r = qt.integrate(&f, 1e-5, 1.0).unwrap();
        let exact = std::f64::consts::PI * 2.0;
        assert!(
            (r.value.re - exact).abs() < 2e-4 * exact,
            "{} vs {exact} (cells {})",
            r.value.re,
            r.cells
        );
    }

    #[test]
    fn integrates_over_annulus() {
        let ann = PlanarDomain::annulus(c(0.0, 0.0), 0.5, 1.0, 256).unwrap();
        let qt = QuadTree::new(&ann, 1e-5, 1 << 20, None);
        let one = |_: Complex64| c(1.0, 0.0);
        let r = qt.integrate(&one, 1e-5, 1.0).unwrap();
        let exact = std::f64::consts::PI * 0.75;
        assert!(
            (r.value.re - exact).abs() < 3e-4 * exact,
            "{} vs {exact}",
            r.value.re
        );
    }

    #[test]
    fn deterministic_across_runs() {
        let disc = PlanarDomain::unit_disc(128).unwrap();
        let qt = QuadTree::new(&disc, 1e-5, 1 << 18, Some((c(0.3, 0.1), 8e-5)));
        let f = |z: Complex64| 1.0 / (z - c(0.3, 0.1) + c(1e-3, 0.0));
        let a = qt.integrate(&f, 1e-5, 1.0).unwrap();
        let b = qt.integrate(&f, 1e-5, 1.0).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.cells, b.cells);
    }

    #[test]
    fn budget_exhaustion_reports_achieved_estimate() {
        let disc = PlanarDomain::unit_disc(128).unwrap();
        let qt = QuadTree::new(&disc, 1e-9, 400, None);
        // Oscillatory integrand that cannot converge within 400 cells.
        let f = |z: Complex64| c((60.0 * z.re).sin() * (60.0 * z.im).cos(), 0.0);
        let err = qt.integrate(&f, 1e-12, 1.0).unwrap_err();
        match err {
            Error::BudgetExhausted { achieved, .. } => assert!(achieved > 0.0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn min_cell_floor_stops_refinement_without_error() {
        let disc = PlanarDomain::unit_disc(128).unwrap();
        // Huge min_cell: refinement floors out immediately, no error.
        let qt = QuadTree::new(&disc, 0.2, 1 << 20, None);
        let one = |_: Complex64| c(1.0, 0.0);
        let r = qt.integrate(&one, 1e-12, 1.0).unwrap();
        assert!(r.cells < 400);
        assert!(r.est > 0.0);
    }

    #[test]
    fn fixed_level_mode_is_linear() {
        let disc = PlanarDomain::unit_disc(64).unwrap();
        let mut qt = QuadTree::new(&disc, 1e-5, 1 << 20, None);
        qt.fixed_level = Some(6);
        let f = |z: Complex64| z * z + z.conj();
        let g = |z: Complex64| z.conj() * z.conj() - c(0.7, 0.1);
        let (a, b) = (c(2.0, -1.0), c(0.5, 3.0));
        let combo = |z: Complex64| a * (z * z + z.conj()) + b * (z.conj() * z.conj() - c(0.7, 0.1));
        let rf = qt.integrate(&f, 0.0, 1.0).unwrap().value;
        let rg = qt.integrate(&g, 0.0, 1.0).unwrap().value;
        let rc = qt.integrate(&combo, 0.0, 1.0).unwrap().value;
        assert!((rc - (a * rf + b * rg)).norm() < 1e-10);
    }
}
