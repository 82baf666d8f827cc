//! Deterministic adaptive cubature on axis-aligned boxes.
//!
//! Each cell carries a four-point tensor Gauss-Legendre estimate on itself
//! (`coarse`) and on its `2^D` dyadic children (`fine`); `|fine - coarse|` is
//! the cell's error estimate. The cell with the largest estimate is split
//! until the summed estimate meets the tolerance. Cells may be excluded
//! (integrable singularities): they contribute nothing and carry a caller
//! supplied bound on their true contribution as error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Integrand values the cubature can accumulate.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;
    fn components(&self) -> Vec<f64>;
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn components(&self) -> Vec<f64> {
        vec![*self]
    }
}

impl QuadValue for Vec3 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn components(&self) -> Vec<f64> {
        self.to_array().to_vec()
    }
}

/// Stopping rule and resource limits for [`integrate`].
///
/// The run stops once the summed error estimate is at most
/// `rel_tol * max(|I|, mass_floor * ∫|f|)`. The floor keeps integrands that
/// cancel to (nearly) zero from refining forever.
#[derive(Debug, Clone, Copy)]
pub struct CubatureOptions {
    pub rel_tol: f64,
    pub mass_floor: f64,
    pub max_depth: u32,
    pub max_cells: usize,
}

impl CubatureOptions {
    pub fn new(rel_tol: f64) -> Self {
        CubatureOptions {
            rel_tol,
            mass_floor: 1e-6,
            max_depth: 40,
            max_cells: 2_000_000,
        }
    }
}

impl Default for CubatureOptions {
    fn default() -> Self {
        CubatureOptions::new(1e-6)
    }
}

/// Box `[lo, hi]` split initially into `divisions` equal cells per axis.
#[derive(Debug, Clone, Copy)]
pub struct Region<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
    pub divisions: [usize; D],
}

impl<const D: usize> Region<D> {
    pub fn new(lo: [f64; D], hi: [f64; D], divisions: [usize; D]) -> Self {
        Region { lo, hi, divisions }
    }
}

/// Cells that must not be sampled, with a bound on what they would add.
pub trait Exclusion<const D: usize> {
    fn excludes(&self, lo: &[f64; D], hi: &[f64; D]) -> bool;
    fn bound(&self, lo: &[f64; D], hi: &[f64; D]) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
    pub cells: usize,
}

struct Cell<const D: usize, V> {
    lo: [f64; D],
    hi: [f64; D],
    depth: u32,
    seq: u64,
    fine: V,
    err: f64,
    mass: f64,
}

impl<const D: usize, V> PartialEq for Cell<D, V> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const D: usize, V> Eq for Cell<D, V> {}
impl<const D: usize, V> PartialOrd for Cell<D, V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize, V> Ord for Cell<D, V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Tensor four-point Gauss-Legendre rule on one box: `(∫f, ∫|f|)`.
pub fn gauss_legendre_box<const D: usize, V, F>(f: &F, lo: &[f64; D], hi: &[f64; D]) -> (V, f64)
where
    V: QuadValue,
    F: Fn(&[f64; D]) -> V,
{
    let mut centre = [0.0; D];
    let mut half = [0.0; D];
    let mut jac = 1.0;
    for i in 0..D {
        centre[i] = 0.5 * (lo[i] + hi[i]);
        half[i] = 0.5 * (hi[i] - lo[i]);
        jac *= half[i];
    }
    let mut sum = V::default();
    let mut mass = 0.0;
    let mut x = [0.0; D];
    for k in 0..4usize.pow(D as u32) {
        let mut rest = k;
        let mut w = 1.0;
        for i in 0..D {
            let j = rest % 4;
            rest /= 4;
            x[i] = centre[i] + half[i] * GL4_NODES[j];
            w *= GL4_WEIGHTS[j];
        }
        let v = f(&x);
        mass += w * v.magnitude();
        sum = sum + v * w;
    }
    (sum * jac, mass * jac)
}

fn children<const D: usize>(lo: &[f64; D], hi: &[f64; D]) -> Vec<([f64; D], [f64; D])> {
    (0..1usize << D)
        .map(|mask| {
            let mut clo = *lo;
            let mut chi = *hi;
            for i in 0..D {
                let mid = 0.5 * (lo[i] + hi[i]);
                if mask >> i & 1 == 0 {
                    chi[i] = mid;
                } else {
                    clo[i] = mid;
                }
            }
            (clo, chi)
        })
        .collect()
}

struct Engine<'a, const D: usize, V, F> {
    f: &'a F,
    exclusion: Option<&'a dyn Exclusion<D>>,
    seq: u64,
    _v: std::marker::PhantomData<V>,
}

impl<const D: usize, V, F> Engine<'_, D, V, F>
where
    V: QuadValue,
    F: Fn(&[f64; D]) -> V,
{
    fn make_cell(&mut self, lo: [f64; D], hi: [f64; D], depth: u32) -> Cell<D, V> {
        self.seq += 1;
        if let Some(ex) = self.exclusion {
            if ex.excludes(&lo, &hi) {
                return Cell {
                    lo,
                    hi,
                    depth,
                    seq: self.seq,
                    fine: V::default(),
                    err: ex.bound(&lo, &hi),
                    mass: 0.0,
                };
            }
        }
        let (coarse, _) = gauss_legendre_box(self.f, &lo, &hi);
        let mut fine = V::default();
        let mut mass = 0.0;
        for (clo, chi) in children(&lo, &hi) {
            let (v, m) = gauss_legendre_box(self.f, &clo, &chi);
            fine = fine + v;
            mass += m;
        }
        Cell {
            lo,
            hi,
            depth,
            seq: self.seq,
            fine,
            err: (fine - coarse).magnitude(),
            mass,
        }
    }
}

fn totals<const D: usize, V: QuadValue>(heap: &BinaryHeap<Cell<D, V>>) -> (V, f64, f64) {
    let mut cells: Vec<&Cell<D, V>> = heap.iter().collect();
    cells.sort_by_key(|c| c.seq);
    cells.iter().fold((V::default(), 0.0, 0.0), |(v, e, m), c| {
        (v + c.fine, e + c.err, m + c.mass)
    })
}

/// Adaptive cubature of `f` over `region`.
pub fn integrate<const D: usize, V, F>(
    f: F,
    region: &Region<D>,
    opts: &CubatureOptions,
    exclusion: Option<&dyn Exclusion<D>>,
) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(&[f64; D]) -> V,
{
    if region.divisions.contains(&0) {
        return Err(Error::invalid("divisions", "every axis needs at least one cell"));
    }
    let mut engine = Engine {
        f: &f,
        exclusion,
        seq: 0,
        _v: std::marker::PhantomData,
    };

    let mut heap = BinaryHeap::new();
    let total_initial: usize = region.divisions.iter().product();
    for k in 0..total_initial {
        let mut rest = k;
        let mut lo = [0.0; D];
        let mut hi = [0.0; D];
        for i in 0..D {
            let n = region.divisions[i];
            let j = rest % n;
            rest /= n;
            let w = (region.hi[i] - region.lo[i]) / n as f64;
            lo[i] = region.lo[i] + w * j as f64;
            hi[i] = if j + 1 == n { region.hi[i] } else { region.lo[i] + w * (j + 1) as f64 };
        }
        heap.push(engine.make_cell(lo, hi, 0));
    }

    let (mut value, mut err, mut mass) = totals(&heap);
    let mut previous = value;
    let mut splits = 0usize;
    loop {
        let target = opts.rel_tol * value.magnitude().max(opts.mass_floor * mass);
        if err <= target {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        if worst.depth >= opts.max_depth || heap.len() + (1 << D) > opts.max_cells {
            heap.push(worst);
            return Err(Error::Convergence {
                last: value.components(),
                previous: previous.components(),
                error_estimate: err,
            });
        }
        previous = value;
        value = value - worst.fine;
        err -= worst.err;
        mass -= worst.mass;
        for (clo, chi) in children(&worst.lo, &worst.hi) {
            let c = engine.make_cell(clo, chi, worst.depth + 1);
            value = value + c.fine;
            err += c.err;
            mass += c.mass;
            heap.push(c);
        }
        splits += 1;
        if splits.is_multiple_of(4096) {
            (value, err, mass) = totals(&heap);
        }
    }

    let (value, error, _) = totals(&heap);
    Ok(Estimate {
        value,
        error,
        cells: heap.len(),
    })
}

/// Composite four-point Gauss-Legendre rule with `panels` equal panels.
pub fn composite_gauss_legendre<V, F>(f: F, a: f64, b: f64, panels: usize) -> V
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    let h = (b - a) / panels as f64;
    let mut sum = V::default();
    for k in 0..panels {
        let lo = a + h * k as f64;
        let c = lo + 0.5 * h;
        let mut panel = V::default();
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            panel = panel + f(c + 0.5 * h * x) * w;
        }
        sum = sum + panel * (0.5 * h);
    }
    sum
}
