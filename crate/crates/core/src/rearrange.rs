//! Discrete Schwartz symmetrisation and the rearrangement inequalities.
//!
//! Cells are ranked by torus distance from the origin cell (ties broken by
//! row, then column). Symmetrising a non-negative field sorts its values in
//! decreasing order and writes them back along that ranking.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{Field, GridError, GridSpec, Space};
use crate::potential::{Potential, PotentialError};

#[derive(Debug, Error)]
pub enum RearrangeError {
    #[error("cannot symmetrise: entry {value} at cell {index} is negative")]
    Negative { index: usize, value: f64 },
    #[error("cannot symmetrise: entry at cell {index} has imaginary part {imag}")]
    NotReal { index: usize, imag: f64 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

pub type Result<T> = std::result::Result<T, RearrangeError>;

/// Cell indices ordered by distance from the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRanking {
    cells: usize,
    order: Vec<usize>,
    // squared torus distance (in cells) of order[k]
    radius_sq: Vec<usize>,
}

impl CellRanking {
    pub fn new(spec: GridSpec) -> Self {
        let mut keyed: Vec<(usize, usize)> = (0..spec.len())
            .map(|i| (spec.torus_radius_sq_cells(i), i))
            .collect();
        // storage index order is (row, col) lexicographic
        keyed.sort_unstable();
        Self {
            cells: spec.cells(),
            order: keyed.iter().map(|&(_, i)| i).collect(),
            radius_sq: keyed.iter().map(|&(r, _)| r).collect(),
        }
    }

    /// Ranking shared by every grid with the same number of cells.
    pub fn shared(spec: GridSpec) -> Arc<CellRanking> {
        static CACHE: OnceLock<RwLock<HashMap<usize, Arc<CellRanking>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(r) = cache.read().expect("ranking cache poisoned").get(&spec.cells()) {
            return r.clone();
        }
        let r = Arc::new(Self::new(spec));
        cache
            .write()
            .expect("ranking cache poisoned")
            .entry(spec.cells())
            .or_insert(r)
            .clone()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Squared torus distances (in cells) along the ranking.
    pub fn radii_sq(&self) -> &[usize] {
        &self.radius_sq
    }

    fn check(&self, u: &Field) -> Result<()> {
        u.require(Space::Position)?;
        if u.spec().cells() != self.cells {
            return Err(GridError::SpecMismatch.into());
        }
        Ok(())
    }
}

/// Schwartz symmetrisation `u ↦ u*` of a real, non-negative field.
pub fn symmetrize(u: &Field, ranking: &CellRanking) -> Result<Field> {
    ranking.check(u)?;
    let tol = 1e-14 * u.max_abs();
    for (index, v) in u.values().iter().enumerate() {
        if v.im.abs() > tol {
            return Err(RearrangeError::NotReal { index, imag: v.im });
        }
        if v.re < -tol {
            return Err(RearrangeError::Negative { index, value: v.re });
        }
    }
    let mut sorted: Vec<f64> = u.values().iter().map(|v| v.re).collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut out = vec![Complex64::default(); u.values().len()];
    for (&cell, v) in ranking.order().iter().zip(sorted) {
        out[cell] = Complex64::new(v, 0.0);
    }
    Ok(Field::from_values(*u.spec(), Space::Position, out)?)
}

/// `|u|` symmetrised; accepts any complex field.
pub fn symmetrize_modulus(u: &Field, ranking: &CellRanking) -> Result<Field> {
    symmetrize(&u.modulus(), ranking)
}

/// Whether `u` is radially non-increasing: the largest value on each distance
/// shell is at most the smallest value on the previous shell, up to
/// `rel_tol·max|u|`.
pub fn is_radially_nonincreasing(u: &Field, ranking: &CellRanking, rel_tol: f64) -> Result<bool> {
    ranking.check(u)?;
    let tol = rel_tol * u.max_abs();
    let vals = u.values();
    let (order, radii) = (ranking.order(), ranking.radii_sq());
    let mut prev_min = f64::INFINITY;
    let mut k = 0;
    while k < order.len() {
        let r = radii[k];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        while k < order.len() && radii[k] == r {
            let v = vals[order[k]].re;
            lo = lo.min(v);
            hi = hi.max(v);
            k += 1;
        }
        if hi > prev_min + tol {
            return Ok(false);
        }
        prev_min = lo;
    }
    Ok(true)
}

/// `(‖∇u*‖, ‖∇u‖)`; Pólya–Szegő predicts the first is not larger.
pub fn check_polya_szego(u: &Field, ranking: &CellRanking) -> Result<(f64, f64)> {
    let star = symmetrize(u, ranking)?;
    Ok((star.h1_seminorm()?, u.h1_seminorm()?))
}

/// `(∫(w∗(f+g)²)(f+g)², ∫(w∗(f*+g*)²)(f*+g*)²)`; the Riesz / BFLL
/// inequalities predict the first is not larger.
pub fn check_riesz_bfll(w: &Potential, f: &Field, g: &Field, ranking: &CellRanking) -> Result<(f64, f64)> {
    let quartic = |a: &Field, b: &Field| -> Result<f64> {
        let s = a + b;
        Ok(w.hartree_energy(&s)?)
    };
    let (fs, gs) = (symmetrize(f, ranking)?, symmetrize(g, ranking)?);
    Ok((quartic(f, g)?, quartic(&fs, &gs)?))
}
