//! Seeded randomized inequality suites.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use sh2d_core::grid::{convolve, random_band_limited};
use sh2d_core::potential::Potential;
use sh2d_core::rearrange::{self, CellRanking};
use sh2d_core::{Field, GridSpec, PointOperator};

/// Share of trials a statistical suite must pass.
pub const STATISTICAL_PASS_RATE: f64 = 0.99;
/// Slack of the rearrangement inequalities.
pub const REARRANGEMENT_TOLERANCE: f64 = 1.001;
pub const GN_TOLERANCE: f64 = 1e-6;
pub const PAIRING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub trials: usize,
    pub within: usize,
    pub required: usize,
    pub tolerance: f64,
    /// Largest observed value of the suite's metric.
    pub worst: f64,
    pub passed: bool,
}

impl SuiteResult {
    fn new(name: &str, metrics: &[f64], tolerance: f64, required: usize) -> Self {
        let within = metrics.iter().filter(|m| **m <= tolerance).count();
        Self {
            name: name.into(),
            trials: metrics.len(),
            within,
            required,
            tolerance,
            worst: metrics.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            passed: within >= required,
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {}/{} within tolerance (worst {:.6e}, need {})",
            self.name, self.within, self.trials, self.worst, self.required
        )
    }
}

fn statistical_quota(trials: usize) -> usize {
    (STATISTICAL_PASS_RATE * trials as f64).ceil() as usize
}

/// `|u|` for a random band-limited `u` with cutoff wavenumber in `[2, 8]`.
pub fn random_density<R: Rng + ?Sized>(spec: GridSpec, rng: &mut R) -> Field {
    let k = rng.random_range(2..=8) as f64;
    random_band_limited(spec, k, rng).modulus()
}

/// Random band-limited field plus a random multiple of the normalised Green
/// function at `omega_ref`.
pub fn random_energy_field<R: Rng + ?Sized>(op: &PointOperator, rng: &mut R) -> Field {
    let k = rng.random_range(2..=8) as f64;
    let g = op
        .green_field_real(op.params().omega_ref())
        .expect("reference Green function");
    let g = g.scale_real(1.0 / g.l2_norm());
    let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut u = random_band_limited(*op.spec(), k, rng);
    u.axpy(c, &g).expect("shared grid");
    u
}

/// `∫∫ f(x)w(x−y)g(y)` against its rearranged value; metric lhs/rhs.
pub fn riesz_bfll<R: Rng + ?Sized>(pot: &Potential, trials: usize, rng: &mut R) -> SuiteResult {
    let spec = *pot.spec();
    let ranking = CellRanking::shared(spec);
    let metrics: Vec<f64> = (0..trials)
        .map(|_| {
            let f = random_density(spec, rng);
            let g = random_density(spec, rng);
            let (lhs, rhs) = rearrange::check_riesz_bfll(pot, &f, &g, &ranking).expect("valid densities");
            lhs / rhs
        })
        .collect();
    SuiteResult::new("riesz_bfll", &metrics, REARRANGEMENT_TOLERANCE, statistical_quota(trials))
}

/// `‖∇u*‖ / ‖∇u‖`.
pub fn polya_szego<R: Rng + ?Sized>(spec: GridSpec, trials: usize, rng: &mut R) -> SuiteResult {
    let ranking = CellRanking::shared(spec);
    let metrics: Vec<f64> = (0..trials)
        .map(|_| {
            let u = random_density(spec, rng);
            let (sym, orig) = rearrange::check_polya_szego(&u, &ranking).expect("valid density");
            sym / orig
        })
        .collect();
    SuiteResult::new("polya_szego", &metrics, REARRANGEMENT_TOLERANCE, statistical_quota(trials))
}

/// Gagliardo–Nirenberg quotient over `c_gn`, minus one.
pub fn gagliardo_nirenberg<R: Rng + ?Sized>(
    op: &PointOperator,
    pot: &Potential,
    c_gn: f64,
    trials: usize,
    rng: &mut R,
) -> SuiteResult {
    let metrics: Vec<f64> = (0..trials)
        .map(|_| {
            let psi = random_energy_field(op, rng);
            sh2d_core::groundstate::gn_ratio(op, pot, &psi).expect("nonzero field") / c_gn - 1.0
        })
        .collect();
    SuiteResult::new("gn", &metrics, GN_TOLERANCE, trials)
}

/// `|⟨w∗f, g⟩ − ⟨f, w∗g⟩|` on the Cauchy–Schwarz scale
/// `max(‖w∗f‖‖g‖, ‖f‖‖w∗g‖)`; the pairings themselves may nearly cancel.
pub fn self_adjoint_pairing<R: Rng + ?Sized>(pot: &Potential, trials: usize, rng: &mut R) -> SuiteResult {
    let spec = *pot.spec();
    let metrics: Vec<f64> = (0..trials)
        .map(|_| {
            let f = random_band_limited(spec, 6.0, rng).real_part();
            let g = random_band_limited(spec, 6.0, rng).real_part();
            let wf = convolve(pot.w_hat(), &f).expect("shared grid");
            let wg = convolve(pot.w_hat(), &g).expect("shared grid");
            let lhs = wf.inner(&g).expect("shared grid");
            let rhs = f.inner(&wg).expect("shared grid");
            let scale = (wf.l2_norm() * g.l2_norm()).max(f.l2_norm() * wg.l2_norm());
            (lhs - rhs).norm() / scale.max(f64::MIN_POSITIVE)
        })
        .collect();
    SuiteResult::new("self_adjoint", &metrics, PAIRING_TOLERANCE, trials)
}
