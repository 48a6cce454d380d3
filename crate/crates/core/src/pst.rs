//! Perfect state transfer on weighted paths.
//!
//! Endpoint transfer at time `t₀` holds exactly when `J` is mirror symmetric
//! and every eigenvalue gap is an odd multiple of `π / t₀`. The gap test is
//! done in exact integer arithmetic for integer spectra and by
//! continued-fraction reconstruction of gap ratios otherwise. Every positive
//! verdict is checked against a direct evaluation of `|c_{0,N-1}(t₀)|²`.
//!
//! When the criterion fails, a fidelity scan over
//! `[0, 2π · max_denominator / g_min]` is recorded as evidence; a scan
//! cannot prove absence of transfer.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthopoly::{evaluate_ops, Normalization};
use crate::spectral::{mirror_symmetric, JacobiMatrix};
use crate::walk::{linspace, Propagator};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_DENOMINATOR: u64 = 99;
pub const REFUTATION_GRID: usize = 4096;
/// A transfer counts as perfect when `|c|² ≥ 1 - FIDELITY_TOL`.
pub const FIDELITY_TOL: f64 = 1e-8;
/// `|c_00|` at or below this counts as a zero in the exclusion scan.
pub const ESE_ZERO_TOL: f64 = 1e-8;
/// `|c_00|` must climb above this between a zero and `T₀`; minima inside
/// the flat neighbourhood of the zero at `T₀` itself are not exclusions.
const ESE_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PstConfig {
    /// Relative tolerance; scaled by the spectral range for gaps and by the
    /// largest entry for mirror symmetry.
    pub tol: f64,
    pub max_denominator: u64,
    pub refutation_grid: usize,
}

impl Default for PstConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            refutation_grid: REFUTATION_GRID,
        }
    }
}

impl PstConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Odd multipliers `2m_k + 1` with `λ_k - λ_{k-1} = (2m_k + 1) π / t₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapWitness {
    pub odd_integers: Vec<u64>,
    /// `t₀`.
    pub base_time: f64,
    pub max_denominator: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PstReport {
    pub pair: (usize, usize),
    pub has_pst: bool,
    pub transfer_time: Option<f64>,
    pub gap_condition: bool,
    pub witness: Option<GapWitness>,
    pub mirror_symmetric: bool,
    pub fidelity_at_t0: Option<f64>,
    /// `φ` with `e^{it₀J} e_n = e^{iφ} e_m`, present when the transfer is perfect.
    pub phase: Option<f64>,
    /// Largest `|c_nm(t)|²` seen by the fidelity scan, and where.
    pub scan_max_fidelity: Option<f64>,
    pub scan_argmax: Option<f64>,
    /// Interior pairs only: no eigenvector vanishes at the source vertex.
    pub nonzero_eigenvector_entries: Option<bool>,
}

impl PstReport {
    fn empty(pair: (usize, usize)) -> Self {
        Self {
            pair,
            has_pst: false,
            transfer_time: None,
            gap_condition: false,
            witness: None,
            mirror_symmetric: false,
            fidelity_at_t0: None,
            phase: None,
            scan_max_fidelity: None,
            scan_argmax: None,
            nonzero_eigenvector_entries: None,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// First continued-fraction convergent `p/q` of `x` with
/// `|x - p/q| · scale ≤ tol` and `q ≤ max_den`.
fn rational_approximation(x: f64, scale: f64, tol: f64, max_den: u64) -> Option<(u64, u64)> {
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e15 {
            return None;
        }
        let a = a as u64;
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > max_den {
            return None;
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
        if (x - h as f64 / k as f64).abs() * scale <= tol {
            let g = gcd(h, k);
            return Some((h / g, k / g));
        }
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

fn check_increasing(eigenvalues: &[f64]) -> Result<()> {
    if eigenvalues.len() < 2 {
        return Err(Error::Invalid(
            "the gap condition needs at least two eigenvalues".into(),
        ));
    }
    if let Some(index) = eigenvalues.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NotIncreasing { index });
    }
    Ok(())
}

/// Decides whether all gaps are odd multiples of a common `π / t₀`.
///
/// `tol` is absolute, on the scale of the eigenvalues. Returns the witness
/// with the smallest odd multipliers, i.e. the smallest `t₀`.
pub fn gap_condition(eigenvalues: &[f64], max_denominator: u64, tol: f64) -> Result<Option<GapWitness>> {
    check_increasing(eigenvalues)?;
    let gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();

    let integral = eigenvalues
        .iter()
        .all(|l| l.abs() < 2f64.powi(50) && (l - l.round()).abs() <= tol);
    if integral {
        let ints: Vec<u64> = eigenvalues
            .windows(2)
            .map(|w| (w[1].round() - w[0].round()) as u64)
            .collect();
        let g = ints.iter().copied().fold(0, gcd);
        let odd: Vec<u64> = ints.iter().map(|d| d / g).collect();
        if odd.iter().any(|o| o % 2 == 0) {
            return Ok(None);
        }
        return Ok(Some(GapWitness {
            odd_integers: odd,
            base_time: PI / g as f64,
            max_denominator,
        }));
    }

    let first = gaps[0];
    let mut ratios = Vec::with_capacity(gaps.len());
    let mut lcm = 1u64;
    for &g in &gaps {
        let Some((p, q)) = rational_approximation(g / first, first, tol, max_denominator) else {
            return Ok(None);
        };
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > max_denominator {
            return Ok(None);
        }
        ratios.push((p, q));
    }
    let odd: Vec<u64> = ratios.iter().map(|&(p, q)| p * (lcm / q)).collect();
    if odd.iter().any(|o| o % 2 == 0) {
        return Ok(None);
    }
    let unit = gaps.iter().sum::<f64>() / odd.iter().sum::<u64>() as f64;
    if gaps.iter().zip(&odd).any(|(g, &o)| (g - o as f64 * unit).abs() > tol) {
        return Ok(None);
    }
    Ok(Some(GapWitness {
        odd_integers: odd,
        base_time: PI / unit,
        max_denominator,
    }))
}

fn entry_scale(j: &JacobiMatrix) -> f64 {
    j.diag()
        .iter()
        .chain(j.offdiag())
        .fold(1.0_f64, |acc, v| acc.max(v.abs()))
}

/// Largest `|c_nm|²` on `points` evenly spaced times in `[0, t_max]`.
pub fn scan_fidelity(prop: &Propagator, n: usize, m: usize, t_max: f64, points: usize) -> Result<(f64, f64)> {
    prop.amplitude(n, m, 0.0)?;
    let mut best = (0.0, f64::NEG_INFINITY);
    for t in linspace(0.0, t_max, points) {
        let f = prop.amplitude_unchecked(n, m, t).norm_sqr();
        if f > best.1 {
            best = (t, f);
        }
    }
    Ok(best)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Grid scan followed by golden-section refinement of the best local maxima.
pub fn search_fidelity(prop: &Propagator, n: usize, m: usize, t_max: f64, points: usize) -> Result<(f64, f64)> {
    prop.amplitude(n, m, 0.0)?;
    let times = linspace(0.0, t_max, points);
    let f: Vec<f64> = times
        .iter()
        .map(|&t| prop.amplitude_unchecked(n, m, t).norm_sqr())
        .collect();
    let mut peaks: Vec<usize> = (0..f.len())
        .filter(|&i| (i == 0 || f[i] >= f[i - 1]) && (i + 1 == f.len() || f[i] >= f[i + 1]))
        .collect();
    peaks.sort_by(|&a, &b| f[b].total_cmp(&f[a]));
    peaks.truncate(16);
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in peaks {
        let lo = times[i.saturating_sub(1)];
        let hi = times[(i + 1).min(times.len() - 1)];
        let (t, neg) = golden_min(lo, hi, 1e-13 * t_max.max(1.0), |t| {
            -prop.amplitude_unchecked(n, m, t).norm_sqr()
        });
        let cand = if -neg >= f[i] { (t, -neg) } else { (times[i], f[i]) };
        if cand.1 > best.1 {
            best = cand;
        }
    }
    Ok(best)
}

fn scan_window(prop: &Propagator, max_denominator: u64) -> f64 {
    let g_min = prop.decomposition().min_gap().unwrap_or(1.0);
    2.0 * PI * max_denominator as f64 / g_min
}

pub fn certify_endpoint_pst(j: &JacobiMatrix, tol: f64) -> Result<PstReport> {
    certify_endpoint_pst_with(j, &PstConfig::with_tol(tol))
}

pub fn certify_endpoint_pst_with(j: &JacobiMatrix, config: &PstConfig) -> Result<PstReport> {
    let prop = Propagator::new(j)?;
    certify_with_propagator(j, &prop, config)
}

fn certify_with_propagator(j: &JacobiMatrix, prop: &Propagator, config: &PstConfig) -> Result<PstReport> {
    let n = j.size();
    let last = n - 1;
    let mut report = PstReport::empty((0, last));
    if n < 2 {
        return Ok(report);
    }
    let decomp = prop.decomposition();
    report.mirror_symmetric = mirror_symmetric(j, config.tol * entry_scale(j));
    let gap_tol = config.tol * decomp.spectral_range().max(f64::MIN_POSITIVE);
    report.witness = gap_condition(&decomp.eigenvalues, config.max_denominator, gap_tol)?;
    report.gap_condition = report.witness.is_some();
    if let Some(w) = &report.witness {
        let t0 = w.base_time;
        let c = prop.amplitude_unchecked(0, last, t0);
        report.transfer_time = Some(t0);
        report.fidelity_at_t0 = Some(c.norm_sqr());
        if c.norm_sqr() >= 1.0 - FIDELITY_TOL {
            report.phase = Some(c.arg());
        }
    }
    report.has_pst = report.gap_condition && report.mirror_symmetric;
    if report.has_pst {
        let f = report.fidelity_at_t0.unwrap_or(0.0);
        if f < 1.0 - FIDELITY_TOL {
            return Err(Error::Numerical(format!(
                "criterion holds but |c(t0)|^2 = {f} at t0 = {:?}",
                report.transfer_time
            )));
        }
    } else {
        let window = scan_window(prop, config.max_denominator);
        let (t, f) = scan_fidelity(prop, 0, last, window, config.refutation_grid)?;
        report.scan_max_fidelity = Some(f);
        report.scan_argmax = Some(t);
    }
    Ok(report)
}

/// Checks `P_{N-1}(λ_k) = (-1)^{N-1+k}` for the orthonormal polynomials.
///
/// Needs a report carrying a gap witness. Given the gap condition, the
/// identity holds exactly when the chain is mirror symmetric.
pub fn endpoint_polynomial_identity(j: &JacobiMatrix, report: &PstReport) -> Result<bool> {
    if report.transfer_time.is_none() {
        return Err(Error::Precondition(
            "report has no transfer time (gap condition fails)".into(),
        ));
    }
    let n = j.size();
    let decomp = crate::spectral::eigendecompose(j)?;
    let table = evaluate_ops(j.coeffs(), &decomp.eigenvalues, Normalization::Orthonormal)?;
    Ok((0..n).all(|k| {
        let sign = if (n - 1 + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        (table.get(n - 1, k) - sign).abs() <= 1e-8
    }))
}

/// Transfer between mirror vertices `j` and `N-1-j`.
///
/// Uses the endpoint transfer time when endpoint transfer holds, and a
/// refined fidelity search otherwise.
pub fn interior_pst(jm: &JacobiMatrix, j: usize, tol: f64) -> Result<PstReport> {
    interior_pst_with(jm, j, &PstConfig::with_tol(tol))
}

pub fn interior_pst_with(jm: &JacobiMatrix, j: usize, config: &PstConfig) -> Result<PstReport> {
    let n = jm.size();
    if n < 3 || j == 0 || j > n - 2 {
        return Err(Error::Invalid(format!(
            "vertex {j} is not interior for a chain of size {n}"
        )));
    }
    let partner = n - 1 - j;
    let prop = Propagator::new(jm)?;
    let endpoint = certify_with_propagator(jm, &prop, config)?;
    let decomp = prop.decomposition();

    let mut report = PstReport::empty((j, partner));
    report.gap_condition = endpoint.gap_condition;
    report.witness = endpoint.witness.clone();
    report.mirror_symmetric = endpoint.mirror_symmetric;
    report.nonzero_eigenvector_entries = Some((0..n).all(|k| decomp.eigenvectors[(j, k)].abs() > 1e-10));

    let window = scan_window(&prop, config.max_denominator);
    let (t_scan, f_scan) = search_fidelity(&prop, j, partner, window, config.refutation_grid)?;
    report.scan_max_fidelity = Some(f_scan);
    report.scan_argmax = Some(t_scan);

    let candidate = if endpoint.has_pst {
        endpoint.transfer_time
    } else if f_scan >= 1.0 - FIDELITY_TOL {
        Some(t_scan)
    } else {
        None
    };
    if let Some(t0) = candidate {
        let c = prop.amplitude_unchecked(j, partner, t0);
        report.transfer_time = Some(t0);
        report.fidelity_at_t0 = Some(c.norm_sqr());
        if c.norm_sqr() >= 1.0 - FIDELITY_TOL {
            report.has_pst = true;
            report.phase = Some(c.arg());
        }
    }
    Ok(report)
}

/// A zero of `c_00` strictly before the transfer time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EseFinding {
    pub time: f64,
    pub first_magnitude: f64,
    pub last_magnitude: f64,
}

impl EseFinding {
    pub fn is_exclusion(&self) -> bool {
        self.last_magnitude < 1.0 - ESE_ZERO_TOL
    }
}

/// Locates every `t ∈ (0, T₀)` where `c_00(t)` vanishes.
pub fn ese_scan(j: &JacobiMatrix, report: &PstReport, grid: usize) -> Result<Vec<EseFinding>> {
    if !report.has_pst {
        return Err(Error::Precondition(
            "early state exclusion is undefined without transfer".into(),
        ));
    }
    let Some(t0) = report.transfer_time else {
        return Err(Error::Precondition("report has no transfer time".into()));
    };
    if grid < 64 {
        return Err(Error::Invalid(format!("scan grid {grid} is below 64 points")));
    }
    let prop = Propagator::new(j)?;
    let last = j.size() - 1;
    let first = |t: f64| prop.amplitude_unchecked(0, 0, t).norm();

    let times = linspace(0.0, t0, grid);
    let mags: Vec<f64> = times.iter().map(|&t| first(t)).collect();
    let mut suffix_max = mags.clone();
    for i in (0..mags.len() - 1).rev() {
        suffix_max[i] = suffix_max[i].max(suffix_max[i + 1]);
    }

    let mut findings: Vec<EseFinding> = Vec::new();
    for i in 1..times.len() - 1 {
        if !(mags[i] < mags[i - 1] && mags[i] <= mags[i + 1]) {
            continue;
        }
        if suffix_max[i + 1] <= ESE_SEPARATION {
            continue;
        }
        let (t, m) = golden_min(times[i - 1], times[i + 1], 1e-14 * t0, first);
        if m > ESE_ZERO_TOL || t <= 0.0 || t >= t0 {
            continue;
        }
        if findings.last().is_some_and(|f| (f.time - t).abs() < 1e-9 * t0) {
            continue;
        }
        findings.push(EseFinding {
            time: t,
            first_magnitude: m,
            last_magnitude: prop.amplitude_unchecked(0, last, t).norm(),
        });
    }
    Ok(findings)
}

pub fn exhibits_ese(findings: &[EseFinding]) -> bool {
    findings.iter().any(EseFinding::is_exclusion)
}

/// `e^{-iφ} e^{it₀λ_k} P_n(λ_k)` for every `k`, the right-hand side of the
/// polynomial form of a transfer from `n` at time `t₀` with phase `φ`.
pub fn transferred_polynomials(j: &JacobiMatrix, n: usize, t0: f64, phase: f64) -> Result<Vec<Complex64>> {
    let decomp = crate::spectral::eigendecompose(j)?;
    let table = evaluate_ops(j.coeffs(), &decomp.eigenvalues, Normalization::Orthonormal)?;
    if n >= j.size() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: j.size(),
        });
    }
    Ok(decomp
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| Complex64::from_polar(table.get(n, k), t0 * l - phase))
        .collect())
}
