//! Fourier moments and the truncated Fourier series of the sign function.
//!
//! Features use unit angular frequencies, `Φ_k(w) = exp(-i k w)` for
//! `k = 1..m`, which matches the square-wave expansion
//! `sign(Δ) = Σ_{k odd} 4/(πk) sin(kΔ)` on `(-π, π)`. With that convention
//! `-Im Σ c_k conj(Φ_k(w)) Φ_k(v)` is exactly the truncated series at
//! `Δ = v - w`.
//!
//! Two indices appear in the literature for the same truncation: the
//! feature count `m` used here and the expansion order `m_B`, related by
//! `m = 2 m_B + 1`. Helpers that take `m_B` say so in their names.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{ensure_same_len, RecoveryError, Result};
use crate::measures::SparseMeasure1D;

/// Fourier coefficients of the unit square wave: `4/(πk)` for odd `k`,
/// zero for even `k`. Stored for `k = 1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCoefficients {
    values: Vec<f64>,
}

impl SignCoefficients {
    pub fn m(&self) -> usize {
        self.values.len()
    }

    /// Coefficients in frequency order, `values()[k - 1] = c_k`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Features `exp(-i k w)` for `k = 1..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<Complex64>,
}

/// Averaged features `(1/n) Σ_j Φ(w_j)` of an `n`-point measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    entries: Vec<Complex64>,
    n: usize,
}

impl MomentVector {
    pub fn new(entries: Vec<Complex64>, n: usize) -> Result<Self> {
        if entries.is_empty() || n == 0 {
            return Err(RecoveryError::InvalidArgument(
                "moment vectors need m >= 1 and n >= 1".into(),
            ));
        }
        Ok(Self { entries, n })
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    /// Support size of the measure the moments summarize.
    pub fn n(&self) -> usize {
        self.n
    }
}

fn check_m(m: usize) -> Result<()> {
    if m == 0 {
        Err(RecoveryError::InvalidArgument(
            "the number of frequencies must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

fn coefficient(k: usize) -> f64 {
    if k % 2 == 1 {
        4.0 / (PI * k as f64)
    } else {
        0.0
    }
}

pub fn sign_series_coeffs(m: usize) -> Result<SignCoefficients> {
    check_m(m)?;
    Ok(SignCoefficients {
        values: (1..=m).map(coefficient).collect(),
    })
}

#[inline]
fn unit_feature(k: usize, w: f64) -> Complex64 {
    let (s, c) = (k as f64 * w).sin_cos();
    Complex64::new(c, -s)
}

pub fn feature_map(w: f64, m: usize) -> Result<FeatureVector> {
    check_m(m)?;
    Ok(FeatureVector {
        entries: (1..=m).map(|k| unit_feature(k, w)).collect(),
    })
}

pub fn moments(mu: &SparseMeasure1D, m: usize) -> Result<MomentVector> {
    check_m(m)?;
    let n = mu.len();
    let inv_n = 1.0 / n as f64;
    let entries = (1..=m)
        .map(|k| {
            let sum: Complex64 = mu.support().iter().map(|&w| unit_feature(k, w)).sum();
            sum * inv_n
        })
        .collect();
    MomentVector::new(entries, n)
}

/// Truncated square-wave series `Σ_{k ≤ m, k odd} 4/(πk) sin(kΔ)`.
pub fn truncated_sign(delta: f64, m: usize) -> f64 {
    (1..=m)
        .step_by(2)
        .map(|k| coefficient(k) * (k as f64 * delta).sin())
        .sum()
}

/// Feature count `2 m_B + 1` for expansion order `m_B`.
pub fn feature_count_for_order(order: usize) -> usize {
    2 * order + 1
}

/// Pointwise error bound `4 (1/(m_B |Δ|) + 1/m_B)` for the order-`m_B` series.
pub fn gibbs_error_bound(delta: f64, order: usize) -> f64 {
    let mb = order as f64;
    4.0 * (1.0 / (mb * delta.abs()) + 1.0 / mb)
}

/// Uniform bound on the truncated series near the origin (`|Δ| ≤ π/4`).
pub const NEAR_ORIGIN_BOUND: f64 = 1.9;

/// `-Im Σ_k c_k conj(Φ_k(w)) Φ_k(v)`, a smooth surrogate for `sign(v - w)`.
pub fn approx_sign(v: f64, w: f64, coeffs: &SignCoefficients) -> f64 {
    let inner: Complex64 = coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &c)| c * (unit_feature(idx + 1, w).conj() * unit_feature(idx + 1, v)))
        .sum();
    -inner.im
}

/// Moment-based estimate of `Σ_j sign(v - w_j)` for the measure behind `phimu`.
pub fn approx_cross_subgradient(v: f64, phimu: &MomentVector, coeffs: &SignCoefficients) -> Result<f64> {
    ensure_same_len(coeffs.m(), phimu.m())?;
    let inner: Complex64 = coeffs
        .values()
        .iter()
        .zip(phimu.entries())
        .enumerate()
        .map(|(idx, (&c, &mk))| c * mk.conj() * unit_feature(idx + 1, v))
        .sum();
    Ok(-(phimu.n() as f64) * inner.im)
}

const BLOCK: usize = 512;
const LANES: usize = 16;

/// Repeated evaluation of [`approx_cross_subgradient`] for one moment vector.
///
/// Only odd frequencies carry weight, so the sum is rewritten as
/// `z Σ_r a_r (z²)^r` with `z = exp(-iv)` and `a_r = c_{2r+1} conj(M_{2r+1})`.
/// Powers of `z²` come from a per-position table of exact phases inside a
/// block and an exact phase per block, so rounding does not accumulate
/// with the frequency. Summation order is fixed and never fused, so results
/// are bitwise identical across runs, batch sizes and instruction sets.
#[derive(Debug, Clone)]
pub struct CrossTermEvaluator {
    weights_re: Vec<f64>,
    weights_im: Vec<f64>,
    n: f64,
}

impl CrossTermEvaluator {
    pub fn new(phimu: &MomentVector, coeffs: &SignCoefficients) -> Result<Self> {
        ensure_same_len(coeffs.m(), phimu.m())?;
        let (weights_re, weights_im) = coeffs
            .values()
            .iter()
            .zip(phimu.entries())
            .step_by(2)
            .map(|(&c, &mk)| {
                let a = c * mk.conj();
                (a.re, a.im)
            })
            .unzip();
        Ok(Self {
            weights_re,
            weights_im,
            n: phimu.n() as f64,
        })
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.eval_many(&[v])[0]
    }

    /// Evaluates several positions in one pass over the weights.
    pub fn eval_many(&self, positions: &[f64]) -> Vec<f64> {
        let span = self.weights_re.len().min(BLOCK);
        let tables: Vec<PhaseTable> = positions
            .iter()
            .map(|&v| {
                let (im, re) = (0..span)
                    .map(|t| {
                        let (s, c) = (2.0 * t as f64 * v).sin_cos();
                        (-s, c)
                    })
                    .unzip();
                PhaseTable { v, re, im }
            })
            .collect();

        let totals = accumulate(&self.weights_re, &self.weights_im, &tables);
        totals
            .iter()
            .zip(positions)
            .map(|(total, &v)| {
                let (s, c) = v.sin_cos();
                -self.n * (Complex64::new(c, -s) * total).im
            })
            .collect()
    }
}

struct PhaseTable {
    v: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

type DotKernel = fn(&[f64], &[f64], &[f64], &[f64]) -> (f64, f64);

fn accumulate(ar: &[f64], ai: &[f64], tables: &[PhaseTable]) -> Vec<Complex64> {
    accumulate_with(ar, ai, tables, select_kernel())
}

fn select_kernel() -> DotKernel {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            return simd::dot_avx512;
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            return simd::dot_avx2;
        }
    }
    complex_dot
}

fn accumulate_with(ar: &[f64], ai: &[f64], tables: &[PhaseTable], dot: DotKernel) -> Vec<Complex64> {
    let mut totals = vec![Complex64::new(0.0, 0.0); tables.len()];
    for start in (0..ar.len()).step_by(BLOCK) {
        let end = (start + BLOCK).min(ar.len());
        let len = end - start;
        for (total, table) in totals.iter_mut().zip(tables) {
            let (sr, si) = dot(&ar[start..end], &ai[start..end], &table.re[..len], &table.im[..len]);
            let (s, c) = (2.0 * start as f64 * table.v).sin_cos();
            *total += Complex64::new(c, -s) * Complex64::new(sr, si);
        }
    }
    totals
}

/// `Σ_t (ar + i ai)(pr + i pi)` split over sixteen lanes: element `t` of the
/// body goes to lane `t mod 16`, tail elements go to lane 0, and the lanes
/// are combined pairwise. The SIMD kernels follow exactly this order with
/// unfused multiplies and adds.
fn complex_dot(ar: &[f64], ai: &[f64], pr: &[f64], pi: &[f64]) -> (f64, f64) {
    let mut acc_re = [0.0; LANES];
    let mut acc_im = [0.0; LANES];
    let (ar_body, ar_tail) = ar.as_chunks::<LANES>();
    let (ai_body, ai_tail) = ai.as_chunks::<LANES>();
    let (pr_body, pr_tail) = pr.as_chunks::<LANES>();
    let (pi_body, pi_tail) = pi.as_chunks::<LANES>();
    for (((a_r, a_i), p_r), p_i) in ar_body.iter().zip(ai_body).zip(pr_body).zip(pi_body) {
        for l in 0..LANES {
            acc_re[l] += a_r[l] * p_r[l] - a_i[l] * p_i[l];
            acc_im[l] += a_r[l] * p_i[l] + a_i[l] * p_r[l];
        }
    }
    finish_dot(acc_re, acc_im, ar_tail, ai_tail, pr_tail, pi_tail)
}

#[inline(always)]
fn finish_dot(
    mut acc_re: [f64; LANES],
    mut acc_im: [f64; LANES],
    ar: &[f64],
    ai: &[f64],
    pr: &[f64],
    pi: &[f64],
) -> (f64, f64) {
    for (((a_r, a_i), p_r), p_i) in ar.iter().zip(ai).zip(pr).zip(pi) {
        acc_re[0] += a_r * p_r - a_i * p_i;
        acc_im[0] += a_r * p_i + a_i * p_r;
    }
    (tree_sum(acc_re), tree_sum(acc_im))
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use std::arch::x86_64::*;

    use super::{finish_dot, LANES};

    pub(super) fn dot_avx2(ar: &[f64], ai: &[f64], pr: &[f64], pi: &[f64]) -> (f64, f64) {
        // SAFETY: only selected after runtime detection of AVX2.
        unsafe { dot_avx2_impl(ar, ai, pr, pi) }
    }

    pub(super) fn dot_avx512(ar: &[f64], ai: &[f64], pr: &[f64], pi: &[f64]) -> (f64, f64) {
        // SAFETY: only selected after runtime detection of AVX-512F.
        unsafe { dot_avx512_impl(ar, ai, pr, pi) }
    }

    #[target_feature(enable = "avx2")]
    unsafe fn dot_avx2_impl(ar: &[f64], ai: &[f64], pr: &[f64], pi: &[f64]) -> (f64, f64) {
        let body = ar.len() / LANES * LANES;
        let mut re = [_mm256_setzero_pd(); 4];
        let mut im = [_mm256_setzero_pd(); 4];
        let mut t = 0;
        while t < body {
            for h in 0..4 {
                let o = t + 4 * h;
                let a_r = _mm256_loadu_pd(ar.as_ptr().add(o));
                let a_i = _mm256_loadu_pd(ai.as_ptr().add(o));
                let p_r = _mm256_loadu_pd(pr.as_ptr().add(o));
                let p_i = _mm256_loadu_pd(pi.as_ptr().add(o));
                let real = _mm256_sub_pd(_mm256_mul_pd(a_r, p_r), _mm256_mul_pd(a_i, p_i));
                let imag = _mm256_add_pd(_mm256_mul_pd(a_r, p_i), _mm256_mul_pd(a_i, p_r));
                re[h] = _mm256_add_pd(re[h], real);
                im[h] = _mm256_add_pd(im[h], imag);
            }
            t += LANES;
        }
        let mut acc_re = [0.0; LANES];
        let mut acc_im = [0.0; LANES];
        for h in 0..4 {
            _mm256_storeu_pd(acc_re.as_mut_ptr().add(4 * h), re[h]);
            _mm256_storeu_pd(acc_im.as_mut_ptr().add(4 * h), im[h]);
        }
        finish_dot(acc_re, acc_im, &ar[body..], &ai[body..], &pr[body..], &pi[body..])
    }

    #[target_feature(enable = "avx512f")]
    unsafe fn dot_avx512_impl(ar: &[f64], ai: &[f64], pr: &[f64], pi: &[f64]) -> (f64, f64) {
        let body = ar.len() / LANES * LANES;
        let mut re = [_mm512_setzero_pd(); 2];
        let mut im = [_mm512_setzero_pd(); 2];
        let mut t = 0;
        while t < body {
            for h in 0..2 {
                let o = t + 8 * h;
                let a_r = _mm512_loadu_pd(ar.as_ptr().add(o));
                let a_i = _mm512_loadu_pd(ai.as_ptr().add(o));
                let p_r = _mm512_loadu_pd(pr.as_ptr().add(o));
                let p_i = _mm512_loadu_pd(pi.as_ptr().add(o));
                let real = _mm512_sub_pd(_mm512_mul_pd(a_r, p_r), _mm512_mul_pd(a_i, p_i));
                let imag = _mm512_add_pd(_mm512_mul_pd(a_r, p_i), _mm512_mul_pd(a_i, p_r));
                re[h] = _mm512_add_pd(re[h], real);
                im[h] = _mm512_add_pd(im[h], imag);
            }
            t += LANES;
        }
        let mut acc_re = [0.0; LANES];
        let mut acc_im = [0.0; LANES];
        for h in 0..2 {
            _mm512_storeu_pd(acc_re.as_mut_ptr().add(8 * h), re[h]);
            _mm512_storeu_pd(acc_im.as_mut_ptr().add(8 * h), im[h]);
        }
        finish_dot(acc_re, acc_im, &ar[body..], &ai[body..], &pr[body..], &pi[body..])
    }
}

/// Pairwise reduction of the lanes in a fixed order.
#[inline(always)]
fn tree_sum(mut acc: [f64; LANES]) -> f64 {
    let mut width = LANES;
    while width > 1 {
        width /= 2;
        for l in 0..width {
            acc[l] = acc[2 * l] + acc[2 * l + 1];
        }
    }
    acc[0]
}
