//! Real-time evolution, fidelity and observable traces, and the closed-form
//! revival formulas.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;

use crate::bessel::bessel_j0;
use crate::error::{consistency, domain, Error, Result};
use crate::hilbert::ConstrainedBasis;
use crate::linalg::{self, dense_eigh};
use crate::sparse::SparseOperator;
#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Propagation method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Krylov,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Krylov => "krylov",
        }
    }
}

const NORM_TOL: f64 = 1e-9;

fn check_state(h: &SparseOperator, psi: &[C64]) -> Result<()> {
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.len(),
        });
    }
    let n = linalg::norm(psi);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(domain!("initial state is not normalized (norm {n})"));
    }
    Ok(())
}

fn check_hermitian(h: &SparseOperator) -> Result<()> {
    if !h.is_hermitian(1e-12 * h.max_abs().max(1.0)) {
        return Err(domain!("generator is not hermitian"));
    }
    Ok(())
}

/// Exact propagation from a full eigendecomposition.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    energies: Vec<f64>,
    vectors: DMatrix<C64>,
}

impl SpectralPropagator {
    /// Largest dimension accepted for dense diagonalization.
    pub const MAX_DIM: usize = 4096;

    pub fn new(h: &SparseOperator) -> Result<Self> {
        check_hermitian(h)?;
        if h.dim() > Self::MAX_DIM {
            return Err(Error::Capacity(alloc::format!(
                "dense propagation limited to dimension {}, got {}",
                Self::MAX_DIM,
                h.dim()
            )));
        }
        let (energies, vectors) = dense_eigh(h.to_dense());
        Ok(Self { energies, vectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Eigenbasis coefficients of `psi`.
    pub fn coefficients(&self, psi: &[C64]) -> Vec<C64> {
        (0..self.energies.len())
            .map(|k| self.vectors.column(k).iter().zip(psi).map(|(u, x)| u.conj() * x).sum())
            .collect()
    }

    /// `ψ(t)` given eigenbasis coefficients of `ψ(0)`.
    pub fn from_coefficients(&self, coeffs: &[C64], t: f64) -> Vec<C64> {
        let dim = self.energies.len();
        let mut out = vec![C64::zero(); dim];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let phase = C64::from_polar(1.0, -self.energies[k] * t) * c;
            for (o, u) in out.iter_mut().zip(self.vectors.column(k).iter()) {
                *o += u * phase;
            }
        }
        out
    }

    pub fn propagate(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        if psi.len() != self.energies.len() {
            return Err(Error::DimensionMismatch {
                expected: self.energies.len(),
                found: psi.len(),
            });
        }
        Ok(self.from_coefficients(&self.coefficients(psi), t))
    }
}

/// Settings for [`KrylovPropagator`].
#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Krylov subspace dimension.
    pub dim: usize,
    /// Bound on the a-posteriori error estimate of every substep.
    pub tol: f64,
    /// Substeps allowed per call to [`KrylovPropagator::propagate`].
    pub max_substeps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            dim: 30,
            tol: 1e-10,
            max_substeps: 100_000,
        }
    }
}

/// Short-iterate Lanczos propagation with adaptive substeps.
///
/// Each substep builds an orthonormal Krylov basis `V` with tridiagonal
/// `T = V†HV` and returns `‖ψ‖ V e^{-iτT} e₁`. The step `τ` is halved until
/// `β_m |[e^{-iτT}]_{m,1}|` meets the tolerance.
#[derive(Clone, Debug)]
pub struct KrylovPropagator<'a> {
    h: &'a SparseOperator,
    opts: KrylovOptions,
}

impl<'a> KrylovPropagator<'a> {
    pub fn new(h: &'a SparseOperator, opts: KrylovOptions) -> Result<Self> {
        check_hermitian(h)?;
        if opts.dim < 2 || !(opts.tol > 0.0) {
            return Err(domain!("Krylov dimension must be at least 2 and tolerance positive"));
        }
        Ok(Self { h, opts })
    }

    pub fn propagate(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        if psi.len() != self.h.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.h.dim(),
                found: psi.len(),
            });
        }
        let mut v = psi.to_vec();
        let mut remaining = t;
        let mut tau = t;
        let mut steps = 0;
        let mut worst = 0.0f64;
        while remaining.abs() > 0.0 {
            steps += 1;
            if steps > self.opts.max_substeps {
                return Err(Error::NonConvergence {
                    method: "Krylov propagation",
                    achieved: worst,
                    requested: self.opts.tol,
                });
            }
            tau = if tau.abs() > remaining.abs() { remaining } else { tau };
            let (next, used, err) = self.substep(&v, tau)?;
            worst = worst.max(err);
            v = next;
            remaining -= used;
            // let the step grow again after a successful halving
            tau = used * 2.0;
            if remaining.abs() < 1e-15 * t.abs() {
                break;
            }
        }
        Ok(v)
    }

    /// One substep of at most `tau`; returns the new state, the step taken
    /// and its error estimate.
    fn substep(&self, v: &[C64], tau: f64) -> Result<(Vec<C64>, f64, f64)> {
        let dim = v.len();
        let nrm = linalg::norm(v);
        if nrm == 0.0 {
            return Ok((v.to_vec(), tau, 0.0));
        }
        let m_max = self.opts.dim.min(dim);
        let mut basis: Vec<Vec<C64>> = vec![v.iter().map(|z| z / nrm).collect()];
        let mut alphas = Vec::with_capacity(m_max);
        let mut betas = Vec::with_capacity(m_max);
        let mut w = vec![C64::zero(); dim];
        let mut tail = 0.0;
        for j in 0..m_max {
            self.h.apply_into(&basis[j], &mut w)?;
            let a = linalg::dot(&basis[j], &w).re;
            alphas.push(a);
            for _ in 0..2 {
                for q in &basis {
                    let c = linalg::dot(q, &w);
                    linalg::axpy(-c, q, &mut w);
                }
            }
            let b = linalg::norm(&w);
            if j + 1 == m_max || b <= 1e-13 * a.abs().max(1.0) {
                tail = if j + 1 == m_max { b } else { 0.0 };
                break;
            }
            betas.push(b);
            basis.push(w.iter().map(|z| z / b).collect());
        }
        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c || c + 1 == r {
                betas[r.min(c)]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);

        let mut step = tau;
        for _ in 0..60 {
            // y = e^{-iτT} e1
            let y: Vec<C64> = (0..m)
                .map(|r| {
                    (0..m)
                        .map(|k| {
                            let u = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                            C64::from_polar(u, -eig.eigenvalues[k] * step)
                        })
                        .sum()
                })
                .collect();
            let err = tail * y[m - 1].norm();
            if err <= self.opts.tol {
                let mut out = vec![C64::zero(); dim];
                for (q, c) in basis.iter().zip(&y) {
                    linalg::axpy(c * nrm, q, &mut out);
                }
                return Ok((out, step, err));
            }
            step /= 2.0;
        }
        Err(Error::NonConvergence {
            method: "Krylov propagation",
            achieved: f64::NAN,
            requested: self.opts.tol,
        })
    }
}

/// Options shared by [`evolve`] and the series functions.
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// `None` picks spectral up to `dense_threshold`, Krylov above.
    pub method: Option<Method>,
    pub dense_threshold: usize,
    pub krylov: KrylovOptions,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: None,
            dense_threshold: SpectralPropagator::MAX_DIM,
            krylov: KrylovOptions::default(),
        }
    }
}

impl EvolveOptions {
    pub fn resolve(&self, dim: usize) -> Method {
        self.method.unwrap_or(if dim <= self.dense_threshold {
            Method::Spectral
        } else {
            Method::Krylov
        })
    }
}

/// A propagator of either kind.
#[derive(Clone, Debug)]
pub enum Propagator<'a> {
    Spectral(SpectralPropagator),
    Krylov(KrylovPropagator<'a>),
}

impl<'a> Propagator<'a> {
    pub fn new(h: &'a SparseOperator, opts: &EvolveOptions) -> Result<Self> {
        Ok(match opts.resolve(h.dim()) {
            Method::Spectral => Propagator::Spectral(SpectralPropagator::new(h)?),
            Method::Krylov => Propagator::Krylov(KrylovPropagator::new(h, opts.krylov)?),
        })
    }

    pub fn method(&self) -> Method {
        match self {
            Propagator::Spectral(_) => Method::Spectral,
            Propagator::Krylov(_) => Method::Krylov,
        }
    }

    pub fn propagate(&self, psi: &[C64], t: f64) -> Result<Vec<C64>> {
        match self {
            Propagator::Spectral(p) => p.propagate(psi, t),
            Propagator::Krylov(p) => p.propagate(psi, t),
        }
    }
}

/// `e^{-iHt} ψ₀`.
pub fn evolve(h: &SparseOperator, psi0: &[C64], t: f64, opts: &EvolveOptions) -> Result<Vec<C64>> {
    check_state(h, psi0)?;
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let out = Propagator::new(h, opts)?.propagate(psi0, t)?;
    let n = linalg::norm(&out);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(consistency!("evolution lost unitarity (norm {n})"));
    }
    Ok(out)
}

/// A named expectation-value series.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub name: String,
    pub values: Vec<f64>,
}

/// Fidelity and observable traces on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct QuenchResult {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub observables: Vec<Observable>,
    pub method: Method,
}

impl QuenchResult {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.values.as_slice())
    }
}

/// `n` equally spaced times from 0 to `t_max` inclusive.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Evolve `psi0` across `times` and record `|⟨ψ₀|ψ(t)⟩|²` and `⟨O⟩(t)` for
/// every named observable.
///
/// The spectral method evaluates each time independently; the Krylov method
/// steps from one sample to the next.
pub fn fidelity_series(
    h: &SparseOperator,
    psi0: &[C64],
    times: &[f64],
    observables: &[(&str, &SparseOperator)],
    opts: &EvolveOptions,
) -> Result<QuenchResult> {
    check_state(h, psi0)?;
    if times.first() != Some(&0.0) {
        return Err(domain!("time grid must start at 0"));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(domain!("time grid must be ascending"));
    }
    for (name, o) in observables {
        if o.dim() != h.dim() {
            return Err(domain!(
                "observable {name} has dimension {}, expected {}",
                o.dim(),
                h.dim()
            ));
        }
    }
    let prop = Propagator::new(h, opts)?;
    let mut fidelity = Vec::with_capacity(times.len());
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(times.len()); observables.len()];

    let mut record = |psi: &[C64]| -> Result<()> {
        let n = linalg::norm(psi);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(consistency!("evolution lost unitarity (norm {n})"));
        }
        fidelity.push(linalg::dot(psi0, psi).norm_sqr());
        for (s, (_, o)) in series.iter_mut().zip(observables) {
            s.push(o.expectation(psi)?.re);
        }
        Ok(())
    };

    match &prop {
        Propagator::Spectral(p) => {
            let coeffs = p.coefficients(psi0);
            for &t in times {
                record(&p.from_coefficients(&coeffs, t))?;
            }
        }
        Propagator::Krylov(p) => {
            let mut psi = psi0.to_vec();
            let mut last = 0.0;
            for &t in times {
                if t > last {
                    psi = p.propagate(&psi, t - last)?;
                    last = t;
                }
                record(&psi)?;
            }
        }
    }

    if (fidelity[0] - 1.0).abs() > 1e-12 {
        return Err(consistency!("fidelity at t = 0 is {}", fidelity[0]));
    }
    if let Some(bad) = fidelity.iter().find(|&&x| !(-1e-12..=1.0 + 1e-12).contains(&x)) {
        return Err(consistency!("fidelity {bad} outside [0, 1]"));
    }
    Ok(QuenchResult {
        times: times.to_vec(),
        fidelity,
        observables: observables
            .iter()
            .zip(series)
            .map(|((name, _), values)| Observable {
                name: String::from(*name),
                values,
            })
            .collect(),
        method: prop.method(),
    })
}

/// `⟨F⟩(t)` for a state of definite fermion number `f`, checked against
/// `f − 1 ≤ ⟨F⟩ ≤ f + 1` at every sample.
///
/// The bound holds for generators of the form `Q + Q† + μF` and for any
/// generator conserving `F`.
pub fn fermion_number_trace(
    h: &SparseOperator,
    basis: &ConstrainedBasis,
    psi0: &[C64],
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<f64>> {
    let f = basis
        .sector_of_vector(psi0, 1e-12)
        .ok_or_else(|| domain!("initial state is not sector-pure"))?;
    let number = crate::operators::build_fermion_number(basis)?;
    let res = fidelity_series(h, psi0, times, &[("F", &number)], opts)?;
    let trace = res.observables.into_iter().next().unwrap().values;
    let lo = f as f64 - 1.0 - 1e-9;
    let hi = f as f64 + 1.0 + 1e-9;
    if let Some((k, x)) = trace.iter().enumerate().find(|(_, x)| !(lo..=hi).contains(*x)) {
        return Err(consistency!(
            "<F> = {x} at t = {} leaves [f - 1, f + 1] for f = {f}",
            times[k]
        ));
    }
    Ok(trace)
}

/// `cos²(√(N/2) t)`, the Z2 return probability at `μ = 0`.
pub fn z2_fidelity_analytic(n_sites: usize, t: f64) -> Result<f64> {
    if n_sites % 2 == 1 || n_sites < 4 {
        return Err(domain!(
            "the Z2 state needs an even ring of at least 4 sites, got {n_sites}"
        ));
    }
    let c = ((n_sites as f64 / 2.0).sqrt() * t).cos();
    Ok(c * c)
}

/// Return probability of a doublet member with M1 energy `E` under
/// `Q + Q† + μF`: `cos²(Ωt) + (μ/2Ω)² sin²(Ωt)` with `Ω = √(E + μ²/4)`.
pub fn doublet_fidelity(energy: f64, mu: f64, t: f64) -> Result<f64> {
    if !(energy >= 0.0) {
        return Err(domain!("doublet energy must be non-negative, got {energy}"));
    }
    let omega = (energy + mu * mu / 4.0).sqrt();
    if omega == 0.0 {
        return Ok(1.0);
    }
    let (s, c) = (omega * t).sin_cos();
    let r = mu / (2.0 * omega);
    Ok(c * c + r * r * s * s)
}

fn check_single_fermion(n_sites: usize) -> Result<()> {
    if n_sites < 3 {
        return Err(domain!("ring needs at least 3 sites, got {n_sites}"));
    }
    Ok(())
}

/// `(1/N²) (Σ_k cos(√E_k t))²` with `E_k = N − 2 + 2 cos k`, `k = 2πn/N`:
/// the return probability of one fermion under `Q + Q†`.
pub fn single_fermion_fidelity_exact(n_sites: usize, t: f64) -> Result<f64> {
    check_single_fermion(n_sites)?;
    let n = n_sites as f64;
    let s: f64 = (0..n_sites)
        .map(|j| {
            let k = 2.0 * core::f64::consts::PI * j as f64 / n;
            ((n - 2.0 + 2.0 * k.cos()).sqrt() * t).cos()
        })
        .sum();
    Ok(s * s / (n * n))
}

/// Large-`N` form `cos²(√(N−2) t) J0²(t/√(N−2))`.
pub fn single_fermion_fidelity_bessel(n_sites: usize, t: f64) -> Result<f64> {
    check_single_fermion(n_sites)?;
    let r = (n_sites as f64 - 2.0).sqrt();
    let c = (r * t).cos();
    let j = bessel_j0(t / r);
    Ok(c * c * j * j)
}
