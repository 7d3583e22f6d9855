//! Bethe-ansatz states of the M1 chain: scattering phase, energy and
//! residuals, the permutation-sum wavefunction, and the explicit solution
//! families (single fermion, unit-root augmentation, special `e^{±iπ/3}`
//! states and their dressings, inversion partners).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{consistency, domain, Error, Result};
use crate::hilbert::ConstrainedBasis;
use crate::linalg;
#[allow(unused_imports)]
use num_traits::Float;

use crate::C64;

/// Residual below which a parameter set counts as a solution.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Largest `f` accepted by [`build_bethe_state`] (`8! = 40320` terms).
pub const MAX_PERMUTATION_FERMIONS: usize = 8;

// distance at which a parameter is treated as exactly e^{±iπ/3}
const SPECIAL_TOL: f64 = 1e-12;

/// Sign of the special parameter `e^{±iπ/3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn root(self) -> C64 {
        let s = core::f64::consts::FRAC_PI_3;
        match self {
            Branch::Plus => C64::from_polar(1.0, s),
            Branch::Minus => C64::from_polar(1.0, -s),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    fn of(mu: C64) -> Option<Branch> {
        [Branch::Plus, Branch::Minus]
            .into_iter()
            .find(|b| (mu - b.root()).norm() <= SPECIAL_TOL)
    }
}

/// Two-body phase shift
/// `g(a, b) = −a(ab − a + 1) / (b(ab − b + 1))`.
///
/// Arguments equal to `e^{±iπ/3}` use the limiting forms
/// `g(w, w) = 1`, `g(w, μ) = −1/μ` and `g(μ, w) = −μ`.
pub fn scattering_g(a: C64, b: C64) -> Result<C64> {
    match (Branch::of(a), Branch::of(b)) {
        (Some(x), Some(y)) if x == y => return Ok(C64::new(1.0, 0.0)),
        (Some(_), _) => return nonzero(b).map(|b| -b.inv()),
        (_, Some(_)) => return Ok(-a),
        _ => {}
    }
    let num = a * (a * b - a + 1.0);
    let den = b * (a * b - b + 1.0);
    if den.norm() <= 1e-300 || !(num / den).is_finite() {
        return Err(domain!("phase shift g({a}, {b}) is singular"));
    }
    Ok(-num / den)
}

fn nonzero(mu: C64) -> Result<C64> {
    if mu.norm() == 0.0 || !mu.is_finite() {
        return Err(domain!("Bethe parameters must be finite and nonzero, got {mu}"));
    }
    Ok(mu)
}

/// `N − 2f + Σ_j (μ_j + 1/μ_j)` without discarding the imaginary part.
pub fn bethe_energy_complex(mus: &[C64], n_sites: usize) -> Result<C64> {
    let mut e = C64::new(n_sites as f64 - 2.0 * mus.len() as f64, 0.0);
    for &mu in mus {
        let mu = nonzero(mu)?;
        // e^{±iπ/3} contributes exactly 2cos(π/3) = 1
        e += match Branch::of(mu) {
            Some(_) => C64::new(1.0, 0.0),
            None => mu + mu.inv(),
        };
    }
    Ok(e)
}

/// Real Bethe energy; an imaginary part above `1e-9` is an error.
pub fn bethe_energy(mus: &[C64], n_sites: usize) -> Result<f64> {
    let e = bethe_energy_complex(mus, n_sites)?;
    if e.im.abs() > 1e-9 {
        return Err(consistency!("Bethe energy has imaginary part {}", e.im));
    }
    Ok(e.re)
}

/// `max_j |μ_j^N − (−1)^{f−1} Π_{k≠j} g(μ_j, μ_k)|`.
pub fn bethe_residuals(mus: &[C64], n_sites: usize) -> Result<f64> {
    let f = mus.len();
    let sign = if f % 2 == 1 { 1.0 } else { -1.0 };
    let mut worst = 0.0f64;
    for (j, &mj) in mus.iter().enumerate() {
        let mj = nonzero(mj)?;
        let mut rhs = C64::new(sign, 0.0);
        for (k, &mk) in mus.iter().enumerate() {
            if k != j {
                rhs *= scattering_g(mj, mk)?;
            }
        }
        worst = worst.max((mj.powi(n_sites as i32) - rhs).norm());
    }
    Ok(worst)
}

/// A parameter set with its derived quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheSolution {
    pub n_sites: usize,
    pub mus: Vec<C64>,
    pub fermion_number: usize,
    /// `e^{ip} = Π_j μ_j`.
    pub momentum_phase: C64,
    pub energy: f64,
    pub residual: f64,
}

impl BetheSolution {
    /// Evaluate momentum, energy and residual for `mus` on an `n_sites` ring.
    pub fn evaluate(n_sites: usize, mus: Vec<C64>) -> Result<Self> {
        if n_sites < 3 {
            return Err(domain!("ring needs at least 3 sites, got {n_sites}"));
        }
        let energy = bethe_energy(&mus, n_sites)?;
        let residual = bethe_residuals(&mus, n_sites)?;
        let momentum_phase = mus.iter().product();
        Ok(Self {
            n_sites,
            fermion_number: mus.len(),
            mus,
            momentum_phase,
            energy,
            residual,
        })
    }

    pub fn is_solution(&self, tol: f64) -> bool {
        self.residual <= tol
    }

    /// Momentum `p ∈ (−π, π]`.
    pub fn momentum(&self) -> f64 {
        self.momentum_phase.arg()
    }
}

/// Why a requested family member does not exist.
#[derive(Clone, Debug, PartialEq)]
pub struct Inadmissible {
    pub reason: String,
    /// `|lhs − rhs|` of the violated condition.
    pub mismatch: f64,
}

/// Result of a family construction that may legitimately not exist.
#[derive(Clone, Debug, PartialEq)]
pub enum Admissibility {
    Admissible(BetheSolution),
    Inadmissible(Inadmissible),
}

impl Admissibility {
    pub fn solution(self) -> Option<BetheSolution> {
        match self {
            Admissibility::Admissible(s) => Some(s),
            Admissibility::Inadmissible(_) => None,
        }
    }

    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible(_))
    }
}

/// All permutations of `0..f` with their amplitudes `A_P`.
///
/// `A_identity = 1`, and every pair of labels `j < k` with `k` placed
/// before `j` contributes `g(μ_k, μ_j)`. Two permutations related by an
/// adjacent exchange then differ by `g(left, right)` of the exchanged pair.
pub fn permutation_amplitudes(mus: &[C64]) -> Result<Vec<(Vec<usize>, C64)>> {
    let f = mus.len();
    let mut g = vec![vec![C64::zero(); f]; f];
    for a in 0..f {
        for b in 0..f {
            if a != b {
                g[a][b] = scattering_g(mus[a], mus[b])?;
            }
        }
    }
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..f).collect();
    loop {
        let mut amp = C64::new(1.0, 0.0);
        for x in 0..f {
            for y in x + 1..f {
                if perm[x] > perm[y] {
                    amp *= g[perm[x]][perm[y]];
                }
            }
        }
        out.push((perm.clone(), amp));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Normalized Bethe state `Σ φ(i₁..i_f) c†_{i₁}..c†_{i_f}|0⟩` with
/// `φ = Σ_P A_P μ_{P₁}^{i₁} ⋯ μ_{P_f}^{i_f}`, over the full basis.
pub fn build_bethe_state(mus: &[C64], basis: &ConstrainedBasis) -> Result<Vec<C64>> {
    let f = mus.len();
    if f > MAX_PERMUTATION_FERMIONS {
        return Err(Error::Capacity(alloc::format!(
            "permutation sum limited to f <= {MAX_PERMUTATION_FERMIONS}, got {f}"
        )));
    }
    if f > basis.max_fermions() {
        return Err(domain!("f = {f} exceeds floor(N/2) for N = {}", basis.n_sites()));
    }
    let n = basis.n_sites();
    for &mu in mus {
        nonzero(mu)?;
    }
    // powers[j][i] = μ_j^i for sites i = 1..=N
    let powers: Vec<Vec<C64>> = mus
        .iter()
        .map(|&mu| {
            let mut row = Vec::with_capacity(n + 1);
            let mut x = C64::new(1.0, 0.0);
            for _ in 0..=n {
                row.push(x);
                x *= mu;
            }
            row
        })
        .collect();
    let perms = permutation_amplitudes(mus)?;

    let mut out = vec![C64::zero(); basis.dim()];
    let mut scale = 0.0;
    let mut sites = Vec::with_capacity(f);
    for k in basis.sector_range(f) {
        sites.clear();
        sites.extend(basis.state(k).occupied_sites());
        let mut phi = C64::zero();
        for (p, amp) in &perms {
            let mut term = *amp;
            for (slot, &site) in sites.iter().enumerate() {
                term *= powers[p[slot]][site];
            }
            scale += term.norm_sqr();
            phi += term;
        }
        out[k] = phi;
    }
    let nrm = linalg::normalize(&mut out);
    if !(nrm > 1e-12 * scale.sqrt()) {
        return Err(domain!(
            "Bethe wavefunction vanishes (relative norm {:e}); parameters are inadmissible",
            nrm / scale.sqrt().max(f64::MIN_POSITIVE)
        ));
    }
    Ok(out)
}

/// The all-`e^{±iπ/3}` parameter set, admissible when
/// `e^{±iπN/3} = (−1)^{f−1}`. Its energy is `N − f`.
pub fn special_solution(n_sites: usize, f: usize, branch: Branch) -> Result<Admissibility> {
    if n_sites < 3 {
        return Err(domain!("ring needs at least 3 sites, got {n_sites}"));
    }
    if f == 0 || f > n_sites / 2 {
        return Err(domain!("f must lie in 1..={}, got {f}", n_sites / 2));
    }
    let lhs = C64::from_polar(1.0, branch.sign() * core::f64::consts::FRAC_PI_3 * (n_sites % 6) as f64);
    let rhs = if f % 2 == 1 { 1.0 } else { -1.0 };
    let mismatch = (lhs - rhs).norm();
    if mismatch > RESIDUAL_TOL {
        return Ok(Admissibility::Inadmissible(Inadmissible {
            reason: alloc::format!("e^(±iπN/3) = {lhs:.3} but (-1)^(f-1) = {rhs} for N = {n_sites}, f = {f}"),
            mismatch,
        }));
    }
    let sol = BetheSolution::evaluate(n_sites, vec![branch.root(); f])?;
    verify(&sol, "special solution")?;
    Ok(Admissibility::Admissible(sol))
}

fn verify(sol: &BetheSolution, what: &str) -> Result<()> {
    if !sol.is_solution(RESIDUAL_TOL) {
        return Err(consistency!("{what} has residual {:e}", sol.residual));
    }
    Ok(())
}

/// Append `n_plus` copies of `e^{iπ/3}` and `n_minus` of `e^{−iπ/3}` to a
/// verified solution, on a ring enlarged by `n_plus + n_minus` sites.
///
/// With `e^{ip}` the base momentum phase, the enlarged set solves the Bethe
/// equations iff `e^{iπ(N+n₊)/3} = (−1)^{n₊−1} e^{−ip}` when `n₊ > 0` and
/// `e^{−iπ(N+n₋)/3} = (−1)^{n₋−1} e^{−ip}` when `n₋ > 0`. Both follow from
/// `g(w, μ) = −1/μ` and `g(w, w̄) = −w̄⁻¹`; note that `e^{−ip}` appears in
/// both, so the second is not the complex conjugate of the first unless
/// `p ∈ {0, π}`. The base
/// parameters' own equations hold automatically, and each added parameter
/// contributes exactly 1 to `Σ(μ + 1/μ)`, so the energy equals the base
/// energy on the original ring.
pub fn dress_solution(base: &BetheSolution, n_plus: usize, n_minus: usize) -> Result<Admissibility> {
    if !base.is_solution(RESIDUAL_TOL) {
        return Err(domain!("base parameters have residual {:e}", base.residual));
    }
    if n_plus == 0 && n_minus == 0 {
        return Err(domain!("dressing needs at least one added parameter"));
    }
    if base.mus.iter().any(|&m| Branch::of(m).is_some()) {
        return Err(domain!(
            "dressing conditions assume base parameters other than e^(±iπ/3)"
        ));
    }
    let n = base.n_sites;
    let eip = base.momentum_phase;
    let parity = |m: usize| if m % 2 == 1 { 1.0 } else { -1.0 };
    let third = core::f64::consts::FRAC_PI_3;
    let conditions = [
        (
            n_plus,
            "e^(iπ(N+n+)/3) = (-1)^(n+ - 1) e^(-ip)",
            C64::from_polar(1.0, third * ((n + n_plus) % 6) as f64),
            eip.inv() * parity(n_plus),
        ),
        (
            n_minus,
            "e^(-iπ(N+n-)/3) = (-1)^(n- - 1) e^(-ip)",
            C64::from_polar(1.0, -third * ((n + n_minus) % 6) as f64),
            eip.inv() * parity(n_minus),
        ),
    ];
    for (count, name, lhs, rhs) in conditions {
        if count == 0 {
            continue;
        }
        let mismatch = (lhs - rhs).norm();
        if mismatch > 1e-9 {
            return Ok(Admissibility::Inadmissible(Inadmissible {
                reason: alloc::format!("{name} fails: {lhs:.4} vs {rhs:.4}"),
                mismatch,
            }));
        }
    }
    let mut mus = base.mus.clone();
    mus.extend(core::iter::repeat_n(Branch::Plus.root(), n_plus));
    mus.extend(core::iter::repeat_n(Branch::Minus.root(), n_minus));
    let sol = BetheSolution::evaluate(n + n_plus + n_minus, mus)?;
    verify(&sol, "dressed solution")?;
    Ok(Admissibility::Admissible(sol))
}

/// The `N` one-fermion solutions `μ = e^{2πin/N}`, `n = 0..N−1`, with
/// energies `N − 2 + 2cos(2πn/N)`.
pub fn single_fermion_solutions(n_sites: usize) -> Result<Vec<BetheSolution>> {
    (0..n_sites)
        .map(|k| {
            let mu = C64::from_polar(1.0, 2.0 * core::f64::consts::PI * k as f64 / n_sites as f64);
            BetheSolution::evaluate(n_sites, vec![mu])
        })
        .collect()
}

/// `{1/μ_j}`, a solution with momentum `−p` and the same energy.
pub fn inversion_partner(sol: &BetheSolution) -> Result<BetheSolution> {
    let mus = sol.mus.iter().map(|m| m.inv()).collect();
    let partner = BetheSolution::evaluate(sol.n_sites, mus)?;
    if sol.is_solution(RESIDUAL_TOL) {
        verify(&partner, "inversion partner")?;
    }
    Ok(partner)
}

/// `{μ₁, …, μ_f, 1}`, the superpartner with one more fermion.
pub fn append_unit_root(sol: &BetheSolution) -> Result<BetheSolution> {
    let one = C64::new(1.0, 0.0);
    if sol.mus.iter().any(|m| (m - one).norm() <= SPECIAL_TOL) {
        return Err(domain!("parameters already contain 1"));
    }
    let mut mus = sol.mus.clone();
    mus.push(one);
    let out = BetheSolution::evaluate(sol.n_sites, mus)?;
    if sol.is_solution(RESIDUAL_TOL) {
        verify(&out, "unit-root augmentation")?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_m1, build_supercharge};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn w() -> C64 {
        Branch::Plus.root()
    }

    #[test]
    fn phase_shift_examples() {
        assert!((scattering_g(c(2.0, 0.0), c(2.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((scattering_g(w(), c(2.0, 0.0)).unwrap() - c(-0.5, 0.0)).norm() < 1e-15);
        assert_eq!(scattering_g(w(), w()).unwrap(), c(1.0, 0.0));
        let wm = Branch::Minus.root();
        assert_eq!(scattering_g(wm, wm).unwrap(), c(1.0, 0.0));
        assert!((scattering_g(c(0.3, 0.2), wm).unwrap() + c(0.3, 0.2)).norm() < 1e-15);
        assert!(scattering_g(c(0.5, 0.0), c(0.0, 0.0)).is_err());
        assert!(scattering_g(c(2.0, 0.0), c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn special_limits_agree_with_general_formula_nearby() {
        // approaching w along a generic direction recovers -1/μ and -μ
        let mu = c(0.4, -1.1);
        let eps = c(1e-7, 2e-7);
        let num = |a: C64, b: C64| -a * (a * b - a + 1.0) / (b * (a * b - b + 1.0));
        assert!((num(w() + eps, mu) - scattering_g(w(), mu).unwrap()).norm() < 1e-5);
        assert!((num(mu, w() + eps) - scattering_g(mu, w()).unwrap()).norm() < 1e-5);
    }

    #[test]
    fn energy_examples() {
        assert!((bethe_energy(&[c(1.0, 0.0)], 12).unwrap() - 12.0).abs() < 1e-15);
        assert!((bethe_energy(&[w(); 3], 12).unwrap() - 9.0).abs() < 1e-14);
        assert!((bethe_energy(&[c(0.0, 1.0)], 12).unwrap() - 10.0).abs() < 1e-15);
        assert!(bethe_energy(&[c(0.0, 0.0)], 12).is_err());
        assert!(bethe_energy(&[c(2.0, 1.0)], 12).is_err());
    }

    #[test]
    fn residual_examples() {
        for sol in single_fermion_solutions(12).unwrap() {
            assert!(sol.residual < 1e-13);
        }
        assert!(bethe_residuals(&[w(); 3], 12).unwrap() < 1e-12);
        assert!(bethe_residuals(&[w(); 2], 12).unwrap() > 1.0);
    }

    #[test]
    fn special_admissibility_follows_parity_rule() {
        for n in 3..=24 {
            for f in 1..=n / 2 {
                for b in [Branch::Plus, Branch::Minus] {
                    let admissible = special_solution(n, f, b).unwrap().is_admissible();
                    let expected = n % 3 == 0 && ((n / 3) % 2 == 0) == (f % 2 == 1);
                    assert_eq!(admissible, expected, "N = {n}, f = {f}");
                }
            }
        }
        let s = special_solution(12, 5, Branch::Plus).unwrap().solution().unwrap();
        assert!((s.energy - 7.0).abs() < 1e-14);
    }

    #[test]
    fn special_states_are_eigenvectors() {
        for (n, f) in [(12usize, 3usize), (12, 1), (12, 5), (9, 2), (9, 4)] {
            let basis = ConstrainedBasis::new(n).unwrap();
            let h = build_m1(&basis).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                let sol = special_solution(n, f, b).unwrap().solution().unwrap();
                let psi = build_bethe_state(&sol.mus, &basis).unwrap();
                let r = linalg::residual_norm(&h, &psi, sol.energy).unwrap();
                assert!(r < 1e-9, "N = {n}, f = {f}: {r:e}");
                assert_eq!(sol.energy, (n - f) as f64);
            }
        }
    }

    #[test]
    fn single_uniform_state_is_q_dagger_vacuum() {
        let basis = ConstrainedBasis::new(10).unwrap();
        let psi = build_bethe_state(&[c(1.0, 0.0)], &basis).unwrap();
        let q = build_supercharge(&basis).unwrap();
        let mut vac = vec![C64::zero(); basis.dim()];
        vac[0] = c(1.0, 0.0);
        let mut expected = q.adjoint().apply(&vac).unwrap();
        linalg::normalize(&mut expected);
        assert!(psi.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn equal_generic_parameters_vanish() {
        let basis = ConstrainedBasis::new(10).unwrap();
        assert!(matches!(
            build_bethe_state(&[c(2.0, 0.0), c(2.0, 0.0)], &basis),
            Err(Error::Domain(_))
        ));
        let basis = ConstrainedBasis::new(20).unwrap();
        assert!(matches!(
            build_bethe_state(&[c(1.0, 0.0); 9], &basis),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn unit_root_augmentation_is_the_superpartner() {
        let basis = ConstrainedBasis::new(12).unwrap();
        let qd = build_supercharge(&basis).unwrap().adjoint();
        let mut bases = single_fermion_solutions(12).unwrap();
        bases.retain(|s| (s.mus[0] - c(1.0, 0.0)).norm() > 1e-9);
        bases.push(special_solution(12, 3, Branch::Plus).unwrap().solution().unwrap());
        for sol in bases {
            let up = append_unit_root(&sol).unwrap();
            assert!((up.energy - sol.energy).abs() < 1e-12);
            assert!((up.momentum_phase - sol.momentum_phase).norm() < 1e-12);
            let psi = build_bethe_state(&sol.mus, &basis).unwrap();
            let psi_up = build_bethe_state(&up.mus, &basis).unwrap();
            let mut image = qd.apply(&psi).unwrap();
            linalg::normalize(&mut image);
            let overlap = linalg::dot(&image, &psi_up).norm();
            assert!((overlap - 1.0).abs() < 1e-8, "overlap {overlap}");
        }
        assert!(append_unit_root(&single_fermion_solutions(12).unwrap()[0]).is_err());
    }

    #[test]
    fn inversion_partners() {
        let s = BetheSolution::evaluate(6, vec![w(), Branch::Minus.root()]).unwrap();
        let p = inversion_partner(&s).unwrap();
        assert!((p.mus[0] - s.mus[1]).norm() < 1e-15 && (p.mus[1] - s.mus[0]).norm() < 1e-15);

        let n = 12;
        let basis = ConstrainedBasis::new(n).unwrap();
        let sol = BetheSolution::evaluate(n, vec![c(0.0, 1.0)]).unwrap();
        let partner = inversion_partner(&sol).unwrap();
        assert!((partner.mus[0] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((partner.energy - sol.energy).abs() < 1e-15);
        assert!((partner.momentum_phase - sol.momentum_phase.conj()).norm() < 1e-15);

        // two-parameter solution: the unit-root augmentation of a plane wave
        let two = append_unit_root(&single_fermion_solutions(n).unwrap()[2]).unwrap();
        for s in [sol, two] {
            let p = inversion_partner(&s).unwrap();
            let a = build_bethe_state(&s.mus, &basis).unwrap();
            let b = build_bethe_state(&p.mus, &basis).unwrap();
            let ia = basis.invert_vector(&a).unwrap();
            let phase = linalg::dot(&b, &ia);
            assert!((phase.norm() - 1.0).abs() < 1e-10);
            for sign in [1.0, -1.0] {
                let combo: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x + y * phase * sign).collect();
                let image = basis.invert_vector(&combo).unwrap();
                assert!(image.iter().zip(&combo).all(|(u, v)| (u - v * sign).norm() < 1e-10));
            }
        }
    }

    #[test]
    fn dressing_conditions() {
        let mut admitted = 0;
        for n in 4..=8 {
            for base in single_fermion_solutions(n).unwrap() {
                if Branch::of(base.mus[0]).is_some() {
                    assert!(dress_solution(&base, 1, 0).is_err());
                    continue;
                }
                for n_plus in 0..5 {
                    for n_minus in 0..5 {
                        if n_plus + n_minus == 0 {
                            continue;
                        }
                        let mut mus = base.mus.clone();
                        mus.extend(core::iter::repeat_n(w(), n_plus));
                        mus.extend(core::iter::repeat_n(Branch::Minus.root(), n_minus));
                        let direct = bethe_residuals(&mus, n + n_plus + n_minus).unwrap();
                        match dress_solution(&base, n_plus, n_minus).unwrap() {
                            Admissibility::Admissible(s) => {
                                admitted += 1;
                                assert!(s.residual <= RESIDUAL_TOL);
                                assert!((s.energy - base.energy).abs() < 1e-12);
                                assert_eq!(s.n_sites, n + n_plus + n_minus);
                            }
                            Admissibility::Inadmissible(i) => {
                                assert!(direct > 1e-6, "rejected ({}) but residual {direct:e}", i.reason);
                            }
                        }
                    }
                }
            }
        }
        assert!(admitted > 10);
        let base = single_fermion_solutions(6).unwrap().remove(0);
        assert!(dress_solution(&base, 0, 0).is_err());
    }

    #[test]
    fn transposition_chains_agree() {
        let mus = [c(0.3, 0.9), c(-1.2, 0.4), c(0.7, -0.5)];
        let table = permutation_amplitudes(&mus).unwrap();
        // walk random adjacent-swap chains from the identity; each swap that
        // produces (a, b) at the swapped positions multiplies by g(a, b)
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..200 {
            let mut perm = vec![0usize, 1, 2];
            let mut amp = C64::new(1.0, 0.0);
            for _ in 0..7 {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let i = (state % 2) as usize;
                perm.swap(i, i + 1);
                amp *= scattering_g(mus[perm[i]], mus[perm[i + 1]]).unwrap();
            }
            let direct = table.iter().find(|(p, _)| *p == perm).unwrap().1;
            assert!((amp - direct).norm() < 1e-12 * direct.norm().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn phase_shift_unitarity(a in 0.0f64..core::f64::consts::TAU, b in 0.0f64..core::f64::consts::TAU) {
            let x = C64::from_polar(1.0, a);
            let y = C64::from_polar(1.0, b);
            prop_assume!((x * y - x + 1.0).norm() > 1e-6 && (x * y - y + 1.0).norm() > 1e-6);
            let prod = scattering_g(x, y).unwrap() * scattering_g(y, x).unwrap();
            prop_assert!((prod - 1.0).norm() < 1e-9);
        }
    }
}
