//! Numerical time evolution of the lattice Dirac field.
//!
//! The integrator evolves psi only; the adjoint and both momenta are
//! reconstructed on shell every step, so the primary constraints hold by
//! construction. All quantitative checks target the lattice dispersion
//! omega(k) = sqrt((m c^2/hbar)^2 + (c sin(k dx)/dx)^2) of the central
//! difference scheme; fermion doubling is accepted, not remedied.

use num::Zero;
use serde::{Deserialize, Serialize};

use crate::bergmann::{build_hamiltonian, reduced_chart, FormalismTrack, HamiltonianKind};
use crate::error::{CoreError, Result};
use crate::gamma::GammaSet;
use crate::matrix::Mat;
use crate::phase::{AtomKind, ComplexField, FieldAtom, LatticeSpec, SPINOR_COMPONENTS};
use crate::scalar::{to_c64, C64, Constants};

/// Lattice dispersion of the central-difference Dirac operator.
pub fn lattice_dispersion_omega(k: f64, consts: &Constants, dx: f64) -> f64 {
    let m_term = consts.mass_f64() * consts.c_f64() * consts.c_f64() / consts.hbar_f64();
    let k_term = consts.c_f64() * (k * dx).sin() / dx;
    (m_term * m_term + k_term * k_term).sqrt()
}

/// The 4x4 symbol matrix of the spatial Dirac operator on a plane wave:
/// M(k) = (m c^2/hbar) gamma^0 + c sin(k dx)/dx gamma^0 gamma^1, so that
/// dt psi = -i M(k) psi. M is Hermitian with M^2 = omega^2.
pub fn symbol_matrix(gs: &GammaSet, k: f64, consts: &Constants, dx: f64) -> Mat<C64> {
    let g0 = gs.gamma_f64(0);
    let g01 = g0.mul(&gs.gamma_f64(1));
    let m_term = consts.mass_f64() * consts.c_f64() * consts.c_f64() / consts.hbar_f64();
    let k_term = consts.c_f64() * (k * dx).sin() / dx;
    g0.scale(&C64::new(m_term, 0.0)).add(&g01.scale(&C64::new(k_term, 0.0)))
}

/// Positive-frequency eigenpair of the symbol matrix, built with the
/// projector (M + omega)/(2 omega); valid in any representation.
pub fn plane_wave_eigenvector(
    gs: &GammaSet,
    k: f64,
    consts: &Constants,
    dx: f64,
) -> (f64, [C64; 4]) {
    let omega = lattice_dispersion_omega(k, consts, dx);
    let m = symbol_matrix(gs, k, consts, dx);
    assert!(omega > 0.0, "degenerate symbol; pick m > 0 or k != 0");
    let mut best = [C64::zero(); 4];
    let mut best_norm = 0.0f64;
    for trial in 0..4 {
        let mut u = [C64::zero(); 4];
        for i in 0..4 {
            u[i] = m[(i, trial)] / C64::new(2.0 * omega, 0.0);
        }
        u[trial] += C64::new(0.5, 0.0);
        let norm: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > best_norm {
            best_norm = norm;
            best = u;
        }
    }
    for z in &mut best {
        *z /= C64::new(best_norm, 0.0);
    }
    (omega, best)
}

/// RK4 stability bound used by the integrator guard.
pub fn stability_bound(lattice: &LatticeSpec, consts: &Constants) -> f64 {
    0.5 * lattice.dx_f64() / consts.c_f64()
}

/// Evolving state: psi per (site, component); adjoint and momenta live on
/// shell and are reconstructed on demand.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub lattice: LatticeSpec,
    pub gs: GammaSet,
    pub consts: Constants,
    /// site-major storage: psi[site * 4 + component].
    pub psi: Vec<C64>,
    pub t: f64,
    pub dt: f64,
}

impl EvolutionState {
    pub fn new(
        lattice: LatticeSpec,
        gs: GammaSet,
        consts: Constants,
        psi: Vec<C64>,
        dt: f64,
    ) -> Result<Self> {
        let bound = stability_bound(&lattice, &consts);
        if dt > bound {
            return Err(CoreError::StepTooLarge { dt, bound });
        }
        if !lattice.supports_central_differences() {
            return Err(CoreError::LatticeTooSmall);
        }
        assert_eq!(psi.len(), lattice.total_sites() * SPINOR_COMPONENTS);
        Ok(Self { lattice, gs, consts, psi, t: 0.0, dt })
    }

    /// Skips the stability guard; exists so the instability abort path can
    /// be exercised deliberately.
    pub fn new_unchecked(
        lattice: LatticeSpec,
        gs: GammaSet,
        consts: Constants,
        psi: Vec<C64>,
        dt: f64,
    ) -> Self {
        assert_eq!(psi.len(), lattice.total_sites() * SPINOR_COMPONENTS);
        Self { lattice, gs, consts, psi, t: 0.0, dt }
    }

    pub fn zero(lattice: LatticeSpec, gs: GammaSet, consts: Constants, dt: f64) -> Result<Self> {
        let n = lattice.total_sites() * SPINOR_COMPONENTS;
        Self::new(lattice, gs, consts, vec![C64::zero(); n], dt)
    }

    /// Single positive-frequency lattice plane wave of the given integer
    /// mode number.
    pub fn plane_wave(
        lattice: LatticeSpec,
        gs: GammaSet,
        consts: Constants,
        mode: i64,
        dt: f64,
    ) -> Result<(Self, f64, [C64; 4], f64)> {
        let n = lattice.total_sites();
        let dx = lattice.dx_f64();
        let k = 2.0 * std::f64::consts::PI * mode as f64 / (n as f64 * dx);
        let (omega, u) = plane_wave_eigenvector(&gs, k, &consts, dx);
        let mut psi = vec![C64::zero(); n * SPINOR_COMPONENTS];
        for site in 0..n {
            let phase = C64::from_polar(1.0, k * site as f64 * dx);
            for a in 0..SPINOR_COMPONENTS {
                psi[site * SPINOR_COMPONENTS + a] = u[a] * phase;
            }
        }
        Ok((Self::new(lattice, gs, consts, psi, dt)?, omega, u, k))
    }

    fn site_value(&self, psi: &[C64], site: usize, comp: usize) -> C64 {
        psi[site * SPINOR_COMPONENTS + comp]
    }

    /// dt psi = -i (m c^2/hbar) gamma^0 psi - c gamma^0 gamma^mu d_mu psi,
    /// with periodic central differences. This is the consistency-condition
    /// multiplier d0-psi contracted with c gamma^0.
    pub fn derivative_of(&self, psi: &[C64]) -> Vec<C64> {
        let n = self.lattice.total_sites();
        let g0 = self.gs.gamma_f64(0);
        let c = self.consts.c_f64();
        let mass_term =
            self.consts.mass_f64() * c * c / self.consts.hbar_f64();
        let mut g0gmu = Vec::new();
        for mu in 1..=self.lattice.dimension {
            g0gmu.push(g0.mul(&self.gs.gamma_f64(mu)));
        }
        let inv_2dx = 1.0 / (2.0 * self.lattice.dx_f64());
        let mut out = vec![C64::zero(); psi.len()];
        for site in 0..n {
            for a in 0..SPINOR_COMPONENTS {
                let mut acc = C64::zero();
                for b in 0..SPINOR_COMPONENTS {
                    acc += g0[(a, b)] * self.site_value(psi, site, b);
                }
                let mut value = acc * C64::new(0.0, -mass_term);
                for (axis, gmat) in g0gmu.iter().enumerate() {
                    let fwd = self.lattice.neighbor(site, axis, 1);
                    let bwd = self.lattice.neighbor(site, axis, -1);
                    let mut grad = C64::zero();
                    for b in 0..SPINOR_COMPONENTS {
                        grad += gmat[(a, b)]
                            * (self.site_value(psi, fwd, b) - self.site_value(psi, bwd, b));
                    }
                    value -= grad * C64::new(c * inv_2dx, 0.0);
                }
                out[site * SPINOR_COMPONENTS + a] = value;
            }
        }
        out
    }

    pub fn time_derivative(&self) -> Vec<C64> {
        self.derivative_of(&self.psi)
    }

    /// One classical RK4 step.
    pub fn step(&mut self) {
        let dt = self.dt;
        let k1 = self.derivative_of(&self.psi);
        let half = |base: &[C64], k: &[C64], h: f64| -> Vec<C64> {
            base.iter().zip(k).map(|(b, d)| b + d * C64::new(h, 0.0)).collect()
        };
        let k2 = self.derivative_of(&half(&self.psi, &k1, dt / 2.0));
        let k3 = self.derivative_of(&half(&self.psi, &k2, dt / 2.0));
        let k4 = self.derivative_of(&half(&self.psi, &k3, dt));
        for i in 0..self.psi.len() {
            self.psi[i] += (k1[i] + (k2[i] + k3[i]) * C64::new(2.0, 0.0) + k4[i])
                * C64::new(dt / 6.0, 0.0);
        }
        self.t += dt;
    }

    /// psibar = psi^dagger gamma^0 at one site.
    fn psibar_at(&self, site: usize) -> [C64; 4] {
        let g0 = self.gs.gamma_f64(0);
        let mut bar = [C64::zero(); 4];
        for b in 0..SPINOR_COMPONENTS {
            for a in 0..SPINOR_COMPONENTS {
                bar[b] += self.site_value(&self.psi, site, a).conj() * g0[(a, b)];
            }
        }
        bar
    }

    /// Full on-shell field configuration (psi, psibar, pi, pibar).
    pub fn to_field_config(&self) -> ComplexField {
        let mut cfg = ComplexField::new();
        let ihc2 = to_c64(&self.consts.i_hbar_c_half());
        for site in 0..self.lattice.total_sites() {
            let bar = self.psibar_at(site);
            for a in 0..SPINOR_COMPONENTS {
                let psi = self.site_value(&self.psi, site, a);
                cfg.set(FieldAtom::new(AtomKind::Psi, a, site), psi);
                cfg.set(FieldAtom::new(AtomKind::PsiBar, a, site), bar[a]);
                cfg.set(FieldAtom::new(AtomKind::Pi, a, site), ihc2 * bar[a]);
                cfg.set(FieldAtom::new(AtomKind::PiBar, a, site), -ihc2 * psi);
            }
        }
        cfg
    }

    /// H_IZ evaluated on shell (equals the canonical Hamiltonian).
    pub fn energy(&self) -> f64 {
        let n = self.lattice.total_sites();
        let vol = self.lattice.volume_f64();
        let c = self.consts.c_f64();
        let hbar = self.consts.hbar_f64();
        let mc2 = self.consts.mass_f64() * c * c;
        let inv_2dx = 1.0 / (2.0 * self.lattice.dx_f64());
        let mut total = C64::zero();
        for site in 0..n {
            let bar = self.psibar_at(site);
            // mass term
            let mut density = C64::zero();
            for a in 0..SPINOR_COMPONENTS {
                density += bar[a] * self.site_value(&self.psi, site, a) * C64::new(mc2, 0.0);
            }
            // kinetic term (i hbar c/2) sum_mu [(d_mu psibar) gamma^mu psi
            //   - psibar gamma^mu d_mu psi]
            for mu in 1..=self.lattice.dimension {
                let g = self.gs.gamma_f64(mu);
                let fwd = self.lattice.neighbor(site, mu - 1, 1);
                let bwd = self.lattice.neighbor(site, mu - 1, -1);
                let bar_fwd = self.psibar_at(fwd);
                let bar_bwd = self.psibar_at(bwd);
                let mut kin = C64::zero();
                for a in 0..SPINOR_COMPONENTS {
                    for b in 0..SPINOR_COMPONENTS {
                        let dbar = (bar_fwd[a] - bar_bwd[a]) * C64::new(inv_2dx, 0.0);
                        kin += dbar * g[(a, b)] * self.site_value(&self.psi, site, b);
                        let dpsi = (self.site_value(&self.psi, fwd, b)
                            - self.site_value(&self.psi, bwd, b))
                            * C64::new(inv_2dx, 0.0);
                        kin -= bar[a] * g[(a, b)] * dpsi;
                    }
                }
                density += kin * C64::new(0.0, hbar * c / 2.0);
            }
            total += density;
        }
        (total * C64::new(vol, 0.0)).re
    }

    /// v sum psi^dagger psi.
    pub fn norm(&self) -> f64 {
        let vol = self.lattice.volume_f64();
        vol * self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Projection onto a reference plane wave, for phase tracking.
    pub fn overlap(&self, k: f64, u: &[C64; 4]) -> C64 {
        let dx = self.lattice.dx_f64();
        let mut acc = C64::zero();
        for site in 0..self.lattice.total_sites() {
            let phase = C64::from_polar(1.0, -(k * site as f64 * dx));
            for a in 0..SPINOR_COMPONENTS {
                acc += u[a].conj() * self.site_value(&self.psi, site, a) * phase;
            }
        }
        acc
    }

    /// Largest primary-constraint residual of the on-shell reconstruction;
    /// identically zero by construction, reported for the diagnostics.
    pub fn constraint_residual(&self) -> f64 {
        let ihc2 = to_c64(&self.consts.i_hbar_c_half());
        let mut worst = 0.0f64;
        for site in 0..self.lattice.total_sites() {
            let bar = self.psibar_at(site);
            for a in 0..SPINOR_COMPONENTS {
                let psi = self.site_value(&self.psi, site, a);
                let pibar = -ihc2 * psi;
                let pi = ihc2 * bar[a];
                worst = worst.max((pibar + ihc2 * psi).norm());
                worst = worst.max((pi - ihc2 * bar[a]).norm());
            }
        }
        worst
    }
}

/// Per-step diagnostics of the trajectory time series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub energy: f64,
    pub norm: f64,
    pub constraint_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<StepDiagnostics>,
    pub energy_drift: f64,
    pub norm_drift: f64,
}

impl Trajectory {
    /// Plain-text table (t, energy, norm) for external plotting.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# t  energy  norm  constraint_residual\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{:.6e} {:.12e} {:.12e} {:.3e}\n",
                s.t, s.energy, s.norm, s.constraint_residual
            ));
        }
        out
    }
}

/// Runs `n_steps` RK4 steps with per-step diagnostics, aborting if the norm
/// grows by more than a factor of ten.
pub fn evolve(state: &mut EvolutionState, n_steps: usize) -> Result<Trajectory> {
    let mut steps = Vec::with_capacity(n_steps + 1);
    let e0 = state.energy();
    let n0 = state.norm();
    steps.push(StepDiagnostics {
        t: state.t,
        energy: e0,
        norm: n0,
        constraint_residual: state.constraint_residual(),
    });
    for _ in 0..n_steps {
        state.step();
        let norm = state.norm();
        if n0 > 0.0 && norm > 10.0 * n0 {
            return Err(CoreError::Unstable(norm / n0));
        }
        steps.push(StepDiagnostics {
            t: state.t,
            energy: state.energy(),
            norm,
            constraint_residual: state.constraint_residual(),
        });
    }
    let scale_e = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
    let scale_n = if n0 > 0.0 { n0 } else { 1.0 };
    let energy_drift = steps
        .iter()
        .map(|s| (s.energy - e0).abs() / scale_e)
        .fold(0.0, f64::max);
    let norm_drift = steps.iter().map(|s| (s.norm - n0).abs() / scale_n).fold(0.0, f64::max);
    Ok(Trajectory { steps, energy_drift, norm_drift })
}

/// Integrates a reference plane wave and measures the oscillation frequency
/// from the accumulated overlap phase.
pub fn measure_frequency(
    state: &mut EvolutionState,
    k: f64,
    u: &[C64; 4],
    n_steps: usize,
) -> Result<f64> {
    let mut prev = state.overlap(k, u);
    let mut accumulated = 0.0f64;
    for _ in 0..n_steps {
        state.step();
        let cur = state.overlap(k, u);
        accumulated += (cur * prev.conj()).arg();
        prev = cur;
    }
    // psi(t) ~ e^{-i omega t}: the phase decreases by omega dt per step.
    Ok(-accumulated / (n_steps as f64 * state.dt))
}

/// Values entering the reduced-vs-BD Hamiltonian comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianComparison {
    pub h_reduced: f64,
    pub h_bd: f64,
    pub divergence: f64,
    pub h_iz: f64,
}

/// Evaluates H_R, H_BD(psi1, pi1) and the telescoping divergence on an
/// on-shell configuration, plus H_IZ on the base chart. Off-shell input is
/// rejected.
pub fn hamiltonian_comparison(
    cfg: &ComplexField,
    lattice: &LatticeSpec,
    gs: &GammaSet,
    consts: &Constants,
) -> Result<HamiltonianComparison> {
    // On-shell guard: both primary constraints must vanish.
    let ihc2 = to_c64(&consts.i_hbar_c_half());
    let mut residual = 0.0f64;
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let psi = cfg.get(FieldAtom::new(AtomKind::Psi, a, site))?;
            let psibar = cfg.get(FieldAtom::new(AtomKind::PsiBar, a, site))?;
            let pi = cfg.get(FieldAtom::new(AtomKind::Pi, a, site))?;
            let pibar = cfg.get(FieldAtom::new(AtomKind::PiBar, a, site))?;
            residual = residual.max((pibar + ihc2 * psi).norm());
            residual = residual.max((pi - ihc2 * psibar).norm());
        }
    }
    if residual > 1e-10 {
        return Err(CoreError::OffShell(residual));
    }

    // Adapted-chart values: psi1 = psi, pi1 = i hbar c psibar on shell.
    let ihc = C64::new(0.0, consts.hbar_f64() * consts.c_f64());
    let mut chart_cfg = ComplexField::new();
    for site in 0..lattice.total_sites() {
        for a in 0..SPINOR_COMPONENTS {
            let psi = cfg.get(FieldAtom::new(AtomKind::Psi, a, site))?;
            let psibar = cfg.get(FieldAtom::new(AtomKind::PsiBar, a, site))?;
            chart_cfg.set(FieldAtom::new(AtomKind::Psi1, a, site), psi);
            chart_cfg.set(FieldAtom::new(AtomKind::Pi1, a, site), ihc * psibar);
        }
    }
    let track = FormalismTrack::SpinorialFO;
    let h_reduced = build_hamiltonian(track, HamiltonianKind::Reduced, lattice, gs, consts)?
        .evaluate_complex(&chart_cfg)?;
    let h_bd = build_hamiltonian(track, HamiltonianKind::BdOnReduced, lattice, gs, consts)?
        .evaluate_complex(&chart_cfg)?;
    let divergence =
        crate::bergmann::divergence_total(lattice, gs)?.evaluate_complex(&chart_cfg)?;
    let h_iz = build_hamiltonian(track, HamiltonianKind::MomentumForm, lattice, gs, consts)?
        .evaluate_complex(cfg)?;
    let _ = reduced_chart(track, consts);
    Ok(HamiltonianComparison {
        h_reduced: h_reduced.re,
        h_bd: h_bd.re,
        divergence: divergence.norm(),
        h_iz: h_iz.re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::{build_gamma_set, Representation};
    use crate::scalar::{qi, qr, Q};
    use num::One;

    fn setup(n: usize) -> (LatticeSpec, GammaSet, Constants) {
        (LatticeSpec::line(n, Q::one()), build_gamma_set(Representation::Dirac), Constants::default())
    }

    #[test]
    fn zero_field_has_zero_derivative_and_static_trajectory() {
        let (lat, gs, consts) = setup(8);
        let mut state = EvolutionState::zero(lat, gs, consts, 0.05).unwrap();
        assert!(state.time_derivative().iter().all(|z| z.is_zero()));
        let traj = evolve(&mut state, 10).unwrap();
        assert!(state.psi.iter().all(|z| z.is_zero()));
        assert_eq!(traj.energy_drift, 0.0);
        assert_eq!(traj.norm_drift, 0.0);
    }

    #[test]
    fn massless_constant_field_is_static() {
        let lat = LatticeSpec::line(8, Q::one());
        let gs = build_gamma_set(Representation::Dirac);
        let consts = Constants::new(Q::one(), Q::one(), Q::zero());
        let n = lat.total_sites() * SPINOR_COMPONENTS;
        let psi = vec![C64::new(0.4, -0.3); n];
        let state = EvolutionState::new(lat, gs, consts, psi, 0.05).unwrap();
        let deriv = state.time_derivative();
        assert!(deriv.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn plane_wave_derivative_matches_symbol_matrix() {
        // Oracle: dt psi = -i M(k) psi with M the symbol matrix.
        let (lat, gs, consts) = setup(32);
        let (state, _omega, u, k) =
            EvolutionState::plane_wave(lat, gs.clone(), consts.clone(), 2, 0.05).unwrap();
        let deriv = state.time_derivative();
        let m = symbol_matrix(&gs, k, &consts, 1.0);
        for site in [0usize, 7, 31] {
            let phase = C64::from_polar(1.0, k * site as f64);
            for a in 0..4 {
                let mut expect = C64::zero();
                for b in 0..4 {
                    expect += m[(a, b)] * u[b];
                }
                expect *= C64::new(0.0, -1.0) * phase;
                let got = deriv[site * 4 + a];
                assert!((got - expect).norm() < 1e-12, "site {site} comp {a}");
            }
        }
        // Eigenvector: derivative is -i omega psi.
        let (omega2, u2) = plane_wave_eigenvector(&gs, k, &consts, 1.0);
        let mut mu = [C64::zero(); 4];
        for a in 0..4 {
            for b in 0..4 {
                mu[a] += m[(a, b)] * u2[b];
            }
        }
        for a in 0..4 {
            assert!((mu[a] - u2[a] * C64::new(omega2, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_phase_advance_and_conservation() {
        // RK4 damps oscillations by O((omega dt)^6) per step; dt = 0.02
        // keeps 400 steps well inside the 1e-8 conservation budget.
        let (lat, gs, consts) = setup(32);
        let dt = 0.02;
        let (mut state, omega, u, k) =
            EvolutionState::plane_wave(lat, gs, consts, 1, dt).unwrap();
        let e0 = state.energy();
        let n0 = state.norm();
        let measured = measure_frequency(&mut state, k, &u, 400).unwrap();
        assert!(
            (measured - omega).abs() / omega < 1e-6,
            "measured {measured} vs lattice {omega}"
        );
        assert!((state.energy() - e0).abs() / e0.abs() < 1e-8);
        assert!((state.norm() - n0).abs() / n0 < 1e-8);
        // Plane-wave energy density: hbar omega per unit psi^dag psi.
        assert!((e0 - omega * n0).abs() / e0.abs() < 1e-9);
    }

    #[test]
    fn rk4_convergence_order() {
        let (lat, gs, consts) = setup(16);
        let measure = |dt: f64, steps: usize| -> f64 {
            let (mut state, omega, u, k) =
                EvolutionState::plane_wave(lat.clone(), gs.clone(), consts.clone(), 1, dt)
                    .unwrap();
            let mut phase = 0.0;
            let mut prev = state.overlap(k, &u);
            for _ in 0..steps {
                state.step();
                let cur = state.overlap(k, &u);
                phase += (cur * prev.conj()).arg();
                prev = cur;
            }
            (phase + omega * dt * steps as f64).abs()
        };
        let coarse = measure(0.2, 50);
        let fine = measure(0.1, 100);
        assert!(coarse / fine >= 12.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn instability_abort_and_step_guard() {
        let (lat, gs, consts) = setup(8);
        let n = lat.total_sites() * SPINOR_COMPONENTS;
        let err = EvolutionState::new(
            lat.clone(),
            gs.clone(),
            consts.clone(),
            vec![C64::new(0.1, 0.0); n],
            10.0,
        );
        assert!(matches!(err, Err(CoreError::StepTooLarge { .. })));
        let mut rogue = EvolutionState::new_unchecked(
            lat,
            gs,
            consts,
            vec![C64::new(0.1, 0.0); n],
            25.0,
        );
        assert!(matches!(evolve(&mut rogue, 200), Err(CoreError::Unstable(_))));
    }

    #[test]
    fn evolution_matches_dirac_bracket_generator() {
        // d0 f = {f, H_P}_D for the canonical atoms, evaluated at t = 0.
        use crate::bergmann::{run_consistency, dirac_track};
        let (lat, gs, consts) = setup(8);
        let (state, _omega, _u, _k) =
            EvolutionState::plane_wave(lat.clone(), gs.clone(), consts.clone(), 1, 0.05).unwrap();
        let cfg = state.to_field_config();
        let track = FormalismTrack::SpinorialFO;
        let consistency = run_consistency(track, &lat, &gs, &consts).unwrap();
        let hp = &consistency.h_primary_solved;
        let deriv = state.time_derivative();
        let g0 = gs.gamma_f64(0);
        let c = consts.c_f64();
        for site in [0usize, 3] {
            // d0 psi = gamma^0 (1/c) dt psi and d0 psibar = (1/c)(dt psi)^dag.
            let mut d0psi = [C64::zero(); 4];
            for a in 0..4 {
                for b in 0..4 {
                    d0psi[a] += g0[(a, b)] * deriv[site * 4 + b];
                }
                d0psi[a] /= C64::new(c, 0.0);
            }
            let mut d0psibar = [C64::zero(); 4];
            for b in 0..4 {
                d0psibar[b] = deriv[site * 4 + b].conj() / C64::new(c, 0.0);
            }
            let ihc2 = crate::scalar::to_c64(&consts.i_hbar_c_half());
            for a in 0..4 {
                let atom_value = |kind: AtomKind| {
                    let f = crate::phase::PhaseFunctional::atom(
                        crate::phase::Statistics::Commuting,
                        FieldAtom::new(kind, a, site),
                    );
                    dirac_track(track, &f, hp, &lat, &consts)
                        .unwrap()
                        .evaluate_complex(&cfg)
                        .unwrap()
                };
                assert!((atom_value(AtomKind::Psi) - d0psi[a]).norm() < 1e-10);
                assert!((atom_value(AtomKind::PsiBar) - d0psibar[a]).norm() < 1e-10);
                // On-shell momenta evolve as their constraint images.
                assert!((atom_value(AtomKind::Pi) - ihc2 * d0psibar[a]).norm() < 1e-10);
                assert!((atom_value(AtomKind::PiBar) + ihc2 * d0psi[a]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn hamiltonian_comparison_on_shell() {
        let (lat, gs, consts) = setup(16);
        let (state, omega, _u, _k) =
            EvolutionState::plane_wave(lat.clone(), gs.clone(), consts.clone(), 2, 0.05).unwrap();
        let cfg = state.to_field_config();
        let cmp = hamiltonian_comparison(&cfg, &lat, &gs, &consts).unwrap();
        assert!(cmp.divergence < 1e-12);
        assert!((cmp.h_reduced - cmp.h_bd).abs() <= 1e-10 * cmp.h_reduced.abs());
        assert!((cmp.h_reduced - cmp.h_iz).abs() <= 1e-10 * cmp.h_reduced.abs());
        // Plane-wave energy: hbar omega times the norm.
        assert!((cmp.h_reduced - omega * state.norm()).abs() / cmp.h_reduced.abs() < 1e-9);

        // Zero field: everything vanishes.
        let zero = EvolutionState::zero(lat.clone(), gs.clone(), consts.clone(), 0.05).unwrap();
        let cmp = hamiltonian_comparison(&zero.to_field_config(), &lat, &gs, &consts).unwrap();
        assert_eq!(cmp.h_reduced, 0.0);
        assert_eq!(cmp.h_bd, 0.0);
        assert_eq!(cmp.divergence, 0.0);

        // Off-shell input is rejected.
        let mut bad = state.to_field_config();
        bad.set(FieldAtom::new(AtomKind::Pi, 0, 0), C64::new(1.0, 1.0));
        assert!(matches!(
            hamiltonian_comparison(&bad, &lat, &gs, &consts),
            Err(CoreError::OffShell(_))
        ));
    }

    #[test]
    fn two_dimensional_lattice_constant_field_oscillates_in_place() {
        // No gradients on a constant field: dt psi = -i (m c^2/hbar)
        // gamma^0 psi, exercising the multi-axis stencil path.
        let lat = LatticeSpec::new(2, 4, Q::one());
        let gs = build_gamma_set(Representation::Dirac);
        let consts = Constants::default();
        let n = lat.total_sites() * SPINOR_COMPONENTS;
        let state =
            EvolutionState::new(lat, gs.clone(), consts, vec![C64::new(0.5, -0.25); n], 0.02)
                .unwrap();
        let deriv = state.time_derivative();
        let g0 = gs.gamma_f64(0);
        for site in 0..16 {
            for a in 0..4 {
                let mut expect = C64::zero();
                for b in 0..4 {
                    expect += g0[(a, b)] * state.psi[site * 4 + b];
                }
                expect *= C64::new(0.0, -1.0);
                assert!((deriv[site * 4 + a] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dispersion_oracle_yields_hermitian_symbol_with_scalar_square() {
        for rep in Representation::ALL {
            let gs = build_gamma_set(rep);
            let consts = Constants::new(qi(2), qi(3), qr(5, 4));
            let k = 0.7;
            let m = symbol_matrix(&gs, k, &consts, 0.5);
            let omega = lattice_dispersion_omega(k, &consts, 0.5);
            let m2 = m.mul(&m);
            for i in 0..4 {
                for j in 0..4 {
                    let expect = if i == j { C64::new(omega * omega, 0.0) } else { C64::zero() };
                    assert!((m2[(i, j)] - expect).norm() < 1e-10);
                }
            }
            let adj_residual = m.sub(&m.adjoint()).max_abs();
            assert!(adj_residual < 1e-12);
        }
    }
}
