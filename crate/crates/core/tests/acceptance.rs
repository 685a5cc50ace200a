//! Acceptance suite: one test per acceptance criterion, each printing a
//! single pass/fail line (visible with `cargo test --test acceptance --
//! --nocapture`). Every tolerance is pinned in the assertions below.

use std::time::Instant;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diracberg_core::bergmann::{
    build_hamiltonian, constraint_matrix, dirac_track, expected_canonical_db, run_consistency,
    run_track_suite, verify_reduction, ConstraintSet, Fault, FormalismTrack, HamiltonianKind,
};
use diracberg_core::dynamics::{
    lattice_dispersion_omega, plane_wave_eigenvector, EvolutionState,
};
use diracberg_core::gamma::{
    build_gamma_set, check_adjoint_relations, check_clifford, check_clifford_f64, run_gamma_suite,
    Representation,
};
use diracberg_core::grassmann::run_grassmann_suite;
use diracberg_core::phase::{AtomKind, ExactField, FieldAtom, LatticeSpec, PhaseFunctional};
use diracberg_core::quantization::run_quantization_suite;
use diracberg_core::report::CheckRecord;
use diracberg_core::scalar::{cq, cq_re, qi, to_c64, C64, Constants, CQ, Q};
use diracberg_core::spin::run_spin_suite;

fn verdict(criterion: &str, pass: bool, started: Instant, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!(
        "acceptance {criterion}: {status} ({:.2} s) {detail}",
        started.elapsed().as_secs_f64()
    );
    assert!(pass, "acceptance {criterion} failed: {detail}");
}

fn all_pass(checks: &[CheckRecord]) -> (bool, String) {
    match checks.iter().find(|c| !c.pass) {
        Some(c) => (false, format!("first failure {}/{} residual {}", c.suite, c.identity, c.residual)),
        None => (true, format!("{} checks", checks.len())),
    }
}

#[test]
fn criterion_01_gamma_algebra() {
    let started = Instant::now();
    let mut ok = true;
    for rep in Representation::ALL {
        let gs = build_gamma_set(rep);
        ok &= check_clifford(&gs).iter().all(|c| c.pass && c.residual_norm == 0.0);
        ok &= check_clifford_f64(&gs).iter().all(|c| c.pass && c.residual_norm <= 1e-12);
        ok &= check_adjoint_relations(&gs).iter().all(|c| c.pass && c.residual_norm == 0.0);
    }
    let within_budget = started.elapsed().as_secs_f64() < 1.0;
    verdict(
        "01 gamma algebra",
        ok && within_budget,
        started,
        "16 anticommutators and adjoint relations, 3 representations, exact + float",
    );
}

#[test]
fn criterion_02_grassmann_calculus() {
    let started = Instant::now();
    let checks = run_grassmann_suite(20260810, 500, 12).unwrap();
    let (ok, detail) = all_pass(&checks);
    let within_budget = started.elapsed().as_secs_f64() < 10.0;
    verdict("02 grassmann calculus", ok && within_budget, started, &detail);
}

#[test]
fn criterion_03_constraint_algebra() {
    let started = Instant::now();
    let lattice = LatticeSpec::line(8, Q::one());
    let consts = Constants::default();
    let ihc = cq(Q::zero(), consts.hbar_c());
    let mut ok = true;
    let mut detail = String::new();

    // Spinorial: {phibar, phi} = -i hbar c delta, component-wise, and
    // A^-1 A = identity, exactly.
    let cs = ConstraintSet::build(FormalismTrack::SpinorialFO, &consts).unwrap();
    for comp in 0..4 {
        let br = diracberg_core::bergmann::poisson_track(
            FormalismTrack::SpinorialFO,
            &cs.phibar(comp, 3),
            &cs.phi(comp, 3),
            &lattice,
        )
        .unwrap();
        let coeff = br.constant_part() * cq_re(lattice.volume());
        ok &= coeff == -ihc.clone();
    }
    let matrices: Vec<_> = FormalismTrack::ALL
        .iter()
        .map(|t| constraint_matrix(*t, &lattice, &consts).unwrap())
        .collect();
    for m in &matrices {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = CQ::zero();
                for k in 0..2 {
                    acc = acc + m.a_inv[i][k].clone() * m.a[k][j].clone();
                }
                let expect = if i == j { CQ::one() } else { CQ::zero() };
                ok &= acc == expect;
            }
        }
    }
    // Printed matrices: spinorial antisymmetric, Grassmann symmetric with
    // A^L = -A^R.
    ok &= matrices[0].a[0][1] == -ihc.clone() && matrices[0].a[1][0] == ihc.clone();
    ok &= matrices[1].a[0][1] == -ihc.clone() && matrices[1].a[1][0] == -ihc.clone();
    for i in 0..2 {
        for j in 0..2 {
            ok &= matrices[2].a[i][j] == -matrices[1].a[i][j].clone();
        }
    }
    if !ok {
        detail.push_str("constraint matrix mismatch");
    }
    verdict("03 constraint algebra", ok, started, if detail.is_empty() { "8-site lattice, exact" } else { &detail });
}

#[test]
fn criterion_04_canonical_dirac_brackets() {
    let started = Instant::now();
    let lattice = LatticeSpec::line(8, Q::one());
    let mut ok = true;
    let mut detail = String::from("all tracks, hbar=c=1 and hbar=2, c=3");
    for consts in [Constants::default(), Constants::new(qi(2), qi(3), Q::one())] {
        for track in FormalismTrack::ALL {
            for (ka, kb, expect) in expected_canonical_db(track, &consts) {
                let fa = PhaseFunctional::atom(track.stats(), FieldAtom::new(ka, 1, 2));
                let fb = PhaseFunctional::atom(track.stats(), FieldAtom::new(kb, 1, 2));
                let db = dirac_track(track, &fa, &fb, &lattice, &consts).unwrap();
                let got = db.constant_part() * cq_re(lattice.volume());
                if got != expect {
                    ok = false;
                    detail = format!("{} {{{:?},{:?}}}", track.name(), ka, kb);
                }
            }
        }
    }
    verdict("04 canonical dirac brackets", ok, started, &detail);
}

#[test]
fn criterion_05_consistency_conditions() {
    let started = Instant::now();
    let lattice = LatticeSpec::line(8, Q::one());
    let gs = build_gamma_set(Representation::Dirac);
    let consts = Constants::default();
    let mut ok = true;

    // Coefficient-exact residual forms for every track.
    for track in FormalismTrack::ALL {
        let result = run_consistency(track, &lattice, &gs, &consts).unwrap();
        for site in 0..8 {
            for a in 0..4 {
                let idx = site * 4 + a;
                let (oracle_bar, oracle) =
                    diracberg_core::bergmann::consistency_oracle(track, a, site, &lattice, &gs, &consts)
                        .unwrap();
                ok &= result.residual_phi[idx] == oracle;
                ok &= result.residual_phibar[idx] == oracle_bar;
            }
        }
    }

    // Plane-wave eigenstate residual below 1e-10.
    let result = run_consistency(FormalismTrack::SpinorialFO, &lattice, &gs, &consts).unwrap();
    let k = 2.0 * std::f64::consts::PI / 8.0;
    let (omega, u) = plane_wave_eigenvector(&gs, k, &consts, 1.0);
    let g0 = gs.gamma_f64(0);
    let mut cfg = diracberg_core::phase::ComplexField::new();
    for site in 0..8usize {
        let phase = C64::from_polar(1.0, k * site as f64);
        let mut psi = [C64::zero(); 4];
        let mut lam = [C64::zero(); 4];
        for a in 0..4 {
            psi[a] = u[a] * phase;
        }
        for a in 0..4 {
            for b in 0..4 {
                lam[a] += g0[(a, b)] * psi[b];
            }
            lam[a] *= C64::new(0.0, -omega);
        }
        let mut bar = [C64::zero(); 4];
        let mut lam_bar = [C64::zero(); 4];
        for b in 0..4 {
            for a in 0..4 {
                bar[b] += psi[a].conj() * g0[(a, b)];
                lam_bar[b] += lam[a].conj() * g0[(a, b)];
            }
        }
        cfg.set_spinor(AtomKind::Psi, site, &psi);
        cfg.set_spinor(AtomKind::Dot0Psi, site, &lam);
        cfg.set_spinor(AtomKind::PsiBar, site, &bar);
        cfg.set_spinor(AtomKind::Dot0PsiBar, site, &lam_bar);
    }
    let mut worst = 0.0f64;
    for res in result.residual_phi.iter().chain(result.residual_phibar.iter()) {
        worst = worst.max(res.evaluate_complex(&cfg).unwrap().norm());
    }
    ok &= worst <= 1e-10;
    verdict(
        "05 consistency conditions",
        ok,
        started,
        &format!("coefficient-exact Dirac operators; plane-wave residual {worst:.2e}"),
    );
}

#[test]
fn criterion_06_reduction() {
    let started = Instant::now();
    let lattice = LatticeSpec::line(8, Q::one());
    let consts = Constants::default();
    let mut ok = true;
    let mut detail = String::from("200 random functionals per track, coefficient-exact");
    for track in FormalismTrack::ALL {
        let report = verify_reduction(track, &lattice, &consts, 1234, 200).unwrap();
        if !report.pass {
            ok = false;
            let (_, d) = all_pass(&report.checks);
            detail = format!("{}: {}", track.name(), d);
        }
    }
    verdict("06 reduction", ok, started, &detail);
}

#[test]
fn criterion_07_hamiltonian_identities() {
    let started = Instant::now();
    let lattice = LatticeSpec::line(8, Q::one());
    let gs = build_gamma_set(Representation::Dirac);
    let consts = Constants::default();
    let track = FormalismTrack::SpinorialFO;

    let h_red = build_hamiltonian(track, HamiltonianKind::Reduced, &lattice, &gs, &consts).unwrap();
    let h_bd =
        build_hamiltonian(track, HamiltonianKind::BdOnReduced, &lattice, &gs, &consts).unwrap();
    let h_iz =
        build_hamiltonian(track, HamiltonianKind::MomentumForm, &lattice, &gs, &consts).unwrap();
    let divergence = diracberg_core::bergmann::divergence_total(&lattice, &gs).unwrap();

    // The summed divergence telescopes to the zero functional, so
    // H_R - H_BD vanishes identically at the coefficient level.
    let mut ok = divergence.is_zero();
    ok &= h_red.sub(&h_bd).unwrap().sub(&divergence).unwrap().is_zero();

    // 100 random on-shell configurations, exact arithmetic.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let ihc2 = consts.i_hbar_c_half();
    let ihc = cq(Q::zero(), consts.hbar_c());
    let mut worst_rel = 0.0f64;
    for _ in 0..100 {
        let mut base = ExactField::new();
        let mut chart = ExactField::new();
        for site in 0..8usize {
            for a in 0..4usize {
                let psi = cq(
                    Q::new(rng.gen_range(-9i64..=9).into(), 4.into()),
                    Q::new(rng.gen_range(-9i64..=9).into(), 4.into()),
                );
                let psibar = cq(
                    Q::new(rng.gen_range(-9i64..=9).into(), 4.into()),
                    Q::new(rng.gen_range(-9i64..=9).into(), 4.into()),
                );
                base.set(FieldAtom::new(AtomKind::Psi, a, site), psi.clone());
                base.set(FieldAtom::new(AtomKind::PsiBar, a, site), psibar.clone());
                base.set(FieldAtom::new(AtomKind::Pi, a, site), ihc2.clone() * psibar.clone());
                base.set(FieldAtom::new(AtomKind::PiBar, a, site), -ihc2.clone() * psi.clone());
                chart.set(FieldAtom::new(AtomKind::Psi1, a, site), psi.clone());
                chart.set(FieldAtom::new(AtomKind::Pi1, a, site), ihc.clone() * psibar);
            }
        }
        let red = h_red.evaluate_exact(&chart).unwrap();
        let iz = h_iz.evaluate_exact(&base).unwrap();
        // H_R = H_IZ(psi1, pi1, 0, 0): exact equality.
        ok &= red == iz;
        let bd = h_bd.evaluate_exact(&chart).unwrap();
        let diff = to_c64(&(red.clone() - bd)).norm();
        let scale = to_c64(&red).norm().max(1.0);
        worst_rel = worst_rel.max(diff / scale);
    }
    ok &= worst_rel <= 1e-10;
    verdict(
        "07 hamiltonian identities",
        ok,
        started,
        &format!("100 exact on-shell configs; H_R vs H_BD relative residual {worst_rel:.2e}"),
    );
}

#[test]
fn criterion_08_quantization() {
    let started = Instant::now();
    let gs = build_gamma_set(Representation::Dirac);
    let consts = Constants::default();
    let mut ok = true;
    let mut detail = String::from("1-site and 2-site Fock spaces, exact operator identities");
    for sites in [1usize, 2] {
        let lattice = LatticeSpec::line(sites, Q::one());
        let checks = run_quantization_suite(&lattice, &gs, &consts, &FormalismTrack::ALL).unwrap();
        let (pass, d) = all_pass(&checks);
        if !pass {
            ok = false;
            detail = format!("{sites}-site: {d}");
        }
        ok &= checks.iter().all(|c| c.residual == 0.0);
    }
    let within_budget = started.elapsed().as_secs_f64() < 30.0;
    verdict("08 quantization", ok && within_budget, started, &detail);
}

#[test]
fn criterion_09_dynamics() {
    let started = Instant::now();
    let lattice = LatticeSpec::line(32, Q::one());
    let gs = build_gamma_set(Representation::Dirac);
    let consts = Constants::default();
    let mut ok = true;

    // Frequency against the lattice dispersion oracle at dt = 0.05 dx.
    let (state, _omega, u, k) =
        EvolutionState::plane_wave(lattice.clone(), gs.clone(), consts.clone(), 1, 0.05).unwrap();
    let mut freq_state = state.clone();
    let measured =
        diracberg_core::dynamics::measure_frequency(&mut freq_state, k, &u, 1000).unwrap();
    let oracle = lattice_dispersion_omega(k, &consts, 1.0);
    let freq_residual = (measured - oracle).abs() / oracle;
    ok &= freq_residual <= 1e-6;

    // Conservation over 1000 RK4 steps. RK4 damps the oscillation amplitude
    // by O((omega dt)^6) per step, so the 1e-8 budget fixes dt = 0.02 dx/c
    // for this clause.
    let (mut cons_state, _, _, _) =
        EvolutionState::plane_wave(lattice.clone(), gs.clone(), consts.clone(), 1, 0.02).unwrap();
    let trajectory = diracberg_core::dynamics::evolve(&mut cons_state, 1000).unwrap();
    ok &= trajectory.energy_drift <= 1e-8;
    ok &= trajectory.norm_drift <= 1e-8;

    // Halving dt shrinks the phase error by at least 12x (fourth order).
    let phase_error = |dt: f64, steps: usize| -> f64 {
        let (mut s, om, uu, kk) =
            EvolutionState::plane_wave(lattice.clone(), gs.clone(), consts.clone(), 1, dt).unwrap();
        let mut phase = 0.0;
        let mut prev = s.overlap(kk, &uu);
        for _ in 0..steps {
            s.step();
            let cur = s.overlap(kk, &uu);
            phase += (cur * prev.conj()).arg();
            prev = cur;
        }
        (phase + om * dt * steps as f64).abs()
    };
    let coarse = phase_error(0.05, 200);
    let fine = phase_error(0.025, 400);
    let ratio = coarse / fine;
    ok &= ratio >= 12.0;

    let within_budget = started.elapsed().as_secs_f64() < 60.0;
    verdict(
        "09 dynamics",
        ok && within_budget,
        started,
        &format!(
            "frequency residual {freq_residual:.2e}; drifts {:.2e}/{:.2e}; dt-halving ratio {ratio:.1}",
            trajectory.energy_drift, trajectory.norm_drift
        ),
    );
}

#[test]
fn criterion_10_appendix_rotations() {
    let started = Instant::now();
    let angles = [
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
        2.0 * std::f64::consts::PI,
    ];
    let checks = run_spin_suite(&angles);
    let (ok, detail) = all_pass(&checks);
    let double_cover = checks.iter().any(|c| c.identity == "double_cover" && c.pass);
    verdict("10 appendix rotations", ok && double_cover, started, &detail);
}

#[test]
fn criterion_11_negative_controls() {
    let started = Instant::now();
    // A corrupted gamma entry must fail with a named identity.
    let checks = run_gamma_suite(&[Representation::Dirac], Some((Representation::Dirac, 1, 0, 2)));
    let gamma_failures: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    let gamma_named = !gamma_failures.is_empty()
        && gamma_failures.iter().all(|c| !c.identity.is_empty())
        && gamma_failures.iter().any(|c| c.identity.starts_with("clifford"));

    // A wrong-sign momentum definition must fail with a named identity.
    let lattice = LatticeSpec::line(8, Q::one());
    let gs = build_gamma_set(Representation::Dirac);
    let consts = Constants::default();
    let checks = run_track_suite(
        FormalismTrack::SpinorialFO,
        &lattice,
        &gs,
        &consts,
        3,
        5,
        Some(Fault::MomentumSign),
    )
    .unwrap();
    let momentum_failures: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    let momentum_named = !momentum_failures.is_empty()
        && momentum_failures.iter().any(|c| c.identity.starts_with("momentum_pi"));

    verdict(
        "11 negative controls",
        gamma_named && momentum_named,
        started,
        &format!(
            "gamma fault names {}; momentum fault names {}",
            gamma_failures.first().map(|c| c.identity.as_str()).unwrap_or("-"),
            momentum_failures.first().map(|c| c.identity.as_str()).unwrap_or("-")
        ),
    );
}
