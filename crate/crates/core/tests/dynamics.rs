use mep_qlab::dynamics::*;
use mep_qlab::hilbert::{von_neumann_entropy, CMatrix, LinOp, C64};
use mep_qlab::mepacket::{quantum_state, FockBasis, MEPacketParams, Representation};
use proptest::prelude::*;
use std::f64::consts::PI;

fn unit_packet() -> MEPacketParams<f64> {
    MEPacketParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 2.0 * PI).unwrap()
}

#[test]
fn harmonic_and_free_oracles_agree_with_closed_form() {
    let params = unit_packet();
    let times = time_grid(4.0 * PI, 33);
    for pot in [QuadraticPotential::harmonic(1.0, 1.0).unwrap(), QuadraticPotential::free(1.0).unwrap()] {
        let cf = closed_form_trajectory(&params, &pot, &times).unwrap();
        let fock = fock_quantum_oracle(&params, &pot, &times, None).unwrap();
        assert!(fock.trajectory.max_abs_diff(&cf).unwrap() < 1e-6, "{pot:?}");
        let mc = mc_classical_oracle(&params, &Flow::Quadratic(pot), &times, 100_000, 7).unwrap();
        assert!(mc.max_z_score(&cf).unwrap() < 3.0, "{pot:?}");
    }
}

#[test]
fn free_spreading_example() {
    let params = MEPacketParams::new(0.0, 0.0, 1.0, 1.0, 1.0, 2.0 * PI).unwrap();
    let pot = QuadraticPotential::free(1.0).unwrap();
    let cf = closed_form_trajectory(&params, &pot, &[0.0, 2.0]).unwrap();
    assert!((cf.dq[1] - 5f64.sqrt()).abs() < 1e-12);
    let mc = mc_classical_oracle(&params, &Flow::Quadratic(pot), &[0.0, 2.0], 100_000, 11).unwrap();
    assert!((mc.trajectory.dq[1] - 5f64.sqrt()).abs() < 3.0 * mc.se.dq[1]);
}

#[test]
fn zero_variance_limit_follows_single_orbit() {
    let params = MEPacketParams::new(0.7, -0.4, 1e-8, 1e-8, 1e-17, 1.0).unwrap();
    let pot = QuadraticPotential::new(0.0, 0.2, 0.9, 1.3).unwrap();
    let times = time_grid(5.0, 11);
    let mc = mc_classical_oracle(&params, &Flow::Quadratic(pot), &times, 2000, 1).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let (q, p) = evolution_coeffs(&pot, t).apply(0.7, -0.4);
        assert!((mc.trajectory.q[i] - q).abs() < 1e-7 && (mc.trajectory.p[i] - p).abs() < 1e-7);
        assert!(mc.trajectory.dq[i] < 1e-7 && mc.trajectory.dp[i] < 1e-7);
    }
}

#[test]
fn monte_carlo_is_bitwise_reproducible() {
    let params = unit_packet();
    let pot = QuadraticPotential::harmonic(1.0, 1.0).unwrap();
    let times = time_grid(3.0, 7);
    let anharmonic = |q: f64| -q - 0.1 * q * q * q;
    for flow in [Flow::Quadratic(pot), Flow::General { mu: 1.0, force: &anharmonic }] {
        let a = mc_classical_oracle(&params, &flow, &times, 9000, 5).unwrap();
        let b = mc_classical_oracle(&params, &flow, &times, 9000, 5).unwrap();
        assert_eq!(a, b);
        let c = mc_classical_oracle(&params, &flow, &times, 9000, 6).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn inverted_oscillator_grows() {
    let params = unit_packet();
    let pot = QuadraticPotential::harmonic(1.0, -1.0).unwrap();
    let times = time_grid(3.0, 4);
    let cf = closed_form_trajectory(&params, &pot, &times).unwrap();
    // ΔQ(t)² = cosh² + sinh² for unit widths
    for (i, &t) in times.iter().enumerate() {
        assert!((cf.dq[i] - t.cosh().hypot(t.sinh())).abs() < 1e-12 * cf.dq[i]);
    }
    let mc = mc_classical_oracle(&params, &Flow::Quadratic(pot), &times, 50_000, 2).unwrap();
    assert!(mc.max_z_score(&cf).unwrap() < 4.0);
}

fn evolution_operator(fb: &FockBasis, pot: &QuadraticPotential<f64>, t: f64) -> LinOp {
    let h = fb.quadratic_form(0.5 * pot.v2, 0.5 / pot.mu, 0.0).add(&fb.q().scale_real(pot.v1)).unwrap();
    let eig = h.eigh().unwrap();
    let phases: Vec<C64> = eig.values.iter().map(|e| C64::from_polar(1.0, -e * t / fb.hbar)).collect();
    let mut scaled = eig.vectors.clone();
    for (j, ph) in phases.iter().enumerate() {
        let col = scaled.column(j) * *ph;
        scaled.set_column(j, &col);
    }
    LinOp::new(fb.space(), &scaled * eig.vectors.adjoint()).unwrap()
}

#[test]
fn heisenberg_commutator_preserved_on_low_block() {
    let fb = FockBasis::new(80, 1.0, 1.0).unwrap();
    let pot = QuadraticPotential::new(0.0, 0.3, 1.0, 1.0).unwrap();
    let block = 20;
    for t in [0.4, 1.7, 3.0] {
        let u = evolution_operator(&fb, &pot, t);
        let ud = u.adjoint();
        let qt = ud.compose(&fb.q()).unwrap().compose(&u).unwrap();
        let pt = ud.compose(&fb.p()).unwrap().compose(&u).unwrap();
        let c = qt.commutator(&pt).unwrap().into_matrix();
        let low = c.view((0, 0), (block, block)).into_owned();
        let want = CMatrix::identity(block, block) * C64::new(0.0, fb.hbar);
        assert!((low - want).camax() < 1e-8, "t = {t}");
    }
}

#[test]
fn entropy_constant_while_nu_grows() {
    let params = MEPacketParams::new(0.5, 0.2, 0.8, 1.6, 1.0, 2.0 * PI).unwrap();
    let nu0 = params.nu();
    let pot = QuadraticPotential::harmonic(1.0, 1.0).unwrap();
    let fb = FockBasis::new(64, params.k_length_sq().sqrt(), 1.0).unwrap();
    let packet = quantum_state(&params, Representation::Fock(fb), None).unwrap();
    let s0 = von_neumann_entropy(packet.state());
    let times = time_grid(0.5, 6);
    let report = fock_quantum_oracle(&params, &pot, &times, None).unwrap();
    let nus = report.trajectory.nu(1.0);
    assert!((nus[0] - nu0).abs() < 1e-8);
    for (&t, &nu) in times.iter().zip(&nus).skip(1) {
        let evolved = packet.state().evolve(&evolution_operator(&fb, &pot, t)).unwrap();
        assert!((von_neumann_entropy(&evolved) - s0).abs() < 1e-9);
        assert!(nu > nu0, "ν({t}) = {nu}");
    }
}

#[test]
fn gaussian_packet_evolves_like_closed_form() {
    let params = MEPacketParams::new(-0.5, 1.0, 1.0, 0.5, 1.0, 2.0 * PI).unwrap();
    assert!((params.nu() - 1.0).abs() < 1e-15);
    let pot = QuadraticPotential::new(0.0, 0.5, 2.0, 1.0).unwrap();
    let times = time_grid(2.0 * PI, 17);
    let fock = fock_quantum_oracle(&params, &pot, &times, None).unwrap();
    let cf = closed_form_trajectory(&params, &pot, &times).unwrap();
    assert!(fock.trajectory.max_abs_diff(&cf).unwrap() < 1e-6);
}

#[test]
fn bounded_for_positive_stiffness() {
    let params = unit_packet();
    let pot = QuadraticPotential::new(0.0, -0.7, 0.4, 2.0).unwrap();
    let tr = closed_form_trajectory(&params, &pot, &time_grid(1000.0, 2001)).unwrap();
    let period = 2.0 * PI / pot.omega();
    let one = closed_form_trajectory(&params, &pot, &time_grid(period, 401)).unwrap();
    let bound = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    for (long, short) in [(&tr.q, &one.q), (&tr.p, &one.p), (&tr.dq, &one.dq), (&tr.dp, &one.dp)] {
        assert!(bound(long) <= bound(short) * (1.0 + 1e-3));
    }
}

#[test]
fn trajectory_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let tr = closed_form_trajectory(&unit_packet(), &QuadraticPotential::free(1.0).unwrap(), &[0.0, 1.0, 2.0]).unwrap();
    tr.write_csv(&path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["t", "Q", "P", "dQ", "dP"]);
    let rows: Vec<Vec<f64>> = rd.records().map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][3], tr.dq[2]);
}

#[test]
fn unsorted_times_rejected() {
    let pot = QuadraticPotential::free(1.0).unwrap();
    assert!(closed_form_trajectory(&unit_packet(), &pot, &[1.0, 0.5]).is_err());
    assert!(mc_classical_oracle(&unit_packet(), &Flow::Quadratic(pot), &[1.0, 0.5], 1000, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flow_is_symplectic(v1 in -2.0f64..2.0, v2 in -3.0f64..3.0, mu in 0.2f64..4.0, t in -6.0f64..6.0) {
        let pot = QuadraticPotential::new(0.0, v1, v2, mu).unwrap();
        let c = evolution_coeffs(&pot, t);
        prop_assert!((c.determinant() - 1.0).abs() < 1e-12 * (1.0 + c.f1.abs() * c.g2.abs() + c.f2.abs() * c.g1.abs()));
    }

    #[test]
    fn trajectory_starts_at_params(q in -3.0f64..3.0, p in -3.0f64..3.0, dq in 0.1f64..3.0, dp in 0.1f64..3.0, v2 in -2.0f64..2.0) {
        let params = MEPacketParams::new(q, p, dq, dp, 0.01, 1.0).unwrap();
        let pot = QuadraticPotential::new(0.3, 0.5, v2, 1.0).unwrap();
        let tr = closed_form_trajectory(&params, &pot, &[0.0]).unwrap();
        prop_assert_eq!((tr.q[0], tr.p[0]), (q, p));
        prop_assert!((tr.dq[0] - dq).abs() < 1e-15 && (tr.dp[0] - dp).abs() < 1e-15);
    }
}
