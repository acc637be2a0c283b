use mep_qlab::grid::*;
use mep_qlab::hilbert::{random, CMatrix, LinOp, StateOperator, Symmetry};
use mep_qlab::povm::Effect;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn indicator(mask: &RegionMask) -> impl Fn(usize) -> f64 + '_ {
    move |j| if mask.contains(j) { 1.0 } else { 0.0 }
}

/// Two well-separated regions on a 256-point grid, with Gaussian packets cut to them.
struct Setup {
    grid: Grid1D,
    d1: RegionMask,
    d2: RegionMask,
    psi: GridWavefunction,
    phi: GridWavefunction,
}

fn setup(n: usize) -> Setup {
    let grid = Grid1D::centered(0.0, 24.0 / n as f64, n, 1.0).unwrap();
    let d1 = RegionMask::interval(&grid, -11.0, -1.0);
    let d2 = RegionMask::interval(&grid, 1.0, 11.0);
    let psi = GridWavefunction::gaussian(grid, -6.0, 0.4, 1.0).unwrap().windowed(indicator(&d1)).normalized().unwrap();
    let phi = GridWavefunction::gaussian(grid, 6.0, -0.3, 1.2).unwrap().windowed(indicator(&d2)).normalized().unwrap();
    Setup { grid, d1, d2, psi, phi }
}

#[test]
fn momentum_projections_commute_with_free_hamiltonian() {
    let g = Grid1D::centered(0.0, 0.2, 64, 1.0).unwrap();
    let h = g.momentum_function(|p| p * p / 2.0);
    let cells = [Cell::new(f64::NEG_INFINITY, -1.0), Cell::new(-1.0, 0.7), Cell::new(0.7, f64::INFINITY)];
    let pvm = momentum_pvm(&g, &cells).unwrap();
    assert!(pvm.is_sharp());
    for e in pvm.effects() {
        let c = e.op().commutator(&h).unwrap();
        assert!(max_abs(c.matrix()) < 1e-10);
    }
}

#[test]
fn boosted_packet_lands_in_boosted_cell() {
    let g = Grid1D::centered(0.0, 0.1, 256, 1.0).unwrap();
    let psi = GridWavefunction::gaussian(g, 0.0, 0.0, 2.0).unwrap();
    let kick = 40.0 * g.dp();
    let boosted = psi.boost(kick);
    let cells = [
        Cell::new(f64::NEG_INFINITY, kick - 1.0),
        Cell::new(kick - 1.0, kick + 1.0),
        Cell::new(kick + 1.0, f64::INFINITY),
    ];
    let pvm = momentum_pvm(&g, &cells).unwrap();
    let t = boosted.density().unwrap();
    let p = pvm.probability(&t, &[vec![1.0]]).unwrap();
    // momentum width 1/(2σ) = 0.25, so ±1 is four standard deviations
    assert!(p > 0.9999, "{p}");
    let unboosted = pvm.probability(&psi.density().unwrap(), &[vec![1.0]]).unwrap();
    assert!(unboosted < 1e-12);
}

#[test]
fn momentum_snapping_keeps_adjacent_cells_disjoint() {
    let g = Grid1D::centered(0.0, 0.25, 16, 1.0).unwrap();
    let dp = g.dp();
    // edge between lattice points
    let cut = 1.5 * dp;
    let pvm = momentum_pvm(&g, &[Cell::new(f64::NEG_INFINITY, cut), Cell::new(cut, f64::INFINITY)]).unwrap();
    let ranks: Vec<f64> = pvm.effects().iter().map(|e| e.op().trace().re).collect();
    // lattice indices −8..=1 lie below 1.5 dp, 2..=7 above
    assert!((ranks[0] - 10.0).abs() < 1e-12 && (ranks[1] - 6.0).abs() < 1e-12);
    let prod = pvm.effects()[0].op().compose(pvm.effects()[1].op()).unwrap();
    assert!(max_abs(prod.matrix()) < 1e-13);
}

#[test]
fn boost_shifts_mean_momentum_by_mu_v() {
    let g = Grid1D::centered(0.0, 0.1, 256, 1.0).unwrap();
    let psi = GridWavefunction::gaussian(g, 0.3, 0.5, 1.5).unwrap();
    let (p0, dp0) = psi.momentum_moments();
    let mv = 12.0 * g.dp();
    let (p1, dp1) = psi.boost(mv).momentum_moments();
    assert!((p1 - (p0 + mv)).abs() < 1e-10);
    assert!((dp1 - dp0).abs() < 1e-10);
}

#[test]
fn localisation_of_local_operator_is_identity_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let g = Grid1D::centered(0.0, 0.5, 24, 1.0).unwrap();
    let d = RegionMask::interval(&g, -3.0, 2.0);
    let a = KernelOp::from_linop(g, &random::hermitian(&mut rng, g.space())).unwrap().d_localise(&d).unwrap();
    let again = a.d_localise(&d).unwrap();
    assert!(max_abs(&(again.matrix() - a.matrix())) < 1e-12);
}

#[test]
fn localisation_does_not_increase_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let g = Grid1D::centered(0.0, 0.5, 24, 1.0).unwrap();
    for _ in 0..20 {
        let a = KernelOp::from_linop(g, &random::hermitian(&mut rng, g.space())).unwrap();
        let lo = rng.random_range(-6.0..0.0);
        let d = RegionMask::interval(&g, lo, lo + rng.random_range(1.0..6.0));
        if d.is_empty() {
            continue;
        }
        assert!(a.d_localise(&d).unwrap().operator_norm() <= a.operator_norm() + 1e-12);
    }
}

#[test]
fn localised_position_keeps_moments_of_local_state() {
    let s = setup(256);
    let q = KernelOp::position(s.grid);
    let qd = q.d_localise(&s.d1).unwrap();
    let full = q.expectation(&s.psi).unwrap();
    let local = qd.expectation(&s.psi).unwrap();
    assert!((full - local).norm() < 1e-12);
    let q2 = q.compose(&q).unwrap();
    let qd2 = qd.compose(&qd).unwrap();
    assert!((q2.expectation(&s.psi).unwrap() - qd2.expectation(&s.psi).unwrap()).norm() < 1e-12);
}

#[test]
fn symmetric_observable_average_for_disjoint_supports() {
    let s = setup(128);
    let a = KernelOp::momentum(s.grid);
    let big = symmetric_observable(&a);
    for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
        let (pair, nu) = symmetrize_pair(&s.psi, &s.phi, kind).unwrap();
        assert!((nu - 0.5f64.sqrt()).abs() < 1e-15);
        let got = big.expectation(&pair).unwrap();
        let want = a.expectation(&s.psi).unwrap() + a.expectation(&s.phi).unwrap();
        assert!((got - want).norm() < 1e-10, "{got} {want}");
    }
}

#[test]
fn symmetric_observable_matches_overlap_formula() {
    // ⟨Ψ|AΨ⟩ = (⟨ψ|aψ⟩ + ⟨φ|aφ⟩ + εc⟨φ|aψ⟩ + εc*⟨ψ|aφ⟩)/(1 + ε|c|²)
    let g = Grid1D::centered(0.0, 0.1, 128, 1.0).unwrap();
    let psi = GridWavefunction::gaussian(g, -0.5, 0.3, 1.0).unwrap();
    let phi = GridWavefunction::gaussian(g, 0.7, -0.2, 0.8).unwrap();
    let a = KernelOp::momentum(g);
    let big = symmetric_observable(&a);
    let c = psi.inner(&phi).unwrap();
    for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
        let eps = kind.epsilon();
        let (pair, _) = symmetrize_pair(&psi, &phi, kind).unwrap();
        let a_psi = a.apply(&psi).unwrap();
        let a_phi = a.apply(&phi).unwrap();
        let num = psi.inner(&a_psi).unwrap()
            + phi.inner(&a_phi).unwrap()
            + c * phi.inner(&a_psi).unwrap() * eps
            + c.conj() * psi.inner(&a_phi).unwrap() * eps;
        let want = num / (1.0 + eps * c.norm_sqr());
        assert!((big.expectation(&pair).unwrap() - want).norm() < 1e-10);
    }
}

#[test]
fn unlocalised_position_sees_the_remote_particle() {
    let s = setup(256);
    let q = KernelOp::position(s.grid);
    let (pair, _) = symmetrize_pair(&s.psi, &s.phi, Symmetry::Antisymmetric).unwrap();
    let got = symmetric_observable(&q).expectation(&pair).unwrap().re;
    let alone = q.expectation(&s.psi).unwrap().re;
    let remote = q.expectation(&s.phi).unwrap().re;
    assert!((got - alone - remote).abs() < 1e-10);
    assert!(remote > 5.0);
    // the localised observable does not
    let qd = q.d_localise(&s.d1).unwrap();
    let got_d = symmetric_observable(&qd).expectation(&pair).unwrap().re;
    assert!((got_d - alone).abs() < 1e-10);
}

fn cell_effect(s: &Setup, lo: f64, hi: f64, mask: &RegionMask) -> Effect {
    let pvm = position_pvm(&s.grid, &[Cell::new(f64::NEG_INFINITY, lo), Cell::new(lo, hi), Cell::new(hi, f64::INFINITY)]).unwrap();
    let e = KernelOp::from_linop(s.grid, pvm.effects()[1].op()).unwrap().d_localise(mask).unwrap();
    Effect::new(e.to_linop()).unwrap()
}

#[test]
fn cluster_separability_for_disjoint_packets() {
    let s = setup(256);
    let t1 = s.psi.density().unwrap();
    let t2 = s.phi.density().unwrap();
    let e = cell_effect(&s, -7.0, -5.5, &s.d1);
    for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
        let c = cluster_separability_check(&t1, &t2, &e, &s.d1, &s.d2, kind).unwrap();
        assert!(c.pass && (c.lhs - c.rhs).abs() < 1e-8);
        assert!((c.normalization - 0.5).abs() < 1e-10);
        assert!(c.rhs > 0.1);
    }
}

#[test]
fn effect_in_remote_region_measures_remote_state() {
    let s = setup(256);
    let t1 = s.psi.density().unwrap();
    let t2 = s.phi.density().unwrap();
    let e = cell_effect(&s, 5.0, 7.0, &s.d2);
    let want = t2.expectation_real(e.op()).unwrap();
    for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
        let c = cluster_separability_check(&t1, &t2, &e, &s.d1, &s.d2, kind).unwrap();
        assert!((c.lhs - want).abs() < 1e-10);
        assert!(c.rhs.abs() < 1e-15);
    }
}

#[test]
fn overlapping_masks_rejected() {
    let s = setup(64);
    let t1 = s.psi.density().unwrap();
    let t2 = s.phi.density().unwrap();
    let e = Effect::new(s.d1.projector()).unwrap();
    let wide = RegionMask::interval(&s.grid, -11.0, 3.0);
    let r = cluster_separability_check(&t1, &t2, &e, &wide, &s.d2, Symmetry::Symmetric);
    assert_eq!(r.unwrap_err(), mep_qlab::Error::OverlappingMasks);
}

#[test]
fn trace_identities_match_dense_symmetrizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let g = Grid1D::centered(0.0, 1.0, 12, 1.0).unwrap();
    let d1 = RegionMask::interval(&g, -6.5, -0.5);
    let d2 = RegionMask::interval(&g, 0.5, 6.0);
    for _ in 0..10 {
        let t1 = random_local_state(&mut rng, &d1, 2).unwrap();
        let t2 = random_local_state(&mut rng, &d2, 3).unwrap();
        let raw = random::hermitian(&mut rng, g.space());
        let spec = raw.map_spectrum(|x| 1.0 / (1.0 + (-x).exp())).unwrap();
        let e = Effect::new(KernelOp::from_linop(g, &spec).unwrap().d_localise(&d1).unwrap().to_linop()).unwrap();
        for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
            let fast = cluster_separability_check(&t1, &t2, &e, &d1, &d2, kind).unwrap();
            let dense = cluster_separability_dense(&t1, &t2, &e, &d1, &d2, kind).unwrap();
            assert!((fast.lhs - dense.lhs).abs() < 1e-12);
            assert!((fast.normalization - dense.normalization).abs() < 1e-12);
            assert!(fast.pass && dense.pass);
        }
    }
}

#[test]
fn separation_status_holds_on_sampled_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let s = setup(64);
    let e = cell_effect(&s, -8.0, -4.0, &s.d1);
    let t = s.psi.density().unwrap();
    for kind in [Symmetry::Symmetric, Symmetry::Antisymmetric] {
        let r = separation_status_check(&mut rng, &t, &e, &s.d1, &s.d2, kind, 50).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.samples, 50);
        assert!((r.witness_probability - 1.0).abs() < 1e-12);
    }
}

#[test]
fn convolution_of_disjointly_local_operators_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let g = Grid1D::centered(0.0, 0.5, 32, 1.0).unwrap();
    let d1 = RegionMask::interval(&g, -8.0, -1.0);
    let d2 = RegionMask::interval(&g, 1.0, 8.0);
    for _ in 0..20 {
        let a = KernelOp::from_linop(g, &random::hermitian(&mut rng, g.space())).unwrap().d_localise(&d1).unwrap();
        let b = KernelOp::from_linop(g, &random::hermitian(&mut rng, g.space())).unwrap().d_localise(&d2).unwrap();
        assert!(max_abs(a.compose(&b).unwrap().matrix()) < 1e-12);
        assert!(max_abs(b.compose(&a).unwrap().matrix()) < 1e-12);
        // contraction over the second slot of both: Σ_y A(x,y) B(z,y)
        assert!(max_abs(&(a.matrix() * b.matrix().transpose())) < 1e-12);
    }
}

#[test]
fn wavefunction_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("w.csv");
    let g = Grid1D::centered(0.0, 0.5, 16, 1.0).unwrap();
    GridWavefunction::gaussian(g, 0.0, 1.0, 1.0).unwrap().write_csv(&p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("x,re,im\n"));
    assert_eq!(text.lines().count(), 17);
}

fn random_effect(rng: &mut ChaCha8Rng, g: &Grid1D) -> LinOp {
    let h = random::hermitian(rng, g.space());
    h.map_spectrum(|x| 1.0 / (1.0 + (-2.0 * x).exp())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn localisation_maps_effects_to_effects(seed in any::<u64>(), lo in -4.0f64..0.0, w in 0.6f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid1D::centered(0.0, 0.5, 16, 1.0).unwrap();
        let d = RegionMask::interval(&g, lo, lo + w);
        prop_assume!(!d.is_empty());
        let e = random_effect(&mut rng, &g);
        let l = KernelOp::from_linop(g, &e).unwrap().d_localise(&d).unwrap().to_linop();
        let ev = l.eigh().unwrap().values;
        prop_assert!(ev[0] >= -1e-12 && ev[ev.len() - 1] <= 1.0 + 1e-12);
        prop_assert!(Effect::new(l).is_ok());
    }

    #[test]
    fn locality_regions_form_a_filter(seed in any::<u64>(), a in -4.0f64..-1.0, b in 0.0f64..4.0, c in -3.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid1D::centered(0.0, 0.5, 16, 1.0).unwrap();
        let d = RegionMask::interval(&g, a, b);
        let d2 = RegionMask::interval(&g, c, c + 3.0);
        let core = d.intersection(&d2).unwrap();
        prop_assume!(!core.is_empty());
        let op = KernelOp::from_linop(g, &random::hermitian(&mut rng, g.space())).unwrap().d_localise(&core).unwrap();
        // local in the core, hence in both supersets
        prop_assert!(op.is_d_local(&d, 1e-12).unwrap());
        prop_assert!(op.is_d_local(&d2, 1e-12).unwrap());
        prop_assert!(op.is_d_local(&d.union(&d2).unwrap(), 1e-12).unwrap());
        // local in d and d2, hence in their intersection
        prop_assert!(op.is_d_local(&d.intersection(&d2).unwrap(), 1e-12).unwrap());
        // a generic operator local in d is not local in a strict subset it leaks out of
        let wide = KernelOp::from_linop(g, &random::hermitian(&mut rng, g.space())).unwrap().d_localise(&d).unwrap();
        if !d.is_subset_of(&d2).unwrap() {
            prop_assert!(!wide.is_d_local(&d2, 1e-12).unwrap());
        }
    }

    #[test]
    fn position_pvm_is_multiplicative(seed in any::<u64>(), cuts in proptest::collection::vec(-3.0f64..3.0, 1..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid1D::centered(0.0, 0.5, 16, 1.0).unwrap();
        let mut cuts = cuts;
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(cuts);
        edges.push(f64::INFINITY);
        let cells: Vec<Cell> = edges.windows(2).map(|w| Cell::new(w[0], w[1])).collect();
        let pvm = position_pvm(&g, &cells).unwrap();
        let t: StateOperator = random::state(&mut rng, g.space());
        let total: f64 = pvm.distribution(&t).unwrap().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (i, a) in pvm.effects().iter().enumerate() {
            for (j, b) in pvm.effects().iter().enumerate() {
                let ab = a.op().compose(b.op()).unwrap();
                let want = if i == j { a.op().matrix().clone() } else { CMatrix::zeros(16, 16) };
                prop_assert!(max_abs(&(ab.matrix() - want)) < 1e-15);
            }
        }
    }
}
