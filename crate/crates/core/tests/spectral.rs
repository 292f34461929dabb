use proptest::prelude::*;
use starkqfi::matrix::{SymMatrix, Tridiagonal};
use starkqfi::model::{build_sp_hamiltonian, ProbeSpec};
use starkqfi::scaling::fit_power_law;
use starkqfi::spectral::{eigendecompose_dense, eigendecompose_tridiagonal, energy_gap, EigenDecomposition};

fn reconstruction_error(m: &SymMatrix, dec: &EigenDecomposition) -> f64 {
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r: f64 = (0..n).map(|k| dec.vector(k)[i] * dec.energy(k) * dec.vector(k)[j]).sum();
            worst = worst.max((r - m.get(i, j)).abs());
        }
    }
    worst / m.norm_inf()
}

fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
    // xorshift keeps the large case deterministic without a generator dependency
    let mut s = seed | 1;
    let mut next = || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            m.set_sym(i, j, next());
        }
    }
    m
}

#[test]
fn reconstruction_at_dim_500() {
    let m = random_symmetric(500, 0x5eed);
    let dec = eigendecompose_dense(&m).unwrap();
    assert!(reconstruction_error(&m, &dec) <= 1e-9);
}

#[test]
fn free_chain_gap_exponent() {
    let (mut l, mut g) = (vec![], vec![]);
    for len in (50..=300).step_by(10) {
        let t = build_sp_hamiltonian(&ProbeSpec::single_particle(len, 0.04, 0.0).unwrap()).unwrap();
        l.push(len as f64);
        g.push(energy_gap(&eigendecompose_tridiagonal(&t).unwrap()).unwrap().value);
    }
    let p = fit_power_law(&l, &g).unwrap().slope;
    assert!((-2.05..=-1.95).contains(&p), "{p}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dense_reconstruction(n in 1usize..80, seed in any::<u64>()) {
        let m = random_symmetric(n, seed);
        let dec = eigendecompose_dense(&m).unwrap();
        prop_assert!(reconstruction_error(&m, &dec) <= 1e-9);
        prop_assert!(dec.energies().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn tridiagonal_reconstruction(diag in prop::collection::vec(-5.0f64..5.0, 2..120), seed in any::<u64>()) {
        let n = diag.len();
        let mut s = seed | 1;
        let off: Vec<f64> = (0..n - 1).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); -((s >> 33) as f64 / (1u64 << 31) as f64) }).collect();
        let t = Tridiagonal::new(diag, off).unwrap();
        let dec = eigendecompose_tridiagonal(&t).unwrap();
        prop_assert!(reconstruction_error(&t.to_dense(), &dec) <= 1e-9);
    }
}
