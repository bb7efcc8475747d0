//! Fixed inputs shared by the benchmarks.

use rand::Rng;
use randcayley::cayley::{kernel_of_generating_map, sample_generating_set, AbelianQuotient, IntegerLattice};
use randcayley::intlinalg::IntMatrix;
use randcayley::latgeom::RealLattice;
use randcayley::randomlat::sample_x2_exact;
use randcayley::rng::stream_rng;

pub const SEED: u64 = 7;

/// Kernel lattice of a random generating set of `Z/k` of size `m`.
pub fn kernel(k: i64, m: usize) -> IntegerLattice {
    let q = AbelianQuotient::scalar(1, k).unwrap();
    kernel_of_generating_map(&sample_generating_set(&q, m, &mut stream_rng(SEED, k as u64)).unwrap()).unwrap()
}

/// Haar-random unimodular lattices in the plane.
pub fn haar_lattices(count: u64) -> Vec<RealLattice> {
    (0..count).map(|i| sample_x2_exact(&mut stream_rng(SEED, i))).collect()
}

/// Nonsingular square matrix with entries in `[-20, 20]`.
pub fn dense_matrix(m: usize) -> IntMatrix {
    let mut rng = stream_rng(SEED, 1 << 32);
    loop {
        let a = IntMatrix::new(m, m, (0..m * m).map(|_| rng.random_range(-20..=20)).collect());
        if a.determinant().is_ok_and(|d| d != 0) {
            return a;
        }
    }
}
