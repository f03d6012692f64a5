//! Seeded generators for the randomized suites.

use frac_talenti::RadialProfile;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for case `index` of a suite seeded with `seed`; independent of
/// the order in which cases run.
pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Step profile with 1 to 6 pieces, breakpoints in (0.02, 0.98) and values
/// in [0, 1), never identically zero.
pub fn random_profile<R: Rng>(rng: &mut R) -> RadialProfile {
    loop {
        let k = rng.gen_range(1..=6);
        let mut radii: Vec<f64> = (0..k - 1).map(|_| rng.gen_range(0.02..0.98)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        radii.push(1.0);
        let values: Vec<f64> = (0..radii.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        if let Ok(p) = RadialProfile::new(radii, values) {
            if !p.is_zero() {
                return p;
            }
        }
    }
}

/// Like [`random_profile`] but rejecting symmetric decreasing draws.
pub fn random_nonsymmetric_profile<R: Rng>(rng: &mut R) -> RadialProfile {
    loop {
        let p = random_profile(rng);
        if !p.is_symmetric_decreasing() {
            return p;
        }
    }
}

/// Point of `R^dim` with uniformly random direction and norm in `[lo, hi)`.
pub fn random_point<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    let dir = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            break v.into_iter().map(|x| x / n).collect::<Vec<_>>();
        }
    };
    let r = rng.gen_range(lo..hi);
    dir.into_iter().map(|x| x * r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_cases() {
        let a: Vec<_> = (0..5).map(|i| random_profile(&mut case_rng(7, i))).collect();
        let b: Vec<_> = (0..5).map(|i| random_profile(&mut case_rng(7, i))).collect();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn random_point_norm_in_range() {
        let mut rng = case_rng(1, 0);
        for dim in 1..=3 {
            for _ in 0..50 {
                let p = random_point(&mut rng, dim, 0.2, 0.8);
                let n = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((0.2..0.8 + 1e-12).contains(&n));
            }
        }
    }

    #[test]
    fn nonsymmetric_profiles_are_nonsymmetric() {
        let mut rng = case_rng(3, 0);
        for _ in 0..20 {
            assert!(!random_nonsymmetric_profile(&mut rng).is_symmetric_decreasing());
        }
    }
}
