//! Counter-based random draws: every draw is a pure function of
//! `(seed, stream, index)`, so parallel scheduling cannot change it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cx::Cx;

/// Streams below this are reserved for per-suite `u` samples.
const Z_STREAM: u64 = 1 << 40;
const A_STREAM: u64 = (1 << 40) + 1;
/// 32-bit words reserved per index; enough for 32 `f64` draws.
const WORDS_PER_INDEX: u128 = 64;

pub fn rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r.set_word_pos(index as u128 * WORDS_PER_INDEX);
    r
}

/// Where parameter points are drawn.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SampleDomain {
    pub lo: f64,
    pub hi: f64,
    /// Largest modulus of the complex perturbation added to each `u^j`.
    pub perturbation: f64,
}

impl Default for SampleDomain {
    fn default() -> Self {
        SampleDomain {
            lo: 0.15,
            hi: 1.40,
            perturbation: 0.0,
        }
    }
}

/// Parameter point `index` of z-draw `draw` for the suite with id `suite`.
pub fn sample_u(seed: u64, suite: u64, draw: usize, index: usize, n: usize, dom: &SampleDomain) -> Vec<Cx> {
    let mut r = rng(seed, suite * 4096 + draw as u64, index as u64);
    (0..n)
        .map(|_| {
            let re = r.random_range(dom.lo..=dom.hi);
            let (rho, phi): (f64, f64) = (r.random(), r.random());
            let p = Cx::from_polar(dom.perturbation * rho, std::f64::consts::TAU * phi);
            Cx::new(re, 0.0) + p
        })
        .collect()
}

/// Deformation parameters for z-draw `draw`: real parts strictly
/// decreasing in `(0.05, 0.95)` with gaps of at least 0.02, small imaginary
/// parts, and at least `1e-6` away from every `a_k/a_0`.
pub fn sample_z(seed: u64, draw: usize, n: usize, a: &[Cx]) -> Vec<Cx> {
    let mut r = rng(seed, Z_STREAM, draw as u64);
    loop {
        let mut re: Vec<f64> = (1..n).map(|_| r.random_range(0.05..0.95)).collect();
        re.sort_by(|x, y| y.total_cmp(x));
        let z: Vec<Cx> = re.iter().map(|&x| Cx::new(x, r.random_range(-0.02..0.02))).collect();
        let gaps_ok = re.windows(2).all(|w| w[0] - w[1] >= 0.02);
        let apart = z.iter().all(|zk| a[1..].iter().all(|ak| (zk - ak / a[0]).norm() >= 1e-6));
        if gaps_ok && apart {
            return z;
        }
    }
}

/// Complex coefficient set `a_j = (j + 1) + i U(-0.5, 0.5)`.
pub fn random_a(seed: u64, n: usize) -> Vec<Cx> {
    let mut r = rng(seed, A_STREAM, n as u64);
    (0..=n).map(|j| Cx::new((j + 1) as f64, r.random_range(-0.5..0.5))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_keyed_not_sequential() {
        let d = SampleDomain::default();
        let a = sample_u(7, 3, 0, 5, 4, &d);
        let _ = sample_u(7, 3, 0, 4, 4, &d);
        assert_eq!(a, sample_u(7, 3, 0, 5, 4, &d));
        assert_ne!(a, sample_u(7, 3, 0, 6, 4, &d));
        assert_ne!(a, sample_u(7, 4, 0, 5, 4, &d));
        assert_ne!(a, sample_u(8, 3, 0, 5, 4, &d));
        assert!(a.iter().all(|u| u.im == 0.0 && (0.15..=1.40).contains(&u.re)));
    }

    #[test]
    fn z_draws_descend() {
        let a: Vec<Cx> = (1..=5).map(|j| Cx::new(j as f64, 0.0)).collect();
        for draw in 0..20 {
            let z = sample_z(42, draw, 4, &a);
            assert_eq!(z.len(), 3);
            assert!(z.windows(2).all(|w| w[0].re - w[1].re >= 0.02));
            assert!(z.iter().all(|x| x.re > 0.05 && x.re < 0.95));
        }
    }

    #[test]
    fn perturbation_is_bounded() {
        let d = SampleDomain {
            perturbation: 0.05,
            ..Default::default()
        };
        for i in 0..50 {
            for u in sample_u(1, 0, 0, i, 3, &d) {
                assert!(u.im.abs() <= 0.05 + 1e-15);
            }
        }
    }
}
