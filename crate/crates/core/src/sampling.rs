//! Deterministic point sampling and seeded randomness.
//!
//! Domain points come from an additive Kronecker sequence (low discrepancy,
//! pure f64 arithmetic, identical on every platform). Probe vectors and
//! random polynomial coefficients come from ChaCha streams keyed by seed,
//! purpose tag and sample index, so parallel evaluation order cannot change
//! any result.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::jets::C64;
use crate::poly::MultiPoly;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn tag_hash(tag: &str) -> u64 {
    // FNV-1a; stable across platforms and releases.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Points of the R_d Kronecker sequence mapped into the domain box. The seed
/// only shifts the sequence offset; discrepancy properties are unchanged.
pub fn sample_points(domain: &[(f64, f64)], npoints: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = domain.len();
    // Root of x^(d+1) = x + 1 (the generalized golden ratio for dimension d).
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    let offsets: Vec<f64> = (0..d)
        .map(|j| {
            let h = splitmix64(seed ^ splitmix64(j as u64 + 1));
            (h >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect();
    (0..npoints)
        .map(|k| {
            (0..d)
                .map(|j| {
                    let u = (offsets[j] + (k as f64 + 1.0) * alphas[j]).fract();
                    let (lo, hi) = domain[j];
                    lo + u * (hi - lo)
                })
                .collect()
        })
        .collect()
}

/// ChaCha stream for a (seed, purpose) pair.
pub fn rng_for(seed: u64, tag: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ tag_hash(tag)))
}

/// ChaCha stream for a (seed, purpose, sample index) triple. Keying on the
/// index keeps results independent of evaluation order.
pub fn point_rng(seed: u64, tag: &str, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(
        seed ^ tag_hash(tag) ^ splitmix64(index as u64 + 0x51ed2701),
    ))
}

pub fn random_complex_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<C64> {
    (0..len)
        .map(|_| {
            C64::new(
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            )
        })
        .collect()
}

pub fn random_real_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.gen_range(-scale..scale), 0.0))
        .collect()
}

/// Random polynomial with all monomials of total degree <= `degree`.
pub fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, degree: u32, scale: f64) -> MultiPoly {
    let mut p = MultiPoly::zero(nvars);
    let mut exps = vec![0u32; nvars];
    loop {
        if exps.iter().sum::<u32>() <= degree {
            p.add_term(
                &exps,
                C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)),
            );
        }
        // Odometer over exponent vectors bounded by `degree` in each slot.
        let mut i = 0;
        loop {
            if i == nvars {
                return p;
            }
            exps[i] += 1;
            if exps[i] > degree {
                exps[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}
