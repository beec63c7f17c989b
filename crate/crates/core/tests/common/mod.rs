#![allow(dead_code)]

use rand::Rng;
use squeeze_core::propagator::{BetaProfile, SampledProfile, Segment};
use squeeze_core::sym2::Mat2;

/// Equidiagonal symplectic matrix with entries in [-5, 5].
pub fn equidiagonal(rng: &mut impl Rng) -> Mat2 {
    loop {
        let d: f64 = rng.gen_range(-2.0..2.0);
        let b: f64 = rng.gen_range(0.2..5.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let c = (d * d - 1.0) / b;
        if c.abs() <= 5.0 {
            return Mat2::new(d, b, c, d);
        }
    }
}

/// Symplectic matrix with entries of order one.
pub fn symplectic(rng: &mut impl Rng) -> Mat2 {
    loop {
        let a: f64 = rng.gen_range(-3.0..3.0);
        let b: f64 = rng.gen_range(-3.0..3.0);
        let c: f64 = rng.gen_range(-3.0..3.0);
        if a.abs() > 0.2 {
            let d = (1.0 + b * c) / a;
            if d.abs() <= 5.0 {
                return Mat2::new(a, b, c, d);
            }
        }
    }
}

/// Profile with β(τ) = β(-τ): Paul, constant, palindromic piecewise or a
/// mirrored sampled grid.
pub fn symmetric_profile(rng: &mut impl Rng, half_width: f64) -> BetaProfile {
    match rng.gen_range(0..4) {
        0 => BetaProfile::paul(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
        1 => BetaProfile::constant(rng.gen_range(-3.0..3.0)),
        2 => {
            let n = rng.gen_range(1..=3);
            let half: Vec<Segment> =
                (0..n).map(|_| Segment::new(rng.gen_range(0.2..1.5), rng.gen_range(-3.0..3.0))).collect();
            let mut segs = half.clone();
            segs.extend(half.iter().rev().skip(1).cloned());
            BetaProfile::piecewise(segs).unwrap()
        }
        _ => {
            let n = rng.gen_range(4..12);
            let right: Vec<f64> = (0..=n).map(|k| half_width * k as f64 / n as f64).collect();
            let vals: Vec<f64> = (0..=n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut tau: Vec<f64> = right.iter().rev().map(|t| -t).collect();
            tau.extend(right.iter().skip(1));
            let mut beta: Vec<f64> = vals.iter().rev().cloned().collect();
            beta.extend(vals.iter().skip(1));
            BetaProfile::Sampled(SampledProfile::new(tau, beta, None).unwrap())
        }
    }
}

/// Periodic profile with its period: constant, Paul, or 2–5 piecewise
/// segments, parameters in [-3, 3].
pub fn periodic_profile(rng: &mut impl Rng) -> (BetaProfile, f64) {
    match rng.gen_range(0..3) {
        0 => (BetaProfile::constant(rng.gen_range(-3.0..3.0)), rng.gen_range(0.1..3.0)),
        1 => (BetaProfile::paul(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)), std::f64::consts::TAU),
        _ => {
            let n = rng.gen_range(2..=5);
            let segs: Vec<Segment> =
                (0..n).map(|_| Segment::new(rng.gen_range(0.05..3.0), rng.gen_range(-3.0..3.0))).collect();
            let p = BetaProfile::piecewise(segs).unwrap();
            let period = p.period().unwrap();
            (p, period)
        }
    }
}
