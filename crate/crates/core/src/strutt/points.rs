use serde::{Deserialize, Serialize};

use super::{evaluate, StruttConfig, ZeroCurve};
use crate::floquet::MotionClass;
use crate::sym2::{Mat2, TOL_GAMMA};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezePoint {
    pub beta0: f64,
    pub beta1: f64,
    pub u: Mat2,
    /// `|u₁₁|`; the conjugate quadrature scales by its inverse.
    pub lambda: f64,
}

type P = (f64, f64);

fn segment_intersection(a: P, b: P, c: P, d: P) -> Option<P> {
    let r = (b.0 - a.0, b.1 - a.1);
    let s = (d.0 - c.0, d.1 - c.1);
    let den = r.0 * s.1 - r.1 * s.0;
    if den == 0.0 {
        return None;
    }
    let q = (c.0 - a.0, c.1 - a.1);
    let t = (q.0 * s.1 - q.1 * s.0) / den;
    let w = (q.0 * r.1 - q.1 * r.0) / den;
    ((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&w)).then_some((a.0 + t * r.0, a.1 + t * r.1))
}

fn segments(curves: &[ZeroCurve]) -> Vec<(P, P)> {
    curves.iter().flat_map(|c| c.polyline.windows(2).map(|w| (w[0], w[1]))).collect()
}

fn residual(u: &Mat2) -> f64 {
    u.u12.abs().max(u.u21.abs())
}

/// Damped Newton on `(u₁₂, u₂₁) = 0` with a central-difference Jacobian.
fn newton(start: P, interval: (f64, f64), cfg: &StruttConfig) -> Option<(P, Mat2)> {
    let eval = |p: P| evaluate(p.0, p.1, interval, &cfg.integrator).ok();
    let mut p = start;
    let mut u = eval(p)?;
    for _ in 0..cfg.max_newton_iter {
        if residual(&u) <= cfg.point_tol {
            return Some((p, u));
        }
        let h = 1e-5;
        let (xp, xm) = (eval((p.0 + h, p.1))?, eval((p.0 - h, p.1))?);
        let (yp, ym) = (eval((p.0, p.1 + h))?, eval((p.0, p.1 - h))?);
        let j = [
            [(xp.u12 - xm.u12) / (2.0 * h), (yp.u12 - ym.u12) / (2.0 * h)],
            [(xp.u21 - xm.u21) / (2.0 * h), (yp.u21 - ym.u21) / (2.0 * h)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = -(j[1][1] * u.u12 - j[0][1] * u.u21) / det;
        let dy = -(-j[1][0] * u.u12 + j[0][0] * u.u21) / det;
        let mut damp = 1.0;
        let current = residual(&u);
        loop {
            let q = (p.0 + damp * dx, p.1 + damp * dy);
            if let Some(v) = eval(q) {
                if residual(&v) < current {
                    p = q;
                    u = v;
                    break;
                }
            }
            damp *= 0.5;
            if damp < 1e-6 {
                return None;
            }
        }
    }
    (residual(&u) <= cfg.point_tol).then_some((p, u))
}

/// Intersections of `u₁₂ = 0` and `u₂₁ = 0` polylines, refined to genuine
/// diagonal propagators inside the squeezing region.
pub fn find_squeeze_points(
    red: &[ZeroCurve],
    blue: &[ZeroCurve],
    interval: (f64, f64),
    cfg: &StruttConfig,
) -> Vec<SqueezePoint> {
    let blue_segments = segments(blue);
    let mut candidates = vec![];
    for (a, b) in segments(red) {
        for &(c, d) in &blue_segments {
            let disjoint = a.0.max(b.0) < c.0.min(d.0)
                || c.0.max(d.0) < a.0.min(b.0)
                || a.1.max(b.1) < c.1.min(d.1)
                || c.1.max(d.1) < a.1.min(b.1);
            if !disjoint {
                if let Some(p) = segment_intersection(a, b, c, d) {
                    candidates.push(p);
                }
            }
        }
    }

    let mut out: Vec<SqueezePoint> = vec![];
    for start in candidates {
        let Some((p, u)) = newton(start, interval, cfg) else {
            log::info!("no convergence from candidate ({:.6}, {:.6})", start.0, start.1);
            continue;
        };
        if MotionClass::from_gamma(u.trace(), TOL_GAMMA) != MotionClass::IIISqueezing {
            continue;
        }
        if out.iter().any(|q| (q.beta0 - p.0).hypot(q.beta1 - p.1) < 1e-5) {
            continue;
        }
        out.push(SqueezePoint { beta0: p.0, beta1: p.1, u, lambda: u.u11.abs() });
    }
    out.sort_by(|a, b| a.beta1.total_cmp(&b.beta1).then(a.beta0.total_cmp(&b.beta0)));
    out
}
