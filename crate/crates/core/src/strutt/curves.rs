use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, StruttConfig, StruttError, StruttGrid};
use crate::sym2::Mat2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    U12,
    U21,
}

impl Element {
    pub fn of(&self, u: &Mat2) -> f64 {
        match self {
            Element::U12 => u.u12,
            Element::U21 => u.u21,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Element::U12 => "u12",
            Element::U21 => "u21",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroCurve {
    pub element: Element,
    /// Ordered `(β₀, β₁)` vertices; closed curves repeat the first vertex.
    pub polyline: Vec<(f64, f64)>,
    /// Every vertex satisfies `|element| <= curve_tol`.
    pub refined: bool,
}

/// Grid edge: `H(i0, i1)` joins nodes `(i0, i1)` and `(i0 + 1, i1)`,
/// `V(i0, i1)` joins `(i0, i1)` and `(i0, i1 + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EdgeKey {
    H(usize, usize),
    V(usize, usize),
}

impl EdgeKey {
    fn ends(&self) -> ((usize, usize), (usize, usize)) {
        match *self {
            EdgeKey::H(i, j) => ((i, j), (i + 1, j)),
            EdgeKey::V(i, j) => ((i, j), (i, j + 1)),
        }
    }
}

/// Bracketed root of `f` on the segment `a → b` (Illinois false position
/// with bisection steps whenever the bracket stalls).
fn refine_on_edge(
    f: impl Fn((f64, f64)) -> Option<f64>,
    a: (f64, f64),
    b: (f64, f64),
    mut fa: f64,
    mut fb: f64,
    tol: f64,
) -> ((f64, f64), f64) {
    let at = |s: f64| (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut side = 0i8;
    let mut best = if fa.abs() < fb.abs() { (0.0, fa.abs()) } else { (1.0, fb.abs()) };
    for it in 0..100 {
        if best.1 <= tol || hi - lo < 1e-15 {
            break;
        }
        let mut s = (lo * fb - hi * fa) / (fb - fa);
        if it % 4 == 3 || !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let Some(fs) = f(at(s)) else {
            break;
        };
        if fs.abs() < best.1 {
            best = (s, fs.abs());
        }
        if (fs < 0.0) == (fa < 0.0) {
            lo = s;
            fa = fs;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            hi = s;
            fb = fs;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    (at(best.0), best.1)
}

/// Marching squares on the sign of `element` over quads whose four corners
/// are all class III, with every crossing refined along its grid edge.
pub fn trace_zero_curves(
    grid: &StruttGrid,
    element: Element,
    cfg: &StruttConfig,
) -> Result<Vec<ZeroCurve>, StruttError> {
    let n0 = grid.spec.beta0.n;
    let n1 = grid.spec.beta1.n;
    let value = |i: usize, j: usize| -> Option<f64> {
        let c = grid.cell(i, j);
        if c.is_squeezing() {
            c.element(element)
        } else {
            None
        }
    };

    let mut segments: Vec<(EdgeKey, EdgeKey)> = vec![];
    for j in 0..n1.saturating_sub(1) {
        for i in 0..n0.saturating_sub(1) {
            let (Some(v0), Some(v1), Some(v2), Some(v3)) =
                (value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1))
            else {
                continue;
            };
            let s = [v0 >= 0.0, v1 >= 0.0, v2 >= 0.0, v3 >= 0.0];
            let edges = [EdgeKey::H(i, j), EdgeKey::V(i + 1, j), EdgeKey::H(i, j + 1), EdgeKey::V(i, j)];
            let crossed = [s[0] != s[1], s[1] != s[2], s[2] != s[3], s[3] != s[0]];
            let hits: Vec<EdgeKey> = (0..4).filter(|&k| crossed[k]).map(|k| edges[k]).collect();
            match hits.len() {
                2 => segments.push((hits[0], hits[1])),
                4 => {
                    // Saddle: the centre average decides which diagonal corners connect.
                    let centre = 0.25 * (v0 + v1 + v2 + v3) >= 0.0;
                    if centre == s[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    if segments.is_empty() {
        return Err(StruttError::EmptyResult(element));
    }

    let keys: Vec<EdgeKey> = segments.iter().flat_map(|&(a, b)| [a, b]).collect::<BTreeSet<_>>().into_iter().collect();
    let interval = grid.spec.interval;
    let f = |p: (f64, f64)| evaluate(p.0, p.1, interval, &cfg.integrator).ok().map(|u| element.of(&u));
    let vertices: BTreeMap<EdgeKey, ((f64, f64), f64)> = keys
        .par_iter()
        .map(|&k| {
            let (a, b) = k.ends();
            let (ca, cb) = (grid.cell(a.0, a.1), grid.cell(b.0, b.1));
            let fa = ca.element(element).unwrap_or(f64::NAN);
            let fb = cb.element(element).unwrap_or(f64::NAN);
            (k, refine_on_edge(f, (ca.beta0, ca.beta1), (cb.beta0, cb.beta1), fa, fb, cfg.curve_tol))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let mut adjacency: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (idx, &(a, b)) in segments.iter().enumerate() {
        adjacency.entry(a).or_default().push(idx);
        adjacency.entry(b).or_default().push(idx);
    }
    let mut used = vec![false; segments.len()];
    let mut chains: Vec<Vec<EdgeKey>> = vec![];
    let walk = |start: EdgeKey, used: &mut [bool]| -> Vec<EdgeKey> {
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(&idx) = adjacency[&cur].iter().find(|&&s| !used[s]) {
            used[idx] = true;
            let (a, b) = segments[idx];
            cur = if a == cur { b } else { a };
            chain.push(cur);
        }
        chain
    };
    let open_ends: Vec<EdgeKey> = adjacency.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    for k in open_ends {
        if adjacency[&k].iter().any(|&s| !used[s]) {
            chains.push(walk(k, &mut used));
        }
    }
    for idx in 0..segments.len() {
        if !used[idx] {
            chains.push(walk(segments[idx].0, &mut used));
        }
    }

    Ok(chains
        .into_iter()
        .map(|chain| {
            let refined = chain.iter().all(|k| vertices[k].1 <= cfg.curve_tol);
            ZeroCurve { element, polyline: chain.iter().map(|k| vertices[k].0).collect(), refined }
        })
        .collect())
}
