//! Integrators for linear ODEs on the four entries of a 2×2 matrix.

use super::dop853_tableau::{A, B, C, E3, E5};

pub(crate) type State = [f64; 4];

const MAX_STEPS: usize = 2_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum OdeFailure<E> {
    /// Step size collapsed or the step budget ran out at time `t`.
    StepSize {
        t: f64,
        h: f64,
    },
    Rhs(E),
}

impl<E> From<E> for OdeFailure<E> {
    fn from(e: E) -> Self {
        OdeFailure::Rhs(e)
    }
}

#[inline]
fn axpy(y: &State, h: f64, k: &[State], coeffs: &[f64]) -> State {
    let mut out = *y;
    for (kj, &a) in k.iter().zip(coeffs) {
        if a != 0.0 {
            for i in 0..4 {
                out[i] += h * a * kj[i];
            }
        }
    }
    out
}

/// Adaptive DOP853 integration through an increasing list of stops.
///
/// The solution is forced to land exactly on every stop (so discontinuities
/// in the right-hand side must be listed there) and `on_stop` is called with
/// the state at each one. `stops[0]` is the initial time.
pub(crate) fn dop853<F, E>(
    rhs: F,
    stops: &[f64],
    y0: State,
    rtol: f64,
    atol: f64,
    mut on_stop: impl FnMut(usize, &State),
) -> Result<usize, OdeFailure<E>>
where
    F: Fn(f64, &State) -> Result<State, E>,
{
    let mut y = y0;
    on_stop(0, &y);
    if stops.len() < 2 {
        return Ok(0);
    }
    let mut h = initial_step(&rhs, stops[0], &y, stops[stops.len() - 1] - stops[0], rtol, atol)?;
    let mut steps = 0usize;

    for (idx, window) in stops.windows(2).enumerate() {
        let (mut t, t_end) = (window[0], window[1]);
        if t_end <= t {
            on_stop(idx + 1, &y);
            continue;
        }
        let inside = interior(t, t_end);
        let mut k0 = rhs(inside(t), &y)?;
        loop {
            let remaining = t_end - t;
            let ulps = 16.0 * f64::EPSILON * t_end.abs().max(1.0);
            if remaining <= ulps {
                // Rounding left a sliver; its contribution is below representable precision.
                break;
            }
            let last = h >= remaining * (1.0 - 1e-12) || remaining - h <= ulps;
            let step = if last { remaining } else { h };
            if step <= ulps || steps >= MAX_STEPS {
                return Err(OdeFailure::StepSize { t, h: step });
            }

            let mut k = [[0.0; 4]; 12];
            k[0] = k0;
            for s in 1..12 {
                let ys = axpy(&y, step, &k[..s], &A[s][..s]);
                k[s] = rhs(inside(t + C[s] * step), &ys)?;
            }
            let y_new = axpy(&y, step, &k, &B);

            let mut err5 = 0.0_f64;
            let mut err3 = 0.0_f64;
            for i in 0..4 {
                let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
                let mut e5 = 0.0;
                let mut e3 = 0.0;
                for s in 0..12 {
                    e5 += E5[s] * k[s][i];
                    e3 += E3[s] * k[s][i];
                }
                err5 = err5.max((e5 / scale).abs());
                err3 = err3.max((e3 / scale).abs());
            }
            let err = if err5 == 0.0 && err3 == 0.0 {
                0.0
            } else {
                step * err5 * err5 / (err5 * err5 + 0.01 * err3 * err3).sqrt()
            };
            steps += 1;

            if err <= 1.0 {
                t = if last { t_end } else { t + step };
                y = y_new;
                let factor =
                    if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR) };
                // A truncated final step says nothing about the natural step size.
                if !last || factor < 1.0 {
                    h = step * factor;
                }
                if last {
                    break;
                }
                k0 = rhs(inside(t), &y)?;
            } else {
                h = step * (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, 1.0);
            }
        }
        on_stop(idx + 1, &y);
    }
    Ok(steps)
}

fn initial_step<F, E>(rhs: &F, t0: f64, y0: &State, span: f64, rtol: f64, atol: f64) -> Result<f64, OdeFailure<E>>
where
    F: Fn(f64, &State) -> Result<State, E>,
{
    let f0 = rhs(t0, y0)?;
    let norm = |v: &State, y: &State| {
        v.iter().zip(y).map(|(a, b)| (a / (atol + rtol * b.abs())).powi(2)).sum::<f64>().sqrt() / 2.0
    };
    let d0 = norm(y0, y0);
    let d1 = norm(&f0, y0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.abs());
    let y1 = axpy(y0, h0, &[f0], &[1.0]);
    let f1 = rhs(t0 + h0, &y1)?;
    let mut diff = [0.0; 4];
    for i in 0..4 {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = norm(&diff, y0) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 8.0) };
    Ok((100.0 * h0).min(h1).min(span.abs()).max(1e-12))
}

/// Classical fixed-step RK4 through the stops; each stop-to-stop window is
/// split into equal steps no longer than `h_max`.
pub(crate) fn rk4<F, E>(
    rhs: F,
    stops: &[f64],
    y0: State,
    h_max: f64,
    mut on_stop: impl FnMut(usize, &State),
) -> Result<usize, OdeFailure<E>>
where
    F: Fn(f64, &State) -> Result<State, E>,
{
    let mut y = y0;
    let mut steps = 0;
    on_stop(0, &y);
    for (idx, w) in stops.windows(2).enumerate() {
        let n = substeps(w[1] - w[0], h_max);
        let h = (w[1] - w[0]) / n as f64;
        let inside = interior(w[0], w[1]);
        for j in 0..n {
            let t = w[0] + j as f64 * h;
            let k1 = rhs(inside(t), &y)?;
            let k2 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &[k1], &[1.0]))?;
            let k3 = rhs(t + 0.5 * h, &axpy(&y, 0.5 * h, &[k2], &[1.0]))?;
            let k4 = rhs(inside(t + h), &axpy(&y, h, &[k3], &[1.0]))?;
            y = axpy(&y, h, &[k1, k2, k3, k4], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
        }
        steps += n;
        on_stop(idx + 1, &y);
    }
    Ok(steps)
}

/// Clamp of stage times into the open window `(a, b)`. Stops sit on the
/// discontinuities of β, so an evaluation exactly at `b` would see the next
/// piece; the shift is far below the integration tolerance.
fn interior(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let delta = (1e-12 * a.abs().max(b.abs()).max(1.0)).min(0.25 * (b - a));
    move |t| t.clamp(a + delta, b - delta)
}

pub(crate) fn substeps(len: f64, h_max: f64) -> usize {
    if len <= 0.0 {
        0
    } else {
        ((len / h_max).ceil() as usize).max(1)
    }
}
