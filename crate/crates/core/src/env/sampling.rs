//! Ball and informed-ellipse samplers. Neither restricts its output to the
//! free space; callers filter.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{EnvError, State, DIM};

/// Uniform point in the unit ball.
fn unit_ball<R: Rng + ?Sized>(rng: &mut R) -> [f64; DIM] {
    let mut v = [0.0; DIM];
    let mut norm2: f64 = 0.0;
    while norm2 == 0.0 {
        for c in v.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        norm2 = v.iter().map(|c| c * c).sum();
    }
    let u: f64 = rng.gen();
    let scale = u.powf(1.0 / DIM as f64) / norm2.sqrt();
    for c in v.iter_mut() {
        *c *= scale;
    }
    v
}

/// Uniform sample from the ball of radius `r` about `center`.
pub fn sample_sphere<R: Rng + ?Sized>(center: &State, r: f64, rng: &mut R) -> State {
    let b = unit_ball(rng);
    let mut out = center.0;
    for i in 0..DIM {
        out[i] += r * b[i];
    }
    State(out)
}

/// Uniform sample from the ellipse with foci `root` and `goal` whose
/// transverse diameter is `c_best`.
pub fn sample_rewire_ellipse<R: Rng + ?Sized>(
    root: &State,
    goal: &State,
    c_best: f64,
    rng: &mut R,
) -> Result<State, EnvError> {
    let c_min = root.dist(goal);
    if !c_best.is_finite() || c_best < c_min {
        return Err(EnvError::DegenerateEllipse { c_best, c_min });
    }
    let transverse = c_best / 2.0;
    let conjugate = (c_best * c_best - c_min * c_min).max(0.0).sqrt() / 2.0;

    // Householder reflection taking e1 onto the focal axis
    let mut axis = [0.0; DIM];
    if c_min > 0.0 {
        for i in 0..DIM {
            axis[i] = (goal.0[i] - root.0[i]) / c_min;
        }
    } else {
        axis[0] = 1.0;
    }
    let mut h = [0.0; DIM];
    h[0] = 1.0;
    for i in 0..DIM {
        h[i] -= axis[i];
    }
    let hh: f64 = h.iter().map(|c| c * c).sum();

    let ball = unit_ball(rng);
    let mut scaled = [0.0; DIM];
    scaled[0] = ball[0] * transverse;
    for i in 1..DIM {
        scaled[i] = ball[i] * conjugate;
    }
    let mut rotated = scaled;
    if hh > 1e-24 {
        let dot: f64 = (0..DIM).map(|i| h[i] * scaled[i]).sum();
        for i in 0..DIM {
            rotated[i] -= 2.0 * dot / hh * h[i];
        }
    }
    let mut out = [0.0; DIM];
    for i in 0..DIM {
        out[i] = (root.0[i] + goal.0[i]) / 2.0 + rotated[i];
    }
    Ok(State(out))
}
