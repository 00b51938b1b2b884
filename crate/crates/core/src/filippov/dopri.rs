//! Dormand–Prince 5(4) with Hairer's continuous extension.

pub(crate) type Vec2 = [f64; 2];

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub(crate) const ORDER: f64 = 5.0;

/// Fourth-order interpolant over one accepted step.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Dense {
    pub t0: f64,
    pub h: f64,
    r: [Vec2; 5],
}

impl Dense {
    pub fn eval(&self, t: f64) -> Vec2 {
        let theta = if self.h > 0.0 { (t - self.t0) / self.h } else { 0.0 };
        let theta1 = 1.0 - theta;
        let r = &self.r;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        out
    }
}

pub(crate) struct Trial {
    pub y1: Vec2,
    pub k7: Vec2,
    /// RMS error scaled by the mixed tolerance; accept when `<= 1`.
    pub err: f64,
    pub dense: Dense,
}

#[inline]
fn axpy(y: &Vec2, terms: &[(f64, &Vec2)], h: f64) -> Vec2 {
    let mut out = *y;
    for i in 0..2 {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

pub(crate) fn attempt<F: FnMut(&Vec2) -> Vec2>(
    f: &mut F,
    t: f64,
    y: &Vec2,
    k1: &Vec2,
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Trial {
    let k2 = f(&axpy(y, &[(A21, k1)], h));
    let k3 = f(&axpy(y, &[(A31, k1), (A32, &k2)], h));
    let k4 = f(&axpy(y, &[(A41, k1), (A42, &k2), (A43, &k3)], h));
    let k5 = f(&axpy(y, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
    let k6 = f(&axpy(
        y,
        &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        h,
    ));
    let y1 = axpy(
        y,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        h,
    );
    let k7 = f(&y1);

    let mut sum = 0.0;
    for i in 0..2 {
        let e = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = abs_tol + rel_tol * y[i].abs().max(y1[i].abs());
        sum += (e / scale).powi(2);
    }
    let err = (sum / 2.0).sqrt();

    let mut r = [[0.0; 2]; 5];
    for i in 0..2 {
        let dy = y1[i] - y[i];
        let bspl = h * k1[i] - dy;
        r[0][i] = y[i];
        r[1][i] = dy;
        r[2][i] = bspl;
        r[3][i] = dy - h * k7[i] - bspl;
        r[4][i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Trial {
        y1,
        k7,
        err,
        dense: Dense { t0: t, h, r },
    }
}

/// Step-size multiplier from a scaled error norm.
pub(crate) fn step_factor(err: f64, accepted: bool) -> f64 {
    const SAFETY: f64 = 0.9;
    let raw = if err == 0.0 {
        10.0
    } else {
        SAFETY * err.powf(-1.0 / ORDER)
    };
    if accepted {
        raw.clamp(0.2, 10.0)
    } else {
        raw.clamp(0.1, 0.9)
    }
}

/// Hairer's starting step heuristic.
pub(crate) fn initial_step<F: FnMut(&Vec2) -> Vec2>(
    f: &mut F,
    y: &Vec2,
    f0: &Vec2,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
) -> f64 {
    let norm = |v: &Vec2| {
        let mut s = 0.0;
        for i in 0..2 {
            let sc = abs_tol + rel_tol * y[i].abs();
            s += (v[i] / sc).powi(2);
        }
        (s / 2.0).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(max_step);
    let y1 = [y[0] + h0 * f0[0], y[1] + h0 * f0[1]];
    let f1 = f(&y1);
    let d2 = norm(&[f1[0] - f0[0], f1[1] - f0[1]]) / h0;
    let dmax = d1.max(d2);
    let h1 = if dmax <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dmax).powf(1.0 / ORDER)
    };
    (100.0 * h0).min(h1).min(max_step)
}
