//! Adaptive one-dimensional quadrature.
//!
//! Gauss-Kronrod 7-15 on each panel with worst-panel bisection. Endpoints are
//! never evaluated (all Kronrod abscissae are interior), so integrable
//! endpoint singularities are tolerated as long as they have been softened
//! enough by a change of variables at the call site.

use crate::error::{PkError, Result};

// 15-point Kronrod abscissae (positive half) and weights, 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kron += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel {
        a,
        b,
        value,
        error,
    }
}

/// Integrate `f` over `[a, b]`, subdividing until the summed panel error
/// estimate drops below `max(abs_tol, rel_tol * |integral|)`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    const MAX_PANELS: usize = 4096;
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(PkError::Bounds(format!("bad interval [{a}, {b}]")));
    }
    let mut panels: Vec<Panel> = vec![kronrod_panel(&f, a, b)];
    let mut evaluations = 15usize;
    loop {
        let mut value = 0.0;
        let mut error = 0.0;
        let mut worst = 0usize;
        for (i, p) in panels.iter().enumerate() {
            value += p.value;
            error += p.error;
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if panels.len() >= MAX_PANELS {
            return Err(PkError::NumericalAccuracy(format!(
                "quadrature stalled at error {error:.3e} for target {:.3e} after {} panels",
                abs_tol.max(rel_tol * value.abs()),
                panels.len()
            )));
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(PkError::NumericalAccuracy(
                "quadrature panel no longer bisectable".into(),
            ));
        }
        panels.push(kronrod_panel(&f, p.a, mid));
        panels.push(kronrod_panel(&f, mid, p.b));
        evaluations += 30;
    }
}

/// Integrate `f` over `[0, infinity)`.
///
/// The range is split at 1 and both halves are pulled back to `(0, 1)`, the
/// head with `x = w^4` and the tail with `x = w^{-4}`. The quartic power
/// softens endpoint singularities up to `x^{-3/4}` at the origin and
/// algebraic tails heavier than `x^{-5/4}` at infinity.
pub fn adaptive_zero_to_inf<F: Fn(f64) -> f64>(
    f: F,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    let head = adaptive(
        |w: f64| {
            let w3 = w * w * w;
            f(w3 * w) * 4.0 * w3
        },
        0.0,
        1.0,
        0.5 * abs_tol,
        0.5 * rel_tol,
    )?;
    let tail = adaptive(
        |w: f64| {
            let w4 = w * w * w * w;
            f(1.0 / w4) * 4.0 / (w4 * w)
        },
        0.0,
        1.0,
        0.5 * abs_tol,
        0.5 * rel_tol,
    )?;
    Ok(Quadrature {
        value: head.value + tail.value,
        abs_error: head.abs_error + tail.abs_error,
        evaluations: head.evaluations + tail.evaluations,
    })
}
