//! Bounded scalar minimization (Brent's method: golden section with
//! parabolic interpolation).

use crate::error::{BracketSide, Error, Result};
#[allow(unused_imports)] // inherent f64 math shadows it whenever std is linked
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x_star: f64,
    pub g_star: f64,
    pub evaluations: usize,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

/// Minimizes `g` over `(lo, hi)`.
///
/// `g` is assumed unimodal on the bracket. A minimizer that ends up within
/// a few tolerances of either end means the objective was monotone on the
/// bracket; that is reported as [`Error::NoInteriorMinimum`] naming the side.
pub fn minimize_scalar<G: FnMut(f64) -> f64>(mut g: G, bracket: (f64, f64), tol: f64) -> Result<Minimum> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Config("minimize_scalar: need lo < hi and tol > 0".into()));
    }
    let xatol = tol;
    let sqrt_eps = f64::EPSILON.sqrt();
    let (mut a, mut b) = (lo, hi);
    let mut v = a + GOLDEN * (b - a);
    let mut w = v;
    let mut x = v;
    let mut fx = g(x);
    let mut fv = fx;
    let mut fw = fx;
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evaluations = 1;

    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + xatol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            // parabolic step through x, v, w
            let mut r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = g(u);
        evaluations += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let edge = 4.0 * (xatol + sqrt_eps * x.abs());
    if x - lo <= edge {
        return Err(Error::NoInteriorMinimum {
            side: BracketSide::Lower,
            x,
        });
    }
    if hi - x <= edge {
        return Err(Error::NoInteriorMinimum {
            side: BracketSide::Upper,
            x,
        });
    }
    Ok(Minimum {
        x_star: x,
        g_star: fx,
        evaluations,
    })
}
