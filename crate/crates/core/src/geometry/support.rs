//! Support function of a box cut by a single slab.

use crate::error::{Error, Result};
use crate::geometry::Interval;
use crate::numerics::norm1;

/// Feasible range of `g'a` over the unit box intersected with `bounds`.
pub(crate) fn slab_range(g: &[f64], bounds: Interval) -> Result<Interval> {
    let reach = norm1(g);
    let tol = 1e-12 * (1.0 + reach + bounds.lo.abs() + bounds.hi.abs());
    if bounds.lo > reach + tol || bounds.hi < -reach - tol {
        return Err(Error::EmptySet(format!(
            "slab [{}, {}] misses the box range [{}, {}]",
            bounds.lo, bounds.hi, -reach, reach
        )));
    }
    let lo = bounds.lo.max(-reach);
    let hi = bounds.hi.min(reach);
    Ok(if lo <= hi {
        Interval { lo, hi }
    } else {
        Interval::point(0.5 * (lo + hi))
    })
}

/// `max u'a` subject to `||a||_inf <= 1` and `lo <= g'a <= hi`.
///
/// Uses the one-dimensional Lagrangian dual
/// `min_l ||u - l g||_1 + max(l hi, l lo)`, which is convex and piecewise
/// linear with breakpoints at `0` and `u_i / g_i`.
pub fn box_slab_max(u: &[f64], g: &[f64], bounds: Interval) -> Result<f64> {
    debug_assert_eq!(u.len(), g.len());
    let range = slab_range(g, bounds)?;
    let dual = |l: f64| -> f64 {
        let spread: f64 = u.iter().zip(g).map(|(ui, gi)| (ui - l * gi).abs()).sum();
        spread + if l >= 0.0 { l * range.hi } else { l * range.lo }
    };
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut best = dual(0.0);
    for (ui, gi) in u.iter().zip(g) {
        if gi.abs() > 1e-14 * gmax {
            best = best.min(dual(ui / gi));
        }
    }
    Ok(best)
}

/// `[min u'a, max u'a]` over the same feasible set.
pub fn box_slab_range(u: &[f64], g: &[f64], bounds: Interval) -> Result<Interval> {
    let hi = box_slab_max(u, g, bounds)?;
    let neg: Vec<f64> = u.iter().map(|v| -v).collect();
    let lo = -box_slab_max(&neg, g, bounds)?;
    Ok(if lo <= hi {
        Interval { lo, hi }
    } else {
        Interval::point(0.5 * (lo + hi))
    })
}

/// `u'a` range without the slab (plain box support).
pub fn box_range(u: &[f64], offset: f64) -> Interval {
    Interval::centered(offset, norm1(u))
}
