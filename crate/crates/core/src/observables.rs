//! Moments, the Robertson check, screen intensity and fringe estimators.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::state::QuantumState;

/// Tolerance on `Δx Δp - 1/2` below zero before a state is treated as broken.
pub const ROBERTSON_TOL: f64 = 1e-6;

/// Extrema whose swing is below this fraction of the window peak are noise.
const EXTREMUM_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyRecord {
    pub mean_x: f64,
    pub std_x: f64,
    pub mean_p: f64,
    pub std_p: f64,
    /// `std_x · std_p - 1/2`.
    pub robertson_gap: f64,
}

fn moments(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let var = values
        .iter()
        .zip(weights)
        .map(|(v, w)| (v - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    (mean, var.max(0.0).sqrt())
}

/// `(mean, std)` of the position marginal.
pub fn position_moments<S: QuantumState + ?Sized>(state: &S) -> (f64, f64) {
    moments(&state.grid().positions(), &state.position_density())
}

/// `(mean, std)` of the momentum marginal.
pub fn momentum_moments<S: QuantumState + ?Sized>(state: &S) -> (f64, f64) {
    moments(&state.grid().momenta(), &state.momentum_density())
}

/// Moments of both marginals together with the Robertson gap.
pub fn robertson_record<S: QuantumState + ?Sized>(state: &S) -> Result<UncertaintyRecord> {
    let (mean_x, std_x) = position_moments(state);
    let (mean_p, std_p) = momentum_moments(state);
    let rec = UncertaintyRecord {
        mean_x,
        std_x,
        mean_p,
        std_p,
        robertson_gap: std_x * std_p - 0.5,
    };
    if rec.robertson_gap < -ROBERTSON_TOL {
        return Err(Error::InvariantViolation(format!(
            "Δx Δp = {} is below 1/2",
            std_x * std_p
        )));
    }
    Ok(rec)
}

/// Screen intensity `ρ(x_j, x_j)`, normalized so that `Σ I dx = 1`.
pub fn intensity<S: QuantumState + ?Sized>(state: &S) -> Vec<f64> {
    state.position_density()
}

/// Indices covering the middle `fraction` of an `n`-sample pattern.
pub fn central_window(n: usize, fraction: f64) -> Range<usize> {
    let f = fraction.clamp(0.0, 1.0);
    let lo = (n as f64 * (0.5 - f / 2.0)) as usize;
    let hi = ((n as f64 * (0.5 + f / 2.0)) as usize).min(n);
    lo..hi
}

#[derive(Debug, Clone, Copy)]
struct Extremum {
    /// Sub-sample position relative to the window start.
    at: f64,
    value: f64,
}

fn refine(seg: &[f64], i: usize) -> Extremum {
    let (y0, y1, y2) = (seg[i - 1], seg[i], seg[i + 1]);
    let den = y0 - 2.0 * y1 + y2;
    if den == 0.0 {
        return Extremum {
            at: i as f64,
            value: y1,
        };
    }
    let off = (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5);
    Extremum {
        at: i as f64 + off,
        value: y1 - 0.25 * (y0 - y2) * off,
    }
}

/// Interior local maxima and minima, alternating, each differing from its
/// neighbour by more than `delta`.
fn extrema(seg: &[f64], delta: f64) -> (Vec<Extremum>, Vec<Extremum>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    if seg.len() < 3 {
        return (maxima, minima);
    }
    // Walk the samples remembering the best candidate of the current phase;
    // a candidate is confirmed once the signal retreats from it by delta.
    let (mut hi, mut lo) = (0usize, 0usize);
    let mut looking_for_max: Option<bool> = None;
    for i in 1..seg.len() {
        let v = seg[i];
        if v > seg[hi] {
            hi = i;
        }
        if v < seg[lo] {
            lo = i;
        }
        match looking_for_max {
            None => {
                if seg[hi] - v > delta {
                    if hi > 0 {
                        maxima.push(refine(seg, hi));
                    }
                    looking_for_max = Some(false);
                    lo = i;
                } else if v - seg[lo] > delta {
                    if lo > 0 {
                        minima.push(refine(seg, lo));
                    }
                    looking_for_max = Some(true);
                    hi = i;
                }
            }
            Some(true) => {
                if seg[hi] - v > delta {
                    if hi > 0 && hi + 1 < seg.len() {
                        maxima.push(refine(seg, hi));
                    }
                    looking_for_max = Some(false);
                    lo = i;
                }
            }
            Some(false) => {
                if v - seg[lo] > delta {
                    if lo > 0 && lo + 1 < seg.len() {
                        minima.push(refine(seg, lo));
                    }
                    looking_for_max = Some(true);
                    hi = i;
                }
            }
        }
    }
    (maxima, minima)
}

fn window_slice<'a>(i: &'a [f64], window: &Range<usize>) -> Result<&'a [f64]> {
    if window.end > i.len() || window.start >= window.end {
        return Err(Error::Estimation(format!(
            "window {window:?} does not fit a pattern of {} samples",
            i.len()
        )));
    }
    let seg = &i[window.clone()];
    if seg.len() < 3 {
        return Err(Error::Estimation(format!(
            "window of {} samples is too narrow",
            seg.len()
        )));
    }
    if seg.iter().any(|v| !v.is_finite()) {
        return Err(Error::Estimation("pattern contains non-finite values".into()));
    }
    Ok(seg)
}

fn envelope_at(maxima: &[Extremum], at: f64) -> Option<f64> {
    let right = maxima.iter().position(|m| m.at > at)?;
    if right == 0 {
        return None;
    }
    if maxima.len() < 3 {
        let (l, r) = (maxima[right - 1], maxima[right]);
        return Some(l.value + (r.value - l.value) * (at - l.at) / (r.at - l.at));
    }
    let mut near: Vec<&Extremum> = maxima.iter().collect();
    near.sort_by(|a, b| (a.at - at).abs().total_cmp(&(b.at - at).abs()));
    let p = &near[..3];
    let mut s = 0.0;
    for (j, pj) in p.iter().enumerate() {
        let mut l = pj.value;
        for (k, pk) in p.iter().enumerate() {
            if k != j {
                l *= (at - pk.at) / (pj.at - pk.at);
            }
        }
        s += l;
    }
    Some(s)
}

/// Fringe visibility `(I_max - I_min)/(I_max + I_min)` over `window`.
///
/// Every interior minimum is compared with the envelope of the neighbouring
/// maxima at the same position, which removes the bias from a sloping
/// single-slit envelope; the per-fringe values are averaged. A window without
/// fringes has visibility 0.
pub fn visibility(i: &[f64], window: Range<usize>) -> Result<f64> {
    let seg = window_slice(i, &window)?;
    let peak = seg.iter().cloned().fold(f64::MIN, f64::max);
    if peak <= 0.0 {
        return Ok(0.0);
    }
    let (maxima, minima) = extrema(seg, EXTREMUM_DELTA * peak);
    let vs: Vec<f64> = minima
        .iter()
        .filter_map(|m| {
            let env = envelope_at(&maxima, m.at)?;
            let lo = m.value.max(0.0);
            (env + lo > 0.0).then(|| ((env - lo) / (env + lo)).clamp(0.0, 1.0))
        })
        .collect();
    if vs.is_empty() {
        return Ok(0.0);
    }
    Ok(vs.iter().sum::<f64>() / vs.len() as f64)
}

/// Mean fringe period inside `window`, in length units.
///
/// Successive maxima and successive minima each give a mean spacing; the two
/// are averaged, which cancels the envelope pull on either set.
pub fn fringe_spacing(i: &[f64], grid: &Grid, window: Range<usize>) -> Result<f64> {
    let seg = window_slice(i, &window)?;
    let peak = seg.iter().cloned().fold(f64::MIN, f64::max);
    let (maxima, minima) = extrema(seg, EXTREMUM_DELTA * peak.max(0.0));
    if maxima.len() < 3 {
        return Err(Error::Estimation(format!(
            "found {} maxima, need at least 3",
            maxima.len()
        )));
    }
    let mean_gap = |e: &[Extremum]| (e[e.len() - 1].at - e[0].at) / (e.len() - 1) as f64;
    let mut spacing = mean_gap(&maxima);
    if minima.len() >= 2 {
        spacing = 0.5 * (spacing + mean_gap(&minima));
    }
    Ok(spacing * grid.dx())
}

/// Full width at half maximum of the highest peak.
pub fn central_lobe_width(i: &[f64], grid: &Grid) -> Result<f64> {
    if i.len() != grid.len() {
        return Err(Error::Estimation("pattern length differs from the grid".into()));
    }
    let (top, peak) = i
        .iter()
        .cloned()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Estimation("empty pattern".into()))?;
    if !(peak > 0.0) {
        return Err(Error::Estimation("pattern has no positive peak".into()));
    }
    let half = 0.5 * peak;
    let crossing = |range: &mut dyn Iterator<Item = usize>, step: isize| -> Result<f64> {
        for j in range {
            if i[j] < half {
                let k = (j as isize - step) as usize;
                let frac = (i[k] - half) / (i[k] - i[j]);
                return Ok(k as f64 + step as f64 * frac);
            }
        }
        Err(Error::Estimation("central lobe reaches the grid edge".into()))
    };
    let left = crossing(&mut (0..top).rev(), -1)?;
    let right = crossing(&mut (top + 1..i.len()), 1)?;
    Ok((right - left) * grid.dx())
}
