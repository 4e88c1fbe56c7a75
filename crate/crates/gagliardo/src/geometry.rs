//! Open-set domains: representation, Lebesgue measure, Schwarz symmetrization
//! of sets, membership, symmetric-difference measure, and ray-exit queries.
//!
//! A [`Domain`] is an open subset of R^n with finite positive measure
//! (except for the explicit empty sentinel). Analytic shapes answer every
//! query in closed form; [`Domain::GridMask`] falls back to marching.
//!
//! # JSON schema
//!
//! Domains serialize with an external `shape` tag:
//!
//! ```json
//! {"shape": "interval", "a": -1.0, "b": 1.0}
//! {"shape": "ball", "center": [0.0, 0.0], "radius": 1.0}
//! {"shape": "box", "lo": [0.0, 0.0], "hi": [2.0, 2.0]}
//! {"shape": "union", "parts": [ {...}, {...} ]}
//! {"shape": "grid_mask", "origin": [0.0], "cell": 0.5, "dims": [4], "cells": [false, true, true, false]}
//! {"shape": "empty", "n": 1}
//! ```

use crate::constants::alpha_n;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An open set in R^n.
///
/// Invariants (checked by [`Domain::validate`]):
/// all non-empty variants have finite, strictly positive measure;
/// union members are pairwise disjoint up to null sets;
/// grid masks contain at least one active cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    /// The empty-set sentinel: indicator identically zero, measure zero.
    /// Returned by [`Domain::symmetrize`] on measure-zero input.
    Empty { n: usize },
    /// Open interval (a, b) on the line.
    Interval { a: f64, b: f64 },
    /// Open ball of the given radius around `center`, any dimension.
    Ball { center: Vec<f64>, radius: f64 },
    /// Open axis-aligned box with corners `lo` and `hi`.
    #[serde(rename = "box")]
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    /// Union of pairwise-disjoint members.
    Union { parts: Vec<Domain> },
    /// Row-major boolean cell mask on a uniform grid with spacing `cell`.
    GridMask {
        origin: Vec<f64>,
        cell: f64,
        dims: Vec<usize>,
        cells: Vec<bool>,
    },
}

impl Domain {
    /// Convenience constructor for the 1-D interval.
    pub fn interval(a: f64, b: f64) -> Domain {
        Domain::Interval { a, b }
    }

    /// Convenience constructor for a ball.
    pub fn ball(center: &[f64], radius: f64) -> Domain {
        Domain::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Empty { n } => *n,
            Domain::Interval { .. } => 1,
            Domain::Ball { center, .. } => center.len(),
            Domain::Rect { lo, .. } => lo.len(),
            Domain::Union { parts } => parts.first().map_or(0, |p| p.dim()),
            Domain::GridMask { origin, .. } => origin.len(),
        }
    }

    /// Structural validation: dimensions consistent, measure finite and
    /// positive (empty sentinel excepted), union members pairwise disjoint.
    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Empty { n } => {
                if *n == 0 {
                    return Err(Error::InvalidInput("empty sentinel needs n >= 1".into()));
                }
            }
            Domain::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidInput(format!(
                        "interval needs finite a < b, got ({a}, {b})"
                    )));
                }
            }
            Domain::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("ball center must be finite".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
            }
            Domain::Rect { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::InvalidInput("box corners disagree in length".into()));
                }
                for (l, h) in lo.iter().zip(hi) {
                    if !(l.is_finite() && h.is_finite() && l < h) {
                        return Err(Error::InvalidInput(format!(
                            "box needs lo < hi per axis, got ({l}, {h})"
                        )));
                    }
                }
            }
            Domain::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidInput(
                        "union needs at least one member".into(),
                    ));
                }
                let n = parts[0].dim();
                for p in parts {
                    p.validate()?;
                    if p.dim() != n {
                        return Err(Error::InvalidInput(
                            "union members disagree in dimension".into(),
                        ));
                    }
                    if matches!(p, Domain::Empty { .. }) {
                        return Err(Error::InvalidInput(
                            "empty sentinel not allowed inside a union".into(),
                        ));
                    }
                }
                for i in 0..parts.len() {
                    for j in i + 1..parts.len() {
                        if !pairwise_disjoint(&parts[i], &parts[j])? {
                            return Err(Error::InvalidInput(format!(
                                "union members {i} and {j} overlap"
                            )));
                        }
                    }
                }
            }
            Domain::GridMask {
                origin,
                cell,
                dims,
                cells,
            } => {
                if origin.is_empty() || origin.len() != dims.len() {
                    return Err(Error::InvalidInput(
                        "grid mask origin and dims disagree in length".into(),
                    ));
                }
                if !(cell.is_finite() && *cell > 0.0) {
                    return Err(Error::InvalidInput(
                        "grid mask cell size must be > 0".into(),
                    ));
                }
                let count: usize = dims.iter().product();
                if count != cells.len() {
                    return Err(Error::InvalidInput(format!(
                        "grid mask cell count {} does not match dims product {count}",
                        cells.len()
                    )));
                }
                if !cells.iter().any(|&c| c) {
                    return Err(Error::InvalidInput(
                        "grid mask has measure zero; use the empty sentinel".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Lebesgue measure. Exact for analytic shapes; active-cell count times
    /// cell volume for grid masks.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Empty { .. } => 0.0,
            Domain::Interval { a, b } => b - a,
            Domain::Ball { center, radius } => {
                alpha_n(center.len()) * radius.powi(center.len() as i32)
            }
            Domain::Rect { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Domain::Union { parts } => {
                if self.dim() == 1 {
                    // Exact through merged intervals even if members touch.
                    self.merged_intervals_1d()
                        .map(|iv| iv.iter().map(|(a, b)| b - a).sum())
                        .unwrap_or_else(|_| parts.iter().map(|p| p.measure()).sum())
                } else {
                    // Members are pairwise disjoint, so measures add.
                    parts.iter().map(|p| p.measure()).sum()
                }
            }
            Domain::GridMask {
                cell, dims, cells, ..
            } => {
                let active = cells.iter().filter(|&&c| c).count() as f64;
                active * cell.powi(dims.len() as i32)
            }
        }
    }

    /// Schwarz symmetrization: the centered open ball with the same measure.
    /// Measure-zero input returns the empty sentinel.
    pub fn symmetrize(&self) -> Domain {
        let m = self.measure();
        let n = self.dim();
        if m <= 0.0 {
            return Domain::Empty { n };
        }
        Domain::Ball {
            center: vec![0.0; n],
            radius: (m / alpha_n(n)).powf(1.0 / n as f64),
        }
    }

    /// Radius of the symmetrized ball, `None` for measure zero.
    pub fn symmetrized_radius(&self) -> Option<f64> {
        match self.symmetrize() {
            Domain::Ball { radius, .. } => Some(radius),
            _ => None,
        }
    }

    /// Open-set membership; boundary points of analytic shapes return false.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point dimension {} does not match domain dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(match self {
            Domain::Empty { .. } => false,
            Domain::Interval { a, b } => *a < x[0] && x[0] < *b,
            Domain::Ball { center, radius } => dist2(x, center) < radius * radius,
            Domain::Rect { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(xi, (l, h))| l < xi && xi < h),
            Domain::Union { parts } => {
                let mut inside = false;
                for p in parts {
                    if p.contains(x)? {
                        inside = true;
                        break;
                    }
                }
                inside
            }
            Domain::GridMask {
                origin,
                cell,
                dims,
                cells,
            } => {
                let mut flat = 0usize;
                let mut ok = true;
                for (axis, xi) in x.iter().enumerate() {
                    let t = (xi - origin[axis]) / cell;
                    if t < 0.0 || t >= dims[axis] as f64 {
                        ok = false;
                        break;
                    }
                    flat = flat * dims[axis] + t as usize;
                }
                ok && cells[flat]
            }
        })
    }

    /// Axis-aligned bounding box; `None` for the empty sentinel.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Domain::Empty { .. } => None,
            Domain::Interval { a, b } => Some((vec![*a], vec![*b])),
            Domain::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            Domain::Rect { lo, hi } => Some((lo.clone(), hi.clone())),
            Domain::Union { parts } => {
                let mut boxes = parts.iter().filter_map(|p| p.bounding_box());
                let (mut lo, mut hi) = boxes.next()?;
                for (l, h) in boxes {
                    for i in 0..lo.len() {
                        lo[i] = lo[i].min(l[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
                Some((lo, hi))
            }
            Domain::GridMask {
                origin, cell, dims, ..
            } => Some((
                origin.clone(),
                origin
                    .iter()
                    .zip(dims)
                    .map(|(o, d)| o + cell * *d as f64)
                    .collect(),
            )),
        }
    }

    /// Measure of the symmetric difference between the domain and its
    /// symmetrized ball. Exact interval arithmetic in 1-D; exactly zero for
    /// centered balls; midpoint cell counting otherwise (resolution reported
    /// through [`Domain::sym_diff_detail`]).
    pub fn sym_diff_measure(&self) -> Result<f64> {
        Ok(self.sym_diff_detail()?.value)
    }

    /// As [`Domain::sym_diff_measure`], with the evaluation method attached.
    pub fn sym_diff_detail(&self) -> Result<SymDiffMeasure> {
        let m = self.measure();
        if m <= 0.0 {
            return Err(Error::OutOfDomain(
                "symmetric difference needs positive measure".into(),
            ));
        }
        let n = self.dim();
        let r = (m / alpha_n(n)).powf(1.0 / n as f64);
        if let Domain::Ball { center, .. } = self {
            if center.iter().all(|&c| c == 0.0) {
                return Ok(SymDiffMeasure {
                    value: 0.0,
                    resolution: None,
                });
            }
        }
        if n == 1 {
            // |A ^ B| = |A| + |B| - 2 |A n B| with |A| = |B| here.
            let inside = self.merged_intervals_1d()?;
            let overlap: f64 = inside
                .iter()
                .map(|&(a, b)| (b.min(r) - a.max(-r)).max(0.0))
                .sum();
            return Ok(SymDiffMeasure {
                value: 2.0 * (m - overlap),
                resolution: None,
            });
        }
        if n > 2 {
            return Err(Error::InvalidInput(
                "grid fallback for the symmetric difference is limited to n <= 2".into(),
            ));
        }
        // Count midpoints lying in exactly one of the two sets over the
        // union bounding box.
        let (blo, bhi) = self.bounding_box().expect("non-empty domain has a box");
        let lo: Vec<f64> = blo.iter().map(|l| l.min(-r)).collect();
        let hi: Vec<f64> = bhi.iter().map(|h| h.max(r)).collect();
        let per_axis = 600usize;
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let cell = extent / per_axis as f64;
        let nx = ((hi[0] - lo[0]) / cell).ceil() as usize;
        let ny = ((hi[1] - lo[1]) / cell).ceil() as usize;
        let mut count = 0u64;
        for ix in 0..nx {
            let x = lo[0] + (ix as f64 + 0.5) * cell;
            for iy in 0..ny {
                let y = lo[1] + (iy as f64 + 0.5) * cell;
                let in_d = self.contains(&[x, y])?;
                let in_b = x * x + y * y < r * r;
                if in_d != in_b {
                    count += 1;
                }
            }
        }
        Ok(SymDiffMeasure {
            value: count as f64 * cell * cell,
            resolution: Some(cell),
        })
    }

    /// Exit distance along the line through `x` with direction `omega`:
    /// the smallest |t| (both signs of t considered) such that `x + t omega`
    /// leaves the domain. Closed form for analytic shapes; marching with a
    /// bisection polish for grid masks.
    pub fn exit_distance(&self, x: &[f64], omega: &[f64]) -> Result<f64> {
        if !self.contains(x)? {
            return Err(Error::OutOfDomain(format!(
                "exit distance requires an interior point, got {x:?}"
            )));
        }
        let omega = unit_direction(omega)?;
        let intervals = self.line_inside_intervals(x, &omega)?;
        // The component of the inside set containing t = 0 is (t0, t1);
        // the nearest exit in either direction is min(t1, -t0).
        for &(t0, t1) in &intervals {
            if t0 <= 0.0 && 0.0 <= t1 {
                return Ok(t1.min(-t0));
            }
        }
        Err(Error::Numerical(
            "interior point not covered by its own ray intervals".into(),
        ))
    }

    /// Parameter intervals {t : x + t omega inside the domain} over the whole
    /// line, sorted and merged where they strictly overlap. Touching
    /// endpoints stay split so exit queries see the shared boundary point.
    pub fn line_inside_intervals(&self, x: &[f64], omega: &[f64]) -> Result<Vec<(f64, f64)>> {
        if x.len() != self.dim() || omega.len() != self.dim() {
            return Err(Error::InvalidInput(
                "ray query dimensions do not match the domain".into(),
            ));
        }
        let mut raw = Vec::new();
        self.collect_line_intervals(x, omega, &mut raw)?;
        raw.retain(|&(a, b)| b > a);
        raw.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(merged)
    }

    fn collect_line_intervals(
        &self,
        x: &[f64],
        omega: &[f64],
        out: &mut Vec<(f64, f64)>,
    ) -> Result<()> {
        match self {
            Domain::Empty { .. } => {}
            Domain::Interval { a, b } => {
                let w = omega[0];
                if w.abs() < 1e-300 {
                    return Err(Error::InvalidInput("zero direction".into()));
                }
                let (t0, t1) = ((a - x[0]) / w, (b - x[0]) / w);
                out.push((t0.min(t1), t0.max(t1)));
            }
            Domain::Ball { center, radius } => {
                // |x + t w - c|^2 < r^2 is a quadratic in t (|w| = 1).
                let mut beta = 0.0;
                let mut gamma = -radius * radius;
                for i in 0..center.len() {
                    let d = x[i] - center[i];
                    beta += omega[i] * d;
                    gamma += d * d;
                }
                let disc = beta * beta - gamma;
                if disc > 0.0 {
                    let s = disc.sqrt();
                    out.push((-beta - s, -beta + s));
                }
            }
            Domain::Rect { lo, hi } => {
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for i in 0..lo.len() {
                    if omega[i].abs() < 1e-15 {
                        if !(lo[i] < x[i] && x[i] < hi[i]) {
                            return Ok(());
                        }
                        continue;
                    }
                    let (a, b) = ((lo[i] - x[i]) / omega[i], (hi[i] - x[i]) / omega[i]);
                    t0 = t0.max(a.min(b));
                    t1 = t1.min(a.max(b));
                }
                if t1 > t0 && t0.is_finite() && t1.is_finite() {
                    out.push((t0, t1));
                }
            }
            Domain::Union { parts } => {
                for p in parts {
                    p.collect_line_intervals(x, omega, out)?;
                }
            }
            Domain::GridMask { cell, .. } => {
                let (lo, hi) = self.bounding_box().expect("mask has a box");
                // Range of t where the line meets the mask bounding box.
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for i in 0..lo.len() {
                    if omega[i].abs() < 1e-15 {
                        if x[i] < lo[i] || x[i] > hi[i] {
                            return Ok(());
                        }
                        continue;
                    }
                    let (a, b) = ((lo[i] - x[i]) / omega[i], (hi[i] - x[i]) / omega[i]);
                    t0 = t0.max(a.min(b));
                    t1 = t1.min(a.max(b));
                }
                if !(t1 > t0) {
                    return Ok(());
                }
                let step = cell / 8.0;
                let refine_tol = cell * 1e-6;
                let inside_at = |t: f64| self.contains(&offset_point(x, omega, t)).unwrap_or(false);
                let count = ((t1 - t0) / step).ceil() as usize + 1;
                let mut prev_t = t0 - step * 0.5;
                let mut prev_in = false;
                let mut open_start: Option<f64> = None;
                for k in 0..=count {
                    let t = (t0 + k as f64 * step).min(t1 + step * 0.5);
                    let now_in = inside_at(t);
                    if now_in != prev_in {
                        let edge = bisect_transition(&inside_at, prev_t, t, refine_tol);
                        if now_in {
                            open_start = Some(edge);
                        } else if let Some(s) = open_start.take() {
                            out.push((s, edge));
                        }
                    }
                    prev_t = t;
                    prev_in = now_in;
                }
                if let Some(s) = open_start {
                    out.push((s, t1));
                }
            }
        }
        Ok(())
    }

    /// Euclidean distance from `x` (any point) to the boundary of the domain.
    /// Exact for analytic shapes; a direction-sampled estimate for masks.
    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(
                "point dimension does not match the domain".into(),
            ));
        }
        Ok(match self {
            Domain::Empty { .. } => {
                return Err(Error::OutOfDomain("empty set has no boundary".into()))
            }
            Domain::Interval { a, b } => (x[0] - a).abs().min((x[0] - b).abs()),
            Domain::Ball { center, radius } => (dist2(x, center).sqrt() - radius).abs(),
            Domain::Rect { lo, hi } => {
                let mut outside2 = 0.0;
                let mut inside_margin = f64::INFINITY;
                for i in 0..lo.len() {
                    if x[i] < lo[i] {
                        outside2 += (lo[i] - x[i]) * (lo[i] - x[i]);
                    } else if x[i] > hi[i] {
                        outside2 += (x[i] - hi[i]) * (x[i] - hi[i]);
                    } else {
                        inside_margin = inside_margin.min((x[i] - lo[i]).min(hi[i] - x[i]));
                    }
                }
                if outside2 > 0.0 {
                    outside2.sqrt()
                } else {
                    inside_margin
                }
            }
            Domain::Union { parts } => {
                let mut best = f64::INFINITY;
                for p in parts {
                    best = best.min(p.boundary_distance(x)?);
                }
                best
            }
            Domain::GridMask { cell, .. } => {
                if !self.contains(x)? {
                    return Err(Error::OutOfDomain(
                        "mask boundary distance is only estimated from inside".into(),
                    ));
                }
                let n = self.dim();
                let mut best = f64::INFINITY;
                let dirs: Vec<Vec<f64>> = if n == 1 {
                    vec![vec![1.0], vec![-1.0]]
                } else {
                    (0..16)
                        .map(|k| {
                            let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 16.0;
                            vec![th.cos(), th.sin()]
                        })
                        .collect()
                };
                for d in dirs {
                    best = best.min(self.exit_distance(x, &d)?);
                }
                // Exit sampling can only overshoot the true distance; shave
                // half a marching step to stay on the safe side.
                (best - cell / 16.0).max(0.0)
            }
        })
    }

    /// Whether the closed ball around `center` with radius `r` lies inside
    /// the open domain. Exact for analytic shapes; sampled for masks.
    pub fn contains_ball(&self, center: &[f64], r: f64) -> Result<bool> {
        if center.len() != self.dim() {
            return Err(Error::InvalidInput(
                "ball center dimension does not match the domain".into(),
            ));
        }
        if r < 0.0 {
            return Err(Error::InvalidInput("ball radius must be >= 0".into()));
        }
        Ok(match self {
            Domain::Empty { .. } => false,
            Domain::Interval { a, b } => *a < center[0] - r && center[0] + r < *b,
            Domain::Ball {
                center: c,
                radius: rr,
            } => dist2(center, c).sqrt() + r < *rr,
            Domain::Rect { lo, hi } => center
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| l + r < *x && *x + r < *h),
            Domain::Union { parts } => {
                // Disjoint members: a connected ball lies in one member or none.
                let mut ok = false;
                for p in parts {
                    if p.contains_ball(center, r)? {
                        ok = true;
                        break;
                    }
                }
                ok
            }
            Domain::GridMask { cell, .. } => {
                self.contains(center)? && self.boundary_distance(center)? > r + cell * 1e-6
            }
        })
    }

    /// The first `count` interior points of a midpoint lattice over the
    /// bounding box, in row-major order, the lattice doubling until the
    /// domain yields enough of them. Deterministic in the domain alone.
    pub fn interior_lattice_points(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        if n == 0 || n > 2 {
            return Err(Error::InvalidInput(
                "interior lattices are implemented for n <= 2".into(),
            ));
        }
        if count == 0 {
            return Err(Error::InvalidInput("asked for zero interior points".into()));
        }
        let (blo, bhi) = self
            .bounding_box()
            .ok_or_else(|| Error::InvalidInput("domain has no bounding box".into()))?;
        let mut m = 8usize;
        loop {
            let coord = |axis: usize, i: usize| {
                blo[axis] + (i as f64 + 0.5) * (bhi[axis] - blo[axis]) / m as f64
            };
            let mut interior = Vec::with_capacity(count);
            let push = |x: Vec<f64>, interior: &mut Vec<Vec<f64>>| -> Result<bool> {
                if self.contains(&x)? && self.boundary_distance(&x)? > 1e-9 {
                    interior.push(x);
                }
                Ok(interior.len() == count)
            };
            'scan: {
                if n == 1 {
                    for i in 0..m {
                        if push(vec![coord(0, i)], &mut interior)? {
                            break 'scan;
                        }
                    }
                } else {
                    for i in 0..m {
                        for j in 0..m {
                            if push(vec![coord(0, i), coord(1, j)], &mut interior)? {
                                break 'scan;
                            }
                        }
                    }
                }
            }
            if interior.len() == count {
                return Ok(interior);
            }
            m *= 2;
            if m > 1 << 14 {
                return Err(Error::Numerical(format!(
                    "could not find {count} interior points; the domain is too \
                     thin for the lattice scan"
                )));
            }
        }
    }

    /// 1-D only: the domain as sorted, merged open intervals.
    pub fn merged_intervals_1d(&self) -> Result<Vec<(f64, f64)>> {
        if self.dim() != 1 {
            return Err(Error::InvalidInput(
                "interval decomposition requires n = 1".into(),
            ));
        }
        // The line through 0 with direction +1 parameterizes the whole axis.
        self.line_inside_intervals(&[0.0], &[1.0])
    }

    /// Radius if the domain is a ball centered at the origin (or, in 1-D, an
    /// origin-symmetric interval); `None` otherwise.
    pub fn centered_ball_radius(&self) -> Option<f64> {
        match self {
            Domain::Ball { center, radius } => {
                if center.iter().all(|&c| c.abs() <= 1e-12 * radius.max(1.0)) {
                    Some(*radius)
                } else {
                    None
                }
            }
            Domain::Interval { a, b } => {
                if (a + b).abs() <= 1e-12 * (b - a).max(1.0) {
                    Some((b - a) / 2.0)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Result of a symmetric-difference evaluation: the measure plus the grid
/// resolution when counting was used (`None` for exact routes).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymDiffMeasure {
    pub value: f64,
    pub resolution: Option<f64>,
}

fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn offset_point(x: &[f64], omega: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(omega).map(|(xi, wi)| xi + t * wi).collect()
}

fn unit_direction(omega: &[f64]) -> Result<Vec<f64>> {
    let norm2: f64 = omega.iter().map(|w| w * w).sum();
    if norm2 <= 0.0 {
        return Err(Error::InvalidInput("direction must be nonzero".into()));
    }
    if (norm2.sqrt() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "direction must be a unit vector, |omega| = {}",
            norm2.sqrt()
        )));
    }
    Ok(omega.iter().map(|w| w / norm2.sqrt()).collect())
}

/// Refine a detected inside/outside transition between `a` and `b` down to
/// the requested tolerance.
fn bisect_transition(inside_at: &dyn Fn(f64) -> bool, a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    let target = inside_at(b);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if inside_at(mid) == target {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Disjointness (up to null sets) test for the analytic shape pairs the
/// union validator needs. Touching closures are allowed.
fn pairwise_disjoint(a: &Domain, b: &Domain) -> Result<bool> {
    use Domain::*;
    match (a, b) {
        (Interval { a: a0, b: b0 }, Interval { a: a1, b: b1 }) => Ok(b0 <= a1 || b1 <= a0),
        (
            Ball {
                center: c0,
                radius: r0,
            },
            Ball {
                center: c1,
                radius: r1,
            },
        ) => Ok(dist2(c0, c1).sqrt() >= r0 + r1),
        (Rect { lo: l0, hi: h0 }, Rect { lo: l1, hi: h1 }) => Ok(l0
            .iter()
            .zip(h0.iter().zip(l1.iter().zip(h1)))
            .any(|(l0i, (h0i, (l1i, h1i)))| h0i <= l1i || h1i <= l0i)),
        (Ball { center, radius }, Rect { lo, hi }) | (Rect { lo, hi }, Ball { center, radius }) => {
            // Distance from the ball center to the closed box.
            let mut d2 = 0.0;
            for i in 0..center.len() {
                let c = center[i].clamp(lo[i], hi[i]);
                d2 += (center[i] - c) * (center[i] - c);
            }
            Ok(d2.sqrt() >= *radius)
        }
        (Union { parts }, other) | (other, Union { parts }) => {
            for p in parts {
                if !pairwise_disjoint(p, other)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Err(Error::InvalidInput(
            "cannot verify disjointness for this shape combination".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn measures_of_basic_shapes() {
        assert_eq!(Domain::interval(-1.0, 1.0).measure(), 2.0);
        let union = Domain::Union {
            parts: vec![Domain::interval(0.0, 2.0), Domain::interval(3.0, 4.0)],
        };
        assert_eq!(union.measure(), 3.0);
        let disk = Domain::ball(&[0.0, 0.0], 1.0);
        assert!(close(disk.measure(), std::f64::consts::PI, 1e-14));
    }

    #[test]
    fn symmetrize_matches_measure() {
        let union = Domain::Union {
            parts: vec![Domain::interval(0.0, 2.0), Domain::interval(3.0, 4.0)],
        };
        match union.symmetrize() {
            Domain::Ball { center, radius } => {
                assert_eq!(center, vec![0.0]);
                assert!(close(radius, 1.5, 1e-14));
            }
            other => panic!("expected a ball, got {other:?}"),
        }
        let far_ball = Domain::ball(&[5.0, 5.0], 1.0);
        assert!(close(far_ball.symmetrized_radius().unwrap(), 1.0, 1e-14));
        let square = Domain::Rect {
            lo: vec![0.0, 0.0],
            hi: vec![2.0, 2.0],
        };
        let want = 2.0 / std::f64::consts::PI.sqrt();
        assert!(close(square.symmetrized_radius().unwrap(), want, 1e-14));
    }

    #[test]
    fn symmetrize_preserves_measure_on_catalog() {
        let catalog = vec![
            Domain::interval(-1.0, 1.0),
            Domain::interval(0.3, 2.7),
            Domain::Union {
                parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(1.2, 1.8)],
            },
            Domain::ball(&[0.5, 0.0], 1.0),
            Domain::Rect {
                lo: vec![0.0, -1.0],
                hi: vec![3.0, 1.0],
            },
        ];
        for d in catalog {
            let m = d.measure();
            let ms = d.symmetrize().measure();
            assert!(close(ms, m, 1e-12), "measure drift for {d:?}: {ms} vs {m}");
        }
    }

    #[test]
    fn symmetrize_empty_measure_gives_sentinel() {
        let empty = Domain::Empty { n: 2 };
        assert_eq!(empty.symmetrize(), Domain::Empty { n: 2 });
        assert_eq!(empty.measure(), 0.0);
    }

    #[test]
    fn contains_is_open() {
        let iv = Domain::interval(-1.0, 1.0);
        assert!(iv.contains(&[0.0]).unwrap());
        assert!(!iv.contains(&[1.0]).unwrap());
        assert!(!iv.contains(&[-1.0]).unwrap());
        let disk = Domain::ball(&[0.0, 0.0], 1.0);
        assert!(!disk.contains(&[0.6, 0.9]).unwrap());
        assert!(disk.contains(&[0.6, 0.7]).unwrap());
        assert!(iv.contains(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn sym_diff_examples() {
        let ball = Domain::ball(&[0.0, 0.0], 1.0);
        assert_eq!(ball.sym_diff_measure().unwrap(), 0.0);

        // (0,2) symmetrizes to (-1,1); each side contributes measure 1.
        let shifted = Domain::interval(0.0, 2.0);
        assert!(close(shifted.sym_diff_measure().unwrap(), 2.0, 1e-12));

        // (-1,1) u (2,3): |Omega| = 3, ball (-1.5, 1.5); difference is
        // (2,3) plus (-1.5,-1] plus [1,1.5), total measure 2.
        let union = Domain::Union {
            parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(2.0, 3.0)],
        };
        assert!(close(union.sym_diff_measure().unwrap(), 2.0, 1e-12));
    }

    #[test]
    fn sym_diff_zero_only_for_centered_ball() {
        let centered = Domain::ball(&[0.0, 0.0], 0.8);
        assert_eq!(centered.sym_diff_measure().unwrap(), 0.0);
        let offset = Domain::ball(&[0.5, 0.0], 1.0);
        let detail = offset.sym_diff_detail().unwrap();
        assert!(
            detail.value > 0.5,
            "offset disk difference {}",
            detail.value
        );
        assert!(detail.resolution.is_some());
        let square = Domain::Rect {
            lo: vec![-1.0, -1.0],
            hi: vec![1.0, 1.0],
        };
        assert!(square.sym_diff_measure().unwrap() > 0.1);
    }

    #[test]
    fn exit_distance_interval() {
        let iv = Domain::interval(-1.0, 1.0);
        for &x in &[-0.9f64, -0.3, 0.0, 0.4, 0.99] {
            let want = (1.0 - x).min(x + 1.0);
            for om in [1.0, -1.0] {
                let got = iv.exit_distance(&[x], &[om]).unwrap();
                assert!(close(got, want, 1e-13), "x = {x}, omega = {om}: {got}");
            }
        }
        assert!(iv.exit_distance(&[1.5], &[1.0]).is_err());
    }

    #[test]
    fn exit_distance_ball() {
        let disk = Domain::ball(&[0.0, 0.0], 1.0);
        let d = disk.exit_distance(&[0.5, 0.0], &[1.0, 0.0]).unwrap();
        assert!(close(d, 0.5, 1e-13));
        for k in 0..8 {
            let th = std::f64::consts::PI * k as f64 / 4.0;
            let d = disk
                .exit_distance(&[0.0, 0.0], &[th.cos(), th.sin()])
                .unwrap();
            assert!(close(d, 1.0, 1e-13));
        }
    }

    #[test]
    fn exit_distance_sign_symmetric() {
        let union = Domain::Union {
            parts: vec![Domain::interval(-1.0, 0.2), Domain::interval(0.4, 1.0)],
        };
        for &x in &[-0.7, 0.0, 0.5, 0.9] {
            let plus = union.exit_distance(&[x], &[1.0]).unwrap();
            let minus = union.exit_distance(&[x], &[-1.0]).unwrap();
            assert!(close(plus, minus, 1e-13));
        }
        let disk = Domain::ball(&[0.3, -0.2], 0.9);
        let x = [0.5, 0.1];
        for k in 0..12 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
            let om = [th.cos(), th.sin()];
            let neg = [-om[0], -om[1]];
            let a = disk.exit_distance(&x, &om).unwrap();
            let b = disk.exit_distance(&x, &neg).unwrap();
            assert!(close(a, b, 1e-13));
        }
    }

    #[test]
    fn exit_distance_stops_at_union_gap() {
        let union = Domain::Union {
            parts: vec![Domain::interval(-1.0, 0.2), Domain::interval(0.4, 1.0)],
        };
        // From 0.1 the nearest exit is the gap edge at 0.2, not the far end.
        let d = union.exit_distance(&[0.1], &[1.0]).unwrap();
        assert!(close(d, 0.1, 1e-13));
    }

    #[test]
    fn exit_distance_dominates_boundary_distance() {
        let shapes = vec![
            Domain::interval(-1.0, 1.0),
            Domain::ball(&[0.2, 0.1], 0.9),
            Domain::Rect {
                lo: vec![-1.0, -0.5],
                hi: vec![1.0, 0.5],
            },
        ];
        for d in shapes {
            let x = match d.dim() {
                1 => vec![0.3],
                _ => vec![0.25, 0.1],
            };
            let bd = d.boundary_distance(&x).unwrap();
            let dirs: Vec<Vec<f64>> = if d.dim() == 1 {
                vec![vec![1.0], vec![-1.0]]
            } else {
                (0..16)
                    .map(|k| {
                        let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.3) / 16.0;
                        vec![th.cos(), th.sin()]
                    })
                    .collect()
            };
            for om in dirs {
                let e = d.exit_distance(&x, &om).unwrap();
                assert!(
                    e >= bd - 1e-12,
                    "exit {e} below boundary distance {bd} for {d:?}"
                );
            }
        }
    }

    #[test]
    fn grid_mask_queries() {
        // Two active cells covering (0.5, 1.5) on a 4-cell 1-D mask.
        let mask = Domain::GridMask {
            origin: vec![0.0],
            cell: 0.5,
            dims: vec![4],
            cells: vec![false, true, true, false],
        };
        mask.validate().unwrap();
        assert!(close(mask.measure(), 1.0, 1e-14));
        assert!(mask.contains(&[0.75]).unwrap());
        assert!(!mask.contains(&[0.25]).unwrap());
        let d = mask.exit_distance(&[0.75], &[1.0]).unwrap();
        // Nearest mask edge from 0.75 is at 0.5; marching tolerance 1e-6 cell.
        assert!((d - 0.25).abs() < 1e-5, "marched exit {d}");
        let r = mask.symmetrized_radius().unwrap();
        assert!(close(r, 0.5, 1e-14));
    }

    #[test]
    fn union_validation_rejects_overlap() {
        let bad = Domain::Union {
            parts: vec![Domain::interval(0.0, 1.0), Domain::interval(0.5, 2.0)],
        };
        assert!(bad.validate().is_err());
        let touching = Domain::Union {
            parts: vec![Domain::interval(0.0, 1.0), Domain::interval(1.0, 2.0)],
        };
        touching.validate().unwrap();
        let disks = Domain::Union {
            parts: vec![
                Domain::ball(&[0.0, 0.0], 1.0),
                Domain::ball(&[1.5, 0.0], 1.0),
            ],
        };
        assert!(disks.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let shapes = vec![
            Domain::interval(-1.0, 1.0),
            Domain::ball(&[0.5, 0.0], 1.0),
            Domain::Rect {
                lo: vec![0.0, 0.0],
                hi: vec![2.0, 2.0],
            },
            Domain::Union {
                parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(1.2, 1.8)],
            },
            Domain::Empty { n: 1 },
        ];
        for d in shapes {
            let text = serde_json::to_string(&d).unwrap();
            let back: Domain = serde_json::from_str(&text).unwrap();
            assert_eq!(d, back, "round trip through {text}");
        }
        let literal = r#"{"shape": "box", "lo": [0.0, 0.0], "hi": [2.0, 2.0]}"#;
        let parsed: Domain = serde_json::from_str(literal).unwrap();
        assert_eq!(parsed.dim(), 2);
    }

    #[test]
    fn contains_ball_checks() {
        let iv = Domain::interval(-1.0, 1.0);
        assert!(iv.contains_ball(&[0.5], 0.4).unwrap());
        assert!(!iv.contains_ball(&[0.8], 0.2).unwrap());
        let union = Domain::Union {
            parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(1.2, 1.8)],
        };
        assert!(union.contains_ball(&[1.5], 0.25).unwrap());
        assert!(!union.contains_ball(&[1.1], 0.2).unwrap());
    }

    #[test]
    fn interior_lattice_points_are_interior_and_deterministic() {
        let union = Domain::Union {
            parts: vec![Domain::interval(-1.0, 1.0), Domain::interval(1.2, 1.8)],
        };
        let pts = union.interior_lattice_points(50).unwrap();
        assert_eq!(pts.len(), 50);
        for x in &pts {
            assert!(union.contains(x).unwrap());
            assert!(union.boundary_distance(x).unwrap() > 0.0);
        }
        assert_eq!(pts, union.interior_lattice_points(50).unwrap());
        let disk = Domain::ball(&[0.4, -0.2], 1.0);
        let pts2 = disk.interior_lattice_points(50).unwrap();
        assert_eq!(pts2.len(), 50);
        for x in &pts2 {
            assert!(disk.contains(x).unwrap());
        }
    }
}
