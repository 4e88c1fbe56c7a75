//! Distribution functions and symmetric decreasing rearrangement of
//! nonnegative grid functions.
//!
//! The rearrangement of a piecewise-constant function is computed exactly:
//! cell values are sorted in descending order and the k-th sorted value is
//! assigned to the radial shell whose cumulative volume window is
//! [(k-1) h^n, k h^n]. Because every cell carries the same volume h^n, the
//! level sets of the output are centered balls whose measures match the
//! input distribution function cell for cell. Equimeasurability is therefore
//! a multiset identity, not an approximation, and L^q norms are preserved
//! up to floating-point summation order only.
//!
//! The output stays in [`RadialProfile`] form. Resampling the profile onto a
//! Cartesian grid would introduce a second discretization error and destroy
//! the exact equimeasurability, so the energy quadrature consumes the radial
//! shells directly.

use crate::constants::alpha_n;
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Read as _, Write as _};
use std::path::Path;

/// A compactly supported nonnegative function sampled as piecewise constants
/// on a uniform grid.
///
/// Invariants: `values` are finite and nonnegative; every boundary-adjacent
/// cell of the bounding box is zero, so the support is strictly inside the
/// box and the function extends by zero to all of R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    /// Ambient dimension.
    pub n: usize,
    /// Lower corner of the bounding box.
    pub origin: Vec<f64>,
    /// Grid spacing, identical along every axis.
    pub h: f64,
    /// Cells per axis.
    pub shape: Vec<usize>,
    /// Row-major cell values.
    pub values: Vec<f64>,
}

impl GridFunction {
    /// Validating constructor.
    pub fn new(origin: Vec<f64>, h: f64, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let gf = GridFunction {
            n: origin.len(),
            origin,
            h,
            shape,
            values,
        };
        gf.validate()?;
        Ok(gf)
    }

    /// Sample `f` at cell midpoints. The sampled values must be nonnegative
    /// and must vanish on the boundary ring of the box.
    pub fn from_fn(
        origin: Vec<f64>,
        h: f64,
        shape: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self> {
        let count: usize = shape.iter().product();
        let n = origin.len();
        let mut values = vec![0.0; count];
        let mut idx = vec![0usize; n];
        for (flat, slot) in values.iter_mut().enumerate() {
            flat_to_multi(flat, &shape, &mut idx);
            let mid: Vec<f64> = idx
                .iter()
                .zip(&origin)
                .map(|(&i, o)| o + (i as f64 + 0.5) * h)
                .collect();
            let v = f(&mid);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "sampled value {v} at cell {idx:?} is not a finite nonnegative number"
                )));
            }
            *slot = v;
        }
        GridFunction::new(origin, h, shape, values)
    }

    /// Check all structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.origin.len() != self.n || self.shape.len() != self.n {
            return Err(Error::InvalidInput(
                "grid function dimensions are inconsistent".into(),
            ));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid spacing must be positive, got {}",
                self.h
            )));
        }
        if self.shape.iter().any(|&s| s < 3) {
            return Err(Error::InvalidInput(
                "each axis needs at least 3 cells (support plus zero ring)".into(),
            ));
        }
        let count: usize = self.shape.iter().product();
        if count != self.values.len() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match shape product {count}",
                self.values.len()
            )));
        }
        let mut idx = vec![0usize; self.n];
        for (flat, &v) in self.values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                flat_to_multi(flat, &self.shape, &mut idx);
                return Err(Error::InvalidInput(format!(
                    "value {v} at cell {idx:?} is not a finite nonnegative number"
                )));
            }
            if v > 0.0 {
                flat_to_multi(flat, &self.shape, &mut idx);
                if idx
                    .iter()
                    .zip(&self.shape)
                    .any(|(&i, &s)| i == 0 || i == s - 1)
                {
                    return Err(Error::InvalidInput(format!(
                        "boundary-adjacent cell {idx:?} carries nonzero value {v}; \
                         the support must stay strictly inside the bounding box"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Volume of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// Midpoint of the cell with the given flat index.
    pub fn midpoint(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.n];
        flat_to_multi(flat, &self.shape, &mut idx);
        idx.iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + (i as f64 + 0.5) * self.h)
            .collect()
    }

    /// Discrete L^q norm, cell-volume weighted. `q` must be >= 1 or
    /// `f64::INFINITY` (the max norm).
    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        lp_norm_weighted(
            self.values.iter().map(|&v| (v, 1usize)),
            self.cell_volume(),
            q,
        )
    }

    /// Translate the function by a whole number of cells per axis, keeping
    /// the bounding box fixed. Fails if the support would touch the ring.
    pub fn shift_within_grid(&self, offset: &[i64]) -> Result<GridFunction> {
        if offset.len() != self.n {
            return Err(Error::InvalidInput(
                "shift offset dimension mismatch".into(),
            ));
        }
        let mut values = vec![0.0; self.values.len()];
        let mut idx = vec![0usize; self.n];
        for (flat, &v) in self.values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            flat_to_multi(flat, &self.shape, &mut idx);
            let mut target = 0usize;
            for axis in 0..self.n {
                let moved = idx[axis] as i64 + offset[axis];
                if moved < 1 || moved >= self.shape[axis] as i64 - 1 {
                    return Err(Error::InvalidInput(format!(
                        "shift pushes support cell {idx:?} onto or past the boundary ring"
                    )));
                }
                target = target * self.shape[axis] + moved as usize;
            }
            values[target] = v;
        }
        GridFunction::new(self.origin.clone(), self.h, self.shape.clone(), values)
    }

    /// Write the self-describing CSV layout (see [`GridFunction::read_csv`]).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("gridfunction,1\n");
        out.push_str(&format!("n,{}\n", self.n));
        out.push_str(&format!("h,{}\n", self.h));
        out.push_str(&format!("origin,{}\n", join(&self.origin)));
        out.push_str(&format!(
            "shape,{}\n",
            self.shape
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        out.push_str(&format!("values,{}\n", self.values.len()));
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Read the CSV layout written by [`GridFunction::write_csv`]:
    /// a `gridfunction,1` tag line, then `n`, `h`, `origin`, `shape`,
    /// `values,<count>` header lines, then one value per line, row-major.
    pub fn read_csv(path: &Path) -> Result<GridFunction> {
        let file = std::fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((k, Ok(line))) => Ok((k + 1, line)),
                Some((k, Err(e))) => Err(Error::Parse(format!("line {}: {e}", k + 1))),
                None => Err(Error::Parse(format!(
                    "unexpected end of file, wanted {what}"
                ))),
            }
        };
        let (k, tag) = next("format tag")?;
        if tag.trim() != "gridfunction,1" {
            return Err(Error::Parse(format!(
                "line {k}: unknown format tag {tag:?}"
            )));
        }
        let n: usize = parse_field(next("n")?, "n")?;
        let h: f64 = parse_field(next("h")?, "h")?;
        let origin = parse_list::<f64>(next("origin")?, "origin")?;
        let shape = parse_list::<usize>(next("shape")?, "shape")?;
        let count: usize = parse_field(next("values")?, "values")?;
        if origin.len() != n || shape.len() != n {
            return Err(Error::Parse(format!(
                "origin/shape lengths do not match n = {n}"
            )));
        }
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let (k, line) = next("value")?;
            let v: f64 = line
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {k}: bad value {line:?}: {e}")))?;
            values.push(v);
        }
        GridFunction::new(origin, h, shape, values)
    }

    /// Write the binary layout: magic `GGFB`, then version (u32), n (u32),
    /// h (f64), origin (n f64), shape (n u64), values (f64 each),
    /// every multi-byte field little-endian.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(32 + 8 * self.values.len());
        buf.extend_from_slice(b"GGFB");
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&(self.n as u32).to_le_bytes());
        buf.extend_from_slice(&self.h.to_le_bytes());
        for o in &self.origin {
            buf.extend_from_slice(&o.to_le_bytes());
        }
        for s in &self.shape {
            buf.extend_from_slice(&(*s as u64).to_le_bytes());
        }
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut file = std::fs::File::create(path)?;
        file.write_all(&buf)?;
        Ok(())
    }

    /// Read the binary layout written by [`GridFunction::write_binary`].
    pub fn read_binary(path: &Path) -> Result<GridFunction> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        let mut cur = 0usize;
        let take = |cur: &mut usize, len: usize| -> Result<&[u8]> {
            if *cur + len > buf.len() {
                return Err(Error::Parse(format!(
                    "binary layout truncated at byte {cur}"
                )));
            }
            let s = &buf[*cur..*cur + len];
            *cur += len;
            Ok(s)
        };
        if take(&mut cur, 4)? != b"GGFB" {
            return Err(Error::Parse("missing GGFB magic".into()));
        }
        let version = u32::from_le_bytes(take(&mut cur, 4)?.try_into().unwrap());
        if version != 1 {
            return Err(Error::Parse(format!(
                "unsupported binary version {version}"
            )));
        }
        let n = u32::from_le_bytes(take(&mut cur, 4)?.try_into().unwrap()) as usize;
        let h = f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
        let mut origin = Vec::with_capacity(n);
        for _ in 0..n {
            origin.push(f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap()));
        }
        let mut shape = Vec::with_capacity(n);
        for _ in 0..n {
            shape.push(u64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap()) as usize);
        }
        let count: usize = shape.iter().product();
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap()));
        }
        if cur != buf.len() {
            return Err(Error::Parse(format!(
                "{} trailing bytes after values",
                buf.len() - cur
            )));
        }
        GridFunction::new(origin, h, shape, values)
    }
}

/// The symmetric decreasing rearrangement of a grid function: a radial,
/// non-increasing function of |x| described by strictly decreasing levels
/// and the number of h^n-volume cells each level occupies.
///
/// Breakpoint radii are derived, not stored: the shell holding the first
/// `c` cells ends at radius (c h^n / alpha_n)^{1/n}.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    /// Ambient dimension.
    pub n: usize,
    /// Cell scale inherited from the source grid; one cell has volume h^n.
    pub h: f64,
    /// Strictly decreasing positive levels.
    pub levels: Vec<f64>,
    /// Cells occupied by each level.
    pub counts: Vec<usize>,
}

impl RadialProfile {
    /// Number of occupied cells (the support measure is this times h^n).
    pub fn total_cells(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Ascending shell radii r_0 = 0 < r_1 < ... < r_m (support radius last).
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.counts.len() + 1);
        out.push(0.0);
        let mut cum = 0usize;
        for &c in &self.counts {
            cum += c;
            out.push(self.radius_of_cells(cum));
        }
        out
    }

    /// Radius of the centered ball holding `cells` grid cells of volume h^n.
    pub fn radius_of_cells(&self, cells: usize) -> f64 {
        (cells as f64 * self.h.powi(self.n as i32) / alpha_n(self.n)).powf(1.0 / self.n as f64)
    }

    /// Radius of the support (0 for the zero function).
    pub fn support_radius(&self) -> f64 {
        self.radius_of_cells(self.total_cells())
    }

    /// Value at radius `r` (0 beyond the support).
    pub fn value_at(&self, r: f64) -> f64 {
        let mut cum = 0usize;
        for (level, &c) in self.levels.iter().zip(&self.counts) {
            cum += c;
            if r < self.radius_of_cells(cum) {
                return *level;
            }
        }
        0.0
    }

    /// Measure of the super-level set {u* > t}; exact multiset count.
    pub fn distribution_measure(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::OutOfDomain(format!(
                "distribution function requires t > 0, got {t}"
            )));
        }
        let cells: usize = self
            .levels
            .iter()
            .zip(&self.counts)
            .filter(|(level, _)| **level > t)
            .map(|(_, &c)| c)
            .sum();
        Ok(cells as f64 * self.h.powi(self.n as i32))
    }

    /// Shell-volume weighted L^q norm; same multiset as the source grid, so
    /// norms are preserved exactly up to summation order.
    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        lp_norm_weighted(
            self.levels.iter().cloned().zip(self.counts.iter().cloned()),
            self.h.powi(self.n as i32),
            q,
        )
    }

    /// The occupied cells as a descending per-cell value list.
    pub fn expand_sorted(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total_cells());
        for (level, &c) in self.levels.iter().zip(&self.counts) {
            out.extend(std::iter::repeat(*level).take(c));
        }
        out
    }

    /// Write shells as CSV rows (inner radius, outer radius, level).
    pub fn write_csv(&self, path: &Path, header_comments: &[String]) -> Result<()> {
        let mut out = String::new();
        for line in header_comments {
            out.push_str(&format!("# {line}\n"));
        }
        out.push_str("shell,r_inner,r_outer,level,cells\n");
        let bp = self.breakpoints();
        for (j, (level, &c)) in self.levels.iter().zip(&self.counts).enumerate() {
            out.push_str(&format!("{j},{},{},{level},{c}\n", bp[j], bp[j + 1]));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Distribution function of a grid function at level `t > 0`: the measure
/// of {u > t}, exact as a cell count times cell volume.
pub fn distribution(u: &GridFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "distribution function requires t > 0, got {t}"
        )));
    }
    let cells = u.values.iter().filter(|&&v| v > t).count();
    Ok(cells as f64 * u.cell_volume())
}

/// Symmetric decreasing rearrangement.
///
/// Cell values sort descending (stable, so ties keep their original cell
/// order and merge into one level); the k-th sorted value occupies the
/// radial shell with cumulative volume window [(k-1) h^n, k h^n].
pub fn rearrange(u: &GridFunction) -> RadialProfile {
    let mut sorted: Vec<f64> = u.values.iter().copied().filter(|&v| v > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // Bounded input keeps the profile finite at the origin.
    debug_assert!(sorted.first().is_none_or(|v| v.is_finite()));
    let mut levels = Vec::new();
    let mut counts = Vec::new();
    for v in sorted {
        if levels.last() == Some(&v) {
            *counts.last_mut().expect("levels and counts stay in step") += 1;
        } else {
            levels.push(v);
            counts.push(1);
        }
    }
    RadialProfile {
        n: u.n,
        h: u.h,
        levels,
        counts,
    }
}

fn lp_norm_weighted(
    terms: impl Iterator<Item = (f64, usize)>,
    cell_volume: f64,
    q: f64,
) -> Result<f64> {
    if q.is_nan() || (q < 1.0 && q != f64::INFINITY) {
        return Err(Error::OutOfDomain(format!(
            "L^q norm requires q >= 1 or q = infinity, got {q}"
        )));
    }
    if q == f64::INFINITY {
        let mut max = 0.0f64;
        for (v, _) in terms {
            max = max.max(v);
        }
        return Ok(max);
    }
    let mut sum = 0.0;
    for (v, c) in terms {
        sum += v.powf(q) * c as f64 * cell_volume;
    }
    Ok(sum.powf(1.0 / q))
}

fn flat_to_multi(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for axis in (0..shape.len()).rev() {
        out[axis] = flat % shape[axis];
        flat /= shape[axis];
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_field<T: std::str::FromStr>(line: (usize, String), key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let (k, text) = line;
    let rest = text
        .strip_prefix(&format!("{key},"))
        .ok_or_else(|| Error::Parse(format!("line {k}: expected `{key},...`, got {text:?}")))?;
    rest.trim()
        .parse()
        .map_err(|e| Error::Parse(format!("line {k}: bad {key} value: {e}")))
}

fn parse_list<T: std::str::FromStr>(line: (usize, String), key: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let (k, text) = line;
    let rest = text
        .strip_prefix(&format!("{key},"))
        .ok_or_else(|| Error::Parse(format!("line {k}: expected `{key},...`, got {text:?}")))?;
    rest.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {k}: bad {key} entry {piece:?}: {e}")))
        })
        .collect()
}
