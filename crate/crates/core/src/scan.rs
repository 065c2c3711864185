//! Two-real-dimensional slices of the ball, classified point by point.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::koszul::{classify_point, SpectrumClassification};
use crate::numerics::{Tolerance, ZERO};
use crate::tuple::{BallPoint, CommutingPair};

pub const CSV_HEADER: &str = "re_z1,im_z1,re_z2,im_z2,lap0_min,lap1_min,lap2_min,s1,s2,s3";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceMode {
    /// `Im z1 = Im z2 = 0`; axes are `Re z1`, `Re z2`.
    ReRe,
    /// `z2` held fixed; axes are `Re z1`, `Im z1`.
    FixZ2,
    /// `z1` held fixed; axes are `Re z2`, `Im z2`.
    FixZ1,
}

impl FromStr for SliceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "re-re" => Ok(SliceMode::ReRe),
            "fix-z2" => Ok(SliceMode::FixZ2),
            "fix-z1" => Ok(SliceMode::FixZ1),
            other => Err(Error::Parse(format!("unknown slice mode {other:?} (expected re-re, fix-z2 or fix-z1)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSlice {
    pub mode: SliceMode,
    pub fixed_value: Complex64,
    pub resolution: usize,
    pub radius: f64,
}

impl ScanSlice {
    pub const DEFAULT_RADIUS: f64 = 0.999;

    pub fn new(mode: SliceMode, fixed_value: Complex64, resolution: usize, radius: f64) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Parse(format!("resolution must be at least 2, got {resolution}")));
        }
        if !(radius > 0.0 && radius < 1.0) {
            return Err(Error::Parse(format!("radius must lie in (0, 1), got {radius}")));
        }
        if !(fixed_value.re.is_finite() && fixed_value.im.is_finite()) {
            return Err(Error::NonFinite("fixed slice value"));
        }
        Ok(ScanSlice {
            mode,
            fixed_value,
            resolution,
            radius,
        })
    }

    pub fn re_re(resolution: usize) -> Result<Self> {
        Self::new(SliceMode::ReRe, ZERO, resolution, Self::DEFAULT_RADIUS)
    }

    /// In-ball grid points in lexicographic order (first axis outer).
    ///
    /// Axis value `i` is `radius·(2i − m)/m` with `m = resolution − 1`. The
    /// in-ball test runs on the integer offsets, so lattice points lying
    /// exactly on the circle are excluded regardless of rounding.
    pub fn points(&self) -> Vec<BallPoint> {
        let m = self.resolution as i64 - 1;
        let fixed = self.fixed_value.norm_sqr() / (self.radius * self.radius);
        let axis = |k: i64| self.radius * k as f64 / m as f64;
        let mut out = Vec::new();
        for i in 0..=m {
            for j in 0..=m {
                let (ki, kj) = (2 * i - m, 2 * j - m);
                let inside = match self.mode {
                    SliceMode::ReRe => ki * ki + kj * kj < m * m,
                    _ => fixed + ((ki * ki + kj * kj) as f64) / ((m * m) as f64) < 1.0,
                };
                if !inside {
                    continue;
                }
                let (u, v) = (axis(ki), axis(kj));
                let z = match self.mode {
                    SliceMode::ReRe => BallPoint::real(u, v),
                    SliceMode::FixZ2 => BallPoint::new(Complex64::new(u, v), self.fixed_value),
                    SliceMode::FixZ1 => BallPoint::new(self.fixed_value, Complex64::new(u, v)),
                };
                out.push(z);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRecord {
    pub re_z1: f64,
    pub im_z1: f64,
    pub re_z2: f64,
    pub im_z2: f64,
    pub lap0_min: f64,
    pub lap1_min: f64,
    pub lap2_min: f64,
    pub in_sigma1: bool,
    pub in_sigma2: bool,
    pub in_sigma3: bool,
}

impl From<SpectrumClassification> for ScanRecord {
    fn from(c: SpectrumClassification) -> Self {
        ScanRecord {
            re_z1: c.point.z1.re,
            im_z1: c.point.z1.im,
            re_z2: c.point.z2.re,
            im_z2: c.point.z2.im,
            lap0_min: c.lap0_min,
            lap1_min: c.lap1_min,
            lap2_min: c.lap2_min,
            in_sigma1: c.in_sigma1,
            in_sigma2: c.in_sigma2,
            in_sigma3: c.in_sigma3,
        }
    }
}

/// Classifies every grid point in parallel; the output keeps grid order.
pub fn scan(pair: &CommutingPair, slice: &ScanSlice, tol: &Tolerance) -> Result<Vec<ScanRecord>> {
    slice
        .points()
        .par_iter()
        .map(|z| classify_point(pair, z, tol).map(ScanRecord::from))
        .collect()
}

pub fn to_csv(records: &[ScanRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let b = |f: bool| u8::from(f);
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e},{},{},{}",
            r.re_z1,
            r.im_z1,
            r.re_z2,
            r.im_z2,
            r.lap0_min,
            r.lap1_min,
            r.lap2_min,
            b(r.in_sigma1),
            b(r.in_sigma2),
            b(r.in_sigma3)
        )
        .expect("writing to a String cannot fail");
    }
    out
}
