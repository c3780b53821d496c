//! Lunar observation points, visibility tests and coverage ratios.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationPoint {
    /// 1-based index in the generating lattice.
    pub index: usize,
    /// Moon-centered position, km.
    pub position: Vec3,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

/// Golden-ratio spiral lattice of `m` points on a sphere of `radius`.
pub fn fibonacci_points(m: usize, radius: f64) -> Vec<ObservationPoint> {
    (1..=m).map(|j| lattice_point(j, m, radius)).collect()
}

fn lattice_z(j: usize, m: usize) -> f64 {
    (2 * j - 1) as f64 / m as f64 - 1.0
}

fn lattice_point(j: usize, m: usize, radius: f64) -> ObservationPoint {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let zn = lattice_z(j, m);
    let rho = (1.0 - zn * zn).sqrt();
    let theta = std::f64::consts::TAU * j as f64 * phi;
    let (s, c) = theta.sin_cos();
    ObservationPoint {
        index: j,
        position: Vec3::new(radius * rho * c, radius * rho * s, radius * zn),
        latitude_deg: zn.asin().to_degrees(),
        longitude_deg: s.atan2(c).to_degrees(),
    }
}

/// Exactly `m` lattice points with latitude in `[lat_min, lat_max]`, taken from
/// the smallest lattice that places that many points in the band.
pub fn region_points(
    m: usize,
    lat_min_deg: f64,
    lat_max_deg: f64,
    radius: f64,
) -> Result<Vec<ObservationPoint>> {
    let n = region_lattice_size(m, lat_min_deg, lat_max_deg)?;
    Ok((1..=n)
        .map(|j| lattice_point(j, n, radius))
        .filter(|p| p.latitude_deg >= lat_min_deg && p.latitude_deg <= lat_max_deg)
        .collect())
}

/// Size of the smallest lattice with exactly `m` points in the band.
pub fn region_lattice_size(m: usize, lat_min_deg: f64, lat_max_deg: f64) -> Result<usize> {
    if !(lat_min_deg < lat_max_deg) || lat_min_deg < -90.0 || lat_max_deg > 90.0 {
        return Err(CoreError::domain(
            "latitude band",
            format!("[{lat_min_deg}, {lat_max_deg}] must be an increasing sub-range of [-90, 90]"),
        ));
    }
    if m == 0 {
        return Ok(0);
    }
    let in_band = |lat: f64| lat >= lat_min_deg && lat <= lat_max_deg;
    let limit = m.saturating_mul(100_000).max(1_000_000);
    for n in m..=limit {
        let count = (1..=n)
            .filter(|&j| in_band(lattice_z(j, n).asin().to_degrees()))
            .count();
        if count == m {
            return Ok(n);
        }
    }
    Err(CoreError::domain(
        "latitude band",
        format!("no lattice up to {limit} points puts exactly {m} in [{lat_min_deg}, {lat_max_deg}]"),
    ))
}

/// Elevation in degrees of direction `r_us` above the horizon plane whose
/// upward normal is `r_u`.
pub fn elevation_angle(r_u: &Vec3, r_us: &Vec3) -> Result<f64> {
    let n = r_u.norm() * r_us.norm();
    if !(n > 0.0) {
        return Err(CoreError::domain("elevation", "zero-length vector"));
    }
    Ok(90.0 - (r_u.dot(r_us) / n).clamp(-1.0, 1.0).acos().to_degrees())
}

/// True when `target` is strictly more than `theta_c_deg` above the horizon
/// of an observer at `observer` whose upward normal is `normal`.
#[inline]
pub(crate) fn above_mask(normal: &Vec3, observer: &Vec3, target: &Vec3, sin_theta_c: f64) -> bool {
    let d = target - observer;
    let dn = d.norm();
    dn > 0.0 && normal.dot(&d) > normal.norm() * dn * sin_theta_c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

/// Relative slack so that segments touching a sphere only at an endpoint on
/// its surface are not counted as blocked.
const SURFACE_TOLERANCE: f64 = 1e-6;

/// Whether the segment `p1`-`p2` clears every occluding sphere.
pub fn los_clear(p1: &Vec3, p2: &Vec3, occluders: &[Sphere]) -> bool {
    occluders.iter().all(|s| segment_clears(p1, p2, s))
}

#[inline]
pub(crate) fn segment_clears(p1: &Vec3, p2: &Vec3, s: &Sphere) -> bool {
    let d = p2 - p1;
    let dd = d.norm_squared();
    let w = s.center - p1;
    let t = if dd > 0.0 {
        (w.dot(&d) / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let closest = w - d * t;
    closest.norm() >= s.radius * (1.0 - SURFACE_TOLERANCE)
}

/// Whether a satellite at `sat` (Moon-centered) covers `point`.
pub fn covers(point: &ObservationPoint, sat: &Vec3, theta_c_deg: f64) -> bool {
    let sin_c = theta_c_deg.to_radians().sin();
    above_mask(&point.position, &point.position, sat, sin_c)
}

/// Per-point indicator: covered by at least one satellite.
pub fn coverage_indicators(points: &[ObservationPoint], sats: &[Vec3], theta_c_deg: f64) -> Vec<bool> {
    let sin_c = theta_c_deg.to_radians().sin();
    points
        .iter()
        .map(|p| sats.iter().any(|s| above_mask(&p.position, &p.position, s, sin_c)))
        .collect()
}

/// Fraction of `points` covered by at least one satellite.
pub fn instantaneous_cov(points: &[ObservationPoint], sats: &[Vec3], theta_c_deg: f64) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let hits = coverage_indicators(points, sats, theta_c_deg)
        .into_iter()
        .filter(|&z| z)
        .count();
    hits as f64 / points.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Mean of the instantaneous coverage over all samples.
    #[default]
    TimeAveraged,
    /// Fraction of points covered at every sample.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// `indicators[t][m]` is whether point `m` is covered at sample `t`.
    pub indicators: Vec<Vec<bool>>,
    pub instantaneous: Vec<f64>,
    pub aggregate: f64,
}

/// Aggregate coverage over several satellite snapshots (each a list of
/// Moon-centered satellite positions).
pub fn coverage_report(
    snapshots: &[Vec<Vec3>],
    points: &[ObservationPoint],
    theta_c_deg: f64,
    mode: CoverageMode,
) -> Result<CoverageReport> {
    if snapshots.is_empty() {
        return Err(CoreError::domain("coverage", "at least one snapshot is required"));
    }
    let indicators: Vec<Vec<bool>> = snapshots
        .iter()
        .map(|sats| coverage_indicators(points, sats, theta_c_deg))
        .collect();
    let m = points.len().max(1) as f64;
    let instantaneous: Vec<f64> = indicators
        .iter()
        .map(|z| z.iter().filter(|&&b| b).count() as f64 / m)
        .collect();
    let aggregate = match mode {
        CoverageMode::TimeAveraged => {
            let hits: usize = indicators.iter().map(|z| z.iter().filter(|&&b| b).count()).sum();
            hits as f64 / (m * indicators.len() as f64)
        }
        CoverageMode::Continuous => {
            let always = (0..points.len())
                .filter(|&j| indicators.iter().all(|z| z[j]))
                .count();
            always as f64 / m
        }
    };
    Ok(CoverageReport {
        indicators,
        instantaneous,
        aggregate,
    })
}

pub fn aggregate_cov(
    snapshots: &[Vec<Vec3>],
    points: &[ObservationPoint],
    theta_c_deg: f64,
    mode: CoverageMode,
) -> Result<f64> {
    Ok(coverage_report(snapshots, points, theta_c_deg, mode)?.aggregate)
}
