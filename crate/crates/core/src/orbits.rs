//! The three orbit families: geostationary relays, ordinary (Keplerian) lunar
//! orbits and Earth-Moon libration-point halo orbits. Lunar orbits are
//! expressed in the Moon-centered rotating frame of [`crate::frames::LunarFrame`].

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::constants::{
    EARTH_MOON_DISTANCE_KM, EARTH_MOON_MU, EARTH_RADIUS_KM, GEO_ALTITUDE_KM, GM_MOON_KM3_S2,
    MIN_PERIGEE_ALTITUDE_KM, MOON_RADIUS_KM,
};
use crate::error::{CoreError, Result};
use crate::frames::{eci_from_ecef, rot_x, rot_z, solve_kepler, spherical_to_cartesian, Epoch};
use crate::{Mat3, Vec3};

/// A geostationary satellite parked over east longitude `longitude_deg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoSpec {
    pub longitude_deg: f64,
}

pub fn geo_position_ecef(geo: &GeoSpec) -> Vec3 {
    spherical_to_cartesian(geo.longitude_deg, 0.0, EARTH_RADIUS_KM + GEO_ALTITUDE_KM)
}

pub fn geo_position_eci(geo: &GeoSpec, epoch: Epoch) -> Vec3 {
    eci_from_ecef(&geo_position_ecef(geo), epoch)
}

/// Orbital period in minutes of a lunar orbit with semi-major axis `a_km`.
pub fn ordinary_period(a_km: f64) -> f64 {
    TAU * (a_km.powi(3) / GM_MOON_KM3_S2).sqrt() / 60.0
}

/// Semi-major axis in km of a lunar orbit with period `period_min`.
pub fn semi_major_axis_for_period(period_min: f64) -> f64 {
    let t = period_min * 60.0;
    (GM_MOON_KM3_S2 * t * t / (4.0 * PI * PI)).cbrt()
}

/// Classical elements of an ordinary lunar orbit; angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerElements {
    pub semi_major_axis_km: f64,
    pub eccentricity: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub arg_perigee_deg: f64,
    /// True anomaly at t = 0.
    pub true_anomaly_deg: f64,
}

impl KeplerElements {
    pub fn circular(a_km: f64, inclination_deg: f64, raan_deg: f64, true_anomaly_deg: f64) -> Self {
        KeplerElements {
            semi_major_axis_km: a_km,
            eccentricity: 0.0,
            inclination_deg,
            raan_deg,
            arg_perigee_deg: 0.0,
            true_anomaly_deg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(CoreError::domain(
                "eccentricity",
                format!("{} outside [0, 1)", self.eccentricity),
            ));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(CoreError::domain(
                "inclination",
                format!("{} outside [0, 180]", self.inclination_deg),
            ));
        }
        for (what, v) in [
            ("RAAN", self.raan_deg),
            ("argument of perigee", self.arg_perigee_deg),
            ("true anomaly", self.true_anomaly_deg),
        ] {
            if !(0.0..=360.0).contains(&v) {
                return Err(CoreError::domain(what, format!("{v} outside [0, 360]")));
            }
        }
        let perigee = self.semi_major_axis_km * (1.0 - self.eccentricity);
        if !(perigee - MOON_RADIUS_KM > MIN_PERIGEE_ALTITUDE_KM) {
            return Err(CoreError::domain(
                "semi-major axis",
                format!(
                    "perigee {perigee} km is not more than {MIN_PERIGEE_ALTITUDE_KM} km above the lunar surface"
                ),
            ));
        }
        Ok(())
    }

    pub fn propagator(&self) -> Result<KeplerOrbit> {
        self.validate()?;
        let e = self.eccentricity;
        let nu = self.true_anomaly_deg.to_radians();
        let ecc0 = 2.0 * ((1.0 - e).sqrt() * (nu / 2.0).sin()).atan2((1.0 + e).sqrt() * (nu / 2.0).cos());
        Ok(KeplerOrbit {
            rotation: rot_z(self.raan_deg) * rot_x(self.inclination_deg) * rot_z(self.arg_perigee_deg),
            mean_motion: TAU / ordinary_period(self.semi_major_axis_km),
            mean_anomaly0: ecc0 - e * ecc0.sin(),
            true_anomaly0: nu,
            a: self.semi_major_axis_km,
            e,
        })
    }
}

/// Prepared two-body propagator for one [`KeplerElements`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerOrbit {
    rotation: Mat3,
    /// Radians per minute.
    mean_motion: f64,
    mean_anomaly0: f64,
    true_anomaly0: f64,
    a: f64,
    e: f64,
}

impl KeplerOrbit {
    /// Perifocal-to-frame rotation.
    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn position(&self, t_min: f64) -> Result<Vec3> {
        if self.e == 0.0 {
            let (s, c) = (self.true_anomaly0 + self.mean_motion * t_min).sin_cos();
            return Ok(self.rotation * Vec3::new(self.a * c, self.a * s, 0.0));
        }
        let ecc = solve_kepler(self.mean_anomaly0 + self.mean_motion * t_min, self.e)?;
        let (s, c) = ecc.sin_cos();
        let b = self.a * (1.0 - self.e * self.e).sqrt();
        Ok(self.rotation * Vec3::new(self.a * (c - self.e), b * s, 0.0))
    }
}

pub fn kepler_position_lce(phi: &KeplerElements, t_min: f64) -> Result<Vec3> {
    phi.propagator()?.position(t_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LibrationPoint {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HaloFamily {
    North,
    South,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaloSpec {
    pub point: LibrationPoint,
    pub family: HaloFamily,
    pub amplitude_z_km: f64,
    pub period_min: f64,
    pub phase0_deg: f64,
}

/// Third-order expansion coefficients about one collinear point, in the
/// normalized units where the point's distance to the Moon is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaloCoefficients {
    /// Moon to libration point distance over the Earth-Moon distance.
    pub gamma: f64,
    pub c2: f64,
    pub lambda: f64,
    pub k: f64,
    pub a21: f64,
    pub a22: f64,
    pub a23: f64,
    pub a24: f64,
    pub a31: f64,
    pub a32: f64,
    pub b21: f64,
    pub b22: f64,
    pub b31: f64,
    pub b32: f64,
    pub d21: f64,
    pub d31: f64,
    pub d32: f64,
    pub l1: f64,
    pub l2: f64,
    pub delta: f64,
}

impl HaloCoefficients {
    pub fn new(point: LibrationPoint, mu: f64) -> Self {
        let g = collinear_gamma(point, mu);
        let c = |n: i32| -> f64 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            match point {
                LibrationPoint::L1 => {
                    (mu + sign * (1.0 - mu) * g.powi(n + 1) / (1.0 - g).powi(n + 1)) / g.powi(3)
                }
                LibrationPoint::L2 => {
                    (sign * mu + sign * (1.0 - mu) * g.powi(n + 1) / (1.0 + g).powi(n + 1))
                        / g.powi(3)
                }
            }
        };
        let (c2, c3, c4) = (c(2), c(3), c(4));
        let lam = ((2.0 - c2 + ((c2 - 2.0).powi(2) + 4.0 * (c2 - 1.0) * (1.0 + 2.0 * c2)).sqrt())
            / 2.0)
            .sqrt();
        let l2sq = lam * lam;
        let k = (l2sq + 1.0 + 2.0 * c2) / (2.0 * lam);
        let d1 = 3.0 * l2sq / k * (k * (6.0 * l2sq - 1.0) - 2.0 * lam);
        let d2 = 8.0 * l2sq / k * (k * (11.0 * l2sq - 1.0) - 2.0 * lam);
        let a21 = 3.0 * c3 * (k * k - 2.0) / (4.0 * (1.0 + 2.0 * c2));
        let a22 = 3.0 * c3 / (4.0 * (1.0 + 2.0 * c2));
        let a23 = -3.0 * c3 * lam / (4.0 * k * d1) * (3.0 * k.powi(3) * lam - 6.0 * k * (k - lam) + 4.0);
        let a24 = -3.0 * c3 * lam / (4.0 * k * d1) * (2.0 + 3.0 * k * lam);
        let b21 = -3.0 * c3 * lam / (2.0 * d1) * (3.0 * k * lam - 4.0);
        let b22 = 3.0 * c3 * lam / d1;
        let d21 = -c3 / (2.0 * l2sq);
        let p = 9.0 * l2sq + 1.0 - c2;
        let q = 9.0 * l2sq + 1.0 + 2.0 * c2;
        let a31 = -9.0 * lam / (4.0 * d2) * (4.0 * c3 * (k * a23 - b21) + k * c4 * (4.0 + k * k))
            + p / (2.0 * d2) * (3.0 * c3 * (2.0 * a23 - k * b21) + c4 * (2.0 + 3.0 * k * k));
        let a32 = -1.0 / d2
            * (9.0 * lam / 4.0 * (4.0 * c3 * (k * a24 - b22) + k * c4)
                + 1.5 * p * (c3 * (k * b22 + d21 - 2.0 * a24) - c4));
        let b31 = 3.0 / (8.0 * d2)
            * (8.0 * lam * (3.0 * c3 * (k * b21 - 2.0 * a23) - c4 * (2.0 + 3.0 * k * k))
                + q * (4.0 * c3 * (k * a23 - b21) + k * c4 * (4.0 + k * k)));
        let b32 = 1.0 / d2
            * (9.0 * lam * (c3 * (k * b22 + d21 - 2.0 * a24) - c4)
                + 3.0 / 8.0 * q * (4.0 * c3 * (k * a24 - b22) + k * c4));
        let d31 = 3.0 / (64.0 * l2sq) * (4.0 * c3 * a24 + c4);
        let d32 = 3.0 / (64.0 * l2sq) * (4.0 * c3 * (a23 - d21) + c4 * (4.0 + k * k));
        let den = 2.0 * lam * (lam * (1.0 + k * k) - 2.0 * k);
        let s1 = (1.5 * c3 * (2.0 * a21 * (k * k - 2.0) - a23 * (k * k + 2.0) - 2.0 * k * b21)
            - 3.0 / 8.0 * c4 * (3.0 * k.powi(4) - 8.0 * k * k + 8.0))
            / den;
        let s2 = (1.5 * c3 * (2.0 * a22 * (k * k - 2.0) + a24 * (k * k + 2.0) + 2.0 * k * b22 + 5.0 * d21)
            + 3.0 / 8.0 * c4 * (12.0 - k * k))
            / den;
        let l1 = -1.5 * c3 * (2.0 * a21 + a23 + 5.0 * d21) - 3.0 / 8.0 * c4 * (12.0 - k * k)
            + 2.0 * l2sq * s1;
        let l2 = 1.5 * c3 * (a24 - 2.0 * a22) + 9.0 / 8.0 * c4 + 2.0 * l2sq * s2;
        HaloCoefficients {
            gamma: g,
            c2,
            lambda: lam,
            k,
            a21,
            a22,
            a23,
            a24,
            a31,
            a32,
            b21,
            b22,
            b31,
            b32,
            d21,
            d31,
            d32,
            l1,
            l2,
            delta: l2sq - c2,
        }
    }

    /// In-plane amplitude that closes the orbit for a given out-of-plane one.
    pub fn ax_for(&self, az: f64) -> f64 {
        (-(self.delta + self.l2 * az * az) / self.l1).max(0.0).sqrt()
    }

    /// Normalized position at phase `tau` for amplitude `az`, before choosing
    /// the family sign of z.
    fn raw(&self, tau: f64, az: f64) -> [f64; 3] {
        let ax = self.ax_for(az);
        let (ax2, az2) = (ax * ax, az * az);
        let (c1, c2, c3) = (tau.cos(), (2.0 * tau).cos(), (3.0 * tau).cos());
        let (s1, s2, s3) = (tau.sin(), (2.0 * tau).sin(), (3.0 * tau).sin());
        let x = self.a21 * ax2 + self.a22 * az2 - ax * c1
            + (self.a23 * ax2 - self.a24 * az2) * c2
            + (self.a31 * ax2 * ax - self.a32 * ax * az2) * c3;
        let y = self.k * ax * s1
            + (self.b21 * ax2 - self.b22 * az2) * s2
            + (self.b31 * ax2 * ax - self.b32 * ax * az2) * s3;
        let z = az * c1 + self.d21 * ax * az * (c2 - 3.0) + (self.d32 * az * ax2 - self.d31 * az2 * az) * c3;
        [x, y, z]
    }
}

/// Distance from the Moon to a collinear point, in Earth-Moon units, from the
/// Euler quintic.
pub fn collinear_gamma(point: LibrationPoint, mu: f64) -> f64 {
    let f = |g: f64| match point {
        LibrationPoint::L1 => {
            g.powi(5) - (3.0 - mu) * g.powi(4) + (3.0 - 2.0 * mu) * g.powi(3) - mu * g * g
                + 2.0 * mu * g
                - mu
        }
        LibrationPoint::L2 => {
            g.powi(5) + (3.0 - mu) * g.powi(4) + (3.0 - 2.0 * mu) * g.powi(3) - mu * g * g
                - 2.0 * mu * g
                - mu
        }
    };
    let (mut lo, mut hi) = (1e-6, 0.9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f(hi) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

const CALIBRATION_GRID: usize = 3600;

/// A prepared halo orbit. The normalized out-of-plane amplitude is calibrated
/// so the largest |z| over one revolution equals the requested amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaloOrbit {
    spec: HaloSpec,
    coeffs: HaloCoefficients,
    az_norm: f64,
    z_sign: f64,
    /// Libration point offset from the Moon along x, km.
    x_offset_km: f64,
    scale_km: f64,
}

impl HaloOrbit {
    pub fn new(spec: HaloSpec) -> Result<Self> {
        if !(spec.amplitude_z_km > 0.0 && spec.amplitude_z_km.is_finite()) {
            return Err(CoreError::domain(
                "halo amplitude",
                format!("{} must be positive", spec.amplitude_z_km),
            ));
        }
        if !(spec.period_min > 0.0 && spec.period_min.is_finite()) {
            return Err(CoreError::domain(
                "halo period",
                format!("{} must be positive", spec.period_min),
            ));
        }
        let coeffs = HaloCoefficients::new(spec.point, EARTH_MOON_MU);
        let scale_km = coeffs.gamma * EARTH_MOON_DISTANCE_KM;
        let target = spec.amplitude_z_km / scale_km;
        let peak = |az: f64| -> (f64, f64) {
            let mut best = (0.0f64, 0.0f64);
            for j in 0..CALIBRATION_GRID {
                let z = coeffs.raw(TAU * j as f64 / CALIBRATION_GRID as f64, az)[2];
                if z.abs() > best.0 {
                    best = (z.abs(), z);
                }
            }
            best
        };
        let mut hi = 2.0 * target;
        while peak(hi).0 < target {
            hi *= 2.0;
            if hi > 1e3 {
                return Err(CoreError::domain(
                    "halo amplitude",
                    format!("{} km is out of range for the model", spec.amplitude_z_km),
                ));
            }
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if peak(mid).0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let az_norm = 0.5 * (lo + hi);
        let dominant = peak(az_norm).1.signum();
        let z_sign = match spec.family {
            HaloFamily::North => dominant,
            HaloFamily::South => -dominant,
        };
        let x_offset_km = match spec.point {
            LibrationPoint::L1 => -scale_km,
            LibrationPoint::L2 => scale_km,
        };
        Ok(HaloOrbit {
            spec,
            coeffs,
            az_norm,
            z_sign,
            x_offset_km,
            scale_km,
        })
    }

    pub fn spec(&self) -> &HaloSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &HaloCoefficients {
        &self.coeffs
    }

    pub fn position(&self, t_min: f64) -> Vec3 {
        let turns = (t_min / self.spec.period_min).rem_euclid(1.0);
        let tau = TAU * turns + self.spec.phase0_deg.to_radians();
        let [x, y, z] = self.coeffs.raw(tau, self.az_norm);
        Vec3::new(
            self.x_offset_km + self.scale_km * x,
            self.scale_km * y,
            self.z_sign * self.scale_km * z,
        )
    }
}

pub fn halo_position_lce(psi: &HaloSpec, t_min: f64) -> Result<Vec3> {
    Ok(HaloOrbit::new(*psi)?.position(t_min))
}

/// One admissible ordinary orbit: `Y` halo periods contain exactly `k`
/// ordinary periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleAxis {
    pub k: u32,
    pub y: u32,
    pub period_min: f64,
    pub semi_major_axis_km: f64,
}

impl AdmissibleAxis {
    pub fn from_ratio(halo_period_min: f64, k: u32, y: u32) -> Self {
        let period_min = y as f64 * halo_period_min / k as f64;
        AdmissibleAxis {
            k,
            y,
            period_min,
            semi_major_axis_km: semi_major_axis_for_period(period_min),
        }
    }
}

pub const MAX_PERIOD_RATIO: u32 = 400;

/// Enumerate `T_ord = Y * T_halo / k` for `1 <= Y <= y_max`, `1 <= k <= 400`,
/// keep axes inside `[a_min, a_max]` that clear the perigee floor, merge axes
/// closer than 1 km (keeping the smaller `Y`) and sort by axis.
pub fn admissible_semi_major_axes(
    halo_period_min: f64,
    y_max: u32,
    a_min_km: f64,
    a_max_km: f64,
) -> Result<Vec<AdmissibleAxis>> {
    if !(halo_period_min > 0.0 && halo_period_min.is_finite()) {
        return Err(CoreError::domain(
            "halo period",
            format!("{halo_period_min} must be positive"),
        ));
    }
    if y_max == 0 {
        return Err(CoreError::domain("Y", "upper bound must be at least 1"));
    }
    let mut out: Vec<AdmissibleAxis> = (1..=y_max)
        .flat_map(|y| (1..=MAX_PERIOD_RATIO).map(move |k| AdmissibleAxis::from_ratio(halo_period_min, k, y)))
        .filter(|ax| {
            let a = ax.semi_major_axis_km;
            a >= a_min_km && a <= a_max_km && a - MOON_RADIUS_KM > MIN_PERIGEE_ALTITUDE_KM
        })
        .collect();
    out.sort_by(|p, q| {
        p.semi_major_axis_km
            .total_cmp(&q.semi_major_axis_km)
            .then(p.y.cmp(&q.y))
    });
    let mut merged: Vec<AdmissibleAxis> = Vec::with_capacity(out.len());
    for ax in out {
        match merged.last_mut() {
            Some(last) if ax.semi_major_axis_km - last.semi_major_axis_km <= 1.0 => {
                if ax.y < last.y {
                    *last = ax;
                }
            }
            _ => merged.push(ax),
        }
    }
    Ok(merged)
}
