//! Time scales and the rotations that bring every node into one Earth-centered
//! inertial (ECI) frame.
//!
//! All rotation matrices here are active right-handed rotations acting on
//! column vectors: `rot_z(90)` carries +x onto +y.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::constants::{EARTH_RADIUS_KM, J2000_JD, OBLIQUITY_DEG};
use crate::error::{CoreError, Result};
use crate::{Mat3, Vec3};

/// Absolute time as (fractional) days since J2000.0 (JD 2451545.0), UTC.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Epoch {
    days_since_j2000: f64,
}

impl Epoch {
    pub const J2000: Epoch = Epoch {
        days_since_j2000: 0.0,
    };

    pub fn from_days_since_j2000(days: f64) -> Result<Self> {
        if !days.is_finite() {
            return Err(CoreError::domain("epoch", format!("{days} is not finite")));
        }
        Ok(Epoch {
            days_since_j2000: days,
        })
    }

    pub fn days_since_j2000(&self) -> f64 {
        self.days_since_j2000
    }

    pub fn julian_date(&self) -> f64 {
        J2000_JD + self.days_since_j2000
    }

    pub fn plus_minutes(&self, minutes: f64) -> Epoch {
        Epoch {
            days_since_j2000: self.days_since_j2000 + minutes / 1440.0,
        }
    }

    pub fn from_datetime(dt: NaiveDateTime) -> Self {
        let date = dt.date();
        let jdn = julian_day_number(date.year() as i64, date.month() as i64, date.day() as i64);
        let seconds = dt.num_seconds_from_midnight() as f64 + dt.nanosecond() as f64 * 1e-9;
        // The Julian day starts at noon.
        let days = (jdn - J2000_JD as i64) as f64 + (seconds - 43_200.0) / 86_400.0;
        Epoch {
            days_since_j2000: days,
        }
    }

    /// Calendar date-time rounded to the nearest millisecond.
    pub fn to_datetime(&self) -> NaiveDateTime {
        let shifted = self.days_since_j2000 + 0.5;
        let whole = shifted.floor();
        let mut ms = ((shifted - whole) * 86_400_000.0).round() as i64;
        let mut jdn = J2000_JD as i64 + whole as i64;
        if ms >= 86_400_000 {
            ms -= 86_400_000;
            jdn += 1;
        }
        let (y, m, d) = calendar_from_jdn(jdn);
        NaiveDate::from_ymd_opt(y as i32, m as u32, d as u32)
            .and_then(|date| {
                date.and_hms_milli_opt(
                    (ms / 3_600_000) as u32,
                    (ms / 60_000 % 60) as u32,
                    (ms / 1000 % 60) as u32,
                    (ms % 1000) as u32,
                )
            })
            .expect("calendar conversion produced an invalid date")
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Z", self.to_datetime().format("%Y-%m-%dT%H:%M:%S%.3f"))
    }
}

impl FromStr for Epoch {
    type Err = CoreError;

    /// Accepts RFC 3339 (`2024-05-01T00:00:00Z`) or a naive `YYYY-MM-DDTHH:MM:SS`
    /// taken as UTC.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
            return Ok(Epoch::from_datetime(dt.naive_utc()));
        }
        NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
            .map(Epoch::from_datetime)
            .map_err(|e| CoreError::domain("epoch", format!("cannot parse {s:?}: {e}")))
    }
}

impl TryFrom<String> for Epoch {
    type Error = CoreError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Epoch> for String {
    fn from(e: Epoch) -> String {
        e.to_string()
    }
}

/// Fliegel-Van Flandern Julian day number of a Gregorian date.
pub fn julian_day_number(year: i64, month: i64, day: i64) -> i64 {
    let a = (month - 14) / 12;
    (1461 * (year + 4800 + a)) / 4 + (367 * (month - 2 - 12 * a)) / 12
        - (3 * ((year + 4900 + a) / 100)) / 4
        + day
        - 32075
}

/// Inverse of [`julian_day_number`].
pub fn calendar_from_jdn(jdn: i64) -> (i64, i64, i64) {
    let mut l = jdn + 68569;
    let n = 4 * l / 146_097;
    l -= (146_097 * n + 3) / 4;
    let i = 4000 * (l + 1) / 1_461_001;
    l = l - 1461 * i / 4 + 31;
    let j = 80 * l / 2447;
    let day = l - 2447 * j / 80;
    l = j / 11;
    let month = j + 2 - 12 * l;
    let year = 100 * (n - 49) + i + l;
    (year, month, day)
}

/// Greenwich mean sidereal time in hours, in `[0, 24)`.
pub fn gmst_hours(epoch: Epoch) -> f64 {
    wrap_hours(18.697374558 + 24.06570982441908 * epoch.days_since_j2000)
}

fn wrap_hours(h: f64) -> f64 {
    let r = h.rem_euclid(24.0);
    // rem_euclid can round up to exactly 24 for tiny negative inputs.
    if r >= 24.0 {
        0.0
    } else {
        r
    }
}

pub fn rot_x(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_z(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Point on or above a spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticSite {
    pub longitude_deg: f64,
    pub latitude_deg: f64,
    pub height_km: f64,
}

impl GeodeticSite {
    pub fn new(longitude_deg: f64, latitude_deg: f64, height_km: f64) -> Result<Self> {
        let site = GeodeticSite {
            longitude_deg,
            latitude_deg,
            height_km,
        };
        site.validate()?;
        Ok(site)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(CoreError::domain(
                "longitude",
                format!("{} outside [-180, 180]", self.longitude_deg),
            ));
        }
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(CoreError::domain(
                "latitude",
                format!("{} outside [-90, 90]", self.latitude_deg),
            ));
        }
        if !(self.height_km >= 0.0 && self.height_km.is_finite()) {
            return Err(CoreError::domain(
                "height",
                format!("{} must be finite and non-negative", self.height_km),
            ));
        }
        Ok(())
    }
}

/// Spherical-Earth ECEF position of a site.
pub fn ecef_from_geodetic(site: &GeodeticSite) -> Vec3 {
    spherical_to_cartesian(
        site.longitude_deg,
        site.latitude_deg,
        EARTH_RADIUS_KM + site.height_km,
    )
}

pub(crate) fn spherical_to_cartesian(lon_deg: f64, lat_deg: f64, radius: f64) -> Vec3 {
    let (sl, cl) = lon_deg.to_radians().sin_cos();
    let (sb, cb) = lat_deg.to_radians().sin_cos();
    Vec3::new(radius * cb * cl, radius * cb * sl, radius * sb)
}

/// Earth-fixed to inertial: rotate eastward by the sidereal angle.
pub fn ecef_to_eci_matrix(epoch: Epoch) -> Mat3 {
    rot_z(gmst_hours(epoch) * 15.0)
}

pub fn eci_from_ecef(v: &Vec3, epoch: Epoch) -> Vec3 {
    ecef_to_eci_matrix(epoch) * v
}

pub fn ecef_from_eci(v: &Vec3, epoch: Epoch) -> Vec3 {
    ecef_to_eci_matrix(epoch).transpose() * v
}

/// Eccentric anomaly `E` with `E - e sin E = M`, on the same 2π branch as `M`.
///
/// Newton iteration safeguarded by bisection on the bracket `[M - e, M + e]`
/// of the reduced anomaly.
pub fn solve_kepler(mean_anomaly: f64, eccentricity: f64) -> Result<f64> {
    let m = mean_anomaly;
    let e = eccentricity;
    if !(0.0..1.0).contains(&e) || !m.is_finite() {
        return Err(CoreError::domain(
            "Kepler problem",
            format!("M = {m}, e = {e} (need finite M and 0 <= e < 1)"),
        ));
    }
    if e == 0.0 {
        return Ok(m);
    }
    let two_pi = std::f64::consts::TAU;
    let turns = ((m + std::f64::consts::PI) / two_pi).floor();
    let mr = m - turns * two_pi;
    let f = |x: f64| x - e * x.sin() - mr;
    let (mut lo, mut hi) = (mr - e, mr + e);
    let mut x = mr + e * mr.sin() / (1.0 - e * mr.cos()).max(1e-3);
    x = x.clamp(lo, hi);
    for _ in 0..100 {
        let fx = f(x);
        if fx.abs() <= 1e-15 {
            break;
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = fx / (1.0 - e * x.cos());
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    let out = x + turns * two_pi;
    if (out - e * out.sin() - m).abs() > 1e-12 {
        return Err(CoreError::KeplerNonConvergence {
            mean_anomaly: m,
            eccentricity: e,
        });
    }
    Ok(out)
}

/// One element that drifts linearly in time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearAngle {
    pub at_epoch_deg: f64,
    pub rate_deg_per_day: f64,
}

impl LinearAngle {
    pub fn at(&self, epoch: Epoch) -> f64 {
        (self.at_epoch_deg + self.rate_deg_per_day * epoch.days_since_j2000).rem_euclid(360.0)
    }
}

/// Mean orbital elements of the Moon about the Earth, referred to the ecliptic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LunarElements {
    pub semi_major_axis_km: f64,
    pub eccentricity: f64,
    pub inclination_deg: f64,
    pub ascending_node: LinearAngle,
    pub argument_of_perigee: LinearAngle,
    pub mean_anomaly: LinearAngle,
}

impl Default for LunarElements {
    fn default() -> Self {
        LunarElements {
            semi_major_axis_km: 384_400.0,
            eccentricity: 0.0549,
            inclination_deg: 5.145,
            ascending_node: LinearAngle {
                at_epoch_deg: 125.045,
                rate_deg_per_day: -0.05295,
            },
            argument_of_perigee: LinearAngle {
                at_epoch_deg: 318.15,
                rate_deg_per_day: 0.1643,
            },
            mean_anomaly: LinearAngle {
                at_epoch_deg: 115.365,
                rate_deg_per_day: 13.0649,
            },
        }
    }
}

impl LunarElements {
    pub fn validate(&self) -> Result<()> {
        let angles = [self.ascending_node, self.argument_of_perigee, self.mean_anomaly];
        let finite = self.semi_major_axis_km.is_finite()
            && self.inclination_deg.is_finite()
            && angles
                .iter()
                .all(|a| a.at_epoch_deg.is_finite() && a.rate_deg_per_day.is_finite());
        if !finite || self.semi_major_axis_km <= 0.0 {
            return Err(CoreError::domain(
                "lunar elements",
                "values must be finite with a positive semi-major axis",
            ));
        }
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(CoreError::domain(
                "lunar elements",
                format!("eccentricity {} outside [0, 1)", self.eccentricity),
            ));
        }
        Ok(())
    }
}

/// Moon center in its orbital (perifocal) plane and in ECI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoonState {
    pub r_orb: Vec3,
    pub r_eci: Vec3,
    /// Perifocal-plane to ECI rotation.
    pub plane_to_eci: Mat3,
}

pub fn moon_center_eci(epoch: Epoch, elements: &LunarElements) -> Result<MoonState> {
    let a = elements.semi_major_axis_km;
    let e = elements.eccentricity;
    let m = elements.mean_anomaly.at(epoch).to_radians();
    let ecc = solve_kepler(m, e)?;
    let (s, c) = ecc.sin_cos();
    let r_orb = Vec3::new(a * (c - e), a * (1.0 - e * e).sqrt() * s, 0.0);
    let r1 = rot_z(elements.ascending_node.at(epoch))
        * rot_x(elements.inclination_deg)
        * rot_z(elements.argument_of_perigee.at(epoch));
    let plane_to_eci = rot_x(OBLIQUITY_DEG) * r1;
    Ok(MoonState {
        r_orb,
        r_eci: plane_to_eci * r_orb,
        plane_to_eci,
    })
}

/// The Moon-centered rotating frame at one instant: x along the Earth-to-Moon
/// direction, y along the orbital motion, z normal to the lunar orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LunarFrame {
    pub rotation: Mat3,
    pub moon_eci: Vec3,
}

impl LunarFrame {
    pub fn at(epoch: Epoch, elements: &LunarElements) -> Result<Self> {
        let moon = moon_center_eci(epoch, elements)?;
        let u = moon.r_orb.y.atan2(moon.r_orb.x).to_degrees();
        Ok(LunarFrame {
            rotation: moon.plane_to_eci * rot_z(u),
            moon_eci: moon.r_eci,
        })
    }

    pub fn to_eci(&self, v_lce: &Vec3) -> Vec3 {
        self.rotation * v_lce + self.moon_eci
    }

    pub fn to_lce(&self, v_eci: &Vec3) -> Vec3 {
        self.rotation.transpose() * (v_eci - self.moon_eci)
    }
}

pub fn eci_from_lce(v_lce: &Vec3, epoch: Epoch, elements: &LunarElements) -> Result<Vec3> {
    Ok(LunarFrame::at(epoch, elements)?.to_eci(v_lce))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn gmst_examples() {
        assert_eq!(gmst_hours(Epoch::J2000), 18.697374558);
        let d1 = gmst_hours(Epoch::from_days_since_j2000(1.0).unwrap());
        // 18.697374558 + 24.06570982441908 - 24
        assert!((d1 - 18.76308438241908).abs() < 1e-12, "{d1}");
        assert_eq!(wrap_hours(24.0), 0.0);
        assert_eq!(wrap_hours(48.0), 0.0);
        assert_eq!(wrap_hours(-1e-18), 0.0);
    }

    #[test]
    fn start_of_observation_window() {
        let e: Epoch = "2024-05-01T00:00:00Z".parse().unwrap();
        assert_eq!(e.days_since_j2000(), 8886.5);
        assert_eq!(e.julian_date(), 2_460_431.5);
        assert_eq!(e.to_string(), "2024-05-01T00:00:00.000Z");
        let naive: Epoch = "2024-05-01T00:00:00".parse().unwrap();
        assert_eq!(naive, e);
    }

    #[test]
    fn j2000_is_noon() {
        let e: Epoch = "2000-01-01T12:00:00Z".parse().unwrap();
        assert_eq!(e, Epoch::J2000);
    }

    #[test]
    fn calendar_round_trip_known_dates() {
        assert_eq!(julian_day_number(2000, 1, 1), 2_451_545);
        assert_eq!(julian_day_number(1970, 1, 1), 2_440_588);
        for jdn in [2_440_588, 2_451_545, 2_460_431, 2_415_021] {
            let (y, m, d) = calendar_from_jdn(jdn);
            assert_eq!(julian_day_number(y, m, d), jdn);
        }
    }

    #[test]
    fn geodetic_axes() {
        let r = EARTH_RADIUS_KM;
        let p = ecef_from_geodetic(&GeodeticSite::new(0.0, 0.0, 0.0).unwrap());
        assert!(close(&p, &Vec3::new(r, 0.0, 0.0), 1e-9));
        let p = ecef_from_geodetic(&GeodeticSite::new(90.0, 0.0, 0.0).unwrap());
        assert!(close(&p, &Vec3::new(0.0, r, 0.0), 1e-9));
        let p = ecef_from_geodetic(&GeodeticSite::new(37.0, 90.0, 100.0).unwrap());
        assert!(close(&p, &Vec3::new(0.0, 0.0, r + 100.0), 1e-9));
        assert!(GeodeticSite::new(181.0, 0.0, 0.0).is_err());
        assert!(GeodeticSite::new(0.0, -91.0, 0.0).is_err());
        assert!(GeodeticSite::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn ecef_to_eci_quarter_turn() {
        // Pick the epoch where GMST is 6 h.
        let d = (6.0 - 18.697374558 + 24.0) / 24.06570982441908;
        let e = Epoch::from_days_since_j2000(d).unwrap();
        assert!((gmst_hours(e) - 6.0).abs() < 1e-12);
        let v = eci_from_ecef(&Vec3::new(1.0, 0.0, 0.0), e);
        assert!(close(&v, &Vec3::new(0.0, 1.0, 0.0), 1e-12), "{v:?}");
    }

    #[test]
    fn ecef_to_eci_identity_at_zero_gmst() {
        let d = (24.0 - 18.697374558) / 24.06570982441908;
        let e = Epoch::from_days_since_j2000(d).unwrap();
        let g = gmst_hours(e);
        assert!(g < 1e-12 || g > 24.0 - 1e-12);
        let v = Vec3::new(3.0, -4.0, 5.0);
        assert!(close(&eci_from_ecef(&v, e), &v, 1e-9));
    }

    #[test]
    fn kepler_examples() {
        assert_eq!(solve_kepler(1.234, 0.0).unwrap(), 1.234);
        let e = solve_kepler(std::f64::consts::PI, 0.3).unwrap();
        assert!((e - std::f64::consts::PI).abs() < 1e-15);
        // Bisection oracle on [M - 1, M + 1].
        let (m, ecc) = (1.0, 0.0549);
        let (mut lo, mut hi) = (m - 1.0, m + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid - ecc * f64::sin(mid) - m > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let got = solve_kepler(m, ecc).unwrap();
        assert!((got - 0.5 * (lo + hi)).abs() < 1e-12);
        assert!(solve_kepler(1.0, 1.0).is_err());
    }

    #[test]
    fn kepler_keeps_branch() {
        let m = 7.0 * std::f64::consts::TAU + 0.4;
        let e = solve_kepler(m, 0.2).unwrap();
        assert!((e - m).abs() <= 0.2);
        assert!((e - 0.2 * e.sin() - m).abs() <= 1e-12);
    }

    #[test]
    fn moon_trivial_elements() {
        let elems = LunarElements {
            eccentricity: 0.0,
            inclination_deg: 0.0,
            ascending_node: LinearAngle {
                at_epoch_deg: 0.0,
                rate_deg_per_day: 0.0,
            },
            argument_of_perigee: LinearAngle {
                at_epoch_deg: 0.0,
                rate_deg_per_day: 0.0,
            },
            mean_anomaly: LinearAngle {
                at_epoch_deg: 0.0,
                rate_deg_per_day: 0.0,
            },
            ..LunarElements::default()
        };
        let s = moon_center_eci(Epoch::J2000, &elems).unwrap();
        assert!(close(&s.r_eci, &Vec3::new(384_400.0, 0.0, 0.0), 1e-9));
    }

    #[test]
    fn moon_distance_bounds() {
        let elems = LunarElements::default();
        for k in 0..400 {
            let e = Epoch::from_days_since_j2000(8000.0 + k as f64 * 0.37).unwrap();
            let r = moon_center_eci(e, &elems).unwrap().r_eci.norm();
            assert!((363_000.0..=406_000.0).contains(&r), "{r}");
            assert!(r >= 384_400.0 * (1.0 - 0.0549) - 1e-6);
            assert!(r <= 384_400.0 * (1.0 + 0.0549) + 1e-6);
        }
    }

    #[test]
    fn obliquity_tilts_the_orbit() {
        let elems = LunarElements::default();
        let e = Epoch::from_days_since_j2000(8886.5).unwrap();
        let s = moon_center_eci(e, &elems).unwrap();
        let ecliptic = rot_x(-OBLIQUITY_DEG) * s.r_eci;
        assert!((ecliptic.z - s.r_eci.z).abs() > 1.0);
    }

    #[test]
    fn lunar_frame_origin_and_sub_earth_point() {
        let elems = LunarElements {
            eccentricity: 0.0,
            ..LunarElements::default()
        };
        let e = Epoch::from_days_since_j2000(8886.5).unwrap();
        let frame = LunarFrame::at(e, &elems).unwrap();
        let moon = moon_center_eci(e, &elems).unwrap().r_eci;
        assert!(close(&eci_from_lce(&Vec3::zeros(), e, &elems).unwrap(), &moon, 1e-9));
        let limb = frame.to_eci(&Vec3::new(-crate::constants::MOON_RADIUS_KM, 0.0, 0.0));
        let expect = moon.norm() - crate::constants::MOON_RADIUS_KM;
        assert!((limb.norm() - expect).abs() < 1e-6, "{} vs {}", limb.norm(), expect);
        let v = Vec3::new(100.0, -2000.0, 300.0);
        assert!((((frame.to_eci(&v) - moon).norm()) - v.norm()).abs() < 1e-9);
        assert!(close(&frame.to_lce(&frame.to_eci(&v)), &v, 1e-8));
    }
}
