//! Physical constants and default scenario values. Distances in km, times in
//! minutes unless a name says otherwise.

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const MOON_RADIUS_KM: f64 = 1737.0;
/// Lunar gravitational parameter, km^3/s^2.
pub const GM_MOON_KM3_S2: f64 = 4903.0;
pub const SPEED_OF_LIGHT_KM_S: f64 = 3.0e5;
pub const GEO_ALTITUDE_KM: f64 = 35_786.0;

/// Earth-Moon mass parameter of the restricted three-body model.
pub const EARTH_MOON_MU: f64 = 0.012155;
/// Normalizing Earth-Moon distance of the restricted three-body model.
pub const EARTH_MOON_DISTANCE_KM: f64 = 384_400.0;

/// Obliquity of the ecliptic, rounded as used throughout the model.
pub const OBLIQUITY_DEG: f64 = 23.5;
pub const J2000_JD: f64 = 2_451_545.0;

pub const HALO_PERIOD_MIN: f64 = 21_284.0;
pub const HALO_AMPLITUDE_KM: f64 = 13_000.0;

/// Minimum perigee altitude above the lunar surface for a stable orbit.
pub const MIN_PERIGEE_ALTITUDE_KM: f64 = 100.0;

/// Age assigned to a source that cannot reach any ground station.
pub const UNREACHABLE_AOI: f64 = 2000.0;

/// Six ordinary-orbit semi-major axes of the reference experiment.
pub const PRESET_AXES_KM: [f64; 6] = [2650.0, 3210.0, 3525.0, 5596.0, 8882.0, 14100.0];
