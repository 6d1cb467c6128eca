//! Orbit propagation, Earth-rotation frames and visibility geometry.
//!
//! Satellites are propagated from mean elements with Keplerian motion plus the
//! secular J2 drift of the node, perigee and mean anomaly. Positions come out in
//! the inertial TEME frame and are rotated into ECEF by Greenwich mean sidereal
//! time. Line-of-sight and elevation tests use a spherical Earth; the WGS-84
//! ellipsoid is used only to place ground sites.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::time::EpochTime;

/// Earth gravitational parameter, km³/s².
pub const MU_EARTH: f64 = 398_600.441_8;
/// Equatorial radius, km.
pub const EARTH_RADIUS_KM: f64 = 6_378.137;
pub const J2: f64 = 1.082_626_68e-3;
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;
pub const WGS84_FLATTENING: f64 = 1.0 / 298.257_223_563;
/// Default atmospheric clearance added to the Earth radius for ISL occlusion.
pub const DEFAULT_GRAZING_MARGIN_KM: f64 = 80.0;
/// Mean-element sets older than this are rejected by [`propagate_tle`].
pub const MAX_ELEMENT_AGE_DAYS: f64 = 10.0;

const GMST_MIN_YEAR: i32 = 1990;
const GMST_MAX_YEAR: i32 = 2060;

macro_rules! cartesian {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Debug, Clone, Copy, PartialEq, Default)]
        pub struct $name {
            pub x: f64,
            pub y: f64,
            pub z: f64,
        }

        impl $name {
            pub const fn new(x: f64, y: f64, z: f64) -> Self {
                Self { x, y, z }
            }

            pub fn norm(&self) -> f64 {
                (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
            }

            pub fn distance_to(&self, other: &Self) -> f64 {
                let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
                (dx * dx + dy * dy + dz * dz).sqrt()
            }

            pub fn to_array(self) -> [f64; 3] {
                [self.x, self.y, self.z]
            }

            pub fn is_finite(&self) -> bool {
                self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
            }
        }
    };
}

cartesian!(EcefPosition, "Earth-centred Earth-fixed position, km.");
cartesian!(TemePosition, "True-equator mean-equinox inertial position, km.");

/// Geodetic coordinates on the WGS-84 ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodeticPosition {
    /// Degrees, [-90, 90].
    pub lat: f64,
    /// Degrees, [-180, 180).
    pub lon: f64,
    /// km above the ellipsoid.
    pub alt: f64,
}

impl GeodeticPosition {
    pub fn new(lat: f64, lon: f64, alt: f64) -> Self {
        Self {
            lat,
            lon: normalize_longitude(lon),
            alt,
        }
    }

    pub fn surface(lat: f64, lon: f64) -> Self {
        Self::new(lat, lon, 0.0)
    }

    pub fn to_ecef(&self) -> EcefPosition {
        let f = WGS84_FLATTENING;
        let e2 = f * (2.0 - f);
        let (lat, lon) = (self.lat.to_radians(), self.lon.to_radians());
        let n = EARTH_RADIUS_KM / (1.0 - e2 * lat.sin().powi(2)).sqrt();
        EcefPosition {
            x: (n + self.alt) * lat.cos() * lon.cos(),
            y: (n + self.alt) * lat.cos() * lon.sin(),
            z: (n * (1.0 - e2) + self.alt) * lat.sin(),
        }
    }

    pub fn from_ecef(p: &EcefPosition) -> Self {
        let f = WGS84_FLATTENING;
        let e2 = f * (2.0 - f);
        let rho = (p.x * p.x + p.y * p.y).sqrt();
        let lon = p.y.atan2(p.x);
        let mut lat = p.z.atan2(rho * (1.0 - e2));
        let mut alt = 0.0;
        for _ in 0..8 {
            let n = EARTH_RADIUS_KM / (1.0 - e2 * lat.sin().powi(2)).sqrt();
            alt = if lat.cos().abs() > 1e-9 {
                rho / lat.cos() - n
            } else {
                p.z.abs() - n * (1.0 - e2)
            };
            lat = p.z.atan2(rho * (1.0 - e2 * n / (n + alt)));
        }
        GeodeticPosition::new(lat.to_degrees(), lon.to_degrees(), alt)
    }
}

/// Wraps a longitude into [-180, 180).
pub fn normalize_longitude(lon: f64) -> f64 {
    (lon + 180.0).rem_euclid(360.0) - 180.0
}

/// Mean orbital elements at an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanElements {
    /// km.
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    /// Degrees.
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
    /// Revolutions per day.
    pub mean_motion: f64,
    /// Drag term, 1/Earth radii. Carried for completeness; not used in propagation.
    pub bstar: f64,
    pub epoch: EpochTime,
}

impl MeanElements {
    /// Circular orbit of radius `semi_major_axis`, with mean motion derived from it.
    pub fn circular(
        semi_major_axis: f64,
        inclination: f64,
        raan: f64,
        mean_anomaly: f64,
        epoch: EpochTime,
    ) -> Self {
        MeanElements {
            semi_major_axis,
            eccentricity: 0.0,
            inclination,
            raan,
            arg_perigee: 0.0,
            mean_anomaly,
            mean_motion: mean_motion_from_semi_major_axis(semi_major_axis),
            bstar: 0.0,
            epoch,
        }
    }

    /// Element set described by mean motion, as in a TLE.
    #[allow(clippy::too_many_arguments)]
    pub fn from_mean_motion(
        mean_motion: f64,
        eccentricity: f64,
        inclination: f64,
        raan: f64,
        arg_perigee: f64,
        mean_anomaly: f64,
        bstar: f64,
        epoch: EpochTime,
    ) -> Result<Self> {
        if !(mean_motion > 0.0 && mean_motion.is_finite()) {
            return Err(Error::Domain(format!("mean motion must be positive, got {mean_motion}")));
        }
        if !(0.0..1.0).contains(&eccentricity) {
            return Err(Error::Domain(format!("eccentricity {eccentricity} outside [0, 1)")));
        }
        Ok(MeanElements {
            semi_major_axis: semi_major_axis_from_mean_motion(mean_motion),
            eccentricity,
            inclination,
            raan,
            arg_perigee,
            mean_anomaly,
            mean_motion,
            bstar,
            epoch,
        })
    }

    pub fn mean_motion_rad_s(&self) -> f64 {
        self.mean_motion * TAU / 86_400.0
    }

    pub fn period_seconds(&self) -> f64 {
        TAU * (self.semi_major_axis.powi(3) / MU_EARTH).sqrt()
    }
}

/// Revolutions per day for a Keplerian orbit of the given semi-major axis.
pub fn mean_motion_from_semi_major_axis(a_km: f64) -> f64 {
    (MU_EARTH / a_km.powi(3)).sqrt() * 86_400.0 / TAU
}

pub fn semi_major_axis_from_mean_motion(rev_per_day: f64) -> f64 {
    let n = rev_per_day * TAU / 86_400.0;
    (MU_EARTH / (n * n)).cbrt()
}

/// Greenwich mean sidereal time (IAU 1982), radians in [0, 2π).
pub fn gmst(t: EpochTime) -> Result<f64> {
    let year = t.year();
    if !(GMST_MIN_YEAR..=GMST_MAX_YEAR).contains(&year) {
        return Err(Error::Domain(format!(
            "GMST evaluated for year {year}, outside {GMST_MIN_YEAR}-{GMST_MAX_YEAR}"
        )));
    }
    let centuries = t.days_since_j2000() / 36_525.0;
    let seconds = 67_310.548_41
        + (876_600.0 * 3_600.0 + 8_640_184.812_866) * centuries
        + 0.093_104 * centuries * centuries
        - 6.2e-6 * centuries.powi(3);
    Ok(seconds.rem_euclid(86_400.0) / 86_400.0 * TAU)
}

/// Rotates an inertial vector into the Earth-fixed frame for a given sidereal angle.
pub fn rotate_teme_to_ecef(p: &TemePosition, gmst_rad: f64) -> EcefPosition {
    let (s, c) = gmst_rad.sin_cos();
    EcefPosition {
        x: c * p.x + s * p.y,
        y: -s * p.x + c * p.y,
        z: p.z,
    }
}

pub fn teme_to_ecef(p: &TemePosition, t: EpochTime) -> Result<EcefPosition> {
    Ok(rotate_teme_to_ecef(p, gmst(t)?))
}

/// Two-body position on a circular orbit.
pub fn propagate_circular(el: &MeanElements, t: EpochTime) -> Result<TemePosition> {
    circular_position_at(el, t.seconds_since(el.epoch))
}

/// Same as [`propagate_circular`] for an offset in seconds from the element epoch.
pub fn circular_position_at(el: &MeanElements, dt_seconds: f64) -> Result<TemePosition> {
    if el.eccentricity != 0.0 {
        return Err(Error::Unsupported(format!(
            "circular propagation requires eccentricity 0, got {}",
            el.eccentricity
        )));
    }
    let n = (MU_EARTH / el.semi_major_axis.powi(3)).sqrt();
    let u = (el.arg_perigee + el.mean_anomaly).to_radians() + n * dt_seconds;
    Ok(orbit_to_inertial(
        el.semi_major_axis * u.cos(),
        el.semi_major_axis * u.sin(),
        0.0,
        el.inclination.to_radians(),
        el.raan.to_radians(),
    ))
}

/// Keplerian propagator with optional secular J2 rates.
#[derive(Debug, Clone, Copy)]
pub struct MeanElementPropagator {
    pub j2: f64,
    /// `None` disables the staleness check.
    pub max_age_days: Option<f64>,
}

impl MeanElementPropagator {
    pub const TWO_BODY: Self = Self {
        j2: 0.0,
        max_age_days: None,
    };
    pub const SECULAR_J2: Self = Self {
        j2: J2,
        max_age_days: Some(MAX_ELEMENT_AGE_DAYS),
    };

    pub fn propagate(&self, el: &MeanElements, t: EpochTime) -> Result<TemePosition> {
        let dt = t.seconds_since(el.epoch);
        if let Some(limit) = self.max_age_days {
            let age_days = dt.abs() / 86_400.0;
            if age_days >= limit {
                return Err(Error::Stale {
                    age_days,
                    limit_days: limit,
                });
            }
        }
        Ok(self.position_at(el, dt))
    }

    pub fn rates(&self, el: &MeanElements) -> SecularRates {
        secular_rates(el, self.j2)
    }

    pub fn position_at(&self, el: &MeanElements, dt_seconds: f64) -> TemePosition {
        let rates = self.rates(el);
        let e = el.eccentricity;
        let a = el.semi_major_axis;
        let raan = el.raan.to_radians() + rates.raan * dt_seconds;
        let argp = el.arg_perigee.to_radians() + rates.arg_perigee * dt_seconds;
        let mean_anomaly = el.mean_anomaly.to_radians() + rates.mean_anomaly * dt_seconds;
        let ecc_anomaly = solve_kepler(mean_anomaly, e);
        let (sin_e, cos_e) = ecc_anomaly.sin_cos();
        // Perifocal coordinates, then rotate by argument of perigee.
        let xp = a * (cos_e - e);
        let yp = a * (1.0 - e * e).sqrt() * sin_e;
        let (sw, cw) = argp.sin_cos();
        orbit_to_inertial(cw * xp - sw * yp, sw * xp + cw * yp, 0.0, el.inclination.to_radians(), raan)
    }
}

/// Secular drift rates, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRates {
    pub raan: f64,
    pub arg_perigee: f64,
    pub mean_anomaly: f64,
}

fn secular_rates(el: &MeanElements, j2: f64) -> SecularRates {
    let n = (MU_EARTH / el.semi_major_axis.powi(3)).sqrt();
    let e2 = el.eccentricity * el.eccentricity;
    let p = el.semi_major_axis * (1.0 - e2);
    let k = 1.5 * j2 * n * (EARTH_RADIUS_KM / p).powi(2);
    let cos_i = el.inclination.to_radians().cos();
    SecularRates {
        raan: -k * cos_i,
        arg_perigee: 0.5 * k * (5.0 * cos_i * cos_i - 1.0),
        mean_anomaly: n + 0.5 * k * (1.0 - e2).sqrt() * (3.0 * cos_i * cos_i - 1.0),
    }
}

/// Mean-element propagation standing in for SGP4: Kepler plus secular J2.
pub fn propagate_tle(el: &MeanElements, t: EpochTime) -> Result<TemePosition> {
    MeanElementPropagator::SECULAR_J2.propagate(el, t)
}

fn solve_kepler(mean_anomaly: f64, e: f64) -> f64 {
    let m = mean_anomaly.rem_euclid(TAU);
    if e == 0.0 {
        return m;
    }
    let mut ecc = if e < 0.8 { m } else { PI };
    for _ in 0..50 {
        let delta = (ecc - e * ecc.sin() - m) / (1.0 - e * ecc.cos());
        ecc -= delta;
        if delta.abs() < 1e-14 {
            break;
        }
    }
    ecc
}

/// Rotates in-plane coordinates (x along the node line) by inclination and RAAN.
fn orbit_to_inertial(x: f64, y: f64, z: f64, inc: f64, raan: f64) -> TemePosition {
    let (si, ci) = inc.sin_cos();
    let (so, co) = raan.sin_cos();
    let y1 = ci * y - si * z;
    let z1 = si * y + ci * z;
    TemePosition {
        x: co * x - so * y1,
        y: so * x + co * y1,
        z: z1,
    }
}

/// Elevation of `sat` above the local horizontal plane at `ground`, degrees.
///
/// "Up" is the spherical-Earth radial direction at the ground point.
pub fn elevation_angle(ground: &GeodeticPosition, sat: &EcefPosition) -> f64 {
    elevation_from_ecef(&ground.to_ecef(), sat)
}

pub(crate) fn elevation_from_ecef(ground: &EcefPosition, sat: &EcefPosition) -> f64 {
    let r = ground.norm();
    let v = [sat.x - ground.x, sat.y - ground.y, sat.z - ground.z];
    let range = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if range == 0.0 || r == 0.0 {
        return 90.0;
    }
    let up = (v[0] * ground.x + v[1] * ground.y + v[2] * ground.z) / r;
    let cross = [
        v[1] * ground.z - v[2] * ground.y,
        v[2] * ground.x - v[0] * ground.z,
        v[0] * ground.y - v[1] * ground.x,
    ];
    let horizontal = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt() / r;
    up.atan2(horizontal).to_degrees()
}

/// True when the segment a-b clears the sphere of radius `EARTH_RADIUS_KM + margin_km`.
pub fn line_of_sight_with_margin(a: &EcefPosition, b: &EcefPosition, margin_km: f64) -> bool {
    let radius = EARTH_RADIUS_KM + margin_km;
    let d = [b.x - a.x, b.y - a.y, b.z - a.z];
    let len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if len2 == 0.0 {
        return true;
    }
    let t = (-(a.x * d[0] + a.y * d[1] + a.z * d[2]) / len2).clamp(0.0, 1.0);
    let closest = [a.x + t * d[0], a.y + t * d[1], a.z + t * d[2]];
    let dist2 = closest[0] * closest[0] + closest[1] * closest[1] + closest[2] * closest[2];
    dist2 > radius * radius
}

pub fn line_of_sight(a: &EcefPosition, b: &EcefPosition) -> bool {
    line_of_sight_with_margin(a, b, DEFAULT_GRAZING_MARGIN_KM)
}

/// A link endpoint for the visibility predicate.
#[derive(Debug, Clone, Copy)]
pub enum Site {
    Space(EcefPosition),
    Ground(GeodeticPosition),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityConstraints {
    /// Maximum satellite-satellite range, km (centre to centre).
    pub isl_max_km: f64,
    /// Maximum ground-satellite slant range, km.
    pub ground_max_km: f64,
    pub min_elevation_deg: f64,
    pub grazing_margin_km: f64,
}

impl Default for VisibilityConstraints {
    fn default() -> Self {
        Self {
            isl_max_km: 5_000.0,
            ground_max_km: 2_500.0,
            min_elevation_deg: 25.0,
            grazing_margin_km: DEFAULT_GRAZING_MARGIN_KM,
        }
    }
}

/// Binary visibility between two sites.
///
/// Space-space pairs need range and a clear grazing ray; ground-space pairs need
/// range and the minimum elevation (which implies an unoccluded ray).
pub fn visibility(a: &Site, b: &Site, c: &VisibilityConstraints) -> Result<bool> {
    match (a, b) {
        (Site::Space(p), Site::Space(q)) => Ok(p.distance_to(q) <= c.isl_max_km
            && line_of_sight_with_margin(p, q, c.grazing_margin_km)),
        (Site::Ground(g), Site::Space(s)) | (Site::Space(s), Site::Ground(g)) => {
            let ground = g.to_ecef();
            Ok(ground.distance_to(s) <= c.ground_max_km
                && elevation_from_ecef(&ground, s) >= c.min_elevation_deg)
        }
        (Site::Ground(_), Site::Ground(_)) => Err(Error::config(
            "topology",
            "no link type joins two ground sites",
        )),
    }
}

/// One-way propagation delay in milliseconds.
pub fn propagation_delay(distance_km: f64) -> Result<f64> {
    if !(distance_km >= 0.0) {
        return Err(Error::Domain(format!("negative distance {distance_km} km")));
    }
    Ok(distance_km / SPEED_OF_LIGHT_KM_S * 1_000.0)
}

/// Initial great-circle bearing from `from` to `to`, degrees clockwise from north in [0, 360).
pub fn bearing_deg(from: &GeodeticPosition, to: &GeodeticPosition) -> f64 {
    let (p1, p2) = (from.lat.to_radians(), to.lat.to_radians());
    let dl = (to.lon - from.lon).to_radians();
    let y = dl.sin() * p2.cos();
    let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos();
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    y.atan2(x).to_degrees().rem_euclid(360.0)
}

/// Point reached by travelling `distance_km` along a great circle on the mean sphere.
pub fn destination_point(from: &GeodeticPosition, bearing: f64, distance_km: f64) -> GeodeticPosition {
    let delta = distance_km / EARTH_RADIUS_KM;
    let theta = bearing.to_radians();
    let (p1, l1) = (from.lat.to_radians(), from.lon.to_radians());
    let p2 = (p1.sin() * delta.cos() + p1.cos() * delta.sin() * theta.cos()).asin();
    let l2 = l1
        + (theta.sin() * delta.sin() * p1.cos()).atan2(delta.cos() - p1.sin() * p2.sin());
    GeodeticPosition::new(p2.to_degrees(), l2.to_degrees(), from.alt)
}
