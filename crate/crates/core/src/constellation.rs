//! Satellite element sets: two-line element files and Walker Delta patterns.

use crate::error::{Error, Result};
use crate::orbital::{
    gmst, rotate_teme_to_ecef, EcefPosition, MeanElementPropagator, MeanElements, EARTH_RADIUS_KM,
};
use crate::time::EpochTime;

pub const TLE_LINE_LEN: usize = 69;

#[derive(Debug, Clone, PartialEq)]
pub struct TleRecord {
    pub name: String,
    pub line1: String,
    pub line2: String,
    pub catalog_number: u32,
    pub elements: MeanElements,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    /// Skip malformed records and report them.
    Lenient,
}

#[derive(Debug, Default)]
pub struct TleParse {
    pub records: Vec<TleRecord>,
    pub skipped: Vec<Error>,
}

/// Mod-10 checksum over the first 68 columns: digits count their value, '-' counts 1.
pub fn tle_checksum(line: &str) -> u32 {
    line.bytes()
        .take(TLE_LINE_LEN - 1)
        .map(|b| match b {
            b'0'..=b'9' => (b - b'0') as u32,
            b'-' => 1,
            _ => 0,
        })
        .sum::<u32>()
        % 10
}

/// Parses 3-line (name + elements) or bare 2-line records in file order.
pub fn parse_tle(text: &str, mode: ParseMode) -> Result<TleParse> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::InputData("TLE text is empty".into()));
    }

    let mut out = TleParse::default();
    let mut i = 0;
    while i < lines.len() {
        let bare = lines[i].1.starts_with("1 ") && lines[i].1.len() == TLE_LINE_LEN;
        let width = if bare { 2 } else { 3 };
        let parsed = if i + width > lines.len() {
            Err(Error::Tle {
                line: lines[i].0,
                message: "truncated record".into(),
            })
        } else if bare {
            parse_record(None, lines[i], lines[i + 1])
        } else {
            parse_record(Some(lines[i].1.trim()), lines[i + 1], lines[i + 2])
        };
        match parsed {
            Ok(rec) => out.records.push(rec),
            Err(e) if mode == ParseMode::Lenient => {
                log::warn!("skipping TLE record: {e}");
                out.skipped.push(e);
            }
            Err(e) => return Err(e),
        }
        i += width;
    }
    Ok(out)
}

fn field<'a>(line: &'a str, lineno: usize, from: usize, to: usize, what: &str) -> Result<&'a str> {
    line.get(from - 1..to).map(str::trim).ok_or_else(|| Error::Tle {
        line: lineno,
        message: format!("missing {what} (columns {from}-{to})"),
    })
}

fn number<T: std::str::FromStr>(line: &str, lineno: usize, from: usize, to: usize, what: &str) -> Result<T> {
    let raw = field(line, lineno, from, to, what)?;
    raw.parse::<T>().map_err(|_| Error::Tle {
        line: lineno,
        message: format!("unparsable {what} `{raw}`"),
    })
}

/// Decodes the assumed-decimal exponent notation, e.g. ` 12345-3` = 0.12345e-3.
pub fn implied_exponent(raw: &str, lineno: usize, what: &str) -> Result<f64> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(0.0);
    }
    let bad = || Error::Tle {
        line: lineno,
        message: format!("unparsable {what} `{raw}`"),
    };
    let (sign, body) = match raw.as_bytes()[0] {
        b'-' => (-1.0, &raw[1..]),
        b'+' => (1.0, &raw[1..]),
        _ => (1.0, raw),
    };
    let split = body.rfind(['-', '+']).filter(|&p| p > 0).ok_or_else(bad)?;
    let mantissa: f64 = format!("0.{}", &body[..split]).parse().map_err(|_| bad())?;
    let exponent: i32 = body[split..].parse().map_err(|_| bad())?;
    Ok(sign * mantissa * 10f64.powi(exponent))
}

fn check_line(line: &str, lineno: usize, expected: char) -> Result<()> {
    if line.len() != TLE_LINE_LEN || !line.is_ascii() {
        return Err(Error::Tle {
            line: lineno,
            message: format!("expected {TLE_LINE_LEN} ASCII characters, found {}", line.chars().count()),
        });
    }
    if !line.starts_with(expected) {
        return Err(Error::Tle {
            line: lineno,
            message: format!("line number must be '{expected}'"),
        });
    }
    let stated = line.as_bytes()[TLE_LINE_LEN - 1];
    let computed = tle_checksum(line);
    if !stated.is_ascii_digit() || (stated - b'0') as u32 != computed {
        return Err(Error::Tle {
            line: lineno,
            message: format!("checksum mismatch: stated '{}', computed {computed}", stated as char),
        });
    }
    Ok(())
}

fn parse_record(name: Option<&str>, l1: (usize, &str), l2: (usize, &str)) -> Result<TleRecord> {
    let ((n1, line1), (n2, line2)) = (l1, l2);
    check_line(line1, n1, '1')?;
    check_line(line2, n2, '2')?;

    let catalog_number: u32 = number(line1, n1, 3, 7, "catalog number")?;
    let catalog2: u32 = number(line2, n2, 3, 7, "catalog number")?;
    if catalog_number != catalog2 {
        return Err(Error::Tle {
            line: n2,
            message: format!("catalog number {catalog2} differs from line 1 ({catalog_number})"),
        });
    }

    let yy: i32 = number(line1, n1, 19, 20, "epoch year")?;
    let day: f64 = number(line1, n1, 21, 32, "epoch day")?;
    let year = if yy < 57 { 2000 + yy } else { 1900 + yy };
    let epoch = EpochTime::from_year_and_day(year, day).map_err(|e| Error::Tle {
        line: n1,
        message: e.to_string(),
    })?;
    let bstar = implied_exponent(field(line1, n1, 54, 61, "bstar")?, n1, "bstar")?;

    let inclination: f64 = number(line2, n2, 9, 16, "inclination")?;
    let raan: f64 = number(line2, n2, 18, 25, "right ascension")?;
    let ecc_digits = field(line2, n2, 27, 33, "eccentricity")?;
    if !ecc_digits.bytes().all(|b| b.is_ascii_digit()) || ecc_digits.is_empty() {
        return Err(Error::Tle {
            line: n2,
            message: format!("unparsable eccentricity `{ecc_digits}`"),
        });
    }
    let eccentricity: f64 = format!("0.{ecc_digits}").parse().expect("digits form a decimal");
    let arg_perigee: f64 = number(line2, n2, 35, 42, "argument of perigee")?;
    let mean_anomaly: f64 = number(line2, n2, 44, 51, "mean anomaly")?;
    let mean_motion: f64 = number(line2, n2, 53, 63, "mean motion")?;

    let elements = MeanElements::from_mean_motion(
        mean_motion,
        eccentricity,
        inclination,
        raan,
        arg_perigee,
        mean_anomaly,
        bstar,
        epoch,
    )
    .map_err(|e| Error::Tle {
        line: n2,
        message: e.to_string(),
    })?;

    Ok(TleRecord {
        name: name.map(str::to_owned).unwrap_or_else(|| format!("SAT-{catalog_number}")),
        line1: line1.to_owned(),
        line2: line2.to_owned(),
        catalog_number,
        elements,
    })
}

pub fn format_implied_exponent(value: f64) -> String {
    if value == 0.0 {
        return " 00000+0".into();
    }
    let sign = if value < 0.0 { '-' } else { ' ' };
    let mut exponent = value.abs().log10().floor() as i32 + 1;
    let mut mantissa = (value.abs() / 10f64.powi(exponent) * 1e5).round() as u32;
    if mantissa >= 100_000 {
        mantissa /= 10;
        exponent += 1;
    }
    let esign = if exponent < 0 { '-' } else { '+' };
    format!("{sign}{mantissa:05}{esign}{}", exponent.abs())
}

pub fn with_checksum(mut body: String) -> String {
    debug_assert_eq!(body.len(), TLE_LINE_LEN - 1);
    let sum = tle_checksum(&body);
    body.push(char::from(b'0' + sum as u8));
    body
}

/// Renders element lines for a synthetic record (first/second derivatives zero).
pub fn render_tle(catalog_number: u32, el: &MeanElements) -> Result<(String, String)> {
    if catalog_number > 99_999 {
        return Err(Error::Domain(format!("catalog number {catalog_number} exceeds 5 digits")));
    }
    let (year, day) = el.epoch.year_and_day();
    let ecc = (el.eccentricity * 1e7).round() as u64;
    if ecc > 9_999_999 {
        return Err(Error::Domain(format!("eccentricity {} not representable", el.eccentricity)));
    }
    let line1 = with_checksum(format!(
        "1 {catalog_number:05}U 00000A   {:02}{day:012.8}  .00000000  00000+0 {} 0  999",
        year.rem_euclid(100),
        format_implied_exponent(el.bstar),
    ));
    let line2 = with_checksum(format!(
        "2 {catalog_number:05} {:8.4} {:8.4} {ecc:07} {:8.4} {:8.4} {:11.8}    0",
        el.inclination,
        el.raan.rem_euclid(360.0),
        el.arg_perigee.rem_euclid(360.0),
        el.mean_anomaly.rem_euclid(360.0),
        el.mean_motion,
    ));
    Ok((line1, line2))
}

/// Walker Delta pattern i:T/P/F at a fixed altitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkerParams {
    pub inclination: f64,
    pub total: u32,
    pub planes: u32,
    pub phasing: u32,
    pub altitude_km: f64,
}

impl WalkerParams {
    /// 53°: 1584/72/39 at 550 km.
    pub const REFERENCE: WalkerParams = WalkerParams {
        inclination: 53.0,
        total: 1584,
        planes: 72,
        phasing: 39,
        altitude_km: 550.0,
    };

    pub fn validate(&self) -> Result<()> {
        let key = "constellation.walker";
        if self.total == 0 || self.planes == 0 {
            return Err(Error::config(key, "total and planes must be positive"));
        }
        if !self.total.is_multiple_of(self.planes) {
            return Err(Error::config(
                format!("{key}.planes"),
                format!("{} planes do not divide {} satellites", self.planes, self.total),
            ));
        }
        if self.phasing >= self.total {
            return Err(Error::config(format!("{key}.phasing"), "phasing must be below total"));
        }
        if !(self.altitude_km > 0.0) {
            return Err(Error::config(format!("{key}.altitude_km"), "altitude must be positive"));
        }
        Ok(())
    }

    pub fn per_plane(&self) -> u32 {
        self.total / self.planes
    }
}

/// Circular element sets in plane-major order (index = plane * per_plane + slot).
pub fn generate_walker(p: &WalkerParams, epoch: EpochTime) -> Result<Vec<MeanElements>> {
    p.validate()?;
    let a = EARTH_RADIUS_KM + p.altitude_km;
    let (total, planes, per_plane) = (p.total as f64, p.planes as f64, p.per_plane());
    let mut out = Vec::with_capacity(p.total as usize);
    for k in 0..p.planes {
        let raan = k as f64 * 360.0 / planes;
        let plane_phase = (k as f64 * p.phasing as f64) * 360.0 / total;
        for m in 0..per_plane {
            let slot = m as f64 * 360.0 * planes / total;
            let mean_anomaly = (slot + plane_phase).rem_euclid(360.0);
            out.push(MeanElements::circular(a, p.inclination, raan, mean_anomaly, epoch));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PropagationMode {
    #[default]
    TwoBody,
    J2,
}

/// Earth-fixed positions of every element set at `t`.
pub fn constellation_positions(
    elements: &[MeanElements],
    t: EpochTime,
    mode: PropagationMode,
) -> Result<Vec<EcefPosition>> {
    let theta = gmst(t)?;
    let propagator = match mode {
        PropagationMode::TwoBody => MeanElementPropagator::TWO_BODY,
        PropagationMode::J2 => MeanElementPropagator::SECULAR_J2,
    };
    elements
        .iter()
        .map(|el| Ok(rotate_teme_to_ecef(&propagator.propagate(el, t)?, theta)))
        .collect()
}
