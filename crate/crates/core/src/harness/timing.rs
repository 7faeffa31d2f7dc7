use num_rational::Ratio;

use crate::{Error, Result};

/// Common decimal production coefficients mapped to the
/// nearest natural fractions, so that timing stays exact in integer units.
pub const UPSILON_PRESETS: [(&str, (u64, u64)); 5] = [
    ("1.091", (12, 11)),
    ("1.11", (10, 9)),
    ("1.125", (9, 8)),
    ("1.15", (23, 20)),
    ("1.2", (6, 5)),
];

/// Smallest integer pair `(tau_sc, tau_ch)` with `tau_ch / tau_sc = upsilon`.
pub fn resolve_timing(upsilon: Ratio<u64>) -> Result<(u64, u64)> {
    if *upsilon.denom() == 0 {
        return Err(Error::InvalidTiming("zero denominator".into()));
    }
    if upsilon < Ratio::from_integer(1) {
        return Err(Error::InvalidTiming(format!(
            "production coefficient {upsilon} is below 1"
        )));
    }
    let r = upsilon.reduced();
    Ok((*r.denom(), *r.numer()))
}

/// Parses `p/q`, an integer, or a decimal. Decimals listed in
/// [`UPSILON_PRESETS`] map to their preset fraction; other decimals are taken
/// exactly (`1.3` is `13/10`).
pub fn parse_upsilon(s: &str) -> Result<Ratio<u64>> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad production coefficient '{s}'"));
    if let Some((_, (p, q))) = UPSILON_PRESETS.iter().find(|(d, _)| *d == s) {
        return Ok(Ratio::new(*p, *q));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty()
        || frac.len() > 12
        || !(int.chars().chain(frac.chars())).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let q = 10u64.pow(frac.len() as u32);
    let p: u64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(Ratio::new(p, q))
}

/// `p/q` text form used in files.
pub fn format_upsilon(u: Ratio<u64>) -> String {
    format!("{}/{}", u.numer(), u.denom())
}

pub fn upsilon_f64(u: Ratio<u64>) -> f64 {
    *u.numer() as f64 / *u.denom() as f64
}
