//! Daily position series and their text formats.
//!
//! Two dialects are read and written:
//!
//! * `mom`: Hector-style. Lines starting with `#` are headers; recognized
//!   keys are `offset <MJD>`, `unit <mm|m>` and `station <id>`, anything else
//!   is kept verbatim. Data rows are `MJD value [error]`.
//! * `pos`: analysis-center station position records (format 1.1). The
//!   topocentric offsets `dN dE dU` (fields 16-18, metres) and their sigmas
//!   (fields 19-21) are read for one selected component.
//!
//! Values are held in millimetres. Metre inputs are rescaled by moving the
//! decimal exponent of the text, so a metre value written back out parses
//! to the same `f64`.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

use crate::stochastic::SPACING_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: epoch {epoch} does not come after the previous epoch")]
    NonMonotone { line: usize, epoch: f64 },
    #[error("line {line}: {reason}")]
    Unparsable { line: usize, reason: String },
    #[error("no data rows")]
    EmptyData,
    #[error("line {line}: epoch {epoch} is not an integer number of days after the first epoch")]
    NonIntegerSpacing { line: usize, epoch: f64 },
    #[error("line {line}: non-finite number")]
    NonFinite { line: usize },
}

impl ParseError {
    /// Stable identifier of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::NonMonotone { .. } => "non_monotone",
            ParseError::Unparsable { .. } => "unparsable",
            ParseError::EmptyData => "empty_data",
            ParseError::NonIntegerSpacing { .. } => "non_integer_spacing",
            ParseError::NonFinite { .. } => "non_finite",
        }
    }
}

type ParseResult<T> = std::result::Result<T, ParseError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Mom,
    Pos,
}

impl FromStr for FileFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mom" => Ok(FileFormat::Mom),
            "pos" => Ok(FileFormat::Pos),
            other => Err(format!("unknown file format `{other}` (expected mom or pos)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosComponent {
    N,
    E,
    #[default]
    U,
}

impl PosComponent {
    fn value_field(self) -> usize {
        match self {
            PosComponent::N => 15,
            PosComponent::E => 16,
            PosComponent::U => 17,
        }
    }
}

impl FromStr for PosComponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "north" => Ok(PosComponent::N),
            "e" | "east" => Ok(PosComponent::E),
            "u" | "up" => Ok(PosComponent::U),
            other => Err(format!("unknown component `{other}` (expected n, e or u)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Mm,
    M,
}

impl Units {
    /// Decimal exponent taking a value in these units to millimetres.
    fn to_mm_exponent(self) -> i32 {
        match self {
            Units::Mm => 0,
            Units::M => 3,
        }
    }
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mm" => Ok(Units::Mm),
            "m" => Ok(Units::M),
            other => Err(format!("unknown unit `{other}` (expected mm or m)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParseOptions {
    /// Component read from `pos` files.
    pub component: PosComponent,
    /// Overrides the unit declared in (or defaulted for) the file.
    pub units: Option<Units>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Days (MJD), strictly increasing on an integer-day grid.
    pub epochs: Vec<f64>,
    /// Millimetres.
    pub values: Vec<f64>,
    /// Per-epoch formal errors in millimetres, when the file carries them.
    pub sigma_hint: Option<Vec<f64>>,
    pub offsets_declared: Vec<f64>,
    pub station_id: String,
    /// Header lines without a recognized key, verbatim.
    pub metadata: Vec<String>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn span_days(&self) -> f64 {
        match (self.epochs.first(), self.epochs.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// `text · 10^shift` correctly rounded, by rewriting the decimal exponent.
fn parse_scaled(text: &str, shift: i32) -> Option<f64> {
    if shift == 0 {
        return text.parse().ok();
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    // reject forms the exponent rewrite would change the meaning of
    mantissa.parse::<f64>().ok()?;
    if mantissa.is_empty() || mantissa.chars().any(|c| c.is_ascii_alphabetic()) {
        return text.parse::<f64>().ok();
    }
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

/// Plain decimal text of `v · 10^shift` using the shortest representation
/// of `v`, so that [`parse_scaled`] with `-shift` returns `v` exactly.
pub(crate) fn decimal_shift(v: f64, shift: i32) -> String {
    if v == 0.0 || shift == 0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:e}");
    let (mantissa, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let len = digits.len() as i32;
    let e = exp - (len - 1) + shift;
    let body = if e >= 0 {
        format!("{digits}{}", "0".repeat(e as usize))
    } else if len > -e {
        let split = (len + e) as usize;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        format!("0.{}{}", "0".repeat((-e - len) as usize), digits)
    };
    format!("{sign}{body}")
}

fn number(token: &str, line: usize, shift: i32) -> ParseResult<f64> {
    let v = parse_scaled(token, shift).ok_or_else(|| ParseError::Unparsable {
        line,
        reason: format!("`{token}` is not a number"),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ParseError::NonFinite { line })
    }
}

/// Accumulates rows while enforcing the epoch grid.
struct RowSink {
    epochs: Vec<f64>,
    values: Vec<f64>,
    sigmas: Vec<f64>,
    with_sigma: Option<bool>,
}

impl RowSink {
    fn new() -> Self {
        Self {
            epochs: Vec::new(),
            values: Vec::new(),
            sigmas: Vec::new(),
            with_sigma: None,
        }
    }

    fn push(&mut self, line: usize, epoch: f64, value: f64, sigma: Option<f64>) -> ParseResult<()> {
        if let Some(&prev) = self.epochs.last() {
            if !(epoch > prev) {
                return Err(ParseError::NonMonotone { line, epoch });
            }
        }
        if let Some(&first) = self.epochs.first() {
            let off = epoch - first;
            if (off - off.round()).abs() > SPACING_TOL {
                return Err(ParseError::NonIntegerSpacing { line, epoch });
            }
        }
        match (self.with_sigma, sigma.is_some()) {
            (None, has) => self.with_sigma = Some(has),
            (Some(a), b) if a != b => {
                return Err(ParseError::Unparsable {
                    line,
                    reason: "rows disagree on whether an error column is present".into(),
                })
            }
            _ => {}
        }
        self.epochs.push(epoch);
        self.values.push(value);
        if let Some(s) = sigma {
            self.sigmas.push(s);
        }
        Ok(())
    }

    fn finish(self) -> ParseResult<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
        if self.epochs.is_empty() {
            return Err(ParseError::EmptyData);
        }
        let sigma = if self.with_sigma == Some(true) { Some(self.sigmas) } else { None };
        Ok((self.epochs, self.values, sigma))
    }
}

fn decode(bytes: &[u8]) -> ParseResult<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        ParseError::Unparsable {
            line,
            reason: "invalid UTF-8".into(),
        }
    })
}

/// Reads a position file; every input yields either a complete series or a
/// typed error.
pub fn parse_position_file(bytes: &[u8], format: FileFormat, options: &ParseOptions) -> ParseResult<TimeSeries> {
    let text = decode(bytes)?;
    match format {
        FileFormat::Mom => parse_mom(text, options.units),
        FileFormat::Pos => parse_pos(text, options.component, options.units),
    }
}

/// `key rest` split of a header line, with an optional `:` after the key.
fn header_key(content: &str) -> Option<(String, &str)> {
    let trimmed = content.trim_start();
    let end = trimmed.find(|c: char| c.is_whitespace() || c == ':').unwrap_or(trimmed.len());
    let key = trimmed[..end].to_ascii_lowercase();
    let rest = trimmed[end..].trim_start_matches(':').trim();
    (!key.is_empty()).then_some((key, rest))
}

pub fn parse_mom(text: &str, units: Option<Units>) -> ParseResult<TimeSeries> {
    let mut ts = TimeSeries::default();
    let mut declared: Option<Units> = None;
    let mut rows: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if let Some(content) = raw.trim_start().strip_prefix('#') {
            match header_key(content) {
                Some((key, rest)) if key == "offset" => {
                    let token = rest.split_whitespace().next().unwrap_or("");
                    ts.offsets_declared.push(number(token, line, 0)?);
                }
                Some((key, rest)) if key == "unit" || key == "units" => {
                    let u = rest.split_whitespace().next().unwrap_or("");
                    declared = Some(u.parse().map_err(|reason| ParseError::Unparsable { line, reason })?);
                }
                Some((key, rest)) if key == "station" => ts.station_id = rest.to_string(),
                _ => ts.metadata.push(content.to_string()),
            }
        } else if !raw.trim().is_empty() {
            rows.push((line, raw));
        }
    }
    let shift = units.or(declared).unwrap_or_default().to_mm_exponent();
    let mut sink = RowSink::new();
    for (line, raw) in rows {
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(ParseError::Unparsable {
                line,
                reason: format!("expected `MJD value [error]`, found {} fields", fields.len()),
            });
        }
        let epoch = number(fields[0], line, 0)?;
        let value = number(fields[1], line, shift)?;
        let sigma = fields.get(2).map(|s| number(s, line, shift)).transpose()?;
        sink.push(line, epoch, value, sigma)?;
    }
    let (epochs, values, sigma) = sink.finish()?;
    ts.epochs = epochs;
    ts.values = values;
    ts.sigma_hint = sigma;
    Ok(ts)
}

/// Writes a `mom` file in millimetres.
pub fn write_mom(ts: &TimeSeries) -> String {
    let mut out = String::new();
    if !ts.station_id.is_empty() {
        let _ = writeln!(out, "# station {}", ts.station_id);
    }
    let _ = writeln!(out, "# unit mm");
    for m in &ts.metadata {
        let _ = writeln!(out, "#{m}");
    }
    for o in &ts.offsets_declared {
        let _ = writeln!(out, "# offset {o}");
    }
    for (i, (t, v)) in ts.epochs.iter().zip(&ts.values).enumerate() {
        match &ts.sigma_hint {
            Some(s) => {
                let _ = writeln!(out, "{t} {v} {}", s[i]);
            }
            None => {
                let _ = writeln!(out, "{t} {v}");
            }
        }
    }
    out
}

const POS_MIN_FIELDS: usize = 21;

fn is_pos_row(line: &str) -> bool {
    let first = line.split_whitespace().next().unwrap_or("");
    first.len() == 8 && first.bytes().all(|b| b.is_ascii_digit())
}

pub fn parse_pos(text: &str, component: PosComponent, units: Option<Units>) -> ParseResult<TimeSeries> {
    let mut ts = TimeSeries::default();
    let shift = units.unwrap_or(Units::M).to_mm_exponent();
    let col = component.value_field();
    let mut sink = RowSink::new();
    let mut in_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if !in_data && !is_pos_row(raw) {
            if let Some(id) = raw.trim_start().strip_prefix("4-character ID:") {
                ts.station_id = id.trim().to_string();
            }
            ts.metadata.push(raw.to_string());
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        in_data = true;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !is_pos_row(raw) || fields.len() < POS_MIN_FIELDS {
            return Err(ParseError::Unparsable {
                line,
                reason: format!(
                    "expected a position record with at least {POS_MIN_FIELDS} fields, found {}",
                    fields.len()
                ),
            });
        }
        let epoch = number(fields[2], line, 0)?;
        let value = number(fields[col], line, shift)?;
        let sigma = number(fields[col + 3], line, shift)?;
        sink.push(line, epoch, value, Some(sigma))?;
    }
    let (epochs, values, sigma) = sink.finish()?;
    ts.epochs = epochs;
    ts.values = values;
    ts.sigma_hint = sigma;
    Ok(ts)
}

/// Proleptic Gregorian `(year, month, day)` of a Modified Julian Day.
fn civil_from_mjd(mjd: i64) -> (i64, u32, u32) {
    let z = mjd - 40587 + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y, m, d)
}

const POS_COLUMNS: &str = "*YYYYMMDD HHMMSS JJJJJ.JJJJ         X             Y             Z            Sx        Sy       Sz     Rxy   Rxz    Ryz            NLat         Elong         Height         dN        dE        dU         Sn       Se       Su      Rne    Rnu    Reu  Soln";

/// Writes a `pos` file carrying `ts` in the selected component (metres);
/// the other components are zero. The header of a parsed `pos` file is
/// written back verbatim; other series get a minimal header.
pub fn write_pos(ts: &TimeSeries, component: PosComponent) -> String {
    let mut out = String::new();
    if ts.metadata.iter().any(|m| m.starts_with('*')) {
        for m in &ts.metadata {
            let _ = writeln!(out, "{m}");
        }
    } else {
        let _ = writeln!(out, "Station Position Time Series");
        let _ = writeln!(out, "Format Version: 1.1.0");
        let _ = writeln!(out, "4-character ID: {}", ts.station_id);
        let _ = writeln!(out, "{POS_COLUMNS}");
    }
    let col = component.value_field() - 15;
    for (i, (&t, &v)) in ts.epochs.iter().zip(&ts.values).enumerate() {
        let day = t.floor();
        let secs = ((t - day) * 86400.0).round() as i64;
        let (y, mo, d) = civil_from_mjd(day as i64);
        let (hh, mm, ss) = (secs / 3600, (secs % 3600) / 60, secs % 60);
        let sigma = ts.sigma_hint.as_ref().map_or(0.0, |s| s[i]);
        let mut neu = ["0".to_string(), "0".to_string(), "0".to_string()];
        let mut sneu = neu.clone();
        neu[col] = decimal_shift(v, -3);
        sneu[col] = decimal_shift(sigma, -3);
        let _ = writeln!(
            out,
            " {y:04}{mo:02}{d:02} {hh:02}{mm:02}{ss:02} {t} 0 0 0 0 0 0 0 0 0 0 0 0 {} {} {} {} {} {} 0 0 0 synth",
            neu[0], neu[1], neu[2], sneu[0], sneu[1], sneu[2]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mom(text: &str) -> ParseResult<TimeSeries> {
        parse_position_file(text.as_bytes(), FileFormat::Mom, &ParseOptions::default())
    }

    #[test]
    fn two_row_body() {
        let ts = mom("50000.0 1.5\n50001.0 2.5\n").unwrap();
        assert_eq!(ts.epochs, vec![50000.0, 50001.0]);
        assert_eq!(ts.values, vec![1.5, 2.5]);
        assert_eq!(ts.sigma_hint, None);
    }

    #[test]
    fn headers() {
        let ts = mom("# offset 50449.0\n# sampling period 1.0\n# station: ABCD\n50000 1\n50002 2 0.5\n")
            .unwrap_err();
        assert_eq!(ts.kind(), "unparsable");
        let ts = mom("# offset 50449.0\n# sampling period 1.0\n# station: ABCD\n50000 1\n50002 2\n").unwrap();
        assert_eq!(ts.offsets_declared, vec![50449.0]);
        assert_eq!(ts.station_id, "ABCD");
        assert_eq!(ts.metadata, vec![" sampling period 1.0".to_string()]);
    }

    #[test]
    fn typed_errors() {
        assert_eq!(mom("# only headers\n"), Err(ParseError::EmptyData));
        assert_eq!(
            mom("50001 1\n50000 2\n"),
            Err(ParseError::NonMonotone { line: 2, epoch: 50000.0 })
        );
        assert_eq!(
            mom("50000 1\n50001.5 2\n"),
            Err(ParseError::NonIntegerSpacing { line: 2, epoch: 50001.5 })
        );
        assert_eq!(mom("50000 1\n50001 nan\n"), Err(ParseError::NonFinite { line: 2 }));
        assert!(matches!(mom("50000 x\n"), Err(ParseError::Unparsable { line: 1, .. })));
        assert!(matches!(mom("50000 1 2 3\n"), Err(ParseError::Unparsable { line: 1, .. })));
        assert!(matches!(
            parse_position_file(b"50000 1\n\xff\n", FileFormat::Mom, &ParseOptions::default()),
            Err(ParseError::Unparsable { line: 2, .. })
        ));
    }

    #[test]
    fn metre_conversion_is_exact() {
        let ts = mom("# unit m\n50000 0.0123\n50001 -1.5e-3\n").unwrap();
        assert_eq!(ts.values, vec![12.3, -1.5]);
        let opts = ParseOptions {
            units: Some(Units::M),
            ..Default::default()
        };
        let ts = parse_position_file(b"50000 0.1\n", FileFormat::Mom, &opts).unwrap();
        assert_eq!(ts.values, vec![100.0]);
    }

    #[test]
    fn decimal_shift_roundtrip() {
        for v in [0.1, 12.3, -0.0004, 1234.5678, 1e-9, 7e12, 0.0, 3.0] {
            let text = decimal_shift(v, -3);
            assert!(!text.contains('e'), "{text}");
            assert_eq!(parse_scaled(&text, 3), Some(v), "{v} -> {text}");
        }
        assert_eq!(decimal_shift(12.3, -3), "0.0123");
        assert_eq!(decimal_shift(1500.0, -3), "1.5");
        assert_eq!(decimal_shift(-2.0, 2), "-200");
    }

    #[test]
    fn mom_roundtrip() {
        let ts = TimeSeries {
            epochs: vec![51544.0, 51545.0, 51547.0],
            values: vec![0.1, -2.25, 1e-7],
            sigma_hint: Some(vec![1.0, 1.5, 2.0]),
            offsets_declared: vec![51546.0],
            station_id: "TEST".into(),
            metadata: vec![" sampling period 1.0".into()],
        };
        assert_eq!(mom(&write_mom(&ts)).unwrap(), ts);
    }

    #[test]
    fn pos_roundtrip_and_fields() {
        let row = " 20050101 115959 53371.4993 -2517570.29443 -4656587.04116  3526580.17437  0.00199  0.00317  0.00235  0.645 -0.537 -0.710      33.7782218383  241.6012563007  -13.02813   0.00120  -0.00340   0.01005    0.00115  0.00096  0.00404 -0.040 -0.151  0.037 rapid\n";
        let row2 = row.replace("20050101 115959 53371.4993", "20050102 115959 53372.4993");
        let text = format!("Header line\nFormat Version: 1.1.0\n4-character ID: P123\n{POS_COLUMNS}\n{row}{row2}");
        let up = parse_pos(&text, PosComponent::U, None).unwrap();
        assert_eq!(up.station_id, "P123");
        assert_eq!(up.epochs, vec![53371.4993, 53372.4993]);
        assert_eq!(up.values, vec![10.05, 10.05]);
        assert_eq!(up.sigma_hint, Some(vec![4.04, 4.04]));
        let north = parse_pos(&text, PosComponent::N, None).unwrap();
        assert_eq!(north.values[0], 1.2);
        let east = parse_pos(&text, PosComponent::E, None).unwrap();
        assert_eq!(east.values[0], -3.4);
        let again = parse_pos(&write_pos(&up, PosComponent::U), PosComponent::U, None).unwrap();
        assert_eq!(again, up);
    }

    #[test]
    fn calendar_dates() {
        assert_eq!(civil_from_mjd(51544), (2000, 1, 1));
        assert_eq!(civil_from_mjd(53371), (2005, 1, 1));
        assert_eq!(civil_from_mjd(0), (1858, 11, 17));
    }
}
