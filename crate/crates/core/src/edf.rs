//! Baseline EDF reader and writer.
//!
//! Layout: a 256-byte fixed header, 256 bytes of per-signal header fields
//! per signal (stored field-major), then `num_records` data records. Each
//! record holds `samples_per_record` little-endian `i16` samples for every
//! signal in turn. EDF+ annotations and discontinuous records are not
//! supported.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

const FIXED_HEADER_BYTES: usize = 256;
const SIGNAL_HEADER_BYTES: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum EdfError {
    #[error("truncated stream at byte {offset}: need {needed} bytes, have {available}")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("field `{field}` at byte {offset} is not numeric: {text:?}")]
    NotNumeric {
        field: &'static str,
        offset: usize,
        text: String,
    },
    #[error("header size at byte 184 declares {declared} bytes but {num_signals} signals need {expected}")]
    HeaderSizeMismatch {
        declared: usize,
        expected: usize,
        num_signals: usize,
    },
    #[error("data region at byte {offset} holds {actual} bytes, header implies {expected}")]
    DataLengthMismatch {
        offset: usize,
        expected: usize,
        actual: usize,
    },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("signal {signal} sample {index} = {value} lies outside [{min}, {max}]")]
    OutOfRange {
        signal: usize,
        index: usize,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("value {value} does not fit the {width}-character field `{field}`")]
    FieldOverflow {
        field: &'static str,
        value: String,
        width: usize,
    },
    #[error("signal {signal} has {actual} samples, expected {expected}")]
    SignalLength {
        signal: usize,
        expected: usize,
        actual: usize,
    },
    #[error("io: {0}")]
    Io(String),
}

/// Per-signal header block.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dim: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefiltering: String,
    pub samples_per_record: usize,
}

impl SignalHeader {
    /// Physical units per digital step.
    pub fn quantum(&self) -> f64 {
        (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min) as f64
    }

    pub fn to_physical(&self, digital: i16) -> f64 {
        self.physical_min + (digital as i32 - self.digital_min) as f64 * self.quantum()
    }

    fn to_digital(&self, physical: f64) -> i16 {
        let steps = ((physical - self.physical_min) / self.quantum()).round();
        let d = (self.digital_min as f64 + steps).clamp(self.digital_min as f64, self.digital_max as f64);
        d as i16
    }

    fn validate(&self, index: usize) -> Result<(), EdfError> {
        if self.digital_min >= self.digital_max {
            return Err(EdfError::InvalidHeader(format!(
                "signal {index}: digital_min {} >= digital_max {}",
                self.digital_min, self.digital_max
            )));
        }
        if self.digital_min < i16::MIN as i32 || self.digital_max > i16::MAX as i32 {
            return Err(EdfError::InvalidHeader(format!(
                "signal {index}: digital range [{}, {}] exceeds 16 bits",
                self.digital_min, self.digital_max
            )));
        }
        if !(self.physical_min.is_finite() && self.physical_max.is_finite())
            || self.physical_min == self.physical_max
        {
            return Err(EdfError::InvalidHeader(format!(
                "signal {index}: degenerate physical range [{}, {}]",
                self.physical_min, self.physical_max
            )));
        }
        if self.samples_per_record == 0 {
            return Err(EdfError::InvalidHeader(format!(
                "signal {index}: zero samples per record"
            )));
        }
        Ok(())
    }
}

/// Fixed header plus signal headers. Text fields are held without their
/// trailing space padding.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version_tag: String,
    pub patient_id: String,
    pub recording_id: String,
    pub start_date: String,
    pub start_time: String,
    pub header_bytes: usize,
    pub reserved: String,
    pub num_records: usize,
    pub record_duration_s: f64,
    pub signals: Vec<SignalHeader>,
}

impl EdfHeader {
    /// Header with sensible defaults for a set of signals; `header_bytes`
    /// is filled in from the signal count.
    pub fn new(
        patient_id: &str,
        recording_id: &str,
        num_records: usize,
        record_duration_s: f64,
        signals: Vec<SignalHeader>,
    ) -> Self {
        Self {
            version_tag: "0".to_string(),
            patient_id: patient_id.to_string(),
            recording_id: recording_id.to_string(),
            start_date: "01.01.00".to_string(),
            start_time: "00.00.00".to_string(),
            header_bytes: header_size(signals.len()),
            reserved: String::new(),
            num_records,
            record_duration_s,
            signals,
        }
    }

    pub fn num_signals(&self) -> usize {
        self.signals.len()
    }

    /// Sampling rate of signal `index` in Hz.
    pub fn sample_rate(&self, index: usize) -> f64 {
        self.signals[index].samples_per_record as f64 / self.record_duration_s
    }

    fn record_bytes(&self) -> usize {
        self.signals.iter().map(|s| s.samples_per_record * 2).sum()
    }

    pub fn validate(&self) -> Result<(), EdfError> {
        let expected = header_size(self.signals.len());
        if self.header_bytes != expected {
            return Err(EdfError::HeaderSizeMismatch {
                declared: self.header_bytes,
                expected,
                num_signals: self.signals.len(),
            });
        }
        if !(self.record_duration_s > 0.0) {
            return Err(EdfError::InvalidHeader(format!(
                "record duration {} must be positive",
                self.record_duration_s
            )));
        }
        for (i, s) in self.signals.iter().enumerate() {
            s.validate(i)?;
        }
        Ok(())
    }
}

pub fn header_size(num_signals: usize) -> usize {
    FIXED_HEADER_BYTES + SIGNAL_HEADER_BYTES * num_signals
}

/// A parsed file: header plus one physical-unit sample array per signal.
#[derive(Debug, Clone, PartialEq)]
pub struct EdfFile {
    pub header: EdfHeader,
    pub signals: Vec<Vec<f64>>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<(usize, &'a [u8]), EdfError> {
        let end = self.pos + len;
        if end > self.bytes.len() {
            return Err(EdfError::Truncated {
                offset: self.pos,
                needed: len,
                available: self.bytes.len().saturating_sub(self.pos),
            });
        }
        let at = self.pos;
        self.pos = end;
        Ok((at, &self.bytes[at..end]))
    }

    fn text(&mut self, len: usize) -> Result<String, EdfError> {
        let (_, raw) = self.take(len)?;
        Ok(String::from_utf8_lossy(raw).trim_end().to_string())
    }

    fn number<T: std::str::FromStr>(&mut self, len: usize, field: &'static str) -> Result<T, EdfError> {
        let (offset, raw) = self.take(len)?;
        let text = String::from_utf8_lossy(raw);
        text.trim().parse::<T>().map_err(|_| EdfError::NotNumeric {
            field,
            offset,
            text: text.into_owned(),
        })
    }
}

pub fn parse_edf(bytes: &[u8]) -> Result<EdfFile, EdfError> {
    if bytes.len() < FIXED_HEADER_BYTES {
        return Err(EdfError::Truncated {
            offset: 0,
            needed: FIXED_HEADER_BYTES,
            available: bytes.len(),
        });
    }
    let mut cur = Cursor { bytes, pos: 0 };
    let version_tag = cur.text(8)?;
    let patient_id = cur.text(80)?;
    let recording_id = cur.text(80)?;
    let start_date = cur.text(8)?;
    let start_time = cur.text(8)?;
    let header_bytes: usize = cur.number(8, "header_bytes")?;
    let reserved = cur.text(44)?;
    let num_records_raw: i64 = cur.number(8, "num_records")?;
    let record_duration_s: f64 = cur.number(8, "record_duration")?;
    let num_signals: usize = cur.number(4, "num_signals")?;

    let expected = header_size(num_signals);
    if header_bytes != expected {
        return Err(EdfError::HeaderSizeMismatch {
            declared: header_bytes,
            expected,
            num_signals,
        });
    }
    if num_records_raw < 0 {
        return Err(EdfError::InvalidHeader(format!(
            "num_records {num_records_raw} (unknown record count is not supported)"
        )));
    }

    let ns = num_signals;
    let texts = |cur: &mut Cursor, len| -> Result<Vec<String>, EdfError> {
        (0..ns).map(|_| cur.text(len)).collect()
    };
    let labels = texts(&mut cur, 16)?;
    let transducers = texts(&mut cur, 80)?;
    let dims = texts(&mut cur, 8)?;
    let phys_min: Vec<f64> = (0..ns).map(|_| cur.number(8, "physical_min")).collect::<Result<_, _>>()?;
    let phys_max: Vec<f64> = (0..ns).map(|_| cur.number(8, "physical_max")).collect::<Result<_, _>>()?;
    let dig_min: Vec<i32> = (0..ns).map(|_| cur.number(8, "digital_min")).collect::<Result<_, _>>()?;
    let dig_max: Vec<i32> = (0..ns).map(|_| cur.number(8, "digital_max")).collect::<Result<_, _>>()?;
    let prefilters = texts(&mut cur, 80)?;
    let spr: Vec<usize> = (0..ns)
        .map(|_| cur.number(8, "samples_per_record"))
        .collect::<Result<_, _>>()?;
    let _signal_reserved = texts(&mut cur, 32)?;

    let signals = (0..ns)
        .map(|i| SignalHeader {
            label: labels[i].clone(),
            transducer: transducers[i].clone(),
            physical_dim: dims[i].clone(),
            physical_min: phys_min[i],
            physical_max: phys_max[i],
            digital_min: dig_min[i],
            digital_max: dig_max[i],
            prefiltering: prefilters[i].clone(),
            samples_per_record: spr[i],
        })
        .collect();
    let header = EdfHeader {
        version_tag,
        patient_id,
        recording_id,
        start_date,
        start_time,
        header_bytes,
        reserved,
        num_records: num_records_raw as usize,
        record_duration_s,
        signals,
    };
    header.validate()?;

    let data_offset = cur.pos;
    let expected_data = header.record_bytes() * header.num_records;
    let actual_data = bytes.len() - data_offset;
    if actual_data < expected_data {
        return Err(EdfError::Truncated {
            offset: data_offset,
            needed: expected_data,
            available: actual_data,
        });
    }
    if actual_data > expected_data {
        return Err(EdfError::DataLengthMismatch {
            offset: data_offset,
            expected: expected_data,
            actual: actual_data,
        });
    }

    let mut out: Vec<Vec<f64>> = header
        .signals
        .iter()
        .map(|s| Vec::with_capacity(s.samples_per_record * header.num_records))
        .collect();
    let data = &bytes[data_offset..];
    let mut pos = 0;
    for _ in 0..header.num_records {
        for (sig, samples) in header.signals.iter().zip(out.iter_mut()) {
            for chunk in data[pos..pos + 2 * sig.samples_per_record].chunks_exact(2) {
                samples.push(sig.to_physical(i16::from_le_bytes([chunk[0], chunk[1]])));
            }
            pos += 2 * sig.samples_per_record;
        }
    }
    Ok(EdfFile { header, signals: out })
}

fn push_text(buf: &mut Vec<u8>, text: &str, width: usize, field: &'static str) -> Result<(), EdfError> {
    if !text.is_ascii() || text.len() > width {
        return Err(EdfError::FieldOverflow {
            field,
            value: text.to_string(),
            width,
        });
    }
    buf.extend_from_slice(text.as_bytes());
    buf.extend(std::iter::repeat(b' ').take(width - text.len()));
    Ok(())
}

/// Shortest decimal form of `value` that parses back exactly and fits `width`.
fn format_number(value: f64, width: usize, field: &'static str) -> Result<String, EdfError> {
    let mut s = String::new();
    write!(s, "{value}").expect("formatting to String");
    if s.len() <= width {
        return Ok(s);
    }
    Err(EdfError::FieldOverflow { field, value: s, width })
}

pub fn write_edf(header: &EdfHeader, signals: &[Vec<f64>]) -> Result<Vec<u8>, EdfError> {
    header.validate()?;
    if signals.len() != header.num_signals() {
        return Err(EdfError::InvalidHeader(format!(
            "{} signal arrays for {} signal headers",
            signals.len(),
            header.num_signals()
        )));
    }
    for (i, (sig, samples)) in header.signals.iter().zip(signals).enumerate() {
        let expected = sig.samples_per_record * header.num_records;
        if samples.len() != expected {
            return Err(EdfError::SignalLength {
                signal: i,
                expected,
                actual: samples.len(),
            });
        }
        if let Some((index, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v >= sig.physical_min && v <= sig.physical_max))
        {
            return Err(EdfError::OutOfRange {
                signal: i,
                index,
                value,
                min: sig.physical_min,
                max: sig.physical_max,
            });
        }
    }

    let mut buf = Vec::with_capacity(header.header_bytes + header.record_bytes() * header.num_records);
    push_text(&mut buf, &header.version_tag, 8, "version")?;
    push_text(&mut buf, &header.patient_id, 80, "patient_id")?;
    push_text(&mut buf, &header.recording_id, 80, "recording_id")?;
    push_text(&mut buf, &header.start_date, 8, "start_date")?;
    push_text(&mut buf, &header.start_time, 8, "start_time")?;
    push_text(&mut buf, &header.header_bytes.to_string(), 8, "header_bytes")?;
    push_text(&mut buf, &header.reserved, 44, "reserved")?;
    push_text(&mut buf, &header.num_records.to_string(), 8, "num_records")?;
    let dur = format_number(header.record_duration_s, 8, "record_duration")?;
    push_text(&mut buf, &dur, 8, "record_duration")?;
    push_text(&mut buf, &header.num_signals().to_string(), 4, "num_signals")?;

    let sigs = &header.signals;
    for s in sigs {
        push_text(&mut buf, &s.label, 16, "label")?;
    }
    for s in sigs {
        push_text(&mut buf, &s.transducer, 80, "transducer")?;
    }
    for s in sigs {
        push_text(&mut buf, &s.physical_dim, 8, "physical_dim")?;
    }
    for s in sigs {
        let v = format_number(s.physical_min, 8, "physical_min")?;
        push_text(&mut buf, &v, 8, "physical_min")?;
    }
    for s in sigs {
        let v = format_number(s.physical_max, 8, "physical_max")?;
        push_text(&mut buf, &v, 8, "physical_max")?;
    }
    for s in sigs {
        push_text(&mut buf, &s.digital_min.to_string(), 8, "digital_min")?;
    }
    for s in sigs {
        push_text(&mut buf, &s.digital_max.to_string(), 8, "digital_max")?;
    }
    for s in sigs {
        push_text(&mut buf, &s.prefiltering, 80, "prefiltering")?;
    }
    for s in sigs {
        push_text(&mut buf, &s.samples_per_record.to_string(), 8, "samples_per_record")?;
    }
    for _ in sigs {
        push_text(&mut buf, "", 32, "reserved")?;
    }
    debug_assert_eq!(buf.len(), header.header_bytes);

    for r in 0..header.num_records {
        for (sig, samples) in sigs.iter().zip(signals) {
            let n = sig.samples_per_record;
            for &v in &samples[r * n..(r + 1) * n] {
                buf.extend_from_slice(&sig.to_digital(v).to_le_bytes());
            }
        }
    }
    Ok(buf)
}

pub fn read_edf_file(path: &Path) -> Result<EdfFile, EdfError> {
    let bytes = std::fs::read(path).map_err(|e| EdfError::Io(format!("{}: {e}", path.display())))?;
    parse_edf(&bytes)
}

pub fn write_edf_file(path: &Path, header: &EdfHeader, signals: &[Vec<f64>]) -> Result<(), EdfError> {
    let bytes = write_edf(header, signals)?;
    std::fs::write(path, bytes).map_err(|e| EdfError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal(spr: usize) -> SignalHeader {
        SignalHeader {
            label: "MER C".into(),
            transducer: "microelectrode".into(),
            physical_dim: "uV".into(),
            physical_min: -500.0,
            physical_max: 500.0,
            digital_min: -32768,
            digital_max: 32767,
            prefiltering: "".into(),
            samples_per_record: spr,
        }
    }

    #[test]
    fn header_region_size() {
        let h = EdfHeader::new("P1", "R1", 1, 1.0, vec![signal(4), signal(4)]);
        let bytes = write_edf(&h, &[vec![0.0; 4], vec![0.0; 4]]).unwrap();
        assert_eq!(h.header_bytes, 256 + 512);
        assert_eq!(bytes.len(), 768 + 16);
    }

    #[test]
    fn round_trip_20khz_two_records() {
        let h = EdfHeader::new("P01", "traj C depth -3.5", 2, 1.0, vec![signal(20_000)]);
        let samples: Vec<f64> = (0..40_000).map(|i| 100.0 * (i as f64 * 0.01).sin()).collect();
        let bytes = write_edf(&h, &[samples.clone()]).unwrap();
        let parsed = parse_edf(&bytes).unwrap();
        assert_eq!(parsed.header, h);
        assert_eq!(parsed.signals[0].len(), 40_000);
        let half = h.signals[0].quantum() / 2.0;
        for (a, b) in samples.iter().zip(&parsed.signals[0]) {
            assert!((a - b).abs() <= half + 1e-12);
        }
    }

    #[test]
    fn digital_min_maps_to_physical_min() {
        let s = signal(1);
        assert_eq!(s.to_physical(-32768), -500.0);
        assert_eq!(s.to_digital(-500.0), -32768);
    }

    #[test]
    fn constant_at_physical_min_stores_digital_min() {
        let h = EdfHeader::new("P", "R", 1, 1.0, vec![signal(8)]);
        let bytes = write_edf(&h, &[vec![-500.0; 8]]).unwrap();
        for chunk in bytes[h.header_bytes..].chunks_exact(2) {
            assert_eq!(i16::from_le_bytes([chunk[0], chunk[1]]), -32768);
        }
    }

    #[test]
    fn short_stream_is_truncated() {
        let err = parse_edf(&[b' '; 100]).unwrap_err();
        assert!(matches!(err, EdfError::Truncated { offset: 0, .. }));
    }

    #[test]
    fn rejects_out_of_range_values() {
        let h = EdfHeader::new("P", "R", 1, 1.0, vec![signal(2)]);
        let err = write_edf(&h, &[vec![0.0, 600.0]]).unwrap_err();
        assert!(matches!(err, EdfError::OutOfRange { index: 1, .. }));
    }

    #[test]
    fn non_numeric_field_reports_offset() {
        let h = EdfHeader::new("P", "R", 1, 1.0, vec![signal(2)]);
        let mut bytes = write_edf(&h, &[vec![0.0, 1.0]]).unwrap();
        bytes[236..244].copy_from_slice(b"abc     ");
        let err = parse_edf(&bytes).unwrap_err();
        assert_eq!(
            err,
            EdfError::NotNumeric {
                field: "num_records",
                offset: 236,
                text: "abc     ".into()
            }
        );
    }

    #[test]
    fn header_size_mismatch_detected() {
        let h = EdfHeader::new("P", "R", 1, 1.0, vec![signal(2)]);
        let mut bytes = write_edf(&h, &[vec![0.0, 1.0]]).unwrap();
        bytes[184..192].copy_from_slice(b"768     ");
        assert!(matches!(parse_edf(&bytes), Err(EdfError::HeaderSizeMismatch { declared: 768, .. })));
    }

    #[test]
    fn numeric_fields_tolerate_padding() {
        let h = EdfHeader::new("P", "R", 1, 1.0, vec![signal(2)]);
        let mut bytes = write_edf(&h, &[vec![0.0, 1.0]]).unwrap();
        bytes[236..244].copy_from_slice(b"   1    ");
        assert_eq!(parse_edf(&bytes).unwrap().header.num_records, 1);
    }

    #[test]
    fn truncated_data_region() {
        let h = EdfHeader::new("P", "R", 2, 1.0, vec![signal(4)]);
        let bytes = write_edf(&h, &[vec![0.0; 8]]).unwrap();
        let err = parse_edf(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, EdfError::Truncated { offset: 512, .. }));
    }
}
