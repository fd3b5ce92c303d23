use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "snr_db,frames,info_bits,bit_errors,ber,ci95";

#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    /// Eb/N0 in dB, or the crossover probability for a BSC sweep.
    pub snr_db: f64,
    pub frames: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Normal-approximation 95% confidence half-width of `ber`.
    pub ci95: f64,
}

impl BerRow {
    pub fn new(snr_db: f64, frames: u64, info_bits: u64, bit_errors: u64) -> BerRow {
        let ber = if info_bits == 0 { 0.0 } else { bit_errors as f64 / info_bits as f64 };
        let ci95 = if info_bits == 0 {
            0.0
        } else {
            1.96 * (ber * (1.0 - ber) / info_bits as f64).sqrt()
        };
        BerRow {
            snr_db,
            frames,
            info_bits,
            bit_errors,
            ber,
            ci95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BerReport {
    pub rows: Vec<BerRow>,
    /// `key = value` lines describing the run.
    pub config: Vec<(String, String)>,
    pub seed: u64,
}

impl BerReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "# seed = {}", self.seed);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e}",
                r.snr_db, r.frames, r.info_bits, r.bit_errors, r.ber, r.ci95
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<BerReport> {
        let mut report = BerReport::default();
        let mut header_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line_no = Some(i + 1);
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    let (k, v) = (k.trim(), v.trim());
                    if k == "seed" {
                        report.seed = v
                            .parse()
                            .map_err(|_| Error::config(line_no, format!("bad seed '{v}'")))?;
                    } else {
                        report.config.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            if !header_seen {
                if line != CSV_HEADER {
                    return Err(Error::config(line_no, format!("expected header '{CSV_HEADER}'")));
                }
                header_seen = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(Error::config(line_no, format!("expected 6 fields, found {}", fields.len())));
            }
            let float = |s: &str| s.parse::<f64>().map_err(|_| Error::config(line_no, format!("bad number '{s}'")));
            let int = |s: &str| s.parse::<u64>().map_err(|_| Error::config(line_no, format!("bad count '{s}'")));
            report.rows.push(BerRow {
                snr_db: float(fields[0])?,
                frames: int(fields[1])?,
                info_bits: int(fields[2])?,
                bit_errors: int(fields[3])?,
                ber: float(fields[4])?,
                ci95: float(fields[5])?,
            });
        }
        if !header_seen {
            return Err(Error::config(None, "missing CSV header"));
        }
        Ok(report)
    }
}

/// Gaussian tail probability Q(x) = P(Z > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// SNR at which the report's BER curve crosses `target`, interpolating
/// linearly in (dB, log10 BER) between the first bracketing pair of rows.
pub fn crossing(report: &BerReport, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::TargetNotBracketed(target));
    }
    for w in report.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ber == target {
            return Ok(a.snr_db);
        }
        if a.ber > target && b.ber <= target {
            if b.ber == target {
                return Ok(b.snr_db);
            }
            if b.ber == 0.0 {
                break;
            }
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            return Ok(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db));
        }
    }
    match report.rows.last() {
        Some(r) if r.ber == target => Ok(r.snr_db),
        _ => Err(Error::TargetNotBracketed(target)),
    }
}

/// Reduction in required SNR of `coded` relative to `reference` at `target` BER.
pub fn coding_gain(coded: &BerReport, reference: &BerReport, target: f64) -> Result<f64> {
    Ok(crossing(reference, target)? - crossing(coded, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(shift: f64) -> BerReport {
        let rows = (0..8)
            .map(|i| {
                let snr = i as f64;
                let mut r = BerRow::new(snr + shift, 1, 1_000_000, 1);
                r.ber = q_function((2.0 * 10f64.powf(snr / 10.0)).sqrt());
                r
            })
            .collect();
        BerReport {
            rows,
            config: vec![],
            seed: 1,
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut rep = curve(0.0);
        rep.config.push(("system".into(), "uncoded".into()));
        rep.seed = 99;
        let text = rep.to_csv();
        assert!(text.contains("\nsnr_db,frames,info_bits,bit_errors,ber,ci95\n"));
        let back = BerReport::from_csv(&text).unwrap();
        assert_eq!(back, rep);
        assert!(BerReport::from_csv("1,2,3\n").is_err());
    }

    #[test]
    fn gain_of_shifted_curves() {
        let a = curve(0.0);
        assert_eq!(coding_gain(&a, &a, 1e-3).unwrap(), 0.0);
        let g = coding_gain(&a, &curve(2.0), 1e-3).unwrap();
        assert!((g - 2.0).abs() < 1e-12);
        assert!(matches!(coding_gain(&a, &a, 1e-30), Err(Error::TargetNotBracketed(_))));
    }

    #[test]
    fn q_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-16);
        assert!((q_function(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
    }
}
