//! File formats: the digit font, dataset and bank CSVs, annealing traces,
//! sweep results, and score report lines.
//!
//! The formats are small and rigid, so they are written and parsed by hand;
//! all floats are printed with fixed decimal counts to keep reruns
//! byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::SweepRow;
use crate::hopfield::MemoryBank;
use crate::mdl::MdlScore;
use crate::patterns::{Exemplar, Pattern, DIGIT_PIXELS, DIGIT_SIDE};
use crate::search::TraceEntry;

/// Reads a whole file, wrapping failures with the path.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a whole file, wrapping failures with the path.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    what: &str,
    path: &str,
    line: usize,
) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        path: path.to_string(),
        line,
        message: format!("invalid {what}: {field:?}"),
    })
}

/// Parses the digit-font format: blocks of 9 rows x 9 characters in {0,1},
/// separated by blank lines. `label` names the source in errors.
pub fn parse_font_str(src: &str, label: &str) -> Result<Vec<Pattern>> {
    let mut digits = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let mut flush = |block: &mut Vec<(usize, &str)>| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        if block.len() != DIGIT_SIDE {
            return Err(Error::Parse {
                path: label.to_string(),
                line: block[0].0,
                message: format!(
                    "digit block has {} rows, expected {DIGIT_SIDE}",
                    block.len()
                ),
            });
        }
        let mut bits = Vec::with_capacity(DIGIT_PIXELS);
        for (line, row) in block.drain(..) {
            if row.len() != DIGIT_SIDE {
                return Err(Error::Parse {
                    path: label.to_string(),
                    line,
                    message: format!("row has {} characters, expected {DIGIT_SIDE}", row.len()),
                });
            }
            for c in row.chars() {
                match c {
                    '0' => bits.push(0u8),
                    '1' => bits.push(1u8),
                    other => {
                        return Err(Error::Parse {
                            path: label.to_string(),
                            line,
                            message: format!("unexpected character {other:?}"),
                        })
                    }
                }
            }
        }
        digits.push(Pattern::from_bits(&bits)?);
        Ok(())
    };
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            flush(&mut block)?;
        } else {
            block.push((i + 1, line));
        }
    }
    flush(&mut block)?;
    if digits.is_empty() {
        return Err(Error::Parse {
            path: label.to_string(),
            line: 1,
            message: "no digit blocks found".to_string(),
        });
    }
    Ok(digits)
}

/// Renders bitmaps in the digit-font format.
pub fn format_font(digits: &[Pattern]) -> Result<String> {
    let mut out = String::new();
    for (i, digit) in digits.iter().enumerate() {
        if digit.size() != DIGIT_PIXELS {
            return Err(Error::SizeMismatch {
                expected: DIGIT_PIXELS,
                actual: digit.size(),
            });
        }
        if !digit.is_bitmap() {
            return Err(Error::PixelOutOfRange(0.5));
        }
        if i > 0 {
            out.push('\n');
        }
        for row in digit.pixels().chunks(DIGIT_SIDE) {
            for &v in row {
                out.push(if v == 1.0 { '1' } else { '0' });
            }
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn read_font(path: &Path) -> Result<Vec<Pattern>> {
    parse_font_str(&read_file(path)?, &path.display().to_string())
}

pub fn write_font(path: &Path, digits: &[Pattern]) -> Result<()> {
    write_file(path, &format_font(digits)?)
}

fn pixel_header(size: usize) -> String {
    (0..size).map(|i| format!(",p{i:02}")).collect()
}

fn push_pixels(out: &mut String, p: &Pattern) {
    for &v in p.pixels() {
        let _ = write!(out, ",{v:.6}");
    }
    out.push('\n');
}

/// Dataset CSV: `exemplar_id,source_class,p00,...` with 6-decimal pixels.
pub fn format_dataset(exemplars: &[Exemplar]) -> Result<String> {
    if exemplars.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let size = exemplars[0].pattern.size();
    let mut out = format!("exemplar_id,source_class{}\n", pixel_header(size));
    for (i, e) in exemplars.iter().enumerate() {
        let _ = write!(out, "{i},{}", e.source_class);
        push_pixels(&mut out, &e.pattern);
    }
    Ok(out)
}

pub fn write_dataset(path: &Path, exemplars: &[Exemplar]) -> Result<()> {
    write_file(path, &format_dataset(exemplars)?)
}

pub fn parse_dataset_str(src: &str, label: &str) -> Result<Vec<Exemplar>> {
    let mut lines = src.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: label.to_string(),
        line: 1,
        message: "empty dataset file".to_string(),
    })?;
    let columns = header.split(',').count();
    if columns < 3 {
        return Err(Error::Parse {
            path: label.to_string(),
            line: 1,
            message: "expected exemplar_id, source_class and pixel columns".to_string(),
        });
    }
    let size = columns - 2;
    let mut exemplars = Vec::new();
    for (i, row) in lines {
        let line = i + 1;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != columns {
            return Err(Error::Parse {
                path: label.to_string(),
                line,
                message: format!("row has {} fields, expected {columns}", fields.len()),
            });
        }
        let _id: usize = parse_field(fields[0], "exemplar_id", label, line)?;
        let source_class: usize = parse_field(fields[1], "source_class", label, line)?;
        let mut pixels = Vec::with_capacity(size);
        for field in &fields[2..] {
            pixels.push(parse_field::<f64>(field, "pixel", label, line)?);
        }
        let pattern = Pattern::new(pixels).map_err(|e| Error::Parse {
            path: label.to_string(),
            line,
            message: e.to_string(),
        })?;
        exemplars.push(Exemplar {
            pattern,
            source_class,
        });
    }
    if exemplars.is_empty() {
        return Err(Error::Parse {
            path: label.to_string(),
            line: 1,
            message: "dataset has no rows".to_string(),
        });
    }
    Ok(exemplars)
}

pub fn read_dataset(path: &Path) -> Result<Vec<Exemplar>> {
    parse_dataset_str(&read_file(path)?, &path.display().to_string())
}

/// Bank CSV: a `# beta=... slot_count=...` line, then the same pixel layout
/// as datasets keyed by slot id.
pub fn format_bank(bank: &MemoryBank) -> String {
    let size = bank.pattern_size();
    let mut out = format!(
        "# beta={:.6} slot_count={}\nslot_id{}\n",
        bank.beta(),
        bank.slot_count(),
        pixel_header(size)
    );
    for (i, m) in bank.memories().iter().enumerate() {
        let _ = write!(out, "{i}");
        push_pixels(&mut out, m);
    }
    out
}

pub fn write_bank(path: &Path, bank: &MemoryBank) -> Result<()> {
    write_file(path, &format_bank(bank))
}

pub fn parse_bank_str(src: &str, label: &str) -> Result<MemoryBank> {
    let mut lines = src.lines().enumerate();
    let (_, meta) = lines.next().ok_or_else(|| Error::Parse {
        path: label.to_string(),
        line: 1,
        message: "empty bank file".to_string(),
    })?;
    let mut beta = None;
    let mut slot_count = None;
    for token in meta.trim_start_matches('#').split_whitespace() {
        if let Some(v) = token.strip_prefix("beta=") {
            beta = Some(parse_field::<f64>(v, "beta", label, 1)?);
        } else if let Some(v) = token.strip_prefix("slot_count=") {
            slot_count = Some(parse_field::<usize>(v, "slot_count", label, 1)?);
        }
    }
    let (beta, slot_count) = match (beta, slot_count) {
        (Some(b), Some(s)) => (b, s),
        _ => {
            return Err(Error::Parse {
                path: label.to_string(),
                line: 1,
                message: "expected `# beta=<float> slot_count=<int>`".to_string(),
            })
        }
    };
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: label.to_string(),
        line: 2,
        message: "missing column header".to_string(),
    })?;
    let columns = header.split(',').count();
    let mut memories = Vec::with_capacity(slot_count);
    for (i, row) in lines {
        let line = i + 1;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != columns {
            return Err(Error::Parse {
                path: label.to_string(),
                line,
                message: format!("row has {} fields, expected {columns}", fields.len()),
            });
        }
        let _slot: usize = parse_field(fields[0], "slot_id", label, line)?;
        let mut pixels = Vec::with_capacity(columns - 1);
        for field in &fields[1..] {
            pixels.push(parse_field::<f64>(field, "pixel", label, line)?);
        }
        memories.push(Pattern::new(pixels).map_err(|e| Error::Parse {
            path: label.to_string(),
            line,
            message: e.to_string(),
        })?);
    }
    if memories.len() != slot_count {
        return Err(Error::Parse {
            path: label.to_string(),
            line: 1,
            message: format!(
                "header claims {slot_count} slots but file has {}",
                memories.len()
            ),
        });
    }
    MemoryBank::new(memories, beta).map_err(|e| Error::Parse {
        path: label.to_string(),
        line: 1,
        message: e.to_string(),
    })
}

pub fn read_bank(path: &Path) -> Result<MemoryBank> {
    parse_bank_str(&read_file(path)?, &path.display().to_string())
}

/// Trace CSV: one row per annealing step.
pub fn format_trace(trace: &[TraceEntry]) -> String {
    let mut out = String::from("step,temperature,slot_count,g_bits,d_given_g_bits,total_bits\n");
    for t in trace {
        let _ = writeln!(
            out,
            "{},{:.6},{},{:.6},{:.6},{:.6}",
            t.step, t.temperature, t.slot_count, t.g_bits, t.d_given_g_bits, t.total_bits
        );
    }
    out
}

pub fn write_trace(path: &Path, trace: &[TraceEntry]) -> Result<()> {
    write_file(path, &format_trace(trace))
}

fn opt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Results CSV: one aggregated row per sweep condition.
pub fn format_results(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "class_count,exemplars_per_digit,type,noise,regime,\
         mean_slots,sd_slots,mean_l2_golden,mean_total_bits\n",
    );
    for row in rows {
        let c = &row.condition;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            c.class_count,
            c.exemplars_per_digit,
            c.exemplar_type,
            c.noise,
            c.regime,
            opt4(row.mean_slots),
            opt4(row.sd_slots),
            opt4(row.mean_l2_golden),
            opt4(row.mean_total_bits),
        );
    }
    out
}

pub fn write_results(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_file(path, &format_results(rows))
}

pub const SCORE_HEADER: &str = "run_id,slot_count,g_bits,d_given_g_bits,total_bits";

/// One score report line, 4 decimal places.
pub fn format_score_line(run_id: &str, slot_count: usize, score: &MdlScore) -> String {
    format!(
        "{run_id},{slot_count},{:.4},{:.4},{:.4}",
        score.g_bits, score.d_given_g_bits, score.total_bits
    )
}
