//! Trace CSV files: fixed header, 17 significant digits, `\n` line endings.

use std::fmt::Write as _;
use std::path::Path;

use freegrad_core::TraceRecord;

use crate::error::{io_err, CliError};

pub const HEADER: &str = "t,k_t,gamma_k,h_t,eta_t,f_xt,grad_norm_sq,S_t,Gamma_sq,dist_to_x1,B_value";

/// Scientific notation with 17 significant digits; round-trips every `f64`.
fn num(out: &mut String, v: f64) {
    write!(out, ",{v:.16e}").expect("writing to a String cannot fail");
}

pub fn render(trace: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 + trace.len() * 240);
    out.push_str(HEADER);
    out.push('\n');
    for r in trace {
        write!(out, "{},{}", r.t, r.k_t).expect("writing to a String cannot fail");
        for v in [r.gamma_k, r.h_t, r.eta_t, r.f_xt, r.grad_norm_sq, r.s_t, r.gamma_sq, r.dist_to_x1, r.b_value] {
            num(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<(), CliError> {
    if trace.is_empty() {
        return Err(CliError::Io(format!("refusing to write an empty trace to {}", path.display())));
    }
    std::fs::write(path, render(trace)).map_err(|e| io_err("cannot write", path, e))
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("trace line {line}: {msg}"))
}

pub fn parse(text: &str) -> Result<Vec<TraceRecord>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let n = i + 2;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 11 {
                return Err(bad(n, format!("expected 11 columns, found {}", cols.len())));
            }
            let f = |j: usize| cols[j].parse::<f64>().map_err(|e| bad(n, e));
            Ok(TraceRecord {
                t: cols[0].parse().map_err(|e| bad(n, e))?,
                k_t: cols[1].parse().map_err(|e| bad(n, e))?,
                gamma_k: f(2)?,
                h_t: f(3)?,
                eta_t: f(4)?,
                f_xt: f(5)?,
                grad_norm_sq: f(6)?,
                s_t: f(7)?,
                gamma_sq: f(8)?,
                dist_to_x1: f(9)?,
                b_value: f(10)?,
            })
        })
        .collect()
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err("cannot read", path, e))?;
    parse(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: usize, x: f64) -> TraceRecord {
        TraceRecord {
            t,
            k_t: t as u32,
            gamma_k: x,
            h_t: f64::INFINITY,
            eta_t: 0.1 + 0.2,
            f_xt: -x / 3.0,
            grad_norm_sq: 5e-324,
            s_t: f64::MAX,
            gamma_sq: 0.0,
            dist_to_x1: std::f64::consts::PI,
            b_value: 1e300,
        }
    }

    #[test]
    fn three_rows_give_four_lines() {
        let text = render(&[rec(1, 1.0), rec(2, 2.0), rec(3, 3.0)]);
        assert_eq!(text.lines().count(), 4);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(text.lines().next(), Some(HEADER));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let trace: Vec<_> = (1..50).map(|t| rec(t, 1.0 / t as f64 + 1e-17 * t as f64)).collect();
        let back = parse(&render(&trace)).unwrap();
        for (a, b) in trace.iter().zip(&back) {
            assert_eq!(a.t, b.t);
            for (x, y) in [(a.gamma_k, b.gamma_k), (a.f_xt, b.f_xt), (a.h_t, b.h_t), (a.grad_norm_sq, b.grad_norm_sq)] {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            assert_eq!(a, b);
        }
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(parse("t,k\n").is_err());
        assert!(parse(&format!("{HEADER}\n1,2,3\n")).is_err());
        assert!(parse(&format!("{HEADER}\n1,1,x,1,1,1,1,1,1,1,1\n")).is_err());
    }
}
