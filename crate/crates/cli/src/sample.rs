//! CSV sampling of a construction along a t-line or on an (x, y) slice.

use std::f64::consts::TAU;
use std::io::Write;

use anyhow::{bail, Result};
use clap::ValueEnum;
use superdecay::{Construction, LogScalar, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// `sup |u|` (and `|B|` for the parabolic chain) at evenly spaced times.
    Tline,
    /// `u` and the coefficient entries on an n x n grid of the torus at one time.
    Slice,
}

/// 17 significant digits, enough to read every f64 back exactly.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn log_pair(v: LogScalar) -> [String; 2] {
    [v.sign().to_string(), num(v.logmag())]
}

/// `u` at scale `e^{scale}` as a log-domain value.
fn rescaled(u: f64, scale: f64) -> LogScalar {
    LogScalar::from_f64(u) * LogScalar::exp(scale)
}

pub fn write_tline<W: Write>(c: &Construction, points: usize, out: W) -> Result<()> {
    if points < 2 {
        bail!("a t-line needs at least 2 points, got {points}");
    }
    let (t0, t1) = c.t_range();
    let mut w = csv::Writer::from_writer(out);
    let parabolic = matches!(c, Construction::Parabolic(_));
    let mut header = vec!["t", "sup_sign", "sup_logmag"];
    if parabolic {
        header.push("drift_abs");
    }
    w.write_record(&header)?;
    for i in 0..points {
        let t = if i + 1 == points { t1 } else { t0 + (t1 - t0) * i as f64 / (points - 1) as f64 };
        let mut row = vec![num(t)];
        match c {
            Construction::Elliptic(tl) => row.extend(log_pair(tl.sup(t)?)),
            Construction::Parabolic(chain) => {
                let b = &chain.blocks[chain.locate(t, Side::Right)?];
                row.extend(log_pair(b.sup(t)));
                row.push(num(b.drift_magnitude(t)));
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_slice<W: Write>(c: &Construction, n: usize, t: f64, out: W) -> Result<()> {
    if n == 0 {
        bail!("a slice needs at least one point per side");
    }
    let mut w = csv::Writer::from_writer(out);
    let grid = |i: usize| TAU * i as f64 / n as f64;
    match c {
        Construction::Elliptic(tl) => {
            w.write_record(["x", "y", "t", "u_sign", "u_logmag", "a_xx", "a_xy", "a_yy"])?;
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (grid(i), grid(j));
                    let e = tl.eval(x, y, t)?;
                    let scale = e.field.common_scale();
                    let u = rescaled(e.field.point(x, y, scale).u, scale);
                    let a = e.coeff.value;
                    let mut row = vec![num(x), num(y), num(t)];
                    row.extend(log_pair(u));
                    row.extend([num(a.xx), num(a.xy), num(a.yy)]);
                    w.write_record(&row)?;
                }
            }
        }
        Construction::Parabolic(chain) => {
            w.write_record(["x", "y", "t", "re_u_sign", "re_u_logmag", "im_u_sign", "im_u_logmag", "drift_abs"])?;
            for i in 0..n {
                for j in 0..n {
                    let (x, y) = (grid(i), grid(j));
                    let e = chain.eval(x, y, t)?;
                    let p = e.point;
                    let mut row = vec![num(x), num(y), num(t)];
                    row.extend(log_pair(rescaled(p.u.re, e.scale)));
                    row.extend(log_pair(rescaled(p.u.im, e.scale)));
                    row.push(num((p.drift[0].norm_sqr() + p.drift[1].norm_sqr()).sqrt()));
                    w.write_record(&row)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}
