//! Angle syntax: plain decimals (`0.785`) or rational multiples of π
//! (`pi`, `-pi/2`, `3pi/4`, `3*pi/4`, `0.5pi`). Values are reduced to
//! `[0, 2π)`.

use std::f64::consts::{PI, TAU};

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.trim().chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    if s.is_empty() {
        return Err("empty angle".into());
    }
    let raw = if let Some(pos) = s.find("pi") {
        let head = s[..pos].trim_end_matches('*');
        let tail = &s[pos + 2..];
        let coef = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad(text))?,
        };
        let den = if tail.is_empty() {
            1.0
        } else if let Some(d) = tail.strip_prefix('/') {
            d.parse::<f64>().map_err(|_| bad(text))?
        } else {
            return Err(bad(text));
        };
        if den == 0.0 {
            return Err(format!("division by zero in angle '{text}'"));
        }
        coef * PI / den
    } else {
        s.parse::<f64>().map_err(|_| bad(text))?
    };
    if !raw.is_finite() {
        return Err(bad(text));
    }
    let mut t = raw.rem_euclid(TAU);
    if t >= TAU {
        t = 0.0;
    }
    Ok(t)
}

pub fn parse_angle_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_angle).collect()
}

fn bad(text: &str) -> String {
    format!("cannot parse angle '{text}'")
}
