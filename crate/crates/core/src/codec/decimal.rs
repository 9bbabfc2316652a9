//! Fixed-point rendering with half-away-from-zero rounding applied to the
//! shortest decimal representation of the value.

/// Format `x` with exactly `places` decimals.
///
/// The rounding acts on the decimal digits Rust prints for `x` (the shortest
/// string that round-trips), so `0.0005` becomes `0.001` even though the
/// nearest binary double is slightly below one half-unit.
pub fn fixed(x: f64, places: usize) -> String {
    assert!(x.is_finite(), "cannot format non-finite value");
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.extend((0..places).map(|i| frac.get(i).copied().unwrap_or(0)));

    if frac.get(places).is_some_and(|&d| d >= 5) {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - places;
    debug_assert!(split >= int_len);
    let render = |ds: &[u8]| ds.iter().map(|d| (d + b'0') as char).collect::<String>();
    let mut out = String::new();
    let is_zero = digits.iter().all(|&d| d == 0);
    if x.is_sign_negative() && !is_zero {
        out.push('-');
    }
    out.push_str(&render(&digits[..split]));
    if places > 0 {
        out.push('.');
        out.push_str(&render(&digits[split..]));
    }
    out
}

/// A fractional coordinate reduced to `[0, 1)` and printed with three
/// decimals. A value that rounds up to `1.000` is printed as `0.000`.
pub fn coordinate(x: f64) -> String {
    let s = fixed(crate::crystal::wrap01(x), 3);
    if s == "1.000" {
        "0.000".to_string()
    } else {
        s
    }
}

/// The value [`coordinate`] prints, parsed back.
pub fn round_coordinate(x: f64) -> f64 {
    coordinate(x).parse().expect("formatted decimal")
}

pub fn round_to(x: f64, places: usize) -> f64 {
    fixed(x, places).parse().expect("formatted decimal")
}
