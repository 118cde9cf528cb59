//! Plain-text output formats shared by every curve type.

/// Scientific notation with 17 significant digits, `.` as decimal point.
pub fn format_sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Two-column CSV with the given header; `\n` line endings, no trailing
/// blank line beyond the final newline.
pub fn two_column_csv(header: (&str, &str), xs: &[f64], ys: &[f64]) -> String {
    table_csv(&[header.0, header.1], &[xs, ys])
}

/// CSV with one column per slice, all of equal length.
pub fn table_csv(header: &[&str], columns: &[&[f64]]) -> String {
    assert_eq!(header.len(), columns.len(), "header/column count mismatch");
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
    let mut out = String::with_capacity(24 * columns.len() * (rows + 1));
    out.push_str(&header.join(","));
    out.push('\n');
    for r in 0..rows {
        for (i, c) in columns.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_sci(c[r]));
        }
        out.push('\n');
    }
    out
}

/// Parses a two-column CSV written by [`two_column_csv`], checking the header.
pub fn parse_two_column_csv(text: &str, header: (&str, &str)) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut lines = text.lines();
    let expected = format!("{},{}", header.0, header.1);
    match lines.next() {
        Some(h) if h.trim() == expected => {}
        other => return Err(format!("expected header {expected:?}, got {other:?}")),
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected two columns", i + 2))?;
        xs.push(a.trim().parse().map_err(|e| format!("line {}: {e}", i + 2))?);
        ys.push(b.trim().parse().map_err(|e| format!("line {}: {e}", i + 2))?);
    }
    Ok((xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_sci(0.1), "1.0000000000000001e-1");
        assert_eq!(format_sci(-2.5e-5), "-2.5000000000000001e-5");
        assert_eq!(format_sci(1e6), "1.0000000000000000e6");
    }

    #[test]
    fn table_layout() {
        let t = table_csv(&["omega", "a", "b"], &[&[0.0, 1.0], &[2.0, 3.0], &[-1.0, 0.5]]);
        assert_eq!(
            t,
            "omega,a,b\n0.0000000000000000e0,2.0000000000000000e0,-1.0000000000000000e0\n\
             1.0000000000000000e0,3.0000000000000000e0,5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let xs = [-3.0, 0.0, 1.0 / 3.0];
        let ys = [std::f64::consts::PI, 1e-300, 2.5e-5];
        let text = two_column_csv(("omega", "value"), &xs, &ys);
        assert!(text.starts_with("omega,value\n"));
        assert!(!text.contains('\r'));
        let (a, b) = parse_two_column_csv(&text, ("omega", "value")).unwrap();
        assert_eq!(a, xs);
        assert_eq!(b, ys);
    }
}
