//! Minimal CSV emission with deterministic number formatting.
//!
//! Floats are rendered with Rust's shortest-round-trip formatting, so the
//! files are byte-identical across runs with the same configuration and
//! seed, and parse back to exactly the same values.

use std::fmt::Write as _;

/// Shortest round-trip rendering of a float; `NaN` renders as `nan`,
/// infinities as `inf` / `-inf`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

/// Row-by-row CSV builder with a fixed column count.
#[derive(Debug)]
pub struct Csv {
    columns: usize,
    out: String,
}

impl Csv {
    /// Starts a CSV with the given header.
    pub fn new(header: &[&str]) -> Self {
        assert!(!header.is_empty(), "CSV needs at least one column");
        let mut out = String::new();
        out.push_str(&header.join(","));
        out.push('\n');
        Self {
            columns: header.len(),
            out,
        }
    }

    /// Appends a row of preformatted cells.
    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(
            cells.len(),
            self.columns,
            "row width does not match header"
        );
        let mut first = true;
        for cell in cells {
            debug_assert!(
                !cell.contains(',') && !cell.contains('\n'),
                "cell needs quoting: {cell:?}"
            );
            if !first {
                self.out.push(',');
            }
            self.out.push_str(cell);
            first = false;
        }
        self.out.push('\n');
    }

    /// Appends a row of floats via [`fmt_f64`].
    pub fn row_f64(&mut self, cells: &[f64]) {
        let rendered: Vec<String> = cells.iter().map(|x| fmt_f64(*x)).collect();
        self.row(&rendered);
    }

    /// Appends one integer cell followed by float cells.
    pub fn row_idx_f64(&mut self, idx: usize, cells: &[f64]) {
        let mut rendered = Vec::with_capacity(cells.len() + 1);
        let mut first = String::new();
        let _ = write!(first, "{idx}");
        rendered.push(first);
        rendered.extend(cells.iter().map(|x| fmt_f64(*x)));
        self.row(&rendered);
    }

    /// Finishes the file (always ends with a trailing newline).
    pub fn finish(self) -> String {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1.0), "1");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(-0.5), "-0.5");
        let x = 0.26359713811572677;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&["j", "s"]);
        csv.row_idx_f64(0, &[1.0]);
        csv.row_f64(&[2.0, 2.718281828459045]);
        assert_eq!(csv.finish(), "j,s\n0,1\n2,2.718281828459045\n");
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn row_width_checked() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row(&["1".to_string()]);
    }
}
