//! CSV output: header row, LF endings, reals with 17 significant digits.

use std::fmt::Write;

/// Plain decimal with 17 significant digits, switching to scientific
/// notation for very large or very small magnitudes.
pub fn real(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific format has an exponent");
    if (-4..17).contains(&exp) {
        format!("{v:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

pub struct Table {
    out: String,
    columns: usize,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self {
            out,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[Field]) {
        debug_assert_eq!(fields.len(), self.columns);
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            match f {
                Field::Real(v) => self.out.push_str(&real(*v)),
                Field::Int(v) => write!(self.out, "{v}").expect("writing to a String"),
                Field::Text(s) => self.out.push_str(s),
                Field::Empty => {}
            }
        }
        self.out.push('\n');
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

#[derive(Debug, Clone)]
pub enum Field {
    Real(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Real(v)
    }
}

impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Empty, Field::Real)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(real(0.7), "0.69999999999999996");
        assert_eq!(real(0.31606027941427883), "0.31606027941427883");
        assert_eq!(real(1.0), "1.0000000000000000");
        assert_eq!(real(-2.5e-3), "-0.0025000000000000001");
        assert_eq!(real(2.5e-5), "2.5000000000000001e-5");
        assert_eq!(real(1.5e-9), "1.5000000000000000e-9");
        assert_eq!(real(0.0), "0");
        for v in [0.1, 1.0 / 3.0, 123.456, 9.87654321e-12, 6.02e23] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.row(&[Field::Int(3), "x".into(), Field::Empty]);
        assert_eq!(t.into_string(), "a,b,c\n3,x,\n");
    }
}
