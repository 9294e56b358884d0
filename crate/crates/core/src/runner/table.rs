use super::Format;

/// Token written for undefined values in CSV output.
pub const UNDEFINED: &str = "undefined";

/// A rectangular result table with optional (undefined) cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// 17 significant digits, so values round-trip exactly.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Some(x) => format!("{x:.16e}"),
                    None => UNDEFINED.to_string(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `{"columns": [...], "rows": [[...], ...]}` with `null` for undefined cells.
    pub fn to_json(&self) -> String {
        let value = serde_json::json!({ "columns": self.columns, "rows": self.rows });
        serde_json::to_string_pretty(&value).expect("table is plain data") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![Some(0.1), None]);
        t.push(vec![Some(-2.0), Some(1.0 / 3.0)]);
        t
    }

    #[test]
    fn csv_format() {
        assert_eq!(
            sample().to_csv(),
            "x,y\n1.0000000000000001e-1,undefined\n-2.0000000000000000e0,3.3333333333333331e-1\n"
        );
        let parsed: f64 = "3.3333333333333331e-1".parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
    }

    #[test]
    fn json_uses_null() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert!(v["rows"][0][1].is_null());
        assert_eq!(v["columns"][1], "y");
    }
}
