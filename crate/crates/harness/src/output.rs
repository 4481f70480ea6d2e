//! Deterministic result files: CSV with LF line endings and JSON with
//! sorted keys, so identical configs produce byte-identical outputs.

use std::fs;
use std::path::Path;

use serde::Serialize;

/// Shortest round-trip decimal form; the same bits always print the same
/// bytes.
pub fn cell_f64(v: f64) -> String {
    format!("{v}")
}

pub fn cell_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cell_opt_f64(v: Option<f64>) -> String {
    v.map(cell_f64).unwrap_or_default()
}

pub fn cell_bool(v: bool) -> String {
    if v { "true" } else { "false" }.to_string()
}

/// Writes a header row plus data rows, UTF-8, LF only.
pub fn write_csv<P: AsRef<Path>>(
    path: P,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), String> {
    let path = path.as_ref();
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| format!("write {}: {e}", path.display()))
}

/// Serializes through a value tree so object keys come out sorted, then
/// pretty-prints with a trailing newline.
pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> Result<(), String> {
    let path = path.as_ref();
    let tree =
        serde_json::to_value(value).map_err(|e| format!("serialize {}: {e}", path.display()))?;
    let mut text = serde_json::to_string_pretty(&tree)
        .map_err(|e| format!("serialize {}: {e}", path.display()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("write {}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_lf_terminated_and_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![vec!["0".to_string(), cell_f64(0.1 + 0.2)]];
        write_csv(&path, &["step", "value"], rows.clone()).unwrap();
        let a = std::fs::read(&path).unwrap();
        assert_eq!(
            String::from_utf8(a.clone()).unwrap(),
            "step,value\n0,0.30000000000000004\n"
        );
        write_csv(&path, &["step", "value"], rows).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), a);
    }

    #[test]
    fn json_keys_are_sorted() {
        #[derive(Serialize)]
        struct Sample {
            zebra: u32,
            apple: u32,
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        write_json(&path, &Sample { zebra: 1, apple: 2 }).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.find("apple").unwrap() < text.find("zebra").unwrap());
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn optional_cells_render_empty() {
        assert_eq!(cell_opt_usize(None), "");
        assert_eq!(cell_opt_usize(Some(3)), "3");
        assert_eq!(cell_opt_f64(None), "");
        assert_eq!(cell_bool(true), "true");
    }
}
