//! Result bundles: deterministic, machine-readable JSON with every float
//! printed at 17 significant digits so output round-trips bit-exactly and
//! repeated runs produce byte-identical bytes.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

/// JSON formatter printing floats as `d.dddddddddddddddde[sign]dd` (17
/// significant digits, a valid JSON number) with pretty two-space indenting.
pub struct SigDigits17 {
    indent: usize,
    has_value: bool,
}

impl SigDigits17 {
    pub fn new() -> Self {
        SigDigits17 {
            indent: 0,
            has_value: false,
        }
    }

    fn newline<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for SigDigits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// 17-significant-digit float form, valid as a JSON number.
pub fn format_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        // Bundles never carry non-finite values; keep the output valid JSON.
        "null".to_string()
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17::new());
    value
        .serialize(&mut ser)
        .expect("bundle serialization cannot fail");
    String::from_utf8(out).expect("bundle output is UTF-8")
}

// ---------------------------------------------------------------------------
// Bundle schema
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct Bundle {
    pub tool: ToolInfo,
    pub command: String,
    pub input: InputInfo,
    pub options: OptionsEcho,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pencil: Option<PencilInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_structure: Option<ExactStructure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<SeriesTable>,
    /// Central-difference residual of the emitted trajectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_check: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crosscheck: Option<CrosscheckInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discretization: Option<DiscretizationInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrete_samples: Option<SeriesTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fractional: Option<FractionalInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<CorrespondenceInfo>,
}

#[derive(Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "desys",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Serialize)]
pub struct InputInfo {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct OptionsEcho {
    pub scalar_mode: &'static str,
    pub rank_tol: f64,
    pub residual_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub project: bool,
    pub crosscheck: bool,
}

#[derive(Serialize)]
pub struct PencilInfo {
    pub m: usize,
    pub regular: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_polynomial: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_star: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite_eigenvalues: Option<Vec<EigenvalueInfo>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_residual_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_residual_g: Option<f64>,
}

#[derive(Serialize)]
pub struct EigenvalueInfo {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

/// Exact-arithmetic structure; rationals rendered as `num/den` strings.
#[derive(Serialize)]
pub struct ExactStructure {
    pub det_polynomial: Vec<String>,
    pub finite_divisors: Vec<ExactDivisor>,
    pub infinite_divisors: Vec<usize>,
    pub p: usize,
    pub q: usize,
    pub q_star: usize,
}

#[derive(Serialize)]
pub struct ExactDivisor {
    pub re: String,
    pub im: String,
    pub power: usize,
}

#[derive(Serialize)]
pub struct ConsistencyInfo {
    pub consistent: bool,
    pub defect: f64,
    pub projected_y0: Vec<f64>,
    pub projection_applied: bool,
}

/// Indexed/time-stamped table of state vectors.
#[derive(Serialize)]
pub struct SeriesTable {
    pub axis: &'static str,
    pub index: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

#[derive(Serialize)]
pub struct CrosscheckInfo {
    pub max_route_deviation: f64,
}

#[derive(Serialize)]
pub struct DiscretizationInfo {
    pub period: f64,
    pub transition: Vec<Vec<f64>>,
    pub slow_input_map: Vec<Vec<f64>>,
    pub fast_coeffs: Vec<Vec<Vec<f64>>>,
    pub q_star: usize,
    pub memory_depth: usize,
    pub prehistory_backfilled: bool,
}

#[derive(Serialize)]
pub struct FractionalInfo {
    pub order_n: f64,
    pub step_matrix_invertible: bool,
    pub max_equation_residual: f64,
}

#[derive(Serialize)]
pub struct ComparisonInfo {
    /// max_k |Y_cont(kT) - Y_disc_k| per step.
    pub continuous_vs_discrete: Vec<f64>,
    pub max_continuous_vs_discrete: f64,
}

#[derive(Serialize)]
pub struct CorrespondenceInfo {
    pub requested_order: f64,
    pub per_lag_delta: Vec<f64>,
    pub max_delta: f64,
    pub lag1_delta: f64,
    pub best_fit_order: f64,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregated_inputs: Option<Vec<Vec<f64>>>,
}

/// CSV export: `index/time, y_0, ..., y_{m-1}` rows at 17 significant digits.
pub fn to_csv(table: &SeriesTable) -> String {
    let m = table.states.first().map_or(0, Vec::len);
    let mut out = String::new();
    out.push_str(table.axis);
    for i in 0..m {
        out.push_str(&format!(",y{i}"));
    }
    out.push('\n');
    for (idx, state) in table.index.iter().zip(table.states.iter()) {
        out.push_str(&format_f64(*idx));
        for x in state {
            out.push(',');
            out.push_str(&format_f64(*x));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        assert_eq!(format_f64(-0.25), "-2.5000000000000000e-1");
    }

    #[test]
    fn formatted_floats_round_trip() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 1e-17, -123456.789, 0.0] {
            let s = format_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn json_output_parses_back() {
        #[derive(Serialize)]
        struct Demo {
            values: Vec<f64>,
            name: &'static str,
        }
        let s = to_json_string(&Demo {
            values: vec![1.5, -2.25],
            name: "demo",
        });
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["values"][0].as_f64(), Some(1.5));
        assert_eq!(v["name"].as_str(), Some("demo"));
    }

    #[test]
    fn csv_shape() {
        let table = SeriesTable {
            axis: "time",
            index: vec![0.0, 0.5],
            states: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        };
        let csv = to_csv(&table);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "time,y0,y1");
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
    }
}
