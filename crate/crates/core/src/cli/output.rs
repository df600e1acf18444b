//! JSON and CSV writers. Floats are written with 17 significant digits so
//! every value parses back to the same bits.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

struct FullPrecision<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        if v.is_finite() {
            w.write_all(format_float(v).as_bytes())
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Numerics(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// One row of the conservatism table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub kernel_id: String,
    pub alpha_cert: f64,
    #[serde(rename = "C_cert")]
    pub c_cert: f64,
    pub empirical: f64,
    pub conservatism: Option<f64>,
    pub pass: bool,
}

pub const CSV_HEADER: [&str; 6] = ["kernel_id", "alpha_cert", "C_cert", "empirical", "conservatism", "pass"];

pub fn write_csv(path: &Path, rows: &[CsvRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.kernel_id.clone(),
            format_float(r.alpha_cert),
            format_float(r.c_cert),
            format_float(r.empirical),
            r.conservatism.map(format_float).unwrap_or_default(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()
}
