//! JSON encoding of POVMs and Kraus channels.
//!
//! POVM files look like
//!
//! ```json
//! { "dim": 2, "operators": [ [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]], ... ] }
//! ```
//!
//! where each operator is its row-major list of `[re, im]` pairs. Channel files use
//! `{ "dim_in": d′, "dim_out": d, "kraus": [...] }` with each Kraus operator stored
//! row-major as a `dim_out × dim_in` list of pairs.
//!
//! Writers emit every float in scientific notation with 17 significant digits and
//! normalize `-0` to `0`, so output bytes depend only on the numeric values.

use num_complex::Complex64;
use serde::Deserialize;

use super::{KrausChannel, Povm};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Hermitian};

/// Float formatted with 17 significant digits (round-trip exact).
pub fn format_f64(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    out.push('[');
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i + j > 0 {
                out.push_str(", ");
            }
            let z = m[(i, j)];
            out.push('[');
            out.push_str(&format_f64(z.re));
            out.push_str(", ");
            out.push_str(&format_f64(z.im));
            out.push(']');
        }
    }
    out.push(']');
}

pub fn povm_to_json(povm: &Povm) -> String {
    let mut out = format!("{{\n  \"dim\": {},\n  \"operators\": [\n", povm.dim());
    for (a, e) in povm.operators().iter().enumerate() {
        out.push_str("    ");
        write_matrix(&mut out, e.matrix());
        out.push_str(if a + 1 < povm.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn channel_to_json(channel: &KrausChannel) -> String {
    let mut out = format!(
        "{{\n  \"dim_in\": {},\n  \"dim_out\": {},\n  \"kraus\": [\n",
        channel.dim_in(),
        channel.dim_out()
    );
    for (j, k) in channel.kraus().iter().enumerate() {
        out.push_str("    ");
        write_matrix(&mut out, k);
        out.push_str(if j + 1 < channel.kraus().len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

#[derive(Deserialize)]
struct PovmFile {
    dim: usize,
    operators: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct ChannelFile {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Vec<[f64; 2]>>,
}

fn read_matrix(rows: usize, cols: usize, entries: &[[f64; 2]]) -> Result<CMatrix> {
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries for a {rows}x{cols} matrix, got {}",
            rows * cols,
            entries.len()
        )));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = entries[i * cols + j];
        Complex64::new(re, im)
    }))
}

/// Parses a POVM file. Only structure is checked; call [`Povm::validate`] for
/// positivity and completeness.
pub fn povm_from_json(text: &str) -> Result<Povm> {
    let file: PovmFile = serde_json::from_str(text)?;
    if file.dim == 0 {
        return Err(Error::Parse("dim must be positive".into()));
    }
    let ops = file
        .operators
        .iter()
        .map(|entries| Hermitian::new(read_matrix(file.dim, file.dim, entries)?))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(ops)
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let file: ChannelFile = serde_json::from_str(text)?;
    let kraus = file
        .kraus
        .iter()
        .map(|entries| read_matrix(file.dim_out, file.dim_in, entries))
        .collect::<Result<Vec<_>>>()?;
    KrausChannel::new(kraus)
}
