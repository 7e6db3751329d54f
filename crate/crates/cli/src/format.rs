//! Matrix file formats: Matrix Market array files for interchange and a
//! native little-endian binary for bit-exact round trips.

use ndarray::Array2;
use quadembed_core::{c64, Error, Result};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// A dense matrix whose field is only known at runtime.
#[derive(Debug, Clone)]
pub enum MatrixData {
    Real(Array2<f64>),
    Complex(Array2<c64>),
}

impl MatrixData {
    pub fn dim(&self) -> (usize, usize) {
        match self {
            MatrixData::Real(a) => a.dim(),
            MatrixData::Complex(a) => a.dim(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, MatrixData::Complex(_))
    }

    pub fn to_complex(&self) -> Array2<c64> {
        match self {
            MatrixData::Real(a) => a.mapv(|x| c64::new(x, 0.0)),
            MatrixData::Complex(a) => a.clone(),
        }
    }

    pub fn as_real(&self) -> Result<Array2<f64>> {
        match self {
            MatrixData::Real(a) => Ok(a.clone()),
            MatrixData::Complex(_) => Err(Error::FieldMismatch(
                "complex matrix where a real one is required".into(),
            )),
        }
    }
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    MatrixMarket,
    Native,
}

impl FileFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FileFormat::MatrixMarket => "mtx",
            FileFormat::Native => "qmb",
        }
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Write in Matrix Market array format (column-major, `%%MatrixMarket` header).
pub fn write_matrix_market<W: Write>(w: &mut W, m: &MatrixData, comment: &str) -> std::io::Result<()> {
    let (rows, cols) = m.dim();
    let field = if m.is_complex() { "complex" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix array {field} general")?;
    if !comment.is_empty() {
        writeln!(w, "%{comment}")?;
    }
    writeln!(w, "{rows} {cols}")?;
    match m {
        MatrixData::Real(a) => {
            for j in 0..cols {
                for i in 0..rows {
                    writeln!(w, "{:.17e}", a[[i, j]])?;
                }
            }
        }
        MatrixData::Complex(a) => {
            for j in 0..cols {
                for i in 0..rows {
                    writeln!(w, "{:.17e} {:.17e}", a[[i, j]].re, a[[i, j]].im)?;
                }
            }
        }
    }
    Ok(())
}

/// Read a Matrix Market array file (real or complex, general or symmetric).
pub fn read_matrix_market<R: Read>(r: R) -> Result<MatrixData> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err("empty matrix file"))?
        .map_err(|e| parse_err(e.to_string()))?;
    let toks: Vec<String> = header.split_whitespace().map(|s| s.to_lowercase()).collect();
    if toks.len() < 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err("missing %%MatrixMarket matrix header"));
    }
    if toks[2] != "array" {
        return Err(parse_err(format!("unsupported storage '{}', expected array", toks[2])));
    }
    let complex = match toks[3].as_str() {
        "real" | "integer" => false,
        "complex" => true,
        other => return Err(parse_err(format!("unsupported field '{other}'"))),
    };
    let symmetry = toks[4].clone();
    if !matches!(symmetry.as_str(), "general" | "symmetric") {
        return Err(parse_err(format!("unsupported symmetry '{symmetry}'")));
    }

    let mut dims: Option<(usize, usize)> = None;
    let mut values: Vec<f64> = Vec::new();
    for line in lines {
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if dims.is_none() {
            let mut it = t.split_whitespace();
            let rows: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad size line"))?;
            let cols: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad size line"))?;
            dims = Some((rows, cols));
            continue;
        }
        for tok in t.split_whitespace() {
            values.push(tok.parse().map_err(|_| parse_err(format!("bad number '{tok}'")))?);
        }
    }
    let (rows, cols) = dims.ok_or_else(|| parse_err("missing size line"))?;
    let per = if complex { 2 } else { 1 };
    let expect = if symmetry == "symmetric" {
        // Lower-triangular column-major storage.
        cols * (cols + 1) / 2 * per
    } else {
        rows * cols * per
    };
    if values.len() != expect {
        return Err(parse_err(format!(
            "expected {expect} numbers, found {} (truncated file?)",
            values.len()
        )));
    }
    let fetch = |idx: usize| -> c64 {
        if complex {
            c64::new(values[2 * idx], values[2 * idx + 1])
        } else {
            c64::new(values[idx], 0.0)
        }
    };
    let mut a = Array2::from_elem((rows, cols), c64::new(0.0, 0.0));
    if symmetry == "symmetric" {
        if rows != cols {
            return Err(parse_err("symmetric storage needs a square matrix"));
        }
        let mut idx = 0;
        for j in 0..cols {
            for i in j..rows {
                let v = fetch(idx);
                a[[i, j]] = v;
                a[[j, i]] = v;
                idx += 1;
            }
        }
    } else {
        for j in 0..cols {
            for i in 0..rows {
                a[[i, j]] = fetch(j * rows + i);
            }
        }
    }
    if complex {
        Ok(MatrixData::Complex(a))
    } else {
        Ok(MatrixData::Real(a.mapv(|z| z.re)))
    }
}

const NATIVE_MAGIC: &[u8; 8] = b"QEMBMX01";

/// Write the native binary format: magic, field byte, u64 dims, f64 LE data
/// column-major (re/im interleaved when complex).
pub fn write_native<W: Write>(w: &mut W, m: &MatrixData) -> std::io::Result<()> {
    let (rows, cols) = m.dim();
    w.write_all(NATIVE_MAGIC)?;
    w.write_all(&[u8::from(m.is_complex())])?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    match m {
        MatrixData::Real(a) => {
            for j in 0..cols {
                for i in 0..rows {
                    w.write_all(&a[[i, j]].to_le_bytes())?;
                }
            }
        }
        MatrixData::Complex(a) => {
            for j in 0..cols {
                for i in 0..rows {
                    w.write_all(&a[[i, j]].re.to_le_bytes())?;
                    w.write_all(&a[[i, j]].im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_native<R: Read>(mut r: R) -> Result<MatrixData> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| parse_err(e.to_string()))?;
    if &magic != NATIVE_MAGIC {
        return Err(parse_err("not a native matrix file (bad magic)"));
    }
    let mut b1 = [0u8; 1];
    r.read_exact(&mut b1).map_err(|e| parse_err(e.to_string()))?;
    let complex = b1[0] == 1;
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8).map_err(|e| parse_err(e.to_string()))?;
    let rows = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8).map_err(|e| parse_err(e.to_string()))?;
    let cols = u64::from_le_bytes(b8) as usize;
    if rows.saturating_mul(cols) > 64 * 1024 * 1024 {
        return Err(parse_err("matrix too large"));
    }
    let mut next = || -> Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(|e| parse_err(e.to_string()))?;
        Ok(f64::from_le_bytes(b))
    };
    if complex {
        let mut a = Array2::from_elem((rows, cols), c64::new(0.0, 0.0));
        for j in 0..cols {
            for i in 0..rows {
                let re = next()?;
                let im = next()?;
                a[[i, j]] = c64::new(re, im);
            }
        }
        Ok(MatrixData::Complex(a))
    } else {
        let mut a = Array2::zeros((rows, cols));
        for j in 0..cols {
            for i in 0..rows {
                a[[i, j]] = next()?;
            }
        }
        Ok(MatrixData::Real(a))
    }
}

/// Read a matrix file, deciding the format from the extension and falling
/// back to sniffing the first bytes.
pub fn read_matrix_file(path: &Path) -> Result<MatrixData> {
    let bytes = std::fs::read(path)
        .map_err(|e| parse_err(format!("cannot read {}: {e}", path.display())))?;
    let by_ext = path.extension().and_then(|e| e.to_str()).map(|e| e.to_lowercase());
    match by_ext.as_deref() {
        Some("qmb") => read_native(&bytes[..]),
        Some("mtx") | Some("mm") => read_matrix_market(&bytes[..]),
        _ => {
            if bytes.starts_with(NATIVE_MAGIC) {
                read_native(&bytes[..])
            } else {
                read_matrix_market(&bytes[..])
            }
        }
    }
}

pub fn write_matrix_file(path: &Path, m: &MatrixData, fmt: FileFormat, comment: &str) -> Result<()> {
    let file = std::fs::File::create(path)
        .map_err(|e| parse_err(format!("cannot create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    let res = match fmt {
        FileFormat::MatrixMarket => write_matrix_market(&mut w, m, comment),
        FileFormat::Native => write_native(&mut w, m),
    };
    res.map_err(|e| parse_err(format!("write {}: {e}", path.display())))
}
