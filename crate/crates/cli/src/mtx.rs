//! Matrix Market reader: array and coordinate formats, real / integer /
//! complex fields, general / symmetric / skew-symmetric / hermitian
//! symmetries. Parse failures carry the offending line number.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use eigopt::CMatrix;
use num_complex::Complex64;

#[derive(Debug)]
pub enum MtxError {
    Io(io::Error),
    Parse { line: usize, message: String },
}

impl fmt::Display for MtxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MtxError::Io(e) => write!(f, "{e}"),
            MtxError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for MtxError {}

impl From<io::Error> for MtxError {
    fn from(e: io::Error) -> Self {
        MtxError::Io(e)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// Numeric tokens with their source line, streamed across data lines.
struct Tokens {
    items: Vec<(String, usize)>,
    next: usize,
}

impl Tokens {
    fn take(&mut self, what: &str, last_line: usize) -> Result<(f64, usize), MtxError> {
        let Some((tok, line)) = self.items.get(self.next) else {
            return Err(parse_err(last_line, format!("unexpected end of file while reading {what}")));
        };
        self.next += 1;
        // Fortran-style exponents use D where Rust expects E.
        let normalized = tok.replace(['d', 'D'], "e");
        let value: f64 = normalized
            .parse()
            .map_err(|_| parse_err(*line, format!("expected {what}, found '{tok}'")))?;
        Ok((value, *line))
    }

    fn take_index(&mut self, what: &str, last_line: usize) -> Result<(usize, usize), MtxError> {
        let Some((tok, line)) = self.items.get(self.next) else {
            return Err(parse_err(last_line, format!("unexpected end of file while reading {what}")));
        };
        self.next += 1;
        let value: usize = tok
            .parse()
            .map_err(|_| parse_err(*line, format!("expected {what}, found '{tok}'")))?;
        Ok((value, *line))
    }

    fn finish(&self) -> Result<(), MtxError> {
        if let Some((tok, line)) = self.items.get(self.next) {
            return Err(parse_err(*line, format!("unexpected trailing data '{tok}'")));
        }
        Ok(())
    }
}

/// Read a Matrix Market file into a dense complex matrix.
pub fn read_matrix(path: &Path) -> Result<CMatrix, MtxError> {
    parse_matrix(BufReader::new(File::open(path)?))
}

/// Parse Matrix Market content into a dense complex matrix.
pub fn parse_matrix(reader: impl BufRead) -> Result<CMatrix, MtxError> {
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        lines.push((idx + 1, line?));
    }
    let Some((header_line, header)) = lines.first() else {
        return Err(parse_err(1, "empty file"));
    };

    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(parse_err(*header_line, "missing %%MatrixMarket banner"));
    }
    if words.len() != 5 {
        return Err(parse_err(
            *header_line,
            "banner must read '%%MatrixMarket matrix <format> <field> <symmetry>'",
        ));
    }
    if words[1] != "matrix" {
        return Err(parse_err(*header_line, format!("unsupported object '{}'", words[1])));
    }
    let format = match words[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(parse_err(*header_line, format!("unsupported format '{other}'"))),
    };
    let field = match words[3].as_str() {
        "real" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => {
            return Err(parse_err(
                *header_line,
                "pattern matrices carry no values and cannot define a problem",
            ))
        }
        other => return Err(parse_err(*header_line, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(*header_line, format!("unsupported symmetry '{other}'"))),
    };

    // Strip comments and blank lines; the first remaining line carries sizes.
    let mut content = lines[1..]
        .iter()
        .filter(|(_, l)| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let Some((size_line, sizes)) = content.next() else {
        return Err(parse_err(lines.len(), "missing size line"));
    };
    let dims: Vec<&str> = sizes.split_whitespace().collect();
    let expect_dims = if format == Format::Coordinate { 3 } else { 2 };
    if dims.len() != expect_dims {
        return Err(parse_err(
            *size_line,
            format!("size line needs {expect_dims} integers, found {}", dims.len()),
        ));
    }
    let parse_dim = |s: &str| -> Result<usize, MtxError> {
        s.parse()
            .map_err(|_| parse_err(*size_line, format!("invalid size '{s}'")))
    };
    let nrows = parse_dim(dims[0])?;
    let ncols = parse_dim(dims[1])?;
    if nrows == 0 || ncols == 0 {
        return Err(parse_err(*size_line, "matrix dimensions must be positive"));
    }
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(parse_err(*size_line, "symmetric storage requires a square matrix"));
    }

    let mut tokens = Tokens {
        items: content
            .flat_map(|(n, l)| l.split_whitespace().map(move |t| (t.to_string(), *n)))
            .collect(),
        next: 0,
    };
    let last_line = lines.len();

    let mut m = CMatrix::zeros(nrows, ncols);
    let read_value = |tokens: &mut Tokens| -> Result<(Complex64, usize), MtxError> {
        let (re, line) = tokens.take("a numeric value", last_line)?;
        let im = if field == Field::Complex {
            tokens.take("an imaginary part", last_line)?.0
        } else {
            0.0
        };
        Ok((Complex64::new(re, im), line))
    };
    let mirror = |m: &mut CMatrix, i: usize, j: usize, v: Complex64| {
        m[(i, j)] = v;
        if i != j {
            m[(j, i)] = match symmetry {
                Symmetry::Symmetric => v,
                Symmetry::Hermitian => v.conj(),
                Symmetry::SkewSymmetric => -v,
                Symmetry::General => return,
            };
        }
    };

    match format {
        Format::Array => {
            // Column-major; non-general symmetries store the lower triangle
            // (strictly lower for skew-symmetric).
            for j in 0..ncols {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::SkewSymmetric => j + 1,
                    _ => j,
                };
                for i in start..nrows {
                    let (v, line) = read_value(&mut tokens)?;
                    if symmetry == Symmetry::Hermitian && i == j && v.im != 0.0 {
                        return Err(parse_err(line, "hermitian diagonal entries must be real"));
                    }
                    mirror(&mut m, i, j, v);
                }
            }
        }
        Format::Coordinate => {
            let nnz = parse_dim(dims[2])?;
            for _ in 0..nnz {
                let (i, line) = tokens.take_index("a row index", last_line)?;
                let (j, _) = tokens.take_index("a column index", last_line)?;
                let (v, _) = read_value(&mut tokens)?;
                if i < 1 || i > nrows || j < 1 || j > ncols {
                    return Err(parse_err(line, format!("index ({i}, {j}) out of bounds")));
                }
                mirror(&mut m, i - 1, j - 1, v);
            }
        }
    }
    tokens.finish()?;
    Ok(m)
}

/// Write a dense complex matrix in array/general form. Values use shortest
/// round-trip formatting, so reading the file back reproduces them exactly.
pub fn write_array_complex(mut w: impl Write, m: &CMatrix) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array complex general")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            writeln!(w, "{} {}", m[(i, j)].re, m[(i, j)].im)?;
        }
    }
    Ok(())
}
