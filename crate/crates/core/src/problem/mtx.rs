//! Matrix Market coordinate files, plain-text vectors and the key=value
//! manifest that accompanies an exported system.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{SaddleSystem, StokesConfig};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

pub const MATRIX_M_FILE: &str = "M.mtx";
pub const MATRIX_E_FILE: &str = "E.mtx";
pub const RHS_FILE: &str = "f.vec";
pub const MANIFEST_FILE: &str = "manifest.txt";

/// 17 significant digits: enough for an exact `f64` round trip.
fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn render(a: &SparseMatrix, symmetric: bool) -> String {
    let entries: Vec<(usize, usize, f64)> = if symmetric {
        a.triplets().filter(|&(i, j, _)| j <= i).collect()
    } else {
        a.triplets().collect()
    };
    let kind = if symmetric { "symmetric" } else { "general" };
    let mut out = format!("%%MatrixMarket matrix coordinate real {kind}\n");
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_real(v));
    }
    out
}

/// Writes every stored entry (`general` symmetry).
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render(a, false))?;
    Ok(())
}

/// Writes the lower triangle under the `symmetric` tag.
pub fn write_matrix_market_symmetric(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    match a.asymmetry() {
        Some(d) if d == 0.0 => {}
        _ => {
            return Err(Error::InvalidParameter(
                "symmetric Matrix Market output needs an exactly symmetric matrix".into(),
            ))
        }
    }
    fs::write(path, render(a, true))?;
    Ok(())
}

/// Reads a real (or integer) coordinate file, `general` or `symmetric`.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, hline, "expected '%%MatrixMarket matrix ...' header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(path, hline, "only coordinate format is supported"));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(path, hline, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(path, hline, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body
        .next()
        .ok_or_else(|| parse_err(path, hline + 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(path, sline, "size line must hold three integers"))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(parse_err(path, sline, "size line must hold three integers"));
    };

    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0;
    for (ln, line) in body {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(path, ln, "entry must be 'row col value'"));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(path, ln, "bad row index"))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(path, ln, "bad column index"))?;
        let v: f64 = parts[2]
            .parse()
            .map_err(|_| parse_err(path, ln, "bad value"))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(path, ln, format!("index ({i}, {j}) out of range")));
        }
        if symmetric && j > i {
            return Err(parse_err(path, ln, "symmetric files store the lower triangle only"));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(
            path,
            sline,
            format!("header declares {nnz} entries, found {seen}"),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, triplets)
}

/// One value per line, 17 significant digits.
pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::with_capacity(24 * v.len());
    for x in v {
        out.push_str(&fmt_real(*x));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(path, k + 1, format!("not a number: '{}'", l.trim())))
        })
        .collect()
}

/// `key=value` summary of an exported system.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub l: Option<usize>,
    pub nu: Option<f64>,
    pub p: usize,
    pub q: usize,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(l) = self.l {
            let _ = writeln!(out, "l={l}");
        }
        if let Some(nu) = self.nu {
            let _ = writeln!(out, "nu={nu}");
        }
        let _ = writeln!(out, "p={}", self.p);
        let _ = writeln!(out, "q={}", self.q);
        out
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let (mut l, mut nu, mut p, mut q) = (None, None, None, None);
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(path, k + 1, "expected key=value"))?;
        let bad = || parse_err(path, k + 1, format!("bad value for '{}'", key.trim()));
        match key.trim() {
            "l" => l = Some(value.trim().parse().map_err(|_| bad())?),
            "nu" => nu = Some(value.trim().parse().map_err(|_| bad())?),
            "p" => p = Some(value.trim().parse().map_err(|_| bad())?),
            "q" => q = Some(value.trim().parse().map_err(|_| bad())?),
            _ => {}
        }
    }
    Ok(Manifest {
        l,
        nu,
        p: p.ok_or_else(|| parse_err(path, 0, "manifest lacks p"))?,
        q: q.ok_or_else(|| parse_err(path, 0, "manifest lacks q"))?,
    })
}

/// Writes `M.mtx` (symmetric), `E.mtx`, `f.vec` and `manifest.txt` into `dir`.
pub fn save_system(
    sys: &SaddleSystem,
    cfg: Option<&StokesConfig>,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths: Vec<PathBuf> = [MATRIX_M_FILE, MATRIX_E_FILE, RHS_FILE, MANIFEST_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_matrix_market_symmetric(sys.m(), &paths[0])?;
    write_matrix_market(sys.e(), &paths[1])?;
    write_vector(&sys.rhs(), &paths[2])?;
    let manifest = Manifest {
        l: cfg.map(|c| c.l),
        nu: cfg.map(|c| c.nu),
        p: sys.p(),
        q: sys.q(),
    };
    fs::write(&paths[3], manifest.render())?;
    Ok(paths)
}

/// Inverse of [`save_system`]; checks the manifest dimensions.
pub fn load_system(dir: impl AsRef<Path>) -> Result<(SaddleSystem, Manifest)> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir.join(MANIFEST_FILE))?;
    let m = read_matrix_market(dir.join(MATRIX_M_FILE))?;
    let e = read_matrix_market(dir.join(MATRIX_E_FILE))?;
    let mut f = read_vector(dir.join(RHS_FILE))?;
    if m.rows() != manifest.p || e.cols() != manifest.q {
        return Err(Error::InvalidParameter(format!(
            "manifest says p={}, q={} but matrices are {}x{} and {}x{}",
            manifest.p,
            manifest.q,
            m.rows(),
            m.cols(),
            e.rows(),
            e.cols()
        )));
    }
    if f.len() != manifest.p + manifest.q {
        return Err(Error::DimensionMismatch {
            context: "f.vec length",
            expected: manifest.p + manifest.q,
            found: f.len(),
        });
    }
    let f2 = f.split_off(manifest.p);
    Ok((SaddleSystem::new(m, e, f, f2)?, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::assemble_mac_stokes;

    #[test]
    fn diag_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let path = dir.path().join("d.mtx");
        write_matrix_market(&a, &path).unwrap();
        assert_eq!(read_matrix_market(&path).unwrap(), a);
    }

    #[test]
    fn symmetric_file_stores_lower_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let a = SparseMatrix::from_triplets(
            2,
            2,
            [(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0)],
        )
        .unwrap();
        let path = dir.path().join("s.mtx");
        write_matrix_market_symmetric(&a, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n"));
        assert_eq!(read_matrix_market(&path).unwrap(), a);
    }

    #[test]
    fn stokes_m_is_bit_identical_after_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let sys = assemble_mac_stokes(&StokesConfig::new(2, 0.3).unwrap()).unwrap();
        let path = dir.path().join("M.mtx");
        write_matrix_market(sys.m(), &path).unwrap();
        let back = read_matrix_market(&path).unwrap();
        for ((a, b), (c, d)) in back.values().iter().zip(sys.m().values()).zip(
            back.col_indices().iter().zip(sys.m().col_indices()),
        ) {
            assert_eq!(a.to_bits(), b.to_bits());
            assert_eq!(c, d);
        }
    }

    #[test]
    fn malformed_entries_report_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.mtx");
        fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 x 3.0\n",
        )
        .unwrap();
        match read_matrix_market(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        fs::write(&path, "%%MatrixMarket matrix array real general\n").unwrap();
        assert!(matches!(
            read_matrix_market(&path),
            Err(Error::Parse { line: 1, .. })
        ));
        fs::write(
            &path,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
        )
        .unwrap();
        assert!(read_matrix_market(&path).is_err());
    }

    #[test]
    fn vector_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let v = vec![0.1, -1.0 / 3.0, 1e-300, 12345.678901234567];
        let path = dir.path().join("v.vec");
        write_vector(&v, &path).unwrap();
        assert_eq!(read_vector(&path).unwrap(), v);
    }

    #[test]
    fn manifest_round_trip() {
        let m = Manifest {
            l: Some(2),
            nu: Some(0.01),
            p: 4,
            q: 4,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.txt");
        fs::write(&path, m.render()).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), m);
    }
}
