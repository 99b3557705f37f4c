//! File formats: the binary state checkpoint, the human-readable
//! coefficient CSV, and the diagnostics time series CSV.
//!
//! Binary layout (little-endian throughout):
//!
//! ```text
//! magic   8 bytes  "ZAKSTAT1"
//! modes   u64      grid size M
//! time    f64      model time
//! flags   u64      bit 0: physical-reality flag of the wave pair
//! u       2M f64   interleaved (Re, Im) pairs, k = −M/2 … M/2−1
//! n_plus  2M f64   same layout
//! n_minus 2M f64   same layout
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::diagnostics::EnergyReport;
use crate::error::{Error, Result};
use crate::spectral::{GridSpec, SpectralField};
use crate::state::ZakharovState;

const MAGIC: &[u8; 8] = b"ZAKSTAT1";

fn write_field(out: &mut impl Write, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    for k in grid.min_freq()..=grid.max_freq() {
        let c = field.coeff(k);
        out.write_all(&c.re.to_le_bytes())?;
        out.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_field(input: &mut impl Read, grid: GridSpec) -> Result<SpectralField> {
    let mut field = SpectralField::zeros(grid);
    let mut buf = [0u8; 16];
    for k in grid.min_freq()..=grid.max_freq() {
        input.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        field.set_coeff(k, Complex64::new(re, im));
    }
    field.refresh_hermitian();
    Ok(field)
}

/// Writes a state checkpoint.
pub fn write_state(path: &Path, state: &ZakharovState) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&(state.grid().num_modes() as u64).to_le_bytes())?;
    out.write_all(&state.time().to_le_bytes())?;
    let flags: u64 = if state.real_wave() { 1 } else { 0 };
    out.write_all(&flags.to_le_bytes())?;
    write_field(&mut out, state.u())?;
    write_field(&mut out, state.n_plus())?;
    write_field(&mut out, state.n_minus())?;
    out.flush()?;
    Ok(())
}

/// Reads a state checkpoint.
pub fn read_state(path: &Path) -> Result<ZakharovState> {
    let mut input = std::io::BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic in {}: {:?}",
            path.display(),
            magic
        )));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let modes = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let time = f64::from_le_bytes(word);
    input.read_exact(&mut word)?;
    let _flags = u64::from_le_bytes(word);
    let grid = GridSpec::new(modes)
        .map_err(|e| Error::Format(format!("invalid grid in {}: {e}", path.display())))?;
    let u = read_field(&mut input, grid)?;
    let n_plus = read_field(&mut input, grid)?;
    let n_minus = read_field(&mut input, grid)?;
    // Reconstruct through the validating constructor; the reality flag is
    // re-detected from the coefficients rather than trusted from disk.
    ZakharovState::new(u, n_plus, n_minus, time)
}

/// Human-readable export of one field: `k, Re c_k, Im c_k` per row.
pub fn write_field_csv(path: &Path, field: &SpectralField) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "k,re,im")?;
    let grid = field.grid();
    for k in grid.min_freq()..=grid.max_freq() {
        let c = field.coeff(k);
        writeln!(out, "{k},{:.17e},{:.17e}", c.re, c.im)?;
    }
    out.flush()?;
    Ok(())
}

/// Human-readable export of a full state, with a leading field column.
pub fn write_state_csv(path: &Path, state: &ZakharovState) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "field,k,re,im")?;
    let grid = state.grid();
    for (name, f) in [
        ("u", state.u()),
        ("n_plus", state.n_plus()),
        ("n_minus", state.n_minus()),
    ] {
        for k in grid.min_freq()..=grid.max_freq() {
            let c = f.coeff(k);
            writeln!(out, "{name},{k},{:.17e},{:.17e}", c.re, c.im)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Append-oriented writer for the diagnostics time series.
pub struct DiagnosticsCsv {
    out: std::io::BufWriter<File>,
}

pub const DIAGNOSTICS_HEADER: &str =
    "run_id,time,mass,hamiltonian,i_energy,sobolev_u,l2_wave,fl_wave,nonlinear_part_norm";

impl DiagnosticsCsv {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        writeln!(out, "{DIAGNOSTICS_HEADER}")?;
        Ok(DiagnosticsCsv { out })
    }

    pub fn append(&mut self, run_id: &str, report: &EnergyReport) -> Result<()> {
        writeln!(
            self.out,
            "{run_id},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            report.time,
            report.mass,
            report.hamiltonian,
            report.i_energy,
            report.sobolev_u,
            report.l2_wave,
            report.fl_wave,
            report.nonlinear_part_norm,
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads one numeric column from a diagnostics CSV (test/audit helper).
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))??;
    let idx = header
        .split(',')
        .position(|c| c == column)
        .ok_or_else(|| Error::Format(format!("column {column} not found")))?;
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let cell = line
            .split(',')
            .nth(idx)
            .ok_or_else(|| Error::Format(format!("short row: {line}")))?;
        out.push(
            cell.parse::<f64>()
                .map_err(|e| Error::Format(format!("bad float {cell}: {e}")))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fl_data, u_gaussian, ZakharovState};
    use num_complex::Complex64;

    #[test]
    fn state_roundtrip_is_bit_exact() {
        let g = GridSpec::new(64).unwrap();
        let u = u_gaussian(0.6, 0.1, 7, g).unwrap();
        let a = fl_data(0.45, 1.0, 1, 8, g).unwrap();
        let b = fl_data(0.45, 1.0, 1, 9, g).unwrap();
        let ib = b.scale(Complex64::new(0.0, 1.0));
        let st = ZakharovState::new(u, a.add(&ib).unwrap(), a.sub(&ib).unwrap(), 1.25).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        write_state(&path, &st).unwrap();
        let back = read_state(&path).unwrap();
        assert_eq!(back.max_abs_diff(&st), 0.0);
        assert_eq!(back.time(), 1.25);
        assert_eq!(back.real_wave(), st.real_wave());
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOTASTATE-AT-ALL").unwrap();
        assert!(matches!(read_state(&path), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_state_files_are_rejected() {
        let g = GridSpec::new(64).unwrap();
        let st = ZakharovState::new(
            fl_data(0.45, 1.0, 1, 1, g).unwrap(),
            fl_data(0.45, 1.0, 1, 2, g).unwrap(),
            fl_data(0.45, 1.0, 1, 3, g).unwrap(),
            0.0,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.bin");
        write_state(&path, &st).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(read_state(&path), Err(Error::Io(_))));
    }

    #[test]
    fn field_csv_lists_all_frequencies() {
        let g = GridSpec::new(64).unwrap();
        let f = fl_data(0.4, 1.0, 1, 3, g).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        write_field_csv(&path, &f).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("k,re,im\n-32,"));
    }

    #[test]
    fn diagnostics_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("diag.csv");
        let mut csv = DiagnosticsCsv::create(&path).unwrap();
        let report = crate::diagnostics::EnergyReport {
            time: 0.5,
            mass: 1.0,
            hamiltonian: 2.0,
            i_energy: 2.0,
            sobolev_u: 3.0,
            l2_wave: 0.25,
            fl_wave: 0.125,
            nonlinear_part_norm: 1e-3,
        };
        csv.append("runabc", &report).unwrap();
        csv.finish().unwrap();
        let times = read_csv_column(&path, "time").unwrap();
        assert_eq!(times, vec![0.5]);
        let nl = read_csv_column(&path, "nonlinear_part_norm").unwrap();
        assert_eq!(nl, vec![1e-3]);
    }
}
