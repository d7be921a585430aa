//! Dense INR tensor over transmit x receive steering lattices.
//!
//! Values are stored row-major over `[tx_az, tx_el, rx_az, rx_el]`, which is
//! the same as a `N_tx x N_rx` matrix indexed by flat lattice positions.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::ArrayModel;
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::geometry::{Direction, DirectionGrid, UpaConfig};
use crate::linkmath::{amplitude_to_db, LinkBudget};

pub const CSV_HEADER: [&str; 5] = ["tx_az_deg", "tx_el_deg", "rx_az_deg", "rx_el_deg", "inr_db"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Tx,
    Rx,
}

impl Side {
    pub fn as_str(&self) -> &'static str {
        match self {
            Side::Tx => "tx",
            Side::Rx => "rx",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InrGrid {
    tx_grid: DirectionGrid,
    rx_grid: DirectionGrid,
    values: Vec<f64>,
}

impl InrGrid {
    pub fn new(tx_grid: DirectionGrid, rx_grid: DirectionGrid, values: Vec<f64>) -> Result<Self> {
        let expected = tx_grid.len() * rx_grid.len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("INR value at flat index {k} is not finite")));
        }
        Ok(Self {
            tx_grid,
            rx_grid,
            values,
        })
    }

    pub fn tx_grid(&self) -> &DirectionGrid {
        &self.tx_grid
    }

    pub fn rx_grid(&self) -> &DirectionGrid {
        &self.rx_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn n_tx(&self) -> usize {
        self.tx_grid.len()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_grid.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `[tx_az, tx_el, rx_az, rx_el]` extents.
    pub fn shape(&self) -> [usize; 4] {
        [
            self.tx_grid.n_az(),
            self.tx_grid.n_el(),
            self.rx_grid.n_az(),
            self.rx_grid.n_el(),
        ]
    }

    pub fn pair_index(&self, tx: usize, rx: usize) -> usize {
        tx * self.n_rx() + rx
    }

    pub fn split_index(&self, flat: usize) -> (usize, usize) {
        (flat / self.n_rx(), flat % self.n_rx())
    }

    pub fn coords(&self, flat: usize) -> [usize; 4] {
        let (i, j) = self.split_index(flat);
        let (a, b) = self.tx_grid.coords(i);
        let (c, d) = self.rx_grid.coords(j);
        [a, b, c, d]
    }

    pub fn flat_from_coords(&self, c: [usize; 4]) -> usize {
        self.pair_index(self.tx_grid.flat_index(c[0], c[1]), self.rx_grid.flat_index(c[2], c[3]))
    }

    pub fn get(&self, tx: usize, rx: usize) -> f64 {
        self.values[self.pair_index(tx, rx)]
    }

    pub fn row(&self, tx: usize) -> &[f64] {
        let n = self.n_rx();
        &self.values[tx * n..(tx + 1) * n]
    }

    /// Exchanges the roles of the two sides.
    pub fn transposed(&self) -> Self {
        let (nt, nr) = (self.n_tx(), self.n_rx());
        let mut values = vec![0.0; self.values.len()];
        for i in 0..nt {
            for j in 0..nr {
                values[j * nt + i] = self.values[i * nr + j];
            }
        }
        Self {
            tx_grid: self.rx_grid.clone(),
            rx_grid: self.tx_grid.clone(),
            values,
        }
    }

    /// INR over all beams of one side for a fixed beam on the other side.
    pub fn beam_values(&self, side: Side, beam: usize) -> Vec<f64> {
        match side {
            Side::Tx => self.row(beam).to_vec(),
            Side::Rx => (0..self.n_tx()).map(|i| self.get(i, beam)).collect(),
        }
    }

    /// Receive-side INR map for one transmit direction, in receive flat order.
    pub fn slice_for_tx(&self, tx_dir: &Direction) -> Result<Vec<f64>> {
        let i = self.tx_grid.index_of(tx_dir)?;
        Ok(self.beam_values(Side::Tx, i))
    }

    /// Transmit-side INR map for one receive direction, in transmit flat order.
    pub fn slice_for_rx(&self, rx_dir: &Direction) -> Result<Vec<f64>> {
        let j = self.rx_grid.index_of(rx_dir)?;
        Ok(self.beam_values(Side::Rx, j))
    }
}

/// Beamformed INR for every transmit/receive direction pair.
///
/// The channel projection `H f` is computed once per transmit beam and then
/// contracted against every receive beam. Rows are independent so the result
/// does not depend on the worker count.
pub fn simulate_grid(
    tx_cfg: &UpaConfig,
    rx_cfg: &UpaConfig,
    channel: &ChannelMatrix,
    budget: &LinkBudget,
    tx_grid: &DirectionGrid,
    rx_grid: &DirectionGrid,
) -> Result<InrGrid> {
    if channel.tx_elements() != tx_cfg.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: tx_cfg.num_elements(),
            actual: channel.tx_elements(),
        });
    }
    if channel.rx_elements() != rx_cfg.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: rx_cfg.num_elements(),
            actual: channel.rx_elements(),
        });
    }
    let tx_model = ArrayModel::new(tx_cfg);
    let rx_model = ArrayModel::new(rx_cfg);
    let projections: Vec<Vec<Complex64>> = (0..tx_grid.len())
        .into_par_iter()
        .map(|i| {
            let f = tx_model.conjugate_weights(&tx_grid.direction(i));
            channel.project(f.weights())
        })
        .collect::<Result<_>>()?;
    let receive: Vec<Vec<Complex64>> = (0..rx_grid.len())
        .into_par_iter()
        .map(|j| rx_model.conjugate_weights(&rx_grid.direction(j)).weights().to_vec())
        .collect();

    // With a reciprocal channel and identical sides, (i, j) and (j, i) are the
    // same coupling; compute one triangle and mirror it.
    let reciprocal = tx_cfg == rx_cfg && tx_grid == rx_grid && channel.is_symmetric();
    let gain_db = channel.calibration_db();
    let offset = budget.ptx_dbm - budget.pnoise_dbm + gain_db;
    let n_rx = rx_grid.len();
    let mut values = vec![0.0; tx_grid.len() * n_rx];
    values
        .par_chunks_mut(n_rx.max(1))
        .zip(projections.par_iter())
        .enumerate()
        .for_each(|(i, (row, hf))| {
            let first = if reciprocal { i } else { 0 };
            for (out, w) in row[first..].iter_mut().zip(&receive[first..]) {
                let c: Complex64 = w.iter().zip(hf).map(|(a, b)| a * b).sum();
                // INR = ptx - isolation - noise, isolation = -20 log10 |c g|
                *out = offset + amplitude_to_db(c.norm());
            }
        });
    if reciprocal {
        for i in 0..n_rx {
            for j in 0..i {
                values[i * n_rx + j] = values[j * n_rx + i];
            }
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "a beam pair has zero coupling (isolation below measurement floor)".into(),
        ));
    }
    InrGrid::new(tx_grid.clone(), rx_grid.clone(), values)
}

/// Writes the canonical CSV. `comments` become leading `# ` lines.
pub fn save_grid_csv(grid: &InrGrid, path: impl AsRef<Path>, comments: &[String]) -> Result<()> {
    let mut out = BufWriter::with_capacity(1 << 20, File::create(path)?);
    write_grid_csv(grid, &mut out, comments)?;
    out.flush()?;
    Ok(())
}

pub fn write_grid_csv<W: Write>(grid: &InrGrid, out: &mut W, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    let tx_dirs: Vec<Direction> = grid.tx_grid.directions().collect();
    let rx_labels: Vec<String> = grid
        .rx_grid
        .directions()
        .map(|d| format!("{},{}", d.azimuth_deg(), d.elevation_deg()))
        .collect();
    for (i, td) in tx_dirs.iter().enumerate() {
        let prefix = format!("{},{}", td.azimuth_deg(), td.elevation_deg());
        for (j, rl) in rx_labels.iter().enumerate() {
            writeln!(out, "{prefix},{rl},{}", grid.get(i, j))?;
        }
    }
    Ok(())
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reconstructs a uniform axis from its distinct values.
fn axis_from_values(values: &BTreeSet<u64>, what: &str) -> Result<(f64, f64, f64)> {
    let v: Vec<f64> = values.iter().map(|b| f64::from_bits(*b)).collect();
    let mut sorted = v.clone();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = *sorted.last().unwrap();
    if sorted.len() == 1 {
        return Ok((min, max, 1.0));
    }
    let step = (max - min) / (sorted.len() - 1) as f64;
    for (k, x) in sorted.iter().enumerate() {
        if (min + k as f64 * step - x).abs() > 1e-6 * step {
            return Err(Error::InvalidGrid(format!(
                "{what} values are not uniformly spaced (value {x})"
            )));
        }
    }
    Ok((min, max, step))
}

fn canonical_bits(x: f64) -> u64 {
    // -0.0 and 0.0 name the same lattice point
    if x == 0.0 {
        0.0f64.to_bits()
    } else {
        x.to_bits()
    }
}

/// Loads the canonical CSV; rows may appear in any order.
pub fn load_grid_csv(path: impl AsRef<Path>) -> Result<InrGrid> {
    let file = File::open(path)?;
    read_grid_csv(BufReader::with_capacity(1 << 20, file))
}

pub fn read_grid_csv<R: Read>(reader: R) -> Result<InrGrid> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(e.position().map_or(1, |p| p.line()), e.to_string()))?
        .clone();
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != CSV_HEADER {
        return Err(parse_err(
            header.position().map_or(1, |p| p.line()),
            format!("expected header `{}`, found `{}`", CSV_HEADER.join(","), names.join(",")),
        ));
    }

    let mut rows: Vec<([f64; 4], f64, u64)> = Vec::new();
    let mut axes: [BTreeSet<u64>; 4] = Default::default();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 5 {
            return Err(parse_err(
                line,
                format!("expected 5 fields, found {}", record.len()),
            ));
        }
        let mut f = [0.0; 5];
        for (k, field) in record.iter().enumerate() {
            f[k] = field.trim().parse::<f64>().map_err(|_| {
                parse_err(line, format!("field `{}` = `{field}` is not a number", CSV_HEADER[k]))
            })?;
            if !f[k].is_finite() {
                return Err(parse_err(line, format!("field `{}` is not finite", CSV_HEADER[k])));
            }
        }
        let key = [f[0], f[1], f[2], f[3]];
        for k in 0..4 {
            axes[k].insert(canonical_bits(key[k]));
        }
        rows.push((key, f[4], line));
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows"));
    }

    let names = ["tx azimuth", "tx elevation", "rx azimuth", "rx elevation"];
    let mut ax = [(0.0, 0.0, 0.0); 4];
    for k in 0..4 {
        ax[k] = axis_from_values(&axes[k], names[k])?;
    }
    let tx_grid = DirectionGrid::build_with_steps(ax[0].0, ax[0].1, ax[0].2, ax[1].0, ax[1].1, ax[1].2)?;
    let rx_grid = DirectionGrid::build_with_steps(ax[2].0, ax[2].1, ax[2].2, ax[3].0, ax[3].1, ax[3].2)?;

    let n = tx_grid.len() * rx_grid.len();
    let mut values = vec![0.0; n];
    let mut seen_line = vec![0u64; n];
    let index = |x: f64, axis: usize| ((x - ax[axis].0) / ax[axis].2).round() as usize;
    let mut tmp = InrGrid {
        tx_grid,
        rx_grid,
        values: Vec::new(),
    };
    for (key, v, line) in rows {
        let c = [index(key[0], 0), index(key[1], 1), index(key[2], 2), index(key[3], 3)];
        let flat = tmp.flat_from_coords(c);
        if seen_line[flat] != 0 {
            return Err(parse_err(
                line,
                format!(
                    "duplicate direction pair ({}, {}, {}, {}) first seen on line {}",
                    key[0], key[1], key[2], key[3], seen_line[flat]
                ),
            ));
        }
        seen_line[flat] = line.max(1);
        values[flat] = v;
    }
    if let Some(flat) = seen_line.iter().position(|&l| l == 0) {
        let (i, j) = tmp.split_index(flat);
        let (td, rd) = (tmp.tx_grid.direction(i), tmp.rx_grid.direction(j));
        return Err(Error::InvalidGrid(format!(
            "missing pair tx ({}, {}) rx ({}, {}); expected {} rows",
            td.azimuth_deg(),
            td.elevation_deg(),
            rd.azimuth_deg(),
            rd.elevation_deg(),
            n
        )));
    }
    tmp.values = values;
    Ok(tmp)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BinaryHeader {
    tx_grid: DirectionGrid,
    rx_grid: DirectionGrid,
    shape: [usize; 4],
    dtype: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Little-endian f64 tensor with a `<path>.json` sidecar carrying the lattices.
pub fn save_grid_binary(grid: &InrGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::with_capacity(1 << 20, File::create(path)?);
    for v in &grid.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    let header = BinaryHeader {
        tx_grid: grid.tx_grid.clone(),
        rx_grid: grid.rx_grid.clone(),
        shape: grid.shape(),
        dtype: "f64-le".into(),
    };
    std::fs::write(sidecar(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn load_grid_binary(path: impl AsRef<Path>) -> Result<InrGrid> {
    let path = path.as_ref();
    let header: BinaryHeader = serde_json::from_str(&std::fs::read_to_string(sidecar(path))?)?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect::<Vec<_>>();
    if bytes.len() % 8 != 0 {
        return Err(Error::Domain("binary grid length is not a multiple of 8".into()));
    }
    InrGrid::new(header.tx_grid, header.rx_grid, values)
}

/// Dispatches on extension: `.bin` is the binary cache, anything else CSV.
pub fn load_grid(path: impl AsRef<Path>) -> Result<InrGrid> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => load_grid_binary(path),
        _ => load_grid_csv(path),
    }
}

pub fn save_grid(grid: &InrGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => save_grid_binary(grid, path),
        _ => save_grid_csv(grid, path, &[]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{coupling_gain, spherical_wave_channel};
    use crate::geometry::PlatformGeometry;
    use crate::linkmath::{inr_db, isolation_db, self_interference_dbm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(shape: [usize; 4], seed: u64) -> InrGrid {
        let tx = DirectionGrid::build(-2.0, shape[0] as f64 - 3.0, 0.0, shape[1] as f64 - 1.0, 1.0)
            .unwrap();
        let rx = DirectionGrid::build(-1.0, shape[2] as f64 - 2.0, -1.0, shape[3] as f64 - 2.0, 1.0)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..tx.len() * rx.len())
            .map(|_| rng.random_range(-30.0..50.0))
            .collect();
        InrGrid::new(tx, rx, values).unwrap()
    }

    #[test]
    fn index_bijection() {
        let g = random_grid([5, 3, 4, 2], 1);
        assert_eq!(g.shape(), [5, 3, 4, 2]);
        for flat in 0..g.len() {
            assert_eq!(g.flat_from_coords(g.coords(flat)), flat);
            let (i, j) = g.split_index(flat);
            assert_eq!(g.pair_index(i, j), flat);
        }
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        let t = DirectionGrid::build(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(InrGrid::new(t.clone(), t.clone(), vec![0.0; 3]).is_err());
        assert!(InrGrid::new(t.clone(), t, vec![0.0, 1.0, f64::NAN, 2.0]).is_err());
    }

    #[test]
    fn single_pair_matches_triple_product() {
        let cfg = UpaConfig::new(4, 4, 0.5, 28e9).unwrap();
        let geom = PlatformGeometry::default();
        let h = spherical_wave_channel(&cfg, &cfg, &geom)
            .unwrap()
            .with_calibration_db(-20.0);
        let budget = LinkBudget::default();
        let tx = DirectionGrid::build(12.0, 12.0, -3.0, -3.0, 1.0).unwrap();
        let rx = DirectionGrid::build(-7.0, -7.0, 2.0, 2.0, 1.0).unwrap();
        let g = simulate_grid(&cfg, &cfg, &h, &budget, &tx, &rx).unwrap();
        assert_eq!(g.len(), 1);

        let model = ArrayModel::new(&cfg);
        let f = model.conjugate_weights(&tx.direction(0));
        let w = model.conjugate_weights(&rx.direction(0));
        let mut c = Complex64::new(0.0, 0.0);
        for m in 0..16 {
            for n in 0..16 {
                c += w.weights()[m] * h.entry(m, n) * f.weights()[n];
            }
        }
        c *= h.calibration_gain();
        let expected = inr_db(&budget, self_interference_dbm(&budget, isolation_db(c).db()));
        assert!((g.values()[0] - expected).abs() < 1e-9);
        let via_api = coupling_gain(&w, &h, &f).unwrap();
        assert!((via_api - c).norm() < 1e-12 * c.norm());
    }

    #[test]
    fn mirrored_simulation_is_symmetric() {
        let cfg = UpaConfig::new(4, 4, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default()).unwrap();
        let lattice = DirectionGrid::build(-6.0, 6.0, -2.0, 2.0, 2.0).unwrap();
        let g = simulate_grid(&cfg, &cfg, &h, &LinkBudget::default(), &lattice, &lattice).unwrap();
        assert!(h.is_symmetric());
        assert_eq!(g.transposed(), g);
        let d = Direction::new(2.0, 0.0).unwrap();
        assert_eq!(g.slice_for_tx(&d).unwrap(), g.slice_for_rx(&d).unwrap());

        // the mirrored triangle agrees with a direct evaluation
        let unmirrored = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::triangular(0.3, 60.0, false).unwrap()).unwrap();
        assert!(!unmirrored.is_symmetric());
        let model = ArrayModel::new(&cfg);
        let budget = LinkBudget::default();
        for (i, j) in [(0, 7), (9, 3), (14, 2)] {
            let f = model.conjugate_weights(&lattice.direction(i));
            let w = model.conjugate_weights(&lattice.direction(j));
            let c = coupling_gain(&w, &h, &f).unwrap();
            let direct = inr_db(&budget, self_interference_dbm(&budget, isolation_db(c).db()));
            assert!((g.get(i, j) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = UpaConfig::new(4, 4, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default()).unwrap();
        let lattice = DirectionGrid::build(-4.0, 4.0, -1.0, 1.0, 1.0).unwrap();
        let budget = LinkBudget::default();
        let a = simulate_grid(&cfg, &cfg, &h, &budget, &lattice, &lattice).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool
            .install(|| simulate_grid(&cfg, &cfg, &h, &budget, &lattice, &lattice))
            .unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn slices_reassemble_tensor() {
        let g = random_grid([4, 3, 5, 2], 9);
        let mut rebuilt = Vec::new();
        for d in g.tx_grid().directions() {
            let s = g.slice_for_tx(&d).unwrap();
            assert_eq!(s.len(), g.n_rx());
            rebuilt.extend(s);
        }
        assert_eq!(rebuilt, g.values());
        let off = Direction::new(0.5, 0.0).unwrap();
        assert!(matches!(g.slice_for_tx(&off), Err(Error::OffLattice { .. })));
    }

    #[test]
    fn csv_round_trip_any_order() {
        let g = random_grid([5, 3, 5, 3], 2);
        let mut buf = Vec::new();
        write_grid_csv(&g, &mut buf, &["seed: 2".to_string()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_grid_csv(text.as_bytes()).unwrap();
        assert_eq!(back, g);

        let mut lines: Vec<&str> = text.lines().collect();
        let body = &mut lines[2..];
        body.reverse();
        let shuffled = lines.join("\n");
        assert_eq!(read_grid_csv(shuffled.as_bytes()).unwrap(), g);
    }

    #[test]
    fn csv_errors_name_lines() {
        let text = "tx_az_deg,tx_el_deg,rx_az_deg,rx_el_deg,inr_db\n0,0,0,0,1.5\n0,0,1,3.0\n";
        match read_grid_csv(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("4"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let dup = "tx_az_deg,tx_el_deg,rx_az_deg,rx_el_deg,inr_db\n0,0,0,0,1\n0,0,0,0,2\n";
        match read_grid_csv(dup.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("duplicate"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let missing = "tx_az_deg,tx_el_deg,rx_az_deg,rx_el_deg,inr_db\n0,0,0,0,1\n0,0,1,0,2\n1,0,0,0,3\n";
        assert!(matches!(read_grid_csv(missing.as_bytes()), Err(Error::InvalidGrid(_))));
        let bad = "tx_az_deg,tx_el_deg,rx_az_deg,rx_el_deg,inr_db\n0,0,0,0,abc\n";
        assert!(matches!(read_grid_csv(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
        let header = "a,b,c,d,e\n0,0,0,0,1\n";
        assert!(matches!(read_grid_csv(header.as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn binary_round_trip() {
        let g = random_grid([3, 2, 4, 3], 4);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("grid.bin");
        save_grid(&g, &p).unwrap();
        assert_eq!(load_grid(&p).unwrap(), g);
        let c = dir.path().join("grid.csv");
        save_grid(&g, &c).unwrap();
        assert_eq!(load_grid(&c).unwrap(), g);
    }
}
