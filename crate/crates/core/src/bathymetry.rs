//! Depth rasters, tiling, 16-bit heightmaps and under-keel-clearance
//! occupancy grids.
//!
//! Depths are positive down, in metres. Internally row 0 is the southernmost
//! row so that row index grows with `y`; both file formats store the
//! northernmost row first.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Vec2;

pub const DEFAULT_NODATA: f64 = -9999.0;
const RAW16_MAX: f64 = 65535.0;

#[derive(Debug, Error)]
pub enum BathyError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },
    #[error("{path}: header declares {expected} values but found {found}")]
    DimensionMismatch { path: PathBuf, expected: usize, found: usize },
    #[error("{path}: bad value `{token}`")]
    BadValue { path: PathBuf, token: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("position ({x:.1}, {y:.1}) is outside the grid extent")]
    OutOfBounds { x: f64, y: f64 },
    #[error("grid has no valid depth cells")]
    AllNodata,
    #[error("tile set: {0}")]
    Tiling(String),
    #[error("draft must be positive and clearance non-negative (draft {draft}, ukc {ukc})")]
    InvalidClearance { draft: f64, ukc: f64 },
}

pub type Result<T> = std::result::Result<T, BathyError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    /// Lower-left corner of the lower-left cell.
    pub origin: Vec2,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
}

impl GridGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(BathyError::InvalidGrid(format!("cell size {}", self.cell_size)));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(BathyError::InvalidGrid("empty grid".into()));
        }
        if !self.origin.is_finite() {
            return Err(BathyError::InvalidGrid("non-finite origin".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.cell_size
    }

    pub fn center(&self, row: usize, col: usize) -> Vec2 {
        self.origin
            + Vec2::new((col as f64 + 0.5) * self.cell_size, (row as f64 + 0.5) * self.cell_size)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let d = p - self.origin;
        d.x >= 0.0 && d.y >= 0.0 && d.x <= self.width() && d.y <= self.height()
    }

    /// Cell containing `p`; points on the far edges belong to the last cell.
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        if !self.contains(p) {
            return None;
        }
        let d = p - self.origin;
        let col = ((d.x / self.cell_size) as usize).min(self.cols - 1);
        let row = ((d.y / self.cell_size) as usize).min(self.rows - 1);
        Some((row, col))
    }
}

/// Georeferenced depth raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthGrid {
    geometry: GridGeometry,
    depths: Vec<f64>,
    nodata: f64,
}

impl DepthGrid {
    pub fn new(geometry: GridGeometry, depths: Vec<f64>, nodata: f64) -> Result<Self> {
        geometry.validate()?;
        if depths.len() != geometry.len() {
            return Err(BathyError::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                depths.len(),
                geometry.rows,
                geometry.cols
            )));
        }
        if let Some(v) = depths.iter().find(|v| !v.is_finite() && **v != nodata) {
            return Err(BathyError::InvalidGrid(format!("non-finite depth {v}")));
        }
        Ok(Self { geometry, depths, nodata })
    }

    /// Constant-depth grid.
    pub fn flat(origin: Vec2, cell_size: f64, rows: usize, cols: usize, depth: f64) -> Result<Self> {
        let geometry = GridGeometry { origin, cell_size, rows, cols };
        Self::new(geometry, vec![depth; rows * cols], DEFAULT_NODATA)
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn nodata(&self) -> f64 {
        self.nodata
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn is_nodata_value(&self, v: f64) -> bool {
        v == self.nodata || v.is_nan()
    }

    /// Depth of a cell, `None` for nodata.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.depths[self.geometry.index(row, col)];
        (!self.is_nodata_value(v)).then_some(v)
    }

    pub fn raw(&self, row: usize, col: usize) -> f64 {
        self.depths[self.geometry.index(row, col)]
    }

    /// (min, max) over valid cells.
    pub fn depth_range(&self) -> Option<(f64, f64)> {
        self.depths
            .iter()
            .filter(|v| !self.is_nodata_value(**v))
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    /// Bilinear depth between the four surrounding cell centres.
    ///
    /// Falls back to the nearest valid cell centre when a corner is nodata.
    pub fn depth_at(&self, p: Vec2) -> Result<f64> {
        let g = &self.geometry;
        if !g.contains(p) {
            return Err(BathyError::OutOfBounds { x: p.x, y: p.y });
        }
        let fx = ((p.x - g.origin.x) / g.cell_size - 0.5).clamp(0.0, (g.cols - 1) as f64);
        let fy = ((p.y - g.origin.y) / g.cell_size - 0.5).clamp(0.0, (g.rows - 1) as f64);
        let c0 = (fx.floor() as usize).min(g.cols.saturating_sub(2));
        let r0 = (fy.floor() as usize).min(g.rows.saturating_sub(2));
        let c1 = (c0 + 1).min(g.cols - 1);
        let r1 = (r0 + 1).min(g.rows - 1);
        let tx = fx - c0 as f64;
        let ty = fy - r0 as f64;
        let corners = [(r0, c0), (r0, c1), (r1, c0), (r1, c1)];
        let values: Vec<Option<f64>> = corners.iter().map(|&(r, c)| self.get(r, c)).collect();
        if let [Some(d00), Some(d01), Some(d10), Some(d11)] = values[..] {
            let south = d00 + (d01 - d00) * tx;
            let north = d10 + (d11 - d10) * tx;
            return Ok(south + (north - south) * ty);
        }
        self.nearest_valid(p).ok_or(BathyError::AllNodata)
    }

    fn nearest_valid(&self, p: Vec2) -> Option<f64> {
        let g = &self.geometry;
        let mut best: Option<(f64, f64)> = None;
        for row in 0..g.rows {
            for col in 0..g.cols {
                if let Some(v) = self.get(row, col) {
                    let d = g.center(row, col).distance(p);
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, v));
                    }
                }
            }
        }
        best.map(|(_, v)| v)
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RasterFormat {
    /// ESRI-style text grid.
    AsciiGrid,
    /// Little-endian u16 samples with a `.hdr` text sidecar.
    Raw16,
}

impl RasterFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("r16") | Some("raw") | Some("raw16") => RasterFormat::Raw16,
            _ => RasterFormat::AsciiGrid,
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| BathyError::Io { path: path.into(), source })
}

pub fn load_raster(path: &Path, format: RasterFormat) -> Result<DepthGrid> {
    match format {
        RasterFormat::AsciiGrid => parse_ascii_grid(&read_text(path)?, path),
        RasterFormat::Raw16 => load_raw16(path),
    }
}

/// Parses an ESRI ASCII grid.
pub fn parse_ascii_grid(text: &str, path: &Path) -> Result<DepthGrid> {
    let malformed = |reason: String| BathyError::MalformedHeader { path: path.into(), reason };
    let mut tokens = text.split_whitespace().peekable();
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut cellsize = None;
    let mut nodata = DEFAULT_NODATA;
    while let Some(tok) = tokens.peek() {
        if !tok.starts_with(|c: char| c.is_ascii_alphabetic()) {
            break;
        }
        let key = tokens.next().unwrap().to_ascii_lowercase();
        let value = tokens.next().ok_or_else(|| malformed(format!("missing value for {key}")))?;
        let num: f64 = value.parse().map_err(|_| malformed(format!("{key} = {value}")))?;
        match key.as_str() {
            "ncols" => ncols = Some(num),
            "nrows" => nrows = Some(num),
            "xllcorner" => xll = Some(num),
            "yllcorner" => yll = Some(num),
            "cellsize" => cellsize = Some(num),
            "nodata_value" => nodata = num,
            other => return Err(malformed(format!("unknown key {other}"))),
        }
    }
    let count = |v: Option<f64>, name: &str| -> Result<usize> {
        match v {
            Some(n) if n >= 1.0 && n.fract() == 0.0 => Ok(n as usize),
            Some(n) => Err(malformed(format!("{name} = {n} is not a positive integer"))),
            None => Err(malformed(format!("missing {name}"))),
        }
    };
    let cols = count(ncols, "ncols")?;
    let rows = count(nrows, "nrows")?;
    let origin = Vec2::new(
        xll.ok_or_else(|| malformed("missing xllcorner".into()))?,
        yll.ok_or_else(|| malformed("missing yllcorner".into()))?,
    );
    let cell_size = cellsize.ok_or_else(|| malformed("missing cellsize".into()))?;
    if cell_size <= 0.0 {
        return Err(malformed(format!("cellsize = {cell_size}")));
    }
    let values = tokens
        .map(|t| t.parse::<f64>().map_err(|_| BathyError::BadValue { path: path.into(), token: t.into() }))
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != rows * cols {
        return Err(BathyError::DimensionMismatch {
            path: path.into(),
            expected: rows * cols,
            found: values.len(),
        });
    }
    let mut depths = vec![0.0; rows * cols];
    for (file_row, chunk) in values.chunks(cols).enumerate() {
        let row = rows - 1 - file_row;
        depths[row * cols..(row + 1) * cols].copy_from_slice(chunk);
    }
    DepthGrid::new(GridGeometry { origin, cell_size, rows, cols }, depths, nodata)
}

pub fn format_ascii_grid(grid: &DepthGrid) -> String {
    let g = grid.geometry();
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", g.cols);
    let _ = writeln!(out, "nrows {}", g.rows);
    let _ = writeln!(out, "xllcorner {}", g.origin.x);
    let _ = writeln!(out, "yllcorner {}", g.origin.y);
    let _ = writeln!(out, "cellsize {}", g.cell_size);
    let _ = writeln!(out, "nodata_value {}", grid.nodata());
    for row in (0..g.rows).rev() {
        let line: Vec<String> = (0..g.cols).map(|c| grid.raw(row, c).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_ascii_grid(grid: &DepthGrid, path: &Path) -> Result<()> {
    fs::write(path, format_ascii_grid(grid)).map_err(|source| BathyError::Io { path: path.into(), source })
}

/// Sidecar path for a raw16 heightmap.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

/// Writes a 16-bit heightmap: `[min, max]` depth maps linearly onto
/// `[0, 65535]`, northernmost row first, little-endian. Nodata cells are
/// written as 0 and listed in the sidecar.
pub fn export_heightmap(grid: &DepthGrid, out_path: &Path) -> Result<()> {
    let (min, max) = grid.depth_range().ok_or(BathyError::AllNodata)?;
    let g = grid.geometry();
    let span = max - min;
    let mut bytes = Vec::with_capacity(g.len() * 2);
    let mut nodata_cells = Vec::new();
    for row in (0..g.rows).rev() {
        for col in 0..g.cols {
            let sample = match grid.get(row, col) {
                Some(d) if span > 0.0 => ((d - min) / span * RAW16_MAX).round() as u16,
                Some(_) => 0,
                None => {
                    nodata_cells.push(g.index(row, col));
                    0
                }
            };
            bytes.extend_from_slice(&sample.to_le_bytes());
        }
    }
    let mut hdr = String::new();
    let _ = writeln!(hdr, "format raw16");
    let _ = writeln!(hdr, "version 1");
    let _ = writeln!(hdr, "byte_order little_endian");
    let _ = writeln!(hdr, "row_order north_first");
    let _ = writeln!(hdr, "ncols {}", g.cols);
    let _ = writeln!(hdr, "nrows {}", g.rows);
    let _ = writeln!(hdr, "xllcorner {}", g.origin.x);
    let _ = writeln!(hdr, "yllcorner {}", g.origin.y);
    let _ = writeln!(hdr, "cellsize {}", g.cell_size);
    let _ = writeln!(hdr, "min_depth {min}");
    let _ = writeln!(hdr, "max_depth {max}");
    let _ = writeln!(hdr, "flat {}", span == 0.0);
    let _ = writeln!(hdr, "nodata_value {}", grid.nodata());
    let cells: Vec<String> = nodata_cells.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(hdr, "nodata_cells {}", cells.join(","));
    fs::write(out_path, bytes).map_err(|source| BathyError::Io { path: out_path.into(), source })?;
    let side = sidecar_path(out_path);
    fs::write(&side, hdr).map_err(|source| BathyError::Io { path: side.clone(), source })
}

fn load_raw16(path: &Path) -> Result<DepthGrid> {
    let side = sidecar_path(path);
    let hdr = read_text(&side)?;
    let malformed = |reason: String| BathyError::MalformedHeader { path: side.clone(), reason };
    let mut fields = std::collections::HashMap::new();
    for line in hdr.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line.split_once(' ').unwrap_or((line, ""));
        fields.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    let get = |k: &str| fields.get(k).ok_or_else(|| malformed(format!("missing {k}")));
    let num = |k: &str| -> Result<f64> {
        let v = get(k)?;
        v.parse().map_err(|_| malformed(format!("{k} = {v}")))
    };
    if get("format")? != "raw16" {
        return Err(malformed("format is not raw16".into()));
    }
    let cols = num("ncols")? as usize;
    let rows = num("nrows")? as usize;
    let geometry = GridGeometry {
        origin: Vec2::new(num("xllcorner")?, num("yllcorner")?),
        cell_size: num("cellsize")?,
        rows,
        cols,
    };
    geometry.validate().map_err(|e| malformed(e.to_string()))?;
    let (min, max) = (num("min_depth")?, num("max_depth")?);
    let nodata = num("nodata_value")?;
    let nodata_cells: BTreeSet<usize> = match fields.get("nodata_cells").map(String::as_str) {
        None | Some("") => BTreeSet::new(),
        Some(list) => list
            .split(',')
            .map(|s| s.parse().map_err(|_| malformed(format!("nodata cell {s}"))))
            .collect::<Result<_>>()?,
    };
    let bytes = fs::read(path).map_err(|source| BathyError::Io { path: path.into(), source })?;
    if bytes.len() != rows * cols * 2 {
        return Err(BathyError::DimensionMismatch {
            path: path.into(),
            expected: rows * cols,
            found: bytes.len() / 2,
        });
    }
    let mut depths = vec![0.0; rows * cols];
    for (i, pair) in bytes.chunks_exact(2).enumerate() {
        let sample = u16::from_le_bytes([pair[0], pair[1]]) as f64;
        let row = rows - 1 - i / cols;
        let idx = geometry.index(row, i % cols);
        depths[idx] = if nodata_cells.contains(&idx) {
            nodata
        } else {
            min + sample / RAW16_MAX * (max - min)
        };
    }
    DepthGrid::new(geometry, depths, nodata)
}

// ---------------------------------------------------------------------------
// Tiling
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TilePlacement {
    pub row: usize,
    pub col: usize,
}

/// Tiles with integer placement indices; row index grows northward.
#[derive(Debug, Clone, Default)]
pub struct TileSet {
    pub tiles: Vec<(TilePlacement, DepthGrid)>,
}

/// Merges tiles into one grid. Where tiles overlap the earlier tile wins.
pub fn stitch_tiles(set: &TileSet) -> Result<DepthGrid> {
    let first = &set.tiles.first().ok_or_else(|| BathyError::Tiling("no tiles".into()))?.1;
    let cell = first.geometry().cell_size;
    let nodata = first.nodata();

    let placements: BTreeSet<TilePlacement> = set.tiles.iter().map(|(p, _)| *p).collect();
    if placements.len() != set.tiles.len() {
        return Err(BathyError::Tiling("duplicate placement index".into()));
    }
    let max_row = placements.iter().map(|p| p.row).max().unwrap();
    let max_col = placements.iter().map(|p| p.col).max().unwrap();
    if placements.len() != (max_row + 1) * (max_col + 1) {
        return Err(BathyError::Tiling(format!(
            "placements do not fill a {}x{} rectangle",
            max_row + 1,
            max_col + 1
        )));
    }

    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (p, tile) in &set.tiles {
        let g = tile.geometry();
        if (g.cell_size - cell).abs() > 1e-9 * cell {
            return Err(BathyError::Tiling(format!(
                "tile {:?} cell size {} differs from {}",
                p, g.cell_size, cell
            )));
        }
        lo = Vec2::new(lo.x.min(g.origin.x), lo.y.min(g.origin.y));
        hi = Vec2::new(hi.x.max(g.origin.x + g.width()), hi.y.max(g.origin.y + g.height()));
    }
    let snap = |v: f64, what: &str| -> Result<usize> {
        let n = v / cell;
        if (n - n.round()).abs() > 1e-6 {
            return Err(BathyError::Tiling(format!("{what} is not aligned to the cell lattice")));
        }
        Ok(n.round() as usize)
    };
    let cols = snap(hi.x - lo.x, "mosaic width")?;
    let rows = snap(hi.y - lo.y, "mosaic height")?;
    let geometry = GridGeometry { origin: lo, cell_size: cell, rows, cols };

    // Placement indices must agree with the georeferencing.
    for (a, ta) in &set.tiles {
        for (b, tb) in &set.tiles {
            let (ga, gb) = (ta.geometry(), tb.geometry());
            if (a.col < b.col && ga.origin.x >= gb.origin.x)
                || (a.row < b.row && ga.origin.y >= gb.origin.y)
            {
                return Err(BathyError::Tiling(format!(
                    "placement {a:?} / {b:?} disagrees with tile origins"
                )));
            }
        }
    }

    let mut depths = vec![nodata; geometry.len()];
    let mut filled = vec![false; geometry.len()];
    for (_, tile) in &set.tiles {
        let g = tile.geometry();
        let c_off = snap(g.origin.x - lo.x, "tile x origin")?;
        let r_off = snap(g.origin.y - lo.y, "tile y origin")?;
        for r in 0..g.rows {
            for c in 0..g.cols {
                let idx = geometry.index(r + r_off, c + c_off);
                if !filled[idx] {
                    filled[idx] = true;
                    let v = tile.raw(r, c);
                    depths[idx] = if tile.is_nodata_value(v) { nodata } else { v };
                }
            }
        }
    }
    if let Some(gap) = filled.iter().position(|f| !f) {
        return Err(BathyError::Tiling(format!(
            "gap at mosaic cell ({}, {})",
            gap / cols,
            gap % cols
        )));
    }
    DepthGrid::new(geometry, depths, nodata)
}

/// Cuts a grid into non-overlapping tiles of at most `tile_rows × tile_cols`.
pub fn split_grid(grid: &DepthGrid, tile_rows: usize, tile_cols: usize) -> TileSet {
    let g = grid.geometry();
    let mut tiles = Vec::new();
    for (ti, r0) in (0..g.rows).step_by(tile_rows.max(1)).enumerate() {
        for (tj, c0) in (0..g.cols).step_by(tile_cols.max(1)).enumerate() {
            let rows = tile_rows.min(g.rows - r0);
            let cols = tile_cols.min(g.cols - c0);
            let mut depths = Vec::with_capacity(rows * cols);
            for r in r0..r0 + rows {
                for c in c0..c0 + cols {
                    depths.push(grid.raw(r, c));
                }
            }
            let geometry = GridGeometry {
                origin: g.origin + Vec2::new(c0 as f64 * g.cell_size, r0 as f64 * g.cell_size),
                cell_size: g.cell_size,
                rows,
                cols,
            };
            let tile = DepthGrid { geometry, depths, nodata: grid.nodata() };
            tiles.push((TilePlacement { row: ti, col: tj }, tile));
        }
    }
    TileSet { tiles }
}

// ---------------------------------------------------------------------------
// Occupancy
// ---------------------------------------------------------------------------

/// How the required under-keel clearance is derived from the draft.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum UkcPolicy {
    /// Fixed clearance in metres.
    Fixed(f64),
    /// Clearance as a fraction of draft.
    FractionOfDraft(f64),
}

impl Default for UkcPolicy {
    fn default() -> Self {
        UkcPolicy::Fixed(1.0)
    }
}

impl UkcPolicy {
    pub fn clearance(&self, draft: f64) -> f64 {
        match *self {
            UkcPolicy::Fixed(m) => m,
            UkcPolicy::FractionOfDraft(f) => f * draft,
        }
    }
}

/// Navigability map: `true` marks a non-navigable cell.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    blocked: Vec<bool>,
    threshold: f64,
}

/// Cells shallower than `draft + ukc`, and nodata cells, are non-navigable.
pub fn build_occupancy(grid: &DepthGrid, draft: f64, ukc: f64) -> Result<OccupancyGrid> {
    if !(draft > 0.0) || !(ukc >= 0.0) {
        return Err(BathyError::InvalidClearance { draft, ukc });
    }
    let threshold = draft + ukc;
    let blocked = grid
        .depths
        .iter()
        .map(|&d| grid.is_nodata_value(d) || d < threshold)
        .collect();
    Ok(OccupancyGrid { geometry: grid.geometry, blocked, threshold })
}

impl OccupancyGrid {
    /// Grid from an explicit blocked mask; used by planners and tests.
    pub fn from_mask(geometry: GridGeometry, blocked: Vec<bool>, threshold: f64) -> Result<Self> {
        geometry.validate()?;
        if blocked.len() != geometry.len() {
            return Err(BathyError::InvalidGrid("mask size".into()));
        }
        Ok(Self { geometry, blocked, threshold })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn is_blocked(&self, row: usize, col: usize) -> bool {
        self.blocked[self.geometry.index(row, col)]
    }

    pub fn set_blocked(&mut self, row: usize, col: usize, blocked: bool) {
        let i = self.geometry.index(row, col);
        self.blocked[i] = blocked;
    }

    /// Outside the grid counts as non-navigable.
    pub fn is_blocked_at(&self, p: Vec2) -> bool {
        match self.geometry.cell_of(p) {
            Some((r, c)) => self.is_blocked(r, c),
            None => true,
        }
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// Every cell the segment `a → b` touches, in order. Corner crossings
    /// include both side cells. Points outside the grid are skipped.
    pub fn cells_on_segment(&self, a: Vec2, b: Vec2) -> Vec<(usize, usize)> {
        let g = &self.geometry;
        let to_cell = |p: Vec2| ((p - g.origin).x / g.cell_size, (p - g.origin).y / g.cell_size);
        let (ax, ay) = to_cell(a);
        let (bx, by) = to_cell(b);
        let mut out = Vec::new();
        let mut push = |cx: i64, cy: i64| {
            if cx >= 0 && cy >= 0 && (cx as usize) < g.cols && (cy as usize) < g.rows {
                let cell = (cy as usize, cx as usize);
                if out.last() != Some(&cell) {
                    out.push(cell);
                }
            }
        };
        let mut cx = ax.floor() as i64;
        let mut cy = ay.floor() as i64;
        let end_x = bx.floor() as i64;
        let end_y = by.floor() as i64;
        let dx = bx - ax;
        let dy = by - ay;
        let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
        let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
        let t_delta_x = if dx != 0.0 { (1.0 / dx).abs() } else { f64::INFINITY };
        let t_delta_y = if dy != 0.0 { (1.0 / dy).abs() } else { f64::INFINITY };
        let mut t_max_x = if dx > 0.0 {
            ((cx + 1) as f64 - ax) / dx
        } else if dx < 0.0 {
            (cx as f64 - ax) / dx
        } else {
            f64::INFINITY
        };
        let mut t_max_y = if dy > 0.0 {
            ((cy + 1) as f64 - ay) / dy
        } else if dy < 0.0 {
            (cy as f64 - ay) / dy
        } else {
            f64::INFINITY
        };
        push(cx, cy);
        let limit = (end_x - cx).abs() + (end_y - cy).abs() + 2;
        for _ in 0..limit {
            if cx == end_x && cy == end_y {
                break;
            }
            if t_max_x > 1.0 && t_max_y > 1.0 {
                break;
            }
            if (t_max_x - t_max_y).abs() < 1e-12 {
                // passing exactly through a lattice corner: touch both neighbours
                push(cx + step_x, cy);
                push(cx, cy + step_y);
                cx += step_x;
                cy += step_y;
                t_max_x += t_delta_x;
                t_max_y += t_delta_y;
            } else if t_max_x < t_max_y {
                cx += step_x;
                t_max_x += t_delta_x;
            } else {
                cy += step_y;
                t_max_y += t_delta_y;
            }
            push(cx, cy);
        }
        out
    }

    /// True iff the whole segment stays inside the grid over navigable cells.
    pub fn segment_clear(&self, a: Vec2, b: Vec2) -> bool {
        if !self.geometry.contains(a) || !self.geometry.contains(b) {
            return false;
        }
        self.cells_on_segment(a, b).iter().all(|&(r, c)| !self.is_blocked(r, c))
    }
}
