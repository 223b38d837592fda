//! Occupancy grids in the ROS `map_server` layout (YAML metadata plus a PGM
//! raster) and their reduction to axis-aligned obstacle rectangles.
//!
//! PGM row 0 is the top of the image; grid row 0 is the bottom of the map, so
//! world y grows with the grid row index.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map yaml: {0}")]
    Yaml(#[from] serde_yaml::Error),
    #[error("map yaml: {0}")]
    Metadata(String),
    #[error("pgm: {0}")]
    Pgm(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid rectangle ({x_bl}, {y_bl})-({x_tr}, {y_tr})")]
    InvalidRect { x_bl: f64, y_bl: f64, x_tr: f64, y_tr: f64 },
    #[error("inflation radius must be non-negative, got {0}")]
    NegativeInflation(f64),
    #[error("coordinate out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Free,
    Occupied,
    Unknown,
}

/// Thresholds from the map YAML.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapThresholds {
    pub occupied_thresh: f64,
    pub free_thresh: f64,
    pub negate: bool,
}

impl MapThresholds {
    pub fn new(occupied_thresh: f64, free_thresh: f64, negate: bool) -> Result<Self, MapError> {
        if !(0.0..=1.0).contains(&free_thresh)
            || !(0.0..=1.0).contains(&occupied_thresh)
            || free_thresh >= occupied_thresh
        {
            return Err(MapError::Metadata(format!(
                "need 0 <= free_thresh < occupied_thresh <= 1, got free {free_thresh}, occupied {occupied_thresh}"
            )));
        }
        Ok(Self { occupied_thresh, free_thresh, negate })
    }

    pub fn classify(&self, pixel: u8) -> Cell {
        let p = f64::from(pixel);
        let occupancy = if self.negate { p / 255.0 } else { (255.0 - p) / 255.0 };
        if occupancy >= self.occupied_thresh {
            Cell::Occupied
        } else if occupancy <= self.free_thresh {
            Cell::Free
        } else {
            Cell::Unknown
        }
    }
}

impl Default for MapThresholds {
    fn default() -> Self {
        Self { occupied_thresh: 0.65, free_thresh: 0.196, negate: false }
    }
}

/// The YAML half of a `map_server` map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub image: String,
    pub resolution: f64,
    pub origin: [f64; 3],
    pub occupied_thresh: f64,
    pub free_thresh: f64,
    #[serde(deserialize_with = "bool_or_int")]
    pub negate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

fn bool_or_int<'de, D: serde::Deserializer<'de>>(de: D) -> Result<bool, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Flag {
        Bool(bool),
        Int(i64),
    }
    match Flag::deserialize(de)? {
        Flag::Bool(b) => Ok(b),
        Flag::Int(0) => Ok(false),
        Flag::Int(1) => Ok(true),
        Flag::Int(n) => Err(serde::de::Error::custom(format!("negate must be 0 or 1, got {n}"))),
    }
}

impl MapMetadata {
    pub fn parse(yaml_text: &str) -> Result<Self, MapError> {
        let meta: MapMetadata = serde_yaml::from_str(yaml_text)?;
        if !(meta.resolution > 0.0) {
            return Err(MapError::Metadata(format!("resolution must be positive, got {}", meta.resolution)));
        }
        MapThresholds::new(meta.occupied_thresh, meta.free_thresh, meta.negate)?;
        Ok(meta)
    }

    pub fn thresholds(&self) -> MapThresholds {
        MapThresholds {
            occupied_thresh: self.occupied_thresh,
            free_thresh: self.free_thresh,
            negate: self.negate,
        }
    }
}

/// Axis-aligned obstacle in world coordinates, given by its bottom-left and
/// top-right corners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRect {
    pub x_bl: f64,
    pub y_bl: f64,
    pub x_tr: f64,
    pub y_tr: f64,
}

impl ObstacleRect {
    pub fn new(x_bl: f64, y_bl: f64, x_tr: f64, y_tr: f64) -> Result<Self, MapError> {
        if !(x_bl < x_tr && y_bl < y_tr) {
            return Err(MapError::InvalidRect { x_bl, y_bl, x_tr, y_tr });
        }
        Ok(Self { x_bl, y_bl, x_tr, y_tr })
    }

    /// Corners in the order bottom-left, bottom-right, top-right, top-left.
    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x_bl, self.y_bl),
            Point::new(self.x_tr, self.y_bl),
            Point::new(self.x_tr, self.y_tr),
            Point::new(self.x_bl, self.y_tr),
        ]
    }

    pub fn width(&self) -> f64 {
        self.x_tr - self.x_bl
    }

    pub fn height(&self) -> f64 {
        self.y_tr - self.y_bl
    }

    pub fn contains_rect(&self, other: &ObstacleRect) -> bool {
        self.x_bl <= other.x_bl && self.y_bl <= other.y_bl && other.x_tr <= self.x_tr && other.y_tr <= self.y_tr
    }

    /// Closed-set overlap test.
    pub fn overlaps(&self, other: &ObstacleRect) -> bool {
        self.x_bl <= other.x_tr && other.x_bl <= self.x_tr && self.y_bl <= other.y_tr && other.y_bl <= self.y_tr
    }
}

/// Planning region `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Workspace {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    /// Intersection with `rect`, or `None` when it falls completely outside.
    pub fn clip(&self, rect: &ObstacleRect) -> Option<ObstacleRect> {
        ObstacleRect::new(
            rect.x_bl.max(self.x_min),
            rect.y_bl.max(self.y_min),
            rect.x_tr.min(self.x_max),
            rect.y_tr.min(self.y_max),
        )
        .ok()
    }
}

/// Ternary occupancy raster. `cells` is row-major with row 0 at the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    /// World pose `(x, y, yaw)` of the lower-left corner of cell (0, 0).
    origin: [f64; 3],
    cells: Vec<Cell>,
}

impl OccupancyGrid {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: [f64; 3],
        cells: Vec<Cell>,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::InvalidGrid(format!("empty grid {width}x{height}")));
        }
        if !(resolution > 0.0) {
            return Err(MapError::InvalidGrid(format!("resolution must be positive, got {resolution}")));
        }
        if cells.len() != width * height {
            return Err(MapError::InvalidGrid(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(Self { width, height, resolution, origin, cells })
    }

    pub fn filled(width: usize, height: usize, resolution: f64, origin: [f64; 3], cell: Cell) -> Result<Self, MapError> {
        Self::new(width, height, resolution, origin, vec![cell; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, col: usize, row: usize) -> Cell {
        self.cells[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, cell: Cell) {
        self.cells[row * self.width + col] = cell;
    }

    /// World extent covered by the raster.
    pub fn workspace(&self) -> Workspace {
        Workspace::new(
            self.origin[0],
            self.origin[1],
            self.origin[0] + self.width as f64 * self.resolution,
            self.origin[1] + self.height as f64 * self.resolution,
        )
    }

    pub fn cell_to_world(&self, col: usize, row: usize) -> Result<Point, MapError> {
        if col >= self.width || row >= self.height {
            return Err(MapError::OutOfRange(format!(
                "cell ({col}, {row}) outside {}x{}",
                self.width, self.height
            )));
        }
        Ok(Point::new(
            self.origin[0] + (col as f64 + 0.5) * self.resolution,
            self.origin[1] + (row as f64 + 0.5) * self.resolution,
        ))
    }

    pub fn world_to_cell(&self, p: Point) -> Result<(usize, usize), MapError> {
        let fx = ((p.x - self.origin[0]) / self.resolution).floor();
        let fy = ((p.y - self.origin[1]) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return Err(MapError::OutOfRange(format!("point ({}, {}) outside the map", p.x, p.y)));
        }
        Ok((fx as usize, fy as usize))
    }

    /// Sets every cell whose center lies in the closed world rectangle.
    pub fn paint_rect(&mut self, rect: &ObstacleRect, cell: Cell) {
        for row in 0..self.height {
            for col in 0..self.width {
                let x = self.origin[0] + (col as f64 + 0.5) * self.resolution;
                let y = self.origin[1] + (row as f64 + 0.5) * self.resolution;
                if rect.x_bl <= x && x <= rect.x_tr && rect.y_bl <= y && y <= rect.y_tr {
                    self.set(col, row, cell);
                }
            }
        }
    }

    /// World rectangle spanned by the inclusive cell range.
    fn cell_block_rect(&self, c0: usize, r0: usize, c1: usize, r1: usize) -> ObstacleRect {
        let res = self.resolution;
        ObstacleRect {
            x_bl: self.origin[0] + c0 as f64 * res,
            y_bl: self.origin[1] + r0 as f64 * res,
            x_tr: self.origin[0] + (c1 + 1) as f64 * res,
            y_tr: self.origin[1] + (r1 + 1) as f64 * res,
        }
    }
}

/// Parses a `map_server` map from its YAML text and PGM bytes.
pub fn parse_map(yaml_text: &str, pgm_bytes: &[u8]) -> Result<OccupancyGrid, MapError> {
    let meta = MapMetadata::parse(yaml_text)?;
    let thresholds = meta.thresholds();
    let image = PgmImage::parse(pgm_bytes)?;

    let mut cells = Vec::with_capacity(image.width * image.height);
    // Image rows run top to bottom; grid rows bottom to top.
    for img_row in (0..image.height).rev() {
        let line = &image.pixels[img_row * image.width..(img_row + 1) * image.width];
        cells.extend(line.iter().map(|&p| thresholds.classify(p)));
    }
    OccupancyGrid::new(image.width, image.height, meta.resolution, meta.origin, cells)
}

/// Loads `<yaml>` and the image it names (relative to the YAML's directory).
pub fn load_map(yaml_path: &std::path::Path) -> Result<OccupancyGrid, MapError> {
    let yaml_text = std::fs::read_to_string(yaml_path)?;
    let meta = MapMetadata::parse(&yaml_text)?;
    let image_path = yaml_path
        .parent()
        .unwrap_or_else(|| std::path::Path::new("."))
        .join(&meta.image);
    let bytes = std::fs::read(image_path)?;
    parse_map(&yaml_text, &bytes)
}

/// Writes `<yaml_path>` and a binary PGM next to it with the same stem.
pub fn save_map(grid: &OccupancyGrid, yaml_path: &std::path::Path) -> Result<(), MapError> {
    let image = yaml_path.with_extension("pgm");
    let image_name = image
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| MapError::Metadata(format!("bad map path {}", yaml_path.display())))?;
    std::fs::write(&image, grid_to_pgm(grid).to_p5())?;
    let yaml = serde_yaml::to_string(&grid_metadata(grid, &image_name))?;
    std::fs::write(yaml_path, yaml)?;
    Ok(())
}

/// 8-bit greyscale raster decoded from P2 or P5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

impl PgmImage {
    pub fn parse(bytes: &[u8]) -> Result<Self, MapError> {
        let mut pos = 0;
        let magic = next_token(bytes, &mut pos).ok_or_else(|| MapError::Pgm("missing magic number".into()))?;
        let binary = match magic {
            b"P5" => true,
            b"P2" => false,
            other => {
                return Err(MapError::Pgm(format!(
                    "unsupported magic number {:?}",
                    String::from_utf8_lossy(other)
                )))
            }
        };
        let mut header = [0usize; 3];
        for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
            let tok = next_token(bytes, &mut pos).ok_or_else(|| MapError::Pgm(format!("missing {name}")))?;
            *slot = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| MapError::Pgm(format!("bad {name} {:?}", String::from_utf8_lossy(tok))))?;
        }
        let [width, height, maxval] = header;
        if maxval != 255 {
            return Err(MapError::Pgm(format!("maxval must be 255, got {maxval}")));
        }
        if width == 0 || height == 0 {
            return Err(MapError::Pgm(format!("empty image {width}x{height}")));
        }
        let expected = width * height;

        let pixels = if binary {
            // Exactly one whitespace byte separates the header from the raster.
            let data = bytes.get(pos + 1..).unwrap_or(&[]);
            if data.len() != expected {
                return Err(MapError::Pgm(format!("expected {expected} pixels, got {}", data.len())));
            }
            data.to_vec()
        } else {
            let mut out = Vec::with_capacity(expected);
            while let Some(tok) = next_token(bytes, &mut pos) {
                let v: u16 = std::str::from_utf8(tok)
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| MapError::Pgm(format!("bad pixel {:?}", String::from_utf8_lossy(tok))))?;
                if v > 255 {
                    return Err(MapError::Pgm(format!("pixel {v} exceeds maxval")));
                }
                out.push(v as u8);
            }
            if out.len() != expected {
                return Err(MapError::Pgm(format!("expected {expected} pixels, got {}", out.len())));
            }
            out
        };
        Ok(Self { width, height, pixels })
    }

    /// Binary (P5) encoding.
    pub fn to_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Header tokenizer: skips whitespace and `#` comments. Leaves `pos` on the
/// byte right after the token.
fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(&bytes[start..*pos])
}

/// Renders a grid back to `map_server` form using the conventional pixel
/// values (0 occupied, 254 free, 205 unknown).
pub fn grid_to_pgm(grid: &OccupancyGrid) -> PgmImage {
    let mut pixels = Vec::with_capacity(grid.width * grid.height);
    for row in (0..grid.height).rev() {
        for col in 0..grid.width {
            pixels.push(match grid.get(col, row) {
                Cell::Occupied => 0,
                Cell::Free => 254,
                Cell::Unknown => 205,
            });
        }
    }
    PgmImage { width: grid.width, height: grid.height, pixels }
}

pub fn grid_metadata(grid: &OccupancyGrid, image: &str) -> MapMetadata {
    let t = MapThresholds::default();
    MapMetadata {
        image: image.to_string(),
        resolution: grid.resolution,
        origin: grid.origin,
        occupied_thresh: t.occupied_thresh,
        free_thresh: t.free_thresh,
        negate: false,
        mode: None,
    }
}

/// How occupied regions are boxed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxingMode {
    /// One bounding box per 8-connected component.
    #[default]
    ComponentBounds,
    /// Split a component's box in half along its longer axis while the box is
    /// less than half full, down to 2x2 cells.
    RecursiveSplit,
}

/// Bounding boxes of the 8-connected components of non-free cells, in world
/// coordinates, sorted by `(x_bl, y_bl)`. Unknown cells count as occupied.
pub fn extract_obstacles(grid: &OccupancyGrid) -> Vec<ObstacleRect> {
    extract_obstacles_with(grid, BoxingMode::ComponentBounds)
}

pub fn extract_obstacles_with(grid: &OccupancyGrid, mode: BoxingMode) -> Vec<ObstacleRect> {
    let (w, h) = (grid.width, grid.height);
    let blocked = |i: usize| grid.cells[i] != Cell::Free;
    let mut seen = vec![false; w * h];
    let mut rects = Vec::new();
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if seen[start] || !blocked(start) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(i) = queue.pop_front() {
            members.push((i % w, i / w));
            let (c, r) = ((i % w) as isize, (i / w) as isize);
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (nc, nr) = (c + dc, r + dr);
                    if (dc, dr) == (0, 0) || nc < 0 || nr < 0 || nc >= w as isize || nr >= h as isize {
                        continue;
                    }
                    let j = nr as usize * w + nc as usize;
                    if !seen[j] && blocked(j) {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        match mode {
            BoxingMode::ComponentBounds => {
                let (c0, r0, c1, r1) = cell_bounds(&members);
                rects.push(grid.cell_block_rect(c0, r0, c1, r1));
            }
            BoxingMode::RecursiveSplit => split_boxes(grid, &members, &mut rects),
        }
    }
    rects.sort_by(|a, b| a.x_bl.total_cmp(&b.x_bl).then(a.y_bl.total_cmp(&b.y_bl)));
    rects
}

fn cell_bounds(cells: &[(usize, usize)]) -> (usize, usize, usize, usize) {
    cells.iter().fold((usize::MAX, usize::MAX, 0, 0), |(c0, r0, c1, r1), &(c, r)| {
        (c0.min(c), r0.min(r), c1.max(c), r1.max(r))
    })
}

fn split_boxes(grid: &OccupancyGrid, cells: &[(usize, usize)], out: &mut Vec<ObstacleRect>) {
    let (c0, r0, c1, r1) = cell_bounds(cells);
    let (bw, bh) = (c1 - c0 + 1, r1 - r0 + 1);
    let fill = cells.len() as f64 / (bw * bh) as f64;
    if fill >= 0.5 || (bw <= 2 && bh <= 2) {
        out.push(grid.cell_block_rect(c0, r0, c1, r1));
        return;
    }
    let (low, high): (Vec<_>, Vec<_>) = if bw >= bh {
        let mid = c0 + bw / 2;
        cells.iter().partition(|&&(c, _)| c < mid)
    } else {
        let mid = r0 + bh / 2;
        cells.iter().partition(|&&(_, r)| r < mid)
    };
    for half in [low, high] {
        if !half.is_empty() {
            split_boxes(grid, &half, out);
        }
    }
}

/// Grows every rectangle by `r` on each side, then clips it to `workspace`.
/// Rectangles that end up entirely outside the workspace are dropped.
pub fn inflate_obstacles(
    rects: &[ObstacleRect],
    r: f64,
    workspace: &Workspace,
) -> Result<Vec<ObstacleRect>, MapError> {
    if !(r >= 0.0) {
        return Err(MapError::NegativeInflation(r));
    }
    Ok(rects
        .iter()
        .map(|rect| inflate_rect(rect, r))
        .filter_map(|rect| workspace.clip(&rect))
        .collect())
}

/// Unclipped inflation: the bottom-left corner moves by `(-r, -r)`, the
/// top-right by `(+r, +r)` (and the other two corners accordingly).
pub fn inflate_rect(rect: &ObstacleRect, r: f64) -> ObstacleRect {
    ObstacleRect {
        x_bl: rect.x_bl - r,
        y_bl: rect.y_bl - r,
        x_tr: rect.x_tr + r,
        y_tr: rect.y_tr + r,
    }
}
