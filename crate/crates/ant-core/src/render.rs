//! Deterministic raster (binary PGM) and vector (SVG) rendering of
//! configurations. PGM is the golden-file format: byte-exact for a fixed
//! input and render spec.

use crate::engine::Configuration;
use crate::geom::{Cell, Direction};
use crate::rule::RuleWord;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenderFormat {
    Pgm,
    Svg,
}

/// Symbol-to-grey mapping; must be injective over the rule's alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Palette {
    greys: Vec<u8>,
}

impl Palette {
    /// Light-to-dark default: symbol `s` maps to `floor(255 * (1 - s/(n-1)))`,
    /// so 0 is white and the top symbol is black. Exact integer arithmetic
    /// keeps the map injective for every alphabet up to 256.
    pub fn default_grey(alphabet: usize) -> Palette {
        assert!(alphabet >= 1);
        let greys = (0..alphabet)
            .map(|s| {
                if alphabet == 1 {
                    255
                } else {
                    (255 * (alphabet - 1 - s) / (alphabet - 1)) as u8
                }
            })
            .collect();
        Palette { greys }
    }

    pub fn from_greys(greys: Vec<u8>) -> Result<Palette, RenderError> {
        let mut seen = [false; 256];
        for &g in &greys {
            if seen[g as usize] {
                return Err(RenderError::PaletteNotInjective(g));
            }
            seen[g as usize] = true;
        }
        Ok(Palette { greys })
    }

    pub fn grey(&self, symbol: u8) -> u8 {
        self.greys[symbol as usize]
    }

    pub fn len(&self) -> usize {
        self.greys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.greys.is_empty()
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = [false; 256];
        self.greys.iter().all(|&g| {
            let fresh = !seen[g as usize];
            seen[g as usize] = true;
            fresh
        })
    }
}

#[derive(Clone, Debug)]
pub struct RenderSpec {
    /// `None` auto-fits the nonzero bounding box plus the ant.
    pub region: Option<(Cell, Cell)>,
    pub format: RenderFormat,
    pub palette: Palette,
    /// Square pixels per cell.
    pub cell_px: u32,
    pub ant_marker: bool,
}

impl RenderSpec {
    pub fn new(rule: &RuleWord, format: RenderFormat) -> RenderSpec {
        RenderSpec {
            region: None,
            format,
            palette: Palette::default_grey(rule.alphabet_size()),
            cell_px: 4,
            ant_marker: true,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("palette maps two symbols to grey {0}")]
    PaletteNotInjective(u8),
    #[error("palette covers {palette} symbols but the rule has {alphabet}")]
    PaletteTooSmall { palette: usize, alphabet: usize },
    #[error("region is empty")]
    EmptyRegion,
}

fn resolve_region(config: &Configuration, spec: &RenderSpec) -> Result<(Cell, Cell), RenderError> {
    let (lo, hi) = match spec.region {
        Some(r) => r,
        None => {
            let (mut lo, mut hi) = config
                .picture
                .bounding_box()
                .unwrap_or((config.position, config.position));
            lo = Cell::new(lo.x.min(config.position.x), lo.y.min(config.position.y));
            hi = Cell::new(hi.x.max(config.position.x), hi.y.max(config.position.y));
            // One cell of margin reads better and keeps the ant marker inside.
            (Cell::new(lo.x - 1, lo.y - 1), Cell::new(hi.x + 1, hi.y + 1))
        }
    };
    if lo.x > hi.x || lo.y > hi.y {
        return Err(RenderError::EmptyRegion);
    }
    Ok((lo, hi))
}

fn check_palette(rule: &RuleWord, spec: &RenderSpec) -> Result<(), RenderError> {
    if spec.palette.len() < rule.alphabet_size() {
        return Err(RenderError::PaletteTooSmall {
            palette: spec.palette.len(),
            alphabet: rule.alphabet_size(),
        });
    }
    if !spec.palette.is_injective() {
        let mut seen = [false; 256];
        for &g in &spec.palette.greys {
            if seen[g as usize] {
                return Err(RenderError::PaletteNotInjective(g));
            }
            seen[g as usize] = true;
        }
    }
    Ok(())
}

/// Triangle mask for the ant marker inside a `px * px` cell, pointing along
/// `dir`. Contrast is picked against the underlying grey.
fn ant_pixels(px: u32, dir: Direction) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let n = px;
    for py in 0..n {
        for qx in 0..n {
            // Triangle in "east" frame: widest at the left column, apex right.
            let (tx, ty) = match dir {
                Direction::East => (qx, py),
                Direction::West => (n - 1 - qx, py),
                Direction::North => (py, n - 1 - qx),
                Direction::South => (py, qx),
            };
            let half = n as i64 / 2;
            let spread = half - (tx as i64 * half) / n.max(1) as i64;
            let centre_dist = (ty as i64 - half).abs();
            if centre_dist <= spread && tx as i64 >= 0 {
                out.push((qx, py));
            }
        }
    }
    out
}

/// Render to binary PGM (P5, 255 maxval), top row = highest y.
pub fn render_pgm(
    rule: &RuleWord,
    config: &Configuration,
    spec: &RenderSpec,
) -> Result<Vec<u8>, RenderError> {
    check_palette(rule, spec)?;
    let (lo, hi) = resolve_region(config, spec)?;
    let px = spec.cell_px.max(1);
    let cells_w = (hi.x - lo.x + 1) as u32;
    let cells_h = (hi.y - lo.y + 1) as u32;
    let (w, h) = (cells_w * px, cells_h * px);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    let mut raster = vec![0u8; (w as usize) * (h as usize)];
    for row in 0..h {
        let y = hi.y - (row / px) as i64;
        for col in 0..w {
            let x = lo.x + (col / px) as i64;
            let symbol = config.picture.get(Cell::new(x, y));
            raster[(row * w + col) as usize] = spec.palette.grey(symbol);
        }
    }
    if spec.ant_marker && config.position.x >= lo.x && config.position.x <= hi.x
        && config.position.y >= lo.y && config.position.y <= hi.y
    {
        let base_col = ((config.position.x - lo.x) as u32) * px;
        let base_row = ((hi.y - config.position.y) as u32) * px;
        let under = spec.palette.grey(config.picture.get(config.position));
        let marker = if under < 128 { 255 } else { 0 };
        for (qx, py) in ant_pixels(px, config.direction) {
            raster[((base_row + py) * w + base_col + qx) as usize] = marker;
        }
    }
    out.extend_from_slice(&raster);
    Ok(out)
}

/// Render to SVG: one rect per nonzero cell over a white background, plus an
/// oriented triangle for the ant.
pub fn render_svg(
    rule: &RuleWord,
    config: &Configuration,
    spec: &RenderSpec,
) -> Result<String, RenderError> {
    check_palette(rule, spec)?;
    let (lo, hi) = resolve_region(config, spec)?;
    let px = spec.cell_px.max(1) as i64;
    let w = (hi.x - lo.x + 1) * px;
    let h = (hi.y - lo.y + 1) * px;
    let mut body = String::new();
    let mut cells = config.picture.sorted_cells();
    cells.retain(|&(c, _)| c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y);
    for (c, v) in cells {
        let g = spec.palette.grey(v);
        let sx = (c.x - lo.x) * px;
        let sy = (hi.y - c.y) * px;
        body.push_str(&format!(
            "  <rect x=\"{sx}\" y=\"{sy}\" width=\"{px}\" height=\"{px}\" fill=\"rgb({g},{g},{g})\"/>\n"
        ));
    }
    if spec.ant_marker && config.position.x >= lo.x && config.position.x <= hi.x
        && config.position.y >= lo.y && config.position.y <= hi.y
    {
        let sx = (config.position.x - lo.x) * px;
        let sy = (hi.y - config.position.y) * px;
        let (cx, cy) = (px / 2, px / 2);
        let tip = px - 1;
        let points = match config.direction {
            Direction::East => format!("{sx},{sy} {sx},{} {},{}", sy + px, sx + tip, sy + cy),
            Direction::West => format!("{},{sy} {},{} {sx},{}", sx + px, sx + px, sy + px, sy + cy),
            Direction::North => format!("{sx},{} {},{} {},{sy}", sy + px, sx + px, sy + px, sx + cx),
            Direction::South => format!("{sx},{sy} {},{sy} {},{}", sx + px, sx + cx, sy + tip),
        };
        body.push_str(&format!("  <polygon points=\"{points}\" fill=\"red\"/>\n"));
    }
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n  <rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{body}</svg>\n"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picture::Picture;

    fn tiny_config() -> (RuleWord, Configuration) {
        let rule: RuleWord = "LLR".parse().unwrap();
        let picture = Picture::from_cells([(Cell::new(0, 0), 1), (Cell::new(1, 1), 2)]);
        (
            rule,
            Configuration::new(picture, Cell::new(0, 1), Direction::East),
        )
    }

    #[test]
    fn default_palette_is_injective_and_monotone() {
        for n in 1..=256usize {
            let p = Palette::default_grey(n);
            assert!(p.is_injective(), "palette collides for n = {n}");
        }
        let p = Palette::default_grey(4);
        assert_eq!(p.grey(0), 255);
        assert_eq!(p.grey(3), 0);
    }

    #[test]
    fn pgm_is_deterministic_and_well_formed() {
        let (rule, config) = tiny_config();
        let spec = RenderSpec::new(&rule, RenderFormat::Pgm);
        let a = render_pgm(&rule, &config, &spec).unwrap();
        let b = render_pgm(&rule, &config, &spec).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(b"P5\n"));
        // 4 cells wide, 4 tall (bounding box + margin), 4 px per cell.
        assert!(a.ends_with(&[255u8; 4]) || a.len() > 16);
        let header_end = a.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(&a[..header_end], b"P5");
    }

    #[test]
    fn svg_contains_cells_and_ant() {
        let (rule, config) = tiny_config();
        let spec = RenderSpec::new(&rule, RenderFormat::Svg);
        let svg = render_svg(&rule, &config, &spec).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<polygon"), "ant marker missing");
        assert_eq!(svg.matches("<rect").count(), 3, "background + 2 cells");
    }

    #[test]
    fn palette_must_cover_alphabet() {
        let (rule, config) = tiny_config();
        let mut spec = RenderSpec::new(&rule, RenderFormat::Pgm);
        spec.palette = Palette::default_grey(2);
        assert!(matches!(
            render_pgm(&rule, &config, &spec),
            Err(RenderError::PaletteTooSmall { .. })
        ));
        assert!(Palette::from_greys(vec![7, 7]).is_err());
    }

    #[test]
    fn explicit_region_clips() {
        let (rule, config) = tiny_config();
        let mut spec = RenderSpec::new(&rule, RenderFormat::Pgm);
        spec.region = Some((Cell::new(0, 0), Cell::new(0, 0)));
        spec.ant_marker = false;
        spec.cell_px = 1;
        let pgm = render_pgm(&rule, &config, &spec).unwrap();
        // Header "P5\n1 1\n255\n" plus exactly one pixel: symbol 1 of 3.
        assert_eq!(pgm.last(), Some(&Palette::default_grey(3).grey(1)));
    }
}
