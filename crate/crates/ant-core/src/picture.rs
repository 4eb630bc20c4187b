//! Sparse unbounded picture, stored as fixed-size square tiles.
//!
//! Orbits drift arbitrarily far, so the grid is a hash map of 64x64 byte
//! tiles keyed by tile coordinate. The tile the ant currently works in is
//! checked out of the map into a `hot` slot, so the hot loop touches the
//! hash map only when the ant crosses a tile boundary.

use crate::geom::Cell;
use std::collections::HashMap;

const TILE_BITS: u32 = 6;
const TILE_MASK: i64 = (1 << TILE_BITS) - 1;
const TILE_AREA: usize = 1 << (2 * TILE_BITS);

type TileKey = (i64, i64);
type TileBuf = Box<[u8; TILE_AREA]>;

#[inline(always)]
fn tile_key(c: Cell) -> TileKey {
    (c.x >> TILE_BITS, c.y >> TILE_BITS)
}

#[inline(always)]
fn tile_index(c: Cell) -> usize {
    (((c.y & TILE_MASK) << TILE_BITS) | (c.x & TILE_MASK)) as usize
}

/// A total assignment of symbols to the grid; absent cells carry symbol 0.
///
/// Equality is equality as total functions: two pictures compare equal iff
/// they agree on every cell, regardless of tile layout.
#[derive(Clone)]
pub struct Picture {
    tiles: HashMap<TileKey, TileBuf>,
    hot_key: TileKey,
    hot: TileBuf,
    nonzero: u64,
}

impl Default for Picture {
    fn default() -> Self {
        Picture {
            tiles: HashMap::new(),
            hot_key: (0, 0),
            hot: Box::new([0u8; TILE_AREA]),
            nonzero: 0,
        }
    }
}

impl Picture {
    pub fn new() -> Self {
        Picture::default()
    }

    pub fn from_cells<I: IntoIterator<Item = (Cell, u8)>>(cells: I) -> Self {
        let mut p = Picture::new();
        for (c, v) in cells {
            p.set(c, v);
        }
        p
    }

    pub fn get(&self, c: Cell) -> u8 {
        let k = tile_key(c);
        if k == self.hot_key {
            return self.hot[tile_index(c)];
        }
        self.tiles.get(&k).map_or(0, |t| t[tile_index(c)])
    }

    #[cold]
    fn switch_tile(&mut self, k: TileKey) {
        let fresh = self
            .tiles
            .remove(&k)
            .unwrap_or_else(|| Box::new([0u8; TILE_AREA]));
        let old = std::mem::replace(&mut self.hot, fresh);
        self.tiles.insert(self.hot_key, old);
        self.hot_key = k;
    }

    #[inline(always)]
    fn hot_buf(&mut self, k: TileKey) -> &mut TileBuf {
        if k != self.hot_key {
            self.switch_tile(k);
        }
        &mut self.hot
    }

    pub fn set(&mut self, c: Cell, v: u8) {
        let idx = tile_index(c);
        let buf = self.hot_buf(tile_key(c));
        let old = buf[idx];
        buf[idx] = v;
        if old == 0 && v != 0 {
            self.nonzero += 1;
        } else if old != 0 && v == 0 {
            self.nonzero -= 1;
        }
    }

    /// Read the symbol at `c` and replace it with `(symbol + 1) mod (max_symbol + 1)`.
    /// Returns the symbol read. This is the engine's per-step access.
    /// `max_symbol` rather than the modulus so that 256-symbol alphabets fit in a byte.
    #[inline(always)]
    pub fn read_increment(&mut self, c: Cell, max_symbol: u8) -> u8 {
        let idx = tile_index(c);
        let buf = self.hot_buf(tile_key(c));
        let old = buf[idx];
        let new = if old >= max_symbol { 0 } else { old + 1 };
        buf[idx] = new;
        if old == 0 && new != 0 {
            self.nonzero += 1;
        } else if old != 0 && new == 0 {
            self.nonzero -= 1;
        }
        old
    }

    /// Number of cells holding a nonzero symbol.
    pub fn nonzero_count(&self) -> u64 {
        self.nonzero
    }

    pub fn is_white(&self) -> bool {
        self.nonzero == 0
    }

    pub fn for_each_nonzero<F: FnMut(Cell, u8)>(&self, mut f: F) {
        let mut visit = |key: &TileKey, buf: &TileBuf| {
            let base_x = key.0 << TILE_BITS;
            let base_y = key.1 << TILE_BITS;
            for (i, &v) in buf.iter().enumerate() {
                if v != 0 {
                    let x = base_x + (i as i64 & TILE_MASK);
                    let y = base_y + (i as i64 >> TILE_BITS);
                    f(Cell::new(x, y), v);
                }
            }
        };
        for (key, buf) in &self.tiles {
            visit(key, buf);
        }
        visit(&self.hot_key, &self.hot);
    }

    /// All nonzero cells sorted by `(y, x)` — the canonical stored form.
    pub fn sorted_cells(&self) -> Vec<(Cell, u8)> {
        let mut out = Vec::with_capacity(self.nonzero as usize);
        self.for_each_nonzero(|c, v| out.push((c, v)));
        out.sort_by_key(|&(c, _)| c);
        out
    }

    /// Bounding box of the nonzero cells as `(min, max)` corners, inclusive.
    pub fn bounding_box(&self) -> Option<(Cell, Cell)> {
        let mut bb: Option<(Cell, Cell)> = None;
        self.for_each_nonzero(|c, _| {
            bb = Some(match bb {
                None => (c, c),
                Some((lo, hi)) => (
                    Cell::new(lo.x.min(c.x), lo.y.min(c.y)),
                    Cell::new(hi.x.max(c.x), hi.y.max(c.y)),
                ),
            });
        });
        bb
    }
}

impl PartialEq for Picture {
    fn eq(&self, other: &Self) -> bool {
        if self.nonzero != other.nonzero {
            return false;
        }
        let mut equal = true;
        self.for_each_nonzero(|c, v| {
            if other.get(c) != v {
                equal = false;
            }
        });
        equal
    }
}

impl Eq for Picture {}

impl std::fmt::Debug for Picture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Picture[{} nonzero]", self.nonzero)
    }
}
