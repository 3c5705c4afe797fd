//! Side-by-side comparison sheets: one row per image kind, one column per pair.

use radar_gt::image::GrayImage;

pub const SEPARATOR_PX: usize = 2;
pub const SEPARATOR_VALUE: u8 = 255;

/// Lays `rows` out as a grid with separators between tiles. Tiles are copied
/// verbatim into cells as large as the largest tile; missing tiles stay black.
pub fn tile(rows: &[Vec<Option<GrayImage>>]) -> GrayImage {
    let n_rows = rows.len();
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let tiles = || rows.iter().flatten().flatten();
    let cell_w = tiles().map(GrayImage::width).max().unwrap_or(0);
    let cell_h = tiles().map(GrayImage::height).max().unwrap_or(0);
    let span = |n: usize, cell: usize| (n * cell + n.saturating_sub(1) * SEPARATOR_PX).max(1);
    let (w, h) = (span(n_cols, cell_w), span(n_rows, cell_h));
    let mut out = GrayImage::filled(w, h, SEPARATOR_VALUE);
    for (ri, row) in rows.iter().enumerate() {
        for ci in 0..n_cols {
            let (r0, c0) = (ri * (cell_h + SEPARATOR_PX), ci * (cell_w + SEPARATOR_PX));
            for r in 0..cell_h {
                for c in 0..cell_w {
                    let v = match row.get(ci).and_then(Option::as_ref) {
                        Some(t) if r < t.height() && c < t.width() => t.get(r, c),
                        _ => 0,
                    };
                    out.set(r0 + r, c0 + c, v);
                }
            }
        }
    }
    out
}
