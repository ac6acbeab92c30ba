//! Snapshot rasters of site classes.
//!
//! The raster is a binary portable graymap (PGM, `P5`), one pixel per site,
//! row `i` of the lattice on image row `i`. Pixel values:
//!
//! | class  | value |
//! |--------|-------|
//! | X-site | 255 (white) |
//! | Z-site | 0 (black)   |
//! | gray   | 128         |
//! | both   | 64          |
//!
//! The optional SVG rendition draws one unit square per site with the
//! same tones.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::observables::{SiteClass, SnapshotGrid};

pub const X_SITE_PIXEL: u8 = 255;
pub const Z_SITE_PIXEL: u8 = 0;
pub const GRAY_PIXEL: u8 = 128;
pub const BOTH_PIXEL: u8 = 64;

pub fn pixel(class: SiteClass) -> u8 {
    match class {
        SiteClass::XSite => X_SITE_PIXEL,
        SiteClass::ZSite => Z_SITE_PIXEL,
        SiteClass::Gray => GRAY_PIXEL,
        SiteClass::Both => BOTH_PIXEL,
    }
}

pub fn class_of_pixel(value: u8) -> Option<SiteClass> {
    match value {
        X_SITE_PIXEL => Some(SiteClass::XSite),
        Z_SITE_PIXEL => Some(SiteClass::ZSite),
        GRAY_PIXEL => Some(SiteClass::Gray),
        BOTH_PIXEL => Some(SiteClass::Both),
        _ => None,
    }
}

fn image_err(e: image::ImageError) -> Error {
    Error::Image(e.to_string())
}

/// Writes the grid as a binary PGM.
pub fn write_pgm(grid: &SnapshotGrid, path: &Path) -> Result<()> {
    let pixels: Vec<u8> = grid.classes.iter().map(|&c| pixel(c)).collect();
    let mut out = BufWriter::new(File::create(path)?);
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&pixels, grid.l as u32, grid.l as u32, ExtendedColorType::L8)
        .map_err(image_err)?;
    out.flush()?;
    Ok(())
}

/// Binary PGM bytes with `#` comment lines in the header, one per entry of
/// `comments` (embedded newlines are split into separate lines).
pub fn encode_pgm_annotated(grid: &SnapshotGrid, comments: &[String]) -> Vec<u8> {
    let mut out = b"P5\n".to_vec();
    for line in comments.iter().flat_map(|c| c.lines()) {
        out.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    out.extend_from_slice(format!("{l} {l}\n255\n", l = grid.l).as_bytes());
    out.extend(grid.classes.iter().map(|&c| pixel(c)));
    out
}

/// Like [`write_pgm`], with header comments.
pub fn write_pgm_annotated(grid: &SnapshotGrid, path: &Path, comments: &[String]) -> Result<()> {
    std::fs::write(path, encode_pgm_annotated(grid, comments))?;
    Ok(())
}

/// Reads a PGM written by [`write_pgm`] back into a grid.
pub fn read_pgm(path: &Path) -> Result<SnapshotGrid> {
    let img = image::open(path).map_err(image_err)?.into_luma8();
    let (w, h) = img.dimensions();
    if w != h {
        return Err(Error::Image(format!("snapshot is {w}x{h}, expected square")));
    }
    let classes = img
        .into_raw()
        .into_iter()
        .map(|v| class_of_pixel(v).ok_or_else(|| Error::Image(format!("unexpected pixel value {v}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(SnapshotGrid { l: w as usize, classes })
}

/// SVG rendition with one unit cell per site.
pub fn to_svg(grid: &SnapshotGrid) -> String {
    let l = grid.l;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {l} {l}" width="{w}" height="{w}" shape-rendering="crispEdges">"#,
        w = l * 10
    );
    for i in 0..l {
        for j in 0..l {
            let v = pixel(grid.get(i, j));
            let _ = writeln!(s, r#"<rect x="{j}" y="{i}" width="1" height="1" fill="rgb({v},{v},{v})"/>"#);
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(grid: &SnapshotGrid, path: &Path) -> Result<()> {
    std::fs::write(path, to_svg(grid))?;
    Ok(())
}
