use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use image::{ImageFormat, RgbImage};
use ndarray::{Array3, ArrayView2, ArrayView3};
use pairplan_core::baselines::FeatureVector;
use pairplan_core::dump::{read_dump, write_dump, DumpHeader};

use crate::error::{invalid, CliError, Result};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];
/// Side length of the grey thumbnail used as a cosine-pairing descriptor.
const DESCRIPTOR_SIDE: u32 = 32;

fn is_dump(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

/// Images in `dir`, sorted by file name. This order is taken as the capture
/// order around the cycle.
pub fn list_views(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| e.eq_ignore_ascii_case(x)));
        if is_image && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if paths.len() < 2 {
        return invalid(format!(
            "{} holds {} images; at least 2 are required",
            dir.display(),
            paths.len()
        ));
    }
    Ok(paths)
}

fn open_image(path: &Path) -> Result<image::DynamicImage> {
    image::open(path).map_err(|source| CliError::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads an `H x W x C` array with values in `[0, 1]`, either from an image
/// or from an `.bin` dump of shape `[H, W]` or `[H, W, C]`.
pub fn load_array(path: &Path) -> Result<Array3<f64>> {
    if is_dump(path) {
        let file = File::open(path).map_err(CliError::io(path))?;
        let (header, data) = read_dump(BufReader::new(file)).map_err(CliError::io(path))?;
        let shape = match header.shape[..] {
            [h, w] => (h, w, 1),
            [h, w, c] => (h, w, c),
            _ => {
                return invalid(format!(
                    "{}: expected a 2- or 3-dimensional dump, got shape {:?}",
                    path.display(),
                    header.shape
                ))
            }
        };
        return Array3::from_shape_vec(shape, data).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())));
    }
    let rgb = open_image(path)?.to_rgb8();
    let (w, h) = rgb.dimensions();
    Ok(Array3::from_shape_fn((h as usize, w as usize, 3), |(y, x, c)| {
        rgb.get_pixel(x as u32, y as u32)[c] as f64 / 255.0
    }))
}

/// Mean-subtracted grey thumbnail of the image at `path`.
pub fn descriptor(path: &Path, view: usize) -> Result<FeatureVector> {
    let grey = open_image(path)?.to_luma8();
    let thumb = imageops::resize(&grey, DESCRIPTOR_SIDE, DESCRIPTOR_SIDE, FilterType::Triangle);
    let values: Vec<f64> = thumb.pixels().map(|p| p[0] as f64 / 255.0).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(FeatureVector::new(view, values.into_iter().map(|v| v - mean).collect()))
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an `H x W x 3` array as an 8-bit RGB PNG.
pub fn save_png(path: &Path, color: ArrayView3<f64>) -> Result<()> {
    let (h, w, c) = color.dim();
    if c != 3 {
        return invalid(format!("expected 3 colour channels, got {c}"));
    }
    let buf: Vec<u8> = color.iter().copied().map(to_byte).collect();
    let img = RgbImage::from_raw(w as u32, h as u32, buf).expect("buffer matches dimensions");
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|source| CliError::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn save_dump(path: &Path, header: &DumpHeader, data: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    write_dump(BufWriter::new(file), header, data).map_err(CliError::io(path))
}

pub fn save_array2(path: &Path, array: ArrayView2<f64>) -> Result<()> {
    let data: Vec<f64> = array.iter().copied().collect();
    save_dump(path, &DumpHeader::new(array.shape().to_vec()), &data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_quantisation() {
        assert_eq!(to_byte(-0.5), 0);
        assert_eq!(to_byte(0.5), 128);
        assert_eq!(to_byte(1.0), 255);
        assert_eq!(to_byte(3.0), 255);
    }
}
