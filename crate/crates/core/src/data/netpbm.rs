//! Binary PGM (`P5`) and PPM (`P6`) codecs with 8-bit samples.

use std::path::Path;

use thiserror::Error;

use crate::tensor::Tensor;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("unsupported netpbm magic {0:?} (expected P5 or P6)")]
    UnsupportedMagic(String),
    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),
    #[error("raster size mismatch: header implies {expected} bytes, found {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("cannot encode tensor of shape {0:?} (expected [1|3, H, W] with values in [0, 1])")]
    Unencodable(Vec<usize>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn load_image(path: &Path) -> Result<Tensor, ImageError> {
    decode(&std::fs::read(path)?)
}

/// Decodes a P5/P6 byte string into a `[C, H, W]` tensor scaled by 1/255.
pub fn decode(bytes: &[u8]) -> Result<Tensor, ImageError> {
    if bytes.len() < 2 {
        return Err(ImageError::MalformedHeader("file shorter than magic".into()));
    }
    let channels = match &bytes[..2] {
        b"P5" => 1,
        b"P6" => 3,
        other => return Err(ImageError::UnsupportedMagic(String::from_utf8_lossy(other).into_owned())),
    };
    let mut pos = 2;
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(ImageError::MalformedHeader("missing whitespace after maxval".into())),
    }
    let (w, h) = (width as usize, height as usize);
    let raster = &bytes[pos..];
    let expected = w * h * channels;
    if raster.len() != expected {
        return Err(ImageError::SizeMismatch {
            expected,
            actual: raster.len(),
        });
    }
    let mut data = vec![0f32; expected];
    for (i, &b) in raster.iter().enumerate() {
        let c = i % channels;
        let pixel = i / channels;
        data[c * w * h + pixel] = b as f32 / 255.0;
    }
    Ok(Tensor::new(vec![channels, h, w], data).expect("shape computed from raster"))
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32, ImageError> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(ImageError::MalformedHeader(format!("missing {what}"))),
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImageError::MalformedHeader(format!("invalid {what}")))
}

/// Encodes a `[1, H, W]` tensor as P5 or a `[3, H, W]` tensor as P6,
/// quantising each value with `round(v * 255)`.
pub fn encode(image: &Tensor) -> Result<Vec<u8>, ImageError> {
    let shape = image.shape();
    if shape.len() != 3 || !(shape[0] == 1 || shape[0] == 3) {
        return Err(ImageError::Unencodable(shape.to_vec()));
    }
    if image.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(ImageError::Unencodable(shape.to_vec()));
    }
    let (c, h, w) = (shape[0], shape[1], shape[2]);
    let magic = if c == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{w} {h}\n255\n").into_bytes();
    for pixel in 0..h * w {
        for ch in 0..c {
            out.push((image.data()[ch * h * w + pixel] * 255.0).round() as u8);
        }
    }
    Ok(out)
}

pub fn save_image(path: &Path, image: &Tensor) -> Result<(), ImageError> {
    std::fs::write(path, encode(image)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_white_pixel() {
        let t = decode(b"P5\n1 1\n255\n\xff").unwrap();
        assert_eq!(t.shape(), &[1, 1, 1]);
        assert_eq!(t.data(), &[1.0]);
    }

    #[test]
    fn all_zero_image() {
        let mut bytes = b"P5 4 2 255\n".to_vec();
        bytes.extend([0u8; 8]);
        let t = decode(&bytes).unwrap();
        assert_eq!(t.shape(), &[1, 2, 4]);
        assert!(t.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ppm_planar_layout() {
        // 3 wide, 2 high; pixel k has RGB = (k, 10 + k, 20 + k)
        let mut bytes = b"P6\n# comment line\n3 2\n255\n".to_vec();
        for k in 0..6u8 {
            bytes.extend([k, 10 + k, 20 + k]);
        }
        let t = decode(&bytes).unwrap();
        assert_eq!(t.shape(), &[3, 2, 3]);
        let expected: Vec<f32> = (0..3u8)
            .flat_map(|c| (0..6u8).map(move |k| (10 * c + k) as f32 / 255.0))
            .collect();
        assert_eq!(t.data(), expected.as_slice());
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(decode(b"P2\n1 1\n255\n0"), Err(ImageError::UnsupportedMagic(_))));
        assert!(matches!(decode(b"P5\n1 1\n65535\n\0\0"), Err(ImageError::UnsupportedMaxval(65535))));
        assert!(matches!(
            decode(b"P5\n2 2\n255\n\0\0\0"),
            Err(ImageError::SizeMismatch { expected: 4, actual: 3 })
        ));
        assert!(matches!(decode(b"P5\n2"), Err(ImageError::MalformedHeader(_))));
    }

    #[test]
    fn encode_decode_roundtrip() {
        let data: Vec<f32> = (0..12).map(|v| v as f32 * 20.0 / 255.0).collect();
        let t = Tensor::new(vec![3, 2, 2], data).unwrap();
        let back = decode(&encode(&t).unwrap()).unwrap();
        assert!(t.bitwise_eq(&back));
    }
}
