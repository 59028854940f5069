//! Minimal DICOM Part 10 reader for single-frame grayscale images stored with
//! a native (uncompressed) little-endian transfer syntax, plus a writer for the
//! same subset.

use thiserror::Error;

const IMPLICIT_VR_LE: &str = "1.2.840.10008.1.2";
const EXPLICIT_VR_LE: &str = "1.2.840.10008.1.2.1";
const MR_IMAGE_STORAGE: &str = "1.2.840.10008.5.1.4.1.1.4";

const ROWS: (u16, u16) = (0x0028, 0x0010);
const COLUMNS: (u16, u16) = (0x0028, 0x0011);
const SAMPLES_PER_PIXEL: (u16, u16) = (0x0028, 0x0002);
const BITS_ALLOCATED: (u16, u16) = (0x0028, 0x0100);
const BITS_STORED: (u16, u16) = (0x0028, 0x0101);
const PIXEL_REPRESENTATION: (u16, u16) = (0x0028, 0x0103);
const PIXEL_DATA: (u16, u16) = (0x7FE0, 0x0010);
const TRANSFER_SYNTAX: (u16, u16) = (0x0002, 0x0010);

const ITEM: (u16, u16) = (0xFFFE, 0xE000);
const ITEM_END: (u16, u16) = (0xFFFE, 0xE00D);
const SEQUENCE_END: (u16, u16) = (0xFFFE, 0xE0DD);
const UNDEFINED: u32 = 0xFFFF_FFFF;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DicomError {
    #[error("missing DICM preamble")]
    NotDicom,
    #[error("unexpected end of data at byte {0}")]
    Truncated(usize),
    #[error("unsupported transfer syntax {0}")]
    UnsupportedTransferSyntax(String),
    #[error("missing required attribute ({0:04X},{1:04X})")]
    MissingAttribute(u16, u16),
    #[error("unsupported image layout: {0}")]
    Unsupported(String),
}

/// Decoded single-frame grayscale pixel data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DicomImage {
    pub rows: usize,
    pub columns: usize,
    pub bits_allocated: u16,
    pub bits_stored: u16,
    pub signed: bool,
    pub pixels: Vec<i32>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    explicit: bool,
}

struct Header {
    tag: (u16, u16),
    vr: [u8; 2],
    len: u32,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DicomError> {
        let end = self
            .pos
            .checked_add(n)
            .ok_or(DicomError::Truncated(self.pos))?;
        if end > self.bytes.len() {
            return Err(DicomError::Truncated(self.pos));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, DicomError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, DicomError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek_group(&self) -> Option<u16> {
        self.bytes
            .get(self.pos..self.pos + 2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn header(&mut self) -> Result<Header, DicomError> {
        let tag = (self.u16()?, self.u16()?);
        if tag.0 == 0xFFFE {
            return Ok(Header {
                tag,
                vr: *b"  ",
                len: self.u32()?,
            });
        }
        if !self.explicit {
            let vr = if tag == PIXEL_DATA { *b"OW" } else { *b"UN" };
            return Ok(Header {
                tag,
                vr,
                len: self.u32()?,
            });
        }
        let v = self.take(2)?;
        let vr = [v[0], v[1]];
        let len = if long_vr(&vr) {
            self.take(2)?;
            self.u32()?
        } else {
            self.u16()? as u32
        };
        Ok(Header { tag, vr, len })
    }

    /// Skips nested elements until the given delimiter tag.
    fn skip_until(&mut self, delimiter: (u16, u16)) -> Result<(), DicomError> {
        loop {
            let h = self.header()?;
            if h.tag == delimiter {
                return Ok(());
            }
            self.skip_value(&h)?;
        }
    }

    fn skip_value(&mut self, h: &Header) -> Result<(), DicomError> {
        if h.len != UNDEFINED {
            self.take(h.len as usize)?;
            return Ok(());
        }
        if h.tag == ITEM {
            return self.skip_until(ITEM_END);
        }
        // undefined-length sequence (or an element treated as one)
        loop {
            let item = self.header()?;
            match item.tag {
                SEQUENCE_END => return Ok(()),
                ITEM => self.skip_value(&item)?,
                _ => return Err(DicomError::Unsupported("malformed sequence".into())),
            }
        }
    }
}

fn long_vr(vr: &[u8; 2]) -> bool {
    matches!(
        vr,
        b"OB"
            | b"OD"
            | b"OF"
            | b"OL"
            | b"OV"
            | b"OW"
            | b"SQ"
            | b"SV"
            | b"UC"
            | b"UN"
            | b"UR"
            | b"UT"
            | b"UV"
    )
}

fn trimmed_text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes)
        .trim_end_matches(['\0', ' '])
        .trim()
        .to_string()
}

/// Parses a Part 10 file and decodes its first frame.
pub fn read_dicom(bytes: &[u8]) -> Result<DicomImage, DicomError> {
    if bytes.len() < 132 || &bytes[128..132] != b"DICM" {
        return Err(DicomError::NotDicom);
    }
    let mut cur = Cursor {
        bytes,
        pos: 132,
        explicit: true,
    };
    let mut transfer_syntax = None;
    while cur.peek_group() == Some(0x0002) {
        let h = cur.header()?;
        let value = cur.take(h.len as usize)?;
        if h.tag == TRANSFER_SYNTAX {
            transfer_syntax = Some(trimmed_text(value));
        }
    }
    let ts = transfer_syntax.ok_or(DicomError::MissingAttribute(
        TRANSFER_SYNTAX.0,
        TRANSFER_SYNTAX.1,
    ))?;
    cur.explicit = match ts.as_str() {
        EXPLICIT_VR_LE => true,
        IMPLICIT_VR_LE => false,
        other => return Err(DicomError::UnsupportedTransferSyntax(other.to_string())),
    };

    let mut us = std::collections::HashMap::new();
    let mut pixel_bytes = None;
    while !cur.at_end() {
        let h = cur.header()?;
        if h.tag == PIXEL_DATA {
            if h.len == UNDEFINED {
                return Err(DicomError::UnsupportedTransferSyntax(
                    "encapsulated pixel data".into(),
                ));
            }
            pixel_bytes = Some(cur.take(h.len as usize)?);
            break;
        }
        let is_sequence = &h.vr == b"SQ" || h.len == UNDEFINED;
        if is_sequence {
            cur.skip_value(&h)?;
            continue;
        }
        let value = cur.take(h.len as usize)?;
        if h.tag.0 == 0x0028 && value.len() >= 2 {
            us.insert(h.tag, u16::from_le_bytes([value[0], value[1]]));
        }
    }

    let need = |tag: (u16, u16)| {
        us.get(&tag)
            .copied()
            .ok_or(DicomError::MissingAttribute(tag.0, tag.1))
    };
    let rows = need(ROWS)? as usize;
    let columns = need(COLUMNS)? as usize;
    let bits_allocated = need(BITS_ALLOCATED)?;
    let bits_stored = us.get(&BITS_STORED).copied().unwrap_or(bits_allocated);
    let signed = us.get(&PIXEL_REPRESENTATION).copied().unwrap_or(0) == 1;
    let samples = us.get(&SAMPLES_PER_PIXEL).copied().unwrap_or(1);
    if samples != 1 {
        return Err(DicomError::Unsupported(format!(
            "{samples} samples per pixel"
        )));
    }
    if rows == 0 || columns == 0 {
        return Err(DicomError::Unsupported("empty image".into()));
    }
    if bits_stored == 0 || bits_stored > bits_allocated {
        return Err(DicomError::Unsupported(format!(
            "bits stored {bits_stored} / allocated {bits_allocated}"
        )));
    }
    let data = pixel_bytes.ok_or(DicomError::MissingAttribute(PIXEL_DATA.0, PIXEL_DATA.1))?;
    let count = rows * columns;
    let pixels: Vec<i32> = match bits_allocated {
        8 => {
            if data.len() < count {
                return Err(DicomError::Truncated(cur.pos));
            }
            data[..count].iter().map(|&b| b as i32).collect()
        }
        16 => {
            if data.len() < 2 * count {
                return Err(DicomError::Truncated(cur.pos));
            }
            let mask = if bits_stored >= 16 {
                u16::MAX
            } else {
                (1u16 << bits_stored) - 1
            };
            data[..2 * count]
                .chunks_exact(2)
                .map(|b| {
                    let raw = u16::from_le_bytes([b[0], b[1]]) & mask;
                    if signed {
                        let shift = 16 - bits_stored as u32;
                        ((raw << shift) as i16 >> shift) as i32
                    } else {
                        raw as i32
                    }
                })
                .collect()
        }
        other => {
            return Err(DicomError::Unsupported(format!("{other} bits allocated")));
        }
    };
    Ok(DicomImage {
        rows,
        columns,
        bits_allocated,
        bits_stored,
        signed,
        pixels,
    })
}

fn push_element(out: &mut Vec<u8>, tag: (u16, u16), vr: &[u8; 2], value: &[u8]) {
    out.extend_from_slice(&tag.0.to_le_bytes());
    out.extend_from_slice(&tag.1.to_le_bytes());
    out.extend_from_slice(vr);
    if long_vr(vr) {
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&(value.len() as u32).to_le_bytes());
    } else {
        out.extend_from_slice(&(value.len() as u16).to_le_bytes());
    }
    out.extend_from_slice(value);
}

fn padded(text: &str, pad: u8) -> Vec<u8> {
    let mut v = text.as_bytes().to_vec();
    if v.len() % 2 == 1 {
        v.push(pad);
    }
    v
}

/// Encodes an unsigned 16-bit-allocated MR image as explicit VR little endian.
pub fn write_dicom(
    rows: u16,
    columns: u16,
    bits_stored: u16,
    pixels: &[u16],
    instance_uid: &str,
) -> Vec<u8> {
    assert_eq!(
        pixels.len(),
        rows as usize * columns as usize,
        "pixel count"
    );
    let mut meta = Vec::new();
    push_element(&mut meta, (0x0002, 0x0001), b"OB", &[0, 1]);
    push_element(
        &mut meta,
        (0x0002, 0x0002),
        b"UI",
        &padded(MR_IMAGE_STORAGE, 0),
    );
    push_element(&mut meta, (0x0002, 0x0003), b"UI", &padded(instance_uid, 0));
    push_element(
        &mut meta,
        TRANSFER_SYNTAX,
        b"UI",
        &padded(EXPLICIT_VR_LE, 0),
    );

    let mut out = vec![0u8; 128];
    out.extend_from_slice(b"DICM");
    push_element(
        &mut out,
        (0x0002, 0x0000),
        b"UL",
        &(meta.len() as u32).to_le_bytes(),
    );
    out.extend_from_slice(&meta);

    push_element(&mut out, (0x0008, 0x0060), b"CS", &padded("MR", b' '));
    push_element(&mut out, SAMPLES_PER_PIXEL, b"US", &1u16.to_le_bytes());
    push_element(
        &mut out,
        (0x0028, 0x0004),
        b"CS",
        &padded("MONOCHROME2", b' '),
    );
    push_element(&mut out, ROWS, b"US", &rows.to_le_bytes());
    push_element(&mut out, COLUMNS, b"US", &columns.to_le_bytes());
    push_element(&mut out, BITS_ALLOCATED, b"US", &16u16.to_le_bytes());
    push_element(&mut out, BITS_STORED, b"US", &bits_stored.to_le_bytes());
    push_element(
        &mut out,
        (0x0028, 0x0102),
        b"US",
        &(bits_stored - 1).to_le_bytes(),
    );
    push_element(&mut out, PIXEL_REPRESENTATION, b"US", &0u16.to_le_bytes());
    let data: Vec<u8> = pixels.iter().flat_map(|p| p.to_le_bytes()).collect();
    push_element(&mut out, PIXEL_DATA, b"OW", &data);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: u16, cols: u16) -> Vec<u16> {
        (0..rows as usize * cols as usize)
            .map(|i| (i * 37 % 4096) as u16)
            .collect()
    }

    #[test]
    fn write_then_read_round_trips() {
        let px = ramp(6, 5);
        let bytes = write_dicom(6, 5, 12, &px, "1.2.3.4");
        let img = read_dicom(&bytes).unwrap();
        assert_eq!((img.rows, img.columns, img.bits_stored), (6, 5, 12));
        assert_eq!(img.pixels, px.iter().map(|&p| p as i32).collect::<Vec<_>>());
    }

    #[test]
    fn truncated_pixel_data_is_an_error() {
        let bytes = write_dicom(8, 8, 16, &ramp(8, 8), "1.2.3");
        let cut = &bytes[..bytes.len() - 10];
        assert!(matches!(read_dicom(cut), Err(DicomError::Truncated(_))));
    }

    #[test]
    fn rejects_files_without_magic() {
        assert_eq!(read_dicom(b"not a dicom file"), Err(DicomError::NotDicom));
    }

    #[test]
    fn skips_undefined_length_sequences() {
        let px = ramp(2, 2);
        let mut bytes = write_dicom(2, 2, 16, &px, "9.9");
        // splice an undefined-length SQ with one undefined-length item before (0028,0002)
        let marker = [0x28u8, 0x00, 0x02, 0x00];
        let at = bytes.windows(4).position(|w| w == marker).unwrap();
        let mut sq = Vec::new();
        sq.extend_from_slice(&[0x08, 0x00, 0x15, 0x11, b'S', b'Q', 0, 0]);
        sq.extend_from_slice(&UNDEFINED.to_le_bytes());
        sq.extend_from_slice(&[0xFE, 0xFF, 0x00, 0xE0]);
        sq.extend_from_slice(&UNDEFINED.to_le_bytes());
        push_element(&mut sq, (0x0008, 0x1150), b"UI", &padded("1.2", 0));
        sq.extend_from_slice(&[0xFE, 0xFF, 0x0D, 0xE0, 0, 0, 0, 0]);
        sq.extend_from_slice(&[0xFE, 0xFF, 0xDD, 0xE0, 0, 0, 0, 0]);
        bytes.splice(at..at, sq);
        assert_eq!(read_dicom(&bytes).unwrap().pixels.len(), 4);
    }
}
