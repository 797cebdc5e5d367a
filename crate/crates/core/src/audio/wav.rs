use std::path::Path;

use super::AudioBuffer;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(Error::MalformedHeader("fmt chunk shorter than 16 bytes".into()));
    }
    let mut tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let bits = u16_at(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        if body.len() < 26 {
            return Err(Error::MalformedHeader("truncated WAVE_FORMAT_EXTENSIBLE".into()));
        }
        // First two bytes of the sub-format GUID carry the effective tag.
        tag = u16_at(body, 24);
    }
    Ok(Format {
        tag,
        channels,
        sample_rate,
        bits,
    })
}

/// Decodes a RIFF/WAVE byte stream into a normalized mono buffer.
///
/// Integer PCM is divided by its full-scale magnitude (2^(bits-1)); 8-bit
/// samples are unsigned and re-centered first. Stereo is averaged.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::MalformedHeader("missing RIFF/WAVE magic".into()));
    }
    let mut pos = 12;
    let mut fmt = None;
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let start = pos + 8;
        let end = start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| {
                Error::MalformedHeader(format!(
                    "chunk {:?} declares {size} bytes but only {} remain",
                    String::from_utf8_lossy(id),
                    bytes.len() - start
                ))
            })?;
        match id {
            b"fmt " => fmt = Some(parse_fmt(&bytes[start..end])?),
            b"data" => data = Some(&bytes[start..end]),
            _ => {}
        }
        pos = end + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| Error::MalformedHeader("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| Error::MalformedHeader("no data chunk".into()))?;

    if fmt.sample_rate == 0 {
        return Err(Error::MalformedHeader("sample rate is zero".into()));
    }
    if !(1..=2).contains(&fmt.channels) {
        return Err(Error::UnsupportedEncoding(format!(
            "{} channels (only mono and stereo are supported)",
            fmt.channels
        )));
    }
    let decode: fn(&[u8]) -> f64 = match (fmt.tag, fmt.bits) {
        (FORMAT_PCM, 8) => |b| (b[0] as f64 - 128.0) / 128.0,
        (FORMAT_PCM, 16) => |b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
        (FORMAT_PCM, 24) => {
            |b| (i32::from_le_bytes([0, b[0], b[1], b[2]]) >> 8) as f64 / 8_388_608.0
        }
        (FORMAT_PCM, 32) => {
            |b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64 / 2_147_483_648.0
        }
        (FORMAT_FLOAT, 32) => |b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        (tag, bits) => {
            return Err(Error::UnsupportedEncoding(format!(
                "format tag {tag:#06x} with {bits} bits per sample"
            )))
        }
    };
    let width = fmt.bits as usize / 8;
    let channels = fmt.channels as usize;
    let samples = data
        .chunks_exact(width * channels)
        .map(|frame| {
            let sum: f64 = frame.chunks_exact(width).map(decode).sum();
            sum / channels as f64
        })
        .collect();
    Ok(AudioBuffer::new(samples, fmt.sample_rate))
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer> {
    let bytes = std::fs::read(path).map_err(|source| Error::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    parse_wav(&bytes)
}

/// Encodes a buffer as canonical 44-byte-header 16-bit mono PCM.
pub fn encode_wav_16(buf: &AudioBuffer) -> Vec<u8> {
    let n = buf.len();
    let data_len = (n * 2) as u32;
    let rate = buf.sample_rate();
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in buf.samples() {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn write_wav_16(path: &Path, buf: &AudioBuffer) -> Result<()> {
    std::fs::write(path, encode_wav_16(buf))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(tag: u16, channels: u16, rate: u32, bits: u16, data_len: u32) -> Vec<u8> {
        let block = channels * bits / 8;
        let mut h = Vec::new();
        h.extend_from_slice(b"RIFF");
        h.extend_from_slice(&(36 + data_len).to_le_bytes());
        h.extend_from_slice(b"WAVE");
        h.extend_from_slice(b"fmt ");
        h.extend_from_slice(&16u32.to_le_bytes());
        h.extend_from_slice(&tag.to_le_bytes());
        h.extend_from_slice(&channels.to_le_bytes());
        h.extend_from_slice(&rate.to_le_bytes());
        h.extend_from_slice(&(rate * block as u32).to_le_bytes());
        h.extend_from_slice(&block.to_le_bytes());
        h.extend_from_slice(&bits.to_le_bytes());
        h.extend_from_slice(b"data");
        h.extend_from_slice(&data_len.to_le_bytes());
        h
    }

    #[test]
    fn one_second_of_16_bit() {
        let mut bytes = header(1, 1, 16000, 16, 32000);
        assert_eq!(bytes.len(), 44);
        bytes.extend(std::iter::repeat_n(0u8, 32000));
        let buf = parse_wav(&bytes).unwrap();
        assert_eq!(buf.sample_rate(), 16000);
        assert_eq!(buf.duration_s(), 1.0);
    }

    #[test]
    fn full_scale_normalization() {
        let mut bytes = header(1, 1, 16000, 16, 2);
        bytes.extend_from_slice(&16384i16.to_le_bytes());
        assert_eq!(parse_wav(&bytes).unwrap().samples(), &[0.5]);
    }

    #[test]
    fn other_depths() {
        let mut b8 = header(1, 1, 8000, 8, 2);
        b8.extend_from_slice(&[192, 64]);
        assert_eq!(parse_wav(&b8).unwrap().samples(), &[0.5, -0.5]);

        let mut b24 = header(1, 1, 8000, 24, 3);
        b24.extend_from_slice(&(-4_194_304i32).to_le_bytes()[..3]);
        assert_eq!(parse_wav(&b24).unwrap().samples(), &[-0.5]);

        let mut b32 = header(1, 1, 8000, 32, 4);
        b32.extend_from_slice(&(1i32 << 30).to_le_bytes());
        assert_eq!(parse_wav(&b32).unwrap().samples(), &[0.5]);

        let mut f32b = header(3, 1, 8000, 32, 4);
        f32b.extend_from_slice(&0.25f32.to_le_bytes());
        assert_eq!(parse_wav(&f32b).unwrap().samples(), &[0.25]);
    }

    #[test]
    fn stereo_is_averaged() {
        let mut bytes = header(1, 2, 16000, 16, 8);
        for v in [16384i16, 0, -8192, -8192] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(parse_wav(&bytes).unwrap().samples(), &[0.25, -0.25]);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let mut bytes = header(1, 1, 16000, 16, 4);
        bytes.extend_from_slice(&[0, 0, 0, 0]);
        let mut rifx = bytes.clone();
        rifx[..4].copy_from_slice(b"RIFX");
        assert!(matches!(parse_wav(&rifx), Err(Error::MalformedHeader(_))));
        bytes.truncate(46);
        assert!(matches!(parse_wav(&bytes), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn rejects_compressed() {
        let mut bytes = header(0x55, 1, 16000, 16, 2);
        bytes.extend_from_slice(&[0, 0]);
        assert!(matches!(parse_wav(&bytes), Err(Error::UnsupportedEncoding(_))));
    }

    #[test]
    fn skips_unknown_chunks_with_padding() {
        let mut bytes = b"RIFF\0\0\0\0WAVE".to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]);
        let canonical = header(1, 1, 16000, 16, 2);
        bytes.extend_from_slice(&canonical[12..]);
        bytes.extend_from_slice(&(-32768i16).to_le_bytes());
        assert_eq!(parse_wav(&bytes).unwrap().samples(), &[-1.0]);
    }

    #[test]
    fn identical_channels_downmix_to_mono() {
        let vals = [123i16, -32768, 32767, 0, -5];
        let mut stereo = header(1, 2, 16000, 16, 20);
        let mut mono = header(1, 1, 16000, 16, 10);
        for v in vals {
            stereo.extend_from_slice(&v.to_le_bytes());
            stereo.extend_from_slice(&v.to_le_bytes());
            mono.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(parse_wav(&stereo).unwrap(), parse_wav(&mono).unwrap());
    }

    proptest! {
        #[test]
        fn pcm16_round_trip(vals in proptest::collection::vec(any::<i16>(), 0..400)) {
            let mut bytes = header(1, 1, 16000, 16, (vals.len() * 2) as u32);
            for v in &vals {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            let first = parse_wav(&bytes).unwrap();
            let again = parse_wav(&encode_wav_16(&first)).unwrap();
            prop_assert_eq!(first, again);
        }
    }
}
