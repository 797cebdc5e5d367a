use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{read_wav, resample, AudioBuffer, SegmentManifestEntry, VowelRecording, WORKING_RATE};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Segments shorter than this are rejected at ingestion.
pub const MIN_SEGMENT_S: f64 = 0.1;

const HEADER: [&str; 6] = ["path", "participant_id", "group", "vowel", "start_s", "end_s"];

fn row_err(row: usize, e: Error) -> Error {
    Error::ManifestRow {
        row,
        source: Box::new(e),
    }
}

/// Reads a manifest CSV. Relative paths resolve against `base_dir`.
pub fn parse_manifest<R: Read>(reader: R, base_dir: &Path) -> Result<Vec<SegmentManifestEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(Error::InvalidManifest(format!(
            "expected header {}, got {}",
            HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| row_err(row, e.into()))?;
        let num = |idx: usize| -> Result<f64> {
            rec[idx].parse::<f64>().map_err(|_| {
                row_err(
                    row,
                    Error::InvalidManifest(format!("{} is not a number: {:?}", HEADER[idx], &rec[idx])),
                )
            })
        };
        let start_s = num(4)?;
        let end_s = num(5)?;
        if !(start_s >= 0.0 && end_s > start_s) {
            return Err(row_err(
                row,
                Error::InvalidManifest(format!("need 0 <= start_s < end_s, got {start_s}..{end_s}")),
            ));
        }
        let path = PathBuf::from(&rec[0]);
        out.push(SegmentManifestEntry {
            source_path: if path.is_absolute() { path } else { base_dir.join(path) },
            participant_id: rec[1].to_string(),
            group: rec[2].parse().map_err(|e| row_err(row, e))?,
            vowel: rec[3].parse().map_err(|e| row_err(row, e))?,
            start_s,
            end_s,
        });
    }
    Ok(out)
}

pub fn read_manifest(path: &Path) -> Result<Vec<SegmentManifestEntry>> {
    let file = std::fs::File::open(path).map_err(|source| Error::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_manifest(file, base)
}

/// Writes entries as manifest CSV; paths under `base_dir` are made relative.
pub fn write_manifest<W: Write>(
    writer: W,
    entries: &[SegmentManifestEntry],
    base_dir: &Path,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for e in entries {
        let p = e.source_path.strip_prefix(base_dir).unwrap_or(&e.source_path);
        w.write_record([
            p.to_string_lossy().as_ref(),
            &e.participant_id,
            e.group.as_str(),
            e.vowel.as_str(),
            &format!("{}", e.start_s),
            &format!("{}", e.end_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Loads each referenced file once, converts it to the working rate, and
/// slices one recording per entry.
pub fn segment_recordings(
    entries: &[SegmentManifestEntry],
    exec: Execution,
) -> Result<Vec<VowelRecording>> {
    let mut unique: Vec<&Path> = Vec::new();
    let mut first_row: HashMap<&Path, usize> = HashMap::new();
    for (i, e) in entries.iter().enumerate() {
        first_row.entry(e.source_path.as_path()).or_insert_with(|| {
            unique.push(e.source_path.as_path());
            i + 1
        });
    }
    let loaded: Vec<Result<AudioBuffer>> = par::map(&unique, exec, |p| {
        read_wav(p).map(|b| resample(&b, WORKING_RATE))
    });
    let mut buffers: HashMap<&Path, AudioBuffer> = HashMap::new();
    for (p, res) in unique.iter().zip(loaded) {
        buffers.insert(p, res.map_err(|e| row_err(first_row[p], e))?);
    }

    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let row = i + 1;
            let source = &buffers[e.source_path.as_path()];
            let duration_s = source.duration_s();
            if e.end_s > duration_s + 1e-9 {
                return Err(row_err(
                    row,
                    Error::RangeOutOfBounds {
                        start_s: e.start_s,
                        end_s: e.end_s,
                        duration_s,
                    },
                ));
            }
            let buffer = source.slice_s(e.start_s, e.end_s);
            if buffer.duration_s() < MIN_SEGMENT_S - 1e-9 {
                return Err(row_err(
                    row,
                    Error::SegmentTooShort {
                        duration_s: buffer.duration_s(),
                        min_s: MIN_SEGMENT_S,
                    },
                ));
            }
            Ok(VowelRecording {
                meta: e.clone(),
                buffer,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{write_wav_16, Group, Vowel};

    fn write_tone(dir: &Path, name: &str, rate: u32, secs: f64) -> PathBuf {
        let n = (rate as f64 * secs) as usize;
        let buf = AudioBuffer::new(
            (0..n).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect(),
            rate,
        );
        let p = dir.join(name);
        write_wav_16(&p, &buf).unwrap();
        p
    }

    fn entry(path: &Path, start_s: f64, end_s: f64) -> SegmentManifestEntry {
        SegmentManifestEntry {
            source_path: path.to_path_buf(),
            participant_id: "p01".into(),
            group: Group::Pos,
            vowel: Vowel::A,
            start_s,
            end_s,
        }
    }

    #[test]
    fn empty_manifest() {
        assert!(segment_recordings(&[], Execution::Sequential).unwrap().is_empty());
    }

    #[test]
    fn slices_and_resamples() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tone(dir.path(), "x.wav", 8000, 2.0);
        let recs = segment_recordings(
            &[entry(&p, 0.0, 1.0), entry(&p, 1.0, 2.0)],
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(recs.len(), 2);
        for r in &recs {
            assert_eq!(r.buffer.sample_rate(), WORKING_RATE);
            assert_eq!(r.buffer.len(), 16000);
        }
    }

    #[test]
    fn range_and_length_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tone(dir.path(), "x.wav", 16000, 1.0);
        let err = segment_recordings(&[entry(&p, 0.5, 1.05)], Execution::Sequential).unwrap_err();
        assert!(matches!(
            err,
            Error::ManifestRow { row: 1, ref source } if matches!(**source, Error::RangeOutOfBounds { .. })
        ));
        let err = segment_recordings(
            &[entry(&p, 0.0, 0.5), entry(&p, 0.5, 0.55)],
            Execution::Sequential,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::ManifestRow { row: 2, ref source } if matches!(**source, Error::SegmentTooShort { .. })
        ));
    }

    #[test]
    fn unreadable_file_names_its_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tone(dir.path(), "x.wav", 16000, 1.0);
        let missing = dir.path().join("nope.wav");
        let entries = vec![entry(&p, 0.0, 0.5), entry(&p, 0.5, 1.0), entry(&missing, 0.0, 0.5)];
        let err = segment_recordings(&entries, Execution::Sequential).unwrap_err();
        assert!(err.to_string().starts_with("manifest row 3"), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let entries = vec![entry(&dir.path().join("a.wav"), 0.0, 1.25)];
        let mut bytes = Vec::new();
        write_manifest(&mut bytes, &entries, dir.path()).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("path,participant_id,group,vowel,start_s,end_s\na.wav,"));
        assert_eq!(parse_manifest(&bytes[..], dir.path()).unwrap(), entries);
    }

    #[test]
    fn bad_rows_rejected() {
        let base = Path::new(".");
        let bad_header = "file,participant_id,group,vowel,start_s,end_s\n";
        assert!(parse_manifest(bad_header.as_bytes(), base).is_err());
        let bad_vowel = "path,participant_id,group,vowel,start_s,end_s\nx.wav,p,pos,y,0,1\n";
        assert!(parse_manifest(bad_vowel.as_bytes(), base).is_err());
        let reversed = "path,participant_id,group,vowel,start_s,end_s\nx.wav,p,pos,a,1,0.5\n";
        assert!(parse_manifest(reversed.as_bytes(), base).is_err());
    }
}
