//! Dataset directory format.
//!
//! ```text
//! <dir>/manifest             key = value lines (see below)
//! <dir>/subject_0007.csv     header line, then one frame per line
//! <dir>/subject_0007.events  one `start_t,end_t` line per event
//! ```
//!
//! Manifest keys: `format_version`, `d_face`, `d_speech`, `d_car`, `seed`,
//! `profile_hash`, `subjects` (comma-separated ids) and `split`
//! (comma-separated `id:split` pairs).
//!
//! Record header: `subject_id=7,n_frames=9000,d_face=534,d_speech=12,d_car=4`.
//! Frame lines: `t,label,face..,speech..,car..` with floats in shortest
//! round-trip form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Dataset, EventSpan, FeatureDims, FeatureFrame, Split, SubjectRecord};
use crate::diffcore::Vector;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest";
const FORMAT_VERSION: u32 = 1;

fn record_file(id: u32) -> String {
    format!("subject_{id:04}.csv")
}

fn events_file(id: u32) -> String {
    format!("subject_{id:04}.events")
}

fn write_file(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    ds.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let ids: Vec<String> = ds.subjects.iter().map(|s| s.subject_id.to_string()).collect();
    let splits: Vec<String> = ds.splits.iter().map(|(id, s)| format!("{id}:{s}")).collect();
    let manifest = format!(
        "format_version = {FORMAT_VERSION}\nd_face = {}\nd_speech = {}\nd_car = {}\nseed = {}\n\
         profile_hash = {}\nsubjects = {}\nsplit = {}\n",
        ds.dims.face,
        ds.dims.speech,
        ds.dims.car,
        ds.seed,
        ds.profile_hash,
        ids.join(","),
        splits.join(","),
    );
    write_file(dir.join(MANIFEST_FILE), &manifest)?;

    for s in &ds.subjects {
        let mut out = String::with_capacity(s.frames.len() * ds.dims.total() * 20);
        let _ = writeln!(
            out,
            "subject_id={},n_frames={},d_face={},d_speech={},d_car={}",
            s.subject_id,
            s.frames.len(),
            ds.dims.face,
            ds.dims.speech,
            ds.dims.car
        );
        for f in &s.frames {
            let _ = write!(out, "{},{}", f.t, f.label as u8);
            for v in f.face.iter().chain(f.speech.iter()).chain(f.car.iter()) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        write_file(dir.join(record_file(s.subject_id)), &out)?;

        let mut ev = String::new();
        for e in &s.events {
            let _ = writeln!(ev, "{},{}", e.start_t, e.end_t);
        }
        write_file(dir.join(events_file(s.subject_id)), &ev)?;
    }
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(file: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(file: &Path, line: usize, what: &str, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| parse_err(file, line, format!("{what} '{s}': {e}")))
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let mpath = dir.join(MANIFEST_FILE);
    let text = read_text(&mpath)?;
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse_err(&mpath, i + 1, format!("expected 'key = value', got '{line}'")))?;
        kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let get = |key: &str| -> Result<&(usize, String)> {
        kv.get(key)
            .ok_or_else(|| parse_err(&mpath, 0, format!("manifest is missing '{key}'")))
    };

    let (ln, v) = get("format_version")?;
    let version: u32 = parse_num(&mpath, *ln, "format_version", v)?;
    if version != FORMAT_VERSION {
        return Err(parse_err(&mpath, *ln, format!("unsupported format version {version}")));
    }
    let dim = |key: &str| -> Result<usize> {
        let (ln, v) = get(key)?;
        parse_num(&mpath, *ln, key, v)
    };
    let dims = FeatureDims {
        face: dim("d_face")?,
        speech: dim("d_speech")?,
        car: dim("d_car")?,
    };
    let (ln, v) = get("seed")?;
    let seed: u64 = parse_num(&mpath, *ln, "seed", v)?;
    let profile_hash = get("profile_hash")?.1.clone();

    let (ln, v) = get("subjects")?;
    let ids: Vec<u32> = if v.is_empty() {
        Vec::new()
    } else {
        v.split(',')
            .map(|s| parse_num(&mpath, *ln, "subject id", s))
            .collect::<Result<_>>()?
    };
    let (ln, v) = get("split")?;
    let mut splits = BTreeMap::new();
    for pair in v.split(',').filter(|p| !p.is_empty()) {
        let (id, s) = pair
            .split_once(':')
            .ok_or_else(|| parse_err(&mpath, *ln, format!("bad split entry '{pair}'")))?;
        let id: u32 = parse_num(&mpath, *ln, "split subject id", id)?;
        let split: Split = s.parse().map_err(|e: Error| parse_err(&mpath, *ln, e.to_string()))?;
        if splits.insert(id, split).is_some() {
            return Err(Error::Integrity(format!(
                "subject {id} assigned to more than one split"
            )));
        }
    }
    if splits.len() != ids.len() || ids.iter().any(|id| !splits.contains_key(id)) {
        return Err(Error::Integrity(format!(
            "manifest lists {} subjects but assigns splits to {}",
            ids.len(),
            splits.len()
        )));
    }
    let on_disk = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .filter(|e| {
            let name = e.file_name();
            let name = name.to_string_lossy();
            name.starts_with("subject_") && name.ends_with(".csv")
        })
        .count();
    if on_disk != ids.len() {
        return Err(Error::Integrity(format!(
            "manifest lists {} subjects, directory holds {on_disk} record files",
            ids.len()
        )));
    }

    let mut subjects = Vec::with_capacity(ids.len());
    for id in ids {
        let frames = read_record(&dir.join(record_file(id)), id, dims)?;
        let events = read_events(&dir.join(events_file(id)), frames.len())?;
        subjects.push(SubjectRecord {
            subject_id: id,
            frames,
            events,
        });
    }
    let ds = Dataset {
        dims,
        subjects,
        splits,
        seed,
        profile_hash,
    };
    ds.validate()?;
    Ok(ds)
}

fn read_record(path: &Path, id: u32, dims: FeatureDims) -> Result<Vec<FeatureFrame>> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, format!("record for subject {id} is empty")))?;
    let mut fields = BTreeMap::new();
    for kv in header.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| parse_err(path, 1, format!("bad header field '{kv}'")))?;
        fields.insert(k.trim(), v.trim());
    }
    let field = |k: &str| -> Result<usize> {
        let v = fields
            .get(k)
            .ok_or_else(|| parse_err(path, 1, format!("header is missing '{k}'")))?;
        parse_num(path, 1, k, v)
    };
    if field("subject_id")? != id as usize {
        return Err(Error::Integrity(format!(
            "{} holds subject {}, manifest expects {id}",
            path.display(),
            field("subject_id")?
        )));
    }
    let n_frames = field("n_frames")?;
    let file_dims = FeatureDims {
        face: field("d_face")?,
        speech: field("d_speech")?,
        car: field("d_car")?,
    };
    if file_dims != dims {
        return Err(Error::Integrity(format!(
            "{} declares dims {file_dims:?}, manifest declares {dims:?}",
            path.display()
        )));
    }

    let width = 2 + dims.total();
    let mut frames = Vec::with_capacity(n_frames);
    for (i, line) in lines.enumerate() {
        let ln = i + 2;
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(',').collect();
        if toks.len() != width {
            return Err(parse_err(
                path,
                ln,
                format!("frame record {i}: expected {width} fields, found {}", toks.len()),
            ));
        }
        let t: usize = parse_num(path, ln, "t", toks[0])?;
        let label = match toks[1] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(path, ln, format!("label must be 0 or 1, got '{other}'"))),
        };
        let vals: Vec<f64> = toks[2..]
            .iter()
            .map(|s| parse_num(path, ln, "feature", s))
            .collect::<Result<_>>()?;
        let (face, rest) = vals.split_at(dims.face);
        let (speech, car) = rest.split_at(dims.speech);
        frames.push(FeatureFrame::new(
            id,
            t,
            Vector::new(face.to_vec()),
            Vector::new(speech.to_vec()),
            Vector::new(car.to_vec()),
            label,
        )?);
    }
    if frames.len() != n_frames {
        return Err(parse_err(
            path,
            frames.len() + 2,
            format!(
                "subject {id} record truncated: header declares {n_frames} frames, found {}",
                frames.len()
            ),
        ));
    }
    Ok(frames)
}

fn read_events(path: &Path, n_frames: usize) -> Result<Vec<EventSpan>> {
    let text = read_text(path)?;
    let mut events = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, i + 1, format!("expected 'start_t,end_t', got '{line}'")))?;
        let span = EventSpan::new(
            parse_num(path, i + 1, "start_t", a)?,
            parse_num(path, i + 1, "end_t", b)?,
        )
        .map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        if span.end_t >= n_frames {
            return Err(parse_err(
                path,
                i + 1,
                format!("event ends at {} past {n_frames} frames", span.end_t),
            ));
        }
        events.push(span);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::par::Execution;
    use crate::traindata::{generate_corpus, CorpusConfig, SubjectProfile};

    fn small() -> Dataset {
        let cfg = CorpusConfig {
            n_subjects: 4,
            seed: 17,
            template: SubjectProfile {
                duration_s: 12.0,
                mean_event_s: 3.0,
                event_rate: 6.0,
                ..SubjectProfile::default()
            },
        };
        generate_corpus(&cfg, Execution::Sequential).unwrap()
    }

    #[test]
    fn write_read_round_trip() {
        let ds = small();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let back = read_dataset(dir.path()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn truncated_record_names_the_subject() {
        let ds = small();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let path = dir.path().join(record_file(2));
        let text = fs::read_to_string(&path).unwrap();
        let keep: Vec<&str> = text.lines().take(40).collect();
        fs::write(&path, keep.join("\n")).unwrap();
        let err = read_dataset(dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse { .. }), "{msg}");
        assert!(msg.contains("subject 2") && msg.contains("subject_0002.csv"), "{msg}");
    }

    #[test]
    fn cut_mid_line_reports_field_count() {
        let ds = small();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let path = dir.path().join(record_file(1));
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        let err = read_dataset(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn manifest_subject_count_mismatch_is_integrity_error() {
        let ds = small();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        fs::remove_file(dir.path().join(record_file(3))).unwrap();
        assert!(matches!(read_dataset(dir.path()), Err(Error::Integrity(_))));

        let dir = tempfile::tempdir().unwrap();
        write_dataset(&ds, dir.path()).unwrap();
        let m = dir.path().join(MANIFEST_FILE);
        let text = fs::read_to_string(&m)
            .unwrap()
            .replace("subjects = 0,1,2,3", "subjects = 0,1,2");
        fs::write(&m, text).unwrap();
        assert!(matches!(read_dataset(dir.path()), Err(Error::Integrity(_))));
    }
}
