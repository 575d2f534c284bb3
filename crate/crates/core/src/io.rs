//! Output files written through a temporary sibling and renamed into place,
//! so a failed run never leaves a truncated file behind.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::dynamics::TrajectoryRecord;
use crate::error::Result;

pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

pub fn snapshot_csv(points: &[[f64; 2]]) -> String {
    let mut s = String::from("x,y\n");
    for p in points {
        s.push_str(&format!("{:.17e},{:.17e}\n", p[0], p[1]));
    }
    s
}

/// Writes `trajectory.csv` and one `sigma_<step>.csv` per snapshot into `dir`.
/// Everything is staged first; files appear only once all of them are built.
pub fn write_record(dir: impl AsRef<Path>, rec: &TrajectoryRecord) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut files = vec![(dir.join("trajectory.csv"), rec.to_csv())];
    for (step, pts) in &rec.snapshots {
        files.push((dir.join(format!("sigma_{step}.csv")), snapshot_csv(pts)));
    }
    let mut written = Vec::with_capacity(files.len());
    for (p, body) in files {
        write_atomic(&p, &body)?;
        written.push(p);
    }
    Ok(written)
}
