//! Report files. JSON documents carry the run metadata, including the only
//! timestamp, in a `header` object; CSV bodies carry no run metadata at all.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use lacuna::io::CsvTable;

#[derive(Debug, Serialize)]
struct Header<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    timestamp_unix: u64,
}

#[derive(Debug, Serialize)]
struct Document<'a, T: Serialize> {
    header: Header<'a>,
    body: &'a T,
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    /// Write through a temporary file and rename, so a reader never sees a
    /// partial report.
    fn write_atomic(&self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(contents.as_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, command: &str, body: &T) -> std::io::Result<PathBuf> {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let doc = Document {
            header: Header {
                tool: "lacuna",
                version: env!("CARGO_PKG_VERSION"),
                command,
                timestamp_unix,
            },
            body,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write_atomic(name, &text)
    }

    pub fn csv(&self, name: &str, table: &CsvTable) -> std::io::Result<PathBuf> {
        self.write_atomic(name, &table.render())
    }
}
