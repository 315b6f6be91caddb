use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use xwct_core::Result;

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    files: Vec<FileEntry>,
    parameters: &'a C,
}

/// Output directory that records every file it writes.
pub struct OutDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(OutDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        fs::write(self.root.join(name), contents)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: contents.len() as u64,
            sha256: hex(&Sha256::digest(contents)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Streams a large binary file, hashing as it goes.
    pub fn write_stream(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        struct Tee<W> {
            inner: W,
            hash: Sha256,
            bytes: u64,
        }
        impl<W: Write> Write for Tee<W> {
            fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
                let n = self.inner.write(buf)?;
                self.hash.update(&buf[..n]);
                self.bytes += n as u64;
                Ok(n)
            }
            fn flush(&mut self) -> std::io::Result<()> {
                self.inner.flush()
            }
        }
        let file = fs::File::create(self.root.join(name))?;
        let mut tee = Tee {
            inner: BufWriter::new(file),
            hash: Sha256::new(),
            bytes: 0,
        };
        body(&mut tee)?;
        tee.flush()?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: tee.bytes,
            sha256: hex(&tee.hash.finalize()),
        });
        Ok(())
    }

    /// Writes `manifest.json` listing every file, sorted by path.
    pub fn finish<C: Serialize>(mut self, command: &str, parameters: &C) -> Result<PathBuf> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            command,
            files: self.files,
            parameters,
        };
        let mut s = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        s.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, s)?;
        Ok(path)
    }
}
