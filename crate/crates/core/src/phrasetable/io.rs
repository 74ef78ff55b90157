use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Opens a text file, transparently decompressing gzip (detected by its
/// magic bytes, not the file name).
pub fn open_maybe_gzip(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut reader = BufReader::new(File::open(path)?);
    let head = reader.fill_buf()?;
    if head.starts_with(&GZIP_MAGIC) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(reader))))
    } else {
        Ok(Box::new(reader))
    }
}

/// Creates an output file, gzip-compressed when the name ends in `.gz`.
pub fn create_maybe_gzip(path: &Path) -> io::Result<Box<dyn Write>> {
    let file = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(GzEncoder::new(file, Compression::default())))
    } else {
        Ok(Box::new(file))
    }
}

#[cfg(test)]
mod tests {
    use std::io::Read;

    use super::*;

    fn read_all<R: Read>(mut r: R) -> io::Result<Vec<u8>> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Ok(buf)
    }

    #[test]
    fn gzip_detected_by_content() {
        let dir = tempfile::tempdir().unwrap();
        let gz = dir.path().join("table.gz");
        {
            let mut w = create_maybe_gzip(&gz).unwrap();
            w.write_all(b"a ||| b ||| 1\n").unwrap();
        }
        // misleading name: compressed content without .gz
        let renamed = dir.path().join("table.txt");
        std::fs::rename(&gz, &renamed).unwrap();
        let text = read_all(open_maybe_gzip(&renamed).unwrap()).unwrap();
        assert_eq!(text, b"a ||| b ||| 1\n");

        let plain = dir.path().join("plain.gz");
        std::fs::write(&plain, "x\n").unwrap();
        assert_eq!(read_all(open_maybe_gzip(&plain).unwrap()).unwrap(), b"x\n");
    }
}
