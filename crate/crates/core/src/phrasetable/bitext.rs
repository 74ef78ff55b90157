use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use super::io::open_maybe_gzip;
use crate::error::{Error, Result};

/// Number of lines in a text file; a final line without a newline counts.
pub fn count_lines(path: &Path) -> Result<usize> {
    let mut r = open_maybe_gzip(path)?;
    let mut n = 0;
    let mut buf = Vec::new();
    while r.read_until(b'\n', &mut buf)? > 0 {
        n += 1;
        buf.clear();
    }
    Ok(n)
}

fn copy_lines(path: &Path, out: &mut dyn Write) -> Result<()> {
    let mut r = open_maybe_gzip(path)?;
    let mut buf = Vec::new();
    while r.read_until(b'\n', &mut buf)? > 0 {
        if buf.last() != Some(&b'\n') {
            buf.push(b'\n');
        }
        out.write_all(&buf)?;
        buf.clear();
    }
    Ok(())
}

/// Concatenates (source, target) file pairs in argument order. Every pair
/// is checked for matching line counts before anything is written.
/// Returns the number of lines written per side.
pub fn concat_bitexts(inputs: &[(PathBuf, PathBuf)], out_src: &mut dyn Write, out_tgt: &mut dyn Write) -> Result<usize> {
    if inputs.is_empty() {
        return Err(Error::arg("no bitexts to concatenate"));
    }
    let mut total = 0;
    for (s, t) in inputs {
        let (ns, nt) = (count_lines(s)?, count_lines(t)?);
        if ns != nt {
            return Err(Error::arg(format!(
                "{} has {ns} lines but {} has {nt}",
                s.display(),
                t.display()
            )));
        }
        total += ns;
    }
    for (s, t) in inputs {
        copy_lines(s, out_src)?;
        copy_lines(t, out_tgt)?;
    }
    out_src.flush()?;
    out_tgt.flush()?;
    Ok(total)
}
