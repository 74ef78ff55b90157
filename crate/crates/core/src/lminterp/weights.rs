//! Text files describing mixtures.
//!
//! A weights file has one line per leaf, `group<TAB>model-path<TAB>weight`,
//! and one root line per group, `group<TAB>*<TAB>weight`. A groups
//! manifest lists `group<TAB>model-path` pairs for fitting.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use super::mixture::MixtureLm;
use crate::error::{Error, Result};
use crate::ngramlm::{arpa, NGramModel};

/// Marks a root line in place of a model path.
pub const ROOT_MARKER: &str = "*";

/// Weights are accepted if they sum to one within this, then renormalized.
const LOAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupWeights {
    pub name: String,
    pub weight: f64,
    /// (model path, weight) in file order.
    pub members: Vec<(String, f64)>,
}

/// A parsed weights file: groups in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightsSpec {
    pub groups: Vec<GroupWeights>,
}

fn fields(line: &str, n: usize, lineno: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split('\t').map(str::trim).collect();
    if f.len() != n || f.iter().any(|s| s.is_empty()) {
        return Err(Error::parse(lineno, format!("expected {n} non-empty tab-separated fields")));
    }
    Ok(f)
}

fn renormalize(ws: &mut [f64], what: &str) -> Result<()> {
    let sum: f64 = ws.iter().sum();
    if (sum - 1.0).abs() > LOAD_TOL {
        return Err(Error::Config(format!("{what} weights sum to {sum}, not 1")));
    }
    ws.iter_mut().for_each(|w| *w /= sum);
    Ok(())
}

impl WeightsSpec {
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut groups: Vec<GroupWeights> = Vec::new();
        let mut root_seen: Vec<bool> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f = fields(&line, 3, lineno)?;
            let w: f64 = f[2]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid weight {:?}", f[2])))?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::parse(lineno, "weights must be finite and non-negative"));
            }
            let g = *index.entry(f[0].to_owned()).or_insert_with(|| {
                groups.push(GroupWeights {
                    name: f[0].to_owned(),
                    weight: 0.0,
                    members: Vec::new(),
                });
                root_seen.push(false);
                groups.len() - 1
            });
            if f[1] == ROOT_MARKER {
                if root_seen[g] {
                    return Err(Error::parse(lineno, format!("second root line for group {:?}", f[0])));
                }
                root_seen[g] = true;
                groups[g].weight = w;
            } else {
                groups[g].members.push((f[1].to_owned(), w));
            }
        }
        if groups.is_empty() {
            return Err(Error::Config("weights file lists no models".into()));
        }
        for (g, seen) in groups.iter_mut().zip(&root_seen) {
            if !seen {
                return Err(Error::Config(format!("group {:?} has no root line", g.name)));
            }
            if g.members.is_empty() {
                return Err(Error::Config(format!("group {:?} has no models", g.name)));
            }
            let mut ws: Vec<f64> = g.members.iter().map(|m| m.1).collect();
            renormalize(&mut ws, &format!("group {:?}", g.name))?;
            g.members.iter_mut().zip(ws).for_each(|(m, w)| m.1 = w);
        }
        let mut ws: Vec<f64> = groups.iter().map(|g| g.weight).collect();
        renormalize(&mut ws, "root")?;
        groups.iter_mut().zip(ws).for_each(|(g, w)| g.weight = w);
        Ok(WeightsSpec { groups })
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }

    /// Describes a fitted mixture. Leaves are written under their path;
    /// a flat mixture becomes a single group named after its root.
    pub fn from_mixture(m: &MixtureLm) -> Self {
        let group = |node: &MixtureLm, weight: f64| GroupWeights {
            name: node.name().to_owned(),
            weight,
            members: node.leaves().into_iter().map(|(n, _, w)| (n.to_owned(), w)).collect(),
        };
        let groups = match m {
            MixtureLm::Node { children, weights, .. }
                if children.iter().any(|c| matches!(c, MixtureLm::Node { .. })) =>
            {
                children.iter().zip(weights).map(|(c, &w)| group(c, w)).collect()
            }
            _ => vec![group(m, 1.0)],
        };
        WeightsSpec { groups }
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for g in &self.groups {
            writeln!(out, "{}\t{ROOT_MARKER}\t{}", g.name, g.weight)?;
            for (path, w) in &g.members {
                writeln!(out, "{}\t{path}\t{w}", g.name)?;
            }
        }
        Ok(())
    }

    /// Builds the root → group → leaf tree, loading each distinct model
    /// once through `load`.
    pub fn build<F>(&self, mut load: F) -> Result<MixtureLm>
    where
        F: FnMut(&str) -> Result<NGramModel>,
    {
        let mut cache: HashMap<&str, Arc<NGramModel>> = HashMap::new();
        let mut nodes = Vec::with_capacity(self.groups.len());
        for g in &self.groups {
            let mut leaves = Vec::with_capacity(g.members.len());
            for (path, _) in &g.members {
                let model = match cache.get(path.as_str()) {
                    Some(m) => m.clone(),
                    None => {
                        let m = Arc::new(load(path)?);
                        cache.insert(path, m.clone());
                        m
                    }
                };
                leaves.push(MixtureLm::leaf(path.clone(), model));
            }
            let ws = g.members.iter().map(|m| m.1).collect();
            nodes.push(MixtureLm::node(g.name.clone(), leaves, ws)?);
        }
        MixtureLm::node("root", nodes, self.groups.iter().map(|g| g.weight).collect())
    }

    /// [`build`](Self::build) reading each model as an ARPA file.
    pub fn load_arpa(&self) -> Result<MixtureLm> {
        self.build(|p| arpa::read_arpa(BufReader::new(File::open(p)?)))
    }
}

/// Reads a groups manifest into (group, model paths), groups in order of
/// first appearance.
pub fn read_groups<R: BufRead>(reader: R) -> Result<Vec<(String, Vec<String>)>> {
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f = fields(&line, 2, i + 1)?;
        match groups.iter_mut().find(|g| g.0 == f[0]) {
            Some(g) => g.1.push(f[1].to_owned()),
            None => groups.push((f[0].to_owned(), vec![f[1].to_owned()])),
        }
    }
    if groups.is_empty() {
        return Err(Error::Config("groups manifest lists no models".into()));
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FILE: &str = "news\t*\t0.75\nnews\tlm/a.arpa\t0.25\nnews\tlm/b.arpa\t0.75\nweb\t*\t0.25\nweb\tlm/c.arpa\t1\n";

    #[test]
    fn parse_and_write_back() {
        let spec = WeightsSpec::read(FILE.as_bytes()).unwrap();
        assert_eq!(spec.groups.len(), 2);
        assert_eq!(spec.groups[0].members[1], ("lm/b.arpa".to_string(), 0.75));
        let mut out = Vec::new();
        spec.write(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), FILE);
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let text = "g\t*\t1.0000004\ng\ta\t0.5000001\ng\tb\t0.5\n";
        let spec = WeightsSpec::read(text.as_bytes()).unwrap();
        assert_eq!(spec.groups[0].weight, 1.0);
        let s: f64 = spec.groups[0].members.iter().map(|m| m.1).sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "",
            "g\ta\t1\n",
            "g\t*\t1\n",
            "g\t*\t1\ng\ta\t0.9\n",
            "g\t*\t1\ng\ta\tx\n",
            "g\t*\t1\ng\ta\n",
            "g\t*\t1\ng\t*\t1\ng\ta\t1\n",
            "g\t*\t1\ng\ta\t-1\ng\tb\t2\n",
        ] {
            assert!(WeightsSpec::read(text.as_bytes()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn groups_manifest() {
        let g = read_groups("a\tx.arpa\nb\ty.arpa\n# note\na\tz.arpa\n".as_bytes()).unwrap();
        assert_eq!(
            g,
            vec![
                ("a".to_string(), vec!["x.arpa".to_string(), "z.arpa".to_string()]),
                ("b".to_string(), vec!["y.arpa".to_string()])
            ]
        );
        assert!(read_groups("a x\n".as_bytes()).is_err());
    }
}
