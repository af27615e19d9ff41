use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, SequenceId};

use super::distance::signature_distance;
use super::unique_sequences;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: BTreeMap<SequenceId, String>,
    pub method: String,
}

impl ClusterAssignment {
    pub fn label(&self, id: &SequenceId) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    /// Cluster sizes keyed by label.
    pub fn sizes(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        for l in self.labels.values() {
            *out.entry(l.as_str()).or_default() += 1;
        }
        out
    }

    /// Labels ordered C1, C2, .. C10 rather than lexicographically.
    pub fn ordered_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.labels.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        labels.sort_by_key(|l| (l.strip_prefix('C').and_then(|n| n.parse::<u64>().ok()), l.clone()));
        labels
    }
}

/// Condensed upper-triangular distance matrix.
struct Condensed {
    n: usize,
    data: Vec<f64>,
}

impl Condensed {
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.idx(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct Candidate {
    dist: f64,
    lo: usize,
    hi: usize,
    other: usize,
}

/// Average-linkage agglomerative clustering of unique signatures, weighted
/// by how many sequences share each signature, cut at `k` clusters.
///
/// The closest pair merges first; equal distances go to the pair whose
/// lexicographically smallest member signatures come first. Labels C1..Ck
/// are assigned by descending cluster size.
pub fn cluster(dataset: &Dataset, k: usize) -> Result<ClusterAssignment> {
    let mut uniques = unique_sequences(dataset);
    if k == 0 || k > uniques.len() {
        return Err(Error::Config(format!(
            "k must lie in 1..={} (the number of unique sequences), got {k}",
            uniques.len()
        )));
    }
    // Rank by signature so that cluster representatives compare cheaply.
    uniques.sort_by(|a, b| a.signature.cmp(&b.signature));
    let n = uniques.len();

    let mut symbols: HashMap<&str, u32> = HashMap::new();
    let encoded: Vec<Vec<u32>> = uniques
        .iter()
        .map(|u| {
            u.signature
                .iter()
                .map(|t| {
                    let next = symbols.len() as u32;
                    *symbols.entry(t.as_str()).or_insert(next)
                })
                .collect()
        })
        .collect();
    let data: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let enc = &encoded;
            (i + 1..n).map(move |j| signature_distance(&enc[i], &enc[j]))
        })
        .collect();
    let mut dist = Condensed { n, data };

    let mut active = vec![true; n];
    let mut size: Vec<f64> = uniques.iter().map(|u| u.count as f64).collect();
    let mut rep: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();

    let candidate = |dist: &Condensed, rep: &[usize], i: usize, j: usize| Candidate {
        dist: dist.get(i, j),
        lo: rep[i].min(rep[j]),
        hi: rep[i].max(rep[j]),
        other: j,
    };
    let better = |a: &Candidate, b: &Option<Candidate>| match b {
        None => true,
        Some(b) => (a.dist, a.lo, a.hi) < (b.dist, b.lo, b.hi),
    };
    let scan = |dist: &Condensed, rep: &[usize], active: &[bool], i: usize| {
        let mut best: Option<Candidate> = None;
        for j in 0..n {
            if j != i && active[j] {
                let c = candidate(dist, rep, i, j);
                if better(&c, &best) {
                    best = Some(c);
                }
            }
        }
        best
    };
    let mut nearest: Vec<Option<Candidate>> =
        (0..n).into_par_iter().map(|i| scan(&dist, &rep, &active, i)).collect();

    let mut remaining = n;
    while remaining > k {
        let mut best: Option<(usize, Candidate)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            if let Some(c) = nearest[i] {
                if best.as_ref().is_none_or(|(_, b)| better(&c, &Some(*b))) {
                    best = Some((i, c));
                }
            }
        }
        let (i, c) = best.expect("at least two active clusters");
        let (a, b) = if rep[i] < rep[c.other] { (i, c.other) } else { (c.other, i) };
        let (sa, sb) = (size[a], size[b]);
        for j in 0..n {
            if active[j] && j != a && j != b {
                let d = (sa * dist.get(a, j) + sb * dist.get(b, j)) / (sa + sb);
                dist.set(a, j, d);
            }
        }
        active[b] = false;
        size[a] = sa + sb;
        rep[a] = rep[a].min(rep[b]);
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        remaining -= 1;

        nearest[b] = None;
        nearest[a] = scan(&dist, &rep, &active, a);
        for j in 0..n {
            if !active[j] || j == a {
                continue;
            }
            let stale = nearest[j].is_some_and(|c| c.other == a || c.other == b);
            if stale {
                nearest[j] = scan(&dist, &rep, &active, j);
            } else {
                let c = candidate(&dist, &rep, j, a);
                if better(&c, &nearest[j]) {
                    nearest[j] = Some(c);
                }
            }
        }
    }

    let mut clusters: Vec<(usize, usize)> =
        (0..n).filter(|&i| active[i]).map(|i| (i, size[i] as usize)).collect();
    clusters.sort_by(|x, y| y.1.cmp(&x.1).then(rep[x.0].cmp(&rep[y.0])));
    let mut labels = BTreeMap::new();
    for (pos, (slot, _)) in clusters.iter().enumerate() {
        let label = format!("C{}", pos + 1);
        for &u in &members[*slot] {
            for id in &uniques[u].sequence_ids {
                labels.insert(id.clone(), label.clone());
            }
        }
    }
    Ok(ClusterAssignment {
        k,
        labels,
        method: "agglomerative average linkage on normalised signature edit distance".into(),
    })
}

/// Reads `sequence_id,label` rows. Every sequence must be labelled.
pub fn import_labels<R: Read>(dataset: &Dataset, input: R) -> Result<ClusterAssignment> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers != ["sequence_id", "label"] {
        return Err(Error::Schema("label file header must be `sequence_id,label`".into()));
    }
    let mut labels = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec?;
        let id = SequenceId(rec.get(0).unwrap_or_default().trim().to_string());
        let label = rec.get(1).unwrap_or_default().trim().to_string();
        if dataset.sequence(&id).is_none() {
            return Err(Error::NotFound(format!("sequence `{id}` in label file")));
        }
        if label.is_empty() {
            return Err(Error::Config(format!("sequence `{id}` has an empty label")));
        }
        if labels.insert(id.clone(), label).is_some() {
            return Err(Error::Config(format!("sequence `{id}` labelled twice")));
        }
    }
    if let Some(s) = dataset.sequences().iter().find(|s| !labels.contains_key(&s.id)) {
        return Err(Error::Config(format!("sequence `{}` has no label", s.id)));
    }
    let k = labels.values().collect::<BTreeSet<_>>().len();
    Ok(ClusterAssignment { k, labels, method: "imported".into() })
}

pub fn export_labels<W: Write>(dataset: &Dataset, clusters: &ClusterAssignment, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sequence_id", "label"])?;
    for s in dataset.sequences() {
        if let Some(l) = clusters.label(&s.id) {
            w.write_record([s.id.as_str(), l])?;
        }
    }
    w.flush()?;
    Ok(())
}
