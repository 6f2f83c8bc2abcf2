//! The greedy column scan shared by every partitioning algorithm.

use crate::error::Result;
use crate::model::{column, AggregationSpec, Matrix, Registry};

/// Incrementally maintained aggregate of a growing member set. Built-in
/// aggregations fold members in admission order, exactly like
/// `AggregationSpec::aggregate`, so the final representative is identical.
struct Accumulator<'a> {
    spec: &'a AggregationSpec,
    registry: &'a Registry,
    inputs: &'a Matrix,
    members: Vec<usize>,
    acc: Vec<f64>,
    rep: Vec<f64>,
}

impl<'a> Accumulator<'a> {
    fn seed(spec: &'a AggregationSpec, registry: &'a Registry, inputs: &'a Matrix, i: usize) -> Result<Self> {
        let first = column(inputs, i);
        let acc = match spec {
            AggregationSpec::SumOfSquares => first.iter().map(|v| v * v).collect(),
            _ => first.to_vec(),
        };
        let mut s = Self {
            spec,
            registry,
            inputs,
            members: vec![i],
            acc,
            rep: Vec::new(),
        };
        s.rep = s.aggregate_with(None)?;
        Ok(s)
    }

    /// Aggregate of the current members, plus `extra` when given.
    fn aggregate_with(&self, extra: Option<usize>) -> Result<Vec<f64>> {
        match self.spec {
            AggregationSpec::Mean => {
                let k = (self.members.len() + extra.is_some() as usize) as f64;
                Ok(match extra {
                    None => self.acc.iter().map(|a| a / k).collect(),
                    Some(j) => self
                        .acc
                        .iter()
                        .zip(column(self.inputs, j))
                        .map(|(a, v)| (a + v) / k)
                        .collect(),
                })
            }
            AggregationSpec::SumOfSquares => Ok(match extra {
                None => self.acc.clone(),
                Some(j) => self
                    .acc
                    .iter()
                    .zip(column(self.inputs, j))
                    .map(|(a, v)| a + v * v)
                    .collect(),
            }),
            AggregationSpec::Custom(_) => {
                let mut cols: Vec<&[f64]> = self.members.iter().map(|&m| column(self.inputs, m)).collect();
                if let Some(j) = extra {
                    cols.push(column(self.inputs, j));
                }
                self.spec.aggregate(&cols, self.registry)
            }
        }
    }

    fn admit(&mut self, j: usize, merged: Vec<f64>) {
        let cand = column(self.inputs, j);
        match self.spec {
            AggregationSpec::Mean => self.acc.iter_mut().zip(cand).for_each(|(a, v)| *a += v),
            AggregationSpec::SumOfSquares => {
                self.acc.iter_mut().zip(cand).for_each(|(a, v)| *a += v * v)
            }
            AggregationSpec::Custom(_) => {}
        }
        self.members.push(j);
        self.rep = merged;
    }
}

/// One admission test seen by the scan.
pub struct ScanCandidate<'a> {
    pub seed: usize,
    pub candidate: usize,
    pub members: &'a [usize],
    /// Aggregate of the current members.
    pub representative: &'a [f64],
    pub candidate_column: &'a [f64],
    /// Aggregate of the members plus the candidate.
    pub merged: &'a [f64],
}

/// Scans columns in order. Each unvisited column seeds a cluster; each later
/// unvisited column joins it when `admit` says so, after which the
/// representative is recomputed over the whole member set.
pub fn greedy_scan<F>(
    inputs: &Matrix,
    aggregation: &AggregationSpec,
    registry: &Registry,
    mut admit: F,
) -> Result<Vec<Vec<usize>>>
where
    F: FnMut(&ScanCandidate<'_>) -> Result<bool>,
{
    let d = inputs.ncols();
    let mut visited = vec![false; d];
    let mut clusters = Vec::new();
    for i in 0..d {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let mut acc = Accumulator::seed(aggregation, registry, inputs, i)?;
        for j in i + 1..d {
            if visited[j] {
                continue;
            }
            let merged = acc.aggregate_with(Some(j))?;
            let ok = admit(&ScanCandidate {
                seed: i,
                candidate: j,
                members: &acc.members,
                representative: &acc.rep,
                candidate_column: column(inputs, j),
                merged: &merged,
            })?;
            if ok {
                visited[j] = true;
                acc.admit(j, merged);
            }
        }
        clusters.push(acc.members);
    }
    Ok(clusters)
}
