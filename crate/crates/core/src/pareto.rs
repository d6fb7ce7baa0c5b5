//! Nondominated sorting of point clouds and ranking by interpolated PDE solutions.
//!
//! A point `p` dominates `q` when `p_i <= q_i` for every coordinate and `p != q`.
//! Exact duplicates never dominate each other and always share a front.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::grid::GridField;

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    n: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn new(n: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 || !coords.len().is_multiple_of(n) {
            return Err(Error::InvalidGrid(format!("{} coordinates do not form {n}-dimensional points", coords.len())));
        }
        if let Some(&bad) = coords.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain { what: "point coordinate", value: bad });
        }
        Ok(PointCloud { n, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidGrid("points have differing dimensions".into()));
        }
        if points.is_empty() {
            return Ok(PointCloud { n: 0, coords: Vec::new() });
        }
        PointCloud::new(n, points.concat())
    }

    /// Reads one point per line, comma separated. An optional non-numeric
    /// header line is skipped; blank lines are ignored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut n = 0;
        let mut coords = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
            let row = match parsed {
                Ok(row) => row,
                Err(_) if lineno == 0 => continue,
                Err(_) => return Err(Error::Parse { line: lineno + 1, msg: format!("non-numeric field in `{line}`") }),
            };
            if n == 0 {
                n = row.len();
            } else if row.len() != n {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected {n} columns, found {}", row.len()),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::Parse { line: lineno + 1, msg: format!("non-finite value {bad}") });
            }
            coords.extend(row);
        }
        if coords.is_empty() {
            return Ok(PointCloud { n: 0, coords });
        }
        PointCloud::new(n, coords)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.n).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.n.max(1))
    }

    /// Rescales each axis affinely onto `[0,1]`. Constant axes map to 0.
    pub fn normalized(&self) -> PointCloud {
        let n = self.n;
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for p in self.points() {
            for j in 0..n {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let j = k % n;
                let span = hi[j] - lo[j];
                if span > 0.0 {
                    ((v - lo[j]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        PointCloud { n, coords }
    }
}

/// True when `p` dominates `q`.
#[inline]
pub fn dominates(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a <= b) && p != q
}

/// Front index (starting at 1) of every point.
pub type FrontLabels = Vec<usize>;

/// Lexicographic order of the points; every dominator precedes what it dominates.
fn lex_order(cloud: &PointCloud) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    order.sort_by(|&i, &j| {
        cloud
            .point(i)
            .iter()
            .zip(cloud.point(j))
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    order
}

/// Nondominated sorting; uses the sort-and-sweep path in two dimensions.
pub fn pareto_fronts(cloud: &PointCloud) -> FrontLabels {
    if cloud.dim() == 2 {
        pareto_fronts_2d(cloud)
    } else {
        pareto_fronts_generic(cloud)
    }
}

/// Any dimension. Points are visited in lexicographic order; the front of a
/// point is one past the last front holding one of its dominators. Fronts
/// with a dominator form a prefix, so that front is found by binary search.
pub fn pareto_fronts_generic(cloud: &PointCloud) -> FrontLabels {
    let mut labels = vec![0; cloud.len()];
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<usize> = None;
    for i in lex_order(cloud) {
        let p = cloud.point(i);
        if let Some(j) = prev.filter(|&j| cloud.point(j) == p) {
            labels[i] = labels[j];
            fronts[labels[i] - 1].push(i);
            continue;
        }
        let has_dominator = |k: usize| fronts[k].iter().any(|&r| dominates(cloud.point(r), p));
        // count of fronts containing a dominator
        let (mut lo, mut hi) = (0, fronts.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if has_dominator(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == fronts.len() {
            fronts.push(Vec::new());
        }
        fronts[lo].push(i);
        labels[i] = lo + 1;
        prev = Some(i);
    }
    labels
}

/// Two dimensions: sweep in order of `x_1` keeping the smallest `x_2` per front.
pub fn pareto_fronts_2d(cloud: &PointCloud) -> FrontLabels {
    assert_eq!(cloud.dim(), 2, "2D fast path needs two-dimensional points");
    let mut labels = vec![0; cloud.len()];
    // tails[k] = minimal x_2 among points already in front k+1; nondecreasing in k
    let mut tails: Vec<f64> = Vec::new();
    let mut prev: Option<usize> = None;
    for i in lex_order(cloud) {
        let p = cloud.point(i);
        if let Some(j) = prev.filter(|&j| cloud.point(j) == p) {
            labels[i] = labels[j];
            continue;
        }
        let k = tails.partition_point(|&t| t <= p[1]);
        if k == tails.len() {
            tails.push(p[1]);
        } else {
            tails[k] = tails[k].min(p[1]);
        }
        labels[i] = k + 1;
        prev = Some(i);
    }
    labels
}

/// Multilinear interpolation of a solved `u` field at each point.
pub fn pde_rank(cloud: &PointCloud, u: &GridField) -> Result<Vec<f64>> {
    if !cloud.is_empty() && cloud.dim() != u.spec().n() {
        return Err(Error::InvalidGrid(format!("cloud has dimension {}, field has {}", cloud.dim(), u.spec().n())));
    }
    let outside: Vec<usize> = cloud
        .points()
        .enumerate()
        .filter(|(_, p)| p.iter().any(|&v| !(0.0..=1.0).contains(&v)))
        .map(|(i, _)| i)
        .collect();
    if !outside.is_empty() {
        return Err(Error::OutOfDomain(outside));
    }
    Ok(cloud.points().map(|p| u.interpolate(p)).collect())
}

/// Fraction of pairs with distinct fronts whose rank order agrees with the
/// front order. Rank ties count one half.
pub fn rank_agreement(labels: &[usize], ranks: &[f64]) -> Result<f64> {
    if labels.len() != ranks.len() {
        return Err(Error::LengthMismatch(labels.len(), ranks.len()));
    }
    if labels.len() < 2 {
        return Err(Error::TooFewPoints(labels.len()));
    }
    let mut agree = 0.0f64;
    let mut total: u64 = 0;
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            if labels[i] == labels[j] {
                continue;
            }
            total += 1;
            let front_lt = labels[i] < labels[j];
            if ranks[i] == ranks[j] {
                agree += 0.5;
            } else if (ranks[i] < ranks[j]) == front_lt {
                agree += 1.0;
            }
        }
    }
    if total == 0 {
        return Err(Error::TooFewPoints(labels.len()));
    }
    Ok(agree / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_points(&points.iter().map(|p| p.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn toy_cloud() {
        let c = cloud(&[[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]]);
        assert_eq!(pareto_fronts(&c), vec![1, 1, 2]);
        assert_eq!(pareto_fronts_generic(&c), vec![1, 1, 2]);
    }

    #[test]
    fn antichain_is_one_front() {
        let c = cloud(&[[0.0, 4.0], [1.0, 3.0], [2.0, 2.0], [3.0, 1.0], [4.0, 0.0]]);
        assert!(pareto_fronts(&c).iter().all(|&l| l == 1));
    }

    #[test]
    fn duplicates_share_a_front() {
        let c = cloud(&[[0.5, 0.5], [0.5, 0.5], [0.2, 0.9], [0.6, 0.6], [0.5, 0.7]]);
        let a = pareto_fronts_2d(&c);
        assert_eq!(a, pareto_fronts_generic(&c));
        assert_eq!(a[0], a[1]);
        assert_eq!(a, vec![1, 1, 1, 2, 2]);
    }

    #[test]
    fn empty_cloud() {
        let c = PointCloud::from_points(&[]).unwrap();
        assert!(pareto_fronts_generic(&c).is_empty());
    }

    #[test]
    fn agreement_edge_cases() {
        let labels = vec![1, 2, 3, 4];
        assert_eq!(rank_agreement(&labels, &[1.0, 2.0, 3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(rank_agreement(&labels, &[4.0, 3.0, 2.0, 1.0]).unwrap(), 0.0);
        assert!(rank_agreement(&[1], &[0.0]).is_err());
        assert!(rank_agreement(&[1, 2], &[0.0]).is_err());
    }

    #[test]
    fn csv_errors_report_line() {
        let text = "x,y\n0.1,0.2\n0.3,abc\n";
        match PointCloud::read_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let c = PointCloud::read_csv("1,2\n\n3,4\n".as_bytes()).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn normalization_and_domain_check() {
        let c = cloud(&[[2.0, -1.0], [4.0, 1.0], [3.0, 0.0]]).normalized();
        assert_eq!(c.point(2), &[0.5, 0.5]);
        let spec = crate::grid::GridSpec::new(2, 4).unwrap();
        let u = GridField::from_fn(spec, |x| x[0] + x[1]);
        assert_eq!(pde_rank(&c, &u).unwrap(), vec![0.0, 2.0, 1.0]);
        let bad = cloud(&[[0.5, 0.5], [1.5, 0.2], [-0.1, 0.0]]);
        match pde_rank(&bad, &u) {
            Err(Error::OutOfDomain(idx)) => assert_eq!(idx, vec![1, 2]),
            other => panic!("{other:?}"),
        }
    }
}
