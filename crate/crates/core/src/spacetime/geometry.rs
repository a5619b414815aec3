use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Point in `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Position<T: Scalar> {
    coords: Vec<T>,
}

impl<T: Scalar> Position<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("positions need at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Self { coords })
    }

    /// A point on the line.
    pub fn line(x: T) -> Self {
        Self { coords: vec![x] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }
}

/// Euclidean distance, which is also the travel time at unit speed.
pub fn distance<T: Scalar>(a: &Position<T>, b: &Position<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(a.coords
        .iter()
        .zip(&b.coords)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt())
}

/// Agreed challenge arrival time `T`, exclusion radius `Δ` and slack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimingConfig<T: Scalar> {
    pub t: T,
    pub delta: T,
    #[serde(default)]
    pub slack: T,
}

impl<T: Scalar> TimingConfig<T> {
    pub fn new(t: T, delta: T, slack: T) -> Result<Self> {
        let cfg = Self { t, delta, slack };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::config("timing.t", "must be finite"));
        }
        if self.delta.is_nan() || self.delta < T::zero() {
            return Err(Error::config("timing.delta", "must be non-negative"));
        }
        if self.slack.is_nan() || self.slack < T::zero() {
            return Err(Error::config("timing.slack", "must be non-negative"));
        }
        Ok(())
    }
}

/// Outcome of a convex-hull membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Enclosure {
    Enclosed,
    Outside,
    /// The verifiers do not affinely span the space.
    Degenerate,
}

const HULL_TOL: f64 = 1e-9;

/// Solves `a x = b` for square `a` (row-major, `n × n`) by partial pivoting.
fn solve<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i * n + col].abs().partial_cmp(&a[j * n + col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[piv * n + col].abs() < T::lit(1e-12) {
            return None;
        }
        for k in 0..n {
            a.swap(col * n + k, piv * n + k);
        }
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r * n + col] / a[col * n + col];
                for k in col..n {
                    a[r * n + k] = a[r * n + k] - f * a[col * n + k];
                }
                b[r] = b[r] - f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i * n + i]).collect())
}

fn affine_rank<T: Scalar>(points: &[Position<T>]) -> usize {
    let d = points[0].dim();
    let mut rows: Vec<Vec<T>> = points[1..]
        .iter()
        .map(|p| p.coords.iter().zip(&points[0].coords).map(|(&a, &b)| a - b).collect())
        .collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col].abs() > T::lit(HULL_TOL)) else {
            continue;
        };
        rows.swap(rank, piv);
        for r in 0..rows.len() {
            if r != rank {
                let f = rows[r][col] / rows[rank][col];
                let pivot = rows[rank].clone();
                for (x, &v) in rows[r].iter_mut().zip(&pivot).take(d) {
                    *x = *x - f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Convex-hull membership. By Carathéodory a point in the hull of points in
/// `R^d` lies in the hull of some `d+1` of them, so each affinely independent
/// `(d+1)`-subset is tested through its barycentric coordinates.
pub fn enclosure<T: Scalar>(verifiers: &[Position<T>], pos: &Position<T>) -> Result<Enclosure> {
    let d = pos.dim();
    if verifiers.len() < d + 1 {
        return Err(Error::Domain(format!("{} verifiers cannot enclose a point in R^{d}", verifiers.len())));
    }
    for v in verifiers {
        if v.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.dim() });
        }
    }
    if affine_rank(verifiers) < d {
        return Ok(Enclosure::Degenerate);
    }
    let n = d + 1;
    for subset in subsets(verifiers.len(), n) {
        let mut a = vec![T::zero(); n * n];
        for (col, &vi) in subset.iter().enumerate() {
            for row in 0..d {
                a[row * n + col] = verifiers[vi].coords[row];
            }
            a[d * n + col] = T::one();
        }
        let mut b: Vec<T> = pos.coords.clone();
        b.push(T::one());
        if let Some(lambda) = solve(a, b, n) {
            if lambda.iter().all(|&l| l >= -T::lit(HULL_TOL)) {
                return Ok(Enclosure::Enclosed);
            }
        }
    }
    Ok(Enclosure::Outside)
}

/// `true` iff `pos` lies in the convex hull of the verifiers (boundary
/// included); degenerate layouts are reported as errors.
pub fn is_enclosed<T: Scalar>(verifiers: &[Position<T>], pos: &Position<T>) -> Result<bool> {
    match enclosure(verifiers, pos)? {
        Enclosure::Enclosed => Ok(true),
        Enclosure::Outside => Ok(false),
        Enclosure::Degenerate => Err(Error::Degenerate("verifiers do not span the space".into())),
    }
}

/// Emission time `T − d(V_i, pos)` for every verifier, so that all
/// challenges meet at `pos` at time `T`.
pub fn schedule_challenges<T: Scalar>(
    verifiers: &[Position<T>],
    prover_pos: &Position<T>,
    cfg: &TimingConfig<T>,
) -> Result<Vec<T>> {
    cfg.validate()?;
    if !is_enclosed(verifiers, prover_pos)? {
        return Err(Error::NotEnclosed);
    }
    verifiers.iter().map(|v| Ok(cfg.t - distance(v, prover_pos)?)).collect()
}

/// Relative floating-point allowance on top of the configured slack, so that
/// a reply computed as `T + d` through a different summation order still
/// counts as exactly in time.
const ROUNDING: f64 = 1e-12;

/// `arrival ≤ T + d(verifier, pos) + slack`.
pub fn in_time<T: Scalar>(
    arrival: T,
    verifier: &Position<T>,
    prover_pos: &Position<T>,
    cfg: &TimingConfig<T>,
) -> Result<bool> {
    let deadline = cfg.t + distance(verifier, prover_pos)? + cfg.slack;
    let eps = T::lit(ROUNDING) * (T::one() + deadline.abs());
    Ok(arrival <= deadline + eps)
}

/// Rejects adversary placements closer than `Δ` to the claimed position.
pub fn check_adversary_placement<T: Scalar>(
    adversaries: &[Position<T>],
    prover_pos: &Position<T>,
    delta: T,
) -> Result<()> {
    for (index, a) in adversaries.iter().enumerate() {
        let d = distance(a, prover_pos)?;
        if d < delta || d == T::zero() {
            return Err(Error::TooClose { index, delta: delta.to_f64_lossy() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Position<f64> {
        Position::new(c.to_vec()).unwrap()
    }

    fn tetra() -> Vec<Position<f64>> {
        vec![p(&[0.0, 0.0, 0.0]), p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[0.0, 0.0, 1.0])]
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&p(&[0.0]), &p(&[1.0])).unwrap(), 1.0);
        assert_eq!(distance(&p(&[0.0, 0.0, 0.0]), &p(&[3.0, 4.0, 0.0])).unwrap(), 5.0);
        assert!(distance(&p(&[0.0]), &p(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn enclosure_cases() {
        let line = vec![p(&[0.0]), p(&[1.0])];
        assert!(is_enclosed(&line, &p(&[0.5])).unwrap());
        assert!(!is_enclosed(&line, &p(&[1.5])).unwrap());
        assert!(is_enclosed(&line, &p(&[1.0])).unwrap());
        assert!(is_enclosed(&tetra(), &p(&[0.25, 0.25, 0.25])).unwrap());
        assert!(!is_enclosed(&tetra(), &p(&[0.5, 0.5, 0.5])).unwrap());
        let flat = vec![p(&[0.0, 0.0, 0.0]), p(&[1.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0]), p(&[1.0, 1.0, 0.0])];
        assert_eq!(enclosure(&flat, &p(&[0.2, 0.2, 0.0])).unwrap(), Enclosure::Degenerate);
        assert!(matches!(is_enclosed(&flat, &p(&[0.2, 0.2, 0.0])), Err(Error::Degenerate(_))));
    }

    #[test]
    fn schedule_examples() {
        let line = vec![p(&[0.0]), p(&[1.0])];
        let cfg = TimingConfig::new(1.0, 0.0, 0.0).unwrap();
        let e = schedule_challenges(&line, &p(&[0.6]), &cfg).unwrap();
        assert!((e[0] - 0.4).abs() < 1e-15 && (e[1] - 0.6).abs() < 1e-15);
        let e = schedule_challenges(&line, &p(&[0.0]), &cfg).unwrap();
        assert_eq!(e[0], 1.0);
        assert!(matches!(schedule_challenges(&line, &p(&[2.0]), &cfg), Err(Error::NotEnclosed)));
    }

    #[test]
    fn in_time_edges() {
        let cfg = TimingConfig::new(1.0, 0.0, 0.0).unwrap();
        let (v, pos) = (p(&[0.0]), p(&[0.5]));
        assert!(in_time(1.5, &v, &pos, &cfg).unwrap());
        assert!(!in_time(1.5 + 1e-6, &v, &pos, &cfg).unwrap());
        let slack = TimingConfig::new(1.0, 0.0, 1e-5).unwrap();
        assert!(in_time(1.5 + 1e-6, &v, &pos, &slack).unwrap());
    }

    #[test]
    fn placement_respects_delta() {
        let pos = p(&[0.5]);
        assert!(check_adversary_placement(&[p(&[0.25]), p(&[0.75])], &pos, 0.2).is_ok());
        assert!(matches!(
            check_adversary_placement(&[p(&[0.25]), p(&[0.6])], &pos, 0.2),
            Err(Error::TooClose { index: 1, .. })
        ));
    }
}
