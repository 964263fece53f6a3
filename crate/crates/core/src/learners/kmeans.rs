use ndarray::{Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::squared_distance;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub k: usize,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    /// Lloyd iterations run (assignment plus centroid update).
    pub iterations: usize,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<f64>,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

fn check_matrix(x: ArrayView2<'_, f64>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::validation("k-means needs at least one row"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("k-means needs finite features"));
    }
    Ok(())
}

/// Nearest centroid, ties to the lowest index.
fn nearest(x: ArrayView2<'_, f64>, i: usize, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.outer_iter().enumerate() {
        let d = squared_distance(x.row(i), centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn update_centroids(x: ArrayView2<'_, f64>, assignments: &[usize], centroids: &mut Array2<f64>) {
    let k = centroids.nrows();
    let mut sums = Array2::<f64>::zeros((k, x.ncols()));
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        let mut row = sums.row_mut(a);
        row += &x.row(i);
        counts[a] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            centroids
                .row_mut(c)
                .assign(&(&sums.row(c) / counts[c] as f64));
        }
    }
}

/// Farthest-first initialization from a random starting row. Ties go to the
/// lowest row index.
fn spread_init(x: ArrayView2<'_, f64>, k: usize, rng: &mut impl Rng) -> Array2<f64> {
    let n = x.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut min_d: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), x.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let mut best = 0;
        for i in 1..n {
            if min_d[i] > min_d[best] {
                best = i;
            }
        }
        chosen.push(best);
        for i in 0..n {
            min_d[i] = min_d[i].min(squared_distance(x.row(i), x.row(best)));
        }
    }
    x.select(Axis(0), &chosen)
}

pub fn kmeans(x: ArrayView2<'_, f64>, k: usize, seed: u64) -> Result<Clustering> {
    kmeans_with_cap(x, k, seed, MAX_ITERATIONS)
}

/// Lloyd's algorithm. An empty cluster takes over the point farthest from
/// its current centroid, which never increases inertia.
pub fn kmeans_with_cap(x: ArrayView2<'_, f64>, k: usize, seed: u64, cap: usize) -> Result<Clustering> {
    check_matrix(x)?;
    if k < 2 {
        return Err(Error::validation(format!("k-means needs k >= 2, got {k}")));
    }
    if k > x.nrows() {
        return Err(Error::validation(format!(
            "k = {k} exceeds the {} available rows",
            x.nrows()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = spread_init(x, k, &mut rng);
    let n = x.nrows();
    let mut assignments = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < cap {
        let mut next = vec![0; n];
        for i in 0..n {
            let (c, d) = nearest(x, i, &centroids);
            next[i] = c;
            dists[i] = d;
        }
        reseed_empty(x, &mut centroids, &mut next, &mut dists);
        history.push(dists.iter().sum());
        iterations += 1;
        let changed = next != assignments;
        assignments = next;
        if !changed {
            break;
        }
        update_centroids(x, &assignments, &mut centroids);
    }
    let inertia = (0..n)
        .map(|i| squared_distance(x.row(i), centroids.row(assignments[i])))
        .sum();
    Ok(Clustering {
        assignments,
        centroids,
        k,
        inertia,
        iterations,
        inertia_history: history,
    })
}

fn reseed_empty(
    x: ArrayView2<'_, f64>,
    centroids: &mut Array2<f64>,
    assignments: &mut [usize],
    dists: &mut [f64],
) {
    let k = centroids.nrows();
    for _ in 0..k {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        // Farthest point among clusters that can spare a member.
        let mut far: Option<usize> = None;
        for i in 0..assignments.len() {
            if counts[assignments[i]] > 1 && far.is_none_or(|f| dists[i] > dists[f]) {
                far = Some(i);
            }
        }
        let Some(far) = far.filter(|&f| dists[f] > 0.0) else {
            return;
        };
        centroids.row_mut(empty).assign(&x.row(far));
        for i in 0..assignments.len() {
            let d = squared_distance(x.row(i), x.row(far));
            if d < dists[i] || i == far {
                assignments[i] = empty;
                dists[i] = d;
            }
        }
    }
}

/// Seeded k-means: cluster `c` starts at the mean of `seeds[c]`, and seeded
/// rows stay in their cluster; the remaining rows move freely.
pub fn seeded_kmeans(x: ArrayView2<'_, f64>, seeds: &[Vec<usize>]) -> Result<Clustering> {
    check_matrix(x)?;
    let k = seeds.len();
    if k < 2 {
        return Err(Error::validation(format!(
            "seeded k-means needs at least 2 seed groups, got {k}"
        )));
    }
    let n = x.nrows();
    let mut pinned: Vec<Option<usize>> = vec![None; n];
    for (c, group) in seeds.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::validation(format!("seed group {c} is empty")));
        }
        for &i in group {
            if i >= n {
                return Err(Error::validation(format!(
                    "seed index {i} out of range for {n} rows"
                )));
            }
            if pinned[i].is_some_and(|p| p != c) {
                return Err(Error::validation(format!(
                    "row {i} is seeded into two clusters"
                )));
            }
            pinned[i] = Some(c);
        }
    }
    let mut centroids = Array2::zeros((k, x.ncols()));
    for (c, group) in seeds.iter().enumerate() {
        let mean = x.select(Axis(0), group).mean_axis(Axis(0)).expect("non-empty");
        centroids.row_mut(c).assign(&mean);
    }
    let mut assignments = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mut inertia = 0.0;
        let next: Vec<usize> = (0..n)
            .map(|i| {
                let (c, d) = match pinned[i] {
                    Some(c) => (c, squared_distance(x.row(i), centroids.row(c))),
                    None => nearest(x, i, &centroids),
                };
                inertia += d;
                c
            })
            .collect();
        history.push(inertia);
        iterations += 1;
        let changed = next != assignments;
        assignments = next;
        update_centroids(x, &assignments, &mut centroids);
        if !changed || pinned.iter().all(Option::is_some) {
            break;
        }
    }
    let inertia = (0..n)
        .map(|i| squared_distance(x.row(i), centroids.row(assignments[i])))
        .sum();
    Ok(Clustering {
        assignments,
        centroids,
        k,
        inertia,
        iterations,
        inertia_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn two_blobs() -> Array2<f64> {
        array![[0.0, 0.0], [0.5, 0.2], [0.1, 0.4], [10.0, 10.0], [10.3, 9.8], [9.9, 10.2]]
    }

    #[test]
    fn separates_far_blobs() {
        for seed in 0..5 {
            let c = kmeans(two_blobs().view(), 2, seed).unwrap();
            let a = &c.assignments;
            assert!(a[0] == a[1] && a[1] == a[2]);
            assert!(a[3] == a[4] && a[4] == a[5]);
            assert_ne!(a[0], a[3]);
        }
    }

    #[test]
    fn k_equal_n_has_zero_inertia() {
        let x = two_blobs();
        let c = kmeans(x.view(), 6, 3).unwrap();
        assert_eq!(c.inertia, 0.0);
        let mut a = c.assignments.clone();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn rejects_bad_k() {
        let x = two_blobs();
        assert!(kmeans(x.view(), 7, 0).is_err());
        assert!(kmeans(x.view(), 1, 0).is_err());
    }

    #[test]
    fn inertia_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in 0..20 {
            let x = Array2::from_shape_fn((60, 3), |_| rng.random_range(-5.0..5.0));
            let c = kmeans(x.view(), 2 + t % 6, t as u64).unwrap();
            for w in c.inertia_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "{:?}", c.inertia_history);
            }
            assert!(c.inertia <= c.inertia_history.last().unwrap() + 1e-9);
            assert!(c.assignments.iter().all(|&a| a < c.k));
        }
    }

    #[test]
    fn duplicate_points_terminate() {
        let x = Array2::from_elem((10, 2), 1.0);
        let c = kmeans(x.view(), 3, 0).unwrap();
        assert_eq!(c.assignments.len(), 10);
        assert_eq!(c.inertia, 0.0);
    }

    #[test]
    fn fully_seeded_returns_the_seed_partition() {
        let seeds = vec![vec![0, 3, 4], vec![1, 2, 5]];
        let c = seeded_kmeans(two_blobs().view(), &seeds).unwrap();
        assert_eq!(c.assignments, vec![0, 1, 1, 0, 0, 1]);
        assert_eq!(c.iterations, 1);
    }

    #[test]
    fn optimal_seeds_are_a_fixed_point() {
        let seeds = vec![vec![0], vec![3]];
        let c = seeded_kmeans(two_blobs().view(), &seeds).unwrap();
        assert_eq!(c.assignments, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn seeds_recover_a_partition_plain_kmeans_misses() {
        // Two long horizontal strips one unit apart. Splitting left/right has
        // lower inertia than the planted top/bottom split, so plain k-means
        // never finds it; seeds at the strip ends hold it in place.
        let mut rows = Vec::new();
        for strip in 0..2 {
            for i in 0..40 {
                rows.push([i as f64 * 0.5, strip as f64]);
            }
        }
        let x = Array2::from_shape_fn((80, 2), |(i, j)| rows[i][j]);
        let planted: Vec<usize> = (0..80).map(|i| i / 40).collect();
        let same_partition = |a: &[usize]| a == planted.as_slice() || a.iter().zip(&planted).all(|(p, q)| p != q);
        let plain = kmeans(x.view(), 2, 1).unwrap();
        assert!(!same_partition(&plain.assignments));
        let seeds = vec![vec![0, 39], vec![40, 79]];
        let ssk = seeded_kmeans(x.view(), &seeds).unwrap();
        assert!(same_partition(&ssk.assignments));
    }

    #[test]
    fn seeded_errors() {
        let x = two_blobs();
        assert!(seeded_kmeans(x.view(), &[vec![0], vec![]]).is_err());
        assert!(seeded_kmeans(x.view(), &[vec![0], vec![9]]).is_err());
        assert!(seeded_kmeans(x.view(), &[vec![0], vec![0]]).is_err());
    }
}
