//! Independent reference computations used by the integration and acceptance
//! tests. Nothing here calls into the library: coordinates, neighbours and
//! enumerations are re-derived from scratch.
#![allow(dead_code)]

use std::collections::HashMap;

/// Periodic grid with centered coordinates `lo..lo+L`, `lo = -⌊(L-1)/2⌋`,
/// row-major with axis 0 slowest.
#[derive(Clone, Debug)]
pub struct Grid {
    pub d: usize,
    pub l: usize,
    pub lo: i64,
}

impl Grid {
    pub fn new(d: usize, l: usize) -> Self {
        Grid { d, l, lo: -(((l - 1) / 2) as i64) }
    }

    pub fn sites(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    pub fn coords(&self, mut i: usize) -> Vec<i64> {
        let mut c = vec![0; self.d];
        for a in (0..self.d).rev() {
            c[a] = (i % self.l) as i64 + self.lo;
            i /= self.l;
        }
        c
    }

    pub fn index(&self, c: &[i64]) -> usize {
        c.iter().fold(0, |acc, &x| {
            let w = (x - self.lo).rem_euclid(self.l as i64) as usize;
            acc * self.l + w
        })
    }

    /// Neighbour in direction `k`: axis `k/2`, `+` when `k` is even.
    pub fn nbr(&self, i: usize, k: usize) -> usize {
        let mut c = self.coords(i);
        c[k / 2] += if k.is_multiple_of(2) { 1 } else { -1 };
        self.index(&c)
    }

    pub fn r2(&self, i: usize) -> i64 {
        self.coords(i).iter().map(|x| x * x).sum()
    }

    pub fn origin(&self) -> usize {
        self.index(&vec![0; self.d])
    }

    /// `b - a` reduced to the grid.
    pub fn diff(&self, a: usize, b: usize) -> usize {
        let (ca, cb) = (self.coords(a), self.coords(b));
        let c: Vec<i64> = ca.iter().zip(&cb).map(|(x, y)| y - x).collect();
        self.index(&c)
    }
}

/// Average a per-site quantity over sites with equal `‖x‖²`.
pub fn by_radius(grid: &Grid, per_site: &[f64]) -> Vec<(i64, f64)> {
    let mut acc: std::collections::BTreeMap<i64, (f64, usize)> = Default::default();
    for (i, v) in per_site.iter().enumerate() {
        let e = acc.entry(grid.r2(i)).or_default();
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter().map(|(r2, (s, n))| (r2, s / n as f64)).collect()
}

// ---- self-avoiding walks ---------------------------------------------------

/// `counts[n][x]`: SAWs of length `n` from the origin ending at `x`, `n ≤ k_max`.
pub fn saw_counts(grid: &Grid, k_max: usize) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; grid.sites()]; k_max + 1];
    let nbrs: Vec<Vec<usize>> = (0..grid.sites()).map(|i| (0..2 * grid.d).map(|k| grid.nbr(i, k)).collect()).collect();
    let mut on = vec![false; grid.sites()];
    fn dfs(x: usize, n: usize, k_max: usize, nbrs: &[Vec<usize>], on: &mut [bool], counts: &mut [Vec<u64>]) {
        counts[n][x] += 1;
        if n == k_max {
            return;
        }
        for &y in &nbrs[x] {
            if !on[y] {
                on[y] = true;
                dfs(y, n + 1, k_max, nbrs, on, counts);
                on[y] = false;
            }
        }
    }
    let o = grid.origin();
    on[o] = true;
    dfs(o, 0, k_max, &nbrs, &mut on, &mut counts);
    counts
}

pub struct SawOracle {
    /// `Σ_ω z^{|ω|}` over walks ending at each site (truncated).
    pub g: Vec<f64>,
    /// Stationary `P(|ω| = n)`, `n ≤ k_max`.
    pub length_distribution: Vec<f64>,
    /// Upper bound on the omitted weight `Σ_{n > k_max} c_n z^n`.
    pub tail: f64,
    pub partition: f64,
}

pub fn saw_oracle(grid: &Grid, z: f64, k_max: usize) -> SawOracle {
    let counts = saw_counts(grid, k_max);
    let mut g = vec![0.0; grid.sites()];
    let mut by_len = vec![0.0; k_max + 1];
    for (n, row) in counts.iter().enumerate() {
        let w = z.powi(n as i32);
        for (x, &c) in row.iter().enumerate() {
            g[x] += c as f64 * w;
            by_len[n] += c as f64 * w;
        }
    }
    // c_{n+1} ≤ (2d - 1) c_n
    let q = (2 * grid.d - 1) as f64 * z;
    assert!(q < 1.0);
    let tail = by_len[k_max] * q / (1.0 - q);
    let partition: f64 = by_len.iter().sum();
    SawOracle { g, length_distribution: by_len.iter().map(|w| w / partition).collect(), tail, partition }
}

// ---- Ising ----------------------------------------------------------------

/// `⟨s_0 s_x⟩` per displacement by summing all `2^V` spin configurations at
/// `β = atanh z`.
pub fn ising_spin_correlations(grid: &Grid, z: f64) -> Vec<f64> {
    let v = grid.sites();
    assert!(v <= 24);
    let beta = z.atanh();
    let edges: Vec<(usize, usize)> =
        (0..v).flat_map(|i| (0..grid.d).map(move |a| (i, a))).map(|(i, a)| (i, grid.nbr(i, 2 * a))).collect();
    let mut zsum = 0.0;
    let mut corr = vec![0.0; v];
    for s in 0u32..(1 << v) {
        let spin = |i: usize| if s >> i & 1 == 1 { -1.0 } else { 1.0 };
        let e: f64 = edges.iter().map(|&(a, b)| spin(a) * spin(b)).sum();
        let w = (beta * e).exp();
        zsum += w;
        for (x, c) in corr.iter_mut().enumerate() {
            *c += w * spin(0) * spin(x);
        }
    }
    // translation average: ⟨s_0 s_x⟩ from site 0 is representative
    let base = grid.coords(0);
    let mut out = vec![0.0; v];
    for x in 0..v {
        let c = grid.coords(x);
        let disp: Vec<i64> = c.iter().zip(&base).map(|(a, b)| a - b).collect();
        out[grid.index(&disp)] = corr[x] / zsum;
    }
    out
}

/// Edges as `(x, x + e_axis)`, id `x·d + axis`.
pub fn ising_edges(grid: &Grid) -> Vec<(usize, usize)> {
    (0..grid.sites()).flat_map(|i| (0..grid.d).map(move |a| (i, a))).map(|(i, a)| (i, grid.nbr(i, 2 * a))).collect()
}

/// Incidence lists and lexicographic ranks (from sorting coordinate vectors).
pub struct TrailOracle {
    incident: Vec<Vec<(usize, usize)>>,
    rank: Vec<usize>,
}

impl TrailOracle {
    pub fn new(grid: &Grid, edges: &[(usize, usize)]) -> Self {
        let mut incident = vec![Vec::new(); grid.sites()];
        for (e, &(p, q)) in edges.iter().enumerate() {
            incident[p].push((e, q));
            incident[q].push((e, p));
        }
        let mut by_coords: Vec<usize> = (0..grid.sites()).collect();
        by_coords.sort_by_key(|&i| grid.coords(i));
        let mut rank = vec![0; grid.sites()];
        for (r, &i) in by_coords.iter().enumerate() {
            rank[i] = r;
        }
        TrailOracle { incident, rank }
    }

    /// Greedy trail length for an edge mask with odd vertices `{a, b}`.
    pub fn length(&self, mask: u64, a: usize, b: usize) -> usize {
        let (x, y) = if self.rank[a] < self.rank[b] { (a, b) } else { (b, a) };
        let mut used = 0u64;
        let mut cur = x;
        let mut len = 0;
        loop {
            let mut best: Option<(usize, usize)> = None;
            for &(e, other) in &self.incident[cur] {
                if mask >> e & 1 == 0 || used >> e & 1 == 1 {
                    continue;
                }
                if best.is_none_or(|(w, _)| self.rank[other] < self.rank[w]) {
                    best = Some((other, e));
                }
            }
            match best {
                Some((w, e)) => {
                    used |= 1 << e;
                    cur = w;
                    len += 1;
                }
                None => break,
            }
        }
        assert_eq!(cur, y);
        len
    }
}

pub struct IsingOracle {
    /// `Z_{0x}/Z_0` per displacement.
    pub g: Vec<f64>,
    pub chi: f64,
    /// Worm-stationary mean of the trail length, `C_0` counted as 0.
    pub mean_trail: f64,
    /// Mean trail length over `C_2` with weights `z^{|A|}`.
    pub mean_trail_c2: f64,
}

/// Enumerate `C_0` and every `C_2(a, b)` as cosets of the cycle space.
/// Needs at most 64 edges.
pub fn ising_high_temperature(grid: &Grid, z: f64) -> IsingOracle {
    let v = grid.sites();
    let edges = ising_edges(grid);
    assert!(edges.len() <= 64);
    // spanning tree by BFS from site 0
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; v];
    let mut seen = vec![false; v];
    let mut order = vec![0usize];
    seen[0] = true;
    let mut tree = 0u64;
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        for (e, &(p, q)) in edges.iter().enumerate() {
            let y = if p == x {
                q
            } else if q == x {
                p
            } else {
                continue;
            };
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, e));
                tree |= 1 << e;
                order.push(y);
            }
        }
    }
    let root_path = |mut x: usize| {
        let mut m = 0u64;
        while let Some((p, e)) = parent[x] {
            m ^= 1 << e;
            x = p;
        }
        m
    };
    let to_root: Vec<u64> = (0..v).map(root_path).collect();
    let basis: Vec<u64> = edges
        .iter()
        .enumerate()
        .filter(|(e, _)| tree >> e & 1 == 0)
        .map(|(e, &(p, q))| (1u64 << e) ^ to_root[p] ^ to_root[q])
        .collect();
    let dim = basis.len();
    let trails = TrailOracle::new(grid, &edges);
    assert!(dim <= 24);
    // Gray-code walk over the cycle space, starting from `start`
    let weight = |m: u64| z.powi(m.count_ones() as i32);
    let each = |start: u64, f: &mut dyn FnMut(u64)| {
        let mut m = start;
        f(m);
        for k in 1u64..(1 << dim) {
            m ^= basis[k.trailing_zeros() as usize];
            f(m);
        }
    };
    let mut z0 = 0.0;
    each(0, &mut |m| z0 += weight(m));
    let mut zab = vec![0.0; v];
    let mut trail_w = 0.0;
    let mut c2_w = 0.0;
    for a in 0..v {
        for b in a + 1..v {
            let start = to_root[a] ^ to_root[b];
            let mut s = 0.0;
            let mut t = 0.0;
            each(start, &mut |m| {
                let w = weight(m);
                s += w;
                t += w * trails.length(m, a, b) as f64;
            });
            zab[grid.diff(a, b)] += s;
            zab[grid.diff(b, a)] += s;
            trail_w += t;
            c2_w += s;
        }
    }
    // each displacement x ≠ 0 collects Σ_a Z(a, a+x) = V Z_{0x}
    let mut g: Vec<f64> = zab.iter().map(|s| s / (v as f64 * z0)).collect();
    g[grid.origin()] = 1.0;
    let chi = g.iter().sum();
    IsingOracle {
        g,
        chi,
        mean_trail: 2.0 * trail_w / (v as f64 * z0 + 2.0 * c2_w),
        mean_trail_c2: trail_w / c2_w,
    }
}

// ---- loop-erased walk -----------------------------------------------------

/// Exact distribution of the first erased path of length `n` (sites in
/// order) by evolving the distribution over shorter erased paths.
pub fn lerw_final_paths(grid: &Grid, n: usize, steps: usize) -> (HashMap<Vec<usize>, f64>, f64) {
    let mut live: HashMap<Vec<usize>, f64> = HashMap::new();
    live.insert(vec![grid.origin()], 1.0);
    let mut done: HashMap<Vec<usize>, f64> = HashMap::new();
    if n == 0 {
        return (live, 0.0);
    }
    let p = 1.0 / (2 * grid.d) as f64;
    for _ in 0..steps {
        let mut next: HashMap<Vec<usize>, f64> = HashMap::new();
        for (path, w) in live {
            let tip = *path.last().unwrap();
            for k in 0..2 * grid.d {
                let y = grid.nbr(tip, k);
                let mut np = path.clone();
                match np.iter().position(|&s| s == y) {
                    Some(i) => np.truncate(i + 1),
                    None => np.push(y),
                }
                if np.len() == n + 1 {
                    *done.entry(np).or_default() += w * p;
                } else {
                    *next.entry(np).or_default() += w * p;
                }
            }
        }
        live = next;
    }
    let residual = live.values().sum();
    (done, residual)
}

/// `E[#{visits of x by the erased path}]` for fixed length `n`.
pub fn lerw_two_point(grid: &Grid, n: usize, steps: usize) -> (Vec<f64>, f64) {
    let (paths, residual) = lerw_final_paths(grid, n, steps);
    let mut g = vec![0.0; grid.sites()];
    for (path, w) in paths {
        for x in path {
            g[x] += w;
        }
    }
    (g, residual)
}

// ---- fixtures ---------------------------------------------------------------

/// A `C_2` configuration on `T_5^2` with odd vertices `0` and `(1, 2)` whose
/// lexicographic greedy trail has length 22, with four edges left over.
pub const TRAIL_22_EDGES: [([i64; 2], [i64; 2]); 26] = [
    ([-2, -2], [-2, 2]),
    ([-2, -2], [2, -2]),
    ([-2, -1], [-2, 0]),
    ([-2, -1], [2, -1]),
    ([-2, 0], [2, 0]),
    ([-2, 1], [-2, 2]),
    ([-2, 1], [-1, 1]),
    ([-2, 2], [-1, 2]),
    ([-2, 2], [2, 2]),
    ([-1, -2], [-1, -1]),
    ([-1, -2], [0, -2]),
    ([-1, -1], [0, -1]),
    ([-1, 1], [-1, 2]),
    ([0, -2], [1, -2]),
    ([0, -1], [0, 0]),
    ([0, 0], [0, 1]),
    ([0, 0], [1, 0]),
    ([0, 1], [1, 1]),
    ([1, -2], [1, -1]),
    ([1, -2], [1, 2]),
    ([1, -2], [2, -2]),
    ([1, -1], [2, -1]),
    ([1, 0], [1, 1]),
    ([2, -2], [2, -1]),
    ([2, -2], [2, 2]),
    ([2, -1], [2, 0]),
];
pub const TRAIL_22_DEFECTS: ([i64; 2], [i64; 2]) = ([0, 0], [1, 2]);

/// Edge mask of the fixture in [`ising_edges`] numbering.
pub fn trail_22_mask(grid: &Grid) -> u64 {
    let edges = ising_edges(grid);
    TRAIL_22_EDGES.iter().fold(0u64, |m, (p, q)| {
        let (a, b) = (grid.index(p), grid.index(q));
        let e = edges.iter().position(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)).expect("fixture edge");
        m | 1 << e
    })
}
