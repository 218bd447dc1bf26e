//! Geometry of the discrete torus `T_L^d`.
//!
//! Sites are stored in centered coordinates: each coordinate lies in
//! `[-(L-1)/2, (L-1)/2]` for odd `L` and in `(-L/2, L/2]` for even `L`, so
//! Euclidean norms of torus sites need no minimum-image correction. The flat
//! index is row-major over axes `0..d` (axis 0 slowest) with ascending
//! coordinate, which makes index order coincide with lexicographic order of
//! the centered coordinates.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// A site of `T_L^d` (or of `Z^d`) in centered coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl Site {
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "site dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Site { dim: coords.len() as u8, coords: c }
    }

    pub fn origin(dim: usize) -> Self {
        Site::new(&[0; MAX_DIM][..dim])
    }

    pub fn dim(&self) -> usize {
        usize::from(self.dim)
    }

    /// Squared Euclidean norm, exact.
    pub fn norm2(&self) -> i64 {
        self.iter().map(|c| c * c).sum()
    }

    pub fn l1_norm(&self) -> i64 {
        self.iter().map(|c| c.abs()).sum()
    }

    /// `‖x‖₁ mod 2`.
    pub fn parity(&self) -> u8 {
        (self.l1_norm() & 1) as u8
    }

    pub fn shifted(&self, step: Step) -> Site {
        let mut s = *self;
        s.coords[step.axis()] += step.sign();
        s
    }
}

impl Deref for Site {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.coords[..self.dim()]
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Site").field(&&**self).finish()
    }
}

/// Euclidean norm `sqrt(x·x)`.
pub fn euclid_norm(s: &Site) -> f64 {
    libm::sqrt(s.norm2() as f64)
}

/// One of the `2d` unit vectors `±e_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step(u8);

impl Step {
    pub fn new(axis: usize, sign: i8) -> Self {
        assert!(axis < MAX_DIM && (sign == 1 || sign == -1));
        Step((axis as u8) << 1 | u8::from(sign < 0))
    }

    /// Step number `k` in `0..2d`: axis `k / 2`, positive for even `k`.
    pub fn from_index(k: usize) -> Self {
        assert!(k < 2 * MAX_DIM);
        Step(k as u8)
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }

    pub fn axis(self) -> usize {
        usize::from(self.0 >> 1)
    }

    pub fn sign(self) -> i64 {
        if self.0 & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn reversed(self) -> Step {
        Step(self.0 ^ 1)
    }

    pub fn all(dim: usize) -> impl Iterator<Item = Step> + Clone {
        (0..2 * dim).map(Step::from_index)
    }
}

/// The box `T_L^d` with periodic boundary conditions.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Torus {
    dim: usize,
    side: usize,
    sites: usize,
    strides: [usize; MAX_DIM],
}

impl fmt::Debug for Torus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Torus(d={}, L={})", self.dim, self.side)
    }
}

impl Torus {
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::param("dim", alloc::format!("must be in 1..={MAX_DIM}, got {dim}")));
        }
        if side == 0 {
            return Err(Error::param("side", "must be positive"));
        }
        let mut strides = [0usize; MAX_DIM];
        let mut sites: usize = 1;
        for axis in (0..dim).rev() {
            strides[axis] = sites;
            sites = sites
                .checked_mul(side)
                .filter(|&n| n <= u32::MAX as usize)
                .ok_or_else(|| Error::param("side", "L^d does not fit in 32-bit site indices"))?;
        }
        Ok(Torus { dim, side, sites, strides })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// `L^d`.
    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Number of nearest-neighbour edges, `d·L^d` (for `L ≥ 3`).
    pub fn edges(&self) -> usize {
        self.dim * self.sites
    }

    pub fn degree(&self) -> usize {
        2 * self.dim
    }

    pub fn min_coord(&self) -> i64 {
        -(((self.side - 1) / 2) as i64)
    }

    pub fn max_coord(&self) -> i64 {
        (self.side / 2) as i64
    }

    pub fn contains(&self, s: &Site) -> bool {
        s.dim() == self.dim && s.iter().all(|&c| c >= self.min_coord() && c <= self.max_coord())
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn origin(&self) -> usize {
        let shift = (-self.min_coord()) as usize;
        (0..self.dim).map(|a| shift * self.strides[a]).sum()
    }

    /// Offset coordinate `c - min_coord ∈ [0, L)` of `idx` along `axis`.
    #[inline]
    pub fn offset(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.side
    }

    pub fn site_index(&self, s: &Site) -> Result<usize> {
        if !self.contains(s) {
            return Err(Error::input(alloc::format!("site {s:?} is not in {self:?}")));
        }
        let min = self.min_coord();
        Ok(s.iter().enumerate().map(|(a, &c)| (c - min) as usize * self.strides[a]).sum())
    }

    pub fn index_site(&self, idx: usize) -> Result<Site> {
        if idx >= self.sites {
            return Err(Error::input(alloc::format!("index {idx} out of range for {self:?}")));
        }
        Ok(self.site(idx))
    }

    /// Unchecked variant of [`Torus::index_site`].
    pub fn site(&self, idx: usize) -> Site {
        let mut c = [0i64; MAX_DIM];
        let min = self.min_coord();
        for (a, slot) in c.iter_mut().enumerate().take(self.dim) {
            *slot = self.offset(idx, a) as i64 + min;
        }
        Site::new(&c[..self.dim])
    }

    /// Periodic wrap: `s + c` if that stays in the box, else `s + c(1 - L)`.
    pub fn wrap_step(&self, s: &Site, step: Step) -> Site {
        let mut t = s.shifted(step);
        let c = &mut t.coords[step.axis()];
        if *c > self.max_coord() || *c < self.min_coord() {
            *c = s.coords[step.axis()] + step.sign() * (1 - self.side as i64);
        }
        t
    }

    /// Index form of [`Torus::wrap_step`].
    #[inline]
    pub fn neighbor(&self, idx: usize, step: Step) -> usize {
        let axis = step.axis();
        let stride = self.strides[axis];
        let o = (idx / stride) % self.side;
        if step.is_positive() {
            if o + 1 == self.side {
                idx - o * stride
            } else {
                idx + stride
            }
        } else if o == 0 {
            idx + (self.side - 1) * stride
        } else {
            idx - stride
        }
    }

    /// Index of the displacement `b - a`, reduced into the box.
    pub fn displacement(&self, a: usize, b: usize) -> usize {
        let shift = (-self.min_coord()) as usize;
        let l = self.side;
        (0..self.dim)
            .map(|axis| {
                let oa = self.offset(a, axis);
                let ob = self.offset(b, axis);
                ((ob + l - oa + shift) % l) * self.strides[axis]
            })
            .sum()
    }

    /// Reduce arbitrary integer coordinates into the box.
    pub fn reduce(&self, s: &Site) -> Site {
        let l = self.side as i64;
        let min = self.min_coord();
        let mut t = *s;
        for c in t.coords[..self.dim].iter_mut() {
            *c = (*c - min).rem_euclid(l) + min;
        }
        t
    }

    /// Dense neighbour table, `table[2d·x + k]` = neighbour of `x` along step `k`.
    pub fn neighbor_table(&self) -> Vec<u32> {
        let deg = self.degree();
        let mut table = Vec::with_capacity(self.sites * deg);
        for x in 0..self.sites {
            for step in Step::all(self.dim) {
                table.push(self.neighbor(x, step) as u32);
            }
        }
        table
    }

    pub fn iter_sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.sites).map(move |i| self.site(i))
    }
}

/// Free-function form of [`Torus::wrap_step`].
pub fn wrap_step(geom: &Torus, s: &Site, step: Step) -> Site {
    geom.wrap_step(s, step)
}

pub fn site_index(geom: &Torus, s: &Site) -> Result<usize> {
    geom.site_index(s)
}

pub fn index_site(geom: &Torus, idx: usize) -> Result<Site> {
    geom.index_site(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn t(d: usize, l: usize) -> Torus {
        Torus::new(d, l).unwrap()
    }

    #[test]
    fn wrap_examples() {
        let g = t(1, 5);
        assert_eq!(*g.wrap_step(&Site::new(&[2]), Step::new(0, 1)), [-2]);
        let g = t(2, 4);
        assert_eq!(*g.wrap_step(&Site::new(&[0, 0]), Step::new(0, 1)), [1, 0]);
        let g = t(1, 4);
        assert_eq!(*g.wrap_step(&Site::new(&[-1]), Step::new(0, -1)), [2]);
    }

    #[test]
    fn ranges_follow_box_convention() {
        assert_eq!((t(1, 5).min_coord(), t(1, 5).max_coord()), (-2, 2));
        assert_eq!((t(1, 4).min_coord(), t(1, 4).max_coord()), (-1, 2));
        assert_eq!(t(3, 7).sites(), 343);
    }

    #[test]
    fn norms() {
        assert_eq!(euclid_norm(&Site::new(&[0, 0, 0])), 0.0);
        assert_eq!(euclid_norm(&Site::new(&[1, 0])), 1.0);
        assert_eq!(euclid_norm(&Site::new(&[1, 2])), libm::sqrt(5.0));
    }

    #[test]
    fn index_order() {
        let g = t(1, 3);
        for (c, i) in [(-1, 0), (0, 1), (1, 2)] {
            assert_eq!(g.site_index(&Site::new(&[c])).unwrap(), i);
        }
        let g = t(2, 3);
        assert_eq!(g.site_index(&Site::new(&[-1, -1])).unwrap(), 0);
        for s in g.iter_sites() {
            assert_eq!(g.index_site(g.site_index(&s).unwrap()).unwrap(), s);
        }
        assert!(g.site_index(&Site::new(&[2, 0])).is_err());
        assert!(g.index_site(9).is_err());
        assert_eq!(g.site(g.origin()), Site::origin(2));
    }

    #[test]
    fn index_order_is_lexicographic() {
        let g = t(3, 4);
        let sites: alloc::vec::Vec<Site> = g.iter_sites().collect();
        assert!(sites.windows(2).all(|w| *w[0] < *w[1]));
    }

    #[test]
    fn wrap_step_is_bijective_and_index_consistent() {
        for d in 1..=3 {
            for l in 1..=6 {
                let g = t(d, l);
                for step in Step::all(d) {
                    let image: BTreeSet<Site> =
                        g.iter_sites().map(|s| g.wrap_step(&s, step)).collect();
                    assert_eq!(image.len(), g.sites());
                    for x in 0..g.sites() {
                        let s = g.site(x);
                        let w = g.wrap_step(&s, step);
                        assert!(g.contains(&w));
                        assert_eq!(g.site_index(&w).unwrap(), g.neighbor(x, step));
                        let mut back = s;
                        for _ in 0..l {
                            back = g.wrap_step(&back, step);
                        }
                        assert_eq!(back, s);
                    }
                }
            }
        }
    }

    #[test]
    fn parity_flips_on_even_side() {
        for l in [2, 4, 6] {
            let g = t(2, l);
            for s in g.iter_sites() {
                for step in Step::all(2) {
                    assert_ne!(s.parity(), g.wrap_step(&s, step).parity());
                }
            }
        }
    }

    #[test]
    fn displacement_and_reduce() {
        let g = t(2, 5);
        for a in 0..g.sites() {
            for b in 0..g.sites() {
                let sa = g.site(a);
                let sb = g.site(b);
                let diff = Site::new(&[sb[0] - sa[0], sb[1] - sa[1]]);
                assert_eq!(g.site(g.displacement(a, b)), g.reduce(&diff));
            }
        }
        assert_eq!(g.displacement(7, 7), g.origin());
    }
}
