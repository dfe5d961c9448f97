use std::fmt::Write as _;

use super::TopologyError;

/// A union of open cells of the `m × m` grid on the torus, glued along the
/// open edges they share. Cell `(i, j)` covers `[i/m, (i+1)/m] × [j/m, (j+1)/m]`
/// with `i` along `s` and `j` along `t`; its linear index is `i·m + j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxDomain {
    m: usize,
    cells: Vec<bool>,
}

/// The four edge neighbours with the deck vector crossed when stepping there.
pub(crate) fn neighbours4(m: usize, i: usize, j: usize) -> [(usize, usize, (i64, i64)); 4] {
    let wrap = |k: usize, d: isize| -> (usize, i64) {
        let v = k as isize + d;
        if v < 0 {
            (m - 1, -1)
        } else if v as usize >= m {
            (0, 1)
        } else {
            (v as usize, 0)
        }
    };
    let (ip, di_p) = wrap(i, 1);
    let (im, di_m) = wrap(i, -1);
    let (jp, dj_p) = wrap(j, 1);
    let (jm, dj_m) = wrap(j, -1);
    [
        (ip, j, (di_p, 0)),
        (im, j, (di_m, 0)),
        (i, jp, (0, dj_p)),
        (i, jm, (0, dj_m)),
    ]
}

/// The eight edge and corner neighbours with their deck vectors.
pub(crate) fn neighbours8(m: usize, i: usize, j: usize) -> Vec<(usize, usize, (i64, i64))> {
    let mut out = Vec::with_capacity(8);
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            if di == 0 && dj == 0 {
                continue;
            }
            let (a, b) = (i as i64 + di, j as i64 + dj);
            let mi = m as i64;
            out.push((
                a.rem_euclid(mi) as usize,
                b.rem_euclid(mi) as usize,
                (a.div_euclid(mi), b.div_euclid(mi)),
            ));
        }
    }
    out
}

impl BoxDomain {
    pub fn empty(m: usize) -> Self {
        assert!(m >= 1, "grid resolution must be positive");
        Self {
            m,
            cells: vec![false; m * m],
        }
    }

    pub fn full(m: usize) -> Self {
        Self {
            m,
            cells: vec![true; m * m],
        }
    }

    pub fn from_cells(
        m: usize,
        cells: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, TopologyError> {
        let mut d = Self::empty(m);
        for (i, j) in cells {
            if i >= m || j >= m {
                return Err(TopologyError::OutOfRange { i, j, m });
            }
            d.cells[i * m + j] = true;
        }
        Ok(d)
    }

    pub fn from_indices(
        m: usize,
        indices: impl IntoIterator<Item = u32>,
    ) -> Result<Self, TopologyError> {
        Self::from_cells(
            m,
            indices
                .into_iter()
                .map(|k| (k as usize / m, k as usize % m)),
        )
    }

    /// Cells meeting the open set `{(s, t) : pred(s, t)}` judged at cell centers.
    pub fn from_predicate(m: usize, pred: impl Fn(f64, f64) -> bool) -> Self {
        let h = 1.0 / m as f64;
        let mut d = Self::empty(m);
        for i in 0..m {
            for j in 0..m {
                d.cells[i * m + j] = pred((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            }
        }
        d
    }

    /// The horizontal band `j < ⌈w·m⌉` together with the vertical band `i < ⌈w·m⌉`.
    pub fn cross(m: usize, width: f64) -> Self {
        let k = (width * m as f64).ceil() as usize;
        let mut d = Self::empty(m);
        for i in 0..m {
            for j in 0..m {
                d.cells[i * m + j] = i < k || j < k;
            }
        }
        d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.m + j]
    }

    #[inline]
    pub fn contains_index(&self, k: usize) -> bool {
        self.cells[k]
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.cells[i * self.m + j] = true;
    }

    /// Cells in linear-index order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        self.indices().map(move |k| (k / m, k % m))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(k, _)| k)
    }

    /// Does the open domain contain the point `(s, t)`? Points on a shared
    /// edge between two member cells count as inside.
    pub fn contains_point(&self, s: f64, t: f64) -> bool {
        let m = self.m as f64;
        let (x, y) = (s.rem_euclid(1.0) * m, t.rem_euclid(1.0) * m);
        let (i, j) = (x.floor() as usize % self.m, y.floor() as usize % self.m);
        let on_x = x == x.floor();
        let on_y = y == y.floor();
        match (on_x, on_y) {
            (false, false) => self.contains(i, j),
            (true, false) => {
                let il = (i + self.m - 1) % self.m;
                self.contains(i, j) && self.contains(il, j)
            }
            (false, true) => {
                let jl = (j + self.m - 1) % self.m;
                self.contains(i, j) && self.contains(i, jl)
            }
            (true, true) => {
                let il = (i + self.m - 1) % self.m;
                let jl = (j + self.m - 1) % self.m;
                self.contains(i, j)
                    && self.contains(il, j)
                    && self.contains(i, jl)
                    && self.contains(il, jl)
            }
        }
    }

    fn check_grid(&self, other: &BoxDomain) -> Result<(), TopologyError> {
        if self.m != other.m {
            return Err(TopologyError::GridMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(())
    }

    pub fn intersects(&self, other: &BoxDomain) -> Result<bool, TopologyError> {
        self.check_grid(other)?;
        Ok(self.cells.iter().zip(&other.cells).any(|(&a, &b)| a && b))
    }

    pub fn union(&self, other: &BoxDomain) -> Result<BoxDomain, TopologyError> {
        self.check_grid(other)?;
        Ok(BoxDomain {
            m: self.m,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(&a, &b)| a || b)
                .collect(),
        })
    }

    pub fn is_subset(&self, other: &BoxDomain) -> Result<bool, TopologyError> {
        self.check_grid(other)?;
        Ok(self.cells.iter().zip(&other.cells).all(|(&a, &b)| !a || b))
    }

    pub fn complement(&self) -> BoxDomain {
        BoxDomain {
            m: self.m,
            cells: self.cells.iter().map(|&c| !c).collect(),
        }
    }

    /// Shift by `(di, dj)` cells on the torus.
    pub fn translate(&self, di: i64, dj: i64) -> BoxDomain {
        let m = self.m as i64;
        let mut out = Self::empty(self.m);
        for (i, j) in self.cells() {
            let a = (i as i64 + di).rem_euclid(m) as usize;
            let b = (j as i64 + dj).rem_euclid(m) as usize;
            out.insert(a, b);
        }
        out
    }

    /// Each cell split into four; the same open set on the `2m` grid.
    pub fn refine(&self) -> BoxDomain {
        let mut out = Self::empty(2 * self.m);
        for (i, j) in self.cells() {
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                out.insert(2 * i + a, 2 * j + b);
            }
        }
        out
    }

    /// Connected components under 4-adjacency on the torus, ordered by their
    /// smallest linear index.
    pub fn components(&self) -> Vec<BoxDomain> {
        self.components_with(false)
    }

    /// Components under 8-adjacency (used for complements).
    pub fn components8(&self) -> Vec<BoxDomain> {
        self.components_with(true)
    }

    fn components_with(&self, diagonal: bool) -> Vec<BoxDomain> {
        let m = self.m;
        let mut seen = vec![false; m * m];
        let mut out = Vec::new();
        for start in self.indices() {
            if seen[start] {
                continue;
            }
            let mut comp = Self::empty(m);
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(k) = stack.pop() {
                comp.cells[k] = true;
                let (i, j) = (k / m, k % m);
                let nbrs: Vec<(usize, usize, (i64, i64))> = if diagonal {
                    neighbours8(m, i, j)
                } else {
                    neighbours4(m, i, j).to_vec()
                };
                for (a, b, _) in nbrs {
                    let idx = a * m + b;
                    if self.cells[idx] && !seen[idx] {
                        seen[idx] = true;
                        stack.push(idx);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Run-length encoding: a header line `m count`, then one `start length`
    /// line per maximal run of consecutive linear indices.
    pub fn to_rle(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.len());
        let n = self.cells.len();
        let mut k = 0;
        while k < n {
            if !self.cells[k] {
                k += 1;
                continue;
            }
            let start = k;
            while k < n && self.cells[k] {
                k += 1;
            }
            writeln!(out, "{} {}", start, k - start).unwrap();
        }
        out
    }

    pub fn from_rle(text: &str) -> Result<Self, TopologyError> {
        let bad = |msg: String| TopologyError::Parse(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let nums = |line: &str| -> Result<(usize, usize), TopologyError> {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(bad(format!("expected two integers, got {line:?}"))),
            }
        };
        let (m, count) = nums(header)?;
        if m == 0 {
            return Err(bad("grid resolution must be positive".into()));
        }
        let mut d = Self::empty(m);
        let mut last_end = 0;
        let mut first = true;
        for line in lines {
            let (start, len) = nums(line)?;
            if len == 0 || (!first && start <= last_end) || start + len > m * m {
                return Err(bad(format!(
                    "run {start} {len} out of order or out of range"
                )));
            }
            d.cells[start..start + len].fill(true);
            last_end = start + len;
            first = false;
        }
        if d.len() != count {
            return Err(bad(format!(
                "header count {count} but runs cover {}",
                d.len()
            )));
        }
        Ok(d)
    }
}
