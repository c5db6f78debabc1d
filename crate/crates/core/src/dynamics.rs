//! Exact evolution of the walk's density over a finite window of sites.
//!
//! The state is `Σᵢ ρᵢ ⊗ |i⟩⟨i|` with unnormalized blocks `ρᵢ`; one step maps
//! it to `ρ'ᵢ = Rρᵢ₋₁R* + Lρᵢ₊₁L*`. Because the walk is nearest-neighbour, a
//! window of half-width `n` loses nothing over `n` steps.

use serde::Serialize;

use crate::coin::Coin;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, kernel, ComplexMatrix, C64, ZERO};

/// Entries smaller than this are flushed to zero after each step. Far tails of
/// the walk otherwise decay into subnormal floats, whose arithmetic is about a
/// hundred times slower, while carrying no measurable probability.
pub const FLUSH: f64 = 1e-280;

/// Block densities on the sites `lo..=hi`.
#[derive(Debug, Clone)]
pub struct LatticeState {
    lo: i64,
    hi: i64,
    d: usize,
    blocks: Vec<C64>,
    scratch: Vec<C64>,
    /// Smallest and largest site that may hold a nonzero block.
    occupied: Option<(i64, i64)>,
    time: usize,
}

/// Flat copies of `L, L*, R, R*` for the stepping kernel.
struct Kernels {
    l: Vec<C64>,
    l_adj: Vec<C64>,
    r: Vec<C64>,
    r_adj: Vec<C64>,
}

impl Kernels {
    fn new(c: &Coin) -> Self {
        Self {
            l: c.left().entries().to_vec(),
            l_adj: c.left().adjoint().entries().to_vec(),
            r: c.right().entries().to_vec(),
            r_adj: c.right().adjoint().entries().to_vec(),
        }
    }
}

impl LatticeState {
    /// `x ⊗ |site⟩⟨site|` on the window `lo..=hi`.
    pub fn point_mass(x: &ComplexMatrix, site: i64, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi || site < lo || site > hi {
            return Err(Error::Config(format!("site {site} outside window [{lo}, {hi}]")));
        }
        let d = x.dim();
        let n = (hi - lo + 1) as usize;
        let mut blocks = vec![ZERO; n * d * d];
        let off = (site - lo) as usize * d * d;
        blocks[off..off + d * d].copy_from_slice(x.entries());
        Ok(Self {
            lo,
            hi,
            d,
            scratch: vec![ZERO; blocks.len()],
            blocks,
            occupied: Some((site, site)),
            time: 0,
        })
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn time(&self) -> usize {
        self.time
    }

    fn range(&self, site: i64) -> std::ops::Range<usize> {
        let dd = self.d * self.d;
        let k = (site - self.lo) as usize;
        k * dd..(k + 1) * dd
    }

    fn block_slice(&self, site: i64) -> &[C64] {
        &self.blocks[self.range(site)]
    }

    pub fn block(&self, site: i64) -> ComplexMatrix {
        if site < self.lo || site > self.hi {
            return ComplexMatrix::zeros(self.d);
        }
        ComplexMatrix::new(self.d, self.block_slice(site).to_vec()).expect("finite block")
    }

    /// `Re Tr ρ_site`.
    pub fn site_trace(&self, site: i64) -> f64 {
        if site < self.lo || site > self.hi {
            return 0.0;
        }
        kernel::trace_re(self.block_slice(site), self.d)
    }

    /// `Σᵢ Re Tr ρᵢ`.
    pub fn mass(&self) -> f64 {
        match self.occupied {
            None => 0.0,
            Some((a, b)) => (a..=b).map(|s| self.site_trace(s)).sum(),
        }
    }

    /// Clears the block at `site` (the projection `Q_site`).
    pub fn zero_site(&mut self, site: i64) {
        if site >= self.lo && site <= self.hi {
            let r = self.range(site);
            self.blocks[r].fill(ZERO);
        }
    }

    /// Smallest eigenvalue over all occupied blocks (Hermitian part).
    pub fn min_block_eigenvalue(&self) -> f64 {
        let Some((a, b)) = self.occupied else { return 0.0 };
        (a..=b)
            .map(|s| {
                let m = self.block(s).hermitian_part();
                hermitian_eigen(&m, f64::INFINITY).map(|p| p[0].value.re).unwrap_or(f64::NAN)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Applies one step in place.
    pub fn step(&mut self, c: &Coin) -> Result<()> {
        self.step_with(&Kernels::new(c))
    }

    fn step_with(&mut self, k: &Kernels) -> Result<()> {
        let d = self.d;
        let dd = d * d;
        let Some((a, b)) = self.occupied else {
            self.time += 1;
            return Ok(());
        };
        for site in [a, b] {
            if (site == self.lo || site == self.hi) && self.block_slice(site).iter().any(|z| *z != ZERO) {
                return Err(Error::WindowOverflow { site });
            }
        }
        let (na, nb) = ((a - 1).max(self.lo), (b + 1).min(self.hi));
        let out_start = (na - self.lo) as usize * dd;
        let out_end = (nb - self.lo + 1) as usize * dd;
        self.scratch[out_start..out_end].fill(ZERO);

        let mut tmp = vec![ZERO; dd];
        for s in a..=b {
            let src = self.range(s);
            let x = &self.blocks[src];
            if x.iter().all(|z| *z == ZERO) {
                continue;
            }
            if s > self.lo {
                let dst = self.range(s - 1);
                kernel::sandwich(&k.l, &k.l_adj, x, &mut tmp, &mut self.scratch[dst], d, true);
            }
            if s < self.hi {
                let dst = self.range(s + 1);
                kernel::sandwich(&k.r, &k.r_adj, x, &mut tmp, &mut self.scratch[dst], d, true);
            }
        }
        // Sites outside the new occupied range still hold stale data in
        // `scratch`; clear what the old range covered before swapping.
        let old_start = (a - self.lo) as usize * dd;
        let old_end = (b - self.lo + 1) as usize * dd;
        self.blocks[old_start..old_end].fill(ZERO);
        std::mem::swap(&mut self.blocks, &mut self.scratch);
        for z in &mut self.blocks[out_start..out_end] {
            if z.re.abs() < FLUSH {
                z.re = 0.0;
            }
            if z.im.abs() < FLUSH {
                z.im = 0.0;
            }
        }
        let empty = |st: &Self, site: i64| st.block_slice(site).iter().all(|z| *z == ZERO);
        let (mut na, mut nb) = (na, nb);
        while na < nb && empty(self, na) {
            na += 1;
        }
        while nb > na && empty(self, nb) {
            nb -= 1;
        }
        self.occupied = Some((na, nb));
        self.time += 1;
        Ok(())
    }
}

/// One step of the walk, returning the new state.
pub fn step_phi(s: &LatticeState, c: &Coin) -> Result<LatticeState> {
    let mut next = s.clone();
    next.step(c)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesMode {
    /// `Tr ρ₀` after `n` free steps.
    Return,
    /// Probability of arriving at 0 for the first time at step `n`.
    FirstReturn,
    /// Probability of being absorbed at 0 at step `n` on the half-line.
    Absorption,
}

/// Terms for `n = 0..=horizon` and their compensated running sums.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesResult {
    pub mode: SeriesMode,
    pub horizon: usize,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl SeriesResult {
    fn from_terms(mode: SeriesMode, terms: Vec<f64>) -> Self {
        let mut partial_sums = Vec::with_capacity(terms.len());
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &t in &terms {
            let y = t - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            partial_sums.push(sum);
        }
        Self {
            mode,
            horizon: terms.len() - 1,
            terms,
            partial_sums,
        }
    }

    /// Partial sum through step `n` (clamped to the horizon).
    pub fn sum_to(&self, n: usize) -> f64 {
        self.partial_sums[n.min(self.horizon)]
    }

    pub fn total(&self) -> f64 {
        self.partial_sums[self.horizon]
    }

    /// CSV with header `n,term,partial_sum`; `comment` lines are prefixed with `# `.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("n,term,partial_sum\n");
        for (n, (t, s)) in self.terms.iter().zip(&self.partial_sums).enumerate() {
            out.push_str(&format!("{n},{t:.16e},{s:.16e}\n"));
        }
        out
    }
}

fn check_operator(c: &Coin, x: &ComplexMatrix) -> Result<()> {
    if x.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

fn check_horizon(n_max: usize) -> Result<()> {
    if n_max < 2 {
        return Err(Error::Config(format!("horizon must be at least 2, got {n_max}")));
    }
    Ok(())
}

/// `Re Tr` of the site-0 block after `n` steps from `x ⊗ |0⟩⟨0|`, for `n ≤ n_max`.
///
/// `x` may be any operator; the series is linear in it.
pub fn return_series(c: &Coin, x: &ComplexMatrix, n_max: usize) -> Result<SeriesResult> {
    check_operator(c, x)?;
    check_horizon(n_max)?;
    let n = n_max as i64;
    let mut s = LatticeState::point_mass(x, 0, -n, n)?;
    let k = Kernels::new(c);
    let mut terms = Vec::with_capacity(n_max + 1);
    terms.push(s.site_trace(0));
    for _ in 0..n_max {
        s.step_with(&k)?;
        terms.push(s.site_trace(0));
    }
    Ok(SeriesResult::from_terms(SeriesMode::Return, terms))
}

/// First-arrival probabilities at 0: each step is followed by reading off and
/// clearing the site-0 block, so term `n` is `Tr P₀Φ(Q₀Φ)ⁿ⁻¹(x ⊗ |0⟩⟨0|)`.
pub fn first_return_series(c: &Coin, x: &ComplexMatrix, n_max: usize) -> Result<SeriesResult> {
    check_operator(c, x)?;
    check_horizon(n_max)?;
    let n = n_max as i64;
    let mut s = LatticeState::point_mass(x, 0, -n, n)?;
    let k = Kernels::new(c);
    let mut terms = Vec::with_capacity(n_max + 1);
    terms.push(0.0);
    for _ in 0..n_max {
        s.step_with(&k)?;
        terms.push(s.site_trace(0));
        s.zero_site(0);
    }
    Ok(SeriesResult::from_terms(SeriesMode::FirstReturn, terms))
}

/// Absorption at 0 for the walk on `{0, 1, ...}` started at `m ≥ 1`: the mass
/// arriving at 0 is recorded and removed each step.
pub fn absorption_series(c: &Coin, x: &ComplexMatrix, m: i64, n_max: usize) -> Result<SeriesResult> {
    check_operator(c, x)?;
    check_horizon(n_max)?;
    if m < 1 {
        return Err(Error::InvalidStart { start: m });
    }
    // One spare site on the right keeps the boundary empty through the last step.
    let mut s = LatticeState::point_mass(x, m, 0, n_max as i64 + m + 1)?;
    let k = Kernels::new(c);
    let mut terms = Vec::with_capacity(n_max + 1);
    terms.push(0.0);
    for _ in 0..n_max {
        s.step_with(&k)?;
        terms.push(s.site_trace(0));
        s.zero_site(0);
    }
    Ok(SeriesResult::from_terms(SeriesMode::Absorption, terms))
}

/// Sum of `Tr(B_w x B_w*)` over all words `w ∈ {L, R}ⁿ` with displacement `target`.
///
/// Independent of the lattice code: it walks the word tree directly.
pub fn brute_force_paths(c: &Coin, x: &ComplexMatrix, n: usize, target: i64) -> Result<f64> {
    check_operator(c, x)?;
    if n > 16 {
        return Err(Error::Config(format!("path enumeration limited to 16 steps, got {n}")));
    }
    fn walk(c: &Coin, x: &ComplexMatrix, left: usize, pos: i64, target: i64) -> f64 {
        if (target - pos).unsigned_abs() as usize > left {
            return 0.0;
        }
        if left == 0 {
            return x.trace().re;
        }
        walk(c, &ComplexMatrix::sandwich(c.left(), x), left - 1, pos - 1, target)
            + walk(c, &ComplexMatrix::sandwich(c.right(), x), left - 1, pos + 1, target)
    }
    Ok(walk(c, x, n, 0, target))
}
