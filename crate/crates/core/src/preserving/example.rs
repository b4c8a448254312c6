//! Tile-wise preserving shifts against a uniformly offset lattice of
//! `n`-boxes, and a checker for allocation rules.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measure::{wrap, Cuboid, MeasureWindow};

use super::cdf::{build_cdf, psi_shift, StepCdf};
use super::phi::decode_unit_f64;

/// Resolution settings for building `F_μ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PsiOptions {
    /// Each grid cell is split `2^subdivide` times per axis.
    pub subdivide: u32,
    /// Bits per coordinate for `φ`.
    pub bits: u32,
}

impl Default for PsiOptions {
    fn default() -> Self {
        PsiOptions { subdivide: 0, bits: 48 }
    }
}

/// The stationary background: boxes of `n Z^d - Y0`, and the position
/// `Y_s` of every point inside its box.
#[derive(Clone, Debug, PartialEq)]
pub struct Background {
    n: u32,
    y0: Vec<f64>,
}

impl Background {
    pub fn new(n: u32, y0: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("box side n must be positive".into()));
        }
        if y0.iter().any(|y| !(0.0..n as f64).contains(y)) {
            return Err(Error::InvalidParameter(format!("background offset {y0:?} outside [0, {n})")));
        }
        Ok(Background { n, y0 })
    }

    /// `Y0` uniform on `[0, n)^d`.
    pub fn draw<R: Rng + ?Sized>(dim: usize, n: u32, rng: &mut R) -> Self {
        let nf = n as f64;
        let y0 = (0..dim).map(|_| wrap(rng.random::<f64>() * nf, nf)).collect();
        Background { n, y0 }
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn y0(&self) -> &[f64] {
        &self.y0
    }
    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    /// `Y_s`: the vector from the lowest corner of the box containing `s` to `s`.
    pub fn y_at(&self, s: &[f64]) -> Vec<f64> {
        let nf = self.n as f64;
        s.iter().zip(&self.y0).map(|(x, y)| wrap(x + y, nf)).collect()
    }

    /// Lowest corner of the box containing `s`, unwrapped.
    pub fn corner_of(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(self.y_at(s)).map(|(x, y)| x - y).collect()
    }

    /// The background seen from `t`, i.e. `θ_t Y`.
    pub fn shifted(&self, t: &[f64]) -> Background {
        Background {
            n: self.n,
            y0: self.y_at(t),
        }
    }
}

fn check_tiling(measure: &MeasureWindow, bg: &Background) -> Result<()> {
    if bg.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            found: bg.dim(),
        });
    }
    if measure.side() % bg.n != 0 {
        return Err(Error::InvalidParameter(format!(
            "box side {} does not divide the window side {}",
            bg.n,
            measure.side()
        )));
    }
    Ok(())
}

/// `π_r = ψ_r^μ(Y_0) - Y_0` with `μ` the normalized restriction of `ξ` to
/// the box containing the origin.
pub fn pi_r(bg: &Background, measure: &MeasureWindow, r: f64, opts: PsiOptions) -> Result<Vec<f64>> {
    check_tiling(measure, bg)?;
    let corner: Vec<f64> = bg.y0.iter().map(|y| -y).collect();
    let cdf = build_cdf(measure, &corner, bg.n, opts.subdivide, opts.bits)?;
    let target = psi_shift(&cdf, r, &bg.y0);
    Ok(target.iter().zip(&bg.y0).map(|(a, b)| a - b).collect())
}

/// The allocation `τ_r(s) = s + π_r(θ_s(Y, ξ))`, with one step CDF per box.
#[derive(Clone, Debug)]
pub struct Allocation {
    bg: Background,
    r: f64,
    side: u32,
    tiles_per_axis: usize,
    /// `None` for boxes without mass; those map identically.
    tiles: Vec<Option<StepCdf>>,
}

impl Allocation {
    pub fn new(bg: Background, measure: &MeasureWindow, r: f64, opts: PsiOptions) -> Result<Self> {
        check_tiling(measure, &bg)?;
        if !measure.is_diffuse() {
            return Err(Error::AtomicInput);
        }
        let dim = measure.dim();
        let per = (measure.side() / bg.n) as usize;
        let nf = bg.n as f64;
        let mut tiles = Vec::with_capacity(per.pow(dim as u32));
        for idx in 0..per.pow(dim as u32) {
            let mut rem = idx;
            let corner: Vec<f64> = bg
                .y0
                .iter()
                .map(|y| {
                    let k = rem % per;
                    rem /= per;
                    k as f64 * nf - y
                })
                .collect();
            tiles.push(match build_cdf(measure, &corner, bg.n, opts.subdivide, opts.bits) {
                Ok(c) => Some(c),
                Err(Error::ZeroMassBox) => None,
                Err(e) => return Err(e),
            });
        }
        Ok(Allocation {
            bg,
            r,
            side: measure.side(),
            tiles_per_axis: per,
            tiles,
        })
    }

    pub fn background(&self) -> &Background {
        &self.bg
    }

    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        let nf = self.bg.n as f64;
        let w = self.side as f64;
        let local = self.bg.y_at(s);
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (x, y) in s.iter().zip(&self.bg.y0) {
            let k = ((x + y) / nf).floor() as i64;
            idx += k.rem_euclid(self.tiles_per_axis as i64) as usize * stride;
            stride *= self.tiles_per_axis;
        }
        match &self.tiles[idx] {
            None => s.iter().map(|x| wrap(*x, w)).collect(),
            Some(cdf) => {
                let target = psi_shift(cdf, self.r, &local);
                s.iter()
                    .zip(local.iter().zip(&target))
                    .map(|(x, (l, t))| wrap(x - l + t, w))
                    .collect()
            }
        }
    }
}

/// Eight test boxes covering the `n`-box with lowest corner `corner`.
pub fn tile_test_boxes(corner: &[f64], n: f64) -> Vec<Cuboid> {
    let dim = corner.len();
    let splits: Vec<usize> = match dim {
        1 => vec![8],
        2 => vec![4, 2],
        _ => {
            let mut v = vec![2, 2, 2];
            v.resize(dim, 1);
            v
        }
    };
    let count: usize = splits.iter().product();
    (0..count)
        .map(|mut idx| {
            let mut lo = Vec::with_capacity(dim);
            let mut hi = Vec::with_capacity(dim);
            for (c, &k) in corner.iter().zip(&splits) {
                let j = idx % k;
                idx /= k;
                let h = n / k as f64;
                lo.push(c + j as f64 * h);
                hi.push(c + (j + 1) as f64 * h);
            }
            Cuboid::new(lo, hi)
        })
        .collect()
}

/// One row of a preservation check.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxCheck {
    pub bounds: Cuboid,
    /// `ξ(B)`.
    pub original: f64,
    /// `ξ(τ ∈ B)`.
    pub pushed: f64,
}

impl BoxCheck {
    pub fn difference(&self) -> f64 {
        (self.pushed - self.original).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreservationReport {
    pub boxes: Vec<BoxCheck>,
    pub tolerance: f64,
}

impl PreservationReport {
    pub fn max_difference(&self) -> f64 {
        self.boxes.iter().map(BoxCheck::difference).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.boxes.iter().all(|b| b.difference() <= self.tolerance)
    }
}

/// Compare `ξ(τ ∈ B)` with `ξ(B)` for each test box.
///
/// Atoms are moved exactly. Each density cell is integrated with `nodes`
/// points placed at `φ⁻¹` of the midpoints of `nodes` equal subintervals of
/// `[0, 1)`, scaled into the cell.
pub fn check_preserving<F>(
    allocation: F,
    measure: &MeasureWindow,
    boxes: &[Cuboid],
    tol: f64,
    nodes: usize,
) -> PreservationReport
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let w = measure.side() as f64;
    let dim = measure.dim();
    let mut pushed = vec![0.0; boxes.len()];
    let mut deposit = |p: &[f64], m: f64| {
        for (acc, b) in pushed.iter_mut().zip(boxes) {
            if b.contains(p, w) {
                *acc += m;
            }
        }
    };
    for a in measure.atoms() {
        deposit(&allocation(&a.loc), a.mass);
    }
    if let Some(g) = measure.density() {
        let h = 1.0 / g.res() as f64;
        let offsets: Vec<Vec<f64>> = (0..nodes)
            .map(|m| decode_unit_f64((m as f64 + 0.5) / nodes as f64, dim, 24))
            .collect();
        let vol = g.cell_volume();
        for (idx, &v) in g.values().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let cell = g.cell_of_index(idx);
            let share = v * vol / nodes as f64;
            for off in &offsets {
                let p: Vec<f64> = cell.iter().zip(off).map(|(c, o)| (*c as f64 + o) * h).collect();
                deposit(&allocation(&p), share);
            }
        }
    }
    PreservationReport {
        boxes: boxes
            .iter()
            .zip(pushed)
            .map(|(b, p)| BoxCheck {
                bounds: b.clone(),
                original: measure.mass(b),
                pushed: p,
            })
            .collect(),
        tolerance: tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Grid;
    use rand::SeedableRng;

    fn bumpy(dim: usize, side: u32, res: u32) -> MeasureWindow {
        let m = (side * res) as usize;
        let vals: Vec<f64> = (0..m.pow(dim as u32))
            .map(|i| 0.3 + ((i * 29) % 13) as f64 / 4.0)
            .collect();
        MeasureWindow::from_density(Grid::new(dim, side, res, vals).unwrap()).unwrap()
    }

    #[test]
    fn uniform_line_gives_rotation() {
        let m = MeasureWindow::from_density(Grid::constant(1, 4, 8, 1.0)).unwrap();
        let opts = PsiOptions { subdivide: 0, bits: 20 };
        for y0 in [0.0, 0.25, 0.625] {
            let bg = Background::new(1, vec![y0]).unwrap();
            for r in [0.25, 0.5, 0.75] {
                let p = pi_r(&bg, &m, r, opts).unwrap();
                assert_eq!(p[0], (y0 + r) % 1.0 - y0, "y0={y0} r={r}");
            }
        }
    }

    #[test]
    fn zero_rotation_is_null_shift() {
        let m = bumpy(2, 4, 2);
        let bg = Background::new(2, vec![0.8125, 1.3125]).unwrap();
        let p = pi_r(&bg, &m, 0.0, PsiOptions::default()).unwrap();
        assert!(p.iter().all(|v| v.abs() < 1e-6), "{p:?}");
    }

    #[test]
    fn background_geometry() {
        let bg = Background::new(2, vec![0.5, 1.5]).unwrap();
        assert_eq!(bg.y_at(&[0.0, 0.0]), vec![0.5, 1.5]);
        assert_eq!(bg.corner_of(&[0.0, 0.0]), vec![-0.5, -1.5]);
        assert_eq!(bg.y_at(&[1.75, 0.25]), vec![0.25, 1.75]);
        assert_eq!(bg.shifted(&[1.75, 0.25]).y0(), &[0.25, 1.75]);
        assert!(Background::new(2, vec![2.0, 0.0]).is_err());
    }

    #[test]
    fn allocation_stays_in_its_box() {
        let m = bumpy(2, 4, 4);
        let bg = Background::new(2, vec![0.37, 1.11]).unwrap();
        let tau = Allocation::new(bg.clone(), &m, 0.43, PsiOptions::default()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let s: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 4.0).collect();
            let t = tau.apply(&s);
            let cs = bg.corner_of(&s);
            let ct = bg.corner_of(&t);
            for k in 0..2 {
                let d = (cs[k] - ct[k]).rem_euclid(4.0);
                assert!(d < 1e-9 || (4.0 - d) < 1e-9, "{s:?} -> {t:?}");
            }
        }
    }

    #[test]
    fn allocation_preserves_box_masses() {
        let m = bumpy(2, 4, 4);
        let bg = Background::new(2, vec![0.0, 0.0]).unwrap();
        let opts = PsiOptions { subdivide: 2, bits: 24 };
        let tau = Allocation::new(bg, &m, 0.37, opts).unwrap();
        let mut boxes = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                boxes.extend(tile_test_boxes(&[a as f64 * 2.0, b as f64 * 2.0], 2.0));
            }
        }
        let report = check_preserving(|s| tau.apply(s), &m, &boxes, 0.05, 1024);
        assert!(report.passed(), "max diff {}", report.max_difference());
        let identity = check_preserving(|s| s.to_vec(), &m, &boxes, 1e-9, 16);
        assert!(identity.passed());
    }

    #[test]
    fn translation_fails_the_check() {
        let m = bumpy(1, 8, 4);
        let boxes = tile_test_boxes(&[0.0], 4.0);
        let report = check_preserving(|s| vec![wrap(s[0] + 0.3, 8.0)], &m, &boxes, 0.05, 16);
        assert!(!report.passed());
    }

    #[test]
    fn mismatched_box_side_rejected() {
        let m = bumpy(1, 6, 1);
        let bg = Background::new(4, vec![0.0]).unwrap();
        assert!(matches!(pi_r(&bg, &m, 0.5, PsiOptions::default()), Err(Error::InvalidParameter(_))));
    }
}
