//! Step distribution function of `φ` under a piecewise-uniform `μ` on a tile,
//! and the rotation `ψ_r^μ = φ⁻¹ ∘ F_μ⁻¹ ∘ (F_μ + r mod 1) ∘ φ`.
//!
//! `μ` is a finite union of boxes ("pieces") on which it is uniform: the
//! cells of the density grid, optionally subdivided `2^k` times per axis and
//! clipped to the tile. Pieces are ordered by `φ` of their centres. Inside a
//! piece the position is carried by `φ` of the local coordinates, which is
//! uniform on `[0,1)` when the position is, so `F_μ` is evaluated as
//! `F(piece⁻) + p_piece · φ(local)` and the rotation maps `μ` onto itself.

use crate::error::{Error, Result};
use crate::measure::{axis_segments, for_each_piece, MeasureWindow, Segment};

use super::phi::{decode_unit_f64, encode_point, encode_unit_f64, BitFraction};

/// `φ` values inside a piece are kept on a grid of `2^-RHO_BITS`. `φ⁻¹` is
/// discontinuous, so the inverse rounds to that grid to absorb the float
/// error of `F⁻¹(F(x))`.
const RHO_BITS: i32 = 40;

fn rho_down(x: f64) -> f64 {
    let scale = 2f64.powi(RHO_BITS);
    (x * scale).floor() / scale
}

fn rho_nearest(x: f64) -> f64 {
    let scale = 2f64.powi(RHO_BITS);
    ((x * scale).round() / scale).clamp(0.0, 1.0 - 1.0 / scale)
}

/// One uniform box of `μ` in tile-local coordinates.
#[derive(Clone, Debug)]
pub struct Piece {
    pub lo: Vec<f64>,
    pub ext: Vec<f64>,
    /// Probability under the normalized `μ`.
    pub prob: f64,
    pub key: BitFraction,
}

/// `F_μ` on the `φ`-images of the piece centres.
#[derive(Clone, Debug)]
pub struct StepCdf {
    n: f64,
    bits: u32,
    pieces: Vec<Piece>,
    cum: Vec<f64>,
    /// Per-axis piece boundaries (tile-local), for locating points.
    axis_bounds: Vec<Vec<f64>>,
    /// Axis-segment multi-index (flattened) to sorted piece position.
    slot: Vec<usize>,
}

impl StepCdf {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn tile_side(&self) -> f64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.axis_bounds.len()
    }

    /// `(φ(centre) as f64, F)` pairs in increasing order.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pieces.iter().zip(&self.cum).map(|(p, c)| (p.key.to_f64(), *c))
    }

    /// Largest piece probability: the resolution of the step function.
    pub fn subdivision_tolerance(&self) -> f64 {
        self.pieces.iter().map(|p| p.prob).fold(0.0, f64::max)
    }

    fn cum_before(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.cum[j - 1]
        }
    }

    /// Sorted position of the piece containing a tile-local point.
    pub fn locate(&self, s: &[f64]) -> usize {
        let mut flat = 0usize;
        let mut stride = 1usize;
        for (k, bounds) in self.axis_bounds.iter().enumerate() {
            // bounds holds starts plus the final end
            let segs = bounds.len() - 1;
            let i = bounds.partition_point(|b| *b <= s[k]).saturating_sub(1).min(segs - 1);
            flat += i * stride;
            stride *= segs;
        }
        self.slot[flat]
    }

    /// `F_μ(φ(s))` for a tile-local point.
    pub fn forward(&self, s: &[f64]) -> f64 {
        let j = self.locate(s);
        let p = &self.pieces[j];
        let local: Vec<f64> = s
            .iter()
            .zip(p.lo.iter().zip(&p.ext))
            .map(|(x, (lo, e))| ((x - lo) / e).clamp(0.0, 1.0 - f64::EPSILON))
            .collect();
        self.cum_before(j) + p.prob * rho_down(encode_unit_f64(&local, self.bits))
    }

    /// `φ⁻¹(F_μ⁻¹(v))`: the point whose forward value is `v`.
    pub fn inverse(&self, v: f64) -> Vec<f64> {
        let mut j = self.cum.partition_point(|c| *c <= v);
        if j >= self.pieces.len() {
            j = self.pieces.iter().rposition(|p| p.prob > 0.0).unwrap_or(0);
        }
        let p = &self.pieces[j];
        let rho = if p.prob > 0.0 {
            rho_nearest((v - self.cum_before(j)) / p.prob)
        } else {
            0.0
        };
        let local = decode_unit_f64(rho, p.lo.len(), self.bits);
        p.lo.iter()
            .zip(&p.ext)
            .zip(local)
            .map(|((lo, e), l)| lo + l * e)
            .collect()
    }
}

/// Build the step CDF of `μ = ξ(· + corner | [0, n)^d)`.
///
/// `subdivide` splits each grid cell `2^subdivide` times per axis; `bits`
/// is the per-coordinate precision of `φ`.
pub fn build_cdf(measure: &MeasureWindow, corner: &[f64], n: u32, subdivide: u32, bits: u32) -> Result<StepCdf> {
    if !measure.is_diffuse() {
        return Err(Error::AtomicInput);
    }
    let grid = measure.density().ok_or(Error::ZeroMassBox)?;
    let dim = measure.dim();
    let fine_res = measure.res() << subdivide;
    let nf = n as f64;
    let axes: Vec<Vec<Segment>> = corner
        .iter()
        .map(|&c| axis_segments(c, c + nf, measure.side(), fine_res))
        .collect();
    let axis_bounds: Vec<Vec<f64>> = axes
        .iter()
        .zip(corner)
        .map(|(segs, c)| {
            let mut b: Vec<f64> = segs.iter().map(|s| s.start - c).collect();
            b.push(nf);
            b
        })
        .collect();

    let mut raw: Vec<Piece> = Vec::new();
    let mut cell = vec![0usize; dim];
    for_each_piece(&axes, |segs| {
        let mut vol = 1.0;
        for (c, s) in cell.iter_mut().zip(segs) {
            *c = s.cell >> subdivide;
            vol *= s.len;
        }
        let lo: Vec<f64> = segs.iter().zip(corner).map(|(s, c)| s.start - c).collect();
        let ext: Vec<f64> = segs.iter().map(|s| s.len).collect();
        let centre: Vec<f64> = lo.iter().zip(&ext).map(|(l, e)| l + e / 2.0).collect();
        raw.push(Piece {
            key: encode_point(&centre, nf, bits),
            prob: grid.values()[grid.index(&cell)] * vol,
            lo,
            ext,
        });
    });
    let total: f64 = raw.iter().map(|p| p.prob).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMassBox);
    }
    // for_each_piece enumerates axis 0 fastest, matching `locate`
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[a].key.cmp(&raw[b].key).then(a.cmp(&b)));
    let mut slot = vec![0usize; raw.len()];
    for (pos, &orig) in order.iter().enumerate() {
        slot[orig] = pos;
    }
    let mut pieces: Vec<Piece> = Vec::with_capacity(raw.len());
    let mut raw: Vec<Option<Piece>> = raw.into_iter().map(Some).collect();
    for &orig in &order {
        let mut p = raw[orig].take().expect("each piece placed once");
        p.prob /= total;
        pieces.push(p);
    }
    let mut cum = Vec::with_capacity(pieces.len());
    let mut acc = 0.0;
    for p in &pieces {
        acc += p.prob;
        cum.push(acc);
    }
    // pin the top to exactly one so that `inverse` never runs off the end
    let top = acc;
    for c in cum.iter_mut().rev() {
        if *c != top {
            break;
        }
        *c = 1.0;
    }
    Ok(StepCdf {
        n: nf,
        bits,
        pieces,
        cum,
        axis_bounds,
        slot,
    })
}

/// `ψ_r^μ(s)` for a tile-local point `s ∈ [0, n)^d`.
pub fn psi_shift(cdf: &StepCdf, r: f64, s: &[f64]) -> Vec<f64> {
    let mut v = cdf.forward(s) + r;
    v -= v.floor();
    if v >= 1.0 {
        v = 0.0;
    }
    cdf.inverse(v)
}

/// Total-variation distance between `μ` and its image under `ψ_r^μ`, on the
/// piece partition. Each piece is integrated with `nodes` points whose
/// `φ`-local images are the midpoints of `nodes` equal subintervals.
pub fn psi_pushforward_tv(cdf: &StepCdf, r: f64, nodes: usize) -> f64 {
    let mut pushed = vec![0.0; cdf.pieces.len()];
    for piece in &cdf.pieces {
        if piece.prob == 0.0 {
            continue;
        }
        let w = piece.prob / nodes as f64;
        for m in 0..nodes {
            let rho = (m as f64 + 0.5) / nodes as f64;
            let local = decode_unit_f64(rho, piece.lo.len(), cdf.bits);
            let s: Vec<f64> = piece
                .lo
                .iter()
                .zip(&piece.ext)
                .zip(local)
                .map(|((lo, e), l)| lo + l * e)
                .collect();
            let target = psi_shift(cdf, r, &s);
            pushed[cdf.locate(&target)] += w;
        }
    }
    0.5 * pushed
        .iter()
        .zip(&cdf.pieces)
        .map(|(q, p)| (q - p.prob).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Grid;

    fn uniform(dim: usize, res: u32) -> MeasureWindow {
        MeasureWindow::from_density(Grid::constant(dim, 4, res, 1.0)).unwrap()
    }

    #[test]
    fn uniform_one_dimensional_cdf_is_identity() {
        let cdf = build_cdf(&uniform(1, 16), &[0.0], 1, 2, 32).unwrap();
        for (key, c) in cdf.entries() {
            // centres at (j + 1/2) h, cumulative (j + 1) h
            let h = 1.0 / 64.0;
            assert!((c - key - h / 2.0).abs() < 1e-12);
        }
        assert_eq!(cdf.subdivision_tolerance(), 1.0 / 64.0);
    }

    #[test]
    fn uniform_one_dimensional_psi_is_rotation() {
        let cdf = build_cdf(&uniform(1, 8), &[0.0], 1, 0, 20).unwrap();
        for i in 0..(1 << 12) {
            let s = i as f64 / 4096.0;
            for r in [0.0, 0.25, 0.5, 0.8125, 123.0 / 4096.0] {
                let expect = (s + r) % 1.0;
                assert_eq!(psi_shift(&cdf, r, &[s]), vec![expect], "s={s} r={r}");
            }
        }
    }

    #[test]
    fn zero_rotation_is_identity_on_support() {
        let mut vals = vec![0.0; 64];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = 0.5 + (i % 7) as f64;
        }
        let m = MeasureWindow::from_density(Grid::new(2, 4, 2, vals).unwrap()).unwrap();
        let cdf = build_cdf(&m, &[1.0, 2.0], 2, 1, 24).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let s = [a as f64 / 8.0 + 1.0 / 64.0, b as f64 / 8.0 + 3.0 / 128.0];
                let t = psi_shift(&cdf, 0.0, &s);
                assert!((t[0] - s[0]).abs() < 1e-6 && (t[1] - s[1]).abs() < 1e-6, "{s:?} -> {t:?}");
            }
        }
    }

    #[test]
    fn rotations_compose_back() {
        let mut vals = vec![0.0; 256];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = 1.0 + ((i * 37) % 11) as f64;
        }
        let m = MeasureWindow::from_density(Grid::new(2, 4, 4, vals).unwrap()).unwrap();
        let cdf = build_cdf(&m, &[0.3, 0.7], 1, 1, 48).unwrap();
        for r in [0.1, 0.5, 0.77] {
            for a in 0..10 {
                let s = [a as f64 / 10.0 + 0.013, 1.0 - a as f64 / 11.0 - 0.02];
                let back = psi_shift(&cdf, 1.0 - r, &psi_shift(&cdf, r, &s));
                assert!((back[0] - s[0]).abs() < 1e-4 && (back[1] - s[1]).abs() < 1e-4, "{s:?} -> {back:?}");
            }
        }
    }

    #[test]
    fn concentrated_cell_gives_near_step() {
        let mut vals = vec![1e-9; 16];
        vals[5] = 1.0;
        let m = MeasureWindow::from_density(Grid::new(1, 4, 4, vals).unwrap()).unwrap();
        let cdf = build_cdf(&m, &[0.0], 4, 0, 16).unwrap();
        let (jump_key, _) = cdf
            .entries()
            .zip(std::iter::once((0.0, 0.0)).chain(cdf.entries()))
            .map(|((k, c), (_, prev))| (k, c - prev))
            .fold((0.0, 0.0), |best, (k, p)| if p > best.1 { (k, p) } else { best });
        assert_eq!(jump_key, encode_point(&[1.375], 4.0, 16).to_f64());
        assert!(cdf.subdivision_tolerance() > 0.999);
    }

    #[test]
    fn atoms_are_rejected() {
        let m = MeasureWindow::from_atoms(1, 4, 1, vec![crate::measure::Atom::new(vec![0.5], 1.0)]).unwrap();
        assert!(matches!(build_cdf(&m, &[0.0], 1, 0, 8), Err(Error::AtomicInput)));
        let z = MeasureWindow::from_density(Grid::constant(1, 4, 1, 0.0)).unwrap();
        assert!(matches!(build_cdf(&z, &[0.0], 1, 0, 8), Err(Error::ZeroMassBox)));
    }
}
