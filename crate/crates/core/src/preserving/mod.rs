//! Preserving shifts: line shifts through a density field, and tile-wise
//! shifts built from a space-filling bijection and a rotated CDF.

pub mod cdf;
pub mod example;
pub mod line;
pub mod phi;

use rand::Rng;

use crate::error::Result;
use crate::measure::WeightedSample;

pub use cdf::{build_cdf, psi_pushforward_tv, psi_shift, Piece, StepCdf};
pub use example::{
    check_preserving, pi_r, tile_test_boxes, Allocation, Background, BoxCheck, PreservationReport, PsiOptions,
};
pub use line::{line_shift, line_shift_from};
pub use phi::{
    decode_point, decode_unit_f64, encode_point, encode_unit_f64, phi_decode, phi_encode, BitFraction, BitPoint,
    Decoded,
};

/// A sample whose origin sits at `root` inside the grid cell at zero.
///
/// Grids only shift by whole cells, so continuous shifts of a gridded
/// measure are tracked by carrying the sub-cell position of the origin.
/// Conditional on the cell values that position is uniform in the cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RootedSample {
    pub sample: WeightedSample,
    pub root: Vec<f64>,
}

impl RootedSample {
    /// Root at the exact origin.
    pub fn exact(sample: WeightedSample) -> Self {
        let root = vec![0.0; sample.dim()];
        RootedSample { sample, root }
    }

    /// Root drawn uniformly in the origin cell when the measure has a grid.
    pub fn jittered<R: Rng + ?Sized>(sample: WeightedSample, rng: &mut R) -> Self {
        match sample.measure.density() {
            Some(g) => {
                let h = 1.0 / g.res() as f64;
                let root = (0..sample.dim()).map(|_| rng.random::<f64>() * h).collect();
                RootedSample { sample, root }
            }
            None => RootedSample::exact(sample),
        }
    }

    /// Move the origin to `landing`, given in the current chart.
    pub fn relocate(&self, landing: &[f64]) -> RootedSample {
        match self.sample.measure.density() {
            Some(g) => {
                let res = g.res() as f64;
                let h = 1.0 / res;
                let cells: Vec<f64> = landing.iter().map(|x| (x * res).floor() * h).collect();
                let root = landing
                    .iter()
                    .zip(&cells)
                    .map(|(x, c)| (x - c).clamp(0.0, h * (1.0 - f64::EPSILON)))
                    .collect();
                RootedSample {
                    sample: self.sample.shifted(&cells),
                    root,
                }
            }
            None => RootedSample::exact(self.sample.shifted(landing)),
        }
    }
}

/// Apply the line shift `s_r(Z) u` at the root of a density sample.
pub fn line_shift_sample(rooted: &RootedSample, u: &[f64], r: f64, laps: u32) -> Result<RootedSample> {
    let z = rooted
        .sample
        .measure
        .density()
        .ok_or(crate::error::Error::MissingDensity)?;
    let s = line_shift_from(z, &rooted.root, u, r, laps)?;
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    let landing: Vec<f64> = rooted.root.iter().zip(u).map(|(o, d)| o + s * d / norm).collect();
    Ok(rooted.relocate(&landing))
}

/// Apply `π_r` jointly to the background and a diffuse rooted sample.
/// Returns the shifted sample and the background seen from the new origin.
pub fn example1_shift_sample(
    rooted: &RootedSample,
    bg: &Background,
    r: f64,
    opts: PsiOptions,
) -> Result<(RootedSample, Background)> {
    // the measure in root coordinates has its tile corner at root - Y0
    let corner: Vec<f64> = rooted.root.iter().zip(bg.y0()).map(|(u, y)| u - y).collect();
    let measure = &rooted.sample.measure;
    let cdf = build_cdf(measure, &corner, bg.n(), opts.subdivide, opts.bits)?;
    let target = psi_shift(&cdf, r, bg.y0());
    let landing: Vec<f64> = corner.iter().zip(&target).map(|(c, t)| c + t).collect();
    let new_bg = Background::new(bg.n(), target)?;
    Ok((rooted.relocate(&landing), new_bg))
}
