//! Line shifts: move along a direction `u` until the density field has
//! integrated to `r`.

use crate::error::{Error, Result};
use crate::measure::Grid;

/// `s_r(Z)` measured from `origin`: the distance `s` along `u` with
/// `∫_0^s Z(origin + x u) dx = r`. The ray may wrap around the torus for at
/// most `laps` lengths `W`.
pub fn line_shift_from(z: &Grid, origin: &[f64], u: &[f64], r: f64, laps: u32) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("line-shift mass must be positive, got {r}")));
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("zero direction".into()));
    }
    let u: Vec<f64> = u.iter().map(|v| v / norm).collect();
    let g = z.res() as f64;
    let m = z.cells_per_axis() as i64;
    let max_len = laps as f64 * z.side() as f64;

    let dim = z.dim();
    let mut cell: Vec<i64> = origin.iter().map(|x| (x * g).floor() as i64).collect();
    let mut step = vec![0i64; dim];
    let mut t_max = vec![f64::INFINITY; dim];
    let mut t_delta = vec![f64::INFINITY; dim];
    for k in 0..dim {
        if u[k] > 0.0 {
            step[k] = 1;
            t_max[k] = ((cell[k] + 1) as f64 / g - origin[k]) / u[k];
            t_delta[k] = 1.0 / (g * u[k]);
        } else if u[k] < 0.0 {
            step[k] = -1;
            t_max[k] = (cell[k] as f64 / g - origin[k]) / u[k];
            t_delta[k] = -1.0 / (g * u[k]);
        }
    }

    let mut t = 0.0;
    let mut acc = 0.0;
    let mut idx = vec![0usize; dim];
    loop {
        let (axis, exit) = t_max
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (k, &v)| if v < b.1 { (k, v) } else { b });
        let exit = exit.min(max_len);
        for (i, c) in idx.iter_mut().zip(&cell) {
            *i = c.rem_euclid(m) as usize;
        }
        let value = z.values()[z.index(&idx)];
        let gain = value * (exit - t);
        if value > 0.0 && acc + gain >= r {
            return Ok(t + (r - acc) / value);
        }
        acc += gain;
        t = exit;
        if t >= max_len {
            return Err(Error::InsufficientMass {
                available: acc,
                requested: r,
            });
        }
        cell[axis] += step[axis];
        t_max[axis] += t_delta[axis];
    }
}

/// `s_r(Z)` from the origin.
pub fn line_shift(z: &Grid, u: &[f64], r: f64, laps: u32) -> Result<f64> {
    line_shift_from(z, &vec![0.0; z.dim()], u, r, laps)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force Riemann integral along the ray.
    fn integral(z: &Grid, origin: &[f64], u: &[f64], s: f64) -> f64 {
        let steps = 200_000;
        let h = s / steps as f64;
        (0..steps)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                let p: Vec<f64> = origin.iter().zip(u).map(|(o, d)| o + x * d).collect();
                z.value_at(&p) * h
            })
            .sum()
    }

    #[test]
    fn constant_density() {
        let z = Grid::constant(1, 8, 1, 2.0);
        assert_eq!(line_shift(&z, &[1.0], 3.0, 1).unwrap(), 1.5);
    }

    #[test]
    fn piecewise_density() {
        let mut v = vec![3.0; 8];
        v[0] = 1.0;
        let z = Grid::new(1, 8, 1, v).unwrap();
        let s = line_shift(&z, &[1.0], 2.0, 1).unwrap();
        assert!((s - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn insufficient_mass_and_laps() {
        let z = Grid::constant(1, 4, 2, 0.5);
        assert!(matches!(line_shift(&z, &[1.0], 3.0, 1), Err(Error::InsufficientMass { .. })));
        assert!((line_shift(&z, &[1.0], 3.0, 2).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_rays_match_riemann_sums() {
        let vals: Vec<f64> = (0..256).map(|i| 0.2 + ((i * 13) % 17) as f64 / 5.0).collect();
        let z = Grid::new(2, 8, 2, vals).unwrap();
        let origin = [0.13, 0.41];
        for u in [[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96], [0.0, -1.0]] {
            for r in [0.5, 1.0, 2.0, 5.0] {
                let s = line_shift_from(&z, &origin, &u, r, 3).unwrap();
                assert!((integral(&z, &origin, &u, s) - r).abs() < 2e-3, "u={u:?} r={r}");
            }
        }
    }

    #[test]
    fn monotone_in_r() {
        let vals: Vec<f64> = (0..32).map(|i| 0.5 + (i % 5) as f64).collect();
        let z = Grid::new(1, 8, 4, vals).unwrap();
        let mut prev = 0.0;
        for i in 1..100 {
            let s = line_shift(&z, &[1.0], i as f64 * 0.1, 1).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }
}
