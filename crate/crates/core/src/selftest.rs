//! Deterministic property checks: worked Voronoi, encoding and line-shift
//! examples plus exhaustive encoding round trips. No sampling.

use serde::{Deserialize, Serialize};

use crate::lattice::{CellDecomposition, Site, TieBreak};
use crate::measure::Grid;
use crate::preserving::{line_shift, phi_decode, phi_encode, BitPoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn to_key_value(&self) -> String {
        let mut out = format!("test = selftest\nverdict = {}\n", if self.passed() { "pass" } else { "fail" });
        for c in &self.checks {
            out.push_str(&format!(
                "{}.verdict = {}\n{}.detail = {}\n",
                c.name,
                if c.passed { "pass" } else { "fail" },
                c.name,
                c.detail
            ));
        }
        out
    }
}

fn cell_at_zero(points: &[i64], side: u32, tie: TieBreak) -> Vec<i64> {
    let pts: Vec<Site> = points.iter().map(|&p| vec![p]).collect();
    let dec = CellDecomposition::from_points(&pts, side, 1, tie);
    let mut cell: Vec<i64> = dec.cell_d.iter().map(|s| s[0].rem_euclid(side as i64)).collect();
    cell.sort_unstable();
    cell
}

/// Count of grid points in `{0, …, 2^bits - 1}^dim` where decoding the
/// encoding does not give the point back.
pub fn exhaustive_roundtrip_failures(dim: usize, bits: u32) -> usize {
    let per = 1u64 << bits;
    let total = per.pow(dim as u32);
    let mut bad = 0;
    let mut coords = vec![0u64; dim];
    for idx in 0..total {
        let mut k = idx;
        for c in coords.iter_mut() {
            *c = k % per;
            k /= per;
        }
        let p = BitPoint::new(coords.clone(), bits);
        let back = phi_decode(&phi_encode(&p), dim, bits);
        if back.point != p {
            bad += 1;
        }
    }
    bad
}

/// Run every check.
pub fn run() -> SelfTestReport {
    let mut rep = SelfTestReport::default();

    let cell = cell_at_zero(&[0, 3], 8, TieBreak::Covariant);
    rep.push("voronoi_cell", cell == vec![0, 1, 6, 7], format!("N={{0,3}} W=8 cell(0)={cell:?}"));

    let cell = cell_at_zero(&[0, 2], 4, TieBreak::Chart);
    rep.push("voronoi_tie", cell == vec![0, 1, 3], format!("N={{0,2}} W=4 cell(0)={cell:?}"));

    let a = phi_encode(&BitPoint::new(vec![128, 128], 8)).to_f64();
    rep.push("encode_half_half", a == 0.625, format!("phi(0.5,0.5)={a}"));
    let b = phi_encode(&BitPoint::new(vec![64, 0], 8)).to_f64();
    rep.push("encode_quarter_zero", b == 0.125, format!("phi(0.25,0)={b}"));

    let identity = (0..256u64).all(|c| phi_encode(&BitPoint::new(vec![c], 8)).to_f64() == c as f64 / 256.0);
    rep.push("encode_1d_identity", identity, "B=8".into());

    for (dim, bits) in [(1usize, 8u32), (2, 8), (3, 5)] {
        let bad = exhaustive_roundtrip_failures(dim, bits);
        rep.push(
            &format!("roundtrip_d{dim}_b{bits}"),
            bad == 0,
            format!("{bad} failures"),
        );
    }

    let z = Grid::constant(1, 8, 1, 2.0);
    let s = line_shift(&z, &[1.0], 3.0, 1);
    rep.push("line_shift_constant", matches!(s, Ok(v) if v == 1.5), format!("Z=2 r=3 s={s:?}"));

    let mut v = vec![3.0; 8];
    v[0] = 1.0;
    let s = Grid::new(1, 8, 1, v)
        .map_err(|e| e.to_string())
        .and_then(|z| line_shift(&z, &[1.0], 2.0, 1).map_err(|e| e.to_string()));
    rep.push(
        "line_shift_piecewise",
        matches!(s, Ok(v) if (v - 4.0 / 3.0).abs() <= 4.0 * f64::EPSILON),
        format!("Z=1 on [0,1), 3 after, r=2 s={s:?}"),
    );
    rep
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        let rep = super::run();
        for c in &rep.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
