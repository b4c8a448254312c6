//! Line-oriented text format for rooted ensembles.
//!
//! ```text
//! palm-ensemble 1
//! sample
//! weight <w> <density factor or ->
//! root <r_1> … <r_d>
//! measure <dim> <side> <res>
//! atom <mass> <x_1> … <x_d>          (any number)
//! density <v_0> <v_1> …              (optional, grid order)
//! marks <dim> <side> <res> <v_0> …
//! mark_point <mark> <x_1> … <x_d>    (any number)
//! end
//! ```
//!
//! Floats use the shortest representation that reads back to the same
//! bits, so a write/read cycle is exact. Blank lines and `#` comments are
//! skipped.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::measure::{Atom, Grid, MarkField, MarkedPoint, MeasureWindow, WeightedSample};
use crate::preserving::RootedSample;

const MAGIC: &str = "palm-ensemble 1";

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// Write one rooted sample.
pub fn write_sample<W: Write>(out: &mut W, s: &RootedSample) -> Result<()> {
    let ws = &s.sample;
    let m = &ws.measure;
    writeln!(out, "sample")?;
    match ws.density_factor() {
        Some(z) => writeln!(out, "weight {:?} {:?}", ws.base_weight(), z)?,
        None => writeln!(out, "weight {:?} -", ws.base_weight())?,
    }
    writeln!(out, "root {}", join(&s.root))?;
    writeln!(out, "measure {} {} {}", m.dim(), m.side(), m.res())?;
    for a in m.atoms() {
        writeln!(out, "atom {:?} {}", a.mass, join(&a.loc))?;
    }
    if let Some(g) = m.density() {
        writeln!(out, "density {}", join(g.values()))?;
    }
    let g = ws.marks.grid();
    writeln!(out, "marks {} {} {} {}", g.dim(), g.side(), g.res(), join(g.values()))?;
    for p in ws.marks.points() {
        writeln!(out, "mark_point {:?} {}", p.mark, join(&p.loc))?;
    }
    writeln!(out, "end")?;
    Ok(())
}

pub fn write_ensemble<W: Write>(out: &mut W, ensemble: &[RootedSample]) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    for s in ensemble {
        write_sample(out, s)?;
    }
    Ok(())
}

#[derive(Default)]
struct Partial {
    weight: Option<(f64, Option<f64>)>,
    root: Option<Vec<f64>>,
    measure: Option<(usize, u32, u32)>,
    atoms: Vec<Atom>,
    density: Option<Vec<f64>>,
    marks: Option<Grid>,
    points: Vec<MarkedPoint>,
}

struct Fields<'a> {
    line: usize,
    it: std::str::SplitWhitespace<'a>,
}

impl<'a> Fields<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_str(&mut self, what: &str) -> Result<&'a str> {
        let line = self.line;
        self.it.next().ok_or_else(|| Error::Parse {
            line,
            msg: format!("missing {what}"),
        })
    }

    fn float(&mut self, what: &str) -> Result<f64> {
        let tok = self.next_str(what)?;
        tok.parse().map_err(|_| self.err(format!("bad {what} '{tok}'")))
    }

    fn uint<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self.next_str(what)?;
        tok.parse().map_err(|_| self.err(format!("bad {what} '{tok}'")))
    }

    fn floats(&mut self, what: &str) -> Result<Vec<f64>> {
        let rest: Vec<&str> = self.it.by_ref().collect();
        rest.iter()
            .map(|t| t.parse().map_err(|_| self.err(format!("bad {what} '{t}'"))))
            .collect()
    }
}

fn finish(p: Partial, line: usize) -> Result<RootedSample> {
    let err = |msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let (dim, side, res) = p.measure.ok_or_else(|| err("sample without measure line"))?;
    let mut m = MeasureWindow::from_atoms(dim, side, res, p.atoms).map_err(|e| err(&e.to_string()))?;
    if let Some(v) = p.density {
        let g = Grid::new(dim, side, res, v).map_err(|e| err(&e.to_string()))?;
        m.set_density(g).map_err(|e| err(&e.to_string()))?;
    }
    let marks = MarkField::new(p.marks.ok_or_else(|| err("sample without marks line"))?).with_points(p.points);
    let (w, factor) = p.weight.ok_or_else(|| err("sample without weight line"))?;
    let mut sample = WeightedSample::new(marks, m, w).map_err(|e| err(&e.to_string()))?;
    if let Some(z) = factor {
        sample = sample.multiply_density(z).map_err(|e| err(&e.to_string()))?;
    }
    let root = p.root.unwrap_or_else(|| vec![0.0; dim]);
    if root.len() != dim {
        return Err(err("root has the wrong dimension"));
    }
    Ok(RootedSample { sample, root })
}

/// Parse an ensemble; errors carry the 1-based line number.
pub fn read_ensemble<R: BufRead>(input: R) -> Result<Vec<RootedSample>> {
    let mut out = Vec::new();
    let mut current: Option<Partial> = None;
    let mut seen_magic = false;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if !seen_magic {
            if text != MAGIC {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected '{MAGIC}'"),
                });
            }
            seen_magic = true;
            continue;
        }
        let mut f = Fields {
            line: line_no,
            it: text.split_whitespace(),
        };
        let key = f.next_str("keyword")?;
        if key == "sample" {
            if current.is_some() {
                return Err(f.err("'sample' before 'end'"));
            }
            current = Some(Partial::default());
            continue;
        }
        let Some(p) = current.as_mut() else {
            return Err(f.err(format!("'{key}' outside a sample block")));
        };
        match key {
            "weight" => {
                let w = f.float("weight")?;
                let z = match f.next_str("density factor")? {
                    "-" => None,
                    t => Some(t.parse().map_err(|_| f.err(format!("bad density factor '{t}'")))?),
                };
                p.weight = Some((w, z));
            }
            "root" => p.root = Some(f.floats("root coordinate")?),
            "measure" => p.measure = Some((f.uint("dim")?, f.uint("side")?, f.uint("res")?)),
            "atom" => {
                let mass = f.float("atom mass")?;
                p.atoms.push(Atom::new(f.floats("atom coordinate")?, mass));
            }
            "density" => p.density = Some(f.floats("density value")?),
            "marks" => {
                let (dim, side, res) = (f.uint("dim")?, f.uint("side")?, f.uint("res")?);
                let v = f.floats("mark value")?;
                p.marks = Some(Grid::new(dim, side, res, v).map_err(|e| f.err(e.to_string()))?);
            }
            "mark_point" => {
                let mark = f.float("mark")?;
                p.points.push(MarkedPoint {
                    loc: f.floats("mark point coordinate")?,
                    mark,
                });
            }
            "end" => {
                let p = current.take().expect("checked above");
                out.push(finish(p, line_no)?);
            }
            other => return Err(f.err(format!("unknown keyword '{other}'"))),
        }
    }
    if current.is_some() {
        return Err(Error::Parse {
            line: 0,
            msg: "unterminated sample block".into(),
        });
    }
    if !seen_magic {
        return Err(Error::Parse {
            line: 0,
            msg: "empty input".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_ensemble, GeneratorKind, GeneratorSpec};
    use crate::palm::density_palm;
    use crate::rng::stream;

    fn roundtrip(ens: &[RootedSample]) -> Vec<RootedSample> {
        let mut buf = Vec::new();
        write_ensemble(&mut buf, ens).unwrap();
        read_ensemble(buf.as_slice()).unwrap()
    }

    #[test]
    fn write_then_read_is_exact() {
        for kind in [GeneratorKind::Poisson, GeneratorKind::ShotNoiseDensity] {
            let spec = GeneratorSpec::new(kind, 1.0, 2, 4, 2);
            let ens: Vec<RootedSample> = generate_ensemble(&spec, 5, 3)
                .unwrap()
                .into_iter()
                .enumerate()
                .map(|(i, s)| RootedSample::jittered(s, &mut stream(9, i as u64)))
                .collect();
            assert_eq!(roundtrip(&ens), ens);
        }
    }

    #[test]
    fn density_factor_survives() {
        let spec = GeneratorSpec::new(GeneratorKind::ShotNoiseDensity, 1.0, 1, 4, 2);
        let s = density_palm(&generate_ensemble(&spec, 1, 0).unwrap()[0]).unwrap();
        let back = roundtrip(&[RootedSample::exact(s.clone())]);
        assert_eq!(back[0].sample, s);
    }

    #[test]
    fn errors_name_the_line() {
        let text = "palm-ensemble 1\nsample\nweight x -\n";
        match read_ensemble(text.as_bytes()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("weight"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        assert!(read_ensemble("nonsense\n".as_bytes()).is_err());
        assert!(read_ensemble("palm-ensemble 1\nsample\n".as_bytes()).is_err());
    }
}
