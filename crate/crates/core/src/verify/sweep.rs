use rayon::prelude::*;

use super::{point_rng, sample_directions, with_pool, Scenario};
use crate::error::Result;
use crate::family::{assemble_finsler, closed_form_k, AlphaBetaFields};
use crate::geometry::{bh_volume_factor, curvature_sample};

/// Curvature values at one admissible grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub b: f64,
    pub k_closed: f64,
    /// Mean of `K` over the sampled directions.
    pub k_numeric: f64,
    /// `max_y |S| / F`.
    pub s: f64,
    /// `max_y |K − mean K| / (1 + |mean K|)`.
    pub einstein_dev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: [f64; 2],
    /// `None` for points outside the domain or the admissible region.
    pub values: Option<SweepValues>,
}

fn sweep_point(sc: &Scenario, index: usize, x: [f64; 2]) -> Option<SweepValues> {
    let f = assemble_finsler(sc.params, sc.structure.clone());
    if !sc.structure.domain.contains(x) || !f.fields.admissible(x) {
        return None;
    }
    let eval = || -> Result<SweepValues> {
        let b = sc.structure.b.value(x)?;
        let k_closed = closed_form_k(&sc.params, &sc.structure, x)?;
        let vol = bh_volume_factor(&f, x)?;
        let dirs = sample_directions(sc.sampling.directions, &mut point_rng(sc.sampling.seed, index));
        let samples = dirs.iter().map(|y| curvature_sample(&f, x, *y, Some(&vol))).collect::<Result<Vec<_>>>()?;
        let n = samples.len() as f64;
        let k_numeric = samples.iter().map(|c| c.flag).sum::<f64>() / n;
        let s = samples.iter().map(|c| (c.s / c.f).abs()).fold(0.0, f64::max);
        let einstein_dev =
            samples.iter().map(|c| (c.flag - k_numeric).abs() / (1.0 + k_numeric.abs())).fold(0.0, f64::max);
        Ok(SweepValues { b, k_closed, k_numeric, s, einstein_dev })
    };
    eval().ok()
}

/// Curvature field of the scenario on an `nx × ny` grid over its domain box,
/// in grid order.
pub fn sweep(sc: &Scenario, nx: usize, ny: usize) -> Result<Vec<SweepRow>> {
    let grid = sc.structure.domain.grid(nx, ny);
    with_pool(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, x)| SweepRow { x: *x, values: sweep_point(sc, i, *x) })
            .collect()
    })
}

/// CSV with columns `x1,x2,B,K_closed,K_numeric,S,einstein_dev`; excluded
/// points carry `excluded` in every value column.
pub fn sweep_csv(rows: &[SweepRow]) -> Vec<u8> {
    use super::report::format_float as ff;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x1", "x2", "B", "K_closed", "K_numeric", "S", "einstein_dev"]).expect("in-memory write");
    for r in rows {
        let mut rec = vec![ff(r.x[0]), ff(r.x[1])];
        match r.values {
            Some(v) => rec.extend([v.b, v.k_closed, v.k_numeric, v.s, v.einstein_dev].map(ff)),
            None => rec.extend(std::iter::repeat("excluded".to_string()).take(5)),
        }
        w.write_record(&rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
