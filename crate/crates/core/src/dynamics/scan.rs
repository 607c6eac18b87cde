use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::VectorField;
use super::floquet::{FloquetData, Nondegeneracy};
use super::flow::flow_samples;
use super::integrator::Integrator;
use super::shooting::{shoot_closed_orbit, ClosedOrbit, ShootingOptions};
use super::DynamicsError;
use crate::geometry::{ChartId, HomotopyClass, ModelManifold, Point};
use crate::numeric::wrap_centered;

/// Image Hausdorff distance below which two orbits are the same.
pub const HAUSDORFF_MERGE: f64 = 1e-4;
/// Points per orbit image after arclength-uniform resampling.
pub const IMAGE_SAMPLES: usize = 256;

/// Parameter-space topology of an orbit family after the ℝ/ℤ quotient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "dim", rename_all = "kebab-case")]
pub enum FamilyTopology {
    Point,
    Circle,
    Torus(usize),
    /// Complex projective space CP^m.
    Projective(usize),
}

impl FamilyTopology {
    /// Sum of Betti numbers (with field coefficients) of the parameter space.
    pub fn betti_sum(&self) -> u64 {
        match self {
            FamilyTopology::Point => 1,
            FamilyTopology::Circle => 2,
            FamilyTopology::Torus(d) => 1u64 << d,
            FamilyTopology::Projective(m) => *m as u64 + 1,
        }
    }

    /// Topology tag of a d-dimensional family on the given model.
    pub fn for_model(model: &ModelManifold, d: usize) -> Self {
        let n = model.n();
        match (model.chart(), d) {
            (_, 0) => FamilyTopology::Point,
            (ChartId::Complex, d) if d == 2 * n - 2 => FamilyTopology::Projective(n - 1),
            (ChartId::Cosphere, d) if d == n - 1 => FamilyTopology::Torus(n),
            (_, 1) => FamilyTopology::Circle,
            (_, d) => FamilyTopology::Torus(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFamily {
    pub period: f64,
    pub class: HomotopyClass,
    pub dimension: usize,
    pub topology: FamilyTopology,
    pub nondegeneracy: Nondegeneracy,
    pub floquet: FloquetData,
    /// Number of converged orbits merged into this family.
    pub member_count: usize,
    /// Up to [`MAX_REPRESENTATIVES`] members, the first being the reference.
    pub members: Vec<ClosedOrbit>,
}

pub const MAX_REPRESENTATIVES: usize = 8;

impl OrbitFamily {
    pub fn representative(&self) -> &ClosedOrbit {
        &self.members[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Seed points per non-symmetric sample coordinate.
    pub seeds_per_dim: usize,
    /// Upper bound on the total number of seeds.
    pub max_seeds: usize,
    /// Near-return distance accepted as a shooting candidate.
    pub return_threshold: f64,
    pub candidates_per_seed: usize,
    pub shooting: ShootingOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            seeds_per_dim: 64,
            max_seeds: 4096,
            return_threshold: 0.5,
            candidates_per_seed: 2,
            shooting: ShootingOptions::default(),
        }
    }
}

impl ScanOptions {
    pub fn integrator(&self) -> &Integrator {
        &self.shooting.integrator
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub seeds: usize,
    pub seeds_per_dim: usize,
    pub failed_seeds: usize,
    pub candidates: usize,
    pub converged: usize,
    pub in_window: usize,
    pub families: usize,
    /// Fraction of shooting attempts that converged.
    pub convergence_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub families: Vec<OrbitFamily>,
    pub coverage: Coverage,
}

/// Seed grid over the sample coordinates along which the field is not
/// symmetric; symmetric coordinates stay at their lower end.
pub fn seed_points(field: &dyn VectorField, per_dim: usize, max_seeds: usize) -> (Vec<DVector<f64>>, usize) {
    let model = field.model();
    let coords = model.sample_coords();
    let sym = field.symmetric_coords();
    let active: Vec<usize> = (0..coords.len()).filter(|&i| !sym[i]).collect();
    let mut per = per_dim.max(1);
    while active.len() > 0 && per > 2 && per.pow(active.len() as u32) > max_seeds {
        per -= 1;
    }
    let axis = |i: usize| -> Vec<f64> {
        let c = &coords[i];
        let w = c.hi - c.lo;
        if c.periodic {
            (0..per).map(|j| c.lo + w * j as f64 / per as f64).collect()
        } else if model.is_cut() {
            (0..per).map(|j| c.lo + w * (j as f64 + 0.5) / per as f64).collect()
        } else if per == 1 {
            vec![c.lo]
        } else {
            (0..per).map(|j| c.lo + w * j as f64 / (per - 1) as f64).collect()
        }
    };
    let axes: Vec<Vec<f64>> = active.iter().map(|&i| axis(i)).collect();
    let total: usize = axes.iter().map(|a| a.len()).product();
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut s: Vec<f64> = coords.iter().map(|c| c.lo).collect();
        let mut rem = idx;
        for (a, &i) in axes.iter().zip(&active) {
            s[i] = a[rem % a.len()];
            rem /= a.len();
        }
        out.push(model.sample_point(&s));
    }
    (out, per)
}

/// Local minima of the class-matching return distance along the seed's
/// trajectory, as (time, distance) pairs sorted by distance.
fn near_returns(
    field: &dyn VectorField,
    x0: &DVector<f64>,
    class: &HomotopyClass,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<Vec<(f64, f64)>, DynamicsError> {
    let model = field.model();
    let t_lo = window.0 * 0.97;
    let t_end = window.1 * 1.03 + 1e-3;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let dist = |y: &DVector<f64>| -> f64 {
        let (w, res) = model.lattice_split(&(y - x0));
        if &model.class_of_winding(&w) == class {
            res.norm()
        } else {
            f64::INFINITY
        }
    };
    let active = matches!(model.chart(), ChartId::Complex | ChartId::Cosphere);
    opts.integrator().solve(
        |y| field.eval(y),
        x0,
        t_end,
        |y| {
            if active {
                model.project(y);
            }
            active
        },
        |s| {
            if s.t1() >= t_lo {
                for i in 1..=8 {
                    let t = s.t0 + s.h * i as f64 / 8.0;
                    if t >= t_lo {
                        samples.push((t, dist(&s.at(t))));
                    }
                }
            }
            true
        },
    )?;
    let mut out = Vec::new();
    for i in 0..samples.len() {
        let d = samples[i].1;
        if !(d < opts.return_threshold) {
            continue;
        }
        let left = i == 0 || samples[i - 1].1 >= d;
        let right = i + 1 == samples.len() || samples[i + 1].1 > d;
        if left && right {
            out.push(samples[i]);
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    out.truncate(opts.candidates_per_seed);
    Ok(out)
}

/// Arclength-uniform image of an orbit, periodic coordinates wrapped.
pub fn orbit_image(
    field: &dyn VectorField,
    orbit: &ClosedOrbit,
    points: usize,
    integ: &Integrator,
) -> Result<Vec<DVector<f64>>, DynamicsError> {
    let model = field.model();
    let fine = points * 4;
    let times: Vec<f64> = (0..=fine).map(|i| orbit.period * i as f64 / fine as f64).collect();
    let x = DVector::from_column_slice(&orbit.base);
    let traj = flow_samples(field, &x, &times, integ)?;
    let mut arc = vec![0.0; traj.len()];
    for i in 1..traj.len() {
        arc[i] = arc[i - 1] + (&traj[i] - &traj[i - 1]).norm();
    }
    let total = arc[arc.len() - 1];
    let mut out = Vec::with_capacity(points);
    let mut j = 0;
    for i in 0..points {
        let s = total * i as f64 / points as f64;
        while j + 1 < arc.len() - 1 && arc[j + 1] < s {
            j += 1;
        }
        let seg = arc[j + 1] - arc[j];
        let w = if seg > 0.0 { ((s - arc[j]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        let mut p = &traj[j] * (1.0 - w) + &traj[j + 1] * w;
        model.wrap_periodic(&mut p);
        out.push(p);
    }
    Ok(out)
}

/// Hausdorff distance between two closed sampled curves, measured from the
/// samples of each to the closed polyline through the other so that two
/// samplings of one orbit with shifted start points compare as equal.
pub fn hausdorff(model: &ModelManifold, a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let periods = model.coordinate_periods();
    let diff = |p: &DVector<f64>, q: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(
            p.len(),
            (0..p.len()).map(|i| match periods[i] {
                Some(per) => wrap_centered(p[i] - q[i], per),
                None => p[i] - q[i],
            }),
        )
    };
    let to_polyline = |p: &DVector<f64>, v: &[DVector<f64>]| -> f64 {
        if v.len() == 1 {
            return model.distance(p, &v[0]);
        }
        let mut best = f64::INFINITY;
        for j in 0..v.len() {
            let q = &v[j];
            let d = diff(&v[(j + 1) % v.len()], q);
            let w = diff(p, q);
            let dd = d.norm_squared();
            let t = if dd > 0.0 { (w.dot(&d) / dd).clamp(0.0, 1.0) } else { 0.0 };
            best = best.min((w - d * t).norm());
        }
        best
    };
    let directed =
        |u: &[DVector<f64>], v: &[DVector<f64>]| -> f64 { u.iter().map(|p| to_polyline(p, v)).fold(0.0, f64::max) };
    directed(a, b).max(directed(b, a))
}

/// Coordinates that stay constant along every orbit of a Morse–Bott torus
/// family in the catalog charts; equal values identify the family.
fn family_key(model: &ModelManifold, image: &[DVector<f64>]) -> Option<Vec<f64>> {
    let idx: Vec<usize> = match model.chart() {
        ChartId::Torus | ChartId::Cut => vec![2],
        ChartId::Cosphere => (model.n()..2 * model.n()).collect(),
        ChartId::Complex => return None,
    };
    let first = &image[0];
    let constant = image.iter().all(|p| idx.iter().all(|&i| model.distance_component(i, p[i], first[i]) < 1e-7));
    constant.then(|| idx.iter().map(|&i| first[i]).collect())
}

fn same_family(
    model: &ModelManifold,
    a: (&ClosedOrbit, &[DVector<f64>], &Option<Vec<f64>>),
    b: (&ClosedOrbit, &[DVector<f64>], &Option<Vec<f64>>),
) -> bool {
    let (oa, ia, ka) = a;
    let (ob, ib, kb) = b;
    if (oa.period - ob.period).abs() > 1e-6 * oa.period.max(1.0) || oa.class != ob.class {
        return false;
    }
    let (na, nb) = (oa.floquet.nullity, ob.floquet.nullity);
    if na > 0 && nb > 0 {
        if let (Some(x), Some(y)) = (ka, kb) {
            let idx: Vec<usize> = match model.chart() {
                ChartId::Cosphere => (model.n()..2 * model.n()).collect(),
                _ => vec![2],
            };
            let close = idx.iter().zip(x.iter().zip(y)).all(|(&i, (u, v))| model.distance_component(i, *u, *v) < 1e-6);
            if close {
                return true;
            }
        }
        if model.chart() == ChartId::Complex && na == 2 * model.n() - 2 && nb == na {
            return true;
        }
    }
    hausdorff(model, ia, ib) < HAUSDORFF_MERGE
}

/// Recurrence-seeded search for closed orbits in `class` with period in
/// `window`, deduplicated into families and sorted by period.
pub fn scan_orbits(
    field: &dyn VectorField,
    class: &HomotopyClass,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<ScanReport, DynamicsError> {
    let model = field.model();
    let class = model.validate_class(class)?;
    if !(window.0.is_finite() && window.1.is_finite() && window.0 <= window.1 && window.1 > 0.0) {
        return Err(DynamicsError::InvalidInput(format!("invalid period window [{}, {}]", window.0, window.1)));
    }
    let (seeds, per) = seed_points(field, opts.seeds_per_dim, opts.max_seeds);
    let slack = 1e-7 * window.1.max(1.0);
    let results: Vec<(bool, usize, Vec<ClosedOrbit>)> = seeds
        .par_iter()
        .map(|x0| {
            let cands = match near_returns(field, x0, &class, window, opts) {
                Ok(c) => c,
                Err(_) => return (false, 0, Vec::new()),
            };
            let p = Point { chart: model.chart(), coords: x0.clone() };
            let orbits =
                cands.iter().filter_map(|&(t, _)| shoot_closed_orbit(field, &p, t, &opts.shooting).ok()).collect();
            (true, cands.len(), orbits)
        })
        .collect();
    let mut coverage = Coverage { seeds: seeds.len(), seeds_per_dim: per, ..Coverage::default() };
    let mut orbits = Vec::new();
    for (ok, n_cand, os) in results {
        if !ok {
            coverage.failed_seeds += 1;
        }
        coverage.candidates += n_cand;
        coverage.converged += os.len();
        orbits.extend(os);
    }
    coverage.convergence_rate =
        if coverage.candidates == 0 { 1.0 } else { coverage.converged as f64 / coverage.candidates as f64 };
    orbits.retain(|o| o.class == class && o.period >= window.0 - slack && o.period <= window.1 + slack);
    coverage.in_window = orbits.len();
    orbits.sort_by(|a, b| a.period.total_cmp(&b.period).then_with(|| lex(&a.base, &b.base)));

    let images: Vec<Vec<DVector<f64>>> =
        orbits.par_iter().map(|o| orbit_image(field, o, IMAGE_SAMPLES, opts.integrator())).collect::<Result<_, _>>()?;
    let keys: Vec<Option<Vec<f64>>> = images.iter().map(|im| family_key(model, im)).collect();

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..orbits.len() {
        let home = groups.iter().position(|g| {
            let r = g[0];
            same_family(model, (&orbits[i], &images[i], &keys[i]), (&orbits[r], &images[r], &keys[r]))
        });
        match home {
            Some(g) => groups[g].push(i),
            None => groups.push(vec![i]),
        }
    }
    let mut families: Vec<OrbitFamily> = groups
        .iter()
        .enumerate()
        .map(|(fi, g)| {
            let rep = &orbits[g[0]];
            let d = rep.floquet.nullity;
            let consistent = g.iter().all(|&i| orbits[i].floquet.nullity == d);
            let nondegeneracy =
                if consistent { Nondegeneracy::classify(d, Some(d)) } else { Nondegeneracy::Degenerate { nullity: d } };
            let members: Vec<ClosedOrbit> = g
                .iter()
                .take(MAX_REPRESENTATIVES)
                .map(|&i| {
                    let mut o = orbits[i].clone();
                    o.family = Some(fi);
                    o.floquet = o.floquet.clone().with_family_dimension(d);
                    o
                })
                .collect();
            OrbitFamily {
                period: rep.period,
                class: rep.class.clone(),
                dimension: d,
                topology: FamilyTopology::for_model(model, d),
                nondegeneracy,
                floquet: rep.floquet.clone().with_family_dimension(d),
                member_count: g.len(),
                members,
            }
        })
        .collect();
    families.sort_by(|a, b| a.period.total_cmp(&b.period).then_with(|| lex(&a.members[0].base, &b.members[0].base)));
    for (i, f) in families.iter_mut().enumerate() {
        for m in &mut f.members {
            m.family = Some(i);
        }
    }
    coverage.families = families.len();
    Ok(ScanReport { families, coverage })
}

fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}
