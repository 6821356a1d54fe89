//! End-to-end run: geometry check, assembly, sweep, crossing forms, the
//! index identity and the bifurcation scan, collected in a [`ReportBundle`].

use std::time::Instant;

use crate::bifurcation::{self, BifurcationScan, ProbeSettings};
use crate::config::ProblemSpec;
use crate::crossing_form;
use crate::discretize::build_grid;
use crate::error::{Error, Result};
use crate::geometry::{self, boundary_sample, DomainSpec};
use crate::sweep::{self, ConjugatePoint, EigenTrace, Problem, SmaleReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Geometry,
    Assembly,
    Sweep,
    CrossingForms,
    Identity,
    Bifurcation,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Geometry => "geometry",
            Stage::Assembly => "assembly",
            Stage::Sweep => "sweep",
            Stage::CrossingForms => "crossing_forms",
            Stage::Identity => "identity",
            Stage::Bifurcation => "bifurcation",
        }
    }
}

/// The stage that stopped a run and why.
#[derive(Debug, Clone, PartialEq)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotEvaluated,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::NotEvaluated => "NOT EVALUATED",
        }
    }

    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub statement: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdicts {
    pub theorem1: Verdict,
    pub corollary1: Verdict,
    pub corollary2: Verdict,
    pub signed_identity: Verdict,
}

impl Verdicts {
    pub fn all(&self) -> [&Verdict; 4] {
        [&self.theorem1, &self.corollary1, &self.corollary2, &self.signed_identity]
    }
}

/// Verdicts computed from the reports alone.
pub fn verdicts(
    smale: Option<&SmaleReport>,
    crossings: &[ConjugatePoint],
    scan: Option<&BifurcationScan>,
) -> Verdicts {
    let not_evaluated = |why: &str| (Status::NotEvaluated, why.to_string());

    let (status, detail) = match scan {
        None => not_evaluated("bifurcation stage not run"),
        Some(s) => {
            let unmatched = s.points.iter().filter(|p| !p.matched(s.match_tol)).count();
            let spurious = s.midpoints.iter().filter(|m| !m.trivial).count();
            (
                Status::of(s.equivalence_holds()),
                format!(
                    "{} of {} conjugate points carry a branch; {} unmatched beyond {:e}; {} of {} midpoint probes nontrivial",
                    s.points.len(),
                    crossings.len(),
                    unmatched,
                    s.match_tol,
                    spurious,
                    s.midpoints.len()
                ),
            )
        }
    };
    let theorem1 = Verdict {
        name: "Theorem 1",
        statement: "the bifurcation points are precisely the conjugate points",
        status,
        detail,
    };

    let (status, detail) = match smale {
        None => not_evaluated("sweep did not complete"),
        Some(s) => {
            let ok = s.identity_holds && s.index_at_start == 0;
            (
                Status::of(ok),
                format!(
                    "M = {}, sum of m(r) = {} over {} isolated crossings, index at r_min = {}",
                    s.morse_index,
                    s.sum_m,
                    s.crossings.len(),
                    s.index_at_start
                ),
            )
        }
    };
    let corollary1 = Verdict {
        name: "Corollary 1",
        statement: "m(r) = 0 for almost all r and M = sum of m(r) over 0 < r < 1",
        status,
        detail,
    };

    let (status, detail) = match (smale, scan) {
        (None, _) => not_evaluated("sweep did not complete"),
        (Some(s), _) if s.morse_index == 0 => (Status::Pass, "M = 0: nothing to bound".to_string()),
        (Some(_), None) => not_evaluated("bifurcation stage not run"),
        (Some(_), Some(b)) => {
            let c = &b.corollary2;
            (
                Status::of(c.holds),
                format!(
                    "floor({} / {}) = {} <= {} distinct bifurcation points",
                    c.morse_index, c.max_multiplicity, c.bound, c.distinct_detected
                ),
            )
        }
    };
    let corollary2 = Verdict {
        name: "Corollary 2",
        statement: "there are at least floor(M / max m(r)) distinct bifurcation points",
        status,
        detail,
    };

    let (status, detail) = match smale {
        None => not_evaluated("sweep did not complete"),
        Some(s) => match s.signed_sum {
            None => not_evaluated("crossing forms not evaluated"),
            Some(sum) => {
                let definite = crossings.iter().all(|c| {
                    c.signature()
                        .is_some_and(|g| g.positive == 0 && g.zero == 0 && g.negative == c.multiplicity)
                });
                (
                    Status::of(s.signed_identity_holds == Some(true) && definite),
                    format!(
                        "sum of sgn Gamma = {}, M(r_min) - M(1) = {}, {} irregular, all forms negative definite: {}",
                        sum,
                        s.index_at_start as i64 - s.morse_index as i64,
                        s.irregular_crossings,
                        definite
                    ),
                )
            }
        },
    };
    let signed_identity = Verdict {
        name: "Spectral flow",
        statement: "every crossing form is negative definite and M(r_min) - M(1) = sum of sgn Gamma",
        status,
        detail,
    };

    Verdicts {
        theorem1,
        corollary1,
        corollary2,
        signed_identity,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetadata {
    pub domain: String,
    pub potential: String,
    pub dimension: usize,
    pub n: usize,
    pub nu_max: usize,
    pub spacing: f64,
    pub dof: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    pub k: usize,
    pub tol_zero: f64,
    pub tol_kernel: f64,
    pub refine_tol: f64,
    pub fd_delta: f64,
    pub boundary_points: usize,
    pub bifurcation_enabled: bool,
    pub tol_newton: f64,
    pub match_tol: f64,
    pub epsilon: f64,
    pub threads: usize,
    /// Wall time per completed stage, seconds.
    pub timings: Vec<(Stage, f64)>,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub spec: ProblemSpec,
    pub metadata: RunMetadata,
    pub trace: Option<EigenTrace>,
    pub crossings: Vec<ConjugatePoint>,
    pub smale: Option<SmaleReport>,
    pub bifurcation: Option<BifurcationScan>,
    pub verdicts: Verdicts,
    pub failure: Option<StageFailure>,
}

impl ReportBundle {
    pub fn is_partial(&self) -> bool {
        self.failure.is_some()
    }

    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, |f| f.exit_code)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub skip_bifurcation: bool,
}

fn describe_domain(d: &DomainSpec) -> String {
    match d {
        DomainSpec::Interval { a, b } => format!("interval ({a}, {b})"),
        DomainSpec::Disk { radius } => format!("disk of radius {radius}"),
    }
}

/// Run every stage in order. A failing stage stops the run; the bundle
/// then holds the completed stages and the failure.
pub fn run_pipeline(spec: &ProblemSpec, options: RunOptions) -> ReportBundle {
    let sw = &spec.sweep;
    let nl = &spec.nonlinearity;
    let dimension = spec.dimension();
    let mut bundle = ReportBundle {
        spec: spec.clone(),
        metadata: RunMetadata {
            domain: describe_domain(&spec.domain),
            potential: spec.potential.clone(),
            dimension,
            n: sw.n,
            nu_max: if dimension == 2 { sw.nu_max } else { 0 },
            spacing: f64::NAN,
            dof: 0,
            r_min: sw.r_min,
            r_max: sw.r_max,
            r_points: sw.r_points,
            k: sw.k,
            tol_zero: f64::NAN,
            tol_kernel: f64::NAN,
            refine_tol: sw.refine_tol,
            fd_delta: sw.fd_delta,
            boundary_points: if dimension == 2 { sw.boundary_points } else { 2 },
            bifurcation_enabled: nl.enabled && !options.skip_bifurcation,
            tol_newton: nl.tol_newton,
            match_tol: nl.match_tol,
            epsilon: f64::NAN,
            threads: rayon::current_num_threads(),
            timings: Vec::new(),
        },
        trace: None,
        crossings: Vec::new(),
        smale: None,
        bifurcation: None,
        verdicts: verdicts(None, &[], None),
        failure: None,
    };
    if let Err((stage, e)) = run_stages(spec, &mut bundle) {
        bundle.failure = Some(StageFailure {
            stage,
            message: e.to_string(),
            exit_code: e.exit_code(),
        });
    }
    bundle.verdicts = verdicts(
        bundle.smale.as_ref(),
        &bundle.crossings,
        bundle.bifurcation.as_ref(),
    );
    bundle
}

fn timed<T>(
    bundle: &mut ReportBundle,
    stage: Stage,
    f: impl FnOnce(&mut ReportBundle) -> Result<T>,
) -> std::result::Result<T, (Stage, Error)> {
    let start = Instant::now();
    let out = f(bundle).map_err(|e| (stage, e))?;
    bundle.metadata.timings.push((stage, start.elapsed().as_secs_f64()));
    Ok(out)
}

fn run_stages(spec: &ProblemSpec, bundle: &mut ReportBundle) -> std::result::Result<(), (Stage, Error)> {
    let sw = spec.sweep.clone();
    let domain = timed(bundle, Stage::Geometry, |_| {
        let d = geometry::make_domain(&spec.domain)?;
        geometry::check_star_shaped(&d)?;
        Ok(d)
    })?;

    let problem = timed(bundle, Stage::Assembly, |b| {
        let nu_max = if domain.dimension() == 2 { sw.nu_max } else { 0 };
        let grid = build_grid(&domain, sw.n, nu_max)?;
        let problem = Problem::new(grid, spec.potential_field()?, sw.tol_zero)?;
        b.metadata.spacing = problem.grid.spacing();
        b.metadata.dof = problem.grid.dof();
        b.metadata.tol_zero = problem.tol_zero;
        b.metadata.tol_kernel = problem.tol_kernel;
        Ok(problem)
    })?;

    timed(bundle, Stage::Sweep, |b| {
        let r_grid = sweep::uniform_r_grid(sw.r_min, sw.r_max, sw.r_points);
        let trace = sweep::sweep_eigenvalues(&problem, &r_grid, sw.k)?;
        b.crossings = sweep::locate_conjugate_points(&problem, &trace, sw.refine_tol, sw.max_bisections)?;
        b.trace = Some(trace);
        Ok(())
    })?;

    timed(bundle, Stage::CrossingForms, |b| {
        let resolution = if domain.dimension() == 2 { sw.boundary_points } else { 2 };
        let bs = boundary_sample(&domain, resolution);
        crossing_form::evaluate_all(&problem, &bs, &mut b.crossings, sw.fd_delta)
    })?;

    timed(bundle, Stage::Identity, |b| {
        let trace = b.trace.as_ref().expect("sweep completed");
        b.smale = Some(sweep::smale_check(trace, &b.crossings));
        Ok(())
    })?;

    if bundle.metadata.bifurcation_enabled {
        timed(bundle, Stage::Bifurcation, |b| {
            let gs = spec.nonlinearity_spec()?;
            let mut settings = ProbeSettings::for_grid(&problem.grid);
            if let Some(e) = spec.nonlinearity.epsilon {
                settings.epsilon = e;
            }
            settings.delta_max = spec.nonlinearity.delta_max;
            settings.tol_newton = spec.nonlinearity.tol_newton;
            settings.max_iter = spec.nonlinearity.max_iter;
            settings.match_tol = spec.nonlinearity.match_tol;
            b.metadata.epsilon = settings.epsilon;
            let morse = b.smale.as_ref().map_or(0, |s| s.morse_index);
            b.bifurcation = Some(bifurcation::bifurcation_scan(
                &problem,
                &gs,
                &b.crossings,
                sw.r_min,
                morse,
                &settings,
            )?);
            Ok(())
        })?;
    }
    Ok(())
}
