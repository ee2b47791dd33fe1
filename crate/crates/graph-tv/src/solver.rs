//! The active-set solver.
//!
//! The solver drives each edge coefficient `c_{k,l}` from 0 towards
//! `sign(f_l - f_k)`, maintaining `f` as the exact minimizer of the working
//! objective `Q(f; c)` throughout. Increasing the penalty on one edge pulls
//! the two incident regions together in value; the motion is advanced in
//! steps, each ending at the first structural event:
//!
//! * no change - the coefficient reaches its target before anything else,
//! * merge - the two regions meet in value and fuse,
//! * amalgamate - a region meets a neighbouring region's value on the way,
//! * split - a region's internal stationarity boundary is reached and an
//!   active edge must leave the forest.
//!
//! Equal fitted values are produced by assignment, never by floating-point
//! comparison of computed values, so region equality is exact.

use crate::error::SolveError;
use crate::forest::ActiveForest;
use crate::graph::Graph;
use crate::oracle::{self, CertificateReport};
use crate::schedule::EdgeSchedule;

/// Absolute tolerance for event-feasibility comparisons on step lengths.
pub const STEP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    NoChange,
    Merge,
    /// A neighbouring region was absorbed across `boundary_edge`.
    Amalgamate { boundary_edge: usize },
    /// `active_edge` left the forest; `swap_sign` records a coefficient
    /// sign flip needed to keep the gradient-sign constraint.
    Split { active_edge: usize, swap_sign: bool },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::NoChange => "no-change",
            EventKind::Merge => "merge",
            EventKind::Amalgamate { .. } => "amalgamate",
            EventKind::Split { .. } => "split",
        }
    }
}

/// One solver event, as recorded in the optional trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceRecord {
    /// Ordinal of the edge iteration this event belongs to.
    pub iter: usize,
    /// The edge whose constraint is being satisfied.
    pub edge: usize,
    pub kind: EventKind,
    pub df_k: f64,
    pub df_l: f64,
    pub dc: f64,
    /// Working objective after applying the event.
    pub q_working: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Record a [`TraceRecord`] per event (needs one objective evaluation
    /// per event, so leave off for timing runs).
    pub trace: bool,
    /// Event budget per edge iteration, as a multiple of `2|E| + 1`.
    pub event_limit_factor: usize,
    /// Verify the optimality certificate at termination.
    pub check_certificate: bool,
    pub certificate_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            trace: false,
            event_limit_factor: 10,
            check_certificate: true,
            certificate_tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub fit: Vec<f64>,
    /// Final edge coefficients, in `[-1, 1]` per edge.
    pub c: Vec<f64>,
    pub active_edges: Vec<usize>,
    pub forest: ActiveForest,
    pub trace: Vec<TraceRecord>,
    pub total_events: usize,
    pub max_events_per_iteration: usize,
    /// Largest region observed at any point during the run.
    pub max_region_seen: usize,
    /// Certificate verdicts, when requested in the options.
    pub report: Option<CertificateReport>,
}

/// Minimize `Q(f)` over the graph, satisfying edge constraints in schedule
/// order.
pub fn solve(
    g: &Graph,
    schedule: &EdgeSchedule,
    opts: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    let mut solver = Solver::new(g, opts.clone())?;
    solver.run(schedule)?;
    solver.finish()
}

/// Incremental interface: drives one edge iteration at a time, so callers
/// can instrument region sizes or interleave schedules.
pub struct Solver<'g> {
    g: &'g Graph,
    opts: SolveOptions,
    f: Vec<f64>,
    c: Vec<f64>,
    forest: ActiveForest,
    satisfied: Vec<bool>,
    trace: Vec<TraceRecord>,
    iter_count: usize,
    total_events: usize,
    max_events_per_iteration: usize,
    max_region_seen: usize,
}

/// Traversal of one region rooted at a vertex, with subtree aggregates for
/// every active edge of the region.
struct RegionScan {
    members: Vec<usize>,
    /// Active edge joining `members[i]` to its parent (root: `usize::MAX`).
    parent_edge: Vec<usize>,
    /// Subtree sums of `u` and `m`, aligned with `members`.
    sub_u: Vec<f64>,
    sub_m: Vec<f64>,
    u: f64,
}

#[derive(Clone, Copy, Debug)]
enum Action {
    NoChange,
    Merge { target: f64 },
    /// Moving side jumps onto the neighbour's value `target` and absorbs it.
    Amalgamate {
        boundary_edge: usize,
        target: f64,
        moving_is_tail_side: bool,
    },
    Split { active_edge: usize, swap_sign: bool },
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    df_k: f64,
    df_l: f64,
    metric: f64,
    priority: u8,
    tie_edge: usize,
    action: Action,
}

impl<'g> Solver<'g> {
    pub fn new(g: &'g Graph, opts: SolveOptions) -> Result<Self, SolveError> {
        if !g.is_finite() {
            return Err(SolveError::NonFiniteData);
        }
        Ok(Solver {
            g,
            opts,
            // With c = 0 the working objective is pure least squares, so the
            // data itself is the starting minimizer.
            f: g.data().to_vec(),
            c: vec![0.0; g.num_edges()],
            forest: ActiveForest::new(g),
            satisfied: vec![false; g.num_edges()],
            trace: Vec::new(),
            iter_count: 0,
            total_events: 0,
            max_events_per_iteration: 0,
            max_region_seen: 1,
        })
    }

    pub fn fit(&self) -> &[f64] {
        &self.f
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn forest(&self) -> &ActiveForest {
        &self.forest
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn max_region_seen(&self) -> usize {
        self.max_region_seen
    }

    pub fn reset_max_region_seen(&mut self) {
        self.max_region_seen = 1;
    }

    /// Does the stopping-rule constraint currently hold at `edge`?
    pub fn edge_constraint_holds(&self, edge: usize) -> bool {
        let e = self.g.edges()[edge];
        let (fi, fj) = (self.f[e.tail], self.f[e.head]);
        fi == fj || self.c[edge] == sign(fj - fi)
    }

    /// Run the full schedule, then re-iterate any edge whose constraint was
    /// disturbed afterwards (a previously equal-valued pair can separate
    /// again, and a split can leave a fractional coefficient behind).
    pub fn run(&mut self, schedule: &EdgeSchedule) -> Result<(), SolveError> {
        for &e in schedule.order() {
            self.iterate_edge(e)?;
        }
        let mut passes = 0usize;
        loop {
            let pending: Vec<usize> = (0..self.g.num_edges())
                .filter(|&e| !self.edge_constraint_holds(e))
                .collect();
            if pending.is_empty() {
                return Ok(());
            }
            passes += 1;
            if passes > 4 * self.g.num_edges() + 16 {
                return Err(SolveError::IterationLimitExceeded {
                    edge: pending[0],
                    events: self.total_events,
                });
            }
            for e in pending {
                self.iterate_edge(e)?;
            }
        }
    }

    pub fn finish(self) -> Result<SolveResult, SolveError> {
        let active_edges = self.forest.active_edges();
        let report = if self.opts.check_certificate {
            Some(
                oracle::check_certificate(
                    self.g,
                    &self.f,
                    &self.c,
                    &active_edges,
                    self.opts.certificate_tol,
                )
                .expect("solver output has consistent dimensions"),
            )
        } else {
            None
        };
        Ok(SolveResult {
            fit: self.f,
            c: self.c,
            active_edges,
            forest: self.forest,
            trace: self.trace,
            total_events: self.total_events,
            max_events_per_iteration: self.max_events_per_iteration,
            max_region_seen: self.max_region_seen,
            report,
        })
    }

    /// Satisfy the stopping-rule constraint at one edge by driving its
    /// coefficient to `sign(f_l - f_k)` or fusing its endpoints.
    pub fn iterate_edge(&mut self, edge: usize) -> Result<(), SolveError> {
        if self.edge_constraint_holds(edge) {
            self.satisfied[edge] = true;
            return Ok(());
        }
        self.iter_count += 1;
        let iter = self.iter_count;
        let e = self.g.edges()[edge];
        let (k0, l0) = (e.tail, e.head);
        let lam = e.lambda;
        let event_limit = self.opts.event_limit_factor * (2 * self.g.num_edges() + 1);
        let mut events_here = 0usize;

        loop {
            if self.forest.same_region(k0, l0) || self.f[k0] == self.f[l0] {
                self.satisfied[edge] = true;
                break;
            }
            let s = sign(self.f[l0] - self.f[k0]);
            if self.c[edge] == s {
                self.satisfied[edge] = true;
                break;
            }

            let sk = self.scan_region(k0);
            let sl = self.scan_region(l0);
            let (uk, ul) = (sk.u, sl.u);
            let (fk, fl) = (self.f[k0], self.f[l0]);
            let gap = (fl - fk) * s;
            debug_assert!(gap > 0.0);

            let mut cands: Vec<Candidate> = Vec::new();

            if uk > 0.0 && ul > 0.0 {
                let df_k = (s - self.c[edge]) * lam / uk;
                let df_l = (-s + self.c[edge]) * lam / ul;
                push(&mut cands, df_k, df_l, 3, edge, Action::NoChange);
            }

            let (mdf_k, mdf_l, target) = if uk + ul > 0.0 {
                let target = if ul == 0.0 {
                    fk
                } else if uk == 0.0 {
                    fl
                } else {
                    (uk * fk + ul * fl) / (uk + ul)
                };
                (ul * (fl - fk) / (uk + ul), uk * (fk - fl) / (uk + ul), target)
            } else {
                ((fl - fk) / 2.0, (fk - fl) / 2.0, (fk + fl) / 2.0)
            };
            push(&mut cands, mdf_k, mdf_l, 0, edge, Action::Merge { target });

            self.amalgamate_candidates(&sk, true, s, fk, fl, uk, ul, l0, gap, &mut cands);
            self.amalgamate_candidates(&sl, false, -s, fl, fk, ul, uk, k0, gap, &mut cands);

            if uk > 0.0 && ul > 0.0 {
                self.split_candidates(&sk, true, s, fk, uk, ul, &mut cands);
                self.split_candidates(&sl, false, -s, fl, ul, uk, &mut cands);
            }

            // Events must shrink |f_l - f_k|.
            cands.retain(|c| c.df_k * s >= -STEP_TOL && c.df_l * s <= STEP_TOL);
            let best = match select_event(&cands) {
                Some(b) => b,
                None => return Err(SolveError::NoFeasibleEvent { edge }),
            };

            events_here += 1;
            self.total_events += 1;
            if events_here > event_limit {
                return Err(SolveError::IterationLimitExceeded {
                    edge,
                    events: events_here,
                });
            }

            let dc = if matches!(best.action, Action::Merge { .. }) {
                s - self.c[edge]
            } else if uk > 0.0 {
                uk * best.df_k / lam
            } else if ul > 0.0 {
                -ul * best.df_l / lam
            } else {
                0.0
            };

            let done = match best.action {
                Action::NoChange => {
                    for &v in &sk.members {
                        self.f[v] += best.df_k;
                    }
                    for &v in &sl.members {
                        self.f[v] += best.df_l;
                    }
                    self.c[edge] = s;
                    true
                }
                Action::Merge { target } => {
                    // Once the values are equal the penalty term vanishes, so
                    // the coefficient saturates to its target for free; this
                    // keeps every active edge at magnitude one, which later
                    // splits rely on to leave the stopping rule intact.
                    self.c[edge] = s;
                    for &v in sk.members.iter().chain(sl.members.iter()) {
                        self.f[v] = target;
                    }
                    self.forest.add_active(self.g, edge)?;
                    self.note_region(k0);
                    true
                }
                Action::Amalgamate {
                    boundary_edge,
                    target,
                    moving_is_tail_side,
                } => {
                    self.c[edge] = clamp_unit(self.c[edge] + dc);
                    let (moving, still, df_still) = if moving_is_tail_side {
                        (&sk.members, &sl.members, best.df_l)
                    } else {
                        (&sl.members, &sk.members, best.df_k)
                    };
                    for &v in moving {
                        self.f[v] = target;
                    }
                    for &v in still {
                        self.f[v] += df_still;
                    }
                    self.forest.add_active(self.g, boundary_edge)?;
                    self.note_region(self.g.edges()[boundary_edge].tail);
                    false
                }
                Action::Split {
                    active_edge,
                    swap_sign,
                } => {
                    self.c[edge] = clamp_unit(self.c[edge] + dc);
                    for &v in &sk.members {
                        self.f[v] += best.df_k;
                    }
                    for &v in &sl.members {
                        self.f[v] += best.df_l;
                    }
                    self.forest.remove_active(self.g, active_edge)?;
                    if swap_sign {
                        self.c[active_edge] = -self.c[active_edge];
                    }
                    false
                }
            };

            if self.opts.trace {
                let kind = match best.action {
                    Action::NoChange => EventKind::NoChange,
                    Action::Merge { .. } => EventKind::Merge,
                    Action::Amalgamate { boundary_edge, .. } => {
                        EventKind::Amalgamate { boundary_edge }
                    }
                    Action::Split {
                        active_edge,
                        swap_sign,
                    } => EventKind::Split {
                        active_edge,
                        swap_sign,
                    },
                };
                self.trace.push(TraceRecord {
                    iter,
                    edge,
                    kind,
                    df_k: best.df_k,
                    df_l: best.df_l,
                    dc,
                    q_working: working_objective(self.g, &self.f, &self.c),
                });
            }

            if done {
                self.satisfied[edge] = true;
                break;
            }
        }
        self.max_events_per_iteration = self.max_events_per_iteration.max(events_here);
        Ok(())
    }

    fn note_region(&mut self, v: usize) {
        self.max_region_seen = self.max_region_seen.max(self.forest.region_size(v));
    }

    /// Candidates that absorb a neighbouring region into the moving side.
    #[allow(clippy::too_many_arguments)]
    fn amalgamate_candidates(
        &self,
        moving: &RegionScan,
        moving_is_tail_side: bool,
        d: f64,
        f_mov: f64,
        _f_oth: f64,
        u_mov: f64,
        u_oth: f64,
        other_root: usize,
        gap: f64,
        out: &mut Vec<Candidate>,
    ) {
        let my_comp = self.forest.component_id(moving.members[0]);
        let other_comp = self.forest.component_id(other_root);
        for &v in &moving.members {
            for inc in self.g.incident(v) {
                let o = inc.other;
                let oc = self.forest.component_id(o);
                if oc == my_comp || oc == other_comp {
                    continue;
                }
                let c2 = self.c[inc.edge];
                if c2 == 0.0 {
                    continue;
                }
                let f_nb = self.f[o];
                let dist = (f_nb - f_mov) * d;
                // Inclusive at the moving value, exclusive at the far side.
                if dist < 0.0 || dist >= gap {
                    continue;
                }
                // Only absorb when leaving the neighbour behind would break
                // the gradient-sign constraint on this boundary edge.
                let activates = if inc.is_tail {
                    (c2 > 0.0) == (d > 0.0)
                } else {
                    (c2 > 0.0) == (d < 0.0)
                };
                if !activates {
                    continue;
                }
                let feasible = u_oth > 0.0 || u_mov == 0.0 || dist == 0.0;
                if !feasible {
                    continue;
                }
                let df_mov = f_nb - f_mov;
                let df_oth = if u_oth > 0.0 {
                    u_mov * (f_mov - f_nb) / u_oth
                } else {
                    0.0
                };
                let (df_k, df_l) = if moving_is_tail_side {
                    (df_mov, df_oth)
                } else {
                    (df_oth, df_mov)
                };
                push(
                    out,
                    df_k,
                    df_l,
                    1,
                    inc.edge,
                    Action::Amalgamate {
                        boundary_edge: inc.edge,
                        target: f_nb,
                        moving_is_tail_side,
                    },
                );
            }
        }
    }

    /// Candidates that remove an active edge of the moving region.
    ///
    /// For each active edge `(I, J)` the Lagrange multiplier
    /// `mu = -(u_{I,J} f_I - m_{I,J}) / (c_{I,J} lambda_{I,J})` must stay in
    /// `[0, 2]` while the region's value moves. The subregion on the far
    /// side of the moving endpoint has constant `m` during the motion, so
    /// the multiplier is tracked from that side; the edge leaves the active
    /// set where the multiplier hits a boundary, with a coefficient sign
    /// swap when it is the upper one.
    fn split_candidates(
        &self,
        moving: &RegionScan,
        moving_is_tail_side: bool,
        d: f64,
        f_mov: f64,
        u_mov: f64,
        u_oth: f64,
        out: &mut Vec<Candidate>,
    ) {
        for idx in 1..moving.members.len() {
            let a = moving.parent_edge[idx];
            let cbar = self.c[a];
            if cbar == 0.0 {
                continue;
            }
            let u_s = moving.sub_u[idx];
            if u_s <= 0.0 {
                continue;
            }
            let m_s = moving.sub_m[idx];
            let lam_a = self.g.edges()[a].lambda;
            // The subtree holds the child endpoint; sigma orients the
            // multiplier to the tail-side convention.
            let sigma = if self.g.edges()[a].tail == moving.members[idx] {
                -1.0
            } else {
                1.0
            };
            let mu0 = sigma * (u_s * f_mov - m_s) / (cbar * lam_a);
            let rate = sigma * d * u_s / (cbar * lam_a);
            let (bound, swap_sign) = if rate > 0.0 { (2.0, true) } else { (0.0, false) };
            let t = ((bound - mu0) / rate).max(0.0);
            let df_mov = d * t;
            let df_oth = -(u_mov / u_oth) * df_mov;
            let (df_k, df_l) = if moving_is_tail_side {
                (df_mov, df_oth)
            } else {
                (df_oth, df_mov)
            };
            push(
                out,
                df_k,
                df_l,
                2,
                a,
                Action::Split {
                    active_edge: a,
                    swap_sign,
                },
            );
        }
    }

    fn scan_region(&self, root: usize) -> RegionScan {
        let g = self.g;
        let mut members = vec![root];
        let mut parent_edge = vec![usize::MAX];
        let mut parent_pos = vec![usize::MAX];
        let mut pos_of = std::collections::HashMap::new();
        pos_of.insert(root, 0usize);
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            for &a in self.forest.active_incident(v) {
                let ed = g.edges()[a];
                let o = if ed.tail == v { ed.head } else { ed.tail };
                if !pos_of.contains_key(&o) {
                    pos_of.insert(o, members.len());
                    members.push(o);
                    parent_edge.push(a);
                    parent_pos.push(i);
                }
            }
            i += 1;
        }
        let n = members.len();
        let mut sub_u = vec![0.0; n];
        let mut sub_m = vec![0.0; n];
        for (i, &v) in members.iter().enumerate() {
            sub_u[i] = g.weights()[v];
            let mut mi = g.weights()[v] * g.data()[v];
            for inc in g.incident(v) {
                let term = self.c[inc.edge] * g.edges()[inc.edge].lambda;
                if inc.is_tail {
                    mi += term;
                } else {
                    mi -= term;
                }
            }
            sub_m[i] = mi;
        }
        for i in (1..n).rev() {
            let p = parent_pos[i];
            sub_u[p] += sub_u[i];
            sub_m[p] += sub_m[i];
        }
        RegionScan {
            u: sub_u[0],
            members,
            parent_edge,
            sub_u,
            sub_m,
        }
    }
}

fn push(
    out: &mut Vec<Candidate>,
    df_k: f64,
    df_l: f64,
    priority: u8,
    tie_edge: usize,
    action: Action,
) {
    out.push(Candidate {
        df_k,
        df_l,
        metric: df_k.abs().max(df_l.abs()),
        priority,
        tie_edge,
        action,
    });
}

/// The event with both step lengths smallest; ties within [`STEP_TOL`] go to
/// merge, then amalgamate, then split, then no-change, then lowest edge
/// index.
fn select_event(cands: &[Candidate]) -> Option<Candidate> {
    let min_metric = cands
        .iter()
        .map(|c| c.metric)
        .fold(f64::INFINITY, f64::min);
    cands
        .iter()
        .filter(|c| c.metric <= min_metric + STEP_TOL)
        .min_by(|a, b| {
            (a.priority, a.tie_edge)
                .cmp(&(b.priority, b.tie_edge))
        })
        .copied()
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn clamp_unit(c: f64) -> f64 {
    c.clamp(-1.0, 1.0)
}

/// Neumaier compensated sum.
fn accurate_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The penalized objective `Q(f)`.
pub fn objective(g: &Graph, f: &[f64]) -> f64 {
    let data_term = accurate_sum(
        (0..g.n()).map(|i| 0.5 * g.weights()[i] * (f[i] - g.data()[i]).powi(2)),
    );
    let rough = accurate_sum(
        g.edges()
            .iter()
            .map(|e| e.lambda * (f[e.head] - f[e.tail]).abs()),
    );
    data_term + rough
}

/// The working objective `Q(f; c)`, with each edge penalty scaled by
/// `|c_{i,j}|`.
pub fn working_objective(g: &Graph, f: &[f64], c: &[f64]) -> f64 {
    let data_term = accurate_sum(
        (0..g.n()).map(|i| 0.5 * g.weights()[i] * (f[i] - g.data()[i]).powi(2)),
    );
    let rough = accurate_sum(
        g.edges()
            .iter()
            .enumerate()
            .map(|(j, e)| c[j].abs() * e.lambda * (f[e.head] - f[e.tail]).abs()),
    );
    data_term + rough
}

/// Reset every fitted value to the unweighted mean of the observations in
/// its region, excluding zero-weight (dummy) vertices.
pub fn mean_correction(
    g: &Graph,
    f: &[f64],
    forest: &ActiveForest,
) -> Result<Vec<f64>, SolveError> {
    let _ = f;
    let n = g.n();
    let mut sums: std::collections::HashMap<usize, (f64, usize)> = std::collections::HashMap::new();
    for v in 0..n {
        if g.weights()[v] > 0.0 {
            let entry = sums.entry(forest.component_id(v)).or_insert((0.0, 0));
            entry.0 += g.data()[v];
            entry.1 += 1;
        }
    }
    let mut out = vec![0.0; n];
    for v in 0..n {
        match sums.get(&forest.component_id(v)) {
            Some(&(sum, count)) => out[v] = sum / count as f64,
            None => return Err(SolveError::EmptyRegionMean { vertex: v }),
        }
    }
    Ok(out)
}
