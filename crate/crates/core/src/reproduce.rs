//! Scripted benchmark pipelines behind `stagehunt reproduce`.
//!
//! Each figure id regenerates the data underlying one benchmark figure
//! on the built-in parameter tables: data CSVs, SVG plots, and a
//! `manifest.txt` comparing every located special point against its
//! published value at a stated tolerance.  Any failed comparison makes
//! the command exit with code 4, so numerical drift is loud.
//!
//! The ten ids:
//!
//! * `fig1` — convergence onto the prey-only state (a, at `u = 0.7`) and
//!   onto the coexistence state (b, first table baseline).
//! * `fig2` — equilibrium branch in `b` with the fold and the
//!   transcritical contact (first table).
//! * `fig3` — time series bracketing the Hopf point in `c` (second
//!   table).
//! * `fig4` — fold + transcritical loci with the cusp in the `(c, b)`
//!   plane (a) and the `(a3, c)` plane (b), with regime maps.
//! * `fig5` — bistability at the first table baseline: three initial
//!   states, one basin boundary between them, plus the near-extinction
//!   recovery run.
//! * `fig6` — equilibrium components near the fold in `b`.
//! * `fig7` — Hopf + fold loci in the `(a1, c)` plane (a) and the
//!   `(a1, a2)` plane (b) with Bogdanov–Takens / Bautin points.
//! * `fig8` — branch, fold, Hopf, and cycle amplitudes in `u`.
//! * `fig9` — phase portraits around the Hopf point in `a3`.
//! * `fig10` — the double Hopf "balloon" in `b` with cycle amplitudes.
//!
//! Two-panel figures accept a suffix (`fig7b`) to run one panel alone;
//! files are prefixed by panel either way.

use std::fmt::Write as _;
use std::path::Path;

use crate::cli::{
    codim2_plot, e_label, equilibrium_state, seed_hopf_in, trace_locus_both, write_file,
    CliResult, Ctx, Failure,
};
use crate::codim2::{region_map, transcritical_locus, Codim2Config, Codim2Curve, Codim2Kind, CurveId};
use crate::continuation::{
    continue_equilibrium_both, BranchCurve, ContinuationConfig, SpecialKind, SpecialPoint,
};
use crate::equilibria::EquilibriumKind;
use crate::io::{self, Manifest, Plot, Series};
use crate::model::{ParamId, Params, State};
use crate::simulate::{
    bloom_probe, cycle_metrics, detect_attractor, integrate, Attractor, IntegratorConfig,
    Trajectory,
};

pub(crate) fn run(figure: &str, ctx: &Ctx) -> CliResult<()> {
    let lowered = figure.to_ascii_lowercase();
    let (base, panel) = split_panel(&lowered);
    let dir = ctx.out.join(base);
    let manifest = match (base, panel) {
        ("fig1", p) => fig1(ctx, &dir, p)?,
        ("fig2", None) => fig2(ctx, &dir)?,
        ("fig3", None) => fig3(ctx, &dir)?,
        ("fig4", p) => fig4(ctx, &dir, p)?,
        ("fig5", None) => fig5(ctx, &dir)?,
        ("fig6", None) => fig6(ctx, &dir)?,
        ("fig7", p) => fig7(ctx, &dir, p)?,
        ("fig8", None) => fig8(ctx, &dir)?,
        ("fig9", None) => fig9(ctx, &dir)?,
        ("fig10", None) => fig10(ctx, &dir)?,
        _ => {
            return Err(Failure::Config(format!(
                "unknown figure `{figure}` (expected fig1..fig10; panel suffixes only on fig1, \
                 fig4, fig7)"
            )))
        }
    };
    let text = manifest.render();
    print!("{text}");
    write_file(&dir, "manifest.txt", &text)?;
    if manifest.passed() {
        Ok(())
    } else {
        Err(Failure::Golden(format!(
            "{lowered}: golden-value comparisons failed (see manifest)"
        )))
    }
}

/// `fig7b` → (`fig7`, Some('b')); ids without a panel pass through.
fn split_panel(figure: &str) -> (&str, Option<char>) {
    if let Some(prefix) = figure.strip_suffix(['a', 'b']) {
        if prefix.len() > 3 && prefix.starts_with("fig") && prefix[3..].chars().all(|c| c.is_ascii_digit()) {
            return (prefix, figure.chars().last());
        }
    }
    (figure, None)
}

// ---------------------------------------------------------------------
// Shared machinery.

fn numerical(e: impl std::fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

/// The equilibrium with its prey level kicked by 15%, the standard probe
/// start used throughout.
fn kicked(eq: &State) -> State {
    State::new(eq.x * 1.15, eq.y1, eq.y2, eq.y3)
}

/// Integrate with a settling extension: when the attractor is still
/// undecided after `t1`, continue from the endpoint for `t2` more time
/// units and re-detect on the combined record.  Near a Hopf point both
/// the growth onto and the contraction onto the small cycle slow down
/// like the distance to the bifurcation, so a single fixed horizon
/// misclassifies close passes.
fn settle(p: &Params, init: &State, t1: f64, t2: f64) -> CliResult<(Trajectory, Attractor)> {
    let cfg = IntegratorConfig {
        tmax: t1,
        dense_stride: Some(0.5),
        ..IntegratorConfig::default()
    };
    let mut traj = integrate(p, init, &cfg).map_err(numerical)?;
    let mut attractor = detect_attractor(p, &traj);
    if attractor == Attractor::Undecided && t2 > 0.0 {
        let (t_end, last) = traj.last();
        let cfg2 = IntegratorConfig {
            tmax: t2,
            dense_stride: Some(0.5),
            ..IntegratorConfig::default()
        };
        let tail = integrate(p, &last, &cfg2).map_err(numerical)?;
        for (t, s) in tail.t.iter().zip(&tail.states).skip(1) {
            traj.t.push(t_end + t);
            traj.states.push(*s);
        }
        traj.steps_accepted += tail.steps_accepted;
        traj.steps_rejected += tail.steps_rejected;
        attractor = detect_attractor(p, &traj);
    }
    Ok((traj, attractor))
}

/// Plain fixed-horizon integration on a uniform grid.
fn run_to(p: &Params, init: &State, tmax: f64, stride: f64) -> CliResult<Trajectory> {
    let cfg = IntegratorConfig {
        tmax,
        dense_stride: Some(stride),
        ..IntegratorConfig::default()
    };
    integrate(p, init, &cfg).map_err(numerical)
}

fn verdict_text(p: &Params, traj: &Trajectory) -> String {
    match detect_attractor(p, traj) {
        Attractor::Equilibrium { kind, distance } => {
            format!("equilibrium {} (sup distance {distance:.2e})", e_label(kind))
        }
        Attractor::LimitCycle { amplitude } => {
            format!("limit_cycle (prey amplitude {amplitude:.4e})")
        }
        Attractor::Undecided => "undecided".to_string(),
    }
}

fn bool_check(manifest: &mut Manifest, name: &str, observed: bool) {
    manifest.check(name, 1.0, f64::from(u8::from(observed)), 0.5);
}

/// Parameter value of the special point of `kind` nearest `target`
/// (NaN when the curve has none, so the manifest fails honestly).
fn special_near(curve: &BranchCurve, kind: SpecialKind, target: f64) -> f64 {
    curve
        .specials
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| s.param)
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(f64::NAN)
}

fn special_point_near(curve: &BranchCurve, kind: SpecialKind, target: f64) -> Option<SpecialPoint> {
    curve
        .specials
        .iter()
        .filter(|s| s.kind == kind)
        .min_by(|a, b| (a.param - target).abs().total_cmp(&(b.param - target).abs()))
        .copied()
}

/// Coordinates of the codimension-two point of `kind` nearest `target`.
fn codim2_near(curve: &Codim2Curve, kind: Codim2Kind, target: (f64, f64)) -> (f64, f64) {
    curve
        .specials
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| (s.p1, s.p2))
        .min_by(|a, b| {
            let da = (a.0 - target.0).hypot(a.1 - target.1);
            let db = (b.0 - target.0).hypot(b.1 - target.1);
            da.total_cmp(&db)
        })
        .unwrap_or((f64::NAN, f64::NAN))
}

fn pairs_csv(h1: &str, h2: &str, rows: &[(f64, f64)]) -> String {
    let mut out = format!("{h1},{h2}\n");
    for (a, b) in rows {
        let _ = writeln!(out, "{a},{b}");
    }
    out
}

fn merge_plots(mut base: Plot, other: Plot) -> Plot {
    base.series.extend(other.series);
    base.markers.extend(other.markers);
    base.cells.extend(other.cells);
    base
}

fn dedupe_legend(plot: &mut Plot) {
    let mut seen = std::collections::BTreeSet::new();
    for s in plot.series.iter_mut() {
        if !s.label.is_empty() && !seen.insert(s.label.clone()) {
            s.label.clear();
        }
    }
}

/// Phase-plane projection of a trajectory.
fn phase_plot(title: &str, traj: &Trajectory) -> Plot {
    Plot {
        title: title.to_string(),
        x_label: "x".to_string(),
        y_label: "y3".to_string(),
        series: vec![Series {
            label: String::new(),
            color: io::PALETTE[0],
            dashed: false,
            points: traj.states.iter().map(|s| (s.x, s.y3)).collect(),
        }],
        markers: Vec::new(),
        cells: Vec::new(),
    }
}

// ---------------------------------------------------------------------
// Cycle-amplitude sweeps (the "balloon" overlays).

struct AmplitudeRow {
    param: f64,
    amplitude: f64,
    period: f64,
    x_min: f64,
    x_max: f64,
    resolved: bool,
}

/// Prey extrema of an established cycle at each parameter value, from a
/// kicked start near the (unstable) interior state.
fn amplitude_sweep(p: &Params, free: ParamId, values: &[f64]) -> CliResult<Vec<AmplitudeRow>> {
    let mut rows = Vec::new();
    for &value in values {
        let at = p.with(free, value);
        let eq = equilibrium_state(&at, EquilibriumKind::InteriorLow)?;
        let (traj, attractor) = settle(&at, &kicked(&eq), 8000.0, 20000.0)?;
        let (_, t_tail) = (traj.t.len(), traj.last().0 * 0.8);
        let from = traj.index_from(t_tail);
        let mut x_min = f64::MAX;
        let mut x_max = f64::MIN;
        for s in &traj.states[from..] {
            x_min = x_min.min(s.x);
            x_max = x_max.max(s.x);
        }
        let resolved = matches!(attractor, Attractor::LimitCycle { .. });
        let period = cycle_metrics(&traj, 0.2).map(|m| m.period).unwrap_or(f64::NAN);
        rows.push(AmplitudeRow {
            param: value,
            amplitude: 0.5 * (x_max - x_min),
            period,
            x_min,
            x_max,
            resolved,
        });
    }
    Ok(rows)
}

fn amplitudes_csv(free: ParamId, rows: &[AmplitudeRow]) -> String {
    let mut out = format!("{},amplitude,period,x_min,x_max,resolved\n", free.name());
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.param, r.amplitude, r.period, r.x_min, r.x_max, r.resolved
        );
    }
    out
}

/// Branch diagram with the cycle envelope drawn over it.
fn balloon_plot(title: &str, free: ParamId, curve: &BranchCurve, rows: &[AmplitudeRow]) -> Plot {
    let mut plot = io::branch_plot(title, free.name(), curve);
    let resolved: Vec<&AmplitudeRow> = rows.iter().filter(|r| r.resolved).collect();
    for (label, pick) in [
        ("cycle envelope", (|r: &AmplitudeRow| r.x_max) as fn(&AmplitudeRow) -> f64),
        ("", |r: &AmplitudeRow| r.x_min),
    ] {
        plot.series.push(Series {
            label: label.to_string(),
            color: io::PALETTE[0],
            dashed: true,
            points: resolved.iter().map(|r| (r.param, pick(r))).collect(),
        });
    }
    plot
}

// ---------------------------------------------------------------------
// fig1 — convergence onto E2 (u = 0.7) and onto E4 (baseline).

fn fig1(ctx: &Ctx, dir: &Path, panel: Option<char>) -> CliResult<Manifest> {
    let _ = ctx;
    let mut manifest = Manifest::default();
    let stride = 1.0;

    if panel != Some('b') {
        let p = Params::table1().with(ParamId::U, 0.7);
        let target = State::new(1.0, 0.0, 0.0, 0.0);
        manifest.note("panel a: first table with u = 0.7; every orbit ends at the prey-only state");
        for (tag, init) in [
            ("run1", State::new(0.2, 0.1, 0.01, 0.01)),
            ("run2", State::new(0.8, 0.3, 0.2, 0.1)),
        ] {
            let traj = run_to(&p, &init, 20000.0, stride)?;
            let (_, last) = traj.last();
            manifest.check(
                format!("a {tag} E2 distance"),
                0.0,
                last.max_distance(&target),
                1e-4,
            );
            manifest.note(format!("a {tag}: {}", verdict_text(&p, &traj)));
            write_file(dir, &format!("a_{tag}.csv"), &io::trajectory_csv(&traj))?;
            let title = format!("prey-only attractor at u = 0.7 ({tag})");
            write_file(
                dir,
                &format!("a_{tag}.svg"),
                &io::render_svg(&io::trajectory_plot(&title, &traj)),
            )?;
        }
    }

    if panel != Some('a') {
        let p = Params::table1();
        let target = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
        manifest.note(format!(
            "panel b: first table baseline; coexistence state ({:.6}, {:.6}, {:.6}, {:.6}), published rounded (0.762, 0.30159, 0.23419, 0.207)",
            target.x, target.y1, target.y2, target.y3
        ));
        for (tag, init) in [
            ("run1", State::new(0.2, 0.1, 0.1, 0.01)),
            ("run2", State::new(0.01, 0.3, 0.2, 0.3)),
        ] {
            let traj = run_to(&p, &init, 20000.0, stride)?;
            let (_, last) = traj.last();
            manifest.check(
                format!("b {tag} E4 distance"),
                0.0,
                last.max_distance(&target),
                1e-4,
            );
            manifest.note(format!("b {tag}: {}", verdict_text(&p, &traj)));
            write_file(dir, &format!("b_{tag}.csv"), &io::trajectory_csv(&traj))?;
            let title = format!("coexistence attractor ({tag})");
            write_file(
                dir,
                &format!("b_{tag}.svg"),
                &io::render_svg(&io::trajectory_plot(&title, &traj)),
            )?;
        }
    }

    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig2 — equilibrium branch in b: fold + transcritical contact.

fn fig2(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let p = Params::table1();
    let cfg = ContinuationConfig::default();
    let range = (0.02, 0.13);

    let seed = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
    let interior = continue_equilibrium_both(&p, ParamId::B, &seed, range, &cfg)
        .map_err(numerical)?;
    let prey_only = continue_equilibrium_both(
        &p,
        ParamId::B,
        &State::new(1.0, 0.0, 0.0, 0.0),
        range,
        &cfg,
    )
    .map_err(numerical)?;

    let mut manifest = Manifest::default();
    let lp = special_near(&interior, SpecialKind::Fold, 0.108186);
    let bp = special_near(&interior, SpecialKind::BranchPoint, 0.114706);
    manifest.check("LP b", 0.108186, lp, 1e-4);
    manifest.check("BP b", 0.114706, bp, 1e-4);
    if bp.is_finite() {
        let a2t = crate::normalform::transcritical_a2(&p.with(ParamId::B, bp))
            .unwrap_or(f64::NAN);
        manifest.check("a2t at BP", 0.625, a2t, 1e-5);
    } else {
        manifest.check("a2t at BP", 0.625, f64::NAN, 1e-5);
    }
    manifest.check(
        "BP b (prey-only branch)",
        0.114706,
        special_near(&prey_only, SpecialKind::BranchPoint, 0.114706),
        1e-4,
    );

    write_file(dir, "interior.csv", &io::curve_csv(&interior))?;
    write_file(dir, "prey_only.csv", &io::curve_csv(&prey_only))?;
    let mut specials = interior.specials.clone();
    specials.extend(prey_only.specials.iter().copied());
    write_file(dir, "specials.csv", &io::specials_csv(&specials))?;

    let mut plot = merge_plots(
        io::branch_plot("equilibrium branches in b", "b", &interior),
        io::branch_plot("", "b", &prey_only),
    );
    dedupe_legend(&mut plot);
    write_file(dir, "branches.svg", &io::render_svg(&plot))?;
    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig3 — time series bracketing the Hopf point in c.

fn fig3(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let base = Params::table2();
    let mut manifest = Manifest::default();
    let runs = [
        ('a', 0.037, "above the Hopf point"),
        ('b', 0.03598345, "at the Hopf point"),
        ('c', 0.033, "below the Hopf point"),
    ];
    for (tag, c, note) in runs {
        let p = base.with(ParamId::C, c);
        let eq = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
        let (traj, attractor) = settle(&p, &kicked(&eq), 8000.0, 20000.0)?;
        manifest.note(format!("{tag}: c = {c} ({note}) -> {}", verdict_text(&p, &traj)));
        match tag {
            'a' => bool_check(
                &mut manifest,
                "c=0.037 limit cycle",
                matches!(attractor, Attractor::LimitCycle { .. }),
            ),
            'c' => bool_check(
                &mut manifest,
                "c=0.033 settles on E4",
                matches!(
                    attractor,
                    Attractor::Equilibrium {
                        kind: EquilibriumKind::InteriorLow,
                        ..
                    }
                ),
            ),
            // At the Hopf point itself the linearization is neutral and
            // the settling time diverges; the verdict is reported, not
            // gated.
            _ => {}
        }
        write_file(dir, &format!("{tag}.csv"), &io::trajectory_csv(&traj))?;
        let title = format!("time series at c = {c}");
        write_file(
            dir,
            &format!("{tag}.svg"),
            &io::render_svg(&io::trajectory_plot(&title, &traj)),
        )?;
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig4 — cusp planes: (c, b) and (a3, c), with regime maps.

fn fig4(ctx: &Ctx, dir: &Path, panel: Option<char>) -> CliResult<Manifest> {
    let p = Params::table1();
    let cfg = Codim2Config::default();
    let seed = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
    let mut manifest = Manifest::default();

    if panel != Some('b') {
        let range_c = (0.02, 0.15);
        let range_b = (0.004, 0.2);
        let fold = trace_locus_both(
            CurveId::Fold,
            &p,
            (ParamId::C, ParamId::B),
            &seed,
            range_c,
            range_b,
            &cfg,
        )?;
        let cp = codim2_near(&fold, Codim2Kind::Cusp, (0.1022, 0.07622));
        manifest.check("a CP c", 0.1022, cp.0, 2e-3);
        manifest.check("a CP b", 0.07622, cp.1, 2e-3);
        let transcritical = transcritical_locus(&p, range_c, 200);
        let cells = region_map(
            &p,
            (ParamId::C, ParamId::B),
            range_c,
            range_b,
            40,
            40,
            ctx.jobs,
        );

        write_file(dir, "a_fold.csv", &io::codim2_curve_csv(&fold))?;
        write_file(
            dir,
            "a_transcritical.csv",
            &pairs_csv("c", "b", &transcritical),
        )?;
        write_file(dir, "a_region.csv", &io::region_csv(&cells))?;

        let mut plot = io::region_plot(
            "regimes in (c, b)",
            "c",
            "b",
            &cells,
            (range_c.1 - range_c.0) / 40.0,
            (range_b.1 - range_b.0) / 40.0,
        );
        plot = merge_plots(plot, codim2_plot("", &fold));
        plot.series.push(Series {
            label: "transcritical".to_string(),
            color: io::PALETTE[4],
            dashed: false,
            points: transcritical,
        });
        dedupe_legend(&mut plot);
        write_file(dir, "a_plane.svg", &io::render_svg(&plot))?;
    }

    if panel != Some('a') {
        let range_a3 = (0.02, 0.09);
        let range_c = (0.02, 0.15);
        let fold = trace_locus_both(
            CurveId::Fold,
            &p,
            (ParamId::A3, ParamId::C),
            &seed,
            range_a3,
            range_c,
            &cfg,
        )?;
        let cp = codim2_near(&fold, Codim2Kind::Cusp, (0.0399, 0.0704));
        manifest.note(format!(
            "b: located cusp (a3, c) = ({:.9}, {:.9}); published (0.04002, 0.7054) — the second \
             coordinate appears to carry a decimal-point slip (0.7054 vs ~0.0704), so this panel \
             is report-only",
            cp.0, cp.1
        ));
        // The transcritical threshold is linear in (a3, c):
        // a2t = a2 along c = a3 - (b+d1) d2 d3 / ((b+d1) d3 - a2 b u).
        let shift = (p.b + p.d1) * p.d2 * p.d3 / ((p.b + p.d1) * p.d3 - p.a2 * p.b * p.u);
        let transcritical: Vec<(f64, f64)> = (0..=200)
            .map(|k| {
                let a3 = range_a3.0 + (range_a3.1 - range_a3.0) * k as f64 / 200.0;
                (a3, a3 - shift)
            })
            .filter(|(_, c)| (range_c.0..=range_c.1).contains(c))
            .collect();
        let cells = region_map(
            &p,
            (ParamId::A3, ParamId::C),
            range_a3,
            range_c,
            40,
            40,
            ctx.jobs,
        );

        write_file(dir, "b_fold.csv", &io::codim2_curve_csv(&fold))?;
        write_file(
            dir,
            "b_transcritical.csv",
            &pairs_csv("a3", "c", &transcritical),
        )?;
        write_file(dir, "b_region.csv", &io::region_csv(&cells))?;

        let mut plot = io::region_plot(
            "regimes in (a3, c)",
            "a3",
            "c",
            &cells,
            (range_a3.1 - range_a3.0) / 40.0,
            (range_c.1 - range_c.0) / 40.0,
        );
        plot = merge_plots(plot, codim2_plot("", &fold));
        plot.series.push(Series {
            label: "transcritical".to_string(),
            color: io::PALETTE[4],
            dashed: false,
            points: transcritical,
        });
        dedupe_legend(&mut plot);
        write_file(dir, "b_plane.svg", &io::render_svg(&plot))?;
    }

    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig5 — bistability at the first table baseline.

fn fig5(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let p = Params::table1();
    let e2 = State::new(1.0, 0.0, 0.0, 0.0);
    let e4 = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
    let mut manifest = Manifest::default();

    let runs = [
        ('a', State::new(0.2, 0.1, 0.1, 0.01), &e4, "E4"),
        ('b', State::new(0.2, 0.1, 0.01, 0.01), &e2, "E2"),
        ('c', State::new(0.01, 0.3, 0.2, 0.3), &e4, "E4"),
    ];
    for (tag, init, target, label) in runs {
        let traj = run_to(&p, &init, 50000.0, 2.0)?;
        let (_, last) = traj.last();
        manifest.check(
            format!("{tag} {label} distance"),
            0.0,
            last.max_distance(target),
            1e-4,
        );
        manifest.note(format!(
            "{tag}: init ({}, {}, {}, {}) -> {}",
            init.x,
            init.y1,
            init.y2,
            init.y3,
            verdict_text(&p, &traj)
        ));
        write_file(dir, &format!("{tag}.csv"), &io::trajectory_csv(&traj))?;
        let title = format!("bistability run {tag}");
        write_file(
            dir,
            &format!("{tag}.svg"),
            &io::render_svg(&io::trajectory_plot(&title, &traj)),
        )?;
    }

    // Near-extinction recovery: the prey blooms back before the predator
    // stages starve, so the orbit still reaches the coexistence state.
    let init = State::new(1e-10, 0.3, 0.2, 0.3);
    let cfg = IntegratorConfig {
        tmax: 50000.0,
        dense_stride: Some(2.0),
        ..IntegratorConfig::default()
    };
    let report = bloom_probe(&p, &init, &cfg).map_err(numerical)?;
    bool_check(
        &mut manifest,
        "bloom run reaches E4",
        matches!(
            report.outcome,
            Attractor::Equilibrium {
                kind: EquilibriumKind::InteriorLow,
                ..
            }
        ),
    );
    manifest.note(format!(
        "bloom: x(0) = 1e-10; predator biomass bottoms at {:.6e} (t = {:.1}) and ends at {:.6e}",
        report.predator_min, report.predator_min_t, report.predator_final
    ));
    let traj = run_to(&p, &init, 50000.0, 2.0)?;
    write_file(dir, "bloom.csv", &io::trajectory_csv(&traj))?;
    write_file(
        dir,
        "bloom.svg",
        &io::render_svg(&io::trajectory_plot("near-extinction recovery", &traj)),
    )?;

    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig6 — equilibrium components near the fold in b.

fn fig6(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let p = Params::table1();
    let cfg = ContinuationConfig::default();
    let seed = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
    let curve = continue_equilibrium_both(&p, ParamId::B, &seed, (0.10, 0.13), &cfg)
        .map_err(numerical)?;

    let mut manifest = Manifest::default();
    manifest.check(
        "LP b",
        0.108186,
        special_near(&curve, SpecialKind::Fold, 0.108186),
        1e-4,
    );
    let high = equilibrium_state(&p, EquilibriumKind::InteriorHigh)?;
    manifest.note(format!(
        "at b = 0.112: E3 = ({:.6}, {:.6}, {:.6}, {:.6}), published rounded (0.97, 0.04, 0.03, 0.02)",
        high.x, high.y1, high.y2, high.y3
    ));
    manifest.note(format!(
        "at b = 0.112: E4 = ({:.6}, {:.6}, {:.6}, {:.6}), published rounded (0.762, 0.30159, 0.23419, 0.207)",
        seed.x, seed.y1, seed.y2, seed.y3
    ));

    write_file(dir, "curve.csv", &io::curve_csv(&curve))?;
    write_file(dir, "specials.csv", &io::specials_csv(&curve.specials))?;
    for (component, name) in [(0, "x"), (1, "y1"), (2, "y2"), (3, "y3")] {
        let title = format!("equilibrium {name} near the fold in b");
        let plot = io::component_branch_plot(&title, "b", name, &curve, component);
        write_file(dir, &format!("{name}.svg"), &io::render_svg(&plot))?;
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig7 — Hopf/fold planes in (a1, c) and (a1, a2).

fn fig7(ctx: &Ctx, dir: &Path, panel: Option<char>) -> CliResult<Manifest> {
    let p = Params::table2();
    let cfg = Codim2Config::default();
    let range_a1 = (0.01, 0.7);
    let mut manifest = Manifest::default();

    if panel != Some('b') {
        let range_c = (0.005, 0.06);
        let (c_h, hopf_state) =
            seed_hopf_in(&p, ParamId::C, range_c, EquilibriumKind::InteriorLow)?;
        let hopf = trace_locus_both(
            CurveId::Hopf,
            &p.with(ParamId::C, c_h),
            (ParamId::A1, ParamId::C),
            &hopf_state,
            range_a1,
            range_c,
            &cfg,
        )?;
        let interior = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
        let fold = trace_locus_both(
            CurveId::Fold,
            &p,
            (ParamId::A1, ParamId::C),
            &interior,
            range_a1,
            range_c,
            &cfg,
        )?;
        let bt = codim2_near(&hopf, Codim2Kind::BogdanovTakens, (0.149588, 0.018589));
        manifest.check("a BT a1", 0.149588, bt.0, 2e-3);
        manifest.check("a BT c", 0.018589, bt.1, 2e-3);
        manifest.note(
            "a: the fold locus is a horizontal line — a1 enters neither the interior quadratic \
             nor its discriminant",
        );
        let cells = region_map(&p, (ParamId::A1, ParamId::C), range_a1, range_c, 40, 40, ctx.jobs);

        write_file(dir, "a_hopf.csv", &io::codim2_curve_csv(&hopf))?;
        write_file(dir, "a_fold.csv", &io::codim2_curve_csv(&fold))?;
        write_file(dir, "a_region.csv", &io::region_csv(&cells))?;
        let mut specials = hopf.specials.clone();
        specials.extend(fold.specials.iter().copied());
        write_file(dir, "a_specials.csv", &io::codim2_specials_csv(&specials))?;

        let mut plot = io::region_plot(
            "regimes in (a1, c)",
            "a1",
            "c",
            &cells,
            (range_a1.1 - range_a1.0) / 40.0,
            (range_c.1 - range_c.0) / 40.0,
        );
        plot = merge_plots(plot, codim2_plot("", &hopf));
        plot = merge_plots(plot, codim2_plot("", &fold));
        dedupe_legend(&mut plot);
        write_file(dir, "a_plane.svg", &io::render_svg(&plot))?;
    }

    if panel != Some('a') {
        let range_a2 = (0.1, 1.2);
        let (a2_h, hopf_state) =
            seed_hopf_in(&p, ParamId::A2, range_a2, EquilibriumKind::InteriorLow)?;
        let hopf = trace_locus_both(
            CurveId::Hopf,
            &p.with(ParamId::A2, a2_h),
            (ParamId::A1, ParamId::A2),
            &hopf_state,
            range_a1,
            range_a2,
            &cfg,
        )?;
        let interior = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
        let fold = trace_locus_both(
            CurveId::Fold,
            &p,
            (ParamId::A1, ParamId::A2),
            &interior,
            range_a1,
            range_a2,
            &cfg,
        )?;
        let bt = codim2_near(&hopf, Codim2Kind::BogdanovTakens, (0.019133, 0.274931));
        let gh = codim2_near(&hopf, Codim2Kind::GeneralizedHopf, (0.042954, 0.379816));
        manifest.check("b BT a1", 0.019133, bt.0, 2e-3);
        manifest.check("b BT a2", 0.274931, bt.1, 2e-3);
        manifest.check("b GH a1", 0.042954, gh.0, 2e-3);
        manifest.check("b GH a2", 0.379816, gh.1, 2e-3);
        manifest.note(
            "b: the Hopf curve is supercritical right of the Bautin point and subcritical left \
             of it; cusp comparisons live in fig4 (the (a3, c) one is report-only)",
        );
        let cells =
            region_map(&p, (ParamId::A1, ParamId::A2), range_a1, range_a2, 40, 40, ctx.jobs);

        write_file(dir, "b_hopf.csv", &io::codim2_curve_csv(&hopf))?;
        write_file(dir, "b_fold.csv", &io::codim2_curve_csv(&fold))?;
        write_file(dir, "b_region.csv", &io::region_csv(&cells))?;
        let mut specials = hopf.specials.clone();
        specials.extend(fold.specials.iter().copied());
        write_file(dir, "b_specials.csv", &io::codim2_specials_csv(&specials))?;

        let mut plot = io::region_plot(
            "regimes in (a1, a2)",
            "a1",
            "a2",
            &cells,
            (range_a1.1 - range_a1.0) / 40.0,
            (range_a2.1 - range_a2.0) / 40.0,
        );
        plot = merge_plots(plot, codim2_plot("", &hopf));
        plot = merge_plots(plot, codim2_plot("", &fold));
        dedupe_legend(&mut plot);
        write_file(dir, "b_plane.svg", &io::render_svg(&plot))?;
    }

    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig8 — branch, fold, Hopf, and cycle amplitudes in u.

fn fig8(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let p = Params::table2();
    let cfg = ContinuationConfig::default();
    let seed = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
    let curve =
        continue_equilibrium_both(&p, ParamId::U, &seed, (0.2, 0.9), &cfg).map_err(numerical)?;

    let mut manifest = Manifest::default();
    manifest.check(
        "LP u",
        0.281804,
        special_near(&curve, SpecialKind::Fold, 0.281804),
        1e-4,
    );
    let hopf = special_point_near(&curve, SpecialKind::Hopf, 0.833189);
    let u_h = hopf.map(|s| s.param).unwrap_or(f64::NAN);
    manifest.check("H u", 0.833189, u_h, 1e-4);
    let l1 = hopf.and_then(|s| s.l1);
    bool_check(&mut manifest, "l1 at H negative", l1.is_some_and(|v| v < 0.0));
    if let Some(l1) = l1 {
        manifest.note(format!(
            "l1 at the Hopf point: {l1:.6e} here vs published -1.502700e-2 — scaling follows \
             this library's reduction convention; the supercritical verdict is the comparison"
        ));
    }

    // Cycle envelope above the Hopf point.
    let values: Vec<f64> = [0.005, 0.012, 0.022, 0.035, 0.05, 0.065]
        .iter()
        .map(|d| u_h + d)
        .filter(|u| u.is_finite() && *u < 0.9)
        .collect();
    let rows = amplitude_sweep(&p, ParamId::U, &values)?;
    bool_check(
        &mut manifest,
        "cycle resolved on sweep",
        !rows.is_empty() && rows.iter().all(|r| r.resolved),
    );

    write_file(dir, "curve.csv", &io::curve_csv(&curve))?;
    write_file(dir, "specials.csv", &io::specials_csv(&curve.specials))?;
    write_file(dir, "amplitudes.csv", &amplitudes_csv(ParamId::U, &rows))?;
    let plot = balloon_plot("branch and cycle envelope in u", ParamId::U, &curve, &rows);
    write_file(dir, "balloon.svg", &io::render_svg(&plot))?;
    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig9 — phase portraits around the Hopf point in a3.

fn fig9(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let base = Params::table2();
    let mut manifest = Manifest::default();

    let (a3_h, _) = seed_hopf_in(&base, ParamId::A3, (0.02, 0.12), EquilibriumKind::InteriorLow)?;
    manifest.check("a3h", 0.0604877, a3_h, 1e-5);

    for (tag, a3, note) in [
        ('a', 0.055, "below the Hopf point: stable cycle"),
        ('b', 0.0604877, "at the Hopf point"),
        ('c', 0.084, "above the Hopf point: stable focus"),
    ] {
        let p = base.with(ParamId::A3, a3);
        let eq = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
        let (traj, attractor) = settle(&p, &kicked(&eq), 8000.0, 20000.0)?;
        manifest.note(format!("{tag}: a3 = {a3} ({note}) -> {}", verdict_text(&p, &traj)));
        match tag {
            'a' => bool_check(
                &mut manifest,
                "a3=0.055 limit cycle",
                matches!(attractor, Attractor::LimitCycle { .. }),
            ),
            'c' => bool_check(
                &mut manifest,
                "a3=0.084 settles on E4",
                matches!(
                    attractor,
                    Attractor::Equilibrium {
                        kind: EquilibriumKind::InteriorLow,
                        ..
                    }
                ),
            ),
            _ => {}
        }
        write_file(dir, &format!("{tag}.csv"), &io::trajectory_csv(&traj))?;
        let title = format!("phase portrait at a3 = {a3}");
        write_file(
            dir,
            &format!("{tag}.svg"),
            &io::render_svg(&phase_plot(&title, &traj)),
        )?;
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------
// fig10 — the double Hopf balloon in b.

fn fig10(ctx: &Ctx, dir: &Path) -> CliResult<Manifest> {
    let _ = ctx;
    let p = Params::table2();
    let cfg = ContinuationConfig::default();
    let seed = equilibrium_state(&p, EquilibriumKind::InteriorLow)?;
    let curve = continue_equilibrium_both(&p, ParamId::B, &seed, (0.004, 0.2), &cfg)
        .map_err(numerical)?;

    let mut manifest = Manifest::default();
    manifest.check(
        "LP b",
        0.005977,
        special_near(&curve, SpecialKind::Fold, 0.005977),
        1e-4,
    );
    let h1 = special_point_near(&curve, SpecialKind::Hopf, 0.032488);
    let h2 = special_point_near(&curve, SpecialKind::Hopf, 0.136940);
    let b1 = h1.map(|s| s.param).unwrap_or(f64::NAN);
    let b2 = h2.map(|s| s.param).unwrap_or(f64::NAN);
    manifest.check("H b (lower)", 0.032488, b1, 1e-4);
    manifest.check("H b (upper)", 0.136940, b2, 1e-4);
    bool_check(
        &mut manifest,
        "l1 negative at both H",
        h1.and_then(|s| s.l1).is_some_and(|v| v < 0.0)
            && h2.and_then(|s| s.l1).is_some_and(|v| v < 0.0),
    );
    manifest.note(
        "published Lyapunov quantities -1.619062e-2 and -7.177191e-2; both located points are \
         supercritical under this library's scaling as well",
    );

    // Cycle envelope across the balloon.
    let values: Vec<f64> = [0.08, 0.18, 0.33, 0.5, 0.67, 0.82, 0.93]
        .iter()
        .map(|f| b1 + f * (b2 - b1))
        .filter(|b| b.is_finite())
        .collect();
    let rows = amplitude_sweep(&p, ParamId::B, &values)?;
    bool_check(
        &mut manifest,
        "cycle resolved on sweep",
        !rows.is_empty() && rows.iter().all(|r| r.resolved),
    );

    write_file(dir, "curve.csv", &io::curve_csv(&curve))?;
    write_file(dir, "specials.csv", &io::specials_csv(&curve.specials))?;
    write_file(dir, "amplitudes.csv", &amplitudes_csv(ParamId::B, &rows))?;
    let plot = balloon_plot("branch and cycle balloon in b", ParamId::B, &curve, &rows);
    write_file(dir, "balloon.svg", &io::render_svg(&plot))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_split_into_base_and_panel() {
        assert_eq!(split_panel("fig7b"), ("fig7", Some('b')));
        assert_eq!(split_panel("fig1a"), ("fig1", Some('a')));
        assert_eq!(split_panel("fig10"), ("fig10", None));
        assert_eq!(split_panel("fig4"), ("fig4", None));
        assert_eq!(split_panel("figa"), ("figa", None));
    }
}
