//! Artifact export: CSV trajectories, deterministic controller JSON, and
//! SVG workspace plots.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::PipelineError;
use crate::grid::Workspace;
use crate::pipeline::SynthesisBundle;
use crate::refine::{valid_set_2d, LeafId, SynthesizedController};
use crate::simulate::TrajectoryRecord;

const CSV_HEADER: &str = "t,x,y,theta,v,omega,mode,plan,step";

fn csv_field(values: &[f64], i: usize) -> String {
    values.get(i).map(|v| format!("{v}")).unwrap_or_default()
}

/// CSV rendering of a trajectory; states and inputs beyond the column
/// layout (x, y, theta, v, omega) are omitted, missing ones left blank.
pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &record.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.t,
            csv_field(&s.state, 0),
            csv_field(&s.state, 1),
            csv_field(&s.state, 2),
            csv_field(&s.input, 0),
            csv_field(&s.input, 1),
            s.mode.as_str(),
            s.plan,
            s.step
        );
    }
    out
}

#[derive(Serialize)]
struct LeafJson {
    id: LeafId,
    cell: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Plan steps at which the leaf is valid.
    valid_steps: Vec<usize>,
    /// Index into `inputs`; absent for uncontrolled leaves.
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<usize>,
}

#[derive(Serialize)]
struct ControllerJson {
    plan: Vec<usize>,
    tau: f64,
    projection_2d: bool,
    iterations: usize,
    inputs: Vec<Vec<f64>>,
    leaves: Vec<LeafJson>,
}

/// Deterministic JSON rendering of one synthesized controller: leaves in
/// stable ID order, so identical synthesis runs serialize byte-identically.
pub fn controller_json(ctrl: &SynthesizedController) -> String {
    let mut ids: Vec<LeafId> = ctrl
        .plan
        .cells
        .iter()
        .flat_map(|&c| ctrl.store.leaves_of(c).iter().copied())
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let leaves = ids
        .into_iter()
        .map(|id| {
            let b = ctrl.store.leaf_box(id);
            LeafJson {
                id,
                cell: ctrl.store.cell_of(id),
                lo: b.lo().to_vec(),
                hi: b.hi().to_vec(),
                valid_steps: (0..ctrl.valid.len())
                    .filter(|&k| ctrl.valid[k].contains(&id))
                    .collect(),
                input: ctrl.control.get(&id).copied(),
            }
        })
        .collect();
    let doc = ControllerJson {
        plan: ctrl.plan.cells.clone(),
        tau: ctrl.tau,
        projection_2d: ctrl.projection_2d,
        iterations: ctrl.iterations,
        inputs: ctrl.inputs.clone(),
        leaves,
    };
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

/// SVG plot of the workspace: grid, obstacles, labeled regions, optionally
/// the 2D projections of each controller's valid sets and a trajectory.
pub fn workspace_svg(
    ws: &Workspace,
    bundle: Option<&SynthesisBundle>,
    trajectory: Option<&TrajectoryRecord>,
) -> String {
    let p = &ws.partition;
    assert!(p.dim() >= 1, "nothing to plot");
    let two_d = p.dim() >= 2;
    let (wx, wy) = (
        p.workspace().width(0),
        if two_d { p.workspace().width(1) } else { 1.0 },
    );
    let scale = 24.0;
    let (width, height) = (wx * scale, wy * scale);
    let x0 = p.workspace().lo()[0];
    let y0 = if two_d { p.workspace().lo()[1] } else { 0.0 };
    // workspace y grows upwards, SVG y downwards
    let tx = |x: f64| (x - x0) * scale;
    let ty = |y: f64| height - (y - y0) * scale;

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width:.1} {height:.1}\" \
         width=\"{width:.1}\" height=\"{height:.1}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{width:.1}\" height=\"{height:.1}\" \
         fill=\"white\" stroke=\"black\"/>\n"
    );

    // valid-set projections, shaded per controller
    if let Some(b) = bundle {
        for ctrl in &b.controllers {
            for k in 0..ctrl.valid.len() {
                for vb in valid_set_2d(&ctrl.store, ws, &ctrl.valid[k]) {
                    let (bx, by) = (vb.lo()[0], if two_d { vb.lo()[1] } else { 0.0 });
                    let (bw, bh) = (vb.width(0), if two_d { vb.width(1) } else { 1.0 });
                    let _ = writeln!(
                        svg,
                        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                         fill=\"#7fbf7f\" fill-opacity=\"0.25\"/>",
                        tx(bx),
                        ty(by + bh),
                        bw * scale,
                        bh * scale
                    );
                }
            }
        }
    }

    // obstacles
    for &c in &ws.obstacles {
        let b = p.cell_box(c);
        let (bx, by) = (b.lo()[0], if two_d { b.lo()[1] } else { 0.0 });
        let (bw, bh) = (b.width(0), if two_d { b.width(1) } else { 1.0 });
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"black\"/>",
            tx(bx),
            ty(by + bh),
            bw * scale,
            bh * scale
        );
    }

    // grid lines
    for i in 0..=p.counts()[0] {
        let x = tx(x0 + i as f64 * p.cell_size(0));
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"0\" x2=\"{x:.2}\" y2=\"{height:.1}\" \
             stroke=\"#cccccc\" stroke-width=\"0.5\"/>"
        );
    }
    if two_d {
        for j in 0..=p.counts()[1] {
            let y = ty(y0 + j as f64 * p.cell_size(1));
            let _ = writeln!(
                svg,
                "<line x1=\"0\" y1=\"{y:.2}\" x2=\"{width:.1}\" y2=\"{y:.2}\" \
                 stroke=\"#cccccc\" stroke-width=\"0.5\"/>"
            );
        }
    }

    // region labels
    let mut rois: Vec<(&String, &usize)> = ws.rois.iter().collect();
    rois.sort();
    for (name, &c) in rois {
        let b = p.cell_box(c);
        let cx = tx((b.lo()[0] + b.hi()[0]) / 2.0);
        let cy = if two_d {
            ty((b.lo()[1] + b.hi()[1]) / 2.0)
        } else {
            height / 2.0
        };
        let _ = writeln!(
            svg,
            "<text x=\"{cx:.2}\" y=\"{cy:.2}\" font-size=\"{:.1}\" text-anchor=\"middle\" \
             dominant-baseline=\"middle\" fill=\"#1f4e9c\">{name}</text>",
            0.6 * scale
        );
    }

    // trajectory polyline
    if let Some(traj) = trajectory {
        if !traj.samples.is_empty() {
            let pts: Vec<String> = traj
                .samples
                .iter()
                .map(|s| {
                    let x = tx(s.state[0]);
                    let y = if two_d { ty(s.state[1]) } else { height / 2.0 };
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#c02020\" stroke-width=\"1.5\"/>",
                pts.join(" ")
            );
        }
    }

    svg.push_str("</svg>\n");
    svg
}

pub fn write_trajectory_csv(record: &TrajectoryRecord, path: &Path) -> Result<(), PipelineError> {
    std::fs::write(path, trajectory_csv(record)).map_err(PipelineError::Io)
}

pub fn write_controller_json(
    ctrl: &SynthesizedController,
    path: &Path,
) -> Result<(), PipelineError> {
    std::fs::write(path, controller_json(ctrl)).map_err(PipelineError::Io)
}

pub fn write_svg(
    ws: &Workspace,
    bundle: Option<&SynthesisBundle>,
    trajectory: Option<&TrajectoryRecord>,
    path: &Path,
) -> Result<(), PipelineError> {
    std::fs::write(path, workspace_svg(ws, bundle, trajectory)).map_err(PipelineError::Io)
}
