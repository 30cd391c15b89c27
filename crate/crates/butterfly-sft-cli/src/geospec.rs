//! Geometry specification strings:
//! `kind[:key=value,...]` with kinds `ellipse`, `ellipse-k`, `circle`,
//! `star`, `spiral`, `sphere`, `torus`, and `mesh:<path>` / `obj:<path>`.

use butterfly_sft::geometry::{CurvePreset, GeometrySpec};

use crate::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse(spec: &str, dim: usize) -> Result<GeometrySpec, CliError> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k.trim(), r.trim()),
        None => (spec.trim(), ""),
    };

    // mesh paths may contain anything, so handle them before key=value
    if kind == "mesh" || kind == "obj" {
        if rest.is_empty() {
            return Err(usage("mesh spec needs a path: mesh:<file.obj>"));
        }
        let spec = GeometrySpec::Mesh3d { path: rest.into() };
        return check_dim(spec, dim);
    }

    let mut params: Vec<(String, f64)> = Vec::new();
    if !rest.is_empty() {
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| usage(format!("bad geometry parameter {part:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad geometry value {part:?}")))?;
            params.push((k.trim().to_string(), v));
        }
    }
    let get = |key: &str, default: f64| -> f64 {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .unwrap_or(default)
    };

    let spec = match kind {
        "ellipse" => GeometrySpec::Ellipse2d {
            center: [get("cx", 0.5), get("cy", 0.5)],
            semi_axes: [get("a", 0.49), get("b", 0.46)],
        },
        "ellipse-k" => GeometrySpec::Ellipse2d {
            center: [get("cx", 0.5), get("cy", 0.5)],
            semi_axes: [get("a", 0.46), get("b", 0.49)],
        },
        "circle" => {
            let r = get("r", 0.25);
            GeometrySpec::Ellipse2d {
                center: [get("cx", 0.5), get("cy", 0.5)],
                semi_axes: [r, r],
            }
        }
        "star" => GeometrySpec::Parametric2d(CurvePreset::Star),
        "spiral" => GeometrySpec::Parametric2d(CurvePreset::Spiral),
        "sphere" => GeometrySpec::Sphere3d {
            center: [get("cx", 0.5), get("cy", 0.5), get("cz", 0.5)],
            radius: get("r", 0.45),
        },
        "torus" => GeometrySpec::Torus3d {
            center: [get("cx", 0.5), get("cy", 0.5), get("cz", 0.5)],
            major_radius: get("R", 0.3),
            minor_radius: get("r", 0.15),
        },
        other => {
            return Err(usage(format!(
                "unknown geometry kind {other:?}; expected ellipse, ellipse-k, circle, star, \
                 spiral, sphere, torus, or mesh:<path>"
            )))
        }
    };
    check_dim(spec, dim)
}

fn check_dim(spec: GeometrySpec, dim: usize) -> Result<GeometrySpec, CliError> {
    if spec.dim() != dim {
        return Err(usage(format!(
            "geometry {spec:?} is {}-dimensional but dim = {dim}",
            spec.dim()
        )));
    }
    Ok(spec)
}
