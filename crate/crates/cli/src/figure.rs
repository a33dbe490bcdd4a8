//! Boundary-arc figures as SVG polylines or CSV samples.

use std::fmt::Write as _;

use diskchain::cdomain::{boundary_samples, component_boundary_point, contains, DomainComponent};
use diskchain::{DomainSpec, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Svg,
    Csv,
}

/// `component_index,x,y`, one row per kept boundary sample.
pub fn to_csv(spec: &DomainSpec, samples: usize) -> Result<String> {
    let mut out = String::from("component_index,x,y\n");
    for (j, z) in boundary_samples(spec, samples)? {
        writeln!(out, "{j},{},{}", z.re, z.im).unwrap();
    }
    Ok(out)
}

/// Maximal runs of consecutive kept samples on component `j`; runs on
/// circles wrap around.
fn arcs(spec: &DomainSpec, j: usize, samples: usize) -> Result<Vec<Vec<C64>>> {
    let kept: Vec<Option<C64>> = (0..samples)
        .map(|i| {
            let z = component_boundary_point(spec, j, i as f64 / samples as f64)?;
            let ok = spec.components.iter().enumerate().all(|(l, c)| l == j || c.contains(z, false));
            Ok(ok.then_some(z))
        })
        .collect::<Result<_>>()?;
    let mut runs: Vec<Vec<C64>> = Vec::new();
    let mut cur = Vec::new();
    for z in &kept {
        match z {
            Some(z) => cur.push(*z),
            None if !cur.is_empty() => runs.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    let circle = !matches!(spec.components[j], DomainComponent::HalfPlane { .. });
    if circle && runs.len() > 1 && kept[0].is_some() && kept[samples - 1].is_some() {
        let first = runs.remove(0);
        runs.last_mut().expect("nonempty").extend(first);
    }
    if circle && runs.len() == 1 && kept.iter().all(Option::is_some) {
        let z0 = runs[0][0];
        runs[0].push(z0);
    }
    Ok(runs)
}

/// Ω in black; holes dashed red; half-planes blue. The optional second set
/// (typically the scaled domain) is drawn thinner in grey.
pub fn to_svg(spec: &DomainSpec, extra: Option<&DomainSpec>, samples: usize) -> Result<String> {
    let (c, r) = spec.bounding_disk().unwrap_or((C64::new(0.0, 0.0), 1.0));
    let pad = 0.1 * r;
    let (x0, y0, w) = (c.re - r - pad, -(c.im + r + pad), 2.0 * (r + pad));
    let size = 480.0;
    let stroke = 1.5; // screen pixels; see vector-effect below
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="{x0} {y0} {w} {w}">"#
    )
    .unwrap();
    let mut draw = |spec: &DomainSpec, scale: f64, grey: bool| -> Result<()> {
        for j in 0..spec.k() {
            let (colour, dash) = match spec.components[j] {
                DomainComponent::Disk { .. } => ("black", ""),
                DomainComponent::Hole { .. } => ("#c0392b", r#" stroke-dasharray="4 2""#),
                DomainComponent::HalfPlane { .. } => ("#2c6fbb", ""),
            };
            let colour = if grey { "#888888" } else { colour };
            for arc in arcs(spec, j, samples)? {
                if arc.len() < 2 {
                    continue;
                }
                let pts: Vec<String> = arc.iter().map(|z| format!("{:.6},{:.6}", z.re, -z.im)).collect();
                writeln!(
                    out,
                    r#"<polyline class="component-{j}" fill="none" stroke="{colour}" stroke-width="{:.6}" vector-effect="non-scaling-stroke"{dash} points="{}"/>"#,
                    stroke * scale,
                    pts.join(" ")
                )
                .unwrap();
            }
        }
        Ok(())
    };
    draw(spec, 1.0, false)?;
    if let Some(e) = extra {
        draw(e, 0.6, true)?;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// True when some strict interior point exists on a coarse lattice.
pub fn looks_nonempty(spec: &DomainSpec) -> bool {
    diskchain::cdomain::empty_probe(spec, 256).is_some_and(|z| contains(spec, z, true))
}
