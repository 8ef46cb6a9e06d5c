//! SVG export of basin maps: a colored angle strip for planar scenarios,
//! an equirectangular projection for spheres. The palette is keyed by
//! critical-point index so runs are comparable; no timestamps or other
//! non-reproducible metadata are emitted.

use super::{BasinMap, GridShape, SeedLabel};

/// Color-blind-friendly palette; indices beyond the palette wrap around.
pub const PALETTE: [&str; 12] = [
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377", "#332288", "#ddcc77",
    "#117733", "#882255", "#44aa99", "#999933",
];
pub const UNRESOLVED_COLOR: &str = "#e0e0e0";
pub const FAILED_COLOR: &str = "#1a1a1a";

fn label_color(label: &SeedLabel) -> &'static str {
    match label {
        SeedLabel::Critical(i) => PALETTE[i % PALETTE.len()],
        SeedLabel::Unresolved => UNRESOLVED_COLOR,
        SeedLabel::Failed => FAILED_COLOR,
    }
}

/// Render the basin map. `header` is embedded as an XML comment (double
/// hyphens are stripped to keep the comment well-formed).
pub fn basin_svg(map: &BasinMap, header: &str) -> String {
    let comment = header.replace("--", "-");
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!("<!--\n{comment}\n-->\n"));
    match map.shape {
        GridShape::CircleAngles { n } => {
            let cell = 4.0_f64;
            let width = n as f64 * cell;
            let height = 60.0;
            out.push_str(&format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" width=\"{width}\" height=\"{height}\">\n"
            ));
            for (x0, run, color) in runs(&map.labels[..]) {
                out.push_str(&format!(
                    "<rect x=\"{:.1}\" y=\"0\" width=\"{:.1}\" height=\"{height}\" fill=\"{color}\"/>\n",
                    x0 as f64 * cell,
                    run as f64 * cell,
                ));
            }
            out.push_str("</svg>\n");
        }
        GridShape::Equirect { rows, cols } => {
            let cell = 4.0_f64;
            let width = cols as f64 * cell;
            let height = rows as f64 * cell;
            out.push_str(&format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" width=\"{width}\" height=\"{height}\">\n"
            ));
            for row in 0..rows {
                let y0 = row as f64 * cell;
                let slice = &map.labels[row * cols..(row + 1) * cols];
                for (x0, run, color) in runs(slice) {
                    out.push_str(&format!(
                        "<rect x=\"{:.1}\" y=\"{y0:.1}\" width=\"{:.1}\" height=\"{cell:.1}\" fill=\"{color}\"/>\n",
                        x0 as f64 * cell,
                        run as f64 * cell,
                    ));
                }
            }
            out.push_str("</svg>\n");
        }
    }
    out
}

/// Run-length encode a label row as (start, length, color).
fn runs(labels: &[SeedLabel]) -> Vec<(usize, usize, &'static str)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < labels.len() {
        let color = label_color(&labels[i]);
        let mut j = i + 1;
        while j < labels.len() && label_color(&labels[j]) == color {
            j += 1;
        }
        out.push((i, j - i, color));
        i = j;
    }
    out
}
