//! Deterministic SVG rendering: diverging heat maps of dependence surfaces
//! and scatter plots of pseudo-observations.
//!
//! Every byte of the output is a pure function of the inputs — no
//! timestamps, random ids, or environment lookups — so identical inputs
//! render identical files. All renders share one fixed diverging color
//! scale (blue below zero, white at zero, red above) anchored at
//! [`SCALE_ANCHOR`]; the anchor is embedded in the `<desc>` element so two
//! files can be checked for a common value-to-color mapping by comparing
//! those lines.

use crate::depfn::DependenceSurface;

/// Fixed color-scale anchor: values at `±SCALE_ANCHOR` map to the palette
/// endpoints. Chosen beyond every magnitude the estimators produce on real
/// grids, so one scale serves all renders.
pub const SCALE_ANCHOR: f64 = 17.0;

/// Palette endpoint for strongly negative values (blue).
const NEGATIVE_RGB: (u8, u8, u8) = (33, 102, 172);
/// Palette endpoint for strongly positive values (red).
const POSITIVE_RGB: (u8, u8, u8) = (178, 24, 43);

const MARGIN_LEFT: f64 = 60.0;
const MARGIN_TOP: f64 = 20.0;
const PLOT: f64 = 480.0;
const WIDTH: f64 = 580.0;
const HEIGHT: f64 = 580.0;

/// Rendering options for [`heatmap_svg`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMapSpec {
    /// Values at `±scale_anchor` saturate the palette.
    pub scale_anchor: f64,
    /// Draw `+`/`-` glyphs on the cells. `None` enables the overlay
    /// exactly when the surface carries both signs.
    pub sign_overlay: Option<bool>,
    /// Caption drawn under the plot, e.g. `L_* = -0.2, L^* = 12.2`.
    pub caption: String,
}

impl HeatMapSpec {
    /// Spec with the shared default scale and automatic sign overlay.
    pub fn new(caption: impl Into<String>) -> Self {
        Self {
            scale_anchor: SCALE_ANCHOR,
            sign_overlay: None,
            caption: caption.into(),
        }
    }
}

/// Maps a value to a diverging hex color: white at 0, saturating to blue at
/// `-anchor` and red at `+anchor`.
pub fn diverging_color(value: f64, anchor: f64) -> String {
    let t = (value / anchor).clamp(-1.0, 1.0);
    let target = if t >= 0.0 { POSITIVE_RGB } else { NEGATIVE_RGB };
    let mix = |c: u8| -> u8 {
        let f = 255.0 + (c as f64 - 255.0) * t.abs();
        f.round() as u8
    };
    format!("#{:02x}{:02x}{:02x}", mix(target.0), mix(target.1), mix(target.2))
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_len(x: f64) -> String {
    format!("{x:.3}")
}

fn svg_open(desc: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<desc>{desc}</desc>\n\
         <rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>\n",
        w = WIDTH,
        h = HEIGHT,
        desc = esc(desc),
    )
}

fn frame_and_axes(out: &mut String) {
    out.push_str(&format!(
        "<rect x=\"{x}\" y=\"{y}\" width=\"{p}\" height=\"{p}\" fill=\"none\" \
         stroke=\"#000000\" stroke-width=\"1\"/>\n",
        x = fmt_len(MARGIN_LEFT),
        y = fmt_len(MARGIN_TOP),
        p = fmt_len(PLOT),
    ));
    // Tick labels at the unit-square corners and axis names.
    let x0 = MARGIN_LEFT;
    let x1 = MARGIN_LEFT + PLOT;
    let y0 = MARGIN_TOP + PLOT;
    let label = |out: &mut String, x: f64, y: f64, anchor: &str, text: &str| {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"14\" \
             text-anchor=\"{anchor}\" fill=\"#000000\">{}</text>\n",
            fmt_len(x),
            fmt_len(y),
            esc(text),
        ));
    };
    label(out, x0, y0 + 20.0, "middle", "0");
    label(out, x1, y0 + 20.0, "middle", "1");
    label(out, (x0 + x1) / 2.0, y0 + 38.0, "middle", "u");
    label(out, x0 - 10.0, y0, "end", "0");
    label(out, x0 - 10.0, MARGIN_TOP + 12.0, "end", "1");
    label(out, x0 - 30.0, MARGIN_TOP + PLOT / 2.0, "middle", "v");
}

fn caption_line(out: &mut String, caption: &str) {
    if caption.is_empty() {
        return;
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\" fill=\"#000000\">{}</text>\n",
        fmt_len(MARGIN_LEFT + PLOT / 2.0),
        fmt_len(HEIGHT - 12.0),
        esc(caption),
    ));
}

/// Renders a surface as a heat map. Each grid value colors the square of
/// side `1/g` whose upper-right corner sits at its grid point, on the
/// diverging scale fixed by the [`HeatMapSpec`].
pub fn heatmap_svg(surface: &DependenceSurface, spec: &HeatMapSpec) -> String {
    let g = surface.grid().g() as f64;
    let cell = PLOT / g;
    let overlay = spec
        .sign_overlay
        .unwrap_or_else(|| surface.min() < 0.0 && surface.max() > 0.0);
    let desc = format!(
        "diverging scale: anchor={} white_at=0 negative=rgb{:?} positive=rgb{:?}",
        spec.scale_anchor, NEGATIVE_RGB, POSITIVE_RGB
    );
    let mut out = svg_open(&desc);
    for (u, v, value) in surface.iter_points() {
        let x = MARGIN_LEFT + PLOT * u - cell;
        let y = MARGIN_TOP + PLOT * (1.0 - v);
        out.push_str(&format!(
            "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
            fmt_len(x),
            fmt_len(y),
            fmt_len(cell),
            fmt_len(cell),
            diverging_color(value, spec.scale_anchor),
        ));
    }
    if overlay {
        for (u, v, value) in surface.iter_points() {
            if value == 0.0 {
                continue;
            }
            let glyph = if value > 0.0 { "+" } else { "-" };
            let x = MARGIN_LEFT + PLOT * u - cell / 2.0;
            let y = MARGIN_TOP + PLOT * (1.0 - v) + cell / 2.0;
            out.push_str(&format!(
                "<text class=\"sign\" x=\"{}\" y=\"{}\" font-family=\"monospace\" \
                 font-size=\"{}\" text-anchor=\"middle\" dominant-baseline=\"central\" \
                 fill=\"#000000\">{glyph}</text>\n",
                fmt_len(x),
                fmt_len(y),
                fmt_len(cell * 0.6),
            ));
        }
    }
    frame_and_axes(&mut out);
    caption_line(&mut out, &spec.caption);
    out.push_str("</svg>\n");
    out
}

/// Renders points of the unit square (pseudo-observations) as a scatter
/// plot with the same frame and caption conventions as the heat maps.
pub fn scatter_svg(points: &[(f64, f64)], caption: &str) -> String {
    let mut out = svg_open("scatter of pseudo-observations on the unit square");
    for &(u, v) in points {
        out.push_str(&format!(
            "<circle class=\"pt\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#2166ac\" \
             fill-opacity=\"0.75\"/>\n",
            fmt_len(MARGIN_LEFT + PLOT * u),
            fmt_len(MARGIN_TOP + PLOT * (1.0 - v)),
        ));
    }
    frame_and_axes(&mut out);
    caption_line(&mut out, caption);
    out.push_str("</svg>\n");
    out
}
