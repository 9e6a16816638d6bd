//! Shipped figure configurations.

use super::config::Panel;

pub fn preset(panel: Panel) -> &'static str {
    match panel {
        Panel::P1a => include_str!("../../configs/fig1a.json"),
        Panel::P1b => include_str!("../../configs/fig1b.json"),
        Panel::P2a => include_str!("../../configs/fig2a.json"),
        Panel::P2b => include_str!("../../configs/fig2b.json"),
        Panel::P3a => include_str!("../../configs/fig3a.json"),
        Panel::P3b => include_str!("../../configs/fig3b.json"),
        Panel::P3c => include_str!("../../configs/fig3c.json"),
        Panel::P3d => include_str!("../../configs/fig3d.json"),
    }
}

/// Single-mode panel reproducing the `n_b = 0` levels of a two-mode panel.
pub fn single_mode_partner(panel: Panel) -> Option<Panel> {
    match panel {
        Panel::P3a => Some(Panel::P3b),
        Panel::P3c => Some(Panel::P3d),
        _ => None,
    }
}
