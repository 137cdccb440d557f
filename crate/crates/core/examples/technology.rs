// SPDX-License-Identifier: Apache-2.0

//! Loads the bundled technology and prints its delay model: widget delays,
//! the microstrip break-even length and the library clock bound.

use sfq_route::techlib::{ptl_delay, widget_delay, Technology, WidgetKind};

fn main() {
    let tech = Technology::desk_nb04();
    let d = &tech.delays;
    println!("technology {} (pitch {} mm, {} layers)", tech.name, tech.pitch_mm, tech.layers.len());
    for l in &tech.layers {
        println!("  layer {}: jtl={} ptl={} msl axis {:?}", l.index, l.jtl_enabled, l.ptl_enabled, l.ptl_direction());
    }
    for k in [WidgetKind::Jtl2, WidgetKind::Jtl3, WidgetKind::Jtl4, WidgetKind::LongJtl, WidgetKind::Msl] {
        println!("  {:<8} {} ps/unit", k.name(), widget_delay(k, 1, d).unwrap());
    }
    let be = tech.breakeven_length();
    println!("microstrip break-even: {be} units");
    for len in be - 1..=be + 2 {
        println!("  {len:>2} units: JTL2 {:>7} ps  PTL {:>7} ps", d.t_jtl2 * i64::from(len), ptl_delay(len, d));
    }
    let bound = tech.library_clock_bound();
    println!("library clock bound {bound} ps = {:.2} GHz", bound.frequency_ghz());
}
