// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use super::*;
use crate::bench;
use crate::design::{build_route_map, Design};
use crate::global::{commit_tree, route_design, GlobalConfig};
use crate::techlib::LayerProfile;
use crate::tree::NetTree;
use crate::validate::validate_routing;

fn ps(v: f64) -> Time {
    Time::from_ps(v)
}

fn chain2(tech: &Technology) -> Design {
    bench::generate(&bench::by_name("chain2").unwrap()).load(tech).unwrap()
}

/// Net of `chain2` used as a free-standing wire in the tests below.
const NET: usize = 3;

fn line(n: usize, y: i32) -> Vec<(GridCoord, WidgetKind)> {
    (0..n).map(|x| (GridCoord::new(x as i32 + 1, y, 0), WidgetKind::Jtl2)).collect()
}

/// Router over an empty 40x16 map holding only `tree` on net `NET`.
fn rig<'a>(design: &'a Design, tech: &'a Technology, tree: NetTree, cfg: OptimizerConfig) -> DetailedRouter<'a> {
    let mut map = RouteMap::new(40, 16, tech.layers.clone());
    commit_tree(&mut map, &tree);
    let mut trees = vec![None; design.nets.len()];
    trees[NET] = Some(tree);
    DetailedRouter::new(design, tech, trees, map, cfg)
}

fn single(n: usize) -> NetTree {
    NetTree::from_path(NET, 1, 0, &line(n, 5))
}

fn wire(r: &DetailedRouter<'_>, s: usize) -> Time {
    r.tracker.wire[NET][s].unwrap()
}

#[test]
fn one_upgrade_covers_a_junction_step() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, single(6), OptimizerConfig::default());
    let w = wire(&r, 0);
    let short = r.fix_hold(NET, &[Some(w + ps(1.5))], false);
    assert_eq!(r.log.len(), 1);
    assert_eq!((r.log[0].old, r.log[0].new), (WidgetKind::Jtl2, WidgetKind::Jtl3));
    assert_eq!(short, vec![Time::ZERO]);
    assert_eq!(wire(&r, 0), w + ps(1.5));
}

#[test]
fn no_violation_means_no_substitution() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, single(6), OptimizerConfig::default());
    let w = wire(&r, 0);
    r.fix_hold(NET, &[Some(w)], false);
    assert!(r.log.is_empty());
}

#[test]
fn saturated_segment_reports_residual() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, single(6), OptimizerConfig::default());
    let w = wire(&r, 0);
    let need = ps(100.0);
    let short = r.fix_hold(NET, &[Some(w + need)], false);
    let capacity = (tech.delays.t_jtl4 - tech.delays.t_jtl2) * 6;
    assert_eq!(short[0], need - capacity);
    assert!(r.tree(NET).unwrap().nodes.iter().all(|n| n.kind == WidgetKind::Jtl4));
}

#[test]
fn seven_node_run_becomes_microstrip() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    // Endpoints are not straight, so the run is the 7 interior nodes.
    let mut r = rig(&d, &tech, single(9), OptimizerConfig::default());
    let blocked = RouteMap::new(40, 16, tech.layers.clone());
    let w = wire(&r, 0);
    assert_eq!(w, ps(36.0));
    let seg = r.segments(NET).remove(0);
    let removed = r.shorten_segment(NET, &seg, &[Some(Time::ZERO)]);
    assert_eq!(removed, ps(28.0) - ps(19.0));
    let kinds: Vec<WidgetKind> = r.tree(NET).unwrap().nodes.iter().map(|n| n.kind).collect();
    let mut expect = vec![WidgetKind::Jtl2, WidgetKind::Driver];
    expect.extend([WidgetKind::Msl; 5]);
    expect.extend([WidgetKind::Receiver, WidgetKind::Jtl2]);
    assert_eq!(kinds, expect);
    let msl_layers: Vec<u8> =
        r.tree(NET).unwrap().nodes.iter().filter(|n| n.kind == WidgetKind::Msl).map(|n| n.coord.layer).collect();
    assert_eq!(msl_layers, vec![2; 5]);
    assert!(validate_routing(&blocked, &r.map, &r.trees).is_empty());
    assert_eq!(r.recomputed(), r.tracker);
}

#[test]
fn short_run_gets_long_jtls_only() {
    let tech = Technology::desk_nb04();
    assert_eq!(tech.breakeven_length(), 5);
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, single(6), OptimizerConfig::default());
    let seg = r.segments(NET).remove(0);
    let removed = r.shorten_segment(NET, &seg, &[Some(Time::ZERO)]);
    let kinds: Vec<WidgetKind> = r.tree(NET).unwrap().nodes.iter().map(|n| n.kind).collect();
    assert!(!kinds.iter().any(|k| k.is_ptl()));
    assert_eq!(kinds.iter().filter(|&&k| k == WidgetKind::LongJtl).count(), 4);
    assert_eq!(removed, (tech.delays.t_jtl2 - tech.delays.t_longjtl) * 4);
}

#[test]
fn no_headroom_no_shortening() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, single(9), OptimizerConfig::default());
    let w = wire(&r, 0);
    let seg = r.segments(NET).remove(0);
    assert_eq!(r.shorten_segment(NET, &seg, &[Some(w)]), Time::ZERO);
    assert!(r.log.is_empty());
}

#[test]
fn in_place_microstrip_when_layers_are_shared() {
    let tech = Technology::desk_nb04().with_layer_profile(LayerProfile::Nb03);
    let d = chain2(&tech);
    let cfg = OptimizerConfig { allow_ptl_on_jtl_layers: true, ..Default::default() };
    let mut r = rig(&d, &tech, single(9), cfg);
    let seg = r.segments(NET).remove(0);
    assert_eq!(r.shorten_segment(NET, &seg, &[Some(Time::ZERO)]), ps(9.0));
    assert!(r.tree(NET).unwrap().nodes.iter().all(|n| n.coord.layer == 0));
    let blocked = RouteMap::new(40, 16, tech.layers.clone());
    assert!(validate_routing(&blocked, &r.map, &r.trees).is_empty());

    let mut r = rig(&d, &tech, single(9), OptimizerConfig::default());
    let seg = r.segments(NET).remove(0);
    r.shorten_segment(NET, &seg, &[Some(Time::ZERO)]);
    assert!(!r.tree(NET).unwrap().nodes.iter().any(|n| n.kind.is_ptl()));
}

/// Two sinks below a splitter; branch 0 is 3 ps faster than branch 1.
fn forked(extra: usize) -> NetTree {
    let trunk: Vec<_> = (0..3).map(|x| (GridCoord::new(x + 1, 8, 0), WidgetKind::Jtl2)).collect();
    let mut t = NetTree::from_path(NET, 2, 0, &trunk);
    let a: Vec<_> = (0..3 + extra as i32).map(|y| (GridCoord::new(3, 9 + y, 0), WidgetKind::Jtl2)).collect();
    t.attach(2, 0, &a);
    let mut b: Vec<_> = (0..3 + extra as i32).map(|y| (GridCoord::new(3, 7 - y, 0), WidgetKind::Jtl2)).collect();
    b[0].1 = WidgetKind::Jtl4;
    t.attach(2, 1, &b);
    t
}

#[test]
fn branch_skew_is_balanced() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, forked(0), OptimizerConfig::default());
    let (a, b) = (wire(&r, 0), wire(&r, 1));
    assert_eq!(b - a, ps(3.0));
    r.fix_hold(NET, &[Some(b), Some(b)], true);
    assert_eq!(wire(&r, 0), wire(&r, 1));
    assert_eq!(r.log.len(), 2);
    assert!(r.log.iter().all(|s| r.tracker.label(NET, s.node) == [0]));
}

#[test]
fn capacity_limits_branch_balance() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = rig(&d, &tech, forked(0), OptimizerConfig::default());
    let (a, b) = (wire(&r, 0), wire(&r, 1));
    let short = r.fix_hold(NET, &[Some(a + ps(20.0)), Some(b)], true);
    let capacity = (tech.delays.t_jtl4 - tech.delays.t_jtl2) * 3;
    assert_eq!(short[0], ps(20.0) - capacity);
    // The trunk also feeds a sink already on target.
    assert!(r.tree(NET).unwrap().nodes[..3].iter().all(|n| n.kind != WidgetKind::Jtl3));
}

#[test]
fn retime_step_is_half_the_slack_gap() {
    assert_eq!(phases::retime_delta(Some(ps(8.0)), Some(ps(2.0))), ps(3.0));
    assert_eq!(phases::retime_delta(Some(ps(4.0)), Some(ps(4.0))), Time::ZERO);
    assert_eq!(phases::retime_delta(Some(ps(2.0)), Some(ps(8.0))), ps(-3.0));
    assert_eq!(phases::retime_delta(None, Some(ps(-2.0))), ps(2.0));
    assert_eq!(phases::retime_delta(Some(ps(-2.0)), None), ps(-2.0));
}

fn routed<'a>(design: &'a Design, tech: &'a Technology, cfg: OptimizerConfig) -> DetailedRouter<'a> {
    let map = build_route_map(design, tech).unwrap();
    let r = route_design(design, map, &GlobalConfig::default());
    assert!(r.failed.is_empty());
    DetailedRouter::new(design, tech, r.trees, r.map, cfg)
}

#[test]
fn input_gap_is_closed_without_crossing() {
    let mut tech = Technology::desk_nb04();
    tech.delays.t_jtl3 = tech.delays.t_jtl2 + ps(1.0);
    tech.delays.t_jtl4 = tech.delays.t_jtl2 + ps(2.0);
    let d = chain2(&tech);
    let mut r = routed(&d, &tech, OptimizerConfig::default());
    let e = r.tracker.graph.inputs[0];
    let leaf = r.leaf_nodes(e.net, e.sink);
    // Leave 4 ps of lengthening on two nodes.
    for &n in &leaf[2..] {
        r.set_kind(e.net, n, WidgetKind::Jtl4);
    }
    let io = r.tracker.io(&e).unwrap();
    let shift = io.t_clock - io.t_input - ps(6.0);
    *r.tracker.input_arrival.entry(e.pin).or_default() += shift;
    assert_eq!(r.tracker.io(&e).unwrap().gap, ps(6.0));
    r.optimize_io();
    let io = r.tracker.io(&e).unwrap();
    assert_eq!(io.gap, ps(2.0));
    assert_eq!(io.regime, crate::timing::IoRegime::ClockAfterInput);

    // A 0.5 ps gap cannot take a 1 ps step.
    let mut r = routed(&d, &tech, OptimizerConfig::default());
    let io = r.tracker.io(&e).unwrap();
    *r.tracker.input_arrival.entry(e.pin).or_default() += io.t_clock - io.t_input - ps(0.5);
    let n = r.log.len();
    r.optimize_io();
    assert_eq!(r.log.len(), n);
    assert_eq!(r.tracker.io(&e).unwrap().gap, ps(0.5));
}

#[test]
fn chain_reaches_library_bound() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = routed(&d, &tech, OptimizerConfig::default());
    let out = r.run();
    assert_eq!(out.before.hold_violations, 1);
    assert_eq!(out.after.hold_violations, 0);
    assert!(out.irreducible.is_empty());
    assert_eq!(out.after.t_clk, ps(13.2));
}

#[test]
fn seeded_runs_are_identical() {
    let tech = Technology::desk_nb04();
    let d = bench::generate(&bench::by_name("c17").unwrap()).load(&tech).unwrap();
    let a = {
        let mut r = routed(&d, &tech, OptimizerConfig { rng_seed: 7, ..Default::default() });
        r.run();
        format_log(&r.log)
    };
    let b = {
        let mut r = routed(&d, &tech, OptimizerConfig { rng_seed: 7, ..Default::default() });
        r.run();
        format_log(&r.log)
    };
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn optimized_design_is_a_fixed_point() {
    let tech = Technology::desk_nb04();
    let d = chain2(&tech);
    let mut r = routed(&d, &tech, OptimizerConfig::default());
    let first = r.run();
    let n = r.log.len();
    let mut again = DetailedRouter::new(&d, &tech, r.trees.clone(), r.map.clone(), OptimizerConfig::default());
    let second = again.run();
    assert_eq!(second.before, first.after);
    assert_eq!(second.after.hold_violations, 0);
    assert!(second.after.t_clk <= first.after.t_clk);
    assert!(n > 0);
}

proptest! {
    #[test]
    fn shortening_respects_the_minimum(n in 3usize..16, head_ps in 0u32..80, seed in any::<u64>()) {
        let tech = Technology::desk_nb04();
        let d = chain2(&tech);
        let cfg = OptimizerConfig { rng_seed: seed, ..Default::default() };
        let mut r = rig(&d, &tech, single(n), cfg);
        let w = wire(&r, 0);
        let min = w - ps(f64::from(head_ps) / 2.0);
        let seg = r.segments(NET).remove(0);
        let removed = r.shorten_segment(NET, &seg, &[Some(min)]);
        prop_assert!(wire(&r, 0) >= min);
        prop_assert_eq!(wire(&r, 0), w - removed);
        prop_assert_eq!(r.recomputed(), r.tracker.clone());
        let blocked = RouteMap::new(40, 16, tech.layers.clone());
        prop_assert!(validate_routing(&blocked, &r.map, &r.trees).is_empty());
        for s in &r.log {
            prop_assert!(s.old.is_changeable());
        }
    }

    #[test]
    fn upgrades_touch_only_the_label(extra in 0usize..4, need in 0u32..40, seed in any::<u64>()) {
        let tech = Technology::desk_nb04();
        let d = chain2(&tech);
        let cfg = OptimizerConfig { rng_seed: seed, ..Default::default() };
        let mut r = rig(&d, &tech, forked(extra), cfg);
        let b = wire(&r, 1);
        let target = wire(&r, 0) + ps(f64::from(need) / 2.0);
        r.fix_hold(NET, &[Some(target), None], false);
        prop_assert_eq!(wire(&r, 1) - b, r.log.iter().filter(|s| r.tracker.label(NET, s.node).contains(&1)).map(|s| s.delta).sum::<Time>());
        prop_assert!(r.log.iter().all(|s| s.delta > Time::ZERO));
        prop_assert_eq!(r.recomputed(), r.tracker.clone());
    }
}
