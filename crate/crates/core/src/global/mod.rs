// SPDX-License-Identifier: Apache-2.0

//! Global routing: A* search, net trees, rip-up and reroute.

pub mod astar;
pub mod group;
pub mod net;

pub use astar::{astar_route, route_pair, search_bound};
pub use group::{route_design, route_group, GlobalConfig, GroupResult, RoutedDesign};
pub use net::{commit_tree, route_net, NetResult};
