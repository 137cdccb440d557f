// SPDX-License-Identifier: Apache-2.0

pub mod bench;
pub mod design;
pub mod detailed;
pub mod flow;
pub mod global;
pub mod grid;
pub mod techlib;
pub mod time;
pub mod timing;
pub mod tree;
pub mod validate;
pub mod widgets;
