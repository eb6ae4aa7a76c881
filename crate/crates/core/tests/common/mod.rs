#![allow(dead_code)]

use mmcrp::instgen::{generate, GenParams};
use mmcrp::model::Instance;
use mmcrp::ridegraph::{build_graph, enumerate_variants, EnumCaps, TimeSpaceGraph, Variants};

/// At most four users with one or two tasks, two depots, up to two vehicles.
pub fn tiny(seed: u64) -> Instance {
    let users = 1 + (seed % 4) as usize;
    let fleet = 1 + (seed / 4 % 2) as u32;
    let mut p = GenParams::new(users, 2, fleet, seed);
    p.tasks_per_user = (1, 2);
    p.region_km = (8.0, 8.0);
    generate(&p).unwrap()
}

pub fn sized(users: usize, fleet: u32, seed: u64) -> Instance {
    generate(&GenParams::new(users, 2, fleet, seed)).unwrap()
}

pub fn graph(instance: &Instance) -> (Variants, TimeSpaceGraph) {
    let v = enumerate_variants(instance, &EnumCaps::default());
    let g = build_graph(instance, &v).unwrap();
    (v, g)
}
