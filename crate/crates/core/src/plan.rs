//! Vehicle routes and decoded fleet plans shared by the solvers.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::model::{other_leg_cost, Instance, LegRef, Mot, Seconds};
use crate::ridegraph::{Share, TripVariant};

/// Saving of an artificial relocation column.
pub const RELOCATION_SAVING: f64 = -1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RouteKind {
    Ride,
    /// The vehicle stays at its depot all day.
    Idle,
    /// Artificial column moving a vehicle between depots at a prohibitive cost.
    Relocation,
}

/// One vehicle's day: a chain of trip variants from a start to an end depot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    pub start_depot: usize,
    pub end_depot: usize,
    pub variants: Vec<usize>,
    /// Covered leg positions, sorted. A leg appears once per variant covering it.
    pub covered: Vec<usize>,
    pub saving: f64,
    pub kind: RouteKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DualPrices {
    /// Per leg, from the covering rows.
    pub alpha: Vec<f64>,
    /// Per depot, from the start-inventory rows.
    pub beta: Vec<f64>,
    /// Per depot, from the end-inventory rows.
    pub delta: Vec<f64>,
}

impl DualPrices {
    pub fn zero(num_legs: usize, num_depots: usize) -> Self {
        DualPrices {
            alpha: vec![0.0; num_legs],
            beta: vec![0.0; num_depots],
            delta: vec![0.0; num_depots],
        }
    }
}

impl Route {
    pub fn idle(depot: usize) -> Self {
        Route {
            start_depot: depot,
            end_depot: depot,
            variants: Vec::new(),
            covered: Vec::new(),
            saving: 0.0,
            kind: RouteKind::Idle,
        }
    }

    pub fn relocation(from: usize, to: usize) -> Self {
        Route {
            start_depot: from,
            end_depot: to,
            variants: Vec::new(),
            covered: Vec::new(),
            saving: RELOCATION_SAVING,
            kind: RouteKind::Relocation,
        }
    }

    /// Chains variants into a route. `None` if they do not connect in depot
    /// and time, or if the list is empty.
    pub fn from_variants(variants: &[TripVariant], ids: &[usize]) -> Option<Self> {
        let first = variants.get(*ids.first()?)?;
        let mut covered = Vec::new();
        let mut saving = 0.0;
        let mut prev: Option<&TripVariant> = None;
        for &id in ids {
            let v = variants.get(id)?;
            if let Some(p) = prev {
                if p.end_depot != v.start_depot || p.arrive_s > v.depart_s {
                    return None;
                }
            }
            covered.extend_from_slice(&v.covered_idx);
            saving += v.saving_eur;
            prev = Some(v);
        }
        covered.sort_unstable();
        Some(Route {
            start_depot: first.start_depot,
            end_depot: prev.unwrap().end_depot,
            variants: ids.to_vec(),
            covered,
            saving,
            kind: RouteKind::Ride,
        })
    }

    /// Saving minus the covering duals and the depot inventory duals.
    pub fn reduced_saving(&self, duals: &DualPrices) -> f64 {
        self.saving - self.covered.iter().map(|&q| duals.alpha[q]).sum::<f64>()
            - duals.beta[self.start_depot]
            - duals.delta[self.end_depot]
    }

    pub fn has_double_coverage(&self) -> bool {
        self.covered.windows(2).any(|w| w[0] == w[1])
    }

    /// Checks chaining, coverage and saving against the variants.
    pub fn check(&self, variants: &[TripVariant]) -> Result<(), String> {
        match self.kind {
            RouteKind::Idle | RouteKind::Relocation => {
                if !self.variants.is_empty() || !self.covered.is_empty() {
                    return Err("artificial route carries rides".into());
                }
                Ok(())
            }
            RouteKind::Ride => {
                let rebuilt = Route::from_variants(variants, &self.variants).ok_or("variants do not chain")?;
                if rebuilt.start_depot != self.start_depot || rebuilt.end_depot != self.end_depot {
                    return Err("route depots disagree with its variants".into());
                }
                if rebuilt.covered != self.covered {
                    return Err("route coverage disagrees with its variants".into());
                }
                if (rebuilt.saving - self.saving).abs() > 1e-9 {
                    return Err(format!("route saving {} differs from {}", self.saving, rebuilt.saving));
                }
                Ok(())
            }
        }
    }
}

/// Identity of a variant independent of the enumeration it came from.
pub fn variant_key(v: &TripVariant) -> (usize, Vec<Share>) {
    (v.driver, v.shares.clone())
}

/// Rewrites routes built on one variant list onto another; routes with a
/// variant missing from the target are dropped.
pub fn remap_routes(routes: &[Route], from: &[TripVariant], to: &[TripVariant]) -> Vec<Route> {
    let index: HashMap<(usize, Vec<Share>), usize> = to.iter().map(|v| (variant_key(v), v.id)).collect();
    routes
        .iter()
        .filter_map(|r| match r.kind {
            RouteKind::Ride => {
                let ids: Option<Vec<usize>> = r.variants.iter().map(|&v| index.get(&variant_key(&from[v])).copied()).collect();
                Route::from_variants(to, &ids?)
            }
            _ => Some(r.clone()),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Itinerary {
    pub start_depot: usize,
    pub end_depot: usize,
    pub variants: Vec<usize>,
    pub saving: f64,
    pub relocation: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PlanStats {
    pub vehicles: usize,
    pub used_vehicles: usize,
    pub rides: usize,
    pub shares: usize,
    pub rides_per_car: f64,
    pub shares_per_ride: f64,
    pub covered_legs: usize,
    pub uncovered_legs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UncoveredLeg {
    pub leg: LegRef,
    pub mot: Option<Mot>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub objective: f64,
    /// One itinerary per vehicle, idle vehicles included.
    pub itineraries: Vec<Itinerary>,
    /// Legs not served by car, with the mode used instead.
    pub uncovered: Vec<UncoveredLeg>,
    pub stats: PlanStats,
}

impl Plan {
    pub fn empty(instance: &Instance) -> Self {
        Plan::from_itineraries(instance, &[], Vec::new())
    }

    /// Builds a plan from selected routes, each with its multiplicity.
    pub fn from_routes(instance: &Instance, variants: &[TripVariant], chosen: &[(Route, usize)]) -> Self {
        let mut its = Vec::new();
        for (r, k) in chosen {
            for _ in 0..*k {
                its.push(Itinerary {
                    start_depot: r.start_depot,
                    end_depot: r.end_depot,
                    variants: r.variants.clone(),
                    saving: r.saving,
                    relocation: r.kind == RouteKind::Relocation,
                });
            }
        }
        Plan::from_itineraries(instance, variants, its)
    }

    pub fn from_itineraries(instance: &Instance, variants: &[TripVariant], mut itineraries: Vec<Itinerary>) -> Self {
        itineraries.sort_by(|a, b| {
            (a.start_depot, a.end_depot, &a.variants)
                .cmp(&(b.start_depot, b.end_depot, &b.variants))
        });
        let mut covered = vec![false; instance.num_legs()];
        let mut rides = 0;
        let mut shares = 0;
        for it in &itineraries {
            for &v in &it.variants {
                rides += 1;
                shares += variants[v].shares.len();
                for &q in &variants[v].covered_idx {
                    covered[q] = true;
                }
            }
        }
        let uncovered: Vec<UncoveredLeg> = instance
            .legs()
            .into_iter()
            .zip(&covered)
            .filter(|(_, &c)| !c)
            .map(|(leg, _)| UncoveredLeg {
                leg,
                mot: other_leg_cost(instance, leg).0,
            })
            .collect();
        let fleet = instance.fleet_size() as usize;
        let stats = PlanStats {
            vehicles: itineraries.len(),
            used_vehicles: itineraries.iter().filter(|i| !i.variants.is_empty()).count(),
            rides,
            shares,
            rides_per_car: if fleet > 0 { rides as f64 / fleet as f64 } else { 0.0 },
            shares_per_ride: if rides > 0 { shares as f64 / rides as f64 } else { 0.0 },
            covered_legs: covered.iter().filter(|&&c| c).count(),
            uncovered_legs: uncovered.len(),
        };
        Plan {
            objective: itineraries.iter().map(|i| i.saving).sum(),
            itineraries,
            uncovered,
            stats,
        }
    }

    pub fn relocations(&self) -> usize {
        self.itineraries.iter().filter(|i| i.relocation).count()
    }
}

/// Verifies depot inventories, time chaining, single coverage and the
/// objective of a plan from its itineraries alone.
pub fn check_plan(instance: &Instance, variants: &[TripVariant], plan: &Plan) -> Result<(), String> {
    let nd = instance.depots.len();
    let mut starts = vec![0u32; nd];
    let mut ends = vec![0u32; nd];
    let mut cover: BTreeMap<usize, usize> = BTreeMap::new();
    let mut total = 0.0;
    let (sigma, tau): (Seconds, Seconds) = (instance.horizon.sigma_s, instance.horizon.tau_s);
    for (k, it) in plan.itineraries.iter().enumerate() {
        starts[it.start_depot] += 1;
        ends[it.end_depot] += 1;
        let mut depot = it.start_depot;
        let mut time = sigma;
        let mut saving = if it.relocation { crate::plan::RELOCATION_SAVING } else { 0.0 };
        for &v in &it.variants {
            let var = &variants[v];
            if var.start_depot != depot || var.depart_s < time {
                return Err(format!("itinerary {k}: variant {v} does not connect"));
            }
            depot = var.end_depot;
            time = var.arrive_s;
            saving += var.saving_eur;
            for &q in &var.covered_idx {
                *cover.entry(q).or_default() += 1;
            }
        }
        if time > tau || (!it.relocation && depot != it.end_depot) {
            return Err(format!("itinerary {k} does not end at depot {} in time", it.end_depot));
        }
        if (saving - it.saving).abs() > 1e-6 {
            return Err(format!("itinerary {k}: saving {} recomputes to {saving}", it.saving));
        }
        total += saving;
    }
    for d in 0..nd {
        if starts[d] != instance.depots[d].vehicles_start || ends[d] != instance.depots[d].vehicles_end {
            return Err(format!(
                "depot {d}: {} starts and {} ends, expected {} and {}",
                starts[d], ends[d], instance.depots[d].vehicles_start, instance.depots[d].vehicles_end
            ));
        }
    }
    if let Some((q, n)) = cover.iter().find(|(_, &n)| n > 1) {
        return Err(format!("leg {q} covered {n} times"));
    }
    if (total - plan.objective).abs() > 1e-6 * (1.0 + total.abs()) {
        return Err(format!("objective {} recomputes to {total}", plan.objective));
    }
    Ok(())
}
