//! Synthetic instance generator and the JSON instance file format.
//!
//! Each employee gets a home depot and one to four meetings on a 20×20 km
//! map. Consecutive meetings are car-reachable within the maximum leg time
//! and leave room for the slower of car and public transport. An employee
//! who returns to the depot between two meetings is split into separate
//! simple trips, one artificial user each.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{
    CostParams, Depot, Horizon, Instance, Location, ModelError, Mot, MotParams, MotTable, Seconds, Task, UserTrip,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Vehicles {
    /// Total fleet, split as evenly as possible over the depots.
    Total(u32),
    PerDepot(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_users: usize,
    pub n_depots: usize,
    pub vehicles: Vehicles,
    pub seed: u64,
    pub region_km: (f64, f64),
    pub tasks_per_user: (usize, usize),
    pub horizon: Horizon,
    pub buffer_at_depot_s: Seconds,
    pub max_leg_time_s: Seconds,
    /// Probability of placing a meeting next to another user's meeting.
    pub cluster_prob: f64,
    /// Probability of a depot return between two consecutive meetings.
    pub depot_return_prob: f64,
    /// Probability that a user may drive.
    pub driver_prob: f64,
    /// Probability that each non-car mode is acceptable to a user.
    pub other_mot_prob: f64,
}

impl GenParams {
    pub fn new(n_users: usize, n_depots: usize, fleet: u32, seed: u64) -> Self {
        GenParams {
            n_users,
            n_depots,
            vehicles: Vehicles::Total(fleet),
            seed,
            region_km: (20.0, 20.0),
            tasks_per_user: (1, 4),
            horizon: Horizon::default(),
            buffer_at_depot_s: 3600,
            max_leg_time_s: 3600,
            cluster_prob: 0.3,
            depot_return_prob: 0.6,
            driver_prob: 0.85,
            other_mot_prob: 0.75,
        }
    }

    fn fleet(&self) -> Result<Vec<u32>, GenError> {
        match &self.vehicles {
            Vehicles::Total(m) => {
                let n = self.n_depots as u32;
                Ok((0..n).map(|d| m / n + u32::from(d < m % n)).collect())
            }
            Vehicles::PerDepot(list) if list.len() == self.n_depots => Ok(list.clone()),
            Vehicles::PerDepot(list) => Err(GenError::InvalidParams(format!(
                "{} vehicle counts given for {} depots",
                list.len(),
                self.n_depots
            ))),
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidParams(m.to_string()));
        if self.n_users == 0 {
            return bad("n_users must be at least 1");
        }
        if self.n_depots == 0 {
            return bad("n_depots must be at least 1");
        }
        let (w, h) = self.region_km;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return bad("region must have positive area");
        }
        let (lo, hi) = self.tasks_per_user;
        if lo == 0 || lo > hi {
            return bad("tasks_per_user must satisfy 1 <= min <= max");
        }
        if self.horizon.sigma_s >= self.horizon.tau_s {
            return bad("horizon must satisfy sigma < tau");
        }
        if self.max_leg_time_s <= MotParams::defaults(Mot::Car).extra_time_s {
            return bad("max_leg_time_s must exceed the car access time");
        }
        for p in [self.cluster_prob, self.depot_return_prob, self.driver_prob, self.other_mot_prob] {
            if !(0.0..=1.0).contains(&p) {
                return bad("probabilities must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("generated instance is invalid: {0}")]
    Invalid(#[from] ModelError),
}

struct Draft {
    loc: Location,
    start: Seconds,
    end: Seconds,
}

struct Gen<'a> {
    p: &'a GenParams,
    rng: ChaCha8Rng,
    mots: MotTable,
    depots: Vec<Location>,
    /// Meetings placed so far with their owner.
    placed: Vec<(usize, Location, Seconds)>,
}

const MINUTE: Seconds = 60;

impl Gen<'_> {
    fn car(&self, a: &Location, b: &Location) -> Seconds {
        crate::model::travel_time(a, b, Mot::Car, &self.mots)
    }

    /// Time needed between two points so that car and public transport both make it.
    fn gap(&self, a: &Location, b: &Location) -> Seconds {
        self.car(a, b).max(crate::model::travel_time(a, b, Mot::Public, &self.mots))
    }

    fn uniform_loc(&mut self) -> Location {
        let (w, h) = self.p.region_km;
        Location::new(self.rng.gen_range(0.0..w), self.rng.gen_range(0.0..h))
    }

    fn near(&mut self, c: &Location) -> Location {
        let (w, h) = self.p.region_km;
        let r = self.rng.gen_range(0.0..1.0_f64);
        let phi = self.rng.gen_range(0.0..std::f64::consts::TAU);
        Location::new(
            (c.x_km + r * phi.cos()).clamp(0.0, w),
            (c.y_km + r * phi.sin()).clamp(0.0, h),
        )
    }

    fn reachable(&self, a: &Location, b: &Location) -> bool {
        self.car(a, b) <= self.p.max_leg_time_s
    }

    fn preferred_start(&mut self) -> Seconds {
        let t = if self.rng.gen_bool(0.7) {
            self.rng.gen_range(8.0..17.0)
        } else {
            Normal::new(12.5, 1.5).unwrap().sample(&mut self.rng)
        };
        (t * 3600.0) as Seconds
    }

    fn duration(&mut self) -> Seconds {
        self.rng.gen_range(30..=120) * MINUTE
    }

    /// A location reachable from `prev` and from both depots of the trip.
    fn location(&mut self, owner: usize, prev: &Location, home: &Location, earliest: Seconds) -> (Location, Option<Seconds>) {
        if self.rng.gen_bool(self.p.cluster_prob) {
            let candidates: Vec<(Location, Seconds)> = self
                .placed
                .iter()
                .filter(|(o, l, t)| *o != owner && *t >= earliest && self.reachable(prev, l) && self.reachable(l, home))
                .map(|(_, l, t)| (*l, *t))
                .collect();
            if let Some(&(c, t)) = candidates.choose(&mut self.rng) {
                let loc = self.near(&c);
                if self.reachable(prev, &loc) && self.reachable(&loc, home) {
                    let shift = self.rng.gen_range(-15..=15) * MINUTE;
                    return (loc, Some(t + shift));
                }
            }
        }
        for _ in 0..200 {
            let loc = self.uniform_loc();
            if self.reachable(prev, &loc) && self.reachable(&loc, home) {
                return (loc, None);
            }
        }
        (self.near(prev), None)
    }

    fn round_up(t: Seconds) -> Seconds {
        (t + MINUTE - 1).div_euclid(MINUTE) * MINUTE
    }

    /// Meetings of one employee, grouped into depot-to-depot segments.
    fn employee(&mut self, owner: usize, home: usize) -> Vec<Vec<Draft>> {
        let (sigma, tau) = (self.p.horizon.sigma_s, self.p.horizon.tau_s);
        let (lo, hi) = self.p.tasks_per_user;
        let n = self.rng.gen_range(lo..=hi);
        let depot = self.depots[home];
        let mut segments: Vec<Vec<Draft>> = vec![Vec::new()];
        let mut prev = depot;
        // earliest time the employee can be at `prev` ready to leave
        let mut ready = sigma;
        for k in 0..n {
            let via_depot = k > 0 && self.rng.gen_bool(self.p.depot_return_prob);
            let wanted = if k == 0 { Some(self.preferred_start()) } else { None };
            let (loc, cluster_time) = self.location(owner, &prev, &depot, ready);
            let earliest = if via_depot {
                ready + self.car(&prev, &depot) + self.p.buffer_at_depot_s + self.gap(&depot, &loc)
            } else if k == 0 {
                ready + self.car(&depot, &loc).max(self.gap(&depot, &loc))
            } else {
                ready + self.gap(&prev, &loc)
            };
            let slack = self.rng.gen_range(0..=60) * MINUTE;
            let base = cluster_time.or(wanted).unwrap_or(earliest + slack);
            let start = Self::round_up(base.max(earliest));
            let end = start + self.duration();
            if end + self.gap(&loc, &depot) > tau {
                break;
            }
            if via_depot {
                segments.push(Vec::new());
            }
            segments.last_mut().unwrap().push(Draft { loc, start, end });
            self.placed.push((owner, loc, start));
            prev = loc;
            ready = end;
        }
        if segments[0].is_empty() {
            // the day is too full: one short meeting next to the depot at the preferred hour
            let loc = self.near(&depot);
            let start = Self::round_up((sigma + self.gap(&depot, &loc)).max(9 * 3600));
            let end = (start + 30 * MINUTE).min(tau - self.gap(&loc, &depot));
            segments[0].push(Draft { loc, start, end });
        }
        segments.retain(|s| !s.is_empty());
        segments
    }

    fn allowed_mots(&mut self) -> BTreeSet<Mot> {
        let mut set = BTreeSet::new();
        if self.rng.gen_bool(self.p.driver_prob) {
            set.insert(Mot::Car);
        }
        for mot in Mot::OTHERS {
            if self.rng.gen_bool(self.p.other_mot_prob) {
                set.insert(mot);
            }
        }
        if set.is_empty() {
            set.insert(Mot::Public);
        }
        set
    }
}

fn depot_locations(n: usize, region: (f64, f64)) -> Vec<Location> {
    (0..n)
        .map(|k| {
            let q = (k as f64 + 0.5) / n as f64;
            Location::new(q * region.0, q * region.1)
        })
        .collect()
}

/// Generates an instance; deterministic in `params.seed`.
pub fn generate(params: &GenParams) -> Result<Instance, GenError> {
    params.validate()?;
    let fleet = params.fleet()?;
    let mut g = Gen {
        p: params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        mots: MotTable::default(),
        depots: depot_locations(params.n_depots, params.region_km),
        placed: Vec::new(),
    };
    let mut users = Vec::new();
    for e in 0..params.n_users {
        let home = g.rng.gen_range(0..params.n_depots);
        let allowed = g.allowed_mots();
        let segments = g.employee(e, home);
        let origin = users.len();
        for seg in segments {
            let tasks = seg
                .into_iter()
                .map(|d| Task {
                    id: 0,
                    owner: 0,
                    seq_index: 0,
                    loc: d.loc,
                    latest_arrival_s: d.start,
                    earliest_departure_s: d.end,
                })
                .collect();
            users.push(UserTrip {
                user_id: users.len(),
                start_depot: home,
                end_depot: home,
                tasks,
                allowed_mots: allowed.clone(),
                origin_user: origin,
            });
        }
    }
    let depots = g
        .depots
        .iter()
        .zip(&fleet)
        .enumerate()
        .map(|(id, (&loc, &w))| Depot {
            id,
            loc,
            vehicles_start: w,
            vehicles_end: w,
        })
        .collect();
    Ok(Instance::new(depots, users, g.mots, CostParams::default(), params.horizon)?)
}

/// Number of employees behind the simple trips of an instance.
pub fn num_employees(instance: &Instance) -> usize {
    instance.users.iter().map(|u| u.origin_user).collect::<BTreeSet<_>>().len()
}

/// Copy of the instance with the fleet replaced by `fleet`, split evenly.
pub fn with_fleet(instance: &Instance, fleet: u32) -> Instance {
    let n = instance.depots.len() as u32;
    let mut out = instance.clone();
    for (d, depot) in out.depots.iter_mut().enumerate() {
        let w = fleet / n + u32::from((d as u32) < fleet % n);
        depot.vehicles_start = w;
        depot.vehicles_end = w;
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    horizon: Horizon,
    mots: Vec<MotParams>,
    costs: CostParams,
    depots: Vec<DepotFile>,
    users: Vec<UserFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DepotFile {
    id: usize,
    x_km: f64,
    y_km: f64,
    vehicles_start: u32,
    vehicles_end: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct UserFile {
    id: usize,
    start_depot: usize,
    end_depot: usize,
    allowed_mots: Vec<Mot>,
    tasks: Vec<TaskFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin_user: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TaskFile {
    x_km: f64,
    y_km: f64,
    latest_arrival_s: Seconds,
    earliest_departure_s: Seconds,
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid instance: {0}")]
    Invalid(#[from] ModelError),
}

pub fn to_json_string(instance: &Instance) -> String {
    let file = InstanceFile {
        horizon: instance.horizon,
        mots: instance.mots.to_list(),
        costs: instance.costs,
        depots: instance
            .depots
            .iter()
            .map(|d| DepotFile {
                id: d.id,
                x_km: d.loc.x_km,
                y_km: d.loc.y_km,
                vehicles_start: d.vehicles_start,
                vehicles_end: d.vehicles_end,
            })
            .collect(),
        users: instance
            .users
            .iter()
            .map(|u| UserFile {
                id: u.user_id,
                start_depot: u.start_depot,
                end_depot: u.end_depot,
                allowed_mots: u.allowed_mots.iter().copied().collect(),
                tasks: u
                    .tasks
                    .iter()
                    .map(|t| TaskFile {
                        x_km: t.loc.x_km,
                        y_km: t.loc.y_km,
                        latest_arrival_s: t.latest_arrival_s,
                        earliest_departure_s: t.earliest_departure_s,
                    })
                    .collect(),
                origin_user: (u.origin_user != u.user_id).then_some(u.origin_user),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

pub fn from_json_str(text: &str) -> Result<Instance, InstanceIoError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| InstanceIoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mots = MotTable::from_list(&file.mots)?;
    let depots = file
        .depots
        .into_iter()
        .map(|d| Depot {
            id: d.id,
            loc: Location::new(d.x_km, d.y_km),
            vehicles_start: d.vehicles_start,
            vehicles_end: d.vehicles_end,
        })
        .collect();
    let users = file
        .users
        .into_iter()
        .map(|u| UserTrip {
            user_id: u.id,
            start_depot: u.start_depot,
            end_depot: u.end_depot,
            tasks: u
                .tasks
                .into_iter()
                .map(|t| Task {
                    id: 0,
                    owner: 0,
                    seq_index: 0,
                    loc: Location::new(t.x_km, t.y_km),
                    latest_arrival_s: t.latest_arrival_s,
                    earliest_departure_s: t.earliest_departure_s,
                })
                .collect(),
            allowed_mots: u.allowed_mots.into_iter().collect(),
            origin_user: u.origin_user.unwrap_or(u.id),
        })
        .collect();
    Ok(Instance::new(depots, users, mots, file.costs, file.horizon)?)
}

pub fn write_instance(instance: &Instance, path: &Path) -> Result<(), InstanceIoError> {
    fs::write(path, to_json_string(instance)).map_err(|source| InstanceIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<Instance, InstanceIoError> {
    let text = fs::read_to_string(path).map_err(|source| InstanceIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let p = GenParams::new(20, 2, 4, 7);
        let a = to_json_string(&generate(&p).unwrap());
        let b = to_json_string(&generate(&p).unwrap());
        assert_eq!(a, b);
        let c = to_json_string(&generate(&GenParams { seed: 8, ..p }).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn generated_instances_respect_leg_limits() {
        for seed in 0..20 {
            let inst = generate(&GenParams::new(30, 3, 6, seed)).unwrap();
            assert_eq!(num_employees(&inst), 30);
            assert!(inst.users.len() >= 30);
            assert_eq!(inst.fleet_size(), 6);
            for u in &inst.users {
                for leg in 0..u.num_legs() {
                    let (a, b) = inst.leg_stops(crate::model::LegRef { user: u.user_id, leg });
                    assert!(inst.travel_time(&a.loc, &b.loc, Mot::Car) <= 3600);
                    if leg > 0 && leg < u.tasks.len() {
                        assert!(a.earliest_departure_s + inst.travel_time(&a.loc, &b.loc, Mot::Car) <= b.latest_arrival_s);
                    }
                }
                for t in &u.tasks {
                    let service = t.earliest_departure_s - t.latest_arrival_s;
                    assert!((30 * 60..=120 * 60).contains(&service) || u.tasks.len() == 1);
                }
            }
        }
    }

    #[test]
    fn bad_params_are_rejected() {
        assert!(generate(&GenParams::new(0, 2, 4, 0)).is_err());
        assert!(generate(&GenParams {
            region_km: (0.0, 20.0),
            ..GenParams::new(5, 2, 4, 0)
        })
        .is_err());
        assert!(generate(&GenParams {
            vehicles: Vehicles::PerDepot(vec![1]),
            ..GenParams::new(5, 2, 4, 0)
        })
        .is_err());
    }

    #[test]
    fn fleet_splits_evenly() {
        let inst = generate(&GenParams::new(5, 3, 7, 1)).unwrap();
        let w: Vec<u32> = inst.depots.iter().map(|d| d.vehicles_start).collect();
        assert_eq!(w, vec![3, 2, 2]);
        let inst = with_fleet(&inst, 4);
        assert_eq!(inst.fleet_size(), 4);
    }

    #[test]
    fn missing_key_is_named() {
        let inst = generate(&GenParams::new(3, 1, 1, 0)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&to_json_string(&inst)).unwrap();
        v.as_object_mut().unwrap().remove("depots");
        let err = from_json_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("depots"), "{err}");
    }

    #[test]
    fn inverted_window_in_file_is_rejected() {
        let inst = generate(&GenParams::new(3, 1, 1, 0)).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&to_json_string(&inst)).unwrap();
        let t = &mut v["users"][0]["tasks"][0];
        let la = t["latest_arrival_s"].as_i64().unwrap();
        t["earliest_departure_s"] = (la - 60).into();
        let err = from_json_str(&v.to_string()).unwrap_err();
        assert!(matches!(err, InstanceIoError::Invalid(ModelError::TaskWindow { .. })), "{err}");
    }
}
