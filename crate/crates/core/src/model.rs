//! Domain types, travel times and costs per mode of transport, and the
//! savings calculus for plain and shared car legs.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ridegraph::TripVariant;

/// Integer seconds since midnight.
pub type Seconds = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mot {
    Car,
    Walk,
    Bike,
    Public,
    Taxi,
}

impl Mot {
    pub const ALL: [Mot; 5] = [Mot::Car, Mot::Walk, Mot::Bike, Mot::Public, Mot::Taxi];
    /// Non-car modes in tie-break order.
    pub const OTHERS: [Mot; 4] = [Mot::Walk, Mot::Bike, Mot::Public, Mot::Taxi];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Mot::Car => "car",
            Mot::Walk => "walk",
            Mot::Bike => "bike",
            Mot::Public => "public",
            Mot::Taxi => "taxi",
        }
    }
}

impl fmt::Display for Mot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotParams {
    pub mot: Mot,
    pub speed_kmh: f64,
    /// Fixed access time added to every leg (parking, waiting at stops).
    pub extra_time_s: Seconds,
    /// Detour factor applied to aerial distance.
    pub sloping: f64,
    pub per_km_cost_eur: f64,
    pub emission_t_per_km: f64,
}

/// Default car emission factor in t CO2 per km.
pub const CAR_EMISSION_T_PER_KM: f64 = 0.0002;

impl MotParams {
    /// Urban defaults for each mode.
    pub fn defaults(mot: Mot) -> Self {
        let (speed_kmh, extra_time_s, sloping, per_km_cost_eur, emission_t_per_km) = match mot {
            Mot::Car => (30.0, 600, 1.3, 0.188, CAR_EMISSION_T_PER_KM),
            Mot::Walk => (5.0, 0, 1.1, 0.0, 0.0),
            Mot::Bike => (16.0, 120, 1.3, 0.0, 0.0),
            Mot::Public => (20.0, 300, 1.5, 0.0, 0.0),
            Mot::Taxi => (30.0, 300, 1.3, 1.2, 0.0),
        };
        MotParams {
            mot,
            speed_kmh,
            extra_time_s,
            sloping,
            per_km_cost_eur,
            emission_t_per_km,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &str| ModelError::BadMot {
            mot: self.mot,
            what: what.to_string(),
        };
        if !(self.speed_kmh > 0.0 && self.speed_kmh.is_finite()) {
            return Err(bad("speed_kmh must be positive"));
        }
        if !(self.sloping >= 1.0 && self.sloping.is_finite()) {
            return Err(bad("sloping must be at least 1.0"));
        }
        if self.extra_time_s < 0 {
            return Err(bad("extra_time_s must be nonnegative"));
        }
        if !(self.per_km_cost_eur >= 0.0 && self.per_km_cost_eur.is_finite()) {
            return Err(bad("per_km_cost_eur must be nonnegative"));
        }
        if !(self.emission_t_per_km >= 0.0 && self.emission_t_per_km.is_finite()) {
            return Err(bad("emission_t_per_km must be nonnegative"));
        }
        Ok(())
    }
}

/// Parameters for all five modes, indexed by [`Mot`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotTable([MotParams; 5]);

impl Default for MotTable {
    fn default() -> Self {
        MotTable(Mot::ALL.map(MotParams::defaults))
    }
}

impl MotTable {
    pub fn get(&self, mot: Mot) -> &MotParams {
        &self.0[mot.index()]
    }

    pub fn get_mut(&mut self, mot: Mot) -> &mut MotParams {
        &mut self.0[mot.index()]
    }

    pub fn to_list(&self) -> Vec<MotParams> {
        self.0.to_vec()
    }

    /// Builds a table from one entry per mode, in any order.
    pub fn from_list(list: &[MotParams]) -> Result<Self, ModelError> {
        let mut slots: [Option<MotParams>; 5] = [None; 5];
        for p in list {
            if slots[p.mot.index()].replace(*p).is_some() {
                return Err(ModelError::BadMot {
                    mot: p.mot,
                    what: "listed twice".into(),
                });
            }
        }
        let mut params = [MotParams::defaults(Mot::Car); 5];
        for mot in Mot::ALL {
            params[mot.index()] = slots[mot.index()].ok_or(ModelError::BadMot {
                mot,
                what: "missing".into(),
            })?;
            params[mot.index()].validate()?;
        }
        Ok(MotTable(params))
    }
}

/// How the non-car side of a shared leg is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareRule {
    /// Driver and rider legs each take their own cheapest other mode.
    #[default]
    PerLeg,
    /// One common mode is chosen for both legs.
    JointK,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub wage_eur_per_h: f64,
    pub co2_eur_per_t: f64,
    pub penalty_eur: f64,
    #[serde(default)]
    pub share_rule: ShareRule,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            wage_eur_per_h: 19.42,
            co2_eur_per_t: 5.0,
            penalty_eur: 10_000.0,
            share_rule: ShareRule::PerLeg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Location {
    pub x_km: f64,
    pub y_km: f64,
}

impl Location {
    pub fn new(x_km: f64, y_km: f64) -> Self {
        Location { x_km, y_km }
    }

    pub fn distance_km(&self, other: &Location) -> f64 {
        (self.x_km - other.x_km).hypot(self.y_km - other.y_km)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    /// Global index over all tasks of the instance.
    pub id: usize,
    pub owner: usize,
    pub seq_index: usize,
    pub loc: Location,
    pub latest_arrival_s: Seconds,
    pub earliest_departure_s: Seconds,
}

/// A depot-to-depot sequence of tasks driven (or travelled) by one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTrip {
    pub user_id: usize,
    pub start_depot: usize,
    pub end_depot: usize,
    pub tasks: Vec<Task>,
    pub allowed_mots: BTreeSet<Mot>,
    /// The employee this trip belongs to; differs from `user_id` for trips
    /// split off at a mid-day depot return.
    pub origin_user: usize,
}

impl UserTrip {
    pub fn can_drive(&self) -> bool {
        self.allowed_mots.contains(&Mot::Car)
    }

    /// Number of legs, depot legs included.
    pub fn num_legs(&self) -> usize {
        self.tasks.len() + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Depot {
    pub id: usize,
    pub loc: Location,
    pub vehicles_start: u32,
    pub vehicles_end: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizon {
    pub sigma_s: Seconds,
    pub tau_s: Seconds,
}

impl Default for Horizon {
    fn default() -> Self {
        Horizon {
            sigma_s: 6 * 3600,
            tau_s: 20 * 3600,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub depots: Vec<Depot>,
    pub users: Vec<UserTrip>,
    pub mots: MotTable,
    pub costs: CostParams,
    pub horizon: Horizon,
}

/// One leg of a user's trip: from stop `leg` to stop `leg + 1`, where stop 0
/// is the start depot and the last stop is the end depot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LegRef {
    pub user: usize,
    pub leg: usize,
}

/// A point of a trip with its time window. Depot endpoints use the full horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stop {
    pub loc: Location,
    pub latest_arrival_s: Seconds,
    pub earliest_departure_s: Seconds,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("mode {mot}: {what}")]
    BadMot { mot: Mot, what: String },
    #[error("cost parameter {0} must be a nonnegative finite number")]
    BadCost(&'static str),
    #[error("horizon must satisfy sigma_s < tau_s")]
    BadHorizon,
    #[error("depot at position {position} has id {id}")]
    DepotId { position: usize, id: usize },
    #[error("user at position {position} has id {id}")]
    UserId { position: usize, id: usize },
    #[error("user {user} references unknown depot {depot}")]
    UnknownDepot { user: usize, depot: usize },
    #[error("user {user} has no tasks")]
    NoTasks { user: usize },
    #[error("user {user}, task {task}: earliest_departure_s {departure} is before latest_arrival_s {arrival}")]
    TaskWindow {
        user: usize,
        task: usize,
        arrival: Seconds,
        departure: Seconds,
    },
    #[error("user {user}, task {task}: times fall outside the horizon")]
    OutsideHorizon { user: usize, task: usize },
    #[error("user {user}, task {task}: tasks overlap their predecessor")]
    TaskOrder { user: usize, task: usize },
    #[error("non-finite coordinate in {0}")]
    BadLocation(String),
    #[error("vehicles at start ({start}) and end ({end}) of the horizon differ")]
    Unbalanced { start: u64, end: u64 },
    #[error("origin user {origin} of user {user} is out of range")]
    OriginUser { user: usize, origin: usize },
}

impl Instance {
    /// Assembles an instance and assigns canonical task ids, owners and
    /// sequence indices.
    pub fn new(
        depots: Vec<Depot>,
        mut users: Vec<UserTrip>,
        mots: MotTable,
        costs: CostParams,
        horizon: Horizon,
    ) -> Result<Self, ModelError> {
        let mut next = 0;
        for u in users.iter_mut() {
            for (k, t) in u.tasks.iter_mut().enumerate() {
                t.id = next;
                t.owner = u.user_id;
                t.seq_index = k;
                next += 1;
            }
        }
        let inst = Instance {
            depots,
            users,
            mots,
            costs,
            horizon,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for mot in Mot::ALL {
            self.mots.get(mot).validate()?;
        }
        let c = &self.costs;
        for (name, v) in [
            ("wage_eur_per_h", c.wage_eur_per_h),
            ("co2_eur_per_t", c.co2_eur_per_t),
            ("penalty_eur", c.penalty_eur),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::BadCost(name));
            }
        }
        let (sigma, tau) = (self.horizon.sigma_s, self.horizon.tau_s);
        if sigma >= tau {
            return Err(ModelError::BadHorizon);
        }
        for (i, d) in self.depots.iter().enumerate() {
            if d.id != i {
                return Err(ModelError::DepotId { position: i, id: d.id });
            }
            if !(d.loc.x_km.is_finite() && d.loc.y_km.is_finite()) {
                return Err(ModelError::BadLocation(format!("depot {i}")));
            }
        }
        let start: u64 = self.depots.iter().map(|d| d.vehicles_start as u64).sum();
        let end: u64 = self.depots.iter().map(|d| d.vehicles_end as u64).sum();
        if start != end {
            return Err(ModelError::Unbalanced { start, end });
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.user_id != i {
                return Err(ModelError::UserId { position: i, id: u.user_id });
            }
            if u.origin_user >= self.users.len() {
                return Err(ModelError::OriginUser {
                    user: i,
                    origin: u.origin_user,
                });
            }
            for depot in [u.start_depot, u.end_depot] {
                if depot >= self.depots.len() {
                    return Err(ModelError::UnknownDepot { user: i, depot });
                }
            }
            if u.tasks.is_empty() {
                return Err(ModelError::NoTasks { user: i });
            }
            let mut prev_departure = sigma;
            for (k, t) in u.tasks.iter().enumerate() {
                if !(t.loc.x_km.is_finite() && t.loc.y_km.is_finite()) {
                    return Err(ModelError::BadLocation(format!("user {i}, task {k}")));
                }
                if t.earliest_departure_s < t.latest_arrival_s {
                    return Err(ModelError::TaskWindow {
                        user: i,
                        task: k,
                        arrival: t.latest_arrival_s,
                        departure: t.earliest_departure_s,
                    });
                }
                if t.latest_arrival_s < sigma || t.earliest_departure_s > tau {
                    return Err(ModelError::OutsideHorizon { user: i, task: k });
                }
                if t.latest_arrival_s < prev_departure {
                    return Err(ModelError::TaskOrder { user: i, task: k });
                }
                prev_departure = t.earliest_departure_s;
            }
        }
        Ok(())
    }

    pub fn fleet_size(&self) -> u32 {
        self.depots.iter().map(|d| d.vehicles_start).sum()
    }

    pub fn num_tasks(&self) -> usize {
        self.users.iter().map(|u| u.tasks.len()).sum()
    }

    /// All legs of all users in `(user, leg)` order.
    pub fn legs(&self) -> Vec<LegRef> {
        self.users
            .iter()
            .flat_map(|u| (0..u.num_legs()).map(move |leg| LegRef { user: u.user_id, leg }))
            .collect()
    }

    pub fn num_legs(&self) -> usize {
        self.users.iter().map(|u| u.num_legs()).sum()
    }

    /// Position of a leg in [`Instance::legs`].
    pub fn leg_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.users.len());
        let mut acc = 0;
        for u in &self.users {
            off.push(acc);
            acc += u.num_legs();
        }
        off
    }

    pub fn stop(&self, user: usize, index: usize) -> Stop {
        let u = &self.users[user];
        let n = u.tasks.len();
        if index == 0 || index == n + 1 {
            let depot = if index == 0 { u.start_depot } else { u.end_depot };
            Stop {
                loc: self.depots[depot].loc,
                latest_arrival_s: self.horizon.tau_s,
                earliest_departure_s: self.horizon.sigma_s,
            }
        } else {
            let t = &u.tasks[index - 1];
            Stop {
                loc: t.loc,
                latest_arrival_s: t.latest_arrival_s,
                earliest_departure_s: t.earliest_departure_s,
            }
        }
    }

    /// Origin and destination stops of a leg.
    pub fn leg_stops(&self, leg: LegRef) -> (Stop, Stop) {
        (self.stop(leg.user, leg.leg), self.stop(leg.user, leg.leg + 1))
    }

    pub fn travel_time(&self, from: &Location, to: &Location, mot: Mot) -> Seconds {
        travel_time(from, to, mot, &self.mots)
    }

    pub fn leg_cost(&self, from: &Location, to: &Location, mot: Mot) -> f64 {
        leg_cost(from, to, mot, &self.mots, &self.costs)
    }

    /// Car cost between two points; zero for coincident points, so that a
    /// shared origin or destination carries no detour.
    pub fn detour_cost(&self, from: &Location, to: &Location) -> f64 {
        if from == to {
            0.0
        } else {
            self.leg_cost(from, to, Mot::Car)
        }
    }

    pub fn detour_time(&self, from: &Location, to: &Location) -> Seconds {
        if from == to {
            0
        } else {
            self.travel_time(from, to, Mot::Car)
        }
    }
}

fn round_half_up(x: f64) -> Seconds {
    (x + 0.5).floor() as Seconds
}

/// Travel time in seconds: sloped aerial distance at the mode's speed plus
/// its fixed extra time.
pub fn travel_time(from: &Location, to: &Location, mot: Mot, mots: &MotTable) -> Seconds {
    let p = mots.get(mot);
    let km = p.sloping * from.distance_km(to);
    round_half_up(km / p.speed_kmh * 3600.0) + p.extra_time_s
}

/// Distance cost plus wage for the travel time plus emission cost.
pub fn leg_cost(from: &Location, to: &Location, mot: Mot, mots: &MotTable, costs: &CostParams) -> f64 {
    let p = mots.get(mot);
    let km = p.sloping * from.distance_km(to);
    let time_h = travel_time(from, to, mot, mots) as f64 / 3600.0;
    km * p.per_km_cost_eur + time_h * costs.wage_eur_per_h + km * p.emission_t_per_km * costs.co2_eur_per_t
}

/// Cost of `mot` for one user on one leg, including penalties for a mode
/// outside the user's choice and for arriving after the deadline.
fn penalized_cost(
    instance: &Instance,
    user: &UserTrip,
    from: &Location,
    to: &Location,
    depart_not_before: Seconds,
    arrive_not_after: Seconds,
    mot: Mot,
) -> f64 {
    let mut cost = instance.leg_cost(from, to, mot);
    if !user.allowed_mots.contains(&mot) {
        cost += instance.costs.penalty_eur;
    }
    if depart_not_before + instance.travel_time(from, to, mot) > arrive_not_after {
        cost += instance.costs.penalty_eur;
    }
    cost
}

/// Cheapest non-car mode the user accepts, with a penalty added for late
/// arrival. Ties go to the first mode in walk, bike, public, taxi order.
/// Returns `(None, penalty)` when the user accepts no non-car mode.
pub fn cheapest_other_mot(
    instance: &Instance,
    user: &UserTrip,
    from: &Location,
    to: &Location,
    depart_not_before: Seconds,
    arrive_not_after: Seconds,
) -> (Option<Mot>, f64) {
    let mut best: Option<(Mot, f64)> = None;
    for mot in Mot::OTHERS {
        if !user.allowed_mots.contains(&mot) {
            continue;
        }
        let c = penalized_cost(instance, user, from, to, depart_not_before, arrive_not_after, mot);
        if best.is_none_or(|(_, b)| c < b) {
            best = Some((mot, c));
        }
    }
    match best {
        Some((mot, c)) => (Some(mot), c),
        None => (None, instance.costs.penalty_eur),
    }
}

/// Cheapest other mode for a leg of the user's own sequence.
pub fn other_leg_cost(instance: &Instance, leg: LegRef) -> (Option<Mot>, f64) {
    let (a, b) = instance.leg_stops(leg);
    cheapest_other_mot(
        instance,
        &instance.users[leg.user],
        &a.loc,
        &b.loc,
        a.earliest_departure_s,
        b.latest_arrival_s,
    )
}

pub fn car_leg_cost(instance: &Instance, leg: LegRef) -> f64 {
    let (a, b) = instance.leg_stops(leg);
    instance.leg_cost(&a.loc, &b.loc, Mot::Car)
}

/// Saving of driving a leg alone instead of the cheapest other mode. May be negative.
pub fn leg_saving_plain(instance: &Instance, leg: LegRef) -> f64 {
    other_leg_cost(instance, leg).1 - car_leg_cost(instance, leg)
}

/// One mode both users accept, used for both legs; the per-leg sum when they share none.
fn joint_other_cost(instance: &Instance, driver_leg: LegRef, rider_leg: LegRef) -> f64 {
    let (da, db) = instance.leg_stops(driver_leg);
    let (ra, rb) = instance.leg_stops(rider_leg);
    let driver = &instance.users[driver_leg.user];
    let rider = &instance.users[rider_leg.user];
    let joint = Mot::OTHERS
        .iter()
        .filter(|k| driver.allowed_mots.contains(k) && rider.allowed_mots.contains(k))
        .map(|&k| {
            penalized_cost(instance, driver, &da.loc, &db.loc, da.earliest_departure_s, db.latest_arrival_s, k)
                + penalized_cost(instance, rider, &ra.loc, &rb.loc, ra.earliest_departure_s, rb.latest_arrival_s, k)
        })
        .fold(f64::INFINITY, f64::min);
    if joint.is_finite() {
        joint
    } else {
        other_leg_cost(instance, driver_leg).1 + other_leg_cost(instance, rider_leg).1
    }
}

/// Saving of a driver leg that picks up a rider for one of the rider's legs:
/// both users' other-mode costs are saved; the car pays the rider's leg and
/// the detours to the pickup and from the drop-off.
pub fn leg_saving_share(instance: &Instance, driver_leg: LegRef, rider_leg: LegRef) -> f64 {
    let (di, dj) = instance.leg_stops(driver_leg);
    let (ri, rj) = instance.leg_stops(rider_leg);
    let other = match instance.costs.share_rule {
        ShareRule::PerLeg => other_leg_cost(instance, driver_leg).1 + other_leg_cost(instance, rider_leg).1,
        ShareRule::JointK => joint_other_cost(instance, driver_leg, rider_leg),
    };
    let car = instance.leg_cost(&ri.loc, &rj.loc, Mot::Car)
        + instance.detour_cost(&di.loc, &ri.loc)
        + instance.detour_cost(&rj.loc, &dj.loc);
    other - car
}

/// How one driver leg of a trip variant is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LegPlan {
    Plain,
    Share { rider: usize, rider_leg: usize },
}

pub fn leg_plan_saving(instance: &Instance, driver: usize, leg: usize, plan: LegPlan) -> f64 {
    let dleg = LegRef { user: driver, leg };
    match plan {
        LegPlan::Plain => leg_saving_plain(instance, dleg),
        LegPlan::Share { rider, rider_leg } => leg_saving_share(
            instance,
            dleg,
            LegRef {
                user: rider,
                leg: rider_leg,
            },
        ),
    }
}

/// Saving of a trip variant: the sum of its per-leg savings.
pub fn trip_saving(instance: &Instance, variant: &TripVariant) -> f64 {
    variant
        .legs
        .iter()
        .enumerate()
        .map(|(k, &plan)| leg_plan_saving(instance, variant.driver, k, plan))
        .sum()
}
