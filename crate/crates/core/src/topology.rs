//! Planar placement of access points and devices.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;

/// Rejection budget per placed point.
pub const PLACEMENT_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

pub fn distance_2d(p: Point, q: Point) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

pub fn distance_3d(p: Point, q: Point, ap_height_m: f64, ue_height_m: f64) -> f64 {
    distance_2d(p, q).hypot(ap_height_m - ue_height_m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyConfig {
    pub area_side_m: f64,
    pub num_aps: usize,
    pub num_users: usize,
    /// Margin between the area boundary and any AP.
    pub edge_distance_m: f64,
    pub min_ue_ap_distance_m: f64,
    pub min_ap_ap_distance_m: f64,
    pub ap_height_m: f64,
    pub ue_height_m: f64,
}

impl TopologyConfig {
    /// Dense urban-macro deployment on a 0.25 km^2 square.
    pub fn scenario_one() -> Self {
        Self {
            area_side_m: 500.0,
            num_aps: 20,
            num_users: 100,
            edge_distance_m: 50.0,
            min_ue_ap_distance_m: 10.0,
            min_ap_ap_distance_m: 15.0,
            ap_height_m: 12.0,
            ue_height_m: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let distances = [
            ("edge_distance_m", self.edge_distance_m),
            ("min_ue_ap_distance_m", self.min_ue_ap_distance_m),
            ("min_ap_ap_distance_m", self.min_ap_ap_distance_m),
            ("ap_height_m", self.ap_height_m),
            ("ue_height_m", self.ue_height_m),
        ];
        for (field, v) in distances {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::config(
                    field,
                    format!("must be a finite non-negative distance, got {v}"),
                ));
            }
        }
        if !(self.area_side_m > 2.0 * self.edge_distance_m) || !self.area_side_m.is_finite() {
            return Err(Error::config(
                "area_side_m",
                format!(
                    "must exceed twice the edge distance ({} m), got {}",
                    2.0 * self.edge_distance_m,
                    self.area_side_m
                ),
            ));
        }
        if self.num_aps == 0 {
            return Err(Error::config("num_aps", "must be at least 1"));
        }
        if self.num_users == 0 {
            return Err(Error::config("num_users", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub config: TopologyConfig,
}

impl Topology {
    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_users(&self) -> usize {
        self.ue_positions.len()
    }

    /// Horizontal AP-UE distance.
    pub fn ap_ue_distance(&self, ap: usize, ue: usize) -> f64 {
        distance_2d(self.ap_positions[ap], self.ue_positions[ue])
    }

    /// Checks every placement constraint pairwise; returns the first violated one.
    pub fn check_constraints(&self) -> Result<(), &'static str> {
        let cfg = &self.config;
        let (lo, hi) = (cfg.edge_distance_m, cfg.area_side_m - cfg.edge_distance_m);
        for p in &self.ap_positions {
            if p.x < lo || p.x > hi || p.y < lo || p.y > hi {
                return Err("AP edge margin");
            }
        }
        for p in &self.ue_positions {
            if p.x < 0.0 || p.x > cfg.area_side_m || p.y < 0.0 || p.y > cfg.area_side_m {
                return Err("UE area bound");
            }
        }
        for (i, a) in self.ap_positions.iter().enumerate() {
            for b in &self.ap_positions[i + 1..] {
                if distance_2d(*a, *b) < cfg.min_ap_ap_distance_m {
                    return Err("minimum AP-AP distance");
                }
            }
        }
        for a in &self.ap_positions {
            for u in &self.ue_positions {
                if distance_2d(*a, *u) < cfg.min_ue_ap_distance_m {
                    return Err("minimum UE-AP distance");
                }
            }
        }
        Ok(())
    }

    /// `kind,x_m,y_m` rows, APs first.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,x_m,y_m\n");
        for p in &self.ap_positions {
            let _ = writeln!(out, "ap,{},{}", p.x, p.y);
        }
        for p in &self.ue_positions {
            let _ = writeln!(out, "ue,{},{}", p.x, p.y);
        }
        out
    }
}

/// Uniform rejection placement: APs inside the edge margin with pairwise
/// spacing, then devices anywhere in the area away from every AP.
pub fn generate_topology(cfg: &TopologyConfig, rng: &SeededRng) -> Result<Topology> {
    cfg.validate()?;
    let mut ap_rng = rng.split("ap-placement");
    let mut ue_rng = rng.split("ue-placement");
    let (lo, hi) = (cfg.edge_distance_m, cfg.area_side_m - cfg.edge_distance_m);

    let mut aps: Vec<Point> = Vec::with_capacity(cfg.num_aps);
    for _ in 0..cfg.num_aps {
        let p = place(&mut ap_rng, lo, hi, "minimum AP-AP distance", |p| {
            aps.iter()
                .all(|q| distance_2d(p, *q) >= cfg.min_ap_ap_distance_m)
        })?;
        aps.push(p);
    }

    let mut ues = Vec::with_capacity(cfg.num_users);
    for _ in 0..cfg.num_users {
        let p = place(
            &mut ue_rng,
            0.0,
            cfg.area_side_m,
            "minimum UE-AP distance",
            |p| {
                aps.iter()
                    .all(|q| distance_2d(p, *q) >= cfg.min_ue_ap_distance_m)
            },
        )?;
        ues.push(p);
    }

    Ok(Topology {
        ap_positions: aps,
        ue_positions: ues,
        config: cfg.clone(),
    })
}

fn place(
    rng: &mut SeededRng,
    lo: f64,
    hi: f64,
    constraint: &'static str,
    accept: impl Fn(Point) -> bool,
) -> Result<Point> {
    for _ in 0..PLACEMENT_ATTEMPTS {
        let p = Point::new(rng.uniform_range(lo, hi), rng.uniform_range(lo, hi));
        if accept(p) {
            return Ok(p);
        }
    }
    Err(Error::PlacementInfeasible {
        constraint,
        attempts: PLACEMENT_ATTEMPTS,
    })
}
