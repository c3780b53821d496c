//! Genome encoding, constellation decoding and the (average AoI, coverage)
//! evaluation over a sampled observation window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cislunar_nsga2::{GeneSpec, ObjectiveVector, Problem};

use crate::aoi::{
    build_relay_graph, GraphOptions, Group, LinkModel, NetworkSnapshot, Node, PathLabels,
};
use crate::constants::{
    HALO_AMPLITUDE_KM, HALO_PERIOD_MIN, MOON_RADIUS_KM, PRESET_AXES_KM, UNREACHABLE_AOI,
};
use crate::coverage::{aggregate_cov, fibonacci_points, region_points, CoverageMode, ObservationPoint};
use crate::error::{CoreError, Result};
use crate::frames::{ecef_from_geodetic, ecef_to_eci_matrix, Epoch, GeodeticSite, LunarElements, LunarFrame};
use crate::orbits::{
    admissible_semi_major_axes, geo_position_ecef, GeoSpec, HaloFamily, HaloOrbit, HaloSpec,
    KeplerElements, KeplerOrbit, LibrationPoint,
};
use crate::{Mat3, Vec3};

/// Satellite counts per orbit family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationConfig {
    pub n_geo: u32,
    pub n_l1: u32,
    pub n_ord: u32,
    pub n_l2: u32,
}

impl ConstellationConfig {
    pub fn new(n_geo: u32, n_l1: u32, n_ord: u32, n_l2: u32) -> Result<Self> {
        let c = ConstellationConfig {
            n_geo,
            n_l1,
            n_ord,
            n_l2,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("n_geo", self.n_geo), ("n_l1", self.n_l1), ("n_l2", self.n_l2)] {
            if !(1..=2).contains(&v) {
                return Err(CoreError::domain(what, format!("{v} outside [1, 2]")));
            }
        }
        if self.n_ord == 0 {
            return Err(CoreError::domain("n_ord", "must be at least 1"));
        }
        Ok(())
    }

    pub fn total(&self) -> u32 {
        self.n_geo + self.n_l1 + self.n_ord + self.n_l2
    }

    pub fn genome_len(&self) -> usize {
        2 + 3 * self.n_ord as usize
    }
}

impl std::fmt::Display for ConstellationConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{},{},{}}}", self.n_geo, self.n_l1, self.n_ord, self.n_l2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Satellite {
    Geo(GeoSpec),
    Halo(HaloSpec),
    Ordinary(KeplerElements),
}

impl Satellite {
    pub fn group(&self) -> Group {
        match self {
            Satellite::Geo(_) => Group::Geo,
            Satellite::Ordinary(_) => Group::Ordinary,
            Satellite::Halo(h) => match h.point {
                LibrationPoint::L1 => Group::Eml1,
                LibrationPoint::L2 => Group::Eml2,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    pub satellites: Vec<Satellite>,
}

impl Constellation {
    pub fn count(&self, group: Group) -> usize {
        self.satellites.iter().filter(|s| s.group() == group).count()
    }

    pub fn without_group(&self, group: Group) -> Constellation {
        Constellation {
            satellites: self
                .satellites
                .iter()
                .filter(|s| s.group() != group)
                .copied()
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AxisCatalog {
    /// The six axes of the reference experiment.
    Preset,
    /// Every commensurable axis from the period-ratio enumeration.
    Enumerated { y_max: u32, a_min_km: f64, a_max_km: f64 },
    Custom { axes_km: Vec<f64> },
}

impl Default for AxisCatalog {
    fn default() -> Self {
        AxisCatalog::Preset
    }
}

impl AxisCatalog {
    pub fn axes(&self, halo_period_min: f64) -> Result<Vec<f64>> {
        let axes = match self {
            AxisCatalog::Preset => PRESET_AXES_KM.to_vec(),
            AxisCatalog::Enumerated {
                y_max,
                a_min_km,
                a_max_km,
            } => admissible_semi_major_axes(halo_period_min, *y_max, *a_min_km, *a_max_km)?
                .into_iter()
                .map(|a| a.semi_major_axis_km)
                .collect(),
            AxisCatalog::Custom { axes_km } => axes_km.clone(),
        };
        if axes.is_empty() {
            return Err(CoreError::domain("axis catalog", "no admissible semi-major axes"));
        }
        for &a in &axes {
            KeplerElements::circular(a, 0.0, 0.0, 0.0).validate()?;
        }
        Ok(axes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoiPoints {
    /// Sources spread over the whole lunar surface.
    #[default]
    FullSurface,
    /// Sources restricted to the coverage target region.
    Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStation {
    pub name: String,
    pub site: GeodeticSite,
}

pub fn default_ground_stations() -> Vec<GroundStation> {
    [
        ("Xinjiang", 76.71, 38.43),
        ("Beijing", 117.0, 40.56),
        ("Kunming", 102.8, 25.03),
        ("Heilongjiang", 130.78, 46.50),
    ]
    .into_iter()
    .map(|(name, lon, lat)| GroundStation {
        name: name.to_string(),
        site: GeodeticSite {
            longitude_deg: lon,
            latitude_deg: lat,
            height_km: 0.0,
        },
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub start: Epoch,
    pub duration_min: f64,
    pub sample_interval_min: f64,
    /// Number of observation points (and of sources).
    pub points: usize,
    pub theta_c_deg: f64,
    pub region_lat_min_deg: f64,
    pub region_lat_max_deg: f64,
    pub ground_stations: Vec<GroundStation>,
    pub halo_amplitude_km: f64,
    pub halo_period_min: f64,
    pub halo_phase0_deg: f64,
    pub coverage_mode: CoverageMode,
    pub aoi_points: AoiPoints,
    pub axis_catalog: AxisCatalog,
    pub lunar_elements: LunarElements,
    pub graph: GraphOptions,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            start: "2024-05-01T00:00:00Z".parse().expect("valid default epoch"),
            duration_min: 2.0 * HALO_PERIOD_MIN,
            sample_interval_min: 60.0,
            points: 100,
            theta_c_deg: 5.0,
            region_lat_min_deg: -90.0,
            region_lat_max_deg: -40.0,
            ground_stations: default_ground_stations(),
            halo_amplitude_km: HALO_AMPLITUDE_KM,
            halo_period_min: HALO_PERIOD_MIN,
            halo_phase0_deg: 0.0,
            coverage_mode: CoverageMode::TimeAveraged,
            aoi_points: AoiPoints::FullSurface,
            axis_catalog: AxisCatalog::Preset,
            lunar_elements: LunarElements::default(),
            graph: GraphOptions::default(),
        }
    }
}

impl ScenarioParams {
    /// Samples at every whole interval from the start, covering the window:
    /// `ceil(duration / interval) + 1`.
    pub fn sample_count(&self) -> usize {
        (self.duration_min / self.sample_interval_min).ceil() as usize + 1
    }

    pub fn sample_time_min(&self, j: usize) -> f64 {
        j as f64 * self.sample_interval_min
    }

    pub fn halo_spec(&self, point: LibrationPoint, family: HaloFamily) -> HaloSpec {
        HaloSpec {
            point,
            family,
            amplitude_z_km: self.halo_amplitude_km,
            period_min: self.halo_period_min,
            phase0_deg: self.halo_phase0_deg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_min >= 0.0 && self.duration_min.is_finite()) {
            return Err(CoreError::domain("duration", "must be finite and non-negative"));
        }
        if !(self.sample_interval_min > 0.0 && self.sample_interval_min.is_finite()) {
            return Err(CoreError::domain("sample interval", "must be positive"));
        }
        if self.points == 0 {
            return Err(CoreError::domain("points", "need at least one observation point"));
        }
        if !(0.0..90.0).contains(&self.theta_c_deg) {
            return Err(CoreError::domain(
                "elevation mask",
                format!("{} outside [0, 90)", self.theta_c_deg),
            ));
        }
        if !(self.region_lat_min_deg < self.region_lat_max_deg
            && self.region_lat_min_deg >= -90.0
            && self.region_lat_max_deg <= 90.0)
        {
            return Err(CoreError::domain(
                "region",
                format!(
                    "[{}, {}] must be an increasing latitude band",
                    self.region_lat_min_deg, self.region_lat_max_deg
                ),
            ));
        }
        if self.ground_stations.is_empty() {
            return Err(CoreError::domain("ground stations", "need at least one"));
        }
        for gs in &self.ground_stations {
            gs.site.validate()?;
        }
        if !(self.halo_amplitude_km > 0.0 && self.halo_period_min > 0.0) {
            return Err(CoreError::domain("halo", "amplitude and period must be positive"));
        }
        self.lunar_elements.validate()?;
        self.axis_catalog.axes(self.halo_period_min)?;
        Ok(())
    }
}

/// Gene bounds: semi-major-axis index, then (inclination, RAAN, true anomaly)
/// per ordinary satellite, then the first GEO longitude.
pub fn gene_specs(config: &ConstellationConfig, axis_count: usize) -> Vec<GeneSpec> {
    let mut specs = vec![GeneSpec::categorical(axis_count)];
    for _ in 0..config.n_ord {
        specs.push(GeneSpec::real(0.0, 180.0));
        specs.push(GeneSpec::real(0.0, 360.0));
        specs.push(GeneSpec::real(0.0, 360.0));
    }
    specs.push(GeneSpec::real(0.0, 180.0));
    specs
}

/// Offset of the second GEO relay from the first.
pub const SECOND_GEO_OFFSET_DEG: f64 = 60.0;

pub fn decode(
    config: &ConstellationConfig,
    genome: &[f64],
    axes: &[f64],
    params: &ScenarioParams,
) -> Result<Constellation> {
    config.validate()?;
    if genome.len() != config.genome_len() {
        return Err(CoreError::domain(
            "genome",
            format!("length {} but {config} needs {}", genome.len(), config.genome_len()),
        ));
    }
    for (k, (g, spec)) in genome.iter().zip(gene_specs(config, axes.len())).enumerate() {
        if !spec.contains(*g) {
            return Err(CoreError::domain("genome", format!("gene {k} = {g} outside {spec:?}")));
        }
    }
    let a = axes[genome[0] as usize];
    let mut satellites = Vec::with_capacity(config.total() as usize);
    let families = [HaloFamily::South, HaloFamily::North];
    for &family in &families[..config.n_l2 as usize] {
        satellites.push(Satellite::Halo(params.halo_spec(LibrationPoint::L2, family)));
    }
    for k in 0..config.n_ord as usize {
        let g = &genome[1 + 3 * k..4 + 3 * k];
        satellites.push(Satellite::Ordinary(KeplerElements::circular(a, g[0], g[1], g[2])));
    }
    for &family in &families[..config.n_l1 as usize] {
        satellites.push(Satellite::Halo(params.halo_spec(LibrationPoint::L1, family)));
    }
    let xi = genome[genome.len() - 1];
    satellites.push(Satellite::Geo(GeoSpec { longitude_deg: xi }));
    if config.n_geo == 2 {
        satellites.push(Satellite::Geo(GeoSpec {
            longitude_deg: (xi + SECOND_GEO_OFFSET_DEG).rem_euclid(360.0),
        }));
    }
    let out = Constellation { satellites };
    check_structure(config, &out, params)?;
    Ok(out)
}

/// Structural constraints of a decoded constellation: family counts, one
/// shared semi-major axis, circular orbits with a safe perigee, a shared halo
/// amplitude and GEO longitudes spaced by the fixed offset.
pub fn check_structure(
    config: &ConstellationConfig,
    c: &Constellation,
    params: &ScenarioParams,
) -> Result<()> {
    let fail = |detail: String| Err(CoreError::domain("constellation", detail));
    let counts = [
        (Group::Geo, config.n_geo),
        (Group::Eml1, config.n_l1),
        (Group::Ordinary, config.n_ord),
        (Group::Eml2, config.n_l2),
    ];
    for (g, n) in counts {
        if c.count(g) != n as usize {
            return fail(format!("expected {n} satellites in {g:?}, found {}", c.count(g)));
        }
    }
    if c.satellites.len() != config.total() as usize {
        return fail("unexpected satellite count".into());
    }
    let mut axis = None;
    let mut geos = Vec::new();
    for s in &c.satellites {
        match s {
            Satellite::Ordinary(k) => {
                k.validate()?;
                if k.eccentricity != 0.0 || k.arg_perigee_deg != 0.0 {
                    return fail("ordinary orbits must be circular".into());
                }
                if *axis.get_or_insert(k.semi_major_axis_km) != k.semi_major_axis_km {
                    return fail("ordinary orbits must share one semi-major axis".into());
                }
            }
            Satellite::Halo(h) => {
                if h.amplitude_z_km != params.halo_amplitude_km {
                    return fail("halo orbits must share one amplitude".into());
                }
            }
            Satellite::Geo(g) => geos.push(g.longitude_deg),
        }
    }
    if !(0.0..=180.0).contains(&geos[0]) {
        return fail(format!("GEO longitude {} outside [0, 180]", geos[0]));
    }
    if geos.len() == 2 && (geos[0] + SECOND_GEO_OFFSET_DEG).rem_euclid(360.0) != geos[1] {
        return fail("second GEO must trail the first by the fixed offset".into());
    }
    Ok(())
}

/// Inverse of [`decode`] for constellations it produced.
pub fn encode(config: &ConstellationConfig, c: &Constellation, axes: &[f64]) -> Result<Vec<f64>> {
    let ordinary: Vec<&KeplerElements> = c
        .satellites
        .iter()
        .filter_map(|s| match s {
            Satellite::Ordinary(k) => Some(k),
            _ => None,
        })
        .collect();
    if ordinary.len() != config.n_ord as usize {
        return Err(CoreError::domain("constellation", "ordinary satellite count mismatch"));
    }
    let a = ordinary[0].semi_major_axis_km;
    let index = axes
        .iter()
        .position(|&x| x == a)
        .ok_or_else(|| CoreError::domain("constellation", format!("axis {a} not in catalog")))?;
    let xi = c
        .satellites
        .iter()
        .find_map(|s| match s {
            Satellite::Geo(g) => Some(g.longitude_deg),
            _ => None,
        })
        .ok_or_else(|| CoreError::domain("constellation", "no GEO relay"))?;
    let mut genome = vec![index as f64];
    for k in ordinary {
        genome.extend([k.inclination_deg, k.raan_deg, k.true_anomaly_deg]);
    }
    genome.push(xi);
    Ok(genome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkerFamily {
    Star,
    Delta,
}

pub const WALKER_STAR_INCLINATION_DEG: f64 = 90.0;
pub const WALKER_DELTA_INCLINATION_DEG: f64 = 60.0;
pub const BASELINE_GEO_LONGITUDE_DEG: f64 = 90.0;

/// `n` satellites in `n` evenly spaced circular planes, one per plane, with
/// RAAN and phase both stepping by 360/n. With `with_geo`, one of the `n` is a
/// GEO relay at 90 E and the spacing uses the remaining lunar count.
pub fn walker_constellation(
    n: usize,
    family: WalkerFamily,
    a_km: f64,
    inclination_deg: f64,
    with_geo: bool,
) -> Result<Constellation> {
    if n == 0 {
        return Err(CoreError::domain("Walker constellation", "needs at least one satellite"));
    }
    let lunar = if with_geo { n - 1 } else { n };
    let inc = match family {
        WalkerFamily::Star => WALKER_STAR_INCLINATION_DEG,
        WalkerFamily::Delta => inclination_deg,
    };
    let mut satellites = Vec::with_capacity(n);
    for j in 0..lunar {
        let angle = j as f64 * 360.0 / lunar as f64;
        let el = KeplerElements::circular(a_km, inc, angle, angle);
        el.validate()?;
        satellites.push(Satellite::Ordinary(el));
    }
    if with_geo {
        satellites.push(Satellite::Geo(GeoSpec {
            longitude_deg: BASELINE_GEO_LONGITUDE_DEG,
        }));
    }
    Ok(Constellation { satellites })
}

/// Node positions of one constellation at one instant, computed from scratch.
pub fn snapshot_at(
    constellation: &Constellation,
    sources_lce: &[Vec3],
    ground_stations: &[GeodeticSite],
    start: Epoch,
    t_min: f64,
    lunar_elements: &LunarElements,
) -> Result<NetworkSnapshot> {
    let epoch = start.plus_minutes(t_min);
    let frame = LunarFrame::at(epoch, lunar_elements)?;
    let to_eci = ecef_to_eci_matrix(epoch);
    let mut nodes: Vec<Node> = sources_lce
        .iter()
        .map(|p| Node {
            group: Group::Source,
            position: frame.to_eci(p),
        })
        .collect();
    for s in &constellation.satellites {
        let position = match s {
            Satellite::Geo(g) => to_eci * geo_position_ecef(g),
            Satellite::Halo(h) => frame.to_eci(&HaloOrbit::new(*h)?.position(t_min)),
            Satellite::Ordinary(k) => frame.to_eci(&k.propagator()?.position(t_min)?),
        };
        nodes.push(Node {
            group: s.group(),
            position,
        });
    }
    for site in ground_stations {
        nodes.push(Node {
            group: Group::Egs,
            position: to_eci * ecef_from_geodetic(site),
        });
    }
    Ok(NetworkSnapshot {
        epoch,
        moon_center: frame.moon_eci,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Average per-device age of information.
    pub aoi: f64,
    /// Coverage ratio of the target region.
    pub cov: f64,
    /// (sample, source) pairs with no route to a ground station.
    pub unreachable: usize,
}

struct Sample {
    t_min: f64,
    epoch: Epoch,
    frame: LunarFrame,
    ecef_to_eci: Mat3,
    sources_eci: Vec<Vec3>,
    stations_eci: Vec<Vec3>,
}

enum Propagator {
    Geo(Vec3),
    CachedHalo(usize),
    Halo(HaloOrbit),
    Ordinary(KeplerOrbit),
}

/// Scenario evaluator with every genome-independent quantity precomputed.
pub struct Evaluator {
    params: ScenarioParams,
    link: LinkModel,
    axes: Vec<f64>,
    region: Vec<ObservationPoint>,
    sources: Vec<ObservationPoint>,
    samples: Vec<Sample>,
    halo_specs: Vec<HaloSpec>,
    /// `halo_lce[h][j]`: position of cached halo `h` at sample `j`.
    halo_lce: Vec<Vec<Vec3>>,
}

impl Evaluator {
    pub fn new(params: ScenarioParams, link: LinkModel) -> Result<Self> {
        params.validate()?;
        link.validate()?;
        let axes = params.axis_catalog.axes(params.halo_period_min)?;
        let region = region_points(
            params.points,
            params.region_lat_min_deg,
            params.region_lat_max_deg,
            MOON_RADIUS_KM,
        )?;
        let sources = match params.aoi_points {
            AoiPoints::FullSurface => fibonacci_points(params.points, MOON_RADIUS_KM),
            AoiPoints::Region => region.clone(),
        };
        let samples = (0..params.sample_count())
            .into_par_iter()
            .map(|j| {
                let t_min = params.sample_time_min(j);
                let epoch = params.start.plus_minutes(t_min);
                let frame = LunarFrame::at(epoch, &params.lunar_elements)?;
                let ecef_to_eci = ecef_to_eci_matrix(epoch);
                Ok(Sample {
                    t_min,
                    epoch,
                    frame,
                    ecef_to_eci,
                    sources_eci: sources.iter().map(|p| frame.to_eci(&p.position)).collect(),
                    stations_eci: params
                        .ground_stations
                        .iter()
                        .map(|g| ecef_to_eci * ecef_from_geodetic(&g.site))
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut halo_specs = Vec::new();
        let mut halo_lce = Vec::new();
        for point in [LibrationPoint::L1, LibrationPoint::L2] {
            for family in [HaloFamily::North, HaloFamily::South] {
                let spec = params.halo_spec(point, family);
                let orbit = HaloOrbit::new(spec)?;
                halo_lce.push(samples.iter().map(|s| orbit.position(s.t_min)).collect());
                halo_specs.push(spec);
            }
        }
        Ok(Evaluator {
            params,
            link,
            axes,
            region,
            sources,
            samples,
            halo_specs,
            halo_lce,
        })
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }

    pub fn link_model(&self) -> &LinkModel {
        &self.link
    }

    pub fn axes(&self) -> &[f64] {
        &self.axes
    }

    pub fn region_points(&self) -> &[ObservationPoint] {
        &self.region
    }

    pub fn sources(&self) -> &[ObservationPoint] {
        &self.sources
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn decode(&self, config: &ConstellationConfig, genome: &[f64]) -> Result<Constellation> {
        decode(config, genome, &self.axes, &self.params)
    }

    pub fn evaluate(&self, config: &ConstellationConfig, genome: &[f64]) -> Result<Objectives> {
        self.evaluate_constellation(&self.decode(config, genome)?)
    }

    fn propagators(&self, c: &Constellation) -> Result<Vec<(Group, Propagator)>> {
        c.satellites
            .iter()
            .map(|s| {
                let p = match s {
                    Satellite::Geo(g) => Propagator::Geo(geo_position_ecef(g)),
                    Satellite::Halo(h) => match self.halo_specs.iter().position(|x| x == h) {
                        Some(i) => Propagator::CachedHalo(i),
                        None => Propagator::Halo(HaloOrbit::new(*h)?),
                    },
                    Satellite::Ordinary(k) => Propagator::Ordinary(k.propagator()?),
                };
                Ok((s.group(), p))
            })
            .collect()
    }

    /// Satellite nodes at sample `j` plus the Moon-centered positions of the
    /// lunar-side ones.
    fn satellites_at(&self, props: &[(Group, Propagator)], j: usize) -> Result<(Vec<Node>, Vec<Vec3>)> {
        let s = &self.samples[j];
        let mut nodes = Vec::with_capacity(props.len());
        let mut lunar = Vec::with_capacity(props.len());
        for (group, p) in props {
            let position = match p {
                Propagator::Geo(ecef) => s.ecef_to_eci * ecef,
                Propagator::CachedHalo(i) => {
                    let lce = self.halo_lce[*i][j];
                    lunar.push(lce);
                    s.frame.to_eci(&lce)
                }
                Propagator::Halo(h) => {
                    let lce = h.position(s.t_min);
                    lunar.push(lce);
                    s.frame.to_eci(&lce)
                }
                Propagator::Ordinary(k) => {
                    let lce = k.position(s.t_min)?;
                    lunar.push(lce);
                    s.frame.to_eci(&lce)
                }
            };
            nodes.push(Node {
                group: *group,
                position,
            });
        }
        Ok((nodes, lunar))
    }

    /// Network snapshot at sample `j`: sources, then satellites in
    /// constellation order, then ground stations.
    pub fn snapshot(&self, c: &Constellation, j: usize) -> Result<NetworkSnapshot> {
        let props = self.propagators(c)?;
        let (sats, _) = self.satellites_at(&props, j)?;
        Ok(self.assemble(j, sats))
    }

    fn assemble(&self, j: usize, sats: Vec<Node>) -> NetworkSnapshot {
        let s = &self.samples[j];
        let mut nodes = Vec::with_capacity(s.sources_eci.len() + sats.len() + s.stations_eci.len());
        nodes.extend(s.sources_eci.iter().map(|&position| Node {
            group: Group::Source,
            position,
        }));
        nodes.extend(sats);
        nodes.extend(s.stations_eci.iter().map(|&position| Node {
            group: Group::Egs,
            position,
        }));
        NetworkSnapshot {
            epoch: s.epoch,
            moon_center: s.frame.moon_eci,
            nodes,
        }
    }

    pub fn evaluate_constellation(&self, c: &Constellation) -> Result<Objectives> {
        let props = self.propagators(c)?;
        let per_sample = (0..self.samples.len())
            .into_par_iter()
            .map(|j| {
                let (sats, lunar) = self.satellites_at(&props, j)?;
                let snapshot = self.assemble(j, sats);
                let graph = build_relay_graph(
                    &snapshot,
                    self.params.theta_c_deg,
                    &snapshot.occluders(),
                    &self.params.graph,
                );
                let labels = PathLabels::compute(&graph, &self.link);
                let mut sum = 0.0;
                let mut unreachable = 0;
                for i in 0..self.sources.len() {
                    match labels.best_from(&graph, i, &self.link) {
                        Some(b) => sum += b.aoi,
                        None => {
                            sum += UNREACHABLE_AOI;
                            unreachable += 1;
                        }
                    }
                }
                Ok((sum, unreachable, lunar))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = 0.0;
        let mut unreachable = 0;
        let mut lunar_snapshots = Vec::with_capacity(per_sample.len());
        for (sum, u, lunar) in per_sample {
            total += sum;
            unreachable += u;
            lunar_snapshots.push(lunar);
        }
        let aoi = total / (self.samples.len() * self.sources.len()) as f64;
        let cov = aggregate_cov(
            &lunar_snapshots,
            &self.region,
            self.params.theta_c_deg,
            self.params.coverage_mode,
        )?;
        Ok(Objectives {
            aoi,
            cov,
            unreachable,
        })
    }
}

/// The fixed-structure design problem handed to the optimizer. Objectives are
/// `(average AoI, -coverage)`, both minimized.
pub struct ScenarioProblem<'a> {
    evaluator: &'a Evaluator,
    config: ConstellationConfig,
    specs: Vec<GeneSpec>,
}

impl<'a> ScenarioProblem<'a> {
    pub fn new(evaluator: &'a Evaluator, config: ConstellationConfig) -> Result<Self> {
        config.validate()?;
        Ok(ScenarioProblem {
            evaluator,
            config,
            specs: gene_specs(&config, evaluator.axes().len()),
        })
    }

    pub fn config(&self) -> &ConstellationConfig {
        &self.config
    }
}

impl Problem for ScenarioProblem<'_> {
    type Error = CoreError;

    fn gene_specs(&self) -> &[GeneSpec] {
        &self.specs
    }

    fn objective_count(&self) -> usize {
        2
    }

    fn evaluate(&self, genes: &[f64]) -> Result<ObjectiveVector> {
        let o = self.evaluator.evaluate(&self.config, genes)?;
        Ok(ObjectiveVector(vec![o.aoi, -o.cov]))
    }
}
