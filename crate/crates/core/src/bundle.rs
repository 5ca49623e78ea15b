use std::collections::BTreeSet;
use std::path::Path;

use crate::error::Error;
use crate::geo::GeoLocation;
use crate::nwp::{EnergySource, NwpRecord};
use crate::power::{PowerEntry, PowerSeries};
use crate::pv::PvPlantMeta;
use crate::time::Timestamp;
use crate::wind::WindPlantMeta;

/// Plant metadata of either energy source; one row of `meta.csv`.
#[derive(Debug, Clone, PartialEq)]
pub enum PlantMeta {
    Pv(PvPlantMeta),
    Wind(WindPlantMeta),
}

impl PlantMeta {
    pub fn loc_id(&self) -> &str {
        match self {
            PlantMeta::Pv(m) => &m.loc_id,
            PlantMeta::Wind(m) => &m.loc_id,
        }
    }

    pub fn location(&self) -> GeoLocation {
        match self {
            PlantMeta::Pv(m) => m.location,
            PlantMeta::Wind(m) => m.location,
        }
    }

    pub fn source(&self) -> EnergySource {
        match self {
            PlantMeta::Pv(_) => EnergySource::Pv,
            PlantMeta::Wind(_) => EnergySource::Wind,
        }
    }
}

/// Input/target table pair of one location.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationData {
    pub loc_id: String,
    pub inputs: Vec<NwpRecord>,
    pub targets: PowerSeries,
}

/// The unit of publication: shared `meta.csv` plus per-location
/// `data_input_<loc_id>.csv` / `data_target_<loc_id>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub source: EnergySource,
    pub meta_rows: Vec<PlantMeta>,
    pub locations: Vec<LocationData>,
}

pub fn input_file_name(loc_id: &str) -> String {
    format!("data_input_{loc_id}.csv")
}

pub fn target_file_name(loc_id: &str) -> String {
    format!("data_target_{loc_id}.csv")
}

// 17 significant digits: enough for a lossless f64 round trip.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

const META_COMMON: &[&str] = &[
    "loc_id",
    "latitude",
    "longitude",
    "input_file_name",
    "target_file_name",
    "num_train_samples",
    "num_test_samples",
];

const META_PV: &[&str] = &[
    "tilt_deg",
    "azimuth_deg",
    "module_peak_w",
    "inverter_ac_limit_w",
    "temp_coeff_per_k",
    "albedo",
    "modules_per_string",
    "strings_per_inverter",
];

const META_WIND: &[&str] = &[
    "hub_height_m",
    "rotor_diameter_m",
    "rated_power_kw",
    "turbine_type",
];

impl DatasetBundle {
    /// Check all cross-table invariants.
    pub fn validate(&self) -> Result<(), Error> {
        if self.meta_rows.len() != self.locations.len() {
            return Err(Error::BundleValidation(format!(
                "{} meta rows vs {} locations",
                self.meta_rows.len(),
                self.locations.len()
            )));
        }
        for (meta, loc) in self.meta_rows.iter().zip(&self.locations) {
            if meta.loc_id() != loc.loc_id {
                return Err(Error::BundleValidation(format!(
                    "meta row {} does not match location {}",
                    meta.loc_id(),
                    loc.loc_id
                )));
            }
            if meta.source() != self.source {
                return Err(Error::BundleValidation(format!(
                    "meta row {} has wrong energy source",
                    meta.loc_id()
                )));
            }
            loc.validate(self.source)?;
        }
        Ok(())
    }
}

impl LocationData {
    pub fn validate(&self, source: EnergySource) -> Result<(), Error> {
        self.targets.validate()?;
        if self.inputs.len() != self.targets.len() {
            return Err(Error::BundleValidation(format!(
                "{}: {} input rows vs {} target rows",
                self.loc_id,
                self.inputs.len(),
                self.targets.len()
            )));
        }
        for (record, entry) in self.inputs.iter().zip(&self.targets.entries) {
            if record.source != source {
                return Err(Error::SchemaMismatch(format!(
                    "{}: mixed-schema input record at {}",
                    self.loc_id, record.fcst_time
                )));
            }
            record.validate()?;
            if record.fcst_time != entry.time {
                return Err(Error::BundleValidation(format!(
                    "{}: input {} does not pair with target {}",
                    self.loc_id, record.fcst_time, entry.time
                )));
            }
        }
        Ok(())
    }

    pub fn num_train_samples(&self) -> usize {
        self.targets.entries.iter().filter(|e| !e.is_test).count()
    }

    pub fn num_test_samples(&self) -> usize {
        self.targets.entries.iter().filter(|e| e.is_test).count()
    }
}

/// Write the bundle under `dir`. All invariants are checked before any
/// file is created.
pub fn write_bundle(bundle: &DatasetBundle, dir: &Path) -> Result<(), Error> {
    bundle.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;

    for loc in &bundle.locations {
        write_input_table(bundle.source, loc, &dir.join(input_file_name(&loc.loc_id)))?;
        write_target_table(loc, &dir.join(target_file_name(&loc.loc_id)))?;
    }
    write_meta(bundle, &dir.join("meta.csv"))
}

fn write_input_table(source: EnergySource, loc: &LocationData, path: &Path) -> Result<(), Error> {
    let mut out = String::new();
    out.push_str("fcst_time,nwp_fcst_horiz_hours,");
    out.push_str(&source.feature_names().join(","));
    out.push('\n');
    for record in &loc.inputs {
        out.push_str(&record.fcst_time.to_string());
        out.push(',');
        out.push_str(&record.nwp_fcst_horiz_hours.to_string());
        for v in &record.values {
            out.push(',');
            out.push_str(&fmt_float(*v));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_target_table(loc: &LocationData, path: &Path) -> Result<(), Error> {
    let mut out = String::from("fcst_time,pw,is_test\n");
    for e in &loc.targets.entries {
        out.push_str(&format!(
            "{},{},{}\n",
            e.time,
            fmt_float(e.pw),
            if e.is_test { "True" } else { "False" }
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_meta(bundle: &DatasetBundle, path: &Path) -> Result<(), Error> {
    let extra = match bundle.source {
        EnergySource::Pv => META_PV,
        EnergySource::Wind => META_WIND,
    };
    let mut out = String::new();
    out.push_str(&META_COMMON.join(","));
    out.push(',');
    out.push_str(&extra.join(","));
    out.push('\n');
    for (meta, loc) in bundle.meta_rows.iter().zip(&bundle.locations) {
        let geo = meta.location();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            meta.loc_id(),
            fmt_float(geo.latitude),
            fmt_float(geo.longitude),
            input_file_name(meta.loc_id()),
            target_file_name(meta.loc_id()),
            loc.num_train_samples(),
            loc.num_test_samples(),
        ));
        match meta {
            PlantMeta::Pv(m) => {
                out.push_str(&format!(
                    ",{},{},{},{},{},{},{},{}",
                    fmt_float(m.tilt_deg),
                    fmt_float(m.azimuth_deg),
                    fmt_float(m.module_peak_w),
                    fmt_float(m.inverter_ac_limit_w),
                    fmt_float(m.temp_coeff_per_k),
                    fmt_float(m.albedo),
                    m.modules_per_string,
                    m.strings_per_inverter,
                ));
            }
            PlantMeta::Wind(m) => {
                out.push_str(&format!(
                    ",{},{},{},{}",
                    fmt_float(m.hub_height_m),
                    fmt_float(m.rotor_diameter_m),
                    fmt_float(m.rated_power_kw),
                    m.turbine_type,
                ));
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read and validate a bundle from `dir`; the energy source is inferred
/// from the `meta.csv` header.
pub fn read_bundle(dir: &Path) -> Result<DatasetBundle, Error> {
    let meta_path = dir.join("meta.csv");
    let content = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::io(meta_path.display().to_string(), e))?;
    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let pv_header: Vec<String> = META_COMMON
        .iter()
        .chain(META_PV)
        .map(|s| s.to_string())
        .collect();
    let wind_header: Vec<String> = META_COMMON
        .iter()
        .chain(META_WIND)
        .map(|s| s.to_string())
        .collect();
    let source = if headers == pv_header {
        EnergySource::Pv
    } else if headers == wind_header {
        EnergySource::Wind
    } else {
        return Err(Error::SchemaMismatch(format!(
            "unrecognized meta.csv header: {headers:?}"
        )));
    };

    let get = |record: &csv::StringRecord, name: &str| -> Result<String, Error> {
        let idx = headers.iter().position(|h| h == name).unwrap();
        Ok(record
            .get(idx)
            .ok_or_else(|| Error::SchemaMismatch(format!("short meta row, missing {name}")))?
            .to_string())
    };
    let get_f = |record: &csv::StringRecord, name: &str| -> Result<f64, Error> {
        let raw = get(record, name)?;
        raw.parse()
            .map_err(|_| Error::SchemaMismatch(format!("bad float '{raw}' in meta column {name}")))
    };

    let mut meta_rows = Vec::new();
    let mut locations = Vec::new();
    for record in reader.records() {
        let record = record?;
        let loc_id = get(&record, "loc_id")?;
        let location = GeoLocation::new(get_f(&record, "latitude")?, get_f(&record, "longitude")?)?;
        let num_train: usize = get(&record, "num_train_samples")?
            .parse()
            .map_err(|_| Error::SchemaMismatch("bad num_train_samples".into()))?;
        let num_test: usize = get(&record, "num_test_samples")?
            .parse()
            .map_err(|_| Error::SchemaMismatch("bad num_test_samples".into()))?;

        let meta = match source {
            EnergySource::Pv => {
                let m = PvPlantMeta {
                    loc_id: loc_id.clone(),
                    location,
                    tilt_deg: get_f(&record, "tilt_deg")?,
                    azimuth_deg: get_f(&record, "azimuth_deg")?,
                    module_peak_w: get_f(&record, "module_peak_w")?,
                    inverter_ac_limit_w: get_f(&record, "inverter_ac_limit_w")?,
                    temp_coeff_per_k: get_f(&record, "temp_coeff_per_k")?,
                    albedo: get_f(&record, "albedo")?,
                    modules_per_string: get(&record, "modules_per_string")?
                        .parse()
                        .map_err(|_| Error::SchemaMismatch("bad modules_per_string".into()))?,
                    strings_per_inverter: get(&record, "strings_per_inverter")?
                        .parse()
                        .map_err(|_| Error::SchemaMismatch("bad strings_per_inverter".into()))?,
                };
                m.validate()?;
                PlantMeta::Pv(m)
            }
            EnergySource::Wind => {
                let m = WindPlantMeta {
                    loc_id: loc_id.clone(),
                    location,
                    hub_height_m: get_f(&record, "hub_height_m")?,
                    rotor_diameter_m: get_f(&record, "rotor_diameter_m")?,
                    rated_power_kw: get_f(&record, "rated_power_kw")?,
                    turbine_type: get(&record, "turbine_type")?,
                };
                m.validate()?;
                PlantMeta::Wind(m)
            }
        };

        let expected_input = get(&record, "input_file_name")?;
        let expected_target = get(&record, "target_file_name")?;
        if expected_input != input_file_name(&loc_id) || expected_target != target_file_name(&loc_id)
        {
            return Err(Error::SchemaMismatch(format!(
                "{loc_id}: unexpected file names in meta.csv"
            )));
        }

        let inputs = read_input_table(source, &dir.join(expected_input))?;
        let targets = read_target_table(&dir.join(expected_target))?;
        let loc = LocationData {
            loc_id: loc_id.clone(),
            inputs,
            targets,
        };
        if loc.num_train_samples() != num_train || loc.num_test_samples() != num_test {
            return Err(Error::BundleValidation(format!(
                "{loc_id}: meta.csv sample counts ({num_train}/{num_test}) disagree with target table ({}/{})",
                loc.num_train_samples(),
                loc.num_test_samples()
            )));
        }
        meta_rows.push(meta);
        locations.push(loc);
    }

    let bundle = DatasetBundle {
        source,
        meta_rows,
        locations,
    };
    bundle.validate()?;
    // the per-location timestamp pairing is checked by validate(); also
    // reject duplicated loc_ids across the bundle
    let ids: BTreeSet<&str> = bundle.meta_rows.iter().map(|m| m.loc_id()).collect();
    if ids.len() != bundle.meta_rows.len() {
        return Err(Error::BundleValidation("duplicate loc_id".into()));
    }
    Ok(bundle)
}

fn read_input_table(source: EnergySource, path: &Path) -> Result<Vec<NwpRecord>, Error> {
    let content =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut expected = vec!["fcst_time".to_string(), "nwp_fcst_horiz_hours".to_string()];
    expected.extend(source.feature_names().iter().map(|s| s.to_string()));
    if headers != expected {
        return Err(Error::SchemaMismatch(format!(
            "{}: unexpected input columns {headers:?}",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != expected.len() {
            return Err(Error::SchemaMismatch(format!(
                "{}: short input row",
                path.display()
            )));
        }
        let fcst_time: Timestamp = record[0].parse()?;
        let horizon: u32 = record[1]
            .parse()
            .map_err(|_| Error::SchemaMismatch(format!("bad horizon '{}'", &record[1])))?;
        let values: Vec<f64> = record
            .iter()
            .skip(2)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::SchemaMismatch(format!("bad feature value '{v}'")))
            })
            .collect::<Result<_, _>>()?;
        let rec = NwpRecord {
            fcst_time,
            nwp_fcst_horiz_hours: horizon,
            source,
            values,
        };
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

fn read_target_table(path: &Path) -> Result<PowerSeries, Error> {
    let content =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut reader = csv::Reader::from_reader(content.as_bytes());
    let headers: Vec<&str> = reader.headers()?.iter().collect::<Vec<_>>().to_vec();
    if headers != ["fcst_time", "pw", "is_test"] {
        return Err(Error::SchemaMismatch(format!(
            "{}: unexpected target columns {headers:?}",
            path.display()
        )));
    }
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record?;
        let time: Timestamp = record[0].parse()?;
        let pw: f64 = record[1]
            .parse()
            .map_err(|_| Error::SchemaMismatch(format!("bad pw '{}'", &record[1])))?;
        if pw.is_nan() {
            return Err(Error::BundleValidation(format!("NaN pw at {time}")));
        }
        let is_test = match &record[2] {
            "True" | "true" | "1" => true,
            "False" | "false" | "0" => false,
            other => {
                return Err(Error::SchemaMismatch(format!(
                    "bad is_test value '{other}'"
                )))
            }
        };
        entries.push(PowerEntry { time, pw, is_test });
    }
    PowerSeries::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nwp::{EnergySource, WIND_FEATURES};

    fn wind_record(t: Timestamp, horizon: u32, v: f64) -> NwpRecord {
        NwpRecord {
            fcst_time: t,
            nwp_fcst_horiz_hours: horizon,
            source: EnergySource::Wind,
            values: vec![v; WIND_FEATURES.len()],
        }
    }

    fn small_wind_bundle() -> DatasetBundle {
        let mut meta_rows = Vec::new();
        let mut locations = Vec::new();
        for p in 0..3 {
            let loc_id = format!("wp_{p:04}");
            let location = GeoLocation::new(50.0 + p as f64 * 0.5, 8.0 + p as f64).unwrap();
            meta_rows.push(PlantMeta::Wind(WindPlantMeta {
                loc_id: loc_id.clone(),
                location,
                hub_height_m: 100.0,
                rotor_diameter_m: 80.0,
                rated_power_kw: 2000.0,
                turbine_type: "GEN-2000".into(),
            }));
            let t0 = Timestamp::from_ymd_hms(2019, 11, 30, 0, 0, 0).unwrap();
            let entries: Vec<PowerEntry> = (0..48)
                .map(|h| {
                    let time = t0.plus_hours(h);
                    PowerEntry {
                        time,
                        pw: (h as f64 / 100.0).min(1.0),
                        is_test: crate::nwp::assign_test_flag(&time),
                    }
                })
                .collect();
            let inputs = entries
                .iter()
                .map(|e| wind_record(e.time, 24 + (e.time.hour() % 24), 0.25 + p as f64))
                .collect();
            locations.push(LocationData {
                loc_id,
                inputs,
                targets: PowerSeries::new(entries).unwrap(),
            });
        }
        DatasetBundle {
            source: EnergySource::Wind,
            meta_rows,
            locations,
        }
    }

    #[test]
    fn round_trip_is_value_identical() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let back = read_bundle(dir.path()).unwrap();
        assert_eq!(bundle, back);
    }

    #[test]
    fn three_location_bundle_writes_seven_files() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let count = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(count, 7);
    }

    #[test]
    fn row_counts_equal_after_read() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let back = read_bundle(dir.path()).unwrap();
        for loc in &back.locations {
            assert_eq!(loc.inputs.len(), loc.targets.len());
        }
    }

    #[test]
    fn tampered_pw_rejected() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let target = dir.path().join(target_file_name("wp_0000"));
        let content = std::fs::read_to_string(&target).unwrap();
        let mut lines: Vec<String> = content.lines().map(str::to_string).collect();
        let parts: Vec<&str> = lines[1].split(',').collect();
        lines[1] = format!("{},1.5,{}", parts[0], parts[2]);
        std::fs::write(&target, lines.join("\n") + "\n").unwrap();
        assert!(read_bundle(dir.path()).is_err());
    }

    #[test]
    fn shuffled_target_rows_rejected() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let target = dir.path().join(target_file_name("wp_0001"));
        let content = std::fs::read_to_string(&target).unwrap();
        let mut lines: Vec<&str> = content.lines().collect();
        lines.swap(1, 2);
        std::fs::write(&target, lines.join("\n") + "\n").unwrap();
        assert!(read_bundle(dir.path()).is_err());
    }

    #[test]
    fn mismatched_row_counts_rejected() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let target = dir.path().join(target_file_name("wp_0002"));
        let content = std::fs::read_to_string(&target).unwrap();
        let lines: Vec<&str> = content.lines().collect();
        std::fs::write(&target, lines[..lines.len() - 1].join("\n") + "\n").unwrap();
        assert!(read_bundle(dir.path()).is_err());
    }

    #[test]
    fn unknown_columns_rejected() {
        let bundle = small_wind_bundle();
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&bundle, dir.path()).unwrap();
        let target = dir.path().join(target_file_name("wp_0000"));
        let content = std::fs::read_to_string(&target).unwrap();
        std::fs::write(&target, content.replacen("is_test", "is_eval", 1)).unwrap();
        assert!(matches!(
            read_bundle(dir.path()),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn invariant_violation_aborts_before_writing() {
        let mut bundle = small_wind_bundle();
        bundle.locations[0].inputs.pop(); // break pairing
        let dir = tempfile::tempdir().unwrap();
        assert!(write_bundle(&bundle, dir.path()).is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
