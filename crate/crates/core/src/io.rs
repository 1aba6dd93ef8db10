//! Instance and schedule files.
//!
//! JSON is the canonical instance format. The CSV triplet is a directory
//! holding `slots.csv` (`id,start_utc_min,duration_min`), `interest.csv` and
//! `availability.csv`; the matrix files have a header row
//! `participant,<talk or slot ids...>` and one row per participant.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Assignment, Matrix, MultiRoundSchedule, Participant, RawInstance, SchedulingInstance, Slot,
    Talk,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Json,
    CsvTriplet,
}

impl std::str::FromStr for InstanceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(InstanceFormat::Json),
            "csv" | "csv-triplet" => Ok(InstanceFormat::CsvTriplet),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

pub fn load_instance(path: impl AsRef<Path>, format: InstanceFormat) -> Result<SchedulingInstance> {
    match format {
        InstanceFormat::Json => {
            let text = read(path.as_ref())?;
            instance_from_json(&text)
        }
        InstanceFormat::CsvTriplet => load_csv_triplet(path.as_ref()),
    }
}

pub fn instance_from_json(text: &str) -> Result<SchedulingInstance> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    SchedulingInstance::try_from(raw)
}

pub fn instance_to_json(instance: &SchedulingInstance) -> String {
    serde_json::to_string_pretty(&instance.to_raw()).expect("instance serializes")
}

pub fn save_instance(instance: &SchedulingInstance, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &instance_to_json(instance))
}

/// Writes the CSV triplet into `dir`, creating it if needed.
pub fn save_instance_csv(instance: &SchedulingInstance, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut slots = csv::Writer::from_writer(Vec::new());
    slots
        .write_record(["id", "start_utc_min", "duration_min"])
        .map_err(csv_err)?;
    for s in instance.slots() {
        slots
            .write_record([
                s.id.clone(),
                s.start_utc_min.to_string(),
                s.duration_min.to_string(),
            ])
            .map_err(csv_err)?;
    }
    write_bytes(&dir.join("slots.csv"), &finish(slots)?)?;

    let talk_ids: Vec<&str> = instance.talks().iter().map(|t| t.id.as_str()).collect();
    let slot_ids: Vec<&str> = instance.slots().iter().map(|s| s.id.as_str()).collect();
    write_bytes(
        &dir.join("interest.csv"),
        &matrix_csv(instance, &talk_ids, instance.interest())?,
    )?;
    write_bytes(
        &dir.join("availability.csv"),
        &matrix_csv(instance, &slot_ids, instance.availability())?,
    )?;
    Ok(())
}

fn matrix_csv(instance: &SchedulingInstance, cols: &[&str], mat: &Matrix) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["participant".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    for (p, part) in instance.participants().iter().enumerate() {
        let mut rec = vec![part.id.clone()];
        rec.extend(mat.row(p).iter().map(|v| format!("{v:?}")));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

fn load_csv_triplet(dir: &Path) -> Result<SchedulingInstance> {
    let mut slots = Vec::new();
    let text = read(&dir.join("slots.csv"))?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.deserialize::<Slot>() {
        slots.push(rec.map_err(|e| Error::Parse(format!("slots.csv: {e}")))?);
    }
    let (v_participants, talk_ids, interest) = read_matrix_csv(&dir.join("interest.csv"))?;
    let (a_participants, slot_ids, availability) = read_matrix_csv(&dir.join("availability.csv"))?;

    if v_participants.len() != a_participants.len() {
        return Err(Error::DimensionMismatch {
            what: "participants in availability.csv".into(),
            expected: v_participants.len(),
            found: a_participants.len(),
        });
    }
    if let Some((a, b)) = v_participants
        .iter()
        .zip(&a_participants)
        .find(|(a, b)| a != b)
    {
        return Err(Error::Parse(format!(
            "participant order differs between files: `{a}` vs `{b}`"
        )));
    }
    if slot_ids.len() != slots.len() {
        return Err(Error::DimensionMismatch {
            what: "availability columns vs slots.csv".into(),
            expected: slots.len(),
            found: slot_ids.len(),
        });
    }
    if let Some((col, slot)) = slot_ids.iter().zip(&slots).find(|(c, s)| **c != s.id) {
        return Err(Error::Parse(format!(
            "availability column `{col}` does not match slot `{}`",
            slot.id
        )));
    }

    let participants = v_participants
        .into_iter()
        .map(|id| Participant { id })
        .collect();
    let talks = talk_ids
        .into_iter()
        .map(|id| Talk { id, priority: None })
        .collect();
    SchedulingInstance::new(participants, talks, slots, interest, availability, None)
}

fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Matrix)> {
    let text = read(path)?;
    let name = path.display().to_string();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("{name}: {e}")))?
        .clone();
    let cols: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{name}: {e}")))?;
        let mut it = rec.iter();
        let id = it
            .next()
            .ok_or_else(|| Error::Parse(format!("{name}: empty row")))?;
        ids.push(id.to_string());
        let row = it
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{name}: `{x}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let mat = Matrix::from_rows(&rows, cols.len(), &name)?;
    if mat.cols() != cols.len() {
        return Err(Error::DimensionMismatch {
            what: format!("{name} columns"),
            expected: cols.len(),
            found: mat.cols(),
        });
    }
    Ok((ids, cols, mat))
}

#[derive(Debug, Serialize, Deserialize)]
struct RawAssignment {
    talk: String,
    slot: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSchedule {
    rounds: Vec<Vec<RawAssignment>>,
}

/// Schedule JSON, one array per round, each round ordered by talk index.
pub fn schedule_to_json(instance: &SchedulingInstance, schedule: &MultiRoundSchedule) -> String {
    let raw = RawSchedule {
        rounds: schedule
            .rounds()
            .iter()
            .map(|round| {
                round
                    .iter()
                    .map(|a| RawAssignment {
                        talk: instance.talks()[a.talk].id.clone(),
                        slot: instance.slots()[a.slot].id.clone(),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("schedule serializes")
}

pub fn schedule_from_json(instance: &SchedulingInstance, text: &str) -> Result<MultiRoundSchedule> {
    let raw: RawSchedule = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let rounds = raw
        .rounds
        .into_iter()
        .map(|round| {
            round
                .into_iter()
                .map(|a| {
                    let talk = instance
                        .talk_index(&a.talk)
                        .ok_or_else(|| Error::UnknownTalkId(a.talk.clone()))?;
                    let slot = instance
                        .slot_index(&a.slot)
                        .ok_or_else(|| Error::UnknownSlotId(a.slot.clone()))?;
                    Ok(Assignment { talk, slot })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MultiRoundSchedule::new(instance, rounds)
}

pub fn save_schedule(
    instance: &SchedulingInstance,
    schedule: &MultiRoundSchedule,
    path: impl AsRef<Path>,
) -> Result<()> {
    write(path.as_ref(), &schedule_to_json(instance, schedule))
}

pub fn load_schedule(
    instance: &SchedulingInstance,
    path: impl AsRef<Path>,
) -> Result<MultiRoundSchedule> {
    schedule_from_json(instance, &read(path.as_ref())?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::Schedule;

    #[test]
    fn json_round_trip_preserves_matrices() {
        let inst = fixtures::example_problem_2();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ex2.json");
        save_instance(&inst, &path).unwrap();
        let back = load_instance(&path, InstanceFormat::Json).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn csv_round_trip_preserves_matrices() {
        let inst = crate::datagen::gen_uniform(4, 3, 5, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_instance_csv(&inst, dir.path()).unwrap();
        let back = load_instance(dir.path(), InstanceFormat::CsvTriplet).unwrap();
        assert_eq!(back.interest(), inst.interest());
        assert_eq!(back.availability(), inst.availability());
        assert_eq!(back.slots(), inst.slots());
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            instance_from_json("{\"participants\": ["),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn csv_participant_count_mismatch() {
        let inst = fixtures::example_problem_3();
        let dir = tempfile::tempdir().unwrap();
        save_instance_csv(&inst, dir.path()).unwrap();
        let a = dir.path().join("availability.csv");
        let text = fs::read_to_string(&a).unwrap();
        let trimmed: Vec<&str> = text.lines().take(2).collect();
        fs::write(&a, trimmed.join("\n") + "\n").unwrap();
        assert!(matches!(
            load_instance(dir.path(), InstanceFormat::CsvTriplet),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn schedule_round_trip() {
        let inst = fixtures::example_problem_3();
        let sched = Schedule::new(&inst, vec![3, 1]).unwrap();
        let multi = MultiRoundSchedule::from(&sched);
        let text = schedule_to_json(&inst, &multi);
        let back = schedule_from_json(&inst, &text).unwrap();
        assert_eq!(back.to_single(&inst).unwrap(), sched);
    }

    #[test]
    fn multi_round_round_trip_keeps_round_boundaries() {
        let inst = fixtures::example_problem_3();
        let multi = MultiRoundSchedule::new(
            &inst,
            vec![
                vec![
                    Assignment { talk: 1, slot: 2 },
                    Assignment { talk: 0, slot: 0 },
                ],
                vec![Assignment { talk: 0, slot: 3 }],
            ],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sched.json");
        save_schedule(&inst, &multi, &path).unwrap();
        let back = load_schedule(&inst, &path).unwrap();
        assert_eq!(back, multi);
        assert_eq!(back.rounds().len(), 2);
        assert_eq!(back.rounds()[0][0], Assignment { talk: 0, slot: 0 });
    }

    #[test]
    fn unknown_ids_are_rejected() {
        let inst = fixtures::example_problem_3();
        let bad_slot = r#"{"rounds":[[{"talk":"t1","slot":"s9"},{"talk":"t2","slot":"s1"}]]}"#;
        assert!(matches!(
            schedule_from_json(&inst, bad_slot),
            Err(Error::UnknownSlotId(_))
        ));
        let bad_talk = r#"{"rounds":[[{"talk":"x","slot":"s1"}]]}"#;
        assert!(matches!(
            schedule_from_json(&inst, bad_talk),
            Err(Error::UnknownTalkId(_))
        ));
    }
}
