//! Pose file format: one JSON document per video.
//!
//! The document is bone-oriented — each frame is a list of bone records
//! with head/tail world positions and per-endpoint visibility — because
//! that is what downstream motion tooling expects. Bones are named after
//! their tail joint, so the joint-oriented in-memory representation can be
//! reconstructed exactly: every joint appears as the head or tail of at
//! least one bone, and the reader cross-checks that shared endpoints agree
//! bit-for-bit.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::camera::CameraPose;
use crate::sim::gait::{Frame, GaitClass, PoseSequence};
use crate::sim::skeleton::SkeletonTopology;

#[derive(Debug, Serialize, Deserialize)]
struct BoneRecord {
    name: String,
    head: [f64; 3],
    tail: [f64; 3],
    head_visible: bool,
    tail_visible: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct PoseDocument {
    label: String,
    fps: u32,
    camera: CameraPose,
    seed: u64,
    frames: Vec<Vec<BoneRecord>>,
}

fn document_from_sequence(seq: &PoseSequence) -> Result<PoseDocument> {
    if seq.frames.is_empty() {
        return Err(Error::Validation("pose sequence has no frames".into()));
    }
    let bones = seq.topology.bones();
    let n = seq.topology.joint_count();
    let mut frames = Vec::with_capacity(seq.frames.len());
    for (k, frame) in seq.frames.iter().enumerate() {
        if frame.positions.len() != n || frame.visible.len() != n {
            return Err(Error::Validation(format!(
                "frame {k} has {} joints, topology expects {n}",
                frame.positions.len()
            )));
        }
        for p in &frame.positions {
            if !crate::geom::is_finite(*p) {
                return Err(Error::Validation(format!(
                    "frame {k} contains a non-finite joint position"
                )));
            }
        }
        let records = bones
            .iter()
            .map(|b| BoneRecord {
                name: b.name.clone(),
                head: frame.positions[b.head_joint],
                tail: frame.positions[b.tail_joint],
                head_visible: frame.visible[b.head_joint],
                tail_visible: frame.visible[b.tail_joint],
            })
            .collect();
        frames.push(records);
    }
    Ok(PoseDocument {
        label: seq.label.as_str().to_string(),
        fps: seq.fps,
        camera: seq.camera.clone(),
        seed: seq.seed,
        frames,
    })
}

/// Formats an angle for a file-system name: whole degrees drop the
/// fraction, fractional ones swap `.` for `p` (`22.5` → `22p5`).
fn angle_token(deg: f64) -> String {
    if deg == deg.trunc() {
        format!("{}", deg as i64)
    } else {
        format!("{deg}").replace('.', "p")
    }
}

/// Directory name holding one camera-angle group's pose files.
pub fn group_dir_name(angle_lo_deg: f64, angle_hi_deg: f64) -> String {
    format!(
        "group_{}-{}",
        angle_token(angle_lo_deg),
        angle_token(angle_hi_deg)
    )
}

/// File name of one video inside its group directory.
pub fn pose_file_name(class: GaitClass, index: usize) -> String {
    format!("{}_{index:02}.json", class.as_str())
}

/// Serializes the sequence to its canonical JSON byte representation.
pub fn pose_file_bytes(seq: &PoseSequence) -> Result<Vec<u8>> {
    let doc = document_from_sequence(seq)?;
    serde_json::to_vec(&doc).map_err(|e| Error::Parse(format!("pose serialization failed: {e}")))
}

/// Writes one video to disk as JSON.
pub fn write_pose_file(seq: &PoseSequence, path: &Path) -> Result<()> {
    let doc = document_from_sequence(seq)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let writer = BufWriter::new(file);
    serde_json::to_writer(writer, &doc)
        .map_err(|e| Error::io(path, std::io::Error::new(std::io::ErrorKind::Other, e)))
}

/// Reads a pose file back, validating it against the expected topology and
/// rebuilding the joint-oriented representation. Endpoint positions and
/// visibility flags shared between bones must agree exactly.
pub fn read_pose_file(path: &Path, topology: &SkeletonTopology) -> Result<PoseSequence> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let doc: PoseDocument = serde_json::from_reader(reader)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    sequence_from_document(doc, topology)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn sequence_from_document(doc: PoseDocument, topology: &SkeletonTopology) -> Result<PoseSequence> {
    let label = GaitClass::parse(&doc.label)?;
    if doc.fps == 0 {
        return Err(Error::Parse("fps must be positive".into()));
    }
    if doc.frames.is_empty() {
        return Err(Error::Parse("pose file has no frames".into()));
    }
    let bones = topology.bones();
    let n = topology.joint_count();
    let mut frames = Vec::with_capacity(doc.frames.len());
    for (k, records) in doc.frames.iter().enumerate() {
        if records.len() != bones.len() {
            return Err(Error::Parse(format!(
                "frame {k}: expected {} bones, found {}",
                bones.len(),
                records.len()
            )));
        }
        let mut positions: Vec<Option<[f64; 3]>> = vec![None; n];
        let mut visible: Vec<Option<bool>> = vec![None; n];
        let mut seen = vec![false; bones.len()];
        for rec in records {
            let bone_idx = bones
                .iter()
                .position(|b| b.name == rec.name)
                .ok_or_else(|| Error::Parse(format!("frame {k}: unknown bone {:?}", rec.name)))?;
            if seen[bone_idx] {
                return Err(Error::Parse(format!(
                    "frame {k}: duplicate bone {:?}",
                    rec.name
                )));
            }
            seen[bone_idx] = true;
            let bone = &bones[bone_idx];
            for (joint, pos, vis) in [
                (bone.head_joint, rec.head, rec.head_visible),
                (bone.tail_joint, rec.tail, rec.tail_visible),
            ] {
                if !crate::geom::is_finite(pos) {
                    return Err(Error::Parse(format!(
                        "frame {k}: non-finite position on bone {:?}",
                        rec.name
                    )));
                }
                match positions[joint] {
                    None => positions[joint] = Some(pos),
                    Some(existing) if existing == pos => {}
                    Some(_) => {
                        return Err(Error::Parse(format!(
                            "frame {k}: bone {:?} disagrees with a sibling about a shared joint position",
                            rec.name
                        )))
                    }
                }
                match visible[joint] {
                    None => visible[joint] = Some(vis),
                    Some(existing) if existing == vis => {}
                    Some(_) => {
                        return Err(Error::Parse(format!(
                            "frame {k}: bone {:?} disagrees with a sibling about a shared visibility flag",
                            rec.name
                        )))
                    }
                }
            }
        }
        let positions: Vec<[f64; 3]> = positions
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse(format!("frame {k}: a joint has no bone record")))?;
        let visible: Vec<bool> = visible.into_iter().map(|v| v.unwrap()).collect();
        frames.push(Frame { positions, visible });
    }
    Ok(PoseSequence {
        topology: topology.clone(),
        label,
        fps: doc.fps,
        camera: doc.camera,
        seed: doc.seed,
        frames,
    })
}
