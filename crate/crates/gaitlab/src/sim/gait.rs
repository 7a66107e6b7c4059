//! Procedural quadruped gait kinematics.
//!
//! The animal walks in place at the world origin facing +x (the treadmill
//! convention: scenery moves past the animal instead). All joint
//! trajectories are closed-form functions of time built from sinusoids that
//! share one stride frequency, so every sequence is periodic with the stride
//! period. Two classes are generated:
//!
//! * healthy — four legs with the usual walking phase offsets
//!   (rear-left 0.0, rear-right 0.5, front-left 0.25, front-right 0.75);
//! * unhealthy — the joints marked as affected in the topology (plus their
//!   descendants) lose vertical amplitude and acquire an extra phase lag,
//!   mimicking a lame limb.
//!
//! Per-video variation (global phase, stride scaling, per-leg phase jitter)
//! is drawn from a seeded generator *before* the class is applied, so a
//! healthy and an unhealthy video built from the same seed differ only at
//! the affected joints.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::seed::rng_from_seed;
use crate::sim::skeleton::SkeletonTopology;

/// Binary video label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GaitClass {
    Healthy,
    Unhealthy,
}

impl GaitClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GaitClass::Healthy => "healthy",
            GaitClass::Unhealthy => "unhealthy",
        }
    }

    /// Numeric label used by the classifier (healthy = 0, unhealthy = 1).
    pub fn label(self) -> u8 {
        match self {
            GaitClass::Healthy => 0,
            GaitClass::Unhealthy => 1,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "healthy" => Ok(GaitClass::Healthy),
            "unhealthy" => Ok(GaitClass::Unhealthy),
            other => Err(Error::Parse(format!("unknown gait class {other:?}"))),
        }
    }
}

/// Kinematic constants. Lengths are metres, frequencies hertz, phases are
/// fractions of a stride cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitParams {
    /// Strides per second. The default of 1.25 gives a 0.8 s stride, i.e.
    /// exactly 20 frames at 25 fps.
    pub stride_frequency_hz: f64,
    /// Peak-to-peak fore-aft paw travel.
    pub step_length_m: f64,
    /// Peak paw lift during swing.
    pub step_height_m: f64,
    /// Vertical hip oscillation amplitude.
    pub hip_sway_m: f64,
    /// Spine height above ground.
    pub body_height_m: f64,
    /// Half the spine length (spine joints sit at ±x).
    pub body_half_length_m: f64,
    /// Half the body width (left legs at +y, right legs at −y).
    pub body_half_width_m: f64,
    /// How far below the spine the leg roots sit.
    pub leg_attach_drop_m: f64,
    /// Head tip offset from the front spine joint.
    pub head_offset_m: Vec3,
    /// Vertical bounce of the front spine joint (at twice the stride rate).
    pub bob_amplitude_m: f64,
    /// Forward bulge of the knee during swing.
    pub knee_bend_m: f64,
    /// Forward bulge of the ankle during swing.
    pub ankle_bend_m: f64,
    /// Vertical-amplitude multiplier applied to affected joints.
    pub lameness_amplitude_scale: f64,
    /// Extra phase lag (in cycles) applied to affected joints.
    pub lameness_phase_shift: f64,
    /// Duty-cycle skew (radians) of affected joints: the phase angle is
    /// warped to `θ + warp·sin θ`, which stretches stance and compresses
    /// swing the way a limb in pain is favoured. Unlike an amplitude
    /// change, this alters the waveform *shape*, so it survives the
    /// per-joint standardization applied downstream. Must stay below 1 to
    /// keep the warp monotonic in time.
    pub lameness_stance_warp: f64,
    /// Half-width of the per-leg random phase jitter (in cycles).
    pub phase_jitter: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        GaitParams {
            stride_frequency_hz: 1.25,
            step_length_m: 0.24,
            step_height_m: 0.06,
            hip_sway_m: 0.03,
            body_height_m: 0.55,
            body_half_length_m: 0.35,
            body_half_width_m: 0.13,
            leg_attach_drop_m: 0.05,
            head_offset_m: [0.15, 0.0, 0.22],
            bob_amplitude_m: 0.02,
            knee_bend_m: 0.05,
            ankle_bend_m: 0.035,
            lameness_amplitude_scale: 0.4,
            lameness_phase_shift: 0.25,
            lameness_stance_warp: 0.9,
            phase_jitter: 0.02,
        }
    }
}

impl GaitParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("stride_frequency_hz", self.stride_frequency_hz),
            ("step_length_m", self.step_length_m),
            ("step_height_m", self.step_height_m),
            ("body_height_m", self.body_height_m),
            ("body_half_length_m", self.body_half_length_m),
            ("body_half_width_m", self.body_half_width_m),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Parameter(format!(
                    "gait parameter {name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.lameness_amplitude_scale >= 0.0 && self.lameness_amplitude_scale.is_finite()) {
            return Err(Error::Parameter(
                "lameness_amplitude_scale must be non-negative".into(),
            ));
        }
        if !(self.lameness_stance_warp >= 0.0 && self.lameness_stance_warp < 1.0) {
            return Err(Error::Parameter(format!(
                "lameness_stance_warp must lie in [0, 1) so the gait stays \
                 monotonic in time, got {}",
                self.lameness_stance_warp
            )));
        }
        Ok(())
    }
}

/// One pose frame: joint positions plus per-joint camera visibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub positions: Vec<Vec3>,
    pub visible: Vec<bool>,
}

/// A labelled motion clip over a fixed topology. `generate_gait` fills the
/// positions with every joint visible; the scene pass overwrites the
/// visibility flags and attaches the sampled camera.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    pub topology: SkeletonTopology,
    pub label: GaitClass,
    pub fps: u32,
    pub camera: crate::sim::camera::CameraPose,
    pub seed: u64,
    pub frames: Vec<Frame>,
}

impl PoseSequence {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }
}

/// Leg identity in generation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    RearLeft,
    RearRight,
    FrontLeft,
    FrontRight,
}

const LEGS: [Leg; 4] = [Leg::RearLeft, Leg::RearRight, Leg::FrontLeft, Leg::FrontRight];

impl Leg {
    /// Walking-gait phase offsets in cycles: diagonal pairs half a cycle
    /// apart, rear legs leading their ipsilateral front legs by a quarter.
    fn phase(self) -> f64 {
        match self {
            Leg::RearLeft => 0.0,
            Leg::RearRight => 0.5,
            Leg::FrontLeft => 0.25,
            Leg::FrontRight => 0.75,
        }
    }

    fn is_front(self) -> bool {
        matches!(self, Leg::FrontLeft | Leg::FrontRight)
    }

    fn is_left(self) -> bool {
        matches!(self, Leg::RearLeft | Leg::FrontLeft)
    }

    fn index(self) -> usize {
        match self {
            Leg::RearLeft => 0,
            Leg::RearRight => 1,
            Leg::FrontLeft => 2,
            Leg::FrontRight => 3,
        }
    }

    /// Joint names along the chain, root first.
    fn joint_names(self) -> [&'static str; 4] {
        match self {
            Leg::RearLeft => ["hip_rear_left", "knee_rear_left", "ankle_rear_left", "paw_rear_left"],
            Leg::RearRight => [
                "hip_rear_right",
                "knee_rear_right",
                "ankle_rear_right",
                "paw_rear_right",
            ],
            Leg::FrontLeft => [
                "shoulder_front_left",
                "elbow_front_left",
                "wrist_front_left",
                "paw_front_left",
            ],
            Leg::FrontRight => [
                "shoulder_front_right",
                "elbow_front_right",
                "wrist_front_right",
                "paw_front_right",
            ],
        }
    }
}

/// Position along the leg chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LegJoint {
    Hip,
    Knee,
    Ankle,
    Paw,
}

const LEG_JOINTS: [LegJoint; 4] = [LegJoint::Hip, LegJoint::Knee, LegJoint::Ankle, LegJoint::Paw];

/// Per-joint class modification: vertical amplitude scale, phase lag, and
/// duty-cycle warp.
#[derive(Debug, Clone, Copy)]
struct ClassMod {
    amplitude_scale: f64,
    phase_shift: f64,
    stance_warp: f64,
}

const HEALTHY_MOD: ClassMod = ClassMod {
    amplitude_scale: 1.0,
    phase_shift: 0.0,
    stance_warp: 0.0,
};

/// Per-video random draws, shared verbatim between both classes.
#[derive(Debug, Clone)]
struct VideoJitter {
    global_phase: f64,
    step_length_scale: f64,
    step_height_scale: f64,
    sway_scale: f64,
    leg_phase: [f64; 4],
}

impl VideoJitter {
    fn draw(seed: u64, params: &GaitParams) -> Self {
        let mut rng = rng_from_seed(seed);
        let global_phase: f64 = rng.gen::<f64>();
        let step_length_scale = 0.9 + 0.2 * rng.gen::<f64>();
        let step_height_scale = 0.9 + 0.2 * rng.gen::<f64>();
        let sway_scale = 0.9 + 0.2 * rng.gen::<f64>();
        let mut leg_phase = [0.0; 4];
        for slot in &mut leg_phase {
            *slot = params.phase_jitter * (2.0 * rng.gen::<f64>() - 1.0);
        }
        VideoJitter {
            global_phase,
            step_length_scale,
            step_height_scale,
            sway_scale,
            leg_phase,
        }
    }
}

struct GaitModel<'a> {
    params: &'a GaitParams,
    jitter: VideoJitter,
}

impl GaitModel<'_> {
    /// Leg phase angle (radians) at time `t`, including the per-joint lag
    /// and duty-cycle warp.
    fn theta(&self, leg: Leg, t: f64, m: ClassMod) -> f64 {
        let cycles = self.params.stride_frequency_hz * t
            + leg.phase()
            + self.jitter.global_phase
            + self.jitter.leg_phase[leg.index()]
            + m.phase_shift;
        let linear = std::f64::consts::TAU * cycles;
        linear + m.stance_warp * linear.sin()
    }

    fn attach_point(&self, leg: Leg) -> Vec3 {
        let p = self.params;
        let x = if leg.is_front() {
            p.body_half_length_m
        } else {
            -p.body_half_length_m
        };
        let y = if leg.is_left() {
            p.body_half_width_m
        } else {
            -p.body_half_width_m
        };
        [x, y, p.body_height_m - p.leg_attach_drop_m]
    }

    /// Self-contained trajectory of one leg joint. The intermediate hip and
    /// paw positions are recomputed with the *same* modification as the
    /// queried joint, so changing one joint's modification never moves any
    /// other joint.
    fn leg_joint(&self, leg: Leg, joint: LegJoint, t: f64, m: ClassMod) -> Vec3 {
        let p = self.params;
        let theta = self.theta(leg, t, m);
        let attach = self.attach_point(leg);
        let hip = [
            attach[0],
            attach[1],
            attach[2] + m.amplitude_scale * self.jitter.sway_scale * p.hip_sway_m * theta.sin(),
        ];
        if joint == LegJoint::Hip {
            return hip;
        }
        // Swing (paw moving forward) happens while sin(theta) < 0, so the
        // lift envelope is the positive part of −sin.
        let half_step = 0.5 * p.step_length_m * self.jitter.step_length_scale;
        let lift = p.step_height_m * self.jitter.step_height_scale;
        let paw = [
            attach[0] + half_step * theta.cos(),
            attach[1],
            m.amplitude_scale * lift * (-theta.sin()).max(0.0),
        ];
        match joint {
            LegJoint::Hip => unreachable!(),
            LegJoint::Paw => paw,
            LegJoint::Knee => {
                let mut pos = lerp(hip, paw, 0.4);
                pos[0] += p.knee_bend_m * (0.5 + 0.5 * (theta + 1.1).sin());
                pos
            }
            LegJoint::Ankle => {
                let mut pos = lerp(hip, paw, 0.75);
                pos[0] += p.ankle_bend_m * (0.5 + 0.5 * (theta + 2.3).sin());
                pos
            }
        }
    }

    fn spine_rear(&self) -> Vec3 {
        let p = self.params;
        [-p.body_half_length_m, 0.0, p.body_height_m]
    }

    fn spine_front(&self, t: f64) -> Vec3 {
        let p = self.params;
        let omega = std::f64::consts::TAU * p.stride_frequency_hz;
        [
            p.body_half_length_m,
            0.0,
            p.body_height_m + p.bob_amplitude_m * (2.0 * omega * t + 0.9).sin(),
        ]
    }

    fn head_tip(&self, t: f64) -> Vec3 {
        let p = self.params;
        let omega = std::f64::consts::TAU * p.stride_frequency_hz;
        let base = self.spine_front(t);
        [
            base[0] + p.head_offset_m[0],
            base[1] + p.head_offset_m[1],
            base[2] + p.head_offset_m[2] + 0.5 * p.bob_amplitude_m * (2.0 * omega * t + 1.7).sin(),
        ]
    }
}

fn lerp(a: Vec3, b: Vec3, s: f64) -> Vec3 {
    [
        a[0] + s * (b[0] - a[0]),
        a[1] + s * (b[1] - a[1]),
        a[2] + s * (b[2] - a[2]),
    ]
}

/// Generates a labelled pose sequence. Frame count is `round(duration_s *
/// fps)`. The same seed produces bit-identical output, and the healthy and
/// unhealthy sequences for one seed differ only at the topology's affected
/// joints and their descendants.
///
/// The generator requires the default skeleton's joint names to be present
/// in `topology`; it errors otherwise.
pub fn generate_gait(
    topology: &SkeletonTopology,
    class: GaitClass,
    duration_s: f64,
    fps: u32,
    seed: u64,
    params: &GaitParams,
) -> Result<PoseSequence> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(Error::Parameter(format!(
            "duration must be positive and finite, got {duration_s}"
        )));
    }
    if fps == 0 {
        return Err(Error::Parameter("fps must be positive".into()));
    }
    params.validate()?;

    let frame_count = (duration_s * fps as f64).round() as usize;
    if frame_count == 0 {
        return Err(Error::Parameter(format!(
            "duration {duration_s}s at {fps} fps yields zero frames"
        )));
    }

    let model = GaitModel {
        params,
        jitter: VideoJitter::draw(seed, params),
    };

    // Resolve the joint slots this generator drives.
    let n = topology.joint_count();
    let idx = |name: &str| -> Result<usize> {
        topology.joint_index(name).ok_or_else(|| {
            Error::Parameter(format!(
                "gait generator requires the default skeleton layout; joint {name:?} is missing"
            ))
        })
    };
    let spine_rear = idx("spine_rear")?;
    let spine_front = idx("spine_front")?;
    let head_tip = idx("head_tip")?;
    let mut leg_slots = [[0usize; 4]; 4];
    for leg in LEGS {
        for (j, name) in leg.joint_names().iter().enumerate() {
            leg_slots[leg.index()][j] = idx(name)?;
        }
    }

    // Union of affected joints and their descendants.
    let mut affected = vec![false; n];
    for &j in topology.affected_joints() {
        for d in topology.subtree(j) {
            affected[d] = true;
        }
    }

    let class_mod = ClassMod {
        amplitude_scale: params.lameness_amplitude_scale,
        phase_shift: params.lameness_phase_shift,
        stance_warp: params.lameness_stance_warp,
    };
    let mod_for = |joint: usize| -> ClassMod {
        if class == GaitClass::Unhealthy && affected[joint] {
            class_mod
        } else {
            HEALTHY_MOD
        }
    };

    let mut frames = Vec::with_capacity(frame_count);
    for k in 0..frame_count {
        let t = k as f64 / fps as f64;
        let mut positions = vec![[0.0; 3]; n];
        positions[spine_rear] = model.spine_rear();
        positions[spine_front] = model.spine_front(t);
        positions[head_tip] = model.head_tip(t);
        for leg in LEGS {
            for (j, joint) in LEG_JOINTS.iter().enumerate() {
                let slot = leg_slots[leg.index()][j];
                positions[slot] = model.leg_joint(leg, *joint, t, mod_for(slot));
            }
        }
        for p in &positions {
            if !crate::geom::is_finite(*p) {
                return Err(Error::Numerical("non-finite joint position generated".into()));
            }
        }
        frames.push(Frame {
            visible: vec![true; n],
            positions,
        });
    }

    Ok(PoseSequence {
        topology: topology.clone(),
        label: class,
        fps,
        camera: crate::sim::camera::CameraPose::placeholder(),
        seed,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::skeleton::{build_skeleton, SkeletonConfig};

    fn default_topology() -> SkeletonTopology {
        build_skeleton(&SkeletonConfig::Default).unwrap()
    }

    fn gen(class: GaitClass, seed: u64) -> PoseSequence {
        generate_gait(&default_topology(), class, 7.0, 25, seed, &GaitParams::default()).unwrap()
    }

    #[test]
    fn frame_count_rounds_duration_times_fps() {
        let seq = gen(GaitClass::Healthy, 1);
        assert_eq!(seq.frame_count(), 175);
        let topo = default_topology();
        let short =
            generate_gait(&topo, GaitClass::Healthy, 0.99, 25, 1, &GaitParams::default()).unwrap();
        assert_eq!(short.frame_count(), 25); // round(24.75)
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let topo = default_topology();
        let p = GaitParams::default();
        assert!(generate_gait(&topo, GaitClass::Healthy, 0.0, 25, 1, &p).is_err());
        assert!(generate_gait(&topo, GaitClass::Healthy, -1.0, 25, 1, &p).is_err());
        assert!(generate_gait(&topo, GaitClass::Healthy, 7.0, 0, 1, &p).is_err());
        let mut bad = GaitParams::default();
        bad.stride_frequency_hz = 0.0;
        assert!(generate_gait(&topo, GaitClass::Healthy, 7.0, 25, 1, &bad).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen(GaitClass::Unhealthy, 42);
        let b = gen(GaitClass::Unhealthy, 42);
        assert_eq!(a, b);
        let c = gen(GaitClass::Unhealthy, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn root_joint_is_constant() {
        let seq = gen(GaitClass::Healthy, 7);
        let root = seq.topology.joint_index("spine_rear").unwrap();
        let first = seq.frames[0].positions[root];
        for f in &seq.frames {
            assert_eq!(f.positions[root], first);
        }
    }

    // At 25 fps a 1.25 Hz stride is exactly 20 frames, so frame k and frame
    // k+20 must coincide up to floating-point accumulation.
    #[test]
    fn trajectories_are_stride_periodic() {
        for class in [GaitClass::Healthy, GaitClass::Unhealthy] {
            let seq = gen(class, 11);
            let period = 20;
            for k in 0..seq.frame_count() - period {
                for (a, b) in seq.frames[k]
                    .positions
                    .iter()
                    .zip(&seq.frames[k + period].positions)
                {
                    for i in 0..3 {
                        assert!(
                            (a[i] - b[i]).abs() < 1e-9,
                            "frame {k} axis {i}: {} vs {}",
                            a[i],
                            b[i]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn classes_differ_only_at_affected_subtree() {
        let topo = default_topology();
        let healthy = gen(GaitClass::Healthy, 99);
        let unhealthy = gen(GaitClass::Unhealthy, 99);
        let mut affected = vec![false; topo.joint_count()];
        for &j in topo.affected_joints() {
            for d in topo.subtree(j) {
                affected[d] = true;
            }
        }
        assert_eq!(
            affected.iter().filter(|a| **a).count(),
            4,
            "default affected set is one rear leg"
        );
        let mut any_differs = false;
        for (fh, fu) in healthy.frames.iter().zip(&unhealthy.frames) {
            for j in 0..topo.joint_count() {
                let same = fh.positions[j] == fu.positions[j];
                if affected[j] {
                    any_differs |= !same;
                } else {
                    assert!(same, "unaffected joint {j} moved between classes");
                }
            }
        }
        assert!(any_differs);
    }

    // Mean vertical amplitude (|z − mean z| over frames) at the affected hip
    // must be strictly smaller for the unhealthy class, with a visible gap.
    #[test]
    fn lameness_reduces_vertical_amplitude_at_affected_hip() {
        let topo = default_topology();
        let hip = topo.joint_index("hip_rear_left").unwrap();
        let amplitude = |seq: &PoseSequence| {
            let zs: Vec<f64> = seq.frames.iter().map(|f| f.positions[hip][2]).collect();
            let mean = zs.iter().sum::<f64>() / zs.len() as f64;
            zs.iter().map(|z| (z - mean).abs()).sum::<f64>() / zs.len() as f64
        };
        for seed in 0..10 {
            let h = amplitude(&gen(GaitClass::Healthy, seed));
            let u = amplitude(&gen(GaitClass::Unhealthy, seed));
            assert!(u < h, "seed {seed}: unhealthy {u} not below healthy {h}");
            let healthy_min_deviation = 0.01;
            let max_dev = max_positional_gap(seed, hip);
            assert!(
                max_dev > healthy_min_deviation,
                "seed {seed}: class gap {max_dev} too small"
            );
        }
    }

    fn max_positional_gap(seed: u64, joint: usize) -> f64 {
        let h = gen(GaitClass::Healthy, seed);
        let u = gen(GaitClass::Unhealthy, seed);
        h.frames
            .iter()
            .zip(&u.frames)
            .map(|(a, b)| {
                let d = crate::geom::sub(a.positions[joint], b.positions[joint]);
                crate::geom::norm(d)
            })
            .fold(0.0, f64::max)
    }

    // The duty-cycle warp must change the waveform *shape* of the affected
    // hip, not just its phase or amplitude — shape is the only part of the
    // signal that survives per-joint standardization. Measured as the
    // fraction of AC power a least-squares sinusoid at the stride
    // frequency fails to explain.
    #[test]
    fn lameness_warps_the_waveform_beyond_any_sinusoid() {
        let topo = default_topology();
        let hip = topo.joint_index("hip_rear_left").unwrap();
        let residual_fraction = |seq: &PoseSequence| {
            let zs: Vec<f64> = seq.frames.iter().map(|f| f.positions[hip][2]).collect();
            let n = zs.len();
            let mean = zs.iter().sum::<f64>() / n as f64;
            let omega = std::f64::consts::TAU * GaitParams::default().stride_frequency_hz / 25.0;
            // Least-squares fit of a + b·sin(ωk) + c·cos(ωk) via the normal
            // equations of the 2-column centered design.
            let (mut ss, mut sc, mut cc, mut ys, mut yc, mut total) =
                (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for (k, &z) in zs.iter().enumerate() {
                let (s, c) = (omega * k as f64).sin_cos();
                let y = z - mean;
                ss += s * s;
                sc += s * c;
                cc += c * c;
                ys += y * s;
                yc += y * c;
                total += y * y;
            }
            let det = ss * cc - sc * sc;
            let b = (ys * cc - yc * sc) / det;
            let c = (yc * ss - ys * sc) / det;
            let mut residual = 0.0;
            for (k, &z) in zs.iter().enumerate() {
                let (s, co) = (omega * k as f64).sin_cos();
                let r = (z - mean) - b * s - c * co;
                residual += r * r;
            }
            residual / total
        };
        for seed in 0..5 {
            let healthy = residual_fraction(&gen(GaitClass::Healthy, seed));
            let unhealthy = residual_fraction(&gen(GaitClass::Unhealthy, seed));
            assert!(healthy < 0.01, "seed {seed}: healthy residual {healthy}");
            assert!(
                unhealthy > 0.04,
                "seed {seed}: unhealthy residual {unhealthy} — warp not visible"
            );
        }
    }

    #[test]
    fn paws_stay_at_or_above_ground() {
        for class in [GaitClass::Healthy, GaitClass::Unhealthy] {
            let seq = gen(class, 3);
            for name in [
                "paw_rear_left",
                "paw_rear_right",
                "paw_front_left",
                "paw_front_right",
            ] {
                let j = seq.topology.joint_index(name).unwrap();
                for f in &seq.frames {
                    assert!(f.positions[j][2] >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn legs_keep_walking_phase_offsets() {
        // Peak paw lift times should follow the 0.0 / 0.5 / 0.25 / 0.75
        // cycle offsets. Compare rear-left and rear-right: their lift
        // patterns should be anti-phase, i.e. strongly negatively
        // correlated.
        let seq = gen(GaitClass::Healthy, 5);
        let lift = |name: &str| -> Vec<f64> {
            let j = seq.topology.joint_index(name).unwrap();
            seq.frames.iter().map(|f| f.positions[j][2]).collect()
        };
        let rl = lift("paw_rear_left");
        let rr = lift("paw_rear_right");
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (m1, m2) = (mean(&rl), mean(&rr));
        let mut cov = 0.0;
        let (mut v1, mut v2) = (0.0, 0.0);
        for (a, b) in rl.iter().zip(&rr) {
            cov += (a - m1) * (b - m2);
            v1 += (a - m1).powi(2);
            v2 += (b - m2).powi(2);
        }
        let corr = cov / (v1.sqrt() * v2.sqrt());
        assert!(corr < -0.5, "rear paw lifts not anti-phase: corr = {corr}");
    }
}
