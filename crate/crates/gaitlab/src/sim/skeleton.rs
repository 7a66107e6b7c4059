//! Quadruped skeleton topology: named joints connected as a tree.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Joint graph of the quadruped model.
///
/// Joints are nodes, edges are bones. The edge list must form a connected
/// tree (|edges| = |joints| - 1, no cycles), which also fixes the bone set:
/// every non-root joint is the tail of exactly one bone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkeletonTopology {
    joints: Vec<String>,
    edges: Vec<(usize, usize)>,
    affected_joints: Vec<usize>,
}

impl SkeletonTopology {
    /// Validates and builds a topology from joint names, an edge list and
    /// the set of joints perturbed in the unhealthy gait.
    pub fn new(
        joints: Vec<String>,
        edges: Vec<(usize, usize)>,
        affected_joints: Vec<usize>,
    ) -> Result<Self> {
        let n = joints.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "skeleton needs at least 2 joints, got {n}"
            )));
        }
        for (i, name) in joints.iter().enumerate() {
            if joints[..i].contains(name) {
                return Err(Error::Validation(format!("duplicate joint name '{name}'")));
            }
        }
        if edges.len() != n - 1 {
            return Err(Error::Topology(format!(
                "tree over {n} joints needs {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::Topology(format!(
                    "edge ({a}, {b}) references a joint outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::Topology(format!("self-edge at joint {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Topology(format!("duplicate edge ({a}, {b})")));
            }
        }
        // Union-find connectivity check; with |E| = |V| - 1 and no duplicate
        // edges, connected implies acyclic.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        if (0..n).any(|j| find(&mut parent, j) != root) {
            return Err(Error::Topology(
                "edge list does not connect all joints".into(),
            ));
        }
        if affected_joints.is_empty() {
            return Err(Error::Validation("affected joint set is empty".into()));
        }
        if let Some(&j) = affected_joints.iter().find(|&&j| j >= n) {
            return Err(Error::Validation(format!(
                "affected joint index {j} outside 0..{n}"
            )));
        }
        Ok(Self {
            joints,
            edges,
            affected_joints,
        })
    }

    pub fn joint_names(&self) -> &[String] {
        &self.joints
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn affected_joints(&self) -> &[usize] {
        &self.affected_joints
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j == name)
    }

    /// Bones as (parent, child) pairs, rooted at joint 0.
    ///
    /// Orients every edge away from the root; the bone's head sits at the
    /// parent joint and its tail at the child joint.
    pub fn bones(&self) -> Vec<Bone> {
        let n = self.joint_count();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut bones = Vec::with_capacity(n - 1);
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(j) = stack.pop() {
            for &c in &adj[j] {
                if !visited[c] {
                    visited[c] = true;
                    bones.push(Bone {
                        name: self.joints[c].clone(),
                        head_joint: j,
                        tail_joint: c,
                    });
                    stack.push(c);
                }
            }
        }
        bones.sort_by(|a, b| a.tail_joint.cmp(&b.tail_joint));
        bones
    }

    /// Indices of `joint` plus every joint below it in the tree rooted at 0.
    pub fn subtree(&self, joint: usize) -> Vec<usize> {
        let mut children = vec![Vec::new(); self.joint_count()];
        for bone in self.bones() {
            children[bone.head_joint].push(bone.tail_joint);
        }
        let mut out = Vec::new();
        let mut stack = vec![joint];
        while let Some(j) = stack.pop() {
            out.push(j);
            stack.extend(&children[j]);
        }
        out.sort_unstable();
        out
    }

    /// Bone indices touching `joint` (as head or tail).
    pub fn bones_incident(&self, joint: usize) -> Vec<usize> {
        self.bones()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.head_joint == joint || b.tail_joint == joint)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One bone of the armature, named after the joint at its tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bone {
    pub name: String,
    pub head_joint: usize,
    pub tail_joint: usize,
}

/// Configuration for [`build_skeleton`].
#[derive(Debug, Clone)]
pub enum SkeletonConfig {
    /// The built-in 19-joint quadruped.
    Default,
    /// A custom topology, validated on build.
    Custom {
        joints: Vec<String>,
        edges: Vec<(usize, usize)>,
        affected_joints: Vec<usize>,
    },
}

/// Builds a validated topology from a configuration.
///
/// The default skeleton has 19 joints and 18 edges: an axial chain of
/// spine_rear (root), spine_front and head_tip, plus four legs of four
/// joints each (hip/shoulder, knee/elbow, ankle/wrist, paw). The default
/// affected joint is the rear-left hip.
pub fn build_skeleton(config: &SkeletonConfig) -> Result<SkeletonTopology> {
    match config {
        SkeletonConfig::Default => default_skeleton(),
        SkeletonConfig::Custom {
            joints,
            edges,
            affected_joints,
        } => SkeletonTopology::new(joints.clone(), edges.clone(), affected_joints.clone()),
    }
}

/// Joint names of the default skeleton, in index order.
pub const DEFAULT_JOINTS: [&str; 19] = [
    "spine_rear",
    "spine_front",
    "head_tip",
    "hip_rear_left",
    "knee_rear_left",
    "ankle_rear_left",
    "paw_rear_left",
    "hip_rear_right",
    "knee_rear_right",
    "ankle_rear_right",
    "paw_rear_right",
    "shoulder_front_left",
    "elbow_front_left",
    "wrist_front_left",
    "paw_front_left",
    "shoulder_front_right",
    "elbow_front_right",
    "wrist_front_right",
    "paw_front_right",
];

fn default_skeleton() -> Result<SkeletonTopology> {
    let joints: Vec<String> = DEFAULT_JOINTS.iter().map(|s| s.to_string()).collect();
    let mut edges = vec![(0, 1), (1, 2)];
    // Rear legs hang off the rear spine joint, front legs off the front one.
    for (root, leg_start) in [(0, 3), (0, 7), (1, 11), (1, 15)] {
        edges.push((root, leg_start));
        edges.push((leg_start, leg_start + 1));
        edges.push((leg_start + 1, leg_start + 2));
        edges.push((leg_start + 2, leg_start + 3));
    }
    let affected = vec![3]; // hip_rear_left
    SkeletonTopology::new(joints, edges, affected)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_has_19_joints_18_edges() {
        let topo = build_skeleton(&SkeletonConfig::Default).unwrap();
        assert_eq!(topo.joint_count(), 19);
        assert_eq!(topo.edges().len(), 18);
        assert_eq!(topo.edges().len(), topo.joint_count() - 1);
    }

    #[test]
    fn default_adjacency_is_symmetric() {
        let topo = build_skeleton(&SkeletonConfig::Default).unwrap();
        let n = topo.joint_count();
        let mut adj = vec![vec![false; n]; n];
        for &(a, b) in topo.edges() {
            adj[a][b] = true;
            adj[b][a] = true;
        }
        for i in 0..n {
            for j in 0..n {
                assert_eq!(adj[i][j], adj[j][i]);
            }
        }
    }

    #[test]
    fn default_affected_is_rear_left_hip() {
        let topo = build_skeleton(&SkeletonConfig::Default).unwrap();
        let hip = topo.joint_index("hip_rear_left").unwrap();
        assert_eq!(topo.affected_joints(), &[hip]);
    }

    #[test]
    fn disconnected_edges_rejected() {
        let err = SkeletonTopology::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![(0, 1), (2, 3), (0, 1)],
            vec![0],
        )
        .unwrap_err();
        assert_eq!(err.category(), "topology");

        // Exactly |V| - 1 edges but split into two components.
        let err = SkeletonTopology::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![(0, 1), (2, 3), (3, 2)],
            vec![0],
        )
        .unwrap_err();
        assert_eq!(err.category(), "topology");
    }

    #[test]
    fn duplicate_joint_names_rejected() {
        let err = SkeletonTopology::new(
            vec!["a".into(), "a".into()],
            vec![(0, 1)],
            vec![0],
        )
        .unwrap_err();
        assert_eq!(err.category(), "validation");
    }

    #[test]
    fn self_edge_rejected() {
        let err =
            SkeletonTopology::new(vec!["a".into(), "b".into()], vec![(0, 0)], vec![0]).unwrap_err();
        assert_eq!(err.category(), "topology");
    }

    #[test]
    fn bones_are_rooted_at_joint_zero() {
        let topo = build_skeleton(&SkeletonConfig::Default).unwrap();
        let bones = topo.bones();
        assert_eq!(bones.len(), 18);
        // Every non-root joint is the tail of exactly one bone.
        let mut tails: Vec<usize> = bones.iter().map(|b| b.tail_joint).collect();
        tails.sort_unstable();
        assert_eq!(tails, (1..19).collect::<Vec<_>>());
        for b in &bones {
            assert_eq!(b.name, topo.joint_names()[b.tail_joint]);
        }
    }

    #[test]
    fn subtree_of_affected_hip_is_the_leg_chain() {
        let topo = build_skeleton(&SkeletonConfig::Default).unwrap();
        let hip = topo.joint_index("hip_rear_left").unwrap();
        assert_eq!(topo.subtree(hip), vec![3, 4, 5, 6]);
    }

    #[test]
    fn affected_joints_must_be_valid() {
        assert!(SkeletonTopology::new(vec!["a".into(), "b".into()], vec![(0, 1)], vec![]).is_err());
        assert!(
            SkeletonTopology::new(vec!["a".into(), "b".into()], vec![(0, 1)], vec![9]).is_err()
        );
    }
}
