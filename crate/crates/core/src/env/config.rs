use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment geometry, reward schedule, and termination thresholds.
///
/// All lengths are meters, angles radians. The defaults encode the task as
/// trained here: a 1 m^3 workspace above a bin, a 0.3 m x 0.3 m target spawn
/// area at bin height, and the reward regime
/// `-10 * distance - 1` per step, `-1000` beyond 1 m, `+1000` on contact
/// within 0.008 m, with episodes capped at 1200 steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Maximum episode length before timeout.
    pub max_steps: u32,
    /// Fingertip-to-object distance at which the episode succeeds.
    pub contact_threshold: f64,
    /// Distance beyond which the flat far penalty applies.
    pub far_threshold: f64,
    /// Per-step cost added to the shaped reward.
    pub step_cost: f64,
    /// Multiplier on distance in the shaped reward.
    pub distance_reward_scale: f64,
    /// Flat penalty per step while farther than `far_threshold`.
    pub far_penalty: f64,
    /// Reward for the terminal contact step (replaces the shaped reward).
    pub success_bonus: f64,
    /// Per-component action clamp: dx, dy, dz (m) and d-phi (rad).
    pub action_bound: [f64; 4],
    /// Gripper position is clipped into this box.
    pub workspace_min: [f64; 3],
    pub workspace_max: [f64; 3],
    /// Object spawn area (x and y extents) at `spawn_height`.
    pub spawn_min: [f64; 2],
    pub spawn_max: [f64; 2],
    /// Object height; the object stays at bin height.
    pub spawn_height: f64,
    /// Gripper reset pose: x, y, z, yaw, pitch, roll.
    pub home_pose: [f64; 6],
    /// Fingertip point offset below the gripper center, along the approach
    /// axis.
    pub fingertip_offset: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            max_steps: 1200,
            contact_threshold: 0.008,
            far_threshold: 1.0,
            step_cost: 1.0,
            distance_reward_scale: 10.0,
            far_penalty: 1000.0,
            success_bonus: 1000.0,
            action_bound: [0.01, 0.01, 0.01, 0.05],
            workspace_min: [-0.5, -0.5, 0.0],
            workspace_max: [0.5, 0.5, 1.0],
            spawn_min: [-0.15, -0.15],
            spawn_max: [0.15, 0.15],
            spawn_height: 0.05,
            home_pose: [0.0, 0.0, 0.4, 0.0, 0.0, 0.0],
            fingertip_offset: 0.05,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if !(self.contact_threshold > 0.0) || !(self.far_threshold > self.contact_threshold) {
            return Err(Error::Config(
                "need 0 < contact_threshold < far_threshold".into(),
            ));
        }
        let all_finite = self
            .action_bound
            .iter()
            .chain(self.workspace_min.iter())
            .chain(self.workspace_max.iter())
            .chain(self.spawn_min.iter())
            .chain(self.spawn_max.iter())
            .chain(self.home_pose.iter())
            .chain([
                self.step_cost,
                self.distance_reward_scale,
                self.far_penalty,
                self.success_bonus,
                self.spawn_height,
                self.fingertip_offset,
            ].iter())
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::Config("all bounds must be finite".into()));
        }
        if self.action_bound.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::Config("action bounds must be positive".into()));
        }
        for i in 0..3 {
            if self.workspace_min[i] >= self.workspace_max[i] {
                return Err(Error::Config(format!("workspace axis {i} is empty")));
            }
        }
        for i in 0..2 {
            if self.spawn_min[i] > self.spawn_max[i] {
                return Err(Error::Config(format!("spawn region axis {i} is empty")));
            }
        }
        for i in 0..3 {
            if self.home_pose[i] < self.workspace_min[i] || self.home_pose[i] > self.workspace_max[i]
            {
                return Err(Error::Config("home pose outside workspace".into()));
            }
        }
        Ok(())
    }

    /// Reads a `key = value` config file (TOML); missing keys fall back to
    /// the defaults above.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: EnvConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_file(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serializing env config: {e}")))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}
