use serde::{Deserialize, Serialize};

use crate::error::HelbaError;
use crate::server::{Choice, HelbaServer};
use crate::telemetry::BatchTrigger;
use crate::user::HelbaUser;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t: usize,
    pub arm: usize,
    pub reward: f64,
    pub batch_end: Option<BatchTrigger>,
    pub depth_used: u32,
}

/// One round of the two-party protocol: the user encrypts the contexts, the
/// server returns the encrypted comparison vector, the user decodes the arm,
/// observes the reward through `reward` and sends the chosen context and
/// reward back encrypted.
pub fn play_step(
    server: &mut HelbaServer,
    user: &mut HelbaUser,
    contexts: &[Vec<f64>],
    reward: impl FnOnce(usize) -> f64,
) -> Result<StepReport, HelbaError> {
    play_step_with(server, user, contexts, reward, |_| {})
}

/// Like [`play_step`], passing the step's ciphertexts to `inspect` before the
/// statistics are updated.
pub fn play_step_with(
    server: &mut HelbaServer,
    user: &mut HelbaUser,
    contexts: &[Vec<f64>],
    reward: impl FnOnce(usize) -> f64,
    inspect: impl FnOnce(&Choice),
) -> Result<StepReport, HelbaError> {
    let t = server.state().t;
    if t > server.config().horizon {
        return Err(HelbaError::Protocol(format!("step {t} is past the horizon")));
    }
    let xs = contexts
        .iter()
        .map(|s| user.encrypt_context(s))
        .collect::<Result<Vec<_>, _>>()?;
    let choice = server.choose(&xs, user)?;
    inspect(&choice);
    let arm = user.decode_action(&choice.b, t)?;
    let r = reward(arm);
    let x = user.encrypt_context(&contexts[arm])?;
    let y = user.encrypt_reward(r)?;
    server.observe(&x, &y, user)?;
    let batch_end = server.end_step(user)?;
    Ok(StepReport {
        t,
        arm,
        reward: r,
        batch_end,
        depth_used: server.telemetry().depth_used(t),
    })
}
