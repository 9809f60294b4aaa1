//! Serial command execution with role enforcement and batch atomicity.

use std::collections::BTreeMap;

use ledger_state::{Batch, Category, GlobalState, Role, Transaction};

use crate::error::ProcessorError;
use crate::payload::{Command, CommandPayload};
use crate::permissions::PermissionTable;
use crate::{audit, qos, registers};

/// Per-block execution inputs beyond the state itself.
#[derive(Debug, Clone, Copy)]
pub struct ExecutionContext {
    /// Height of the block being executed.
    pub height: u64,
}

/// Executes batches against state, resolving signers to roles fixed at
/// genesis.
#[derive(Debug, Clone, Default)]
pub struct Executor {
    permissions: PermissionTable,
    roles: BTreeMap<String, Role>,
}

impl Executor {
    pub fn new(roles: BTreeMap<String, Role>) -> Self {
        Executor {
            permissions: PermissionTable,
            roles,
        }
    }

    /// Reads the role map out of genesis settings:
    /// `{"roles": {"<public key hex>": "<role name>", ...}, ...}`.
    pub fn from_genesis_settings(settings: &serde_json::Value) -> Result<Self, ProcessorError> {
        let roles: BTreeMap<String, Role> = match settings.get("roles") {
            Some(value) => serde_json::from_value(value.clone()).map_err(|e| {
                ProcessorError::MalformedArgs {
                    command: "genesis".into(),
                    detail: e.to_string(),
                }
            })?,
            None => BTreeMap::new(),
        };
        Ok(Executor::new(roles))
    }

    pub fn role_of(&self, public_key_hex: &str) -> Option<Role> {
        self.roles.get(public_key_hex).copied()
    }

    /// Applies one transaction in place. Used inside batch execution; most
    /// callers want [`Executor::apply_batch`].
    pub fn apply_transaction(
        &self,
        state: &mut GlobalState,
        txn: &Transaction,
        ctx: &ExecutionContext,
    ) -> Result<(), ProcessorError> {
        txn.verify()?;
        let payload = CommandPayload::decode(&txn.payload)?;
        let signer = &txn.header.signer_public_key;
        let role = self
            .role_of(signer)
            .ok_or_else(|| ProcessorError::UnknownSigner(signer.clone()))?;
        if !self.permissions.allows(payload.command, role) {
            return Err(ProcessorError::PermissionDenied {
                command: payload.command.as_str().into(),
                required: self.permissions.requirement(payload.command).into(),
            });
        }
        match payload.command {
            Command::Qi => registers::apply_qi(state, &payload),
            Command::Cw => registers::apply_weights(state, &payload, Category::QiWeights),
            Command::Wmp => registers::apply_weights(state, &payload, Category::WmPlus),
            Command::Wmm => registers::apply_weights(state, &payload, Category::WmMinus),
            Command::Method => registers::apply_method(state, &payload),
            Command::Qos => qos::apply_qos(state, &payload),
            Command::Audit => audit::apply_audit(state, &payload, signer, ctx.height),
        }
    }

    /// Applies a batch atomically: every transaction succeeds and the state
    /// advances, or the first failure rolls the whole batch back and becomes
    /// its deterministic rejection reason.
    pub fn apply_batch(
        &self,
        state: &mut GlobalState,
        batch: &Batch,
        ctx: &ExecutionContext,
    ) -> Result<(), ProcessorError> {
        batch.verify()?;
        let mut scratch = state.clone();
        for txn in &batch.transactions {
            self.apply_transaction(&mut scratch, txn, ctx)?;
        }
        *state = scratch;
        Ok(())
    }
}
