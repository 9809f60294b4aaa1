//! Command → role authorization.

use ledger_state::Role;

use crate::payload::Command;

/// Static authorization table: which roles may submit which commands.
///
/// Registration of indicators and weights is the product manager's job,
/// generator registration is the data scientist's, auditing the auditor's.
/// Ranking computation (`qos`) is open to any authenticated participant.
#[derive(Debug, Clone, Copy, Default)]
pub struct PermissionTable;

impl PermissionTable {
    /// True when `role` may submit `command`.
    pub fn allows(&self, command: Command, role: Role) -> bool {
        match command {
            Command::Qi | Command::Cw | Command::Wmp | Command::Wmm => {
                role == Role::ProductManager
            }
            Command::Method => role == Role::DataScientist,
            Command::Audit => role == Role::Auditor,
            Command::Qos => true,
        }
    }

    /// Human-readable requirement, used in rejection reasons.
    pub fn requirement(&self, command: Command) -> &'static str {
        match command {
            Command::Qi | Command::Cw | Command::Wmp | Command::Wmm => "product_manager",
            Command::Method => "data_scientist",
            Command::Audit => "auditor",
            Command::Qos => "any role",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registration_commands_are_product_manager_only() {
        let table = PermissionTable;
        for command in [Command::Qi, Command::Cw, Command::Wmp, Command::Wmm] {
            assert!(table.allows(command, Role::ProductManager));
            assert!(!table.allows(command, Role::DataScientist));
            assert!(!table.allows(command, Role::Auditor));
            assert!(!table.allows(command, Role::Observer));
        }
    }

    #[test]
    fn method_audit_and_qos_follow_their_owners() {
        let table = PermissionTable;
        assert!(table.allows(Command::Method, Role::DataScientist));
        assert!(!table.allows(Command::Method, Role::ProductManager));
        assert!(table.allows(Command::Audit, Role::Auditor));
        assert!(!table.allows(Command::Audit, Role::DataScientist));
        for role in Role::ALL {
            assert!(table.allows(Command::Qos, role));
        }
    }
}
