use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RubricStep {
    pub step: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub guidance: &'static str,
}

pub const RUBRIC: [RubricStep; 6] = [
    RubricStep {
        step: 1,
        key: "repository_structure",
        title: "Repository structure",
        guidance: "Line up the two file trees. Note shared layout, file names and module boundaries.",
    },
    RubricStep {
        step: 2,
        key: "core_implementation_overlap",
        title: "Core implementation overlap",
        guidance: "Open the files that implement tools or handlers. Record which functions or blocks match.",
    },
    RubricStep {
        step: 3,
        key: "boilerplate_filtering",
        title: "Boilerplate filtering",
        guidance: "Set aside licenses, manifests, lockfiles, generated code and framework scaffolding.",
    },
    RubricStep {
        step: 4,
        key: "functional_equivalence",
        title: "Functional equivalence",
        guidance: "Check whether the matching code exposes the same tools with the same behavior.",
    },
    RubricStep {
        step: 5,
        key: "divergence_assessment",
        title: "Divergence assessment",
        guidance: "List renames, added features and removed code. Judge whether they change the substance.",
    },
    RubricStep {
        step: 6,
        key: "final_label",
        title: "Final label",
        guidance: "Choose clone when the shared part is substantive logic. Otherwise choose non-clone.",
    },
];

/// Free-text notes per rubric step. Every field may be left empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RubricNotes {
    pub repository_structure: String,
    pub core_implementation_overlap: String,
    pub boilerplate_filtering: String,
    pub functional_equivalence: String,
    pub divergence_assessment: String,
    pub final_label: String,
}

impl RubricNotes {
    pub fn set(&mut self, key: &str, text: impl Into<String>) -> bool {
        let slot = match key {
            "repository_structure" | "1" => &mut self.repository_structure,
            "core_implementation_overlap" | "2" => &mut self.core_implementation_overlap,
            "boilerplate_filtering" | "3" => &mut self.boilerplate_filtering,
            "functional_equivalence" | "4" => &mut self.functional_equivalence,
            "divergence_assessment" | "5" => &mut self.divergence_assessment,
            "final_label" | "6" => &mut self.final_label,
            _ => return false,
        };
        *slot = text.into();
        true
    }
}
