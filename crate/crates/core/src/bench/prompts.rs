//! Prompt templates and their instantiation.
//!
//! Templates live in `prompts/*.txt`. Images are referenced in the user text
//! as `<image:{render_id}.png>` and listed again, in order, in
//! [`Prompt::images`] so a harness can attach them at those positions.

use serde::{Deserialize, Serialize};

use super::tasks::{EvalItem, TaskId};
use crate::digest::sha256_hex;

pub const SYSTEM: &str = include_str!("prompts/system.txt");

pub fn template(task: TaskId) -> &'static str {
    match task {
        TaskId::A0I => include_str!("prompts/A0_I.txt"),
        TaskId::A0S => include_str!("prompts/A0_S.txt"),
        TaskId::A1I => include_str!("prompts/A1_I.txt"),
        TaskId::A1S => include_str!("prompts/A1_S.txt"),
        TaskId::A2I => include_str!("prompts/A2_I.txt"),
        TaskId::A2S => include_str!("prompts/A2_S.txt"),
        TaskId::A3I => include_str!("prompts/A3_I.txt"),
        TaskId::A3S => include_str!("prompts/A3_S.txt"),
        TaskId::B0I => include_str!("prompts/B0_I.txt"),
        TaskId::B0S => include_str!("prompts/B0_S.txt"),
        TaskId::C0 => include_str!("prompts/C0.txt"),
        TaskId::C1 => include_str!("prompts/C1.txt"),
        TaskId::D0 => include_str!("prompts/D0.txt"),
        TaskId::D1 => include_str!("prompts/D1.txt"),
    }
}

/// SHA-256 over the system message and every template, in task order,
/// each preceded by its name and separated by NUL bytes.
pub fn template_digest() -> String {
    let mut buf = Vec::new();
    buf.extend_from_slice(b"system\0");
    buf.extend_from_slice(SYSTEM.as_bytes());
    for t in TaskId::ALL {
        buf.push(0);
        buf.extend_from_slice(t.template().as_bytes());
        buf.push(0);
        buf.extend_from_slice(template(t).as_bytes());
    }
    sha256_hex(&buf)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
    pub images: Vec<String>,
}

pub fn image_ref(render_id: &str) -> String {
    format!("<image:{render_id}.png>")
}

/// Placeholder names in template order.
fn slots(task: TaskId) -> (&'static [&'static str], &'static [&'static str]) {
    match task {
        TaskId::A0I | TaskId::A1I | TaskId::A2I | TaskId::A3I => (&["<<IMAGE A>>", "<<IMAGE B>>"], &[]),
        TaskId::A0S | TaskId::A1S | TaskId::A2S | TaskId::A3S => (&[], &["<<PD A>>", "<<PD B>>"]),
        TaskId::B0I => (&["<<IMAGE T>>", "<<IMAGE T+1>>"], &[]),
        TaskId::B0S => (&[], &["<<PD T>>", "<<PD T+1>>"]),
        TaskId::C0 | TaskId::C1 => (&["<<IMAGE>>"], &[]),
        TaskId::D0 => (&["<<IMAGE>>"], &["<<PD>>"]),
        TaskId::D1 => (&["<<IMAGE>>"], &["<<PD A>>", "<<PD B>>", "<<PD C>>", "<<PD D>>"]),
    }
}

/// The (system, user) pair for an item.
///
/// # Panics
/// If the item's payload does not fill its template's placeholders.
pub fn render_prompt(item: &EvalItem) -> Prompt {
    let (img_slots, pd_slots) = slots(item.task);
    assert_eq!(item.images.len(), img_slots.len(), "item {} image count", item.id);
    assert_eq!(item.pds.len(), pd_slots.len(), "item {} PD count", item.id);
    let mut user = template(item.task).to_string();
    for (slot, id) in img_slots.iter().zip(&item.images) {
        user = user.replacen(slot, &image_ref(id), 1);
    }
    for (slot, pd) in pd_slots.iter().zip(&item.pds) {
        user = user.replacen(slot, &pd.split_whitespace().collect::<String>(), 1);
    }
    Prompt { system: SYSTEM.to_string(), user, images: item.images.clone() }
}
