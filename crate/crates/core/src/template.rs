//! Prompt and feedback text resources with `{name}` placeholders.
//!
//! Substitution is a single pass over the template, so values containing
//! braces (source code, JSON) are inserted verbatim.

pub const GC_TASK: &str = include_str!("../templates/gc_task.txt");
pub const GC_ADAPTIVE: &str = include_str!("../templates/gc_adaptive.txt");
pub const CD_TASK: &str = include_str!("../templates/cd_task.txt");
pub const CD_FEEDBACK: &str = include_str!("../templates/cd_feedback.txt");
pub const PY_DRIVER: &str = include_str!("../templates/py_driver.py");

/// Replaces every `{name}` whose name is bound in `vars`. Unbound
/// placeholders are left as written.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let bound = after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter().find(|(n, _)| *n == name).map(|(_, v)| (close, *v))
        });
        match bound {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Placeholder names used by a template, in order of appearance.
pub fn placeholders(template: &str) -> Vec<&str> {
    let mut names = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if after[..close].chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                names.push(&after[..close]);
                rest = &after[close + 1..];
            }
            _ => rest = after,
        }
    }
    names
}
