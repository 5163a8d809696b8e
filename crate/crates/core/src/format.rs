//! Tagged response layouts.
//!
//! A response is a sequence of tag blocks such as
//! `<recognize> ... </recognize> <think> ... </think> <translate> ... </translate>`.
//! Each [`TaskLayout`] fixes which blocks are required and in what order.
//! Only whitespace may appear between or around blocks, and no tag literal
//! may appear inside a block.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Recognize,
    Think,
    Translate,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::Recognize, Tag::Think, Tag::Translate];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Recognize => "recognize",
            Tag::Think => "think",
            Tag::Translate => "translate",
        }
    }

    pub fn open(self) -> &'static str {
        match self {
            Tag::Recognize => "<recognize>",
            Tag::Think => "<think>",
            Tag::Translate => "<translate>",
        }
    }

    pub fn close(self) -> &'static str {
        match self {
            Tag::Recognize => "</recognize>",
            Tag::Think => "</think>",
            Tag::Translate => "</translate>",
        }
    }
}

/// Full multi-task layout: recognition, reasoning, translation.
pub const FULL_TASKS_TEMPLATE: &str =
    "<recognize> {recognize} </recognize> <think> {think} </think> <translate> {translate} </translate>";
/// Recognition then translation, no reasoning block.
pub const NO_REASONING_TEMPLATE: &str =
    "<recognize>{recognize}</recognize> <translate>{translate}</translate>";
/// Reasoning then translation, no recognition block.
pub const NO_RECOGNITION_TEMPLATE: &str =
    "<think> {think} </think><translate> {translate} </translate>";
/// Translation block only.
pub const ONLY_TIMT_TEMPLATE: &str = "<translate>{translate}</translate>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskLayout {
    #[default]
    FullTasks,
    NoReasoning,
    NoRecognition,
    OnlyTimt,
}

impl TaskLayout {
    pub const ALL: [TaskLayout; 4] = [
        TaskLayout::FullTasks,
        TaskLayout::NoReasoning,
        TaskLayout::NoRecognition,
        TaskLayout::OnlyTimt,
    ];

    pub fn required_tags(self) -> &'static [Tag] {
        match self {
            TaskLayout::FullTasks => &[Tag::Recognize, Tag::Think, Tag::Translate],
            TaskLayout::NoReasoning => &[Tag::Recognize, Tag::Translate],
            TaskLayout::NoRecognition => &[Tag::Think, Tag::Translate],
            TaskLayout::OnlyTimt => &[Tag::Translate],
        }
    }

    pub fn requires(self, tag: Tag) -> bool {
        self.required_tags().contains(&tag)
    }

    pub fn template(self) -> &'static str {
        match self {
            TaskLayout::FullTasks => FULL_TASKS_TEMPLATE,
            TaskLayout::NoReasoning => NO_REASONING_TEMPLATE,
            TaskLayout::NoRecognition => NO_RECOGNITION_TEMPLATE,
            TaskLayout::OnlyTimt => ONLY_TIMT_TEMPLATE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskLayout::FullTasks => "full_tasks",
            TaskLayout::NoReasoning => "no_reasoning",
            TaskLayout::NoRecognition => "no_recognition",
            TaskLayout::OnlyTimt => "only_timt",
        }
    }

    /// Fills the layout's template. Segments for tags the layout does not
    /// use are ignored.
    pub fn render(self, recognize: &str, think: &str, translate: &str) -> String {
        self.template()
            .replace("{recognize}", recognize)
            .replace("{think}", think)
            .replace("{translate}", translate)
    }
}

impl fmt::Display for TaskLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown layout `{0}` (expected full_tasks, no_reasoning, no_recognition or only_timt)")]
pub struct UnknownLayout(pub String);

impl FromStr for TaskLayout {
    type Err = UnknownLayout;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "full_tasks" | "full" => Ok(TaskLayout::FullTasks),
            "no_reasoning" | "wo_reasoning" => Ok(TaskLayout::NoReasoning),
            "no_recognition" | "wo_recognition" => Ok(TaskLayout::NoRecognition),
            "only_timt" | "timt" => Ok(TaskLayout::OnlyTimt),
            _ => Err(UnknownLayout(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParsedResponse {
    pub layout: TaskLayout,
    pub recognize: Option<String>,
    pub think: Option<String>,
    pub translate: Option<String>,
    pub format_ok: bool,
}

impl ParsedResponse {
    fn invalid(layout: TaskLayout) -> Self {
        ParsedResponse {
            layout,
            recognize: None,
            think: None,
            translate: None,
            format_ok: false,
        }
    }

    pub fn segment(&self, tag: Tag) -> Option<&str> {
        match tag {
            Tag::Recognize => self.recognize.as_deref(),
            Tag::Think => self.think.as_deref(),
            Tag::Translate => self.translate.as_deref(),
        }
    }

    /// Renders the parsed segments back into the layout's template.
    /// `None` when the response was not format-valid.
    pub fn render(&self) -> Option<String> {
        if !self.format_ok {
            return None;
        }
        Some(self.layout.render(
            self.recognize.as_deref().unwrap_or(""),
            self.think.as_deref().unwrap_or(""),
            self.translate.as_deref().unwrap_or(""),
        ))
    }
}

fn contains_tag_literal(s: &str) -> bool {
    Tag::ALL
        .iter()
        .any(|t| s.contains(t.open()) || s.contains(t.close()))
}

/// Splits `raw` into the layout's segments.
///
/// Never fails: any deviation from the layout (missing, duplicated, nested,
/// reordered or unclosed tags, or stray text outside the blocks) gives
/// `format_ok = false` with every segment absent.
pub fn parse_response(raw: &str, layout: TaskLayout) -> ParsedResponse {
    let mut parsed = ParsedResponse::invalid(layout);
    let mut rest = raw;
    for &tag in layout.required_tags() {
        rest = rest.trim_start();
        let Some(after_open) = rest.strip_prefix(tag.open()) else {
            return ParsedResponse::invalid(layout);
        };
        let Some(end) = after_open.find(tag.close()) else {
            return ParsedResponse::invalid(layout);
        };
        let body = &after_open[..end];
        if contains_tag_literal(body) {
            return ParsedResponse::invalid(layout);
        }
        let segment = Some(body.trim().to_string());
        match tag {
            Tag::Recognize => parsed.recognize = segment,
            Tag::Think => parsed.think = segment,
            Tag::Translate => parsed.translate = segment,
        }
        rest = &after_open[end + tag.close().len()..];
    }
    if !rest.trim().is_empty() {
        return ParsedResponse::invalid(layout);
    }
    parsed.format_ok = true;
    parsed
}

pub const FORMAT_OK_REWARD: f64 = 1.0;
pub const FORMAT_BROKEN_REWARD: f64 = -3.0;

/// `1` for a well-formed response, `-3` otherwise.
pub fn format_reward(parsed: &ParsedResponse) -> f64 {
    if parsed.format_ok {
        FORMAT_OK_REWARD
    } else {
        FORMAT_BROKEN_REWARD
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_layout_example() {
        let p = parse_response(
            "<recognize>A</recognize> <think>B</think> <translate>C</translate>",
            TaskLayout::FullTasks,
        );
        assert!(p.format_ok);
        assert_eq!(p.recognize.as_deref(), Some("A"));
        assert_eq!(p.think.as_deref(), Some("B"));
        assert_eq!(p.translate.as_deref(), Some("C"));
        assert_eq!(format_reward(&p), 1.0);
    }

    #[test]
    fn missing_tags_fail_under_full_layout() {
        let p = parse_response("<translate>C</translate>", TaskLayout::FullTasks);
        assert!(!p.format_ok);
        assert_eq!(p.translate, None);
        assert_eq!(format_reward(&p), -3.0);
    }

    #[test]
    fn only_timt_accepts_single_block() {
        let p = parse_response("<translate>C</translate>", TaskLayout::OnlyTimt);
        assert!(p.format_ok);
        assert_eq!(p.translate.as_deref(), Some("C"));
        assert_eq!(p.recognize, None);
        assert_eq!(format_reward(&p), 1.0);
    }

    #[test]
    fn malformed_variants() {
        use TaskLayout::*;
        let cases = [
            (
                "<think>B</think><recognize>A</recognize><translate>C</translate>",
                FullTasks,
            ),
            (
                "<recognize>A</recognize><think>B</think><translate>C",
                FullTasks,
            ),
            ("<translate>C</translate><translate>D</translate>", OnlyTimt),
            ("<translate>C <think>x</think></translate>", OnlyTimt),
            ("Sure! <translate>C</translate>", OnlyTimt),
            ("<translate>C</translate> thanks", OnlyTimt),
            (
                "<recognize>A</recognize><think>B</think><translate>C</translate>",
                NoReasoning,
            ),
            (
                "<recognize>A</recognize><translate>C</translate>",
                NoRecognition,
            ),
            ("<Translate>C</Translate>", OnlyTimt),
            ("", OnlyTimt),
        ];
        for (raw, layout) in cases {
            let p = parse_response(raw, layout);
            assert!(!p.format_ok, "{raw:?} under {layout}");
            assert_eq!((p.recognize, p.think, p.translate), (None, None, None));
        }
    }

    #[test]
    fn whitespace_and_empty_segments() {
        let p = parse_response(
            "\n  <think>\n step one \n</think>\n\n<translate></translate>\n",
            TaskLayout::NoRecognition,
        );
        assert!(p.format_ok);
        assert_eq!(p.think.as_deref(), Some("step one"));
        assert_eq!(p.translate.as_deref(), Some(""));
    }

    #[test]
    fn templates_parse_under_their_layout() {
        for layout in TaskLayout::ALL {
            let raw = layout.render("r", "t", "x");
            let p = parse_response(&raw, layout);
            assert!(p.format_ok, "{raw}");
            assert_eq!(p.translate.as_deref(), Some("x"));
            assert_eq!(p.render().unwrap(), raw);
            assert_eq!(layout.required_tags().last(), Some(&Tag::Translate));
        }
    }

    #[test]
    fn layout_names_round_trip() {
        for layout in TaskLayout::ALL {
            assert_eq!(layout.name().parse::<TaskLayout>().unwrap(), layout);
        }
        assert!("fancy".parse::<TaskLayout>().is_err());
    }
}
