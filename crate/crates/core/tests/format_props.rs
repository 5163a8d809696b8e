use proptest::prelude::*;
use timt_core::format::{format_reward, parse_response, Tag, TaskLayout};

fn layout() -> impl Strategy<Value = TaskLayout> {
    prop::sample::select(TaskLayout::ALL.to_vec())
}

/// Segment text that is already trimmed and cannot form a tag literal.
fn segment() -> impl Strategy<Value = String> {
    "[^<>\\s]([^<>]{0,30}[^<>\\s])?|".prop_map(String::from)
}

proptest! {
    #[test]
    fn rendered_segments_round_trip(layout in layout(), r in segment(), t in segment(), x in segment()) {
        let raw = layout.render(&r, &t, &x);
        let p = parse_response(&raw, layout);
        prop_assert!(p.format_ok);
        prop_assert_eq!(p.translate.as_deref(), Some(x.as_str()));
        prop_assert_eq!(p.recognize.as_deref(), layout.requires(Tag::Recognize).then_some(r.as_str()));
        prop_assert_eq!(p.think.as_deref(), layout.requires(Tag::Think).then_some(t.as_str()));
        prop_assert_eq!(p.render().unwrap(), raw);
    }

    #[test]
    fn parser_is_total_and_reward_binary(raw in "\\PC{0,200}", layout in layout()) {
        let p = parse_response(&raw, layout);
        let r = format_reward(&p);
        prop_assert!(r == 1.0 || r == -3.0);
        for tag in Tag::ALL {
            prop_assert_eq!(p.segment(tag).is_some(), p.format_ok && layout.requires(tag));
        }
    }

    #[test]
    fn tag_soup_never_panics(parts in prop::collection::vec(prop::sample::select(vec![
        "<recognize>", "</recognize>", "<think>", "</think>", "<translate>", "</translate>", " ", "x", "\n", "<", ">",
    ]), 0..16), layout in layout()) {
        let raw: String = parts.concat();
        let p = parse_response(&raw, layout);
        if p.format_ok {
            let again = parse_response(&p.render().unwrap(), layout);
            prop_assert_eq!(again, p);
        }
    }
}

#[test]
fn segments_with_tag_literals_are_rejected() {
    for layout in TaskLayout::ALL {
        for tag in Tag::ALL {
            let raw = layout.render("r", "t", &format!("x {} y", tag.open()));
            assert!(!parse_response(&raw, layout).format_ok, "{layout} {raw}");
        }
    }
}
