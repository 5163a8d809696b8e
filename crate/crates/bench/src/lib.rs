//! Fixed inputs shared by the benchmarks in `benches/`.

use timt_core::TimtRecord;

/// English hypothesis/reference pairs of increasing length.
pub fn english_pairs() -> Vec<(String, String)> {
    let base =
        "please keep the door closed at all times and report any damage to the front desk staff";
    let words: Vec<&str> = base.split(' ').collect();
    [4, 8, 16]
        .iter()
        .map(|&n| {
            let reference = words[..n].join(" ");
            let mut hyp: Vec<&str> = words[..n].to_vec();
            hyp.swap(0, n / 2);
            hyp.remove(n - 1);
            (hyp.join(" "), reference)
        })
        .collect()
}

/// Small bilingual dataset for trainer benchmarks.
pub fn records() -> Vec<TimtRecord> {
    let rows = [
        ("en", "zh", "No smoking", "禁止吸烟", 1),
        (
            "en",
            "zh",
            "Open daily\n9am to 6pm",
            "每日营业\n上午9点至下午6点",
            2,
        ),
        ("en", "zh", "Please keep the door closed", "请保持门关闭", 1),
        ("zh", "en", "欢迎光临", "Welcome", 1),
        (
            "zh",
            "en",
            "营业时间\n早上八点到晚上九点",
            "Opening hours\n8 am to 9 pm",
            2,
        ),
        (
            "zh",
            "en",
            "地铁站\n二号线\n换乘",
            "Metro station\nLine 2\nTransfer",
            3,
        ),
        (
            "en",
            "zh",
            "Mind the gap between the train and the platform",
            "请注意列车与站台之间的空隙",
            1,
        ),
        (
            "zh",
            "en",
            "请勿触摸展品",
            "Please do not touch the exhibits",
            1,
        ),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, (s, t, src, reference, bbox))| {
            TimtRecord::new(format!("b{i}"), *s, *t, *src, *reference, *bbox, None)
        })
        .collect()
}
